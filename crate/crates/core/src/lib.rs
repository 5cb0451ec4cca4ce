//! Phishing-contract detection from deployed EVM bytecode: opcode
//! table and disassembly, labeled corpora, feature encodings, classical
//! classifiers with TreeSHAP attribution, experiment harnesses and the
//! post hoc statistics that validate model comparisons.

pub mod corpus;
pub mod disasm;
pub mod error;
pub mod eval;
pub mod features;
pub mod models;
pub mod opcode;
pub mod par;
pub mod rpc;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
