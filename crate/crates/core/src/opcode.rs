//! EVM opcode table, pinned to the Shanghai fork.
//!
//! The table ships as a versioned CSV data file; future forks are new
//! files, never in-place edits. Lookup by byte value is total: byte
//! values without a table entry resolve to a synthetic `UNKNOWN_0xXX`
//! mnemonic so no information is lost downstream.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of instructions defined by the Shanghai fork.
pub const SHANGHAI_OPCODE_COUNT: usize = 144;

const SHANGHAI_CSV: &str = include_str!("../data/opcodes_shanghai.csv");
const SHANGHAI_VERSION: &str = "shanghai";

/// One row of the opcode table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpcodeSpec {
    pub code: u8,
    pub mnemonic: String,
    /// Static base gas; `None` where the reference table lists NaN.
    pub static_gas: Option<u64>,
    /// Operand byte count; nonzero only for PUSH1..PUSH32.
    pub push_width: u8,
}

/// Immutable opcode table with total lookup over all 256 byte values.
#[derive(Debug, Clone)]
pub struct OpcodeTable {
    specs: Vec<OpcodeSpec>,
    version: String,
    spec_index: [Option<u16>; 256],
    // Mnemonic for every byte value; undefined bytes get UNKNOWN_0xXX.
    names: Vec<String>,
    name_to_code: HashMap<String, u8>,
}

impl OpcodeTable {
    /// The built-in Shanghai table (shared, loaded once).
    pub fn shanghai() -> &'static OpcodeTable {
        static TABLE: OnceLock<OpcodeTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            OpcodeTable::from_csv_str(SHANGHAI_CSV, SHANGHAI_VERSION)
                .expect("embedded opcode table is valid")
        })
    }

    /// Loads a table from an external CSV file with columns
    /// `code_hex,mnemonic,static_gas,push_width`.
    pub fn load(path: impl AsRef<Path>) -> Result<OpcodeTable> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let version = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("custom")
            .to_string();
        OpcodeTable::from_csv_str(&text, &version)
    }

    pub fn from_csv_str(text: &str, version: &str) -> Result<OpcodeTable> {
        let mut specs = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if idx == 0 {
                if line.trim() != "code_hex,mnemonic,static_gas,push_width" {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("unexpected header {line:?}"),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let code_str = fields[0].trim().trim_start_matches("0x");
            let code = u8::from_str_radix(code_str, 16).map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad code {:?}: {e}", fields[0]),
            })?;
            let mnemonic = fields[1].trim().to_string();
            if mnemonic.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "empty mnemonic".into(),
                });
            }
            let gas_field = fields[2].trim();
            let static_gas = if gas_field.is_empty() || gas_field.eq_ignore_ascii_case("nan") {
                None
            } else {
                Some(gas_field.parse::<u64>().map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("bad gas {gas_field:?}: {e}"),
                })?)
            };
            let push_width: u8 = fields[3].trim().parse().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad push_width {:?}: {e}", fields[3]),
            })?;
            if push_width > 32 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("push_width {push_width} out of range"),
                });
            }
            specs.push(OpcodeSpec {
                code,
                mnemonic,
                static_gas,
                push_width,
            });
        }
        OpcodeTable::from_specs(specs, version)
    }

    pub fn from_specs(specs: Vec<OpcodeSpec>, version: &str) -> Result<OpcodeTable> {
        let mut spec_index = [None; 256];
        let mut name_to_code = HashMap::new();
        for (i, spec) in specs.iter().enumerate() {
            if spec_index[spec.code as usize].is_some() {
                return Err(Error::Integrity(format!(
                    "duplicate opcode 0x{:02x}",
                    spec.code
                )));
            }
            spec_index[spec.code as usize] = Some(i as u16);
            if name_to_code.insert(spec.mnemonic.clone(), spec.code).is_some() {
                return Err(Error::Integrity(format!(
                    "duplicate mnemonic {}",
                    spec.mnemonic
                )));
            }
        }
        let names = (0..=255u8)
            .map(|code| match spec_index[code as usize] {
                Some(i) => specs[i as usize].mnemonic.clone(),
                None => format!("UNKNOWN_0x{code:02X}"),
            })
            .collect();
        Ok(OpcodeTable {
            specs,
            version: version.to_string(),
            spec_index,
            names,
            name_to_code,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    /// Number of defined entries.
    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn specs(&self) -> &[OpcodeSpec] {
        &self.specs
    }

    /// Spec for a defined byte value, `None` for undefined ones.
    pub fn spec(&self, code: u8) -> Option<&OpcodeSpec> {
        self.spec_index[code as usize].map(|i| &self.specs[i as usize])
    }

    pub fn is_defined(&self, code: u8) -> bool {
        self.spec_index[code as usize].is_some()
    }

    /// Mnemonic for any byte value (total; undefined → `UNKNOWN_0xXX`).
    pub fn mnemonic(&self, code: u8) -> &str {
        &self.names[code as usize]
    }

    /// Static gas for any byte value (absent for NaN rows and unknowns).
    pub fn static_gas(&self, code: u8) -> Option<u64> {
        self.spec(code).and_then(|s| s.static_gas)
    }

    /// Operand byte count for any byte value (0 for unknowns).
    pub fn push_width(&self, code: u8) -> u8 {
        self.spec(code).map_or(0, |s| s.push_width)
    }

    /// Reverse lookup, accepting both defined mnemonics and the
    /// synthetic `UNKNOWN_0xXX` form.
    pub fn code_of(&self, mnemonic: &str) -> Option<u8> {
        if let Some(&code) = self.name_to_code.get(mnemonic) {
            return Some(code);
        }
        let hex = mnemonic.strip_prefix("UNKNOWN_0x")?;
        let code = u8::from_str_radix(hex, 16).ok()?;
        if self.is_defined(code) {
            None
        } else {
            Some(code)
        }
    }
}
