//! Seeded synthetic corpus generator for benchmarks and end-to-end
//! tests: labeled EVM-style bytecodes assembled from opcode motifs,
//! with class-dependent motif mixtures, minimal-proxy duplicates,
//! monthly deployment structure and optional temporal drift.
//!
//! Record content depends only on (seed, record index), never on
//! generation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::corpus::{ContractRecord, Corpus, Label, YearMonth};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Total records before duplicates, split evenly across classes.
    pub n_samples: usize,
    pub seed: u64,
    /// Fraction of records whose stored label is flipped.
    pub label_noise: f64,
    /// Fraction of each class drawn from the interaction (XOR-style)
    /// subpopulation that defeats linear boundaries.
    pub xor_fraction: f64,
    /// 0 = stationary; otherwise late phishing months blend towards
    /// benign motif mixtures, decaying detection over time.
    pub drift_max: f64,
    /// Extra minimal-proxy clones appended per base record.
    pub duplicate_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_samples: 7000,
            seed: 7,
            label_noise: 0.05,
            xor_fraction: 0.20,
            drift_max: 0.0,
            duplicate_fraction: 0.0,
        }
    }
}

/// Study window of the generated corpora.
pub const FIRST_MONTH: (u16, u8) = (2023, 10);
pub const MONTH_COUNT: usize = 13; // 2023-10 .. 2024-10

/// Relative monthly volume (both classes follow the same shape).
const MONTH_WEIGHTS: [f64; MONTH_COUNT] = [
    300.0, 700.0, 1500.0, 2200.0, 2600.0, 2400.0, 1900.0, 1500.0, 1200.0, 900.0, 700.0, 500.0,
    400.0,
];

fn month_of_index(i: usize) -> YearMonth {
    let (y, m) = FIRST_MONTH;
    let total = (m as usize - 1) + i;
    YearMonth {
        year: y + (total / 12) as u16,
        month: (total % 12 + 1) as u8,
    }
}

// Motif templates: (opcode byte, operand width) pairs. Operand bytes
// are drawn from small pools so frequency lookups stay meaningful.
type Motif = &'static [(u8, u8)];

const MOTIF_CALL_DRAIN: Motif = &[
    (0x33, 0), // CALLER
    (0x34, 0), // CALLVALUE
    (0x60, 1),
    (0x5A, 0), // GAS
    (0xF1, 0), // CALL
    (0x15, 0), // ISZERO
    (0x61, 2),
    (0x57, 0), // JUMPI
];
const MOTIF_SSTORE_LOOP: Motif = &[
    (0x60, 1),
    (0x54, 0), // SLOAD
    (0x60, 1),
    (0x01, 0), // ADD
    (0x60, 1),
    (0x55, 0), // SSTORE
];
const MOTIF_DELEGATE: Motif = &[
    (0x73, 20), // PUSH20
    (0x5A, 0),
    (0xF4, 0), // DELEGATECALL
    (0x3D, 0), // RETURNDATASIZE
];
const MOTIF_LOG_EMIT: Motif = &[
    (0x7F, 32), // PUSH32 topic
    (0x60, 1),
    (0x60, 1),
    (0xA2, 0), // LOG2
];
const MOTIF_GAS_GUARD: Motif = &[
    (0x5A, 0), // GAS
    (0x61, 2),
    (0x11, 0), // GT
    (0x15, 0), // ISZERO
    (0x61, 2),
    (0x57, 0), // JUMPI
];
const MOTIF_SELECTOR: Motif = &[
    (0x60, 1),
    (0x35, 0), // CALLDATALOAD
    (0x63, 4), // PUSH4 selector
    (0x14, 0), // EQ
    (0x61, 2),
    (0x57, 0), // JUMPI
];
const MOTIF_MEM: Motif = &[(0x60, 1), (0x51, 0), (0x60, 1), (0x52, 0)];
const MOTIF_MATH: Motif = &[
    (0x60, 1),
    (0x60, 1),
    (0x01, 0),
    (0x02, 0), // MUL
    (0x80, 0), // DUP1
    (0x90, 0), // SWAP1
    (0x50, 0), // POP
];
const MOTIF_STACK: Motif = &[(0x81, 0), (0x91, 0), (0x82, 0), (0x90, 0), (0x50, 0)];
const MOTIF_JUMP: Motif = &[(0x5B, 0), (0x60, 1), (0x56, 0)];
const MOTIF_RETURN: Motif = &[(0x60, 1), (0x60, 1), (0xF3, 0), (0x5B, 0), (0xFD, 0)];
const MOTIF_HASH: Motif = &[(0x60, 1), (0x60, 1), (0x20, 0), (0x60, 1), (0x18, 0)];

const MOTIFS: [Motif; 12] = [
    MOTIF_CALL_DRAIN,
    MOTIF_SSTORE_LOOP,
    MOTIF_DELEGATE,
    MOTIF_LOG_EMIT,
    MOTIF_GAS_GUARD,
    MOTIF_SELECTOR,
    MOTIF_MEM,
    MOTIF_MATH,
    MOTIF_STACK,
    MOTIF_JUMP,
    MOTIF_RETURN,
    MOTIF_HASH,
];

// Mean motif counts for the linearly separable component.
const LINEAR_MOTIFS: [usize; 4] = [0, 1, 2, 3];
const BENIGN_MEANS: [f64; 4] = [2.0, 10.0, 1.2, 6.0];
const PHISH_MEANS: [f64; 4] = [9.0, 4.0, 5.0, 2.0];

// XOR component over the gas-guard / selector motifs.
const XOR_MOTIFS: [usize; 2] = [4, 5];
const XOR_HI: f64 = 14.0;
const XOR_LO: f64 = 1.0;
const XOR_MID: f64 = 5.0;

// Class-independent boilerplate with heavy count variance.
const NOISE_MOTIFS: [usize; 6] = [6, 7, 8, 9, 10, 11];
const NOISE_BASE: [f64; 6] = [20.0, 14.0, 10.0, 12.0, 4.0, 8.0];
const NOISE_SIGMA: f64 = 0.9;

const PUSH1_POOL: [u8; 8] = [0x00, 0x01, 0x04, 0x20, 0x40, 0x60, 0x80, 0xFF];
const PROLOGUE: [u8; 5] = [0x60, 0x80, 0x60, 0x40, 0x52];

pub fn generate_corpus(config: &SynthConfig) -> Corpus {
    let n = config.n_samples;
    let base: Vec<ContractRecord> = crate::par::map_range(n, |i| make_record(config, i));

    let mut records = base;
    if config.duplicate_fraction > 0.0 {
        let n_dups = (n as f64 * config.duplicate_fraction).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(u64::MAX); // clone stream, disjoint from records
        for d in 0..n_dups {
            let src = &records[rng.random_range(0..n)];
            let mut clone = src.clone();
            clone.address = format!("0xd{:039x}", d);
            // clones deploy no earlier than their template
            let later = rng.random_range(0..3usize);
            let mut month = clone.deployed_month;
            for _ in 0..later {
                if month < month_of_index(MONTH_COUNT - 1) {
                    month = month.next();
                }
            }
            clone.deployed_month = month;
            records.push(clone);
        }
    }
    Corpus::new(records)
}

fn make_record(config: &SynthConfig, index: usize) -> ContractRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);

    let true_phishing = index % 2 == 1;
    let month_idx = sample_month(&mut rng);
    let month = month_of_index(month_idx);

    // temporal drift: late phishing blends towards benign mixtures
    let drift = if true_phishing && config.drift_max > 0.0 && month_idx >= 4 {
        // months 2024-02 (idx 4) .. 2024-10 (idx 12) ramp linearly
        config.drift_max * (month_idx - 4) as f64 / 8.0
    } else {
        0.0
    };

    let length_scale = LogNormal::new(0.0, 0.45).unwrap().sample(&mut rng).clamp(0.3, 4.0);
    let mut counts = [0usize; MOTIFS.len()];

    // linear-signal motifs
    for (slot, &m) in LINEAR_MOTIFS.iter().enumerate() {
        let mean_p = PHISH_MEANS[slot] * (1.0 - drift) + BENIGN_MEANS[slot] * drift;
        let mean = if true_phishing { mean_p } else { BENIGN_MEANS[slot] };
        counts[m] = noisy_count(&mut rng, mean * length_scale, 0.55);
    }

    // XOR subpopulation
    let in_xor = rng.random::<f64>() < config.xor_fraction;
    let (a_level, b_level) = if in_xor {
        let flip = rng.random::<f64>() < 0.5;
        if true_phishing {
            if flip { (XOR_HI, XOR_LO) } else { (XOR_LO, XOR_HI) }
        } else if flip {
            (XOR_LO, XOR_LO)
        } else {
            (XOR_HI, XOR_HI)
        }
    } else {
        (XOR_MID, XOR_MID)
    };
    counts[XOR_MOTIFS[0]] = noisy_count(&mut rng, a_level * length_scale, 0.3);
    counts[XOR_MOTIFS[1]] = noisy_count(&mut rng, b_level * length_scale, 0.3);

    // boilerplate: identical distribution for both classes
    for (slot, &m) in NOISE_MOTIFS.iter().enumerate() {
        counts[m] = noisy_count(&mut rng, NOISE_BASE[slot] * length_scale, NOISE_SIGMA);
    }

    let bytecode = assemble(&mut rng, &counts);

    let mut label = if true_phishing { Label::Phishing } else { Label::Benign };
    if rng.random::<f64>() < config.label_noise {
        label = if label == Label::Phishing { Label::Benign } else { Label::Phishing };
    }

    ContractRecord {
        address: format!("0x{:040x}", index),
        bytecode,
        label,
        deployed_month: month,
        source: "synthetic".into(),
    }
}

fn sample_month(rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = MONTH_WEIGHTS.iter().sum();
    let mut draw = rng.random::<f64>() * total;
    for (i, w) in MONTH_WEIGHTS.iter().enumerate() {
        draw -= w;
        if draw <= 0.0 {
            return i;
        }
    }
    MONTH_COUNT - 1
}

fn noisy_count(rng: &mut ChaCha8Rng, mean: f64, sigma: f64) -> usize {
    let jitter: f64 = Normal::new(0.0, sigma).unwrap().sample(rng);
    (mean * jitter.exp()).round().max(0.0) as usize
}

/// Prologue, then the shuffled motif instances, then a metadata-style
/// trailer of random bytes (it disassembles to UNKNOWN entries, as
/// real contract trailers do).
fn assemble(rng: &mut ChaCha8Rng, counts: &[usize; MOTIFS.len()]) -> Vec<u8> {
    let mut instances: Vec<usize> = Vec::new();
    for (m, &c) in counts.iter().enumerate() {
        instances.extend(std::iter::repeat_n(m, c));
    }
    // Fisher-Yates over motif instances
    for i in (1..instances.len()).rev() {
        let j = rng.random_range(0..=i);
        instances.swap(i, j);
    }

    let mut bytes = PROLOGUE.to_vec();
    for m in instances {
        for &(op, width) in MOTIFS[m] {
            bytes.push(op);
            match width {
                0 => {}
                1 => bytes.push(PUSH1_POOL[rng.random_range(0..PUSH1_POOL.len())]),
                2 => {
                    let v: u64 = [0x0100u64, 0x0200, 0x0400, 0x0800][rng.random_range(0..4)];
                    bytes.extend_from_slice(&(v as u16).to_be_bytes());
                }
                4 => {
                    let selector: u32 = [
                        0xa9059cbb, 0x095ea7b3, 0x23b872dd, 0x70a08231, 0x18160ddd, 0x313ce567,
                        0x06fdde03, 0x95d89b41,
                    ][rng.random_range(0..8)];
                    bytes.extend_from_slice(&selector.to_be_bytes());
                }
                w => {
                    // PUSH20 / PUSH32 pools: a few distinct constants
                    let tag = rng.random_range(0..4u8);
                    bytes.extend(std::iter::repeat_n(tag * 0x11, w as usize));
                }
            }
        }
    }
    bytes.push(0x00); // STOP
    let trailer_len = rng.random_range(16..64usize);
    for _ in 0..trailer_len {
        bytes.push(rng.random::<u8>());
    }
    bytes
}
