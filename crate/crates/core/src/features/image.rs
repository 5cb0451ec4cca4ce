//! 224 x 224 x 3 image encodings of contracts: raw byte-to-RGB and the
//! training-frequency lookup variant.

use std::collections::HashMap;

use crate::disasm::Instruction;
use crate::opcode::OpcodeTable;

pub const IMAGE_SIDE: usize = 224;
pub const IMAGE_CHANNELS: usize = 3;
pub const IMAGE_CELLS: usize = IMAGE_SIDE * IMAGE_SIDE * IMAGE_CHANNELS;
pub const IMAGE_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;

/// Row-major H x W x C tensor of 0-255 intensities, zero beyond the
/// encoded prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageTensor {
    data: Vec<u8>,
}

impl Default for ImageTensor {
    fn default() -> Self {
        ImageTensor {
            data: vec![0; IMAGE_CELLS],
        }
    }
}

impl ImageTensor {
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> u8 {
        self.data[(row * IMAGE_SIDE + col) * IMAGE_CHANNELS + channel]
    }

    fn set_cell(&mut self, index: usize, value: u8) {
        self.data[index] = value;
    }
}

/// Bytes consumed three at a time as (R, G, B) pixels in row-major
/// order: byte i lands in cell (i / 672, (i % 672) / 3, i % 3). Inputs
/// longer than the tensor are cut off (`true` in the returned flag).
pub fn encode_rgb_image(bytecode: &[u8]) -> (ImageTensor, bool) {
    let mut tensor = ImageTensor::default();
    let take = bytecode.len().min(IMAGE_CELLS);
    for (i, &b) in bytecode[..take].iter().enumerate() {
        tensor.set_cell(i, b);
    }
    (tensor, bytecode.len() > IMAGE_CELLS)
}

/// Frequency lookup built once on the training split: distinct
/// mnemonic / operand / gas values are mapped to intensities so that
/// the most frequent value in each field gets 255. The map is
/// min-max-scaled log(1 + count); values unseen in training (and absent
/// fields) map to 0.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    mnemonic_intensity: [u8; 256],
    operand_intensity: HashMap<Vec<u8>, u8>,
    gas_intensity: HashMap<u64, u8>,
}

impl FrequencyTable {
    pub fn build(training_streams: &[Vec<Instruction>], table: &OpcodeTable) -> FrequencyTable {
        let mut mnemonic_counts: HashMap<u8, u64> = HashMap::new();
        let mut operand_counts: HashMap<Vec<u8>, u64> = HashMap::new();
        let mut gas_counts: HashMap<u64, u64> = HashMap::new();
        for stream in training_streams {
            for ins in stream {
                *mnemonic_counts.entry(ins.code).or_insert(0) += 1;
                if let Some(op) = &ins.operand {
                    *operand_counts.entry(op.clone()).or_insert(0) += 1;
                }
                if let Some(gas) = ins.gas(table) {
                    *gas_counts.entry(gas).or_insert(0) += 1;
                }
            }
        }
        let mut mnemonic_intensity = [0u8; 256];
        for (code, intensity) in scale_counts(&mnemonic_counts) {
            mnemonic_intensity[code as usize] = intensity;
        }
        FrequencyTable {
            mnemonic_intensity,
            operand_intensity: scale_counts(&operand_counts).into_iter().collect(),
            gas_intensity: scale_counts(&gas_counts).into_iter().collect(),
        }
    }

    pub fn mnemonic_intensity(&self, code: u8) -> u8 {
        self.mnemonic_intensity[code as usize]
    }

    pub fn operand_intensity(&self, operand: Option<&[u8]>) -> u8 {
        operand
            .and_then(|op| self.operand_intensity.get(op).copied())
            .unwrap_or(0)
    }

    pub fn gas_intensity(&self, gas: Option<u64>) -> u8 {
        gas.and_then(|g| self.gas_intensity.get(&g).copied())
            .unwrap_or(0)
    }
}

/// Min-max scale of log(1 + count) onto 0-255; a single distinct value
/// maps to 255 (it is the most frequent value of its field).
fn scale_counts<K: Clone + std::hash::Hash + Eq>(counts: &HashMap<K, u64>) -> Vec<(K, u8)> {
    if counts.is_empty() {
        return Vec::new();
    }
    let logs: Vec<f64> = counts.values().map(|&c| (1.0 + c as f64).ln()).collect();
    let min = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    counts
        .iter()
        .map(|(k, &c)| {
            let v = (1.0 + c as f64).ln();
            let intensity = if max > min {
                ((v - min) / (max - min) * 255.0).round() as u8
            } else {
                255
            };
            (k.clone(), intensity)
        })
        .collect()
}

/// One pixel per instruction: R from the mnemonic's training frequency
/// rank, G from the operand value's, B from the gas value's; zero
/// padding past the stream. Streams longer than 50,176 instructions are
/// cut off (`true` in the returned flag).
pub fn encode_frequency_image(
    contract: &[Instruction],
    lookup: &FrequencyTable,
    table: &OpcodeTable,
) -> (ImageTensor, bool) {
    let mut tensor = ImageTensor::default();
    let take = contract.len().min(IMAGE_PIXELS);
    for (pixel, ins) in contract[..take].iter().enumerate() {
        let base = pixel * IMAGE_CHANNELS;
        tensor.set_cell(base, lookup.mnemonic_intensity(ins.code));
        tensor.set_cell(base + 1, lookup.operand_intensity(ins.operand.as_deref()));
        tensor.set_cell(base + 2, lookup.gas_intensity(ins.gas(table)));
    }
    (tensor, contract.len() > IMAGE_PIXELS)
}
