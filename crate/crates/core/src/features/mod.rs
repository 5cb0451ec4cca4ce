//! Feature representations over instruction streams and raw bytecode:
//! opcode-count histograms (classifier input) plus image and token
//! encodings exported for external pipelines.
//!
//! Vocabularies and lookup tables are always built from the training
//! split alone and are immutable afterwards.

pub mod export;
pub mod image;
pub mod tokens;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::disasm::Instruction;
use crate::error::{Error, Result};
use crate::opcode::OpcodeTable;

pub use export::{export_features, ExportInput, FileManifest, ManifestEntry};
pub use image::{encode_frequency_image, encode_rgb_image, FrequencyTable, ImageTensor};
pub use tokens::{BigramVocab, TokenSequence};

/// Ordered opcode vocabulary fixed from a training split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    mnemonics: Vec<String>,
    /// opcode byte -> histogram column (-1 = out of vocabulary)
    code_to_col: Vec<i32>,
}

impl Vocabulary {
    pub fn mnemonics(&self) -> &[String] {
        &self.mnemonics
    }

    pub fn len(&self) -> usize {
        self.mnemonics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mnemonics.is_empty()
    }

    pub fn column_of_code(&self, code: u8) -> Option<usize> {
        let col = self.code_to_col[code as usize];
        (col >= 0).then_some(col as usize)
    }
}

/// Raw occurrence counts aligned to a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpcodeHistogram {
    pub counts: Vec<u32>,
}

impl OpcodeHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// Sorted, deduplicated mnemonic list over every opcode observed in the
/// training streams (synthetic UNKNOWN_0xXX entries included).
pub fn build_histogram_vocab(
    training_streams: &[Vec<Instruction>],
    table: &OpcodeTable,
) -> Result<Vocabulary> {
    if training_streams.is_empty() {
        return Err(Error::EmptyInput("no training contracts".into()));
    }
    let mut seen = [false; 256];
    for stream in training_streams {
        for ins in stream {
            seen[ins.code as usize] = true;
        }
    }
    let mut entries: Vec<(String, u8)> = (0..=255u8)
        .filter(|&c| seen[c as usize])
        .map(|c| (table.mnemonic(c).to_string(), c))
        .collect();
    entries.sort();
    let mut code_to_col = vec![-1i32; 256];
    for (col, (_, code)) in entries.iter().enumerate() {
        code_to_col[*code as usize] = col as i32;
    }
    Ok(Vocabulary {
        mnemonics: entries.into_iter().map(|(m, _)| m).collect(),
        code_to_col,
    })
}

/// Counts of each vocabulary mnemonic in one contract; out-of-vocabulary
/// opcodes are dropped (the vocabulary is closed at training time).
pub fn histogram_featurize(contract: &[Instruction], vocab: &Vocabulary) -> OpcodeHistogram {
    let mut counts = vec![0u32; vocab.len()];
    for ins in contract {
        if let Some(col) = vocab.column_of_code(ins.code) {
            counts[col] += 1;
        }
    }
    OpcodeHistogram { counts }
}

/// Labeled feature rows of uniform width.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
    data: Vec<f64>,
    width: usize,
}

impl FeatureMatrix {
    pub fn new(columns: Vec<String>) -> FeatureMatrix {
        let width = columns.len();
        FeatureMatrix {
            columns,
            ids: Vec::new(),
            labels: Vec::new(),
            data: Vec::new(),
            width,
        }
    }

    pub fn push_row(&mut self, id: String, label: Label, row: &[f64]) -> Result<()> {
        if row.len() != self.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                got: row.len(),
            });
        }
        self.ids.push(id);
        self.labels.push(label);
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    /// Sub-matrix over the given row indices (copies).
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let mut out = FeatureMatrix::new(self.columns.clone());
        for &i in indices {
            out.ids.push(self.ids[i].clone());
            out.labels.push(self.labels[i]);
            out.data.extend_from_slice(self.row(i));
        }
        out
    }
}

/// Histogram-featurizes a set of contracts against a fixed vocabulary.
pub fn featurize_streams(
    streams: &[Vec<Instruction>],
    ids: &[String],
    labels: &[Label],
    vocab: &Vocabulary,
) -> Result<FeatureMatrix> {
    if streams.len() != labels.len() || streams.len() != ids.len() {
        return Err(Error::DimensionMismatch {
            expected: streams.len(),
            got: labels.len(),
        });
    }
    let rows = crate::par::map_slice(streams, |s| {
        histogram_featurize(s, vocab)
            .counts
            .into_iter()
            .map(f64::from)
            .collect::<Vec<f64>>()
    });
    let mut matrix = FeatureMatrix::new(vocab.mnemonics().to_vec());
    for ((id, label), row) in ids.iter().zip(labels).zip(rows) {
        matrix.push_row(id.clone(), *label, &row)?;
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disasm::disassemble_hex;

    fn table() -> &'static OpcodeTable {
        OpcodeTable::shanghai()
    }

    #[test]
    fn vocab_from_worked_example() {
        let stream = disassemble_hex("0x6080604052", table()).unwrap();
        let vocab = build_histogram_vocab(&[stream], table()).unwrap();
        assert_eq!(vocab.mnemonics(), ["MSTORE", "PUSH1"]);
    }

    #[test]
    fn duplicate_contracts_do_not_change_vocab() {
        let stream = disassemble_hex("0x6080604052", table()).unwrap();
        let one = build_histogram_vocab(&[stream.clone()], table()).unwrap();
        let two = build_histogram_vocab(&[stream.clone(), stream], table()).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn undefined_byte_enters_vocab_as_unknown() {
        let stream = disassemble_hex("0x0c", table()).unwrap();
        let vocab = build_histogram_vocab(&[stream], table()).unwrap();
        assert_eq!(vocab.mnemonics(), ["UNKNOWN_0x0C"]);
    }

    #[test]
    fn empty_training_corpus_errors() {
        assert!(matches!(
            build_histogram_vocab(&[], table()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn histogram_counts_worked_example() {
        let stream = disassemble_hex("0x6080604052", table()).unwrap();
        let vocab = build_histogram_vocab(&[stream.clone()], table()).unwrap();
        let hist = histogram_featurize(&stream, &vocab);
        // vocabulary is [MSTORE, PUSH1]
        assert_eq!(hist.counts, vec![1, 2]);
        assert_eq!(hist.total(), 3);
    }

    #[test]
    fn empty_stream_gives_zero_vector() {
        let train = disassemble_hex("0x6080604052", table()).unwrap();
        let vocab = build_histogram_vocab(&[train], table()).unwrap();
        let hist = histogram_featurize(&[], &vocab);
        assert_eq!(hist.counts, vec![0, 0]);
    }

    #[test]
    fn out_of_vocabulary_opcodes_are_dropped() {
        let train = disassemble_hex("0x6080604052", table()).unwrap();
        let vocab = build_histogram_vocab(&[train], table()).unwrap();
        let test_stream = disassemble_hex("0x0001020304", table()).unwrap();
        let hist = histogram_featurize(&test_stream, &vocab);
        assert_eq!(hist.counts, vec![0, 0]);
    }

    #[test]
    fn histogram_sum_equals_in_vocab_instruction_count() {
        let train = disassemble_hex("0x60806040525a5a00", table()).unwrap();
        let vocab = build_histogram_vocab(&[train.clone()], table()).unwrap();
        let mixed = disassemble_hex("0x5a5a0c00", table()).unwrap(); // GAS GAS UNKNOWN STOP
        let hist = histogram_featurize(&mixed, &vocab);
        let in_vocab = mixed
            .iter()
            .filter(|i| vocab.column_of_code(i.code).is_some())
            .count() as u64;
        assert_eq!(hist.total(), in_vocab);
    }

    #[test]
    fn matrix_rows_and_select() {
        let streams = vec![
            disassemble_hex("0x6080604052", table()).unwrap(),
            disassemble_hex("0x52", table()).unwrap(),
        ];
        let vocab = build_histogram_vocab(&streams, table()).unwrap();
        let ids = vec!["a".to_string(), "b".to_string()];
        let labels = vec![Label::Phishing, Label::Benign];
        let m = featurize_streams(&streams, &ids, &labels, &vocab).unwrap();
        assert_eq!(m.n_rows(), 2);
        assert_eq!(m.row(0), [1.0, 2.0]);
        assert_eq!(m.row(1), [1.0, 0.0]);
        let sub = m.select(&[1]);
        assert_eq!(sub.n_rows(), 1);
        assert_eq!(sub.row(0), [1.0, 0.0]);
        assert_eq!(sub.labels, vec![Label::Benign]);
    }

    #[test]
    fn width_mismatch_rejected() {
        let mut m = FeatureMatrix::new(vec!["A".into(), "B".into()]);
        assert!(m
            .push_row("x".into(), Label::Benign, &[1.0, 2.0, 3.0])
            .is_err());
    }
}
