//! Bigram tokenization of raw bytecode: windows of 6 hex characters
//! (3 bytes) mapped to integer ids over a training-split vocabulary.

use std::collections::HashMap;

pub const PAD_ID: u32 = 0;
pub const OOV_ID: u32 = 1;
const FIRST_REAL_ID: u32 = 2;

/// Token window size in bytes (6 hex characters).
pub const WINDOW_BYTES: usize = 3;

/// Training-split bigram vocabulary. Ids are assigned by first
/// occurrence, starting at 2 (0 = padding, 1 = out-of-vocabulary).
/// Windows advance by `stride_bytes` (window size = non-overlapping).
#[derive(Debug, Clone)]
pub struct BigramVocab {
    map: HashMap<u32, u32>,
    stride_bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
    pub pad_id: u32,
    pub oov_id: u32,
}

/// Key of a window: 3 bytes big-endian, the final partial window
/// zero-filled (equivalent to right-padding the hex text with '0').
fn window_key(bytes: &[u8]) -> u32 {
    let mut key = 0u32;
    for i in 0..WINDOW_BYTES {
        key = (key << 8) | bytes.get(i).copied().unwrap_or(0) as u32;
    }
    key
}

fn windows(bytecode: &[u8], stride: usize) -> impl Iterator<Item = u32> + '_ {
    (0..bytecode.len())
        .step_by(stride.max(1))
        .map(|start| window_key(&bytecode[start..bytecode.len().min(start + WINDOW_BYTES)]))
}

impl BigramVocab {
    pub fn build(training_bytecodes: &[Vec<u8>]) -> BigramVocab {
        BigramVocab::build_with_stride(training_bytecodes, WINDOW_BYTES)
    }

    pub fn build_with_stride(training_bytecodes: &[Vec<u8>], stride_bytes: usize) -> BigramVocab {
        let mut map = HashMap::new();
        let mut next = FIRST_REAL_ID;
        for code in training_bytecodes {
            for key in windows(code, stride_bytes) {
                map.entry(key).or_insert_with(|| {
                    let id = next;
                    next += 1;
                    id
                });
            }
        }
        BigramVocab { map, stride_bytes }
    }

    /// Number of ids including the two reserved ones.
    pub fn size(&self) -> usize {
        self.map.len() + 2
    }

    pub fn id_of_window(&self, window: &[u8]) -> u32 {
        self.map.get(&window_key(window)).copied().unwrap_or(OOV_ID)
    }
}

/// Maps bytecode windows to vocabulary ids; unseen windows become the
/// OOV id. No padding is applied here (see [`pad_sequences`]).
pub fn tokenize_bigrams(bytecode: &[u8], vocab: &BigramVocab) -> TokenSequence {
    let ids = windows(bytecode, vocab.stride_bytes)
        .map(|key| vocab.map.get(&key).copied().unwrap_or(OOV_ID))
        .collect();
    TokenSequence {
        ids,
        pad_id: PAD_ID,
        oov_id: OOV_ID,
    }
}

/// Suffix-pads every sequence to the batch maximum; returns the padded
/// batch and the uniform length.
pub fn pad_sequences(sequences: &[TokenSequence]) -> (Vec<TokenSequence>, usize) {
    let max_len = sequences.iter().map(|s| s.ids.len()).max().unwrap_or(0);
    let padded = sequences
        .iter()
        .map(|s| {
            let mut ids = s.ids.clone();
            ids.resize(max_len, s.pad_id);
            TokenSequence { ids, ..*s }
        })
        .collect();
    (padded, max_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_full_window() {
        let vocab = BigramVocab::build(&[vec![0x60, 0x80, 0x60]]);
        let seq = tokenize_bigrams(&[0x60, 0x80, 0x60], &vocab);
        assert_eq!(seq.ids, vec![2]); // first real id
    }

    #[test]
    fn worked_example_windows() {
        // 0x6080604052 -> windows "608060", "405200" (final padded)
        let train = vec![vec![0x60, 0x80, 0x60]];
        let vocab = BigramVocab::build(&train);
        let seq = tokenize_bigrams(&[0x60, 0x80, 0x60, 0x40, 0x52], &vocab);
        assert_eq!(seq.ids.len(), 2);
        assert_eq!(seq.ids[0], 2);
        assert_eq!(seq.ids[1], OOV_ID); // "405200" unseen in training
    }

    #[test]
    fn empty_bytecode_is_empty_sequence() {
        let vocab = BigramVocab::build(&[vec![1, 2, 3]]);
        assert!(tokenize_bigrams(&[], &vocab).ids.is_empty());
    }

    #[test]
    fn ids_are_first_occurrence_ordered() {
        let vocab = BigramVocab::build(&[vec![9, 9, 9, 1, 1, 1, 9, 9, 9]]);
        assert_eq!(vocab.size(), 4); // pad, oov, two distinct windows
        assert_eq!(vocab.id_of_window(&[9, 9, 9]), 2);
        assert_eq!(vocab.id_of_window(&[1, 1, 1]), 3);
        assert_eq!(vocab.id_of_window(&[7, 7, 7]), OOV_ID);
    }

    #[test]
    fn in_vocabulary_round_trip() {
        // every distinct id maps back to exactly one window key
        let codes = vec![vec![1, 2, 3, 4, 5, 6], vec![4, 5, 6, 1, 2, 3]];
        let vocab = BigramVocab::build(&codes);
        let seq = tokenize_bigrams(&codes[1], &vocab);
        assert_eq!(seq.ids, vec![vocab.id_of_window(&[4, 5, 6]), vocab.id_of_window(&[1, 2, 3])]);
        assert!(seq.ids.iter().all(|&id| id >= 2));
    }

    #[test]
    fn padding_is_suffix_only() {
        let a = TokenSequence {
            ids: vec![2, 3],
            pad_id: PAD_ID,
            oov_id: OOV_ID,
        };
        let b = TokenSequence {
            ids: vec![4],
            pad_id: PAD_ID,
            oov_id: OOV_ID,
        };
        let (padded, len) = pad_sequences(&[a, b]);
        assert_eq!(len, 2);
        assert_eq!(padded[0].ids, vec![2, 3]);
        assert_eq!(padded[1].ids, vec![4, PAD_ID]);
    }

    #[test]
    fn configurable_stride_overlaps() {
        let code = vec![1, 2, 3, 4];
        let vocab = BigramVocab::build_with_stride(&[code.clone()], 1);
        let seq = tokenize_bigrams(&code, &vocab);
        // windows at offsets 0,1,2,3: [1,2,3],[2,3,4],[3,4,0],[4,0,0]
        assert_eq!(seq.ids.len(), 4);
    }
}
