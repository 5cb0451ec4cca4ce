//! Feature exports: histogram CSV, plus flat binary payloads with JSON
//! sidecars (shape, dtype, ordering) for image tensors and token
//! sequences, so external pipelines can consume them.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::Result;
use crate::features::image::{ImageTensor, IMAGE_CELLS, IMAGE_CHANNELS, IMAGE_SIDE};
use crate::features::tokens::{pad_sequences, TokenSequence};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub kind: String,
    pub entries: usize,
    pub bytes: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FileManifest {
    pub files: Vec<ManifestEntry>,
}

/// What to export.
pub enum ExportInput<'a> {
    Histograms(&'a FeatureMatrix),
    Images(&'a [ImageTensor]),
    Tokens(&'a [TokenSequence]),
}

/// Writes the payload(s) under `destination` with the given base name
/// and returns the manifest (also written as `<base>.manifest.json`).
pub fn export_features(
    input: ExportInput<'_>,
    destination: &Path,
    base: &str,
) -> Result<FileManifest> {
    std::fs::create_dir_all(destination)?;
    let mut manifest = FileManifest::default();
    match input {
        ExportInput::Histograms(matrix) => {
            let path = destination.join(format!("{base}.csv"));
            let rows = write_histogram_csv(matrix, std::fs::File::create(&path)?)?;
            manifest.files.push(ManifestEntry {
                bytes: std::fs::metadata(&path)?.len(),
                path,
                kind: "histogram_csv".into(),
                entries: rows,
            });
        }
        ExportInput::Images(tensors) => {
            if !tensors.is_empty() {
                let bin_path = destination.join(format!("{base}.u8.bin"));
                let mut out = std::io::BufWriter::new(std::fs::File::create(&bin_path)?);
                for t in tensors {
                    out.write_all(t.data())?;
                }
                out.flush()?;
                let sidecar = json!({
                    "shape": [tensors.len(), IMAGE_SIDE, IMAGE_SIDE, IMAGE_CHANNELS],
                    "dtype": "u8",
                    "order": "sample-major, then row-major height x width x channel",
                });
                let side_path = destination.join(format!("{base}.json"));
                std::fs::write(&side_path, serde_json::to_string_pretty(&sidecar).unwrap())?;
                manifest.files.push(ManifestEntry {
                    bytes: (tensors.len() * IMAGE_CELLS) as u64,
                    path: bin_path,
                    kind: "image_tensors".into(),
                    entries: tensors.len(),
                });
                manifest.files.push(ManifestEntry {
                    bytes: std::fs::metadata(&side_path)?.len(),
                    path: side_path,
                    kind: "sidecar".into(),
                    entries: 1,
                });
            }
        }
        ExportInput::Tokens(sequences) => {
            if !sequences.is_empty() {
                let (padded, max_len) = pad_sequences(sequences);
                let bin_path = destination.join(format!("{base}.u32.bin"));
                let mut out = std::io::BufWriter::new(std::fs::File::create(&bin_path)?);
                for seq in &padded {
                    for id in &seq.ids {
                        out.write_all(&id.to_le_bytes())?;
                    }
                }
                out.flush()?;
                let sidecar = json!({
                    "shape": [padded.len(), max_len],
                    "dtype": "u32le",
                    "order": "sample-major",
                    "pad_id": sequences[0].pad_id,
                    "oov_id": sequences[0].oov_id,
                });
                let side_path = destination.join(format!("{base}.json"));
                std::fs::write(&side_path, serde_json::to_string_pretty(&sidecar).unwrap())?;
                manifest.files.push(ManifestEntry {
                    bytes: (padded.len() * max_len * 4) as u64,
                    path: bin_path,
                    kind: "token_sequences".into(),
                    entries: padded.len(),
                });
                manifest.files.push(ManifestEntry {
                    bytes: std::fs::metadata(&side_path)?.len(),
                    path: side_path,
                    kind: "sidecar".into(),
                    entries: 1,
                });
            }
        }
    }
    let manifest_path = destination.join(format!("{base}.manifest.json"));
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).unwrap(),
    )?;
    Ok(manifest)
}

/// Histogram CSV: `sample_id,label,<mnemonic...>`, one row per sample.
pub fn write_histogram_csv(matrix: &FeatureMatrix, mut out: impl Write) -> Result<usize> {
    write!(out, "sample_id,label")?;
    for c in &matrix.columns {
        write!(out, ",{c}")?;
    }
    writeln!(out)?;
    for i in 0..matrix.n_rows() {
        write!(out, "{},{}", matrix.ids[i], matrix.labels[i].name())?;
        for v in matrix.row(i) {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(matrix.n_rows())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use crate::features::image::encode_rgb_image;
    use crate::features::tokens::{OOV_ID, PAD_ID};

    #[test]
    fn histogram_csv_layout() {
        let mut m = FeatureMatrix::new(vec!["MSTORE".into(), "PUSH1".into()]);
        m.push_row("c1".into(), Label::Phishing, &[1.0, 2.0]).unwrap();
        let mut buf = Vec::new();
        let rows = write_histogram_csv(&m, &mut buf).unwrap();
        assert_eq!(rows, 1);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "sample_id,label,MSTORE,PUSH1\nc1,phishing,1,2\n");
    }

    #[test]
    fn image_export_payload_size() {
        let dir = tempfile::tempdir().unwrap();
        let (tensor, _) = encode_rgb_image(&[1, 2, 3]);
        let manifest =
            export_features(ExportInput::Images(&[tensor]), dir.path(), "imgs").unwrap();
        let bin = manifest
            .files
            .iter()
            .find(|f| f.kind == "image_tensors")
            .unwrap();
        assert_eq!(bin.bytes, 150_528);
        assert_eq!(bin.entries, 1);
        assert_eq!(std::fs::metadata(&bin.path).unwrap().len(), 150_528);
    }

    #[test]
    fn token_export_pads_to_batch_max() {
        let dir = tempfile::tempdir().unwrap();
        let seqs = vec![
            TokenSequence {
                ids: vec![2, 3, 4],
                pad_id: PAD_ID,
                oov_id: OOV_ID,
            },
            TokenSequence {
                ids: vec![5],
                pad_id: PAD_ID,
                oov_id: OOV_ID,
            },
        ];
        let manifest = export_features(ExportInput::Tokens(&seqs), dir.path(), "tok").unwrap();
        let bin = manifest
            .files
            .iter()
            .find(|f| f.kind == "token_sequences")
            .unwrap();
        assert_eq!(bin.bytes, 2 * 3 * 4);
        let raw = std::fs::read(&bin.path).unwrap();
        let ids: Vec<u32> = raw
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        assert_eq!(ids, vec![2, 3, 4, 5, PAD_ID, PAD_ID]);
    }

    #[test]
    fn empty_input_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = export_features(ExportInput::Images(&[]), dir.path(), "none").unwrap();
        assert!(manifest.files.is_empty());
        assert!(dir.path().join("none.manifest.json").exists());
    }
}
