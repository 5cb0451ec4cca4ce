//! Labeled contract corpora: loading, exact deduplication of
//! minimal-proxy clones, and plot-ready reports.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::disasm::{decode_hex, disassemble_bytes, Instruction};
use crate::error::{Error, Result};
use crate::opcode::OpcodeTable;

/// Binary class label. Benign is index 0; ties resolve towards it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Benign = 0,
    Phishing = 1,
}

impl Label {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Label {
        if i == 0 {
            Label::Benign
        } else {
            Label::Phishing
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Benign => "benign",
            Label::Phishing => "phishing",
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Label> {
        match s {
            "benign" => Ok(Label::Benign),
            "phishing" => Ok(Label::Phishing),
            other => Err(Error::Validation(format!(
                "unknown label {other:?} (expected phishing|benign)"
            ))),
        }
    }
}

/// Calendar month, ordered, rendered as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: u16,
    pub month: u8,
}

impl YearMonth {
    pub fn new(year: u16, month: u8) -> Result<YearMonth> {
        if !(1..=12).contains(&month) {
            return Err(Error::Validation(format!("month {month} out of range")));
        }
        Ok(YearMonth { year, month })
    }

    pub fn next(self) -> YearMonth {
        if self.month == 12 {
            YearMonth {
                year: self.year + 1,
                month: 1,
            }
        } else {
            YearMonth {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// Inclusive range of months.
    pub fn range_to(self, end: YearMonth) -> Vec<YearMonth> {
        let mut out = Vec::new();
        let mut cur = self;
        while cur <= end {
            out.push(cur);
            cur = cur.next();
        }
        out
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<YearMonth> {
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| Error::Validation(format!("bad year-month {s:?}")))?;
        let year = y
            .parse()
            .map_err(|_| Error::Validation(format!("bad year in {s:?}")))?;
        let month = m
            .parse()
            .map_err(|_| Error::Validation(format!("bad month in {s:?}")))?;
        YearMonth::new(year, month)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One labeled bytecode sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractRecord {
    pub address: String,
    /// Deployed bytecode, 0x-prefixed hex in files, raw bytes in memory.
    #[serde(
        serialize_with = "ser_bytecode",
        deserialize_with = "de_bytecode",
        rename = "bytecode"
    )]
    pub bytecode: Vec<u8>,
    pub label: Label,
    pub deployed_month: YearMonth,
    pub source: String,
}

fn ser_bytecode<S: serde::Serializer>(
    bytes: &[u8],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("0x{}", hex::encode(bytes)))
}

fn de_bytecode<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Vec<u8>, D::Error> {
    let s = String::deserialize(d)?;
    decode_hex(&s).map_err(serde::de::Error::custom)
}

impl ContractRecord {
    pub fn validate(&self) -> Result<()> {
        let addr = self
            .address
            .strip_prefix("0x")
            .ok_or_else(|| Error::Validation(format!("address {} lacks 0x", self.address)))?;
        if addr.len() != 40 || !addr.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::Validation(format!(
                "address {} is not 20 bytes of hex",
                self.address
            )));
        }
        Ok(())
    }

    pub fn bytecode_hex(&self) -> String {
        format!("0x{}", hex::encode(&self.bytecode))
    }

    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(&self.bytecode).into()
    }
}

/// Deduplicatable collection of labeled records.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    records: Vec<ContractRecord>,
    label_counts: [usize; 2],
}

impl Corpus {
    pub fn new(records: Vec<ContractRecord>) -> Corpus {
        let mut label_counts = [0usize; 2];
        for r in &records {
            label_counts[r.label.index()] += 1;
        }
        Corpus {
            records,
            label_counts,
        }
    }

    pub fn records(&self) -> &[ContractRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn label_count(&self, label: Label) -> usize {
        self.label_counts[label.index()]
    }

    /// SHA-256 over every record digest, in order; corpus provenance id.
    pub fn digest_hex(&self) -> String {
        let mut hasher = Sha256::new();
        for r in &self.records {
            hasher.update(r.digest());
            hasher.update([r.label.index() as u8]);
        }
        hex::encode(hasher.finalize())
    }

    /// Loads JSONL (one record object per line); `.csv` paths fall back
    /// to the CSV reader.
    pub fn load(path: impl AsRef<Path>) -> Result<Corpus> {
        let path = path.as_ref();
        if path.extension().and_then(|e| e.to_str()) == Some("csv") {
            return Corpus::load_csv(path);
        }
        let file = std::fs::File::open(path)?;
        let reader = std::io::BufReader::new(file);
        let mut records = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ContractRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: idx + 1,
                msg: e.to_string(),
            })?;
            record.validate().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: e.to_string(),
            })?;
            records.push(record);
        }
        Ok(Corpus::new(records))
    }

    /// CSV fallback with header `address,bytecode,label,deployed_month,source`.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Corpus> {
        let mut reader = csv::Reader::from_path(path.as_ref())?;
        let mut records = Vec::new();
        for (idx, row) in reader.deserialize::<CsvRecord>().enumerate() {
            let row = row.map_err(|e| Error::Parse {
                line: idx + 2,
                msg: e.to_string(),
            })?;
            let record = ContractRecord {
                address: row.address,
                bytecode: decode_hex(&row.bytecode).map_err(|e| Error::Parse {
                    line: idx + 2,
                    msg: e.to_string(),
                })?,
                label: row.label.parse().map_err(|e: Error| Error::Parse {
                    line: idx + 2,
                    msg: e.to_string(),
                })?,
                deployed_month: row.deployed_month.parse().map_err(|e: Error| Error::Parse {
                    line: idx + 2,
                    msg: e.to_string(),
                })?,
                source: row.source,
            };
            record.validate().map_err(|e| Error::Parse {
                line: idx + 2,
                msg: e.to_string(),
            })?;
            records.push(record);
        }
        Ok(Corpus::new(records))
    }

    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        for r in &self.records {
            serde_json::to_writer(&mut out, r).map_err(|e| Error::other(e.to_string()))?;
            writeln!(out)?;
        }
        Ok(())
    }

    /// Keeps one representative per bit-identical bytecode: earliest
    /// deployed month wins, ties broken by lexicographic address.
    /// Returns the deduplicated corpus and the removed-record count.
    pub fn dedup_exact(&self) -> (Corpus, usize) {
        let mut best: HashMap<[u8; 32], usize> = HashMap::new();
        for (i, r) in self.records.iter().enumerate() {
            let key = r.digest();
            match best.entry(key) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(i);
                }
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    let cur = &self.records[*e.get()];
                    let better = (r.deployed_month, &r.address) < (cur.deployed_month, &cur.address);
                    if better {
                        e.insert(i);
                    }
                }
            }
        }
        let mut keep: Vec<usize> = best.into_values().collect();
        keep.sort_unstable();
        let removed = self.records.len() - keep.len();
        let records = keep.into_iter().map(|i| self.records[i].clone()).collect();
        (Corpus::new(records), removed)
    }
}

#[derive(Deserialize)]
struct CsvRecord {
    address: String,
    bytecode: String,
    label: String,
    deployed_month: String,
    source: String,
}

/// Per-month per-class counts plus per-contract opcode usage shares.
#[derive(Debug, Clone)]
pub struct CorpusReport {
    /// month -> [benign, phishing]
    pub monthly_counts: BTreeMap<YearMonth, [usize; 2]>,
    /// (address, label, mnemonic, usage share within the contract)
    pub usage_shares: Vec<(String, Label, String, f64)>,
}

/// Builds the report; `mnemonics` selects which opcode usage-share
/// distributions to emit (empty slice = none).
pub fn corpus_report(
    corpus: &Corpus,
    mnemonics: &[String],
    table: &OpcodeTable,
) -> Result<CorpusReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("corpus is empty".into()));
    }
    let mut monthly_counts: BTreeMap<YearMonth, [usize; 2]> = BTreeMap::new();
    for r in corpus.records() {
        monthly_counts.entry(r.deployed_month).or_default()[r.label.index()] += 1;
    }

    let wanted: Vec<(String, u8)> = mnemonics
        .iter()
        .map(|m| {
            table
                .code_of(m)
                .map(|c| (m.clone(), c))
                .ok_or_else(|| Error::Validation(format!("unknown mnemonic {m:?}")))
        })
        .collect::<Result<_>>()?;

    let mut usage_shares = Vec::new();
    if !wanted.is_empty() {
        for r in corpus.records() {
            let instructions = disassemble_bytes(&r.bytecode, table);
            let total = instructions.len();
            let mut counts = [0usize; 256];
            for ins in &instructions {
                counts[ins.code as usize] += 1;
            }
            for (name, code) in &wanted {
                let share = if total == 0 {
                    0.0
                } else {
                    counts[*code as usize] as f64 / total as f64
                };
                usage_shares.push((r.address.clone(), r.label, name.clone(), share));
            }
        }
    }
    Ok(CorpusReport {
        monthly_counts,
        usage_shares,
    })
}

impl CorpusReport {
    pub fn write_monthly_csv(&self, mut out: impl Write) -> Result<usize> {
        writeln!(out, "month,benign,phishing")?;
        for (month, counts) in &self.monthly_counts {
            writeln!(out, "{month},{},{}", counts[0], counts[1])?;
        }
        Ok(self.monthly_counts.len())
    }

    pub fn write_usage_csv(&self, mut out: impl Write) -> Result<usize> {
        writeln!(out, "address,label,mnemonic,usage_share")?;
        for (addr, label, mnemonic, share) in &self.usage_shares {
            writeln!(out, "{addr},{},{mnemonic},{share}", label.name())?;
        }
        Ok(self.usage_shares.len())
    }
}

/// Cached disassembly for a whole corpus (records in corpus order).
pub fn disassemble_corpus(corpus: &Corpus, table: &OpcodeTable) -> Vec<Vec<Instruction>> {
    crate::par::map_slice(corpus.records(), |r| disassemble_bytes(&r.bytecode, table))
}
