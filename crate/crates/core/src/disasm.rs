//! Linear-sweep disassembly of deployed EVM bytecode.
//!
//! Every input byte is consumed exactly once: PUSHk takes its k operand
//! bytes, a PUSH cut off by the end of the code keeps whatever bytes are
//! left and is flagged truncated, and bytes without a table entry become
//! `UNKNOWN_0xXX` instructions. Concatenating code and operand bytes in
//! offset order therefore reproduces the input exactly. No control-flow
//! recovery is attempted and the metadata trailer is not stripped.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::opcode::OpcodeTable;

/// One decoded instruction. The opcode byte is kept instead of the
/// mnemonic string; resolve display fields through the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instruction {
    pub offset: usize,
    pub code: u8,
    /// Operand bytes; present iff the opcode declares a push width.
    /// May be shorter than declared (then `truncated` is set).
    pub operand: Option<Vec<u8>>,
    pub truncated: bool,
}

impl Instruction {
    pub fn mnemonic<'t>(&self, table: &'t OpcodeTable) -> &'t str {
        table.mnemonic(self.code)
    }

    pub fn gas(&self, table: &OpcodeTable) -> Option<u64> {
        table.static_gas(self.code)
    }

    /// 1 + consumed operand bytes.
    pub fn byte_len(&self) -> usize {
        1 + self.operand.as_ref().map_or(0, Vec::len)
    }
}

/// Decodes an optionally 0x-prefixed, even-length hex string.
pub fn decode_hex(input: &str) -> Result<Vec<u8>> {
    let s = input
        .trim()
        .strip_prefix("0x")
        .or_else(|| input.trim().strip_prefix("0X"))
        .unwrap_or_else(|| input.trim());
    if s.len() % 2 != 0 {
        return Err(Error::HexDecode(format!(
            "odd-length hex input ({} chars)",
            s.len()
        )));
    }
    hex::decode(s).map_err(|e| Error::HexDecode(e.to_string()))
}

/// Linear sweep from offset 0. Total: never fails on raw bytes.
pub fn disassemble_bytes(bytes: &[u8], table: &OpcodeTable) -> Vec<Instruction> {
    let mut out = Vec::new();
    let mut offset = 0usize;
    while offset < bytes.len() {
        let code = bytes[offset];
        let width = table.push_width(code) as usize;
        let (operand, truncated) = if width > 0 {
            let start = offset + 1;
            let end = (start + width).min(bytes.len());
            (Some(bytes[start..end].to_vec()), end - start < width)
        } else {
            (None, false)
        };
        let len = 1 + operand.as_ref().map_or(0, Vec::len);
        out.push(Instruction {
            offset,
            code,
            operand,
            truncated,
        });
        offset += len;
    }
    out
}

/// Disassembles a hex string (optionally 0x-prefixed, may be empty).
pub fn disassemble_hex(input: &str, table: &OpcodeTable) -> Result<Vec<Instruction>> {
    Ok(disassemble_bytes(&decode_hex(input)?, table))
}

/// Inverse of the sweep: code byte + operand bytes in offset order.
pub fn reassemble(instructions: &[Instruction]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(instructions.iter().map(Instruction::byte_len).sum());
    for ins in instructions {
        bytes.push(ins.code);
        if let Some(op) = &ins.operand {
            bytes.extend_from_slice(op);
        }
    }
    bytes
}

/// Writes one CSV row per instruction and returns the data-row count.
///
/// Columns: offset, mnemonic, operand (0x-hex, empty cell when absent),
/// gas (literal `NaN` when absent), truncated.
pub fn write_disassembly_csv(
    instructions: &[Instruction],
    table: &OpcodeTable,
    mut out: impl Write,
) -> Result<usize> {
    writeln!(out, "offset,mnemonic,operand,gas,truncated")?;
    for ins in instructions {
        let operand = match &ins.operand {
            Some(bytes) => format!("0x{}", hex::encode(bytes)),
            None => String::new(),
        };
        let gas = match ins.gas(table) {
            Some(g) => g.to_string(),
            None => "NaN".to_string(),
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            ins.offset,
            ins.mnemonic(table),
            operand,
            gas,
            ins.truncated
        )?;
    }
    Ok(instructions.len())
}

/// [`write_disassembly_csv`] to a file path.
pub fn write_disassembly_csv_file(
    instructions: &[Instruction],
    table: &OpcodeTable,
    path: impl AsRef<Path>,
) -> Result<usize> {
    let file = std::fs::File::create(path)?;
    write_disassembly_csv(instructions, table, std::io::BufWriter::new(file))
}
