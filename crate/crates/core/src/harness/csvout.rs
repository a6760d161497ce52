//! CSV output with locale-independent, 17-significant-digit numbers.

use crate::error::Result;
use std::io::Write;

/// 17 significant digits, enough to round-trip any f64.
pub fn g17(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        // keep integers readable; still exact
        format!("{x:.1}")
    } else {
        format!("{x:.16e}")
    }
}

pub struct CsvWriter {
    rows: Vec<String>,
}

impl CsvWriter {
    pub fn new(header: &str) -> Self {
        Self { rows: vec![header.to_string()] }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for r in &self.rows {
            out.extend_from_slice(r.as_bytes());
            out.push(b'\n');
        }
        out
    }

    pub fn write_to(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(bytes);
    let d = h.finalize();
    d.iter().map(|b| format!("{b:02x}")).collect()
}
