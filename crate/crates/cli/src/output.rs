//! Artifact writer: CSV with a `#` metadata line plus JSON sidecars.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub struct Output {
    dir: PathBuf,
    header: String,
}

/// Fixed 17-significant-digit scientific notation.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn config_hash(text: &str) -> String {
    let d = Sha256::digest(text.as_bytes());
    d.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl Output {
    /// `identity` is the canonical text the run is a function of.
    pub fn create(dir: &Path, identity: &str) -> anyhow::Result<Self> {
        fs::create_dir_all(dir)?;
        let header = format!("# {} config_sha256={}", fracwave_core::VERSION, config_hash(identity));
        Ok(Self { dir: dir.to_path_buf(), header })
    }

    pub fn csv(&self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.header);
        let _ = writeln!(s, "{}", columns.join(","));
        for r in rows {
            debug_assert_eq!(r.len(), columns.len());
            let _ = writeln!(s, "{}", r.join(","));
        }
        fs::write(self.dir.join(name), s)?;
        Ok(())
    }

    pub fn json(&self, name: &str, value: &serde_json::Value) -> anyhow::Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        fs::write(self.dir.join(name), s)?;
        Ok(())
    }

    pub fn text(&self, name: &str, body: &str) -> anyhow::Result<()> {
        fs::write(self.dir.join(name), body)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_is_fixed() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(-0.1), "-1.0000000000000001e-1");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(config_hash("").len(), 64);
    }
}
