//! Artifact writers. Floats use 17 significant digits in `.`-decimal
//! scientific notation so every value round-trips exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::Value;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Quotes a field when it contains a separator or quote.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<PathBuf> {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            let cells: Vec<String> = row.iter().map(|c| field(c)).collect();
            writeln!(text, "{}", cells.join(",")).unwrap();
        }
        self.write(name, &text)
    }

    pub fn json(&self, name: &str, value: &Value) -> anyhow::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn write(&self, name: &str, text: &str) -> anyhow::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, std::f64::consts::PI, -1e-300, 123456.789] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        assert_eq!(field("(1,2)"), "\"(1,2)\"");
        assert_eq!(field("3"), "3");
    }
}
