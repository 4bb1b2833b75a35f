//! Machine-readable reports and the files they reference.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "INFOGEO_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "infogeo-out";

/// A computed value next to its oracle, when one exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Compared {
    pub computed: f64,
    pub oracle: Option<f64>,
    pub abs_diff: Option<f64>,
    pub rel_diff: Option<f64>,
}

impl Compared {
    pub fn new(computed: f64, oracle: Option<f64>) -> Self {
        let abs_diff = oracle.map(|o| (computed - o).abs());
        let rel_diff = oracle.zip(abs_diff).map(|(o, d)| if d == 0.0 { 0.0 } else { d / o.abs().max(computed.abs()) });
        Compared {
            computed,
            oracle,
            abs_diff,
            rel_diff,
        }
    }

    pub fn against(computed: f64, oracle: f64) -> Self {
        Self::new(computed, Some(oracle))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub command: String,
    pub config: Option<RunConfig>,
    pub results: T,
    pub verdicts: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// Output root: explicit setting, else `INFOGEO_OUT_DIR`, else `infogeo-out`.
pub fn resolve_out_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|s| !s.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&root)?;
        Ok(OutDir {
            root,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Opens `name` for writing and records it for the report.
    pub fn file(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.root.join(name);
        let f = File::create(&path)?;
        self.written.push(path);
        Ok(BufWriter::new(f))
    }

    /// Writes a numeric table with 17 significant digits per value.
    pub fn table(&mut self, name: &str, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let mut w = self.file(name)?;
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn files(&self) -> Vec<PathBuf> {
        self.written.clone()
    }

    /// Writes `<command>.json` and returns its path.
    pub fn finish<T: Serialize>(&mut self, report: &Report<T>) -> Result<PathBuf, CliError> {
        let path = self.root.join(format!("{}.json", report.command));
        let text = serde_json::to_string_pretty(report).expect("report serialises");
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compared_handles_zero_oracle() {
        let c = Compared::against(0.0, 0.0);
        assert_eq!((c.abs_diff, c.rel_diff), (Some(0.0), Some(0.0)));
        let c = Compared::against(1.0, 2.0);
        assert_eq!(c.rel_diff, Some(0.5));
        assert_eq!(Compared::new(3.0, None).rel_diff, None);
    }

    #[test]
    fn explicit_out_dir_wins() {
        assert_eq!(resolve_out_dir(Some(Path::new("x"))), PathBuf::from("x"));
    }
}
