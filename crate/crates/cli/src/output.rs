//! report.json and CSV writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;
use eprlab_core::Density1D;

pub const REPORT_FILE: &str = "report.json";

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    /// The only field that changes between identical runs; it sits on a
    /// line of its own in the pretty-printed file.
    generated_at: String,
    version: &'a str,
    command: &'a str,
    seed: u64,
    config: &'a RunConfig,
    result: &'a T,
}

pub struct Output {
    dir: PathBuf,
    written: Vec<String>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Numeric CSV with 17 significant digits per value.
    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<f64>>,
    ) -> Result<()> {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            let mut first = true;
            for v in row {
                if !first {
                    text.push(',');
                }
                first = false;
                write!(text, "{v:.16e}").expect("writing to a String cannot fail");
            }
            text.push('\n');
        }
        self.write(name, &text)
    }

    pub fn density(&mut self, name: &str, d: &Density1D) -> Result<()> {
        let column = match d.representation {
            eprlab_core::Representation::Position => "x",
            eprlab_core::Representation::Momentum => "p",
        };
        let rows = d
            .coordinates()
            .into_iter()
            .zip(&d.values)
            .map(|(c, v)| vec![c, *v]);
        self.csv(name, &[column, "density"], rows)
    }

    pub fn report<T: Serialize>(&mut self, command: &str, cfg: &RunConfig, result: &T) -> Result<()> {
        let report = Report {
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: cfg.seed,
            config: cfg,
            result,
        };
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        self.write(REPORT_FILE, &text)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

/// `0.5` -> `tau0.5`, used in density file names.
pub fn tau_tag(delay: f64) -> String {
    format!("tau{delay}")
}
