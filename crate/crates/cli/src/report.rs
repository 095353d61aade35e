//! Report documents and their on-disk form: one JSON document per command
//! plus CSV projections of its tables.

use std::path::{Path, PathBuf};

use bergman_core::group::{ElementSet, GroupSpec};
use serde::Serialize;

use crate::config::{PruneConfig, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct GroupSummary {
    pub label: String,
    pub genus: u32,
    pub generator_count: usize,
}

impl GroupSummary {
    pub fn of(group: &GroupSpec<f64>) -> Self {
        Self {
            label: group.label().to_string(),
            genus: group.genus(),
            generator_count: group.generators().len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationSummary {
    pub max_word_length: usize,
    /// Longest word length actually present; shorter when the ball closed early.
    pub truncation_word_length: usize,
    pub element_count: usize,
    pub shell_sizes: Vec<usize>,
    pub prune: Option<PruneConfig>,
}

impl EnumerationSummary {
    pub fn of(set: &ElementSet<f64>, prune: Option<PruneConfig>) -> Self {
        Self {
            max_word_length: set.max_word_length(),
            truncation_word_length: set.truncation_word_length(),
            element_count: set.len(),
            shell_sizes: set.shells().map(<[_]>::len).collect(),
            prune,
        }
    }
}

/// Fields shared by every report document.
#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub library_version: &'static str,
    pub command: &'static str,
    pub config: RunConfig,
    pub group: GroupSummary,
}

/// A CSV projection of one report table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub csv: String,
}

impl Table {
    pub fn from_rows<R: Serialize>(name: &str, rows: &[R]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(|e| output_err(name, e))?;
        }
        let bytes = w.into_inner().map_err(|e| output_err(name, e))?;
        Ok(Self {
            name: name.to_string(),
            csv: String::from_utf8(bytes).expect("csv output is UTF-8"),
        })
    }
}

fn output_err(name: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: PathBuf::from(name),
        message: e.to_string(),
    }
}

/// A finished command: the JSON document, its tables and a one-line summary.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub document: serde_json::Value,
    pub tables: Vec<Table>,
    pub summary: String,
    /// `(failed, total)` for commands that check bounds.
    pub checks: Option<(usize, usize)>,
}

impl Report {
    /// The exact bytes written to `<command>.json`.
    pub fn json_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(&self.document).expect("report values serialize");
        out.push(b'\n');
        out
    }

    /// Writes `<command>.json` and `<command>_<table>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut written = Vec::new();
        let mut put = |path: PathBuf, bytes: &[u8]| {
            std::fs::write(&path, bytes).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            written.push(path);
            Ok::<_, CliError>(())
        };
        put(
            dir.join(format!("{}.json", self.command)),
            &self.json_bytes(),
        )?;
        for t in &self.tables {
            put(
                dir.join(format!("{}_{}.csv", self.command, t.name)),
                t.csv.as_bytes(),
            )?;
        }
        Ok(written)
    }
}
