//! Run configuration: a JSON file, command-line overrides and defaults, in
//! that order of precedence.

use std::path::{Path, PathBuf};

use bergman_core::grassmann::GrassmannDims;
use bergman_core::group::{bolza_group, load_group_file, GroupSpec};
use bergman_core::kernel::MIN_WEIGHT;
use bergman_core::HPoint64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Environment variable read for the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "BERGMAN_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Row-major in `y`, then `x`; a single sample sits at the lower edge.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let step = |lo: f64, hi: f64, n: usize, i: usize| {
            if n <= 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push([
                    step(self.x_min, self.x_max, self.nx, ix),
                    step(self.y_min, self.y_max, self.ny, iy),
                ]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    List(Vec<[f64; 2]>),
    Grid(GridSpec),
}

impl PointSpec {
    pub fn resolve(&self) -> Vec<[f64; 2]> {
        match self {
            PointSpec::List(v) => v.clone(),
            PointSpec::Grid(g) => g.points(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruneConfig {
    pub basepoint: [f64; 2],
    pub cutoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative entrywise tolerance for identifying group elements.
    pub dedup: f64,
    /// Bound on `|B(L) - B(L+2)| / |B(L+2)|` flagged in kernel reports.
    pub convergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            dedup: bergman_core::group::DEDUP_TOL,
            convergence: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `"bolza"` or a path to a group JSON file.
    pub group: String,
    pub k_values: Vec<u32>,
    pub points: PointSpec,
    pub max_word_length: usize,
    pub element_cap: usize,
    /// Symmetric-product degree; `points` are grouped into consecutive
    /// `d`-tuples for the `symd` command.
    pub d: Option<usize>,
    pub output: PathBuf,
    pub tolerances: Tolerances,
    /// Displacement pruning of the enumeration; `null` enumerates full word balls.
    pub prune: Option<PruneConfig>,
    /// Injectivity radius to use in the bounds; estimated from the points when absent.
    pub r_x: Option<f64>,
    /// Compare kernel values against a second enumeration at `max_word_length + 2`.
    pub convergence: bool,
    pub injectivity_word_lengths: Vec<usize>,
    /// Worker threads; not part of the serialized configuration so that
    /// reports do not depend on it.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            group: "bolza".into(),
            k_values: (3..=12).collect(),
            points: PointSpec::Grid(GridSpec {
                x_min: -0.5,
                x_max: 0.5,
                y_min: 0.6,
                y_max: 1.6,
                nx: 5,
                ny: 5,
            }),
            max_word_length: 10,
            element_cap: bergman_core::group::DEFAULT_ELEMENT_CAP,
            d: None,
            output: PathBuf::from("reports"),
            tolerances: Tolerances::default(),
            prune: Some(PruneConfig {
                basepoint: [0.0, 1.0],
                cutoff: 12.0,
            }),
            r_x: None,
            convergence: true,
            injectivity_word_lengths: vec![6, 8, 10],
            threads: None,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub group: Option<String>,
    pub k_values: Option<Vec<u32>>,
    pub points: Option<PointSpec>,
    pub max_word_length: Option<usize>,
    pub element_cap: Option<usize>,
    pub d: Option<usize>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(v) = o.group {
            self.group = v;
        }
        if let Some(v) = o.k_values {
            self.k_values = v;
        }
        if let Some(v) = o.points {
            self.points = v;
        }
        if let Some(v) = o.max_word_length {
            self.max_word_length = v;
        }
        if let Some(v) = o.element_cap {
            self.element_cap = v;
        }
        if let Some(v) = o.d {
            self.d = Some(v);
        }
        if let Some(v) = o.output {
            self.output = v;
        }
        if o.threads.is_some() {
            self.threads = o.threads;
        }
    }

    /// Loads the group and checks every field, including the embedding
    /// condition for `d` at every requested `k`.
    pub fn validate(&self) -> Result<Resolved> {
        if self.k_values.is_empty() {
            return Err(CliError::Config("k_values is empty".into()));
        }
        if let Some(&k) = self.k_values.iter().find(|&&k| k < MIN_WEIGHT) {
            return Err(CliError::Config(format!(
                "k = {k} is below the minimum weight {MIN_WEIGHT}"
            )));
        }
        let raw = self.points.resolve();
        if raw.is_empty() {
            return Err(CliError::Config("point list is empty".into()));
        }
        let points = raw
            .iter()
            .map(|&[x, y]| HPoint64::new(x, y))
            .collect::<bergman_core::Result<Vec<_>>>()?;
        if self.element_cap == 0 {
            return Err(CliError::Config("element_cap must be positive".into()));
        }
        if !(self.tolerances.dedup > 0.0 && self.tolerances.convergence > 0.0) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        if let Some(p) = &self.prune {
            HPoint64::new(p.basepoint[0], p.basepoint[1])?;
            if !(p.cutoff > 0.0 && p.cutoff.is_finite()) {
                return Err(CliError::Config(format!(
                    "prune cutoff must be positive, got {}",
                    p.cutoff
                )));
            }
        }
        if let Some(r) = self.r_x {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::Config(format!("r_x must be positive, got {r}")));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        let group = if self.group == "bolza" {
            bolza_group()
        } else {
            load_group_file(Path::new(&self.group))?
        };
        if let Some(d) = self.d {
            if d == 0 {
                return Err(CliError::Config("d must be at least 1".into()));
            }
            for &k in &self.k_values {
                GrassmannDims::new(group.genus(), k, d)?;
            }
        }
        Ok(Resolved {
            config: self.clone(),
            group,
            points,
        })
    }
}

/// A validated configuration with its group and points materialized.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub group: GroupSpec<f64>,
    pub points: Vec<HPoint64>,
}

/// `"3,4,8"` or ranges such as `"3-12"`, mixed freely.
pub fn parse_k_list(s: &str) -> Result<Vec<u32>> {
    let bad = || CliError::Config(format!("cannot parse k list {s:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once('-') {
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

/// `"x,y;x,y"` for explicit points, `"grid:x_min,x_max,y_min,y_max,nx,ny"`
/// for a rectangle, or the empty string for no points.
pub fn parse_points(s: &str) -> Result<PointSpec> {
    let bad = || CliError::Config(format!("cannot parse points {s:?}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    if let Some(rest) = s.strip_prefix("grid:") {
        let f: Vec<&str> = rest.split(',').collect();
        if f.len() != 6 {
            return Err(bad());
        }
        let count = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        return Ok(PointSpec::Grid(GridSpec {
            x_min: num(f[0])?,
            x_max: num(f[1])?,
            y_min: num(f[2])?,
            y_max: num(f[3])?,
            nx: count(f[4])?,
            ny: count(f[5])?,
        }));
    }
    let mut pts = Vec::new();
    for pair in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (x, y) = pair.split_once(',').ok_or_else(bad)?;
        pts.push([num(x)?, num(y)?]);
    }
    Ok(PointSpec::List(pts))
}
