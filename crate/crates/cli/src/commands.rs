//! The four report commands. Each evaluates its (point, k) tasks in parallel
//! and gathers results in canonical order, so reports do not depend on the
//! number of worker threads.

use bergman_core::bounds::{
    asymptotic_kernel_check, check_theorem1, corollary1_scan, kernel_upper_chain,
};
use bergman_core::grassmann::{
    corollary2_scan, symd_fs_volume_estimate, theorem2_rhs, SymPoint, SUBSTITUTION_CAVEAT,
};
use bergman_core::group::{
    enumerate_elements_with, injectivity_radius_with, EnumerationOptions, Prune,
};
use bergman_core::kernel::bergman_kernel_x;
use bergman_core::{ElementSet64, HPoint64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Resolved, RunConfig};
use crate::error::{CliError, Result};
use crate::report::{EnumerationSummary, GroupSummary, Header, Report, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Kernel,
    Verify,
    Symd,
    Injectivity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Verify => "verify",
            Command::Symd => "symd",
            Command::Injectivity => "injectivity",
        }
    }
}

/// Runs `command` on a worker pool sized by the configuration.
pub fn execute(command: Command, res: &Resolved) -> Result<Report> {
    let threads = res.config.threads.or_else(|| {
        std::env::var(crate::config::THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&n: &usize| n > 0)
    });
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match command {
        Command::Kernel => cmd_kernel(res),
        Command::Verify => cmd_verify(res),
        Command::Symd => cmd_symd(res),
        Command::Injectivity => cmd_injectivity(res),
    })
}

fn header(command: &'static str, res: &Resolved) -> Header {
    let mut config: RunConfig = res.config.clone();
    config.threads = None;
    Header {
        tool: "bergman",
        library_version: bergman_core::VERSION,
        command,
        config,
        group: GroupSummary::of(&res.group),
    }
}

fn options(cfg: &RunConfig) -> EnumerationOptions {
    EnumerationOptions {
        dedup_tol: cfg.tolerances.dedup,
        element_cap: cfg.element_cap,
    }
}

fn enumerate(res: &Resolved, word_length: usize) -> Result<ElementSet64> {
    let cfg = &res.config;
    let prune = cfg
        .prune
        .map(|p| -> Result<Prune<f64>> {
            Ok(Prune {
                basepoint: HPoint64::new(p.basepoint[0], p.basepoint[1])?,
                displacement_cutoff: p.cutoff,
            })
        })
        .transpose()?;
    Ok(enumerate_elements_with(
        &res.group,
        word_length,
        prune,
        &options(cfg),
    )?)
}

fn document<T: Serialize>(header: Header, body: T) -> serde_json::Value {
    #[derive(Serialize)]
    struct Doc<T> {
        #[serde(flatten)]
        header: Header,
        #[serde(flatten)]
        body: T,
    }
    serde_json::to_value(Doc { header, body }).expect("report values serialize")
}

/// Every `(point, k)` pair in point-major order.
fn tasks(res: &Resolved) -> Vec<(HPoint64, u32)> {
    res.points
        .iter()
        .flat_map(|&z| res.config.k_values.iter().map(move |&k| (z, k)))
        .collect()
}

fn par_rows<R: Send>(
    tasks: &[(HPoint64, u32)],
    f: impl Fn(HPoint64, u32) -> Result<R> + Sync,
) -> Result<Vec<R>> {
    tasks.par_iter().map(|&(z, k)| f(z, k)).collect()
}

#[derive(Debug, Clone, Serialize)]
struct KernelRow {
    x: f64,
    y: f64,
    k: u32,
    value_re: f64,
    value_im: f64,
    magnitude_sum: f64,
    last_shell_magnitude: f64,
    tail_estimate: f64,
    element_count: usize,
    word_length: usize,
    compare_word_length: Option<usize>,
    compare_value: Option<f64>,
    compare_rel_diff: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct AsymptoticRowOut {
    x: f64,
    y: f64,
    k: u32,
    kernel: f64,
    deviation: f64,
    identity_deviation: f64,
    within_bound: bool,
}

#[derive(Serialize)]
struct KernelBody {
    enumeration: EnumerationSummary,
    compare_enumeration: Option<EnumerationSummary>,
    rows: Vec<KernelRow>,
    asymptotics: Vec<AsymptoticRowOut>,
    summary: KernelSummary,
}

#[derive(Serialize)]
struct KernelSummary {
    rows: usize,
    /// Largest relative change from `L` to `L + 2` over rows with `k >= 4`.
    max_compare_rel_diff: Option<f64>,
    converged: Option<bool>,
    /// Rows with `|2π B/k - 1| <= 0.6/k`.
    asymptotic_within_bound: usize,
}

/// Kernel values with truncation metadata, an `L + 2` convergence column and
/// the `|2π B/k - 1|` deviations.
pub fn cmd_kernel(res: &Resolved) -> Result<Report> {
    let cfg = &res.config;
    let elems = enumerate(res, cfg.max_word_length)?;
    let compare = if cfg.convergence {
        Some(enumerate(res, cfg.max_word_length + 2)?)
    } else {
        None
    };
    let tasks = tasks(res);
    let rows = par_rows(&tasks, |z, k| {
        let eval = bergman_kernel_x(z, k, &elems)?;
        let cmp = compare
            .as_ref()
            .map(|set| bergman_kernel_x(z, k, set).map(|e| (set.max_word_length(), e.value.re)))
            .transpose()?;
        Ok(KernelRow {
            x: z.x(),
            y: z.y(),
            k,
            value_re: eval.value.re,
            value_im: eval.value.im,
            magnitude_sum: eval.magnitude_sum,
            last_shell_magnitude: eval.last_shell_magnitude,
            tail_estimate: eval.tail_estimate,
            element_count: eval.element_count,
            word_length: cfg.max_word_length,
            compare_word_length: cmp.map(|c| c.0),
            compare_value: cmp.map(|c| c.1),
            compare_rel_diff: cmp.map(|(_, v)| (eval.value.re - v).abs() / v.abs()),
        })
    })?;

    let per_point = res
        .points
        .par_iter()
        .map(|&z| asymptotic_kernel_check(z, &cfg.k_values, &elems))
        .collect::<bergman_core::Result<Vec<_>>>()?;
    let asymptotics: Vec<_> = res
        .points
        .iter()
        .zip(&per_point)
        .flat_map(|(z, scan)| {
            scan.rows.iter().map(move |r| AsymptoticRowOut {
                x: z.x(),
                y: z.y(),
                k: r.k,
                kernel: r.kernel,
                deviation: r.deviation,
                identity_deviation: r.identity_deviation,
                within_bound: r.deviation <= 0.6 / r.k as f64,
            })
        })
        .collect();

    let max_diff = rows
        .iter()
        .filter(|r| r.k >= 4)
        .filter_map(|r| r.compare_rel_diff)
        .fold(None, |acc: Option<f64>, d| {
            Some(acc.map_or(d, |a| a.max(d)))
        });
    let summary = KernelSummary {
        rows: rows.len(),
        max_compare_rel_diff: max_diff,
        converged: max_diff.map(|d| d <= cfg.tolerances.convergence),
        asymptotic_within_bound: asymptotics.iter().filter(|r| r.within_bound).count(),
    };
    let line = match max_diff {
        Some(d) => format!(
            "kernel: {} rows, max |B(L)-B(L+2)|/|B| = {d:.3e} (k >= 4), {}/{} asymptotic rows within 0.6/k",
            summary.rows,
            summary.asymptotic_within_bound,
            asymptotics.len()
        ),
        None => format!("kernel: {} rows", summary.rows),
    };
    let tables = vec![
        Table::from_rows("values", &rows)?,
        Table::from_rows("asymptotics", &asymptotics)?,
    ];
    let body = KernelBody {
        enumeration: EnumerationSummary::of(&elems, cfg.prune),
        compare_enumeration: compare
            .as_ref()
            .map(|s| EnumerationSummary::of(s, cfg.prune)),
        rows,
        asymptotics,
        summary,
    };
    Ok(Report {
        command: "kernel",
        document: document(header("kernel", res), body),
        tables,
        summary: line,
        checks: None,
    })
}

#[derive(Debug, Clone, Serialize)]
struct RadiusUsed {
    value: f64,
    /// `"config"` or `"enumeration"`; an enumerated value is an upper bound.
    source: &'static str,
    is_upper_bound: bool,
    word_length: Option<usize>,
    argmin_word: Option<String>,
}

fn radius(res: &Resolved) -> Result<RadiusUsed> {
    if let Some(r) = res.config.r_x {
        return Ok(RadiusUsed {
            value: r,
            source: "config",
            is_upper_bound: false,
            word_length: None,
            argmin_word: None,
        });
    }
    let l = res.config.max_word_length.max(1);
    let est = injectivity_radius_with(&res.group, &res.points, l, &options(&res.config))?;
    Ok(RadiusUsed {
        value: est.r_upper,
        source: "enumeration",
        is_upper_bound: true,
        word_length: Some(l),
        argmin_word: Some(est.argmin_word),
    })
}

#[derive(Debug, Clone, Serialize)]
struct VerifyRow {
    x: f64,
    y: f64,
    k: u32,
    lhs: f64,
    rhs: f64,
    slack: f64,
    passed: bool,
    ratio: f64,
    kernel: f64,
    c_x: f64,
    /// Right-hand side with `C_X` evaluated at `r_x / 2`.
    rhs_half_radius: f64,
    passed_half_radius: bool,
    cosh_sum: f64,
    kernel_le_cosh_sum: bool,
    cosh_sum_le_c_x: bool,
    cosh_sum_identity_error: f64,
    tail_estimate: f64,
    element_count: usize,
}

#[derive(Debug, Clone, Serialize)]
struct Corollary1Out {
    x: f64,
    y: f64,
    k: u32,
    scaled: f64,
    bound: f64,
    below: bool,
}

#[derive(Serialize)]
struct VerifyBody {
    enumeration: EnumerationSummary,
    r_x: RadiusUsed,
    rows: Vec<VerifyRow>,
    corollary1: Vec<Corollary1Out>,
    corollary1_thresholds: Vec<Option<u32>>,
    summary: VerifySummary,
}

#[derive(Serialize)]
struct VerifySummary {
    total: usize,
    theorem1_passed: usize,
    chain_passed: usize,
    failed: usize,
    passed_half_radius: usize,
}

/// Theorem 1 and the kernel upper chain at every `(z, k)`, plus the
/// Corollary 1 scan per point. Any failed check makes the command fail.
pub fn cmd_verify(res: &Resolved) -> Result<Report> {
    let cfg = &res.config;
    let elems = enumerate(res, cfg.max_word_length)?;
    let r = radius(res)?;
    let tasks = tasks(res);
    let rows = par_rows(&tasks, |z, k| {
        let t = check_theorem1(z, k, &elems, r.value)?;
        let chain = kernel_upper_chain(z, k, &elems, r.value)?;
        Ok(VerifyRow {
            x: z.x(),
            y: z.y(),
            k,
            lhs: t.bound.lhs,
            rhs: t.bound.rhs,
            slack: t.bound.slack,
            passed: t.bound.passed,
            ratio: t.ratio,
            kernel: t.kernel,
            c_x: t.c_x,
            rhs_half_radius: t.rhs_sensitivity,
            passed_half_radius: t.passed_sensitivity,
            cosh_sum: chain.kernel_le_cosh_sum.rhs,
            kernel_le_cosh_sum: chain.kernel_le_cosh_sum.passed,
            cosh_sum_le_c_x: chain.cosh_sum_le_cx.passed,
            cosh_sum_identity_error: chain.cosh_sum_identity_error,
            tail_estimate: t.bound.inputs.tail_estimate,
            element_count: t.bound.inputs.element_count,
        })
    })?;
    let scans = res
        .points
        .par_iter()
        .map(|&z| corollary1_scan(z, &cfg.k_values, &elems))
        .collect::<bergman_core::Result<Vec<_>>>()?;
    let corollary1 = res
        .points
        .iter()
        .zip(&scans)
        .flat_map(|(z, s)| {
            s.rows.iter().map(move |row| Corollary1Out {
                x: z.x(),
                y: z.y(),
                k: row.k,
                scaled: row.scaled,
                bound: row.bound,
                below: row.below,
            })
        })
        .collect::<Vec<_>>();

    let theorem1_passed = rows.iter().filter(|r| r.passed).count();
    let chain_passed = rows
        .iter()
        .filter(|r| r.kernel_le_cosh_sum && r.cosh_sum_le_c_x)
        .count();
    let failed = rows
        .iter()
        .filter(|r| !(r.passed && r.kernel_le_cosh_sum && r.cosh_sum_le_c_x))
        .count();
    let summary = VerifySummary {
        total: rows.len(),
        theorem1_passed,
        chain_passed,
        failed,
        passed_half_radius: rows.iter().filter(|r| r.passed_half_radius).count(),
    };
    let line = format!(
        "verify: theorem 1 {}/{} passed, chain {}/{} passed (r_x = {:.6} from {})",
        theorem1_passed, summary.total, chain_passed, summary.total, r.value, r.source
    );
    let tables = vec![
        Table::from_rows("bounds", &rows)?,
        Table::from_rows("corollary1", &corollary1)?,
    ];
    let total = rows.len();
    let body = VerifyBody {
        enumeration: EnumerationSummary::of(&elems, cfg.prune),
        r_x: r,
        rows,
        corollary1,
        corollary1_thresholds: scans.iter().map(|s| s.threshold_k).collect(),
        summary,
    };
    Ok(Report {
        command: "verify",
        document: document(header("verify", res), body),
        tables,
        summary: line,
        checks: Some((failed, total)),
    })
}

#[derive(Debug, Clone, Serialize)]
struct TupleOut {
    tuple: usize,
    slot: usize,
    x: f64,
    y: f64,
}

#[derive(Debug, Clone, Serialize)]
struct SymdRow {
    tuple: usize,
    k: u32,
    hyp_volume_density: f64,
    fs_volume_estimate: f64,
    /// Product of the per-point ratios `μ_ber/μ_hyp`.
    ratio_product: f64,
    lhs: f64,
    rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
struct Corollary2Out {
    tuple: usize,
    k: u32,
    scaled: f64,
    bound: f64,
    below: bool,
}

#[derive(Serialize)]
struct SymdBody {
    caveat: &'static str,
    d: usize,
    enumeration: EnumerationSummary,
    r_x: RadiusUsed,
    tuples: Vec<TupleOut>,
    rows: Vec<SymdRow>,
    corollary2: Vec<Corollary2Out>,
    corollary2_thresholds: Vec<Option<u32>>,
}

/// Sym^d volume estimates and product bounds for consecutive `d`-tuples of
/// the configured points. Nothing here is certified; see the caveat.
pub fn cmd_symd(res: &Resolved) -> Result<Report> {
    let cfg = &res.config;
    let d = cfg
        .d
        .ok_or_else(|| CliError::Config("symd needs the symmetric-product degree d".into()))?;
    if !res.points.len().is_multiple_of(d) {
        return Err(CliError::Config(format!(
            "{} points do not split into tuples of size d = {d}",
            res.points.len()
        )));
    }
    let sym = res
        .points
        .chunks(d)
        .map(|c| SymPoint::new(c.to_vec()))
        .collect::<bergman_core::Result<Vec<_>>>()?;
    let elems = enumerate(res, cfg.max_word_length)?;
    let r = radius(res)?;

    let tasks: Vec<(usize, u32)> = (0..sym.len())
        .flat_map(|t| cfg.k_values.iter().map(move |&k| (t, k)))
        .collect();
    let rows = tasks
        .par_iter()
        .map(|&(t, k)| {
            let p = &sym[t];
            let est = symd_fs_volume_estimate(p, k, &elems)?;
            let ratio_product = est.factors.iter().fold(1.0, |acc, f| acc * f);
            Ok(SymdRow {
                tuple: t,
                k,
                hyp_volume_density: est.hyp_volume_density,
                fs_volume_estimate: est.value,
                ratio_product,
                lhs: ratio_product.abs(),
                rhs: theorem2_rhs(p, k, &elems, r.value)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let scans = sym
        .par_iter()
        .map(|p| corollary2_scan(p, &cfg.k_values, &elems))
        .collect::<bergman_core::Result<Vec<_>>>()?;
    let corollary2 = scans
        .iter()
        .enumerate()
        .flat_map(|(t, s)| {
            s.rows.iter().map(move |row| Corollary2Out {
                tuple: t,
                k: row.k,
                scaled: row.scaled,
                bound: row.bound,
                below: row.below,
            })
        })
        .collect::<Vec<_>>();
    let tuples = sym
        .iter()
        .enumerate()
        .flat_map(|(t, p)| {
            p.points()
                .iter()
                .enumerate()
                .map(move |(slot, z)| TupleOut {
                    tuple: t,
                    slot,
                    x: z.x(),
                    y: z.y(),
                })
        })
        .collect::<Vec<_>>();

    let line = format!(
        "symd: d = {d}, {} tuples x {} weights; estimates only (remainder unquantified)",
        sym.len(),
        cfg.k_values.len()
    );
    let tables = vec![
        Table::from_rows("tuples", &tuples)?,
        Table::from_rows("volumes", &rows)?,
        Table::from_rows("corollary2", &corollary2)?,
    ];
    let body = SymdBody {
        caveat: SUBSTITUTION_CAVEAT,
        d,
        enumeration: EnumerationSummary::of(&elems, cfg.prune),
        r_x: r,
        tuples,
        rows,
        corollary2,
        corollary2_thresholds: scans.iter().map(|s| s.threshold_k).collect(),
    };
    Ok(Report {
        command: "symd",
        document: document(header("symd", res), body),
        tables,
        summary: line,
        checks: None,
    })
}

#[derive(Debug, Clone, Serialize)]
struct InjectivityRow {
    word_length: usize,
    r_upper: f64,
    argmin_word: String,
    basepoint_x: f64,
    basepoint_y: f64,
    change: Option<f64>,
}

#[derive(Serialize)]
struct InjectivityBody {
    rows: Vec<InjectivityRow>,
    r_upper: f64,
    argmin_word: String,
}

/// Upper bounds for the injectivity radius over the configured points, one
/// per word-length budget.
pub fn cmd_injectivity(res: &Resolved) -> Result<Report> {
    let cfg = &res.config;
    if cfg.injectivity_word_lengths.is_empty() {
        return Err(CliError::Config("injectivity_word_lengths is empty".into()));
    }
    if cfg.injectivity_word_lengths.contains(&0) {
        return Err(CliError::Config(
            "injectivity word lengths must be at least 1".into(),
        ));
    }
    let mut rows: Vec<InjectivityRow> = Vec::new();
    for &l in &cfg.injectivity_word_lengths {
        let est = injectivity_radius_with(&res.group, &res.points, l, &options(cfg))?;
        let change = rows.last().map(|prev| est.r_upper - prev.r_upper);
        rows.push(InjectivityRow {
            word_length: l,
            r_upper: est.r_upper,
            argmin_word: est.argmin_word,
            basepoint_x: est.argmin_basepoint.x(),
            basepoint_y: est.argmin_basepoint.y(),
            change,
        });
    }
    let last = rows.last().expect("at least one word length");
    let line = format!(
        "injectivity: r_upper = {:.10} at L = {} ({})",
        last.r_upper, last.word_length, last.argmin_word
    );
    let tables = vec![Table::from_rows("convergence", &rows)?];
    let body = InjectivityBody {
        r_upper: last.r_upper,
        argmin_word: last.argmin_word.clone(),
        rows,
    };
    Ok(Report {
        command: "injectivity",
        document: document(header("injectivity", res), body),
        tables,
        summary: line,
        checks: None,
    })
}
