use std::path::PathBuf;
use std::process::ExitCode;

use bergman_cli::config::{parse_k_list, parse_points};
use bergman_cli::{run, CliError, Command, Overrides, RunConfig};
use clap::Parser;

/// Bergman kernels, metric bounds and injectivity radii on compact
/// hyperbolic surfaces.
#[derive(Debug, Parser)]
#[command(name = "bergman", version)]
struct Args {
    /// Report to produce.
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `bolza` or a path to a group JSON file.
    #[arg(long)]
    group: Option<String>,
    /// Weights, e.g. `3-12` or `4,8,16`.
    #[arg(long)]
    k: Option<String>,
    /// `x,y;x,y` or `grid:x_min,x_max,y_min,y_max,nx,ny`.
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
    #[arg(long)]
    word_length: Option<usize>,
    /// Symmetric-product degree for `symd`.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: $BERGMAN_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    element_cap: Option<usize>,
}

fn resolve(args: Args) -> Result<(Command, RunConfig), CliError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(Overrides {
        group: args.group,
        k_values: args.k.as_deref().map(parse_k_list).transpose()?,
        points: args.points.as_deref().map(parse_points).transpose()?,
        max_word_length: args.word_length,
        element_cap: args.element_cap,
        d: args.d,
        output: args.out,
        threads: args.threads,
    });
    Ok((args.command, cfg))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = resolve(args).and_then(|(command, cfg)| {
        let res = cfg.validate()?;
        run(command, &res)
    });
    match outcome {
        Ok(report) => {
            println!("{}", report.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
