//! Experiment driver for the plane wave VEM solver.

// `!(x > 0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiments;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{read_config_file, Config};
use experiments::RunError;

/// Runs a Helmholtz convergence experiment and writes CSV and plot data.
///
/// Settings come from experiment defaults, then the config file, then flags.
#[derive(Parser, Debug)]
#[command(name = "pwvem", version, about)]
struct Cli {
    /// Config file with `key = value` lines and `#` comments.
    #[arg(long)]
    config: Option<PathBuf>,
    /// table1, voronoi_h, pconv, pollution, singular, patch or infsup.
    #[arg(long)]
    experiment: Option<String>,
    /// Wave number.
    #[arg(long)]
    k: Option<String>,
    /// Plane waves per vertex, odd; a comma separated list is allowed.
    #[arg(long)]
    p: Option<String>,
    /// Meshes, e.g. `structured:2,4,8`, `voronoi:16,64`, `file:a.mesh`;
    /// families separated by `;`.
    #[arg(long)]
    mesh: Option<String>,
    /// Comma separated variants: PWVEM, PUM, GRAD.
    #[arg(long)]
    variant: Option<String>,
    /// Output directory (default ./out).
    #[arg(long)]
    out: Option<String>,
    /// Rotation of the plane wave directions in radians.
    #[arg(long)]
    offset: Option<String>,
    /// Seed for Voronoi generators and random data.
    #[arg(long)]
    seed: Option<String>,
    /// Exact solution: hankel, singular, planewave or planewaves.
    #[arg(long)]
    exact: Option<String>,
    /// Bessel orders for the singular solution, e.g. `2/3,1,3/2`.
    #[arg(long)]
    xi: Option<String>,
    /// Interior evaluation: auto, projection or exact-basis.
    #[arg(long)]
    evaluation: Option<String>,
    /// Lloyd sweeps for Voronoi meshes.
    #[arg(long)]
    lloyd: Option<String>,
    /// Fixed h k product for the pollution study.
    #[arg(long)]
    hk: Option<String>,
    /// Largest accepted condition number of a local Gram matrix.
    #[arg(long = "max-condition")]
    max_condition: Option<String>,
    /// Number of random cells for the inf-sup study.
    #[arg(long)]
    cells: Option<String>,
}

impl Cli {
    fn flags(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("experiment", &self.experiment),
            ("k", &self.k),
            ("p", &self.p),
            ("mesh", &self.mesh),
            ("variant", &self.variant),
            ("out", &self.out),
            ("offset", &self.offset),
            ("seed", &self.seed),
            ("exact", &self.exact),
            ("xi", &self.xi),
            ("evaluation", &self.evaluation),
            ("lloyd", &self.lloyd),
            ("hk", &self.hk),
            ("max_condition", &self.max_condition),
            ("cells", &self.cells),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))).collect()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(e)) => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<(), RunError> {
    let file = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let cfg = Config::resolve(&file, &cli.flags())?;
    let rows = experiments::run(&cfg)?;
    if !rows.is_empty() {
        experiments::print_summary(&rows, &cfg.out);
    }
    Ok(())
}
