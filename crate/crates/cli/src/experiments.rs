//! Runs one experiment series and writes its outputs.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use pwvem::element::local_infsup;
use pwvem::mesh::{make_structured_triangular, make_voronoi, read_mesh};
use pwvem::postproc::{rate_table, write_csv, write_plot_data, ErrorReport, ExactSolution};
use pwvem::pwcore::WaveContext;
use pwvem::scalar::Vec2;
use pwvem::study::{solve_case, CaseOptions};
use pwvem::{ElementOptions, Exact, Geometry, Mesh, Variant};

use crate::config::{Config, ExactKind, Experiment, MeshSpec};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Usage(#[from] crate::config::UsageError),
    #[error("{0}")]
    Failed(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] pwvem::Error),
}

struct Job<'a> {
    mesh: &'a Mesh,
    spec: &'a MeshSpec,
    variant: Variant,
    k: f64,
    p: usize,
    xi: Option<f64>,
}

impl Job<'_> {
    fn experiment_label(&self, cfg: &Config) -> String {
        match (self.xi, cfg.exact) {
            (Some(xi), _) => format!("{}:xi={xi:.6}", cfg.experiment),
            (None, ExactKind::PlaneWaves) => format!("{}:seed={}", cfg.experiment, cfg.seed),
            _ => cfg.experiment.to_string(),
        }
    }

    /// Rows with equal keys form one series.
    fn series_key(&self, cfg: &Config) -> String {
        let xi = self.xi.map(|x| format!("_xi{x:.4}")).unwrap_or_default();
        match cfg.experiment {
            Experiment::Pconv | Experiment::Singular => format!("{}{xi}", self.variant),
            _ => format!("{}_p{}{xi}", self.variant, self.p),
        }
    }
}

fn build_mesh(spec: &MeshSpec) -> Result<Mesh, RunError> {
    let mesh = match spec {
        MeshSpec::Structured(n) => make_structured_triangular(*n),
        MeshSpec::Voronoi { cells, seed, lloyd } => make_voronoi(*cells, *seed, *lloyd),
        MeshSpec::File(path) => read_mesh(path),
    };
    mesh.map_err(|e| RunError::Failed(format!("mesh {spec}: {e}")))
}

fn exact_solution(cfg: &Config, ctx: &WaveContext<f64>, xi: Option<f64>) -> Exact {
    match cfg.exact {
        ExactKind::Hankel => ExactSolution::hankel(),
        ExactKind::Singular => ExactSolution::singular(xi.unwrap_or(1.0)),
        ExactKind::PlaneWave => ExactSolution::plane_wave(ctx.directions.dir(0)),
        ExactKind::PlaneWaves => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            ExactSolution::PlaneWaves {
                terms: (0..ctx.p())
                    .map(|l| (Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), ctx.directions.dir(l)))
                    .collect(),
            }
        }
    }
}

fn is_triangular(mesh: &Mesh) -> bool {
    mesh.cells().iter().all(|c| c.len() == 3)
}

/// Solves every configuration, writes the outputs and returns the rows.
pub fn run(cfg: &Config) -> Result<Vec<ErrorReport>, RunError> {
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("config.txt"), cfg.to_text())?;
    if cfg.experiment == Experiment::Infsup {
        run_infsup(cfg)?;
        return Ok(vec![]);
    }
    let meshes = cfg.meshes.iter().map(build_mesh).collect::<Result<Vec<_>, _>>()?;
    let xis: Vec<Option<f64>> = if cfg.exact == ExactKind::Singular { cfg.xi.iter().map(|&x| Some(x)).collect() } else { vec![None] };
    let mut jobs = vec![];
    for (mesh, spec) in meshes.iter().zip(&cfg.meshes) {
        for &variant in &cfg.variants {
            if variant.needs_triangles() && !is_triangular(mesh) {
                eprintln!("note: skipping {variant} on {spec}, which is not a triangle mesh");
                continue;
            }
            let k = match cfg.experiment {
                Experiment::Pollution => cfg.hk / mesh.mesh_size(),
                _ => cfg.k(),
            };
            for &p in &cfg.p {
                for &xi in &xis {
                    jobs.push(Job { mesh, spec, variant, k, p, xi });
                }
            }
        }
    }
    if jobs.is_empty() {
        return Err(RunError::Failed("nothing to run: no variant applies to the given meshes".into()));
    }
    let opts = CaseOptions {
        element: ElementOptions { max_condition: cfg.max_condition, ..Default::default() },
        evaluation: cfg.evaluation,
        ..Default::default()
    };
    let results: Vec<Result<ErrorReport, String>> = jobs
        .par_iter()
        .map(|job| {
            let context = |e: &dyn std::fmt::Display| {
                format!(
                    "{} {} on {} (h = {:.4e}, k = {}, p = {}): {e}",
                    cfg.experiment,
                    job.variant,
                    job.spec,
                    job.mesh.mesh_size(),
                    job.k,
                    job.p
                )
            };
            let ctx = WaveContext::new(job.k, job.p, cfg.offset).map_err(|e| context(&e))?;
            let exact = exact_solution(cfg, &ctx, job.xi);
            let mut r = solve_case(job.mesh, &ctx, job.variant, &exact, &opts).map_err(|e| context(&e))?.report;
            r.experiment = job.experiment_label(cfg);
            r.mesh_spec = job.spec.to_string();
            Ok(r)
        })
        .collect();

    let mut rows = vec![];
    let mut keys = vec![];
    let mut failures = vec![];
    for (job, res) in jobs.iter().zip(results) {
        match res {
            Ok(r) => {
                rows.push(r);
                keys.push(job.series_key(cfg));
            }
            Err(e) => failures.push(e),
        }
    }
    let series = group(&keys);
    if cfg.experiment.is_h_series() {
        for idx in series.values() {
            let mut s: Vec<ErrorReport> = idx.iter().map(|&i| rows[i].clone()).collect();
            match rate_table(&mut s) {
                Ok(()) => {
                    for (&i, r) in idx.iter().zip(s) {
                        rows[i].rate = r.rate;
                    }
                }
                Err(e) => eprintln!("note: no rates for a series: {e}"),
            }
        }
    }
    write_csv(&rows, BufWriter::new(File::create(cfg.out.join(format!("{}.csv", cfg.experiment)))?))?;
    write_plots(cfg, &rows, &series)?;
    if !failures.is_empty() {
        return Err(RunError::Failed(failures.join("\n")));
    }
    Ok(rows)
}

fn group(keys: &[String]) -> BTreeMap<String, Vec<usize>> {
    let mut map: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        map.entry(k.clone()).or_default().push(i);
    }
    map
}

/// One `x y` file per series: `1/h` against the error for mesh series, `p`
/// against the error for p series.
fn write_plots(cfg: &Config, rows: &[ErrorReport], series: &BTreeMap<String, Vec<usize>>) -> Result<(), RunError> {
    let dir = cfg.out.join("plots");
    fs::create_dir_all(&dir)?;
    for (key, idx) in series {
        let pts: Vec<(f64, f64)> = idx
            .iter()
            .map(|&i| {
                let r = &rows[i];
                let x = match cfg.experiment {
                    Experiment::Pconv | Experiment::Singular => r.p as f64,
                    _ => 1.0 / r.h,
                };
                (x, r.l2_rel_error)
            })
            .collect();
        write_plot_data(&pts, BufWriter::new(File::create(dir.join(format!("{}_{key}.dat", cfg.experiment)))?))?;
    }
    Ok(())
}

/// Random convex polygon inscribed in an ellipse, centred at the origin and
/// scaled to diameter `diameter`.
fn random_convex_cell(rng: &mut ChaCha8Rng, diameter: f64) -> Option<Geometry> {
    let n = rng.random_range(3..=9);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    angles.sort_by(f64::total_cmp);
    let (sx, sy) = (rng.random_range(0.5..1.0), rng.random_range(0.5..1.0));
    let pts: Vec<Vec2<f64>> = angles.iter().map(|t| Vec2::new(sx * t.cos(), sy * t.sin())).collect();
    let g = Geometry::from_polygon(pts).ok()?;
    let min_edge = g.edge_lengths.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_edge < 1e-3 * g.diameter || !g.is_convex() {
        return None;
    }
    let s = diameter / g.diameter;
    Geometry::from_polygon(g.vertices.iter().map(|v| (v - g.centroid) * s).collect()).ok()
}

fn run_infsup(cfg: &Config) -> Result<(), RunError> {
    let k = cfg.k();
    let ctx = WaveContext::new(k, cfg.p[0], cfg.offset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cells = vec![];
    while cells.len() < cfg.cells {
        let t = rng.random_range(cfg.hk_range.0..=cfg.hk_range.1);
        if let Some(g) = random_convex_cell(&mut rng, t / k) {
            cells.push(g);
        }
    }
    let path = cfg.out.join("infsup.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| RunError::Failed(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| RunError::Failed(e.to_string());
    w.write_record(["cell", "n_vertices", "hk", "beta", "reference", "rank"]).map_err(csv_err)?;
    let mut beta = vec![];
    let mut reference = vec![];
    let mut above = 0;
    for (i, g) in cells.iter().enumerate() {
        let r = local_infsup(g, &ctx)?;
        if r.beta >= r.reference {
            above += 1;
        }
        w.write_record([
            i.to_string(),
            g.n_vertices().to_string(),
            format!("{:.6}", r.hk),
            format!("{:.10e}", r.beta),
            format!("{:.10e}", r.reference),
            r.rank.to_string(),
        ])
        .map_err(csv_err)?;
        beta.push((r.hk, r.beta));
        reference.push((r.hk, r.reference));
    }
    w.flush()?;
    beta.sort_by(|a, b| a.0.total_cmp(&b.0));
    reference.sort_by(|a, b| a.0.total_cmp(&b.0));
    let dir = cfg.out.join("plots");
    fs::create_dir_all(&dir)?;
    write_plot_data(&beta, BufWriter::new(File::create(dir.join("infsup_beta.dat"))?))?;
    write_plot_data(&reference, BufWriter::new(File::create(dir.join("infsup_reference.dat"))?))?;
    println!("inf-sup: beta >= 1 - 2(hk)^2/pi^2 on {above}/{} cells; table in {}", cells.len(), path.display());
    Ok(())
}

pub fn print_summary(rows: &[ErrorReport], out: &Path) {
    println!("{:<24} {:<6} {:>8} {:>3} {:>11} {:>7} {:>12} {:>7}", "experiment", "variant", "k", "p", "h", "ndof", "L2 error", "rate");
    for r in rows {
        let rate = r.rate.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        println!(
            "{:<24} {:<6} {:>8.3} {:>3} {:>11.4e} {:>7} {:>12.4e} {:>7}",
            r.experiment, r.variant.to_string(), r.k, r.p, r.h, r.ndof, r.l2_rel_error, rate
        );
    }
    println!("results written to {}", out.display());
}
