//! Mesh to error pipeline for one configuration.

use crate::element::{ElementOptions, Variant};
use crate::error::Result;
use crate::mesh::PolygonalMesh;
use crate::postproc::{impedance_datum, l2_relative_error, ErrorReport, Evaluation, ExactSolution};
use crate::pwcore::WaveContext;
use crate::scalar::Real;
use crate::system::{build_system, solve, DiscreteSolution};

#[derive(Clone, Copy, Debug, Default)]
pub struct CaseOptions {
    pub element: ElementOptions,
    /// Added to the error quadrature degree.
    pub error_extra_degree: usize,
    /// Interior evaluation of the discrete solution; `None` picks
    /// [`Evaluation::for_variant`].
    pub evaluation: Option<Evaluation>,
}

#[derive(Clone, Debug)]
pub struct CaseResult<T: Real> {
    pub report: ErrorReport,
    pub solution: DiscreteSolution<T>,
    pub max_g_condition: f64,
}

/// Assembles, solves and measures the relative L2 error against `exact`.
/// The report's `experiment` and `mesh_spec` are left empty.
pub fn solve_case<T: Real>(
    mesh: &PolygonalMesh<T>,
    ctx: &WaveContext<T>,
    variant: Variant,
    exact: &ExactSolution<T>,
    opts: &CaseOptions,
) -> Result<CaseResult<T>> {
    let g = impedance_datum(exact, ctx.k)?;
    let system = build_system(mesh, ctx, variant, &opts.element, g)?;
    let solution = solve(mesh, ctx, &system)?;
    let err = l2_relative_error(mesh, ctx, &solution, exact, opts.evaluation.unwrap_or(Evaluation::for_variant(variant)), opts.error_extra_degree)?;
    Ok(CaseResult {
        report: ErrorReport {
            experiment: String::new(),
            variant,
            k: ctx.k.as_f64(),
            p: ctx.p(),
            h: mesh.mesh_size().as_f64(),
            ndof: system.dofs.len(),
            l2_rel_error: err,
            rate: None,
            residual: solution.residual,
            offset_angle: ctx.directions.offset().as_f64(),
            mesh_spec: String::new(),
        },
        solution,
        max_g_condition: system.max_g_condition,
    })
}
