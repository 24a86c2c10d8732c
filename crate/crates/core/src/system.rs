//! Global degrees of freedom, assembly and the sparse direct solve.

use std::collections::HashMap;
use std::io::Write;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::DVector;
use num_complex::Complex;
use rayon::prelude::*;

use crate::element::{build_local, elemental_matrix, CMatrix, ElementOptions, Variant};
use crate::error::{Error, Result};
use crate::mesh::{element_geometry, PolygonalMesh};
use crate::pwcore::WaveContext;
use crate::quadrature::{segment_points, segment_rule};
use crate::scalar::{cexp, i_times, Real, Vec2};

pub type CVector<T> = DVector<Complex<T>>;

/// Largest accepted relative residual before a solve is reported as failed.
pub const MAX_RESIDUAL: f64 = 1e-6;

/// Global numbering `vertex * p + l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofMap {
    pub n_vertices: usize,
    pub p: usize,
}

impl DofMap {
    pub fn new(n_vertices: usize, p: usize) -> Self {
        Self { n_vertices, p }
    }

    pub fn len(&self) -> usize {
        self.n_vertices * self.p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn global(&self, vertex: usize, dir: usize) -> usize {
        vertex * self.p + dir
    }

    /// `(vertex, direction)` of a global index.
    pub fn split(&self, dof: usize) -> (usize, usize) {
        (dof / self.p, dof % self.p)
    }

    /// Global index of the element-local index `r = j p + l`.
    pub fn local_to_global(&self, cell_vertices: &[usize], r: usize) -> usize {
        self.global(cell_vertices[r / self.p], r % self.p)
    }
}

/// Compressed sparse row complex matrix.
#[derive(Clone, Debug)]
pub struct SparseMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex<T>>,
}

impl<T: Real> SparseMatrix<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match cols.binary_search(&j) {
            Ok(pos) => self.values[self.row_ptr[i] + pos],
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    }

    /// `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn mul_vec(&self, x: &CVector<T>) -> CVector<T> {
        CVector::from_fn(self.n, |i, _| {
            let mut s = Complex::new(T::zero(), T::zero());
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            s
        })
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        let mut a = CMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            a[(i, j)] = v;
        }
        a
    }

    /// Coordinate text dump: one `row col re im` line per stored entry.
    pub fn write_coo(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# {} {} {}", self.n, self.n, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{i} {j} {:.17e} {:.17e}", v.re.as_f64(), v.im.as_f64())?;
        }
        Ok(())
    }
}

/// Assembled operator together with the per-element data needed to
/// evaluate the discrete solution.
#[derive(Clone, Debug)]
pub struct GlobalSystem<T: Real> {
    pub dofs: DofMap,
    pub variant: Variant,
    pub matrix: SparseMatrix<T>,
    pub rhs: CVector<T>,
    /// `G^{-1} B` of every element.
    pub projectors: Vec<CMatrix<T>>,
    /// Largest condition number of `G` over the elements.
    pub max_g_condition: f64,
}

/// Scatters element matrices produced by `element` into a global sparse
/// matrix. Element matrices may be computed in parallel; they are added in
/// ascending element order so the result is bit-reproducible.
pub fn assemble_with<T: Real>(
    mesh: &PolygonalMesh<T>,
    p: usize,
    element: impl Fn(usize) -> Result<CMatrix<T>> + Sync,
) -> Result<SparseMatrix<T>> {
    let locals: Vec<CMatrix<T>> = (0..mesh.n_cells()).into_par_iter().map(&element).collect::<Result<_>>()?;
    scatter(mesh, p, &locals)
}

fn scatter<T: Real>(mesh: &PolygonalMesh<T>, p: usize, locals: &[CMatrix<T>]) -> Result<SparseMatrix<T>> {
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut blocks: Vec<CMatrix<T>> = Vec::new();
    for (c, e) in locals.iter().enumerate() {
        let cell = mesh.cell(c);
        if e.nrows() != cell.len() * p || e.ncols() != cell.len() * p {
            return Err(Error::InvalidArgument(format!(
                "element {c}: matrix is {}x{}, expected {}",
                e.nrows(),
                e.ncols(),
                cell.len() * p
            )));
        }
        for (a, &va) in cell.iter().enumerate() {
            for (b, &vb) in cell.iter().enumerate() {
                let id = *index.entry((va, vb)).or_insert_with(|| {
                    blocks.push(CMatrix::zeros(p, p));
                    blocks.len() - 1
                });
                blocks[id] += e.view((a * p, b * p), (p, p));
            }
        }
    }

    let nv = mesh.n_vertices();
    let mut neighbours: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for (&(va, vb), &id) in &index {
        neighbours[va].push((vb, id));
    }
    let n = nv * p;
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for list in &mut neighbours {
        list.sort_unstable();
        for l in 0..p {
            for &(vb, id) in list.iter() {
                for m in 0..p {
                    col_idx.push(vb * p + m);
                    values.push(blocks[id][(l, m)]);
                }
            }
            row_ptr.push(col_idx.len());
        }
    }
    Ok(SparseMatrix { n, row_ptr, col_idx, values })
}

/// Assembles the matrix of the chosen discrete form.
pub fn assemble<T: Real>(
    mesh: &PolygonalMesh<T>,
    ctx: &WaveContext<T>,
    variant: Variant,
    opts: &ElementOptions,
) -> Result<(SparseMatrix<T>, Vec<CMatrix<T>>, f64)> {
    if variant.needs_triangles() {
        if let Some(c) = (0..mesh.n_cells()).find(|&c| mesh.cell(c).len() != 3) {
            return Err(Error::Unsupported(format!(
                "{variant} needs an all-triangle mesh; cell {c} has {} vertices",
                mesh.cell(c).len()
            )));
        }
    }
    let p = ctx.p();
    let built: Vec<(CMatrix<T>, CMatrix<T>, f64)> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let geom = element_geometry(mesh, c)?;
            let ops = build_local(c, &geom, ctx, &mesh.boundary_local_edges(c), opts)?;
            let e = elemental_matrix(&ops, variant, &geom, ctx, opts)?;
            Ok((e, ops.g_inv_b, ops.g_condition))
        })
        .collect::<Result<_>>()?;
    let mut locals = Vec::with_capacity(built.len());
    let mut projectors = Vec::with_capacity(built.len());
    let mut worst = 0.0f64;
    for (e, gb, cond) in built {
        locals.push(e);
        projectors.push(gb);
        worst = worst.max(cond);
    }
    Ok((scatter(mesh, p, &locals)?, projectors, worst))
}

/// `F(r) = int_{dOmega} g conj(psi_r) ds` with `g(x, nu)` the impedance
/// datum. `refine` multiplies the number of Gauss points per edge.
pub fn assemble_rhs<T: Real>(
    mesh: &PolygonalMesh<T>,
    ctx: &WaveContext<T>,
    g: impl Fn(&Vec2<T>, &Vec2<T>) -> Result<Complex<T>>,
    refine: usize,
) -> Result<CVector<T>> {
    let dofs = DofMap::new(mesh.n_vertices(), ctx.p());
    let mut rhs = CVector::zeros(dofs.len());
    for &e in mesh.boundary_edges() {
        let [va, vb] = mesh.edges()[e].vertices;
        let (a, b) = (mesh.vertices()[va], mesh.vertices()[vb]);
        let t = b - a;
        let len = t.norm();
        let nu = Vec2::new(t.y / len, -t.x / len);
        let rule = segment_rule(&a, &b, segment_points(ctx.k, len) * refine.max(1));
        for (x, &w) in rule.points.iter().zip(&rule.weights) {
            let gx = g(x, &nu)? * w;
            let s = (x - a).norm() / len;
            for (v, hat) in [(va, T::one() - s), (vb, s)] {
                let xv = mesh.vertices()[v];
                for l in 0..ctx.p() {
                    let pw = cexp(i_times(ctx.k * ctx.directions.dir(l).dot(&(x - xv))));
                    rhs[dofs.global(v, l)] += gx * pw.conj() * hat;
                }
            }
        }
    }
    Ok(rhs)
}

/// Builds matrix and right-hand side.
pub fn build_system<T: Real>(
    mesh: &PolygonalMesh<T>,
    ctx: &WaveContext<T>,
    variant: Variant,
    opts: &ElementOptions,
    g: impl Fn(&Vec2<T>, &Vec2<T>) -> Result<Complex<T>>,
) -> Result<GlobalSystem<T>> {
    let (matrix, projectors, max_g_condition) = assemble(mesh, ctx, variant, opts)?;
    let rhs = assemble_rhs(mesh, ctx, g, 1)?;
    Ok(GlobalSystem { dofs: DofMap::new(mesh.n_vertices(), ctx.p()), variant, matrix, rhs, projectors, max_g_condition })
}

/// Solution of a global system.
#[derive(Clone, Debug)]
pub struct DiscreteSolution<T: Real> {
    pub coefficients: CVector<T>,
    /// Plane wave coefficients of `Pi u_hp` on every element.
    pub projections: Vec<CVector<T>>,
    /// `||A x - b|| / ||b||`.
    pub residual: f64,
}

/// Sparse LU solve of `A x = b`; returns `x` and the relative residual.
pub fn solve_linear<T: Real>(a: &SparseMatrix<T>, b: &CVector<T>) -> std::result::Result<(CVector<T>, f64), String> {
    let n = a.n();
    let trips: Vec<Triplet<usize, usize, c64>> = a
        .triplets()
        .map(|(i, j, v)| Triplet::new(i, j, c64::new(v.re.as_f64(), v.im.as_f64())))
        .collect();
    let mat = SparseColMat::<usize, c64>::try_new_from_triplets(n, n, &trips).map_err(|e| format!("{e:?}"))?;
    let lu = mat.sp_lu().map_err(|e| format!("sparse LU failed: {e:?}"))?;
    let mut x = Mat::<c64>::from_fn(n, 1, |i, _| c64::new(b[i].re.as_f64(), b[i].im.as_f64()));
    lu.solve_in_place(x.as_mut());
    let x = CVector::from_fn(n, |i, _| {
        let v = x[(i, 0)];
        Complex::new(T::lit(v.re), T::lit(v.im))
    });
    let r = a.mul_vec(&x) - b;
    let bn = b.norm().as_f64();
    let residual = if bn > 0.0 { r.norm().as_f64() / bn } else { r.norm().as_f64() };
    if !residual.is_finite() {
        return Err("non-finite solution".into());
    }
    Ok((x, residual))
}

/// Solves the system and caches the element projections.
pub fn solve<T: Real>(mesh: &PolygonalMesh<T>, ctx: &WaveContext<T>, system: &GlobalSystem<T>) -> Result<DiscreteSolution<T>> {
    let conditioning = |message: String| Error::Conditioning {
        h: mesh.mesh_size().as_f64(),
        k: ctx.k.as_f64(),
        p: ctx.p(),
        message,
    };
    let (x, residual) = solve_linear(&system.matrix, &system.rhs).map_err(conditioning)?;
    if residual > MAX_RESIDUAL {
        return Err(conditioning(format!("relative residual {residual:.3e} above {MAX_RESIDUAL:e}")));
    }
    let p = ctx.p();
    let projections = (0..mesh.n_cells())
        .map(|c| {
            let cell = mesh.cell(c);
            let local = CVector::from_fn(cell.len() * p, |r, _| x[system.dofs.local_to_global(cell, r)]);
            &system.projectors[c] * local
        })
        .collect();
    Ok(DiscreteSolution { coefficients: x, projections, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::ElementOptions;
    use crate::mesh::{make_structured_triangular, make_voronoi};
    use crate::scalar::frobenius;

    fn plane_wave_datum(k: f64, d: Vec2<f64>) -> impl Fn(&Vec2<f64>, &Vec2<f64>) -> Result<Complex<f64>> {
        move |x, nu| Ok(cexp(i_times(k * d.dot(x))) * i_times(k * (d.dot(nu) + 1.0)))
    }

    #[test]
    fn dof_counting() {
        let mesh = make_structured_triangular::<f64>(1).unwrap();
        let ctx = WaveContext::new(5.0, 3, 0.0).unwrap();
        let (a, _, _) = assemble(&mesh, &ctx, Variant::PwVem, &ElementOptions::default()).unwrap();
        assert_eq!(a.n(), 12);
        let dofs = DofMap::new(4, 3);
        for g in 0..12 {
            let (v, l) = dofs.split(g);
            assert_eq!(dofs.global(v, l), g);
        }
    }

    #[test]
    fn single_element_assembly_is_the_element_matrix() {
        let v = vec![Vec2::new(0.0, 0.0), Vec2::new(0.3, 0.0), Vec2::new(0.1, 0.25)];
        let mesh = PolygonalMesh::new(v, vec![vec![0, 1, 2]]).unwrap();
        let ctx = WaveContext::new(10.0, 5, 0.0).unwrap();
        let opts = ElementOptions::default();
        let (a, _, _) = assemble(&mesh, &ctx, Variant::PwVem, &opts).unwrap();
        let geom = element_geometry(&mesh, 0).unwrap();
        let ops = build_local(0, &geom, &ctx, &[0, 1, 2], &opts).unwrap();
        assert_eq!(frobenius(&(a.to_dense() - ops.elemental())), 0.0);
    }

    #[test]
    fn hermitian_plus_boundary_decomposition() {
        let mesh = make_voronoi::<f64>(12, 4, 5).unwrap();
        let ctx = WaveContext::new(10.0, 7, 0.0).unwrap();
        let opts = ElementOptions::default();
        let local = |c: usize| {
            let geom = element_geometry(&mesh, c)?;
            build_local(c, &geom, &ctx, &mesh.boundary_local_edges(c), &opts)
        };
        let herm = assemble_with(&mesh, 7, |c| local(c).map(|o| &o.a_pi + &o.s)).unwrap().to_dense();
        let bnd = assemble_with(&mesh, 7, |c| local(c).map(|o| o.r)).unwrap().to_dense();
        let full = assemble(&mesh, &ctx, Variant::PwVem, &opts).unwrap().0.to_dense();
        let scale = frobenius(&full);
        assert!(frobenius(&(&herm - herm.adjoint())) <= 1e-11 * scale);
        let b_ik = &bnd * Complex::new(0.0, -0.1);
        assert!(frobenius(&(&b_ik - b_ik.adjoint())) <= 1e-11 * scale);
        assert!(frobenius(&(full - herm - bnd)) <= 1e-11 * scale);
    }

    #[test]
    fn zero_datum_gives_zero_rhs() {
        let mesh = make_structured_triangular::<f64>(2).unwrap();
        let ctx = WaveContext::new(20.0, 5, 0.0).unwrap();
        let rhs = assemble_rhs(&mesh, &ctx, |_, _| Ok(Complex::new(0.0, 0.0)), 1).unwrap();
        assert!(rhs.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn rhs_is_quadrature_converged() {
        let mesh = make_structured_triangular::<f64>(4).unwrap();
        let ctx = WaveContext::new(20.0, 13, 0.0).unwrap();
        let g = plane_wave_datum(20.0, Vec2::new(0.6, -0.8));
        let a = assemble_rhs(&mesh, &ctx, &g, 1).unwrap();
        let b = assemble_rhs(&mesh, &ctx, &g, 2).unwrap();
        assert!((a - &b).norm() / b.norm() < 1e-12);
    }

    #[test]
    fn plane_wave_is_reproduced() {
        let mesh = make_structured_triangular::<f64>(4).unwrap();
        let ctx = WaveContext::new(20.0, 13, 0.0).unwrap();
        let d = ctx.directions.dir(0);
        let sys = build_system(&mesh, &ctx, Variant::PwVem, &ElementOptions::default(), plane_wave_datum(20.0, d)).unwrap();
        let sol = solve(&mesh, &ctx, &sys).unwrap();
        assert!(sol.residual < 1e-10);
        // coefficient of direction 0 at vertex v is e^{ik d.x_v}, all others vanish
        for (v, x) in mesh.vertices().iter().enumerate() {
            for l in 0..13 {
                let expect = if l == 0 { cexp(i_times(20.0 * d.dot(x))) } else { Complex::new(0.0, 0.0) };
                assert!((sol.coefficients[sys.dofs.global(v, l)] - expect).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn coo_dump_lists_every_entry() {
        let mesh = make_structured_triangular::<f64>(1).unwrap();
        let ctx = WaveContext::new(5.0, 3, 0.0).unwrap();
        let (a, _, _) = assemble(&mesh, &ctx, Variant::PwVem, &ElementOptions::default()).unwrap();
        let mut buf = Vec::new();
        a.write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), a.nnz() + 1);
        assert_eq!(a.nnz(), 12 * 12 - 2 * 9);
    }

    #[test]
    fn mixed_mesh_rejects_pum() {
        let mesh = make_voronoi::<f64>(8, 2, 3).unwrap();
        let ctx = WaveContext::new(5.0, 3, 0.0).unwrap();
        assert!(matches!(
            assemble(&mesh, &ctx, Variant::Pum, &ElementOptions::default()),
            Err(Error::Unsupported(_))
        ));
    }
}
