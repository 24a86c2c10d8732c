//! Element matrices of the plane wave virtual element method.
//!
//! The local space is spanned by `psi_r = phi_j pw_{jl}` with `r = j p + l`.
//! Matrices follow the convention `E(r, s) = b(psi_s, psi_r)`: the row is the
//! test function, the column the trial function. All phases are taken
//! relative to the element centroid `x_K`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::mesh::ElementGeometry;
use crate::pwcore::{edge_hat_integral, polygon_exp_integral, EdgeWeight, WaveContext};
use crate::quadrature::triangle_rule;
use crate::scalar::{cexp, i_times, Real, Vec2};

pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Local discrete form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Projection plus scaled mass stabilization; any polygon.
    PwVem,
    /// Exact volume form on triangles.
    Pum,
    /// Projection plus exact gradient stabilization on triangles.
    Grad,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Pum, Variant::Grad, Variant::PwVem];

    pub fn needs_triangles(self) -> bool {
        !matches!(self, Variant::PwVem)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::PwVem => "PWVEM",
            Variant::Pum => "PUM",
            Variant::Grad => "GRAD",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "PWVEM" | "VEM" => Ok(Variant::PwVem),
            "PUM" => Ok(Variant::Pum),
            "GRAD" => Ok(Variant::Grad),
            other => Err(Error::InvalidArgument(format!("unknown variant '{other}' (PWVEM, PUM, GRAD)"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ElementOptions {
    /// Largest accepted 2-norm condition number of `G`.
    pub max_condition: f64,
    /// Triangle rule degree for the PUM/GRAD volume forms; `None` selects
    /// `2 ceil(k h_K) + 12`.
    pub volume_degree: Option<usize>,
}

impl Default for ElementOptions {
    fn default() -> Self {
        Self { max_condition: 1e14, volume_degree: None }
    }
}

/// All local matrices of one element.
#[derive(Clone, Debug)]
pub struct LocalOperators<T: Real> {
    pub cell: usize,
    pub n_vertices: usize,
    pub p: usize,
    /// `h_K k`.
    pub hk: f64,
    pub d: CMatrix<T>,
    pub b: CMatrix<T>,
    pub g: CMatrix<T>,
    /// `G^{-1} B`: maps local coefficients to projection coefficients.
    pub g_inv_b: CMatrix<T>,
    pub proj: CMatrix<T>,
    pub a_pi: CMatrix<T>,
    pub m: CMatrix<T>,
    pub s: CMatrix<T>,
    pub r: CMatrix<T>,
    pub g_condition: f64,
}

impl<T: Real> LocalOperators<T> {
    pub fn dim(&self) -> usize {
        self.n_vertices * self.p
    }

    /// `E = A_Pi + S + R`.
    pub fn elemental(&self) -> CMatrix<T> {
        &self.a_pi + &self.s + &self.r
    }

    /// `I - P`.
    pub fn complement(&self) -> CMatrix<T> {
        CMatrix::identity(self.dim(), self.dim()) - &self.proj
    }
}

/// Centroid-relative vertex coordinates `y_j = x_j - x_K`.
fn centered<T: Real>(geom: &ElementGeometry<T>) -> Vec<Vec2<T>> {
    geom.centered_vertices()
}

/// `c_{jl} = e^{i k d_l.(x_K - x_j)} = e^{-i k d_l.y_j}`.
fn phases<T: Real>(ctx: &WaveContext<T>, y: &[Vec2<T>]) -> Vec<Vec<Complex<T>>> {
    y.iter()
        .map(|yj| (0..ctx.p()).map(|l| cexp(i_times(-ctx.k * ctx.directions.dir(l).dot(yj)))).collect())
        .collect()
}

fn hermitize<T: Real>(a: CMatrix<T>) -> CMatrix<T> {
    (a.adjoint() + &a) * Complex::new(T::lit(0.5), T::zero())
}

/// `W(l, m) = int_K pw_m conj(pw_l)`, Hermitian.
pub fn plane_wave_mass<T: Real>(geom: &ElementGeometry<T>, ctx: &WaveContext<T>) -> CMatrix<T> {
    let y = centered(geom);
    let p = ctx.p();
    let mut w = CMatrix::zeros(p, p);
    for l in 0..p {
        w[(l, l)] = Complex::new(geom.area, T::zero());
        for m in l + 1..p {
            let v = polygon_exp_integral(&y, geom.diameter, &ctx.wave_vector(m, l));
            w[(l, m)] = v;
            w[(m, l)] = v.conj();
        }
    }
    w
}

/// Scales `W` entrywise by `k^2 (d_m.d_l + sign)`.
fn weighted<T: Real>(w: &CMatrix<T>, ctx: &WaveContext<T>, sign: T) -> CMatrix<T> {
    let d = ctx.directions.dirs();
    let k2 = ctx.k * ctx.k;
    CMatrix::from_fn(w.nrows(), w.ncols(), |l, m| w[(l, m)] * (k2 * (d[m].dot(&d[l]) + sign)))
}

/// `D((j, l), l) = e^{-i k d_l.(x_K - x_j)}`.
pub fn build_d<T: Real>(geom: &ElementGeometry<T>, ctx: &WaveContext<T>) -> CMatrix<T> {
    let c = phases(ctx, &centered(geom));
    let p = ctx.p();
    let mut d = CMatrix::zeros(geom.n_vertices() * p, p);
    for (j, cj) in c.iter().enumerate() {
        for l in 0..p {
            d[(j * p + l, l)] = cj[l].conj();
        }
    }
    d
}

/// `B(l, r) = a^K(psi_r, pw_l) = -ik int_{dK} (d_l.nu) psi_r conj(pw_l)`.
pub fn build_b<T: Real>(geom: &ElementGeometry<T>, ctx: &WaveContext<T>) -> CMatrix<T> {
    let y = centered(geom);
    let c = phases(ctx, &y);
    let n = geom.n_vertices();
    let p = ctx.p();
    let dirs = ctx.directions.dirs();
    let mut b = CMatrix::zeros(p, n * p);
    let minus_ik = i_times(-ctx.k);
    for j in 0..n {
        // the two edges meeting V_j, with the far endpoint
        for (edge, other) in [(j, (j + 1) % n), ((j + n - 1) % n, (j + n - 1) % n)] {
            let nu = geom.normals[edge];
            for l in 0..p {
                let flux = dirs[l].dot(&nu);
                for m in 0..p {
                    let v = edge_hat_integral(EdgeWeight::Hat, &y[j], &y[other], &ctx.wave_vector(m, l));
                    b[(l, j * p + m)] += minus_ik * c[j][m] * v * flux;
                }
            }
        }
    }
    b
}

/// `G(l, m) = a^K(pw_m, pw_l) = k^2 (d_m.d_l - 1) int_K pw_m conj(pw_l)`.
pub fn build_g<T: Real>(geom: &ElementGeometry<T>, ctx: &WaveContext<T>) -> CMatrix<T> {
    weighted(&plane_wave_mass(geom, ctx), ctx, -T::one())
}

fn build_m_from<T: Real>(geom: &ElementGeometry<T>, ctx: &WaveContext<T>, w: &CMatrix<T>) -> CMatrix<T> {
    let c = phases(ctx, &centered(geom));
    let p = ctx.p();
    let n = geom.n_vertices();
    let inv_h2 = T::one() / (geom.diameter * geom.diameter);
    let mut m = CMatrix::zeros(n * p, n * p);
    for (j, cj) in c.iter().enumerate() {
        for l in 0..p {
            for mm in 0..p {
                m[(j * p + l, j * p + mm)] = cj[mm] * cj[l].conj() * w[(l, mm)] * inv_h2;
            }
        }
    }
    m
}

/// Scaled plane wave mass matrix, block diagonal over vertices:
/// `M((j, l), (j, m)) = h_K^{-2} int_K pw_{jm} conj(pw_{jl})`.
pub fn build_m<T: Real>(geom: &ElementGeometry<T>, ctx: &WaveContext<T>) -> CMatrix<T> {
    build_m_from(geom, ctx, &plane_wave_mass(geom, ctx))
}

/// Impedance boundary matrix `R(r, s) = ik int_{dK cap dOmega} psi_s conj(psi_r)`
/// over the listed local edges.
pub fn build_r<T: Real>(geom: &ElementGeometry<T>, ctx: &WaveContext<T>, boundary_edges: &[usize]) -> CMatrix<T> {
    let y = centered(geom);
    let c = phases(ctx, &y);
    let n = geom.n_vertices();
    let p = ctx.p();
    let ik = i_times(ctx.k);
    let mut r = CMatrix::zeros(n * p, n * p);
    for &e in boundary_edges {
        let (u0, u1) = (e, (e + 1) % n);
        for &(j, kap) in &[(u0, u0), (u1, u1), (u0, u1), (u1, u0)] {
            for l in 0..p {
                for m in 0..p {
                    let q = ctx.wave_vector(m, l);
                    let v = if j != kap {
                        edge_hat_integral(EdgeWeight::HatProduct, &y[u0], &y[u1], &q)
                    } else if j == u0 {
                        edge_hat_integral(EdgeWeight::HatSquared, &y[u0], &y[u1], &q)
                    } else {
                        edge_hat_integral(EdgeWeight::HatSquared, &y[u1], &y[u0], &q)
                    };
                    r[(j * p + l, kap * p + m)] += ik * c[kap][m] * c[j][l].conj() * v;
                }
            }
        }
    }
    r
}

/// Eigenvalues of a Hermitian matrix, ascending.
fn hermitian_eigen<T: Real>(a: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// 2-norm condition number of a Hermitian matrix.
pub fn hermitian_condition<T: Real>(a: &CMatrix<T>) -> f64 {
    let (values, _) = hermitian_eigen(a);
    let abs: Vec<f64> = values.iter().map(|v| v.as_f64().abs()).collect();
    let max = abs.iter().cloned().fold(0.0, f64::max);
    let min = abs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Builds every PW-VEM matrix of one element.
pub fn build_local<T: Real>(
    cell: usize,
    geom: &ElementGeometry<T>,
    ctx: &WaveContext<T>,
    boundary_edges: &[usize],
    opts: &ElementOptions,
) -> Result<LocalOperators<T>> {
    let hk = (geom.diameter * ctx.k).as_f64();
    let w = plane_wave_mass(geom, ctx);
    let g = weighted(&w, ctx, -T::one());
    let g_condition = hermitian_condition(&g);
    if !(g_condition <= opts.max_condition) {
        return Err(Error::SingularElement { cell, hk, condition: g_condition });
    }
    let d = build_d(geom, ctx);
    let b = build_b(geom, ctx);
    let g_inv_b = g
        .clone()
        .lu()
        .solve(&b)
        .ok_or(Error::SingularElement { cell, hk, condition: f64::INFINITY })?;
    let proj = &d * &g_inv_b;
    let a_pi = hermitize(b.adjoint() * &g_inv_b);
    let m = build_m_from(geom, ctx, &w);
    let n = geom.n_vertices() * ctx.p();
    let comp = CMatrix::identity(n, n) - &proj;
    let s = hermitize(comp.adjoint() * &m * &comp);
    let r = build_r(geom, ctx, boundary_edges);
    Ok(LocalOperators { cell, n_vertices: geom.n_vertices(), p: ctx.p(), hk, d, b, g, g_inv_b, proj, a_pi, m, s, r, g_condition })
}

/// Volume stiffness `A_full(r, s) = int_K grad psi_s . conj(grad psi_r)` and
/// mass `M_full(r, s) = int_K psi_s conj(psi_r)` on a triangle.
pub fn build_pum_grad_volume<T: Real>(
    geom: &ElementGeometry<T>,
    ctx: &WaveContext<T>,
    degree: usize,
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    if geom.n_vertices() != 3 {
        return Err(Error::Unsupported(format!(
            "PUM and GRAD forms need triangles, got a {}-gon",
            geom.n_vertices()
        )));
    }
    let y = centered(geom);
    let p = ctx.p();
    let n = 3 * p;
    let two_area = geom.area + geom.area;
    let grads: Vec<Vec2<T>> = (0..3)
        .map(|i| {
            let (a, b) = (y[(i + 1) % 3], y[(i + 2) % 3]);
            Vec2::new(a.y - b.y, b.x - a.x) / two_area
        })
        .collect();
    let rule = triangle_rule(&[y[0], y[1], y[2]], degree);
    let npts = rule.len();
    let mut vals = CMatrix::zeros(npts, n);
    let mut gx = CMatrix::zeros(npts, n);
    let mut gy = CMatrix::zeros(npts, n);
    let dirs = ctx.directions.dirs();
    for (q, (x, &wt)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let sw = wt.sqrt();
        for j in 0..3 {
            let lam = grads[j].dot(&(x - y[(j + 1) % 3]));
            for l in 0..p {
                let pw = cexp(i_times(ctx.k * dirs[l].dot(&(x - y[j])))) * sw;
                let ik_lam = i_times(ctx.k * lam);
                vals[(q, j * p + l)] = pw * lam;
                gx[(q, j * p + l)] = pw * (ik_lam * dirs[l].x + grads[j].x);
                gy[(q, j * p + l)] = pw * (ik_lam * dirs[l].y + grads[j].y);
            }
        }
    }
    let a_full = hermitize(gx.adjoint() * &gx + gy.adjoint() * &gy);
    let m_full = hermitize(vals.adjoint() * &vals);
    Ok((a_full, m_full))
}

/// Default triangle degree for the PUM/GRAD volume forms.
pub fn volume_degree<T: Real>(geom: &ElementGeometry<T>, ctx: &WaveContext<T>, opts: &ElementOptions) -> usize {
    opts.volume_degree
        .unwrap_or_else(|| 2 * (ctx.k * geom.diameter).as_f64().ceil() as usize + 12)
}

/// Elemental matrix of the requested variant.
pub fn elemental_matrix<T: Real>(
    ops: &LocalOperators<T>,
    variant: Variant,
    geom: &ElementGeometry<T>,
    ctx: &WaveContext<T>,
    opts: &ElementOptions,
) -> Result<CMatrix<T>> {
    match variant {
        Variant::PwVem => Ok(ops.elemental()),
        Variant::Pum => {
            let (a_full, m_full) = build_pum_grad_volume(geom, ctx, volume_degree(geom, ctx, opts))?;
            Ok(a_full - m_full * Complex::new(ctx.k * ctx.k, T::zero()) + &ops.r)
        }
        Variant::Grad => {
            let (a_full, _) = build_pum_grad_volume(geom, ctx, volume_degree(geom, ctx, opts))?;
            let comp = ops.complement();
            Ok(&ops.a_pi + hermitize(comp.adjoint() * a_full * &comp) + &ops.r)
        }
    }
}

/// Relative eigenvalue cut below which the `||.||_{1,k,K}` Gram matrix is
/// treated as rank deficient.
pub const INFSUP_RANK_TOL: f64 = 1e-13;

/// Result of the local inf-sup computation.
#[derive(Clone, Copy, Debug)]
pub struct InfSup {
    pub beta: f64,
    /// Reference curve `1 - 2 t^2 / pi^2` at `t = h_K k`.
    pub reference: f64,
    pub hk: f64,
    /// Number of plane wave modes resolved by the weighted Gram matrix.
    pub rank: usize,
}

/// `beta*(t) = 1 - 2 t^2 / pi^2`.
pub fn infsup_reference(t: f64) -> f64 {
    1.0 - 2.0 * t * t / (std::f64::consts::PI * std::f64::consts::PI)
}

/// Smallest singular value of `H^{-1/2} G H^{-1/2}` where `H` is the Gram
/// matrix of `||.||_{1,k,K}` on the plane waves. Modes of `H` below
/// [`INFSUP_RANK_TOL`] relative to the largest eigenvalue are discarded.
pub fn local_infsup(geom: &ElementGeometry<f64>, ctx: &WaveContext<f64>) -> Result<InfSup> {
    let w = plane_wave_mass(geom, ctx);
    let g = weighted(&w, ctx, -1.0);
    let h = weighted(&w, ctx, 1.0);
    let hk = geom.diameter * ctx.k;
    let (lam, v) = hermitian_eigen(&h);
    let top = *lam.last().unwrap();
    if !(top > 0.0) {
        return Err(Error::DegenerateBasis { cell: 0, hk });
    }
    let keep: Vec<usize> = (0..lam.len()).filter(|&i| lam[i] > INFSUP_RANK_TOL * top).collect();
    let scaled = CMatrix::from_fn(v.nrows(), keep.len(), |r, c| v[(r, keep[c])] / lam[keep[c]].sqrt());
    let x = scaled.adjoint() * g * &scaled;
    let (mu, _) = hermitian_eigen(&hermitize(x));
    let beta = mu.iter().map(|m| m.abs()).fold(f64::INFINITY, f64::min);
    Ok(InfSup { beta, reference: infsup_reference(hk), hk, rank: keep.len() })
}

pub fn local_infsup_beta(geom: &ElementGeometry<f64>, ctx: &WaveContext<f64>) -> Result<f64> {
    Ok(local_infsup(geom, ctx)?.beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{element_geometry, make_structured_triangular, make_voronoi};
    use crate::quadrature::polygon_rule;
    use crate::scalar::frobenius;

    fn v(x: f64, y: f64) -> Vec2<f64> {
        Vec2::new(x, y)
    }

    fn ctx(k: f64, p: usize) -> WaveContext<f64> {
        WaveContext::new(k, p, 0.0).unwrap()
    }

    fn rel(a: &CMatrix<f64>, b: &CMatrix<f64>) -> f64 {
        frobenius(&(a - b)) / frobenius(b)
    }

    fn min_eig(a: &CMatrix<f64>) -> f64 {
        hermitian_eigen(a).0[0]
    }

    fn pentagon() -> ElementGeometry<f64> {
        ElementGeometry::from_polygon(vec![v(0.0, 0.0), v(0.3, 0.02), v(0.38, 0.25), v(0.15, 0.4), v(-0.05, 0.2)]).unwrap()
    }

    #[test]
    fn d_structure() {
        let g = pentagon();
        let d = build_d(&g, &ctx(20.0, 5));
        assert_eq!(d.shape(), (25, 5));
        for c in 0..5 {
            let nz = (0..25).filter(|&r| d[(r, c)].norm() > 0.0).count();
            assert_eq!(nz, 5);
        }
        assert!(d.iter().filter(|z| z.norm() > 0.0).all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn local_identities_on_a_pentagon() {
        let geom = pentagon();
        let c = ctx(20.0, 13);
        let ops = build_local(0, &geom, &c, &[0, 1], &ElementOptions::default()).unwrap();
        assert!(rel(&(&ops.b * &ops.d), &ops.g) < 1e-13);
        assert!(rel(&ops.g.adjoint(), &ops.g) < 1e-15);
        assert!(ops.g.diagonal().iter().all(|z| z.norm() < 1e-12));
        assert!(frobenius(&(&ops.proj * &ops.proj - &ops.proj)) / frobenius(&ops.proj) < 1e-10);
        assert!(frobenius(&(ops.complement() * &ops.d)) / frobenius(&ops.d) < 1e-11);
        assert!(frobenius(&(&ops.s * &ops.d)) / frobenius(&ops.s) < 1e-11);
        assert!(min_eig(&ops.s) >= -1e-10 * frobenius(&ops.s));
        assert!(min_eig(&ops.m) >= -1e-10 * frobenius(&ops.m));
        let r_over_ik = &ops.r * Complex::new(0.0, -1.0 / 20.0);
        assert!(rel(&r_over_ik.adjoint(), &r_over_ik) < 1e-14);
        assert!(min_eig(&hermitize(r_over_ik.clone())) >= -1e-10 * frobenius(&r_over_ik));
        // A_Pi restricted to plane waves is G (conjugate transposed convention)
        let dad = ops.d.adjoint() * &ops.a_pi * &ops.d;
        assert!(rel(&dad, &ops.g) < 1e-10, "{:e}", rel(&dad, &ops.g));
    }

    #[test]
    fn interior_element_has_no_boundary_matrix() {
        let geom = pentagon();
        let r = build_r(&geom, &ctx(20.0, 5), &[]);
        assert!(r.iter().all(|z| *z == Complex::new(0.0, 0.0)));
    }

    #[test]
    fn boundary_matrix_diagonal_value() {
        // single edge, same vertex and direction: ik |F| / 3
        let geom = pentagon();
        let c = ctx(20.0, 5);
        let r = build_r(&geom, &c, &[0]);
        let len = geom.edge_lengths[0];
        assert!((r[(0, 0)] - Complex::new(0.0, 20.0 * len / 3.0)).norm() < 1e-14);
    }

    #[test]
    fn boundary_matrix_matches_quadrature() {
        let geom = pentagon();
        let c = ctx(20.0, 5);
        let r = build_r(&geom, &c, &[2]);
        let (a, b) = geom.edge(2);
        let len = (b - a).norm();
        let psi = |j: usize, l: usize, x: &Vec2<f64>| {
            let t = (x - a).norm() / len;
            let hat = match j {
                2 => 1.0 - t,
                3 => t,
                _ => 0.0,
            };
            c.plane_wave(l, &geom.vertices[j], x) * hat
        };
        for (rj, rl, sj, sl) in [(2, 1, 3, 4), (3, 0, 3, 2), (2, 3, 2, 3)] {
            let q = crate::quadrature::integrate_segment(&a, &b, 40, |x| psi(sj, sl, x) * psi(rj, rl, x).conj());
            let expect = q * Complex::new(0.0, 20.0);
            assert!((r[(rj * 5 + rl, sj * 5 + sl)] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn b_matches_volume_quadrature_on_triangle() {
        let geom = ElementGeometry::from_polygon(vec![v(0.0, 0.0), v(0.25, 0.0), v(0.25, 0.25)]).unwrap();
        let c = ctx(20.0, 5);
        let b = build_b(&geom, &c);
        let (a_full, m_full) = build_pum_grad_volume(&geom, &c, 40).unwrap();
        // B = D^H (A_full - k^2 M_full) restricted to plane wave tests
        let d = build_d(&geom, &c);
        let expect = d.adjoint() * (&a_full - &m_full * Complex::new(400.0, 0.0));
        assert!(rel(&b, &expect) < 1e-11, "{:e}", rel(&b, &expect));
    }

    #[test]
    fn pum_volume_reproduces_g() {
        for n in [2, 4] {
            let mesh = make_structured_triangular::<f64>(n).unwrap();
            let c = ctx(20.0, 13);
            let geom = element_geometry(&mesh, 1).unwrap();
            let degree = volume_degree(&geom, &c, &ElementOptions::default());
            let (a_full, m_full) = build_pum_grad_volume(&geom, &c, degree).unwrap();
            let d = build_d(&geom, &c);
            let g = build_g(&geom, &c);
            let form = &a_full - &m_full * Complex::new(400.0, 0.0);
            let got = d.adjoint() * form * &d;
            assert!(rel(&got, &g) < 1e-10, "n = {n}: {:e}", rel(&got, &g));
            assert!(min_eig(&a_full) >= -1e-10 * frobenius(&a_full));
        }
    }

    #[test]
    fn grad_stabilization_vanishes_on_plane_waves() {
        let mesh = make_structured_triangular::<f64>(4).unwrap();
        let c = ctx(20.0, 9);
        let geom = element_geometry(&mesh, 0).unwrap();
        let opts = ElementOptions::default();
        let ops = build_local(0, &geom, &c, &[0], &opts).unwrap();
        let e = elemental_matrix(&ops, Variant::Grad, &geom, &c, &opts).unwrap();
        let diff = (&e - &ops.a_pi - &ops.r) * &ops.d;
        assert!(frobenius(&diff) / frobenius(&e) < 1e-10);
    }

    #[test]
    fn pum_rejects_polygons() {
        let geom = pentagon();
        let err = build_pum_grad_volume(&geom, &ctx(10.0, 3), 4);
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }

    #[test]
    fn plane_wave_mass_matches_quadrature() {
        let geom = pentagon();
        let c = ctx(60.0, 13);
        let w = plane_wave_mass(&geom, &c);
        let rule = polygon_rule(&geom.centered_vertices(), 80).unwrap();
        for (l, m) in [(0, 1), (3, 9), (12, 6)] {
            let q = c.wave_vector(m, l);
            let oracle = rule.integrate(|x| cexp(i_times(q.dot(x))));
            assert!((w[(l, m)] - oracle).norm() / geom.area < 1e-12);
        }
    }

    #[test]
    fn identities_on_voronoi_cells() {
        let mesh = make_voronoi::<f64>(16, 1, 10).unwrap();
        let c = ctx(20.0, 13);
        for cell in 0..mesh.n_cells() {
            let geom = element_geometry(&mesh, cell).unwrap();
            let ops = build_local(cell, &geom, &c, &mesh.boundary_local_edges(cell), &ElementOptions::default()).unwrap();
            assert!(rel(&(&ops.b * &ops.d), &ops.g) < 1e-13);
            assert!(frobenius(&(&ops.proj * &ops.proj - &ops.proj)) / frobenius(&ops.proj) < 1e-10);
        }
    }

    #[test]
    fn singular_g_is_reported() {
        let geom = ElementGeometry::from_polygon(vec![v(0.0, 0.0), v(0.01, 0.0), v(0.0, 0.01)]).unwrap();
        let err = build_local(7, &geom, &ctx(1.0, 13), &[], &ElementOptions::default()).unwrap_err();
        match err {
            Error::SingularElement { cell, hk, .. } => {
                assert_eq!(cell, 7);
                assert!(hk < 0.02);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infsup_small_cells() {
        let geom = ElementGeometry::from_polygon(vec![v(0.0, 0.0), v(0.05, 0.0), v(0.05, 0.05), v(0.0, 0.05)]).unwrap();
        for k in [4.0, 8.0, 14.0] {
            let r = local_infsup(&geom, &ctx(k, 13)).unwrap();
            assert!(r.beta > 0.0);
            assert!(r.beta >= r.reference, "k {k}: {r:?}");
        }
        assert!((infsup_reference(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn f32_elements_build() {
        let geom = ElementGeometry::<f32>::from_polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(0.0, 0.5),
        ])
        .unwrap();
        let c = WaveContext::new(10.0f32, 3, 0.0).unwrap();
        let opts = ElementOptions { max_condition: 1e7, volume_degree: None };
        let ops = build_local(0, &geom, &c, &[0], &opts).unwrap();
        let gd = &ops.b * &ops.d;
        assert!(frobenius(&(gd - &ops.g)) / frobenius(&ops.g) < 1e-4);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("pwvem".parse::<Variant>().unwrap(), Variant::PwVem);
        assert_eq!("PW-VEM".parse::<Variant>().unwrap(), Variant::PwVem);
        assert_eq!("grad".parse::<Variant>().unwrap(), Variant::Grad);
        assert!("fem".parse::<Variant>().is_err());
        assert_eq!(Variant::Pum.to_string(), "PUM");
    }
}
