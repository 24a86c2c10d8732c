//! Reference solutions, impedance data, error norms, rates and CSV output.

use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;

use crate::element::Variant;
use crate::error::{Error, Result};
use crate::mesh::{element_geometry, PolygonalMesh};
use crate::pwcore::WaveContext;
use crate::quadrature::{oscillatory_degree, polygon_rule};
use crate::scalar::{cexp, i_times, real, Real, Vec2};
use crate::specialfn::{bessel_j, bessel_j_prime, hankel1};
use crate::system::DiscreteSolution;

/// Analytic solutions of `-Delta u - k^2 u = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactSolution<T> {
    /// `H_0^(1)(k |x - x0|)`.
    Hankel { x0: Vec2<T> },
    /// `J_xi(k r) cos(xi theta)` in polar coordinates centred at `x0`.
    BesselSingular { xi: T, x0: Vec2<T> },
    /// `sum_j a_j e^{i k d_j.x}`.
    PlaneWaves { terms: Vec<(Complex<T>, Vec2<T>)> },
}

impl<T: Real> ExactSolution<T> {
    /// Hankel source at `(-0.25, 0)`.
    pub fn hankel() -> Self {
        Self::Hankel { x0: Vec2::new(T::lit(-0.25), T::zero()) }
    }

    /// Corner-type solution centred at `(0, 0.5)`.
    pub fn singular(xi: T) -> Self {
        Self::BesselSingular { xi, x0: Vec2::new(T::zero(), T::lit(0.5)) }
    }

    pub fn plane_wave(d: Vec2<T>) -> Self {
        Self::PlaneWaves { terms: vec![(real(T::one()), d)] }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Hankel { x0 } => format!("hankel(x0=({},{}))", x0.x, x0.y),
            Self::BesselSingular { xi, x0 } => format!("bessel(xi={xi},x0=({},{}))", x0.x, x0.y),
            Self::PlaneWaves { terms } => format!("planewaves({})", terms.len()),
        }
    }

    pub fn value(&self, k: T, x: &Vec2<T>) -> Result<Complex<T>> {
        match self {
            Self::Hankel { x0 } => hankel1(T::zero(), k * (x - x0).norm()),
            Self::BesselSingular { xi, x0 } => {
                let y = x - x0;
                let theta = y.y.atan2(y.x);
                Ok(real(bessel_j(*xi, k * y.norm())? * (*xi * theta).cos()))
            }
            Self::PlaneWaves { terms } => Ok(terms
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |s, (a, d)| s + *a * cexp(i_times(k * d.dot(x))))),
        }
    }

    pub fn gradient(&self, k: T, x: &Vec2<T>) -> Result<[Complex<T>; 2]> {
        match self {
            Self::Hankel { x0 } => {
                let y = x - x0;
                let r = y.norm();
                // d/dr H_0 = -k H_1
                let h1 = hankel1(T::one(), k * r)? * (-k / r);
                Ok([h1 * y.x, h1 * y.y])
            }
            Self::BesselSingular { xi, x0 } => {
                let y = x - x0;
                let r = y.norm();
                if r == T::zero() {
                    return if (*xi - T::one()).abs() < T::lit(1e-12) {
                        Ok([real(k * T::lit(0.5)), real(T::zero())])
                    } else if *xi > T::one() {
                        Ok([real(T::zero()), real(T::zero())])
                    } else {
                        Err(Error::Domain(format!("gradient of J_{xi} cos(xi theta) is singular at its centre")))
                    };
                }
                let theta = y.y.atan2(y.x);
                let (c, s) = ((*xi * theta).cos(), (*xi * theta).sin());
                let ur = k * bessel_j_prime(*xi, k * r)? * c;
                let ut = -*xi * bessel_j(*xi, k * r)? * s / r;
                let (ct, st) = (y.x / r, y.y / r);
                Ok([real(ur * ct - ut * st), real(ur * st + ut * ct)])
            }
            Self::PlaneWaves { terms } => {
                let mut g = [Complex::new(T::zero(), T::zero()); 2];
                for (a, d) in terms {
                    let v = *a * cexp(i_times(k * d.dot(x))) * i_times(k);
                    g[0] += v * d.x;
                    g[1] += v * d.y;
                }
                Ok(g)
            }
        }
    }
}

fn in_closed_unit_square<T: Real>(x: &Vec2<T>) -> bool {
    x.x >= T::zero() && x.x <= T::one() && x.y >= T::zero() && x.y <= T::one()
}

fn in_open_unit_square<T: Real>(x: &Vec2<T>) -> bool {
    x.x > T::zero() && x.x < T::one() && x.y > T::zero() && x.y < T::one()
}

/// Impedance datum `g(x, nu) = grad u . nu + i k u` on the boundary of the
/// unit square.
#[allow(clippy::type_complexity)]
pub fn impedance_datum<T: Real>(
    exact: &ExactSolution<T>,
    k: T,
) -> Result<impl Fn(&Vec2<T>, &Vec2<T>) -> Result<Complex<T>> + Sync + '_> {
    match exact {
        ExactSolution::Hankel { x0 } if in_closed_unit_square(x0) => {
            return Err(Error::InvalidConfiguration(format!(
                "Hankel source ({}, {}) lies in the closed domain",
                x0.x, x0.y
            )))
        }
        ExactSolution::BesselSingular { xi, x0 } if in_open_unit_square(x0) && xi.as_f64().fract() != 0.0 => {
            return Err(Error::InvalidConfiguration(format!(
                "non-integer order {xi} needs its centre on or outside the boundary"
            )))
        }
        _ => {}
    }
    Ok(move |x: &Vec2<T>, nu: &Vec2<T>| {
        let g = exact.gradient(k, x)?;
        Ok(g[0] * nu.x + g[1] * nu.y + exact.value(k, x)? * i_times(k))
    })
}

/// How the discrete solution is evaluated inside elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluation {
    /// `Pi u_hp`, the plane wave projection; any polygon.
    Projection,
    /// `sum_r a_r psi_r` with barycentric hats; triangles only.
    ExactBasis,
}

impl Evaluation {
    /// Projection for PW-VEM, exact basis for the triangle-only variants.
    pub fn for_variant(v: Variant) -> Self {
        match v {
            Variant::PwVem => Evaluation::Projection,
            Variant::Pum | Variant::Grad => Evaluation::ExactBasis,
        }
    }
}

impl std::fmt::Display for Evaluation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Evaluation::Projection => "projection",
            Evaluation::ExactBasis => "exact-basis",
        })
    }
}

impl std::str::FromStr for Evaluation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "projection" | "pi" => Ok(Evaluation::Projection),
            "exact-basis" | "exact" => Ok(Evaluation::ExactBasis),
            _ => Err(Error::InvalidArgument(format!("unknown evaluation '{s}', expected projection or exact-basis"))),
        }
    }
}

/// `||u - u_h||_0 / ||u||_0` by oscillatory quadrature on each element;
/// `extra_degree` raises the rule degree.
pub fn l2_relative_error<T: Real>(
    mesh: &PolygonalMesh<T>,
    ctx: &WaveContext<T>,
    solution: &DiscreteSolution<T>,
    exact: &ExactSolution<T>,
    eval: Evaluation,
    extra_degree: usize,
) -> Result<f64> {
    let p = ctx.p();
    let parts: Vec<(f64, f64)> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let geom = element_geometry(mesh, c)?;
            let cell = mesh.cell(c);
            if eval == Evaluation::ExactBasis && cell.len() != 3 {
                return Err(Error::Unsupported(format!(
                    "exact basis evaluation needs triangles; cell {c} has {} vertices",
                    cell.len()
                )));
            }
            let rule = polygon_rule(&geom.vertices, oscillatory_degree(ctx.k, geom.diameter) + extra_degree)?;
            let two_area = geom.area + geom.area;
            let mut err = 0.0;
            let mut norm = 0.0;
            for (x, &w) in rule.points.iter().zip(&rule.weights) {
                let uh = match eval {
                    Evaluation::Projection => {
                        let coef = &solution.projections[c];
                        (0..p).fold(Complex::new(T::zero(), T::zero()), |s, l| {
                            s + coef[l] * ctx.plane_wave(l, &geom.centroid, x)
                        })
                    }
                    Evaluation::ExactBasis => {
                        let mut s = Complex::new(T::zero(), T::zero());
                        for (j, &vj) in cell.iter().enumerate() {
                            let (a, b) = (geom.vertices[(j + 1) % 3], geom.vertices[(j + 2) % 3]);
                            let lam = crate::scalar::cross(&(b - a), &(x - a)) / two_area;
                            for l in 0..p {
                                let coef = solution.coefficients[vj * p + l];
                                s += coef * ctx.plane_wave(l, &geom.vertices[j], x) * lam;
                            }
                        }
                        s
                    }
                };
                let u = exact.value(ctx.k, x)?;
                err += (w * (u - uh).norm_sqr()).as_f64();
                norm += (w * u.norm_sqr()).as_f64();
            }
            Ok((err, norm))
        })
        .collect::<Result<_>>()?;
    let (err, norm) = parts.iter().fold((0.0, 0.0), |(a, b), (e, n)| (a + e, b + n));
    Ok((err / norm).sqrt())
}

/// One solve of a convergence series.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub experiment: String,
    pub variant: Variant,
    pub k: f64,
    pub p: usize,
    pub h: f64,
    pub ndof: usize,
    pub l2_rel_error: f64,
    pub rate: Option<f64>,
    pub residual: f64,
    pub offset_angle: f64,
    pub mesh_spec: String,
}

/// `log(e_{i-1} / e_i) / log(h_{i-1} / h_i)`, absent for the first entry.
pub fn rates(h: &[f64], e: &[f64]) -> Result<Vec<Option<f64>>> {
    if h.len() != e.len() {
        return Err(Error::InvalidArgument("h and error series differ in length".into()));
    }
    if let Some(i) = (1..h.len()).find(|&i| !(h[i] < h[i - 1])) {
        return Err(Error::InvalidArgument(format!(
            "mesh sizes must decrease: h[{}] = {} after {}",
            i,
            h[i],
            h[i - 1]
        )));
    }
    Ok((0..h.len())
        .map(|i| (i > 0).then(|| (e[i - 1] / e[i]).ln() / (h[i - 1] / h[i]).ln()))
        .collect())
}

/// Fills the `rate` field of a series ordered by decreasing `h`.
pub fn rate_table(series: &mut [ErrorReport]) -> Result<()> {
    let h: Vec<f64> = series.iter().map(|r| r.h).collect();
    let e: Vec<f64> = series.iter().map(|r| r.l2_rel_error).collect();
    for (r, rate) in series.iter_mut().zip(rates(&h, &e)?) {
        r.rate = rate;
    }
    Ok(())
}

pub const CSV_HEADER: [&str; 11] = [
    "experiment",
    "variant",
    "k",
    "p",
    "h",
    "ndof",
    "l2_rel_error",
    "rate",
    "residual",
    "offset_angle",
    "mesh_spec",
];

/// Writes reports in the fixed CSV schema.
pub fn write_csv(rows: &[ErrorReport], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    out.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        out.write_record([
            r.experiment.clone(),
            r.variant.to_string(),
            format!("{}", r.k),
            r.p.to_string(),
            format!("{:.10e}", r.h),
            r.ndof.to_string(),
            format!("{:.10e}", r.l2_rel_error),
            r.rate.map_or_else(|| "-".to_string(), |v| format!("{v:.4}")),
            format!("{:.3e}", r.residual),
            format!("{}", r.offset_angle),
            r.mesh_spec.clone(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `x y` pairs, one per line.
pub fn write_plot_data(points: &[(f64, f64)], mut w: impl Write) -> Result<()> {
    for (x, y) in points {
        writeln!(w, "{x:.10e} {y:.10e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec2<f64> {
        Vec2::new(x, y)
    }

    fn laplacian_residual(u: &ExactSolution<f64>, k: f64, x: Vec2<f64>) -> f64 {
        let h = 1e-4;
        let f = |p: Vec2<f64>| u.value(k, &p).unwrap();
        let lap = (f(x + v(h, 0.0)) + f(x - v(h, 0.0)) + f(x + v(0.0, h)) + f(x - v(0.0, h)) - f(x) * 4.0) / (h * h);
        (lap + f(x) * (k * k)).norm() / (k * k * f(x).norm())
    }

    #[test]
    fn solutions_satisfy_helmholtz() {
        let pts = [v(0.3, 0.2), v(0.8, 0.9), v(0.55, 0.05)];
        for u in [ExactSolution::hankel(), ExactSolution::singular(1.5), ExactSolution::singular(2.0 / 3.0)] {
            for x in pts {
                assert!(laplacian_residual(&u, 10.0, x) < 1e-5, "{u:?} at {x:?}");
            }
        }
    }

    #[test]
    fn hankel_is_j_plus_iy() {
        let u = ExactSolution::hankel();
        let x = v(0.4, 0.3);
        let r = (x - v(-0.25, 0.0)).norm();
        let val = u.value(20.0, &x).unwrap();
        assert!((val.re - bessel_j(0.0, 20.0 * r).unwrap()).abs() < 1e-15);
        assert!((val.im - crate::specialfn::bessel_y(0.0, 20.0 * r).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for u in [ExactSolution::hankel(), ExactSolution::singular(2.0 / 3.0), ExactSolution::plane_wave(v(0.6, 0.8))] {
            for i in 0..10 {
                let t = i as f64 / 10.0;
                let x = v(t, 1.0 - 0.3 * t);
                let g = u.gradient(20.0, &x).unwrap();
                let fx = (u.value(20.0, &(x + v(h, 0.0))).unwrap() - u.value(20.0, &(x - v(h, 0.0))).unwrap()) / (2.0 * h);
                let fy = (u.value(20.0, &(x + v(0.0, h))).unwrap() - u.value(20.0, &(x - v(0.0, h))).unwrap()) / (2.0 * h);
                let scale = g[0].norm() + g[1].norm();
                assert!(((g[0] - fx).norm() + (g[1] - fy).norm()) / scale < 1e-6, "{u:?}");
            }
        }
    }

    #[test]
    fn plane_wave_datum_closed_form() {
        let d = v(0.6, 0.8);
        let u = ExactSolution::plane_wave(d);
        let g = impedance_datum(&u, 20.0).unwrap();
        let (x, nu) = (v(1.0, 0.3), v(1.0, 0.0));
        let expect = i_times(20.0 * (d.dot(&nu) + 1.0)) * cexp(i_times(20.0 * d.dot(&x)));
        assert!((g(&x, &nu).unwrap() - expect).norm() < 1e-13);
    }

    #[test]
    fn invalid_sources_are_rejected() {
        let inside = ExactSolution::Hankel { x0: v(0.5, 0.5) };
        assert!(matches!(impedance_datum(&inside, 10.0), Err(Error::InvalidConfiguration(_))));
        let corner = ExactSolution::Hankel { x0: v(0.0, 0.0) };
        assert!(impedance_datum(&corner, 10.0).is_err());
        let sing = ExactSolution::BesselSingular { xi: 0.5, x0: v(0.5, 0.5) };
        assert!(impedance_datum(&sing, 10.0).is_err());
        // integer order is entire and fine on the boundary
        let smooth = ExactSolution::singular(1.0);
        let g = impedance_datum(&smooth, 10.0).unwrap();
        assert!(g(&v(0.0, 0.5), &v(-1.0, 0.0)).unwrap().norm().is_finite());
    }

    #[test]
    fn rate_formula() {
        let r = rates(&[0.2, 0.1], &[1e-2, 1e-4]).unwrap();
        assert_eq!(r[0], None);
        assert!((r[1].unwrap() - 6.643856189774724).abs() < 1e-12);
        assert_eq!(rates(&[0.2], &[1e-2]).unwrap(), vec![None]);
        assert!(rates(&[0.1, 0.2], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn csv_schema() {
        let row = ErrorReport {
            experiment: "table1".into(),
            variant: Variant::PwVem,
            k: 20.0,
            p: 13,
            h: 0.5,
            ndof: 117,
            l2_rel_error: 1e-3,
            rate: None,
            residual: 1e-14,
            offset_angle: 0.0,
            mesh_spec: "structured:2".into(),
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("table1,PWVEM,20,13,"));
    }
}
