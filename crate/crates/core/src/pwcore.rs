//! Plane wave directions and exact integrals of plane wave products.
//!
//! Kernels are written for a wave vector `q`, so that the integrand is
//! `e^{i q.x}`; the product `pw_m conj(pw_l)` corresponds to
//! `q = k (d_m - d_l)`.

use std::f64::consts::PI;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::integrate_polygon;
use crate::scalar::{cexp, cross, i_times, real, Real, Vec2};
use crate::specialfn::{phi, PhiKind};

/// Below this value of `|q| h` the polygon kernel switches to quadrature.
pub const SMALL_WAVE_SWITCH: f64 = 1e-3;

/// `p = 2m + 1` unit propagation directions.
#[derive(Clone, Debug)]
pub struct DirectionSet<T> {
    angles: Vec<T>,
    dirs: Vec<Vec2<T>>,
    offset: T,
}

impl<T: Real> DirectionSet<T> {
    /// `theta_l = offset + 2 pi l / p` for `l = 0..p`.
    pub fn equispaced(p: usize, offset: T) -> Result<Self> {
        if p < 3 || p.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "p = {p} is not allowed: the number of directions must be odd, p = 2m+1 with m >= 1"
            )));
        }
        let step = T::two_pi() / T::from_usize_lossy(p);
        let angles: Vec<T> = (0..p).map(|l| offset + step * T::from_usize_lossy(l)).collect();
        let dirs = angles.iter().map(|&t| Vec2::new(t.cos(), t.sin())).collect();
        Ok(Self { angles, dirs, offset })
    }

    pub fn p(&self) -> usize {
        self.dirs.len()
    }

    pub fn m(&self) -> usize {
        (self.p() - 1) / 2
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn dirs(&self) -> &[Vec2<T>] {
        &self.dirs
    }

    pub fn dir(&self, l: usize) -> Vec2<T> {
        self.dirs[l]
    }

    /// Minimum pairwise angle divided by `2 pi / p` (the angle condition
    /// constant, 1 for equispaced sets).
    pub fn min_angle_ratio(&self) -> f64 {
        let p = self.p();
        let mut best = f64::INFINITY;
        for i in 0..p {
            for j in i + 1..p {
                let c = self.dirs[i].dot(&self.dirs[j]).as_f64().clamp(-1.0, 1.0);
                best = best.min(c.acos());
            }
        }
        best / (2.0 * PI / p as f64)
    }
}

/// Plane wave data shared by all elements.
#[derive(Clone, Debug)]
pub struct WaveContext<T> {
    pub k: T,
    pub directions: DirectionSet<T>,
}

impl<T: Real> WaveContext<T> {
    pub fn new(k: T, p: usize, offset: T) -> Result<Self> {
        if !(k > T::zero()) {
            return Err(Error::InvalidArgument(format!("wave number k = {k} must be positive")));
        }
        Ok(Self { k, directions: DirectionSet::equispaced(p, offset)? })
    }

    pub fn p(&self) -> usize {
        self.directions.p()
    }

    /// `pw_l(x) = e^{i k d_l.(x - anchor)}`.
    pub fn plane_wave(&self, l: usize, anchor: &Vec2<T>, x: &Vec2<T>) -> Complex<T> {
        cexp(i_times(self.k * self.directions.dir(l).dot(&(x - anchor))))
    }

    /// `c_{jl} = e^{i k d_l.(x_K - x_j)}`, so that `pw_{jl} = c_{jl} pw_l`.
    pub fn phase(&self, l: usize, x_k: &Vec2<T>, x_j: &Vec2<T>) -> Complex<T> {
        self.plane_wave(l, x_j, x_k)
    }

    /// `k (d_m - d_l)`.
    pub fn wave_vector(&self, m: usize, l: usize) -> Vec2<T> {
        (self.directions.dir(m) - self.directions.dir(l)) * self.k
    }
}

/// Local basis function `psi_r = phi_j pw_{jl}`, `r = j p + l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisIndex {
    pub vertex: usize,
    pub dir: usize,
}

impl BasisIndex {
    pub fn flat(self, p: usize) -> usize {
        self.vertex * p + self.dir
    }

    pub fn from_flat(r: usize, p: usize) -> Self {
        Self { vertex: r / p, dir: r % p }
    }
}

/// Which product of edge hat functions multiplies the exponential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeWeight {
    /// `phi_a`, the hat equal to one at `a`.
    Hat,
    /// `phi_a^2`.
    HatSquared,
    /// `phi_a phi_b`.
    HatProduct,
}

/// `int_F e^{i q.x} ds` over the segment `[a, b]`.
pub fn edge_exp_integral<T: Real>(a: &Vec2<T>, b: &Vec2<T>, q: &Vec2<T>) -> Complex<T> {
    let len = (b - a).norm();
    cexp(i_times(q.dot(a))) * phi(PhiKind::One, i_times(q.dot(&(b - a)))) * len
}

/// `int_F w(x) e^{i q.x} ds` for a hat weight anchored at `a`.
pub fn edge_hat_integral<T: Real>(weight: EdgeWeight, a: &Vec2<T>, b: &Vec2<T>, q: &Vec2<T>) -> Complex<T> {
    let kind = match weight {
        EdgeWeight::Hat => PhiKind::Two,
        EdgeWeight::HatSquared => PhiKind::Three,
        EdgeWeight::HatProduct => PhiKind::Four,
    };
    let len = (b - a).norm();
    cexp(i_times(q.dot(a))) * phi(kind, i_times(q.dot(&(b - a)))) * len
}

/// `int_F e^{i k (d_m - d_l).x} ds`.
pub fn edge_pw_integral<T: Real>(a: &Vec2<T>, b: &Vec2<T>, k: T, d_m: &Vec2<T>, d_l: &Vec2<T>) -> Complex<T> {
    edge_exp_integral(a, b, &((d_m - d_l) * k))
}

/// `int_F w(x) e^{i k (d_m - d_l).x} ds`; the hat vertex is `a`.
pub fn edge_hat_pw_integral<T: Real>(
    weight: EdgeWeight,
    a: &Vec2<T>,
    b: &Vec2<T>,
    k: T,
    d_m: &Vec2<T>,
    d_l: &Vec2<T>,
) -> Complex<T> {
    edge_hat_integral(weight, a, b, &((d_m - d_l) * k))
}

/// `int_K e^{i q.x} dx` over a counter-clockwise polygon of diameter `h`,
/// reduced to edge integrals by the divergence theorem.
pub fn polygon_exp_integral<T: Real>(pts: &[Vec2<T>], h: T, q: &Vec2<T>) -> Complex<T> {
    let qn = q.norm();
    if qn == T::zero() {
        return real(polygon_area(pts));
    }
    if qn * h < T::lit(SMALL_WAVE_SWITCH) {
        return integrate_polygon(pts, 8, |x| cexp(i_times(q.dot(x))))
            .expect("mesh cells are simple polygons");
    }
    let n = pts.len();
    let mut s = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let t = b - a;
        // outward normal scaled by |F|
        let nu = Vec2::new(t.y, -t.x);
        s += edge_exp_integral(&a, &b, q) * (q.dot(&nu) / t.norm());
    }
    // divide by i |q|^2
    Complex::new(s.im, -s.re) / (qn * qn)
}

/// `int_K e^{i k (d_m - d_l).x} dx`.
pub fn polygon_pw_mass_integral<T: Real>(pts: &[Vec2<T>], h: T, k: T, d_m: &Vec2<T>, d_l: &Vec2<T>) -> Complex<T> {
    polygon_exp_integral(pts, h, &((d_m - d_l) * k))
}

fn polygon_area<T: Real>(pts: &[Vec2<T>]) -> T {
    let o = pts[0];
    let mut s = T::zero();
    for i in 1..pts.len() - 1 {
        s += cross(&(pts[i] - o), &(pts[i + 1] - o));
    }
    s * T::lit(0.5)
}
