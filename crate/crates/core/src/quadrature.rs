//! Gauss-Legendre rules on segments and triangles and composite polygon
//! quadrature through ear-clipping triangulation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cross, Real, Vec2};

/// Largest Gauss-Legendre rule handed out directly.
pub const MAX_SEGMENT_POINTS: usize = 64;
/// Largest polynomial degree of a single collapsed triangle rule.
pub const MAX_TRIANGLE_DEGREE: usize = 2 * MAX_SEGMENT_POINTS - 2;

/// Gauss rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct SegmentRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    /// Polynomial exactness degree.
    pub order: usize,
}

/// Rule on the reference triangle `(0,0), (1,0), (0,1)`.
#[derive(Clone, Debug)]
pub struct TriangleRule<T> {
    pub nodes: Vec<Vec2<T>>,
    pub weights: Vec<T>,
    pub order: usize,
}

/// Physical points and weights covering a region.
#[derive(Clone, Debug)]
pub struct PointRule<T> {
    pub points: Vec<Vec2<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> PointRule<T> {
    pub fn integrate(&self, f: impl Fn(&Vec2<T>) -> Complex<T>) -> Complex<T> {
        let mut s = Complex::new(T::zero(), T::zero());
        for (x, &w) in self.points.iter().zip(&self.weights) {
            s += f(x) * w;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

type Table = Arc<(Vec<f64>, Vec<f64>)>;

/// Nodes and weights on `[0, 1]` in `f64`, computed once per size by Newton
/// iteration on the Legendre three-term recurrence.
fn legendre_table(n: usize) -> Table {
    static CACHE: OnceLock<Mutex<HashMap<usize, Table>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&n) {
        return t.clone();
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1, 1] -> [0, 1]
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.5;
    }
    let t = Arc::new((x, w));
    cache.lock().unwrap().insert(n, t.clone());
    t
}

/// `n`-point Gauss-Legendre rule on `[0, 1]`, exact to degree `2n - 1`.
pub fn gauss_segment<T: Real>(n: usize) -> Result<SegmentRule<T>> {
    if !(1..=MAX_SEGMENT_POINTS).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "segment rule size {n} outside 1..={MAX_SEGMENT_POINTS}"
        )));
    }
    let t = legendre_table(n);
    Ok(SegmentRule {
        nodes: t.0.iter().map(|&v| T::lit(v)).collect(),
        weights: t.1.iter().map(|&v| T::lit(v)).collect(),
        order: 2 * n - 1,
    })
}

/// Collapsed (Duffy) Gauss rule on the reference triangle exact to `degree`.
pub fn gauss_triangle<T: Real>(degree: usize) -> Result<TriangleRule<T>> {
    if degree > MAX_TRIANGLE_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "triangle rule degree {degree} above {MAX_TRIANGLE_DEGREE}"
        )));
    }
    let n = (degree + 2).div_ceil(2).max(1);
    let t = legendre_table(n);
    let mut nodes = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&u, &wu) in t.0.iter().zip(&t.1) {
        for (&v, &wv) in t.0.iter().zip(&t.1) {
            nodes.push(Vec2::new(T::lit(u), T::lit(v * (1.0 - u))));
            weights.push(T::lit(wu * wv * (1.0 - u)));
        }
    }
    Ok(TriangleRule { nodes, weights, order: 2 * n - 2 })
}

/// Gauss points for an oscillatory integrand `e^{i k d.x}`-type on a segment
/// of length `len`, with `|d| <= 2`.
pub fn segment_points<T: Real>(k: T, len: T) -> usize {
    let kl = (k * len).as_f64().ceil().max(0.0) as usize;
    (kl + 12).max(8)
}

/// Triangle rule degree for plane wave products on a region of diameter `h`.
pub fn oscillatory_degree<T: Real>(k: T, h: T) -> usize {
    2 * (k * h).as_f64().ceil().max(0.0) as usize + 24
}

/// `int_a^b f ds` by Gauss quadrature with `n` points, split into equal
/// pieces when `n` exceeds the largest single rule.
pub fn integrate_segment<T: Real>(
    a: &Vec2<T>,
    b: &Vec2<T>,
    n: usize,
    f: impl Fn(&Vec2<T>) -> Complex<T>,
) -> Complex<T> {
    segment_rule(a, b, n).integrate(f)
}

/// Physical Gauss points on the segment `[a, b]`, see [`integrate_segment`].
pub fn segment_rule<T: Real>(a: &Vec2<T>, b: &Vec2<T>, n: usize) -> PointRule<T> {
    let pieces = n.max(1).div_ceil(MAX_SEGMENT_POINTS);
    let per = n.max(1).div_ceil(pieces);
    let rule = gauss_segment::<T>(per).expect("size within range");
    let len = (b - a).norm();
    let step = T::one() / T::from_usize_lossy(pieces);
    let mut points = Vec::with_capacity(pieces * per);
    let mut weights = Vec::with_capacity(pieces * per);
    for p in 0..pieces {
        let t0 = step * T::from_usize_lossy(p);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let s = t0 + t * step;
            points.push(a + (b - a) * s);
            weights.push(w * step * len);
        }
    }
    PointRule { points, weights }
}

/// Physical rule on a triangle, uniformly subdividing it when `degree`
/// exceeds a single rule.
pub fn triangle_rule<T: Real>(tri: &[Vec2<T>; 3], degree: usize) -> PointRule<T> {
    let split = if degree <= MAX_TRIANGLE_DEGREE { 1 } else { degree.div_ceil(MAX_TRIANGLE_DEGREE / 2) };
    let sub_degree = if split == 1 { degree } else { degree.div_ceil(split) + 12 };
    let rule = gauss_triangle::<T>(sub_degree).expect("degree within range");
    let [a, b, c] = *tri;
    let e1 = (b - a) / T::from_usize_lossy(split);
    let e2 = (c - a) / T::from_usize_lossy(split);
    let jac = cross(&e1, &e2).abs();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut push = |o: Vec2<T>, u: Vec2<T>, v: Vec2<T>| {
        for (x, &w) in rule.nodes.iter().zip(&rule.weights) {
            points.push(o + u * x.x + v * x.y);
            weights.push(w * jac);
        }
    };
    for i in 0..split {
        for j in 0..split - i {
            let o = a + e1 * T::from_usize_lossy(i) + e2 * T::from_usize_lossy(j);
            push(o, e1, e2);
            if i + j + 1 < split {
                // inverted sub-triangle of the same size
                push(o + e1 + e2, -e1, -e2);
            }
        }
    }
    PointRule { points, weights }
}

/// Ear-clipping triangulation of a simple counter-clockwise polygon,
/// returned as index triples into `pts`.
pub fn triangulate_polygon<T: Real>(pts: &[Vec2<T>]) -> Result<Vec<[usize; 3]>> {
    let n = pts.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("polygon with {n} vertices")));
    }
    if !crate::mesh::is_simple(pts) {
        return Err(Error::SelfIntersecting(format!("{n}-gon")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let scale = pts.iter().map(|p| (p - pts[0]).norm()).fold(T::zero(), |a, b| a.max(b));
    let tol = T::eps() * T::lit(64.0) * scale * scale;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (pts[ia], pts[ib], pts[ic]);
            if cross(&(b - a), &(c - b)) <= tol {
                continue;
            }
            let blocked = idx
                .iter()
                .filter(|&&j| j != ia && j != ib && j != ic)
                .any(|&j| in_triangle(&pts[j], &a, &b, &c));
            if !blocked {
                tris.push([ia, ib, ic]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // only collinear vertices are left as candidates; drop one
            let collinear = (0..m).find(|&i| {
                let (a, b, c) = (pts[idx[(i + m - 1) % m]], pts[idx[i]], pts[idx[(i + 1) % m]]);
                cross(&(b - a), &(c - b)).abs() <= tol
            });
            match collinear {
                Some(i) => {
                    idx.remove(i);
                }
                None => return Err(Error::SelfIntersecting("no ear found".into())),
            }
        }
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Ok(tris)
}

fn in_triangle<T: Real>(p: &Vec2<T>, a: &Vec2<T>, b: &Vec2<T>, c: &Vec2<T>) -> bool {
    let z = T::zero();
    cross(&(b - a), &(p - a)) >= z && cross(&(c - b), &(p - b)) >= z && cross(&(a - c), &(p - c)) >= z
}

/// Composite rule over a polygon: ear-clipped triangles, each carrying a
/// rule exact to `degree`.
pub fn polygon_rule<T: Real>(pts: &[Vec2<T>], degree: usize) -> Result<PointRule<T>> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for [a, b, c] in triangulate_polygon(pts)? {
        let r = triangle_rule(&[pts[a], pts[b], pts[c]], degree);
        points.extend(r.points);
        weights.extend(r.weights);
    }
    Ok(PointRule { points, weights })
}

pub fn integrate_polygon<T: Real>(
    pts: &[Vec2<T>],
    degree: usize,
    f: impl Fn(&Vec2<T>) -> Complex<T>,
) -> Result<Complex<T>> {
    Ok(polygon_rule(pts, degree)?.integrate(f))
}
