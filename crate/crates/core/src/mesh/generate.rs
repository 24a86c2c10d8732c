use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{Real, Vec2};

use super::PolygonalMesh;

/// Structured triangulation of the unit square with `2 n^2` triangles. Every
/// square is split along its lower-left to upper-right diagonal.
pub fn make_structured_triangular<T: Real>(n: usize) -> Result<PolygonalMesh<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("structured mesh needs n >= 1".into()));
    }
    let h = T::one() / T::from_usize_lossy(n);
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            // exact 1 on the far boundary
            let x = if i == n { T::one() } else { h * T::from_usize_lossy(i) };
            let y = if j == n { T::one() } else { h * T::from_usize_lossy(j) };
            vertices.push(Vec2::new(x, y));
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            cells.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    PolygonalMesh::new(vertices, cells)
}

const MIN_SEPARATION: f64 = 1e-10;
const WELD_TOL: f64 = 1e-9;
const MAX_ATTEMPTS: usize = 10;

type P = [f64; 2];

/// Centroidal-ish Voronoi tessellation of the unit square with `n_cells`
/// cells: uniform random generators from a ChaCha stream seeded by `seed`,
/// followed by `lloyd_iterations` Lloyd sweeps. The output is a pure
/// function of the arguments.
pub fn make_voronoi<T: Real>(n_cells: usize, seed: u64, lloyd_iterations: usize) -> Result<PolygonalMesh<T>> {
    if n_cells < 4 {
        return Err(Error::InvalidArgument(format!("Voronoi mesh needs at least 4 cells, got {n_cells}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites: Vec<P> = (0..n_cells).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();

    let mut attempts = 0;
    while let Some((i, j)) = coincident_pair(&sites) {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(Error::DegenerateGenerators {
                attempts: MAX_ATTEMPTS,
                message: format!("generators {i} and {j} remain closer than {MIN_SEPARATION:e}"),
            });
        }
        let s = &mut sites[j];
        s[0] = (s[0] + 1e-6 * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0);
        s[1] = (s[1] + 1e-6 * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0);
    }

    for _ in 0..lloyd_iterations {
        let cells = voronoi_cells(&sites);
        sites = cells.iter().map(|c| polygon_centroid(c)).collect();
    }
    let cells = voronoi_cells(&sites);
    weld(&cells)
}

fn coincident_pair(sites: &[P]) -> Option<(usize, usize)> {
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            if dist(&sites[i], &sites[j]) < MIN_SEPARATION {
                return Some((i, j));
            }
        }
    }
    None
}

fn dist(a: &P, b: &P) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Each cell is the unit square clipped by the bisector half-planes of the
/// other generators, processed nearest first with an early exit once the
/// remaining generators are too far away to cut.
fn voronoi_cells(sites: &[P]) -> Vec<Vec<P>> {
    use rayon::prelude::*;
    (0..sites.len())
        .into_par_iter()
        .map(|i| {
            let s = sites[i];
            let mut order: Vec<usize> = (0..sites.len()).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| dist(&s, &sites[a]).total_cmp(&dist(&s, &sites[b])));
            let mut poly = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
            for j in order {
                let reach = poly.iter().map(|v| dist(&s, v)).fold(0.0, f64::max);
                let t = sites[j];
                if 0.5 * dist(&s, &t) > reach {
                    break;
                }
                let n = [t[0] - s[0], t[1] - s[1]];
                let c = 0.5 * (t[0] * t[0] + t[1] * t[1] - s[0] * s[0] - s[1] * s[1]);
                poly = clip(&poly, n, c);
            }
            poly
        })
        .collect()
}

/// Sutherland-Hodgman clip of a convex polygon to `{x : n.x <= c}`.
fn clip(poly: &[P], n: P, c: f64) -> Vec<P> {
    let f = |p: &P| n[0] * p[0] + n[1] * p[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (fa, fb) = (f(&a), f(&b));
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            let t = fa / (fa - fb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

fn polygon_centroid(poly: &[P]) -> P {
    let o = poly[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 1..poly.len() - 1 {
        let p = [poly[i][0] - o[0], poly[i][1] - o[1]];
        let q = [poly[i + 1][0] - o[0], poly[i + 1][1] - o[1]];
        let w = p[0] * q[1] - p[1] * q[0];
        a += w;
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    [o[0] + cx / (3.0 * a), o[1] + cy / (3.0 * a)]
}

fn snap(x: f64) -> f64 {
    if x.abs() < WELD_TOL {
        0.0
    } else if (x - 1.0).abs() < WELD_TOL {
        1.0
    } else {
        x
    }
}

/// Merges coincident vertices across cells and drops the zero-length edges
/// that clipping leaves behind.
fn weld<T: Real>(cells: &[Vec<P>]) -> Result<PolygonalMesh<T>> {
    let mut vertices: Vec<P> = Vec::new();
    let mut grid: std::collections::HashMap<(i64, i64), Vec<usize>> = std::collections::HashMap::new();
    let key = |p: &P| ((p[0] / WELD_TOL / 4.0).floor() as i64, (p[1] / WELD_TOL / 4.0).floor() as i64);
    let mut out_cells = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut ids: Vec<usize> = Vec::with_capacity(cell.len());
        for p in cell {
            let p = [snap(p[0]), snap(p[1])];
            let (kx, ky) = key(&p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                        for &v in list {
                            if dist(&vertices[v], &p) < WELD_TOL {
                                found = Some(v);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let v = found.unwrap_or_else(|| {
                vertices.push(p);
                grid.entry((kx, ky)).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
            if ids.last() != Some(&v) {
                ids.push(v);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        out_cells.push(ids);
    }
    let vertices = vertices.iter().map(|p| Vec2::new(T::lit(p[0]), T::lit(p[1]))).collect();
    PolygonalMesh::new(vertices, out_cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_counts_and_area() {
        let m = make_structured_triangular::<f64>(4).unwrap();
        assert_eq!(m.n_cells(), 32);
        assert_eq!(m.n_vertices(), 25);
        assert_eq!(m.boundary_edges().len(), 16);
        assert!((m.total_area() - 1.0).abs() < 1e-14);
        assert!((m.mesh_size() - 0.25 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn voronoi_covers_the_square() {
        for &(n, seed) in &[(8, 1), (64, 7), (200, 3)] {
            let m = make_voronoi::<f64>(n, seed, 5).unwrap();
            assert_eq!(m.n_cells(), n);
            assert!((m.total_area() - 1.0).abs() < 1e-12);
            m.boundary_loop().unwrap();
            let perimeter: f64 = m
                .boundary_edges()
                .iter()
                .map(|&e| {
                    let [a, b] = m.edges()[e].vertices;
                    (m.vertices()[a] - m.vertices()[b]).norm()
                })
                .sum();
            assert!((perimeter - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn voronoi_is_deterministic() {
        let a = make_voronoi::<f64>(50, 42, 3).unwrap();
        let b = make_voronoi::<f64>(50, 42, 3).unwrap();
        assert_eq!(a.cells(), b.cells());
        assert_eq!(a.vertices(), b.vertices());
        let c = make_voronoi::<f64>(50, 43, 3).unwrap();
        assert_ne!(a.vertices(), c.vertices());
    }

    #[test]
    fn lloyd_improves_regularity() {
        let raw = make_voronoi::<f64>(64, 5, 0).unwrap();
        let smooth = make_voronoi::<f64>(64, 5, 20).unwrap();
        let worst = |m: &PolygonalMesh<f64>| {
            super::super::shape_diagnostics(m)
                .iter()
                .map(|r| r.inscribed_ratio)
                .fold(f64::INFINITY, f64::min)
        };
        assert!(worst(&smooth) > worst(&raw));
    }

    #[test]
    fn rejects_too_few_cells() {
        assert!(make_voronoi::<f64>(3, 0, 0).is_err());
        assert!(make_structured_triangular::<f64>(0).is_err());
    }
}
