use crate::error::{Error, Result};
use crate::scalar::{cross, Real, Vec2};

use super::PolygonalMesh;

/// Per-element geometric data. Local edge `i` runs from vertex `i` to vertex
/// `i + 1 (mod n)`.
#[derive(Clone, Debug)]
pub struct ElementGeometry<T> {
    pub vertices: Vec<Vec2<T>>,
    pub centroid: Vec2<T>,
    pub diameter: T,
    pub area: T,
    pub edge_lengths: Vec<T>,
    /// Outward unit normals.
    pub normals: Vec<Vec2<T>>,
}

impl<T: Real> ElementGeometry<T> {
    /// Geometry of a counter-clockwise polygon.
    pub fn from_polygon(vertices: Vec<Vec2<T>>) -> Result<Self> {
        let area = signed_area(&vertices);
        if !(area > T::zero()) {
            return Err(Error::InvalidMesh(format!("polygon has non-positive area {area:e}")));
        }
        let n = vertices.len();
        let mut edge_lengths = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        for i in 0..n {
            let t = vertices[(i + 1) % n] - vertices[i];
            let len = t.norm();
            edge_lengths.push(len);
            normals.push(Vec2::new(t.y / len, -t.x / len));
        }
        Ok(Self {
            centroid: centroid(&vertices, area),
            diameter: diameter(&vertices),
            area,
            edge_lengths,
            normals,
            vertices,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge(&self, i: usize) -> (Vec2<T>, Vec2<T>) {
        (self.vertices[i], self.vertices[(i + 1) % self.vertices.len()])
    }

    /// Vertices relative to the centroid.
    pub fn centered_vertices(&self) -> Vec<Vec2<T>> {
        self.vertices.iter().map(|v| v - self.centroid).collect()
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            cross(&(b - a), &(c - b)) >= -T::eps() * self.diameter * self.diameter
        })
    }
}

/// Geometry of cell `c`.
pub fn element_geometry<T: Real>(mesh: &PolygonalMesh<T>, c: usize) -> Result<ElementGeometry<T>> {
    if c >= mesh.n_cells() {
        return Err(Error::InvalidArgument(format!("cell index {c} out of range")));
    }
    ElementGeometry::from_polygon(mesh.cell_coordinates(c))
}

pub(crate) fn signed_area<T: Real>(pts: &[Vec2<T>]) -> T {
    let o = pts[0];
    let mut s = T::zero();
    for i in 1..pts.len() - 1 {
        s += cross(&(pts[i] - o), &(pts[i + 1] - o));
    }
    s * T::lit(0.5)
}

fn centroid<T: Real>(pts: &[Vec2<T>], area: T) -> Vec2<T> {
    let o = pts[0];
    let mut acc = Vec2::zeros();
    for i in 1..pts.len() - 1 {
        let a = pts[i] - o;
        let b = pts[i + 1] - o;
        acc += (a + b) * cross(&a, &b);
    }
    o + acc / (T::lit(6.0) * area)
}

pub(crate) fn diameter<T: Real>(pts: &[Vec2<T>]) -> T {
    let mut d = T::zero();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let l = (pts[i] - pts[j]).norm();
            if l > d {
                d = l;
            }
        }
    }
    d
}

fn segment_distance<T: Real>(p: &Vec2<T>, a: &Vec2<T>, b: &Vec2<T>) -> T {
    let t = b - a;
    let s = ((p - a).dot(&t) / t.norm_squared()).max(T::zero()).min(T::one());
    (p - (a + t * s)).norm()
}

fn contains<T: Real>(pts: &[Vec2<T>], p: &Vec2<T>) -> bool {
    let n = pts.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Shape regularity indicators for one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeReport {
    pub cell: usize,
    /// Radius of the largest ball centred at the centroid inside the cell,
    /// divided by `h_K`.
    pub inscribed_ratio: f64,
    pub min_edge_ratio: f64,
    pub convex: bool,
    /// Set for non-convex cells, where the centroid ball only bounds the
    /// inscribed radius from below.
    pub lower_bound_only: bool,
}

pub fn shape_diagnostics<T: Real>(mesh: &PolygonalMesh<T>) -> Vec<ShapeReport> {
    (0..mesh.n_cells())
        .map(|c| {
            let g = ElementGeometry::from_polygon(mesh.cell_coordinates(c))
                .expect("validated mesh cells have positive area");
            let n = g.n_vertices();
            let radius = if contains(&g.vertices, &g.centroid) {
                (0..n)
                    .map(|i| segment_distance(&g.centroid, &g.vertices[i], &g.vertices[(i + 1) % n]))
                    .fold(T::max_value().unwrap(), |a, b| a.min(b))
            } else {
                T::zero()
            };
            let min_edge = g.edge_lengths.iter().fold(T::max_value().unwrap(), |a, &b| a.min(b));
            let convex = g.is_convex();
            ShapeReport {
                cell: c,
                inscribed_ratio: (radius / g.diameter).as_f64(),
                min_edge_ratio: (min_edge / g.diameter).as_f64(),
                convex,
                lower_bound_only: !convex,
            }
        })
        .collect()
}
