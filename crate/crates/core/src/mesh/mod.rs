//! Polygonal meshes of the unit square.
//!
//! A mesh is a list of vertices and a list of counter-clockwise cells. Edge
//! topology is derived on construction; an edge is on the boundary exactly
//! when a single cell uses it.

mod generate;
mod geometry;
mod io;

use std::collections::HashMap;

pub use generate::{make_structured_triangular, make_voronoi};
pub use geometry::{element_geometry, shape_diagnostics, ElementGeometry, ShapeReport};
pub use io::{parse_mesh, read_mesh, to_text, write_mesh};

use crate::error::{Error, Result};
use crate::scalar::{cross, Real, Vec2};

/// Undirected mesh edge. `left` is the cell that traverses the edge as
/// `vertices[0] -> vertices[1]`; `right` is the neighbour across it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct PolygonalMesh<T> {
    vertices: Vec<Vec2<T>>,
    cells: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    boundary_edges: Vec<usize>,
    /// `cell_edges[c][i]` is the global edge joining local vertices `i` and `i+1`.
    cell_edges: Vec<Vec<usize>>,
}

impl<T: Real> PolygonalMesh<T> {
    /// Builds a mesh and its edge topology, rejecting cells that are not
    /// simple counter-clockwise polygons and edges shared inconsistently.
    pub fn new(vertices: Vec<Vec2<T>>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let nv = vertices.len();
        for (c, cell) in cells.iter().enumerate() {
            validate_cell(&vertices, c, cell)?;
        }

        let mut directed: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (c, cell) in cells.iter().enumerate() {
            for i in 0..cell.len() {
                let a = cell[i];
                let b = cell[(i + 1) % cell.len()];
                if directed.insert((a, b), (c, i)).is_some() {
                    return Err(Error::InvalidMesh(format!(
                        "directed edge ({a}, {b}) appears twice; cell {c} overlaps a neighbour"
                    )));
                }
            }
        }

        let mut edges = Vec::new();
        let mut cell_edges: Vec<Vec<usize>> = cells.iter().map(|c| vec![usize::MAX; c.len()]).collect();
        for (c, cell) in cells.iter().enumerate() {
            for i in 0..cell.len() {
                if cell_edges[c][i] != usize::MAX {
                    continue;
                }
                let a = cell[i];
                let b = cell[(i + 1) % cell.len()];
                let id = edges.len();
                cell_edges[c][i] = id;
                let right = directed.get(&(b, a)).map(|&(other, j)| {
                    cell_edges[other][j] = id;
                    other
                });
                edges.push(Edge { vertices: [a, b], left: c, right });
            }
        }
        let boundary_edges = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_boundary())
            .map(|(i, _)| i)
            .collect();

        let used = {
            let mut used = vec![false; nv];
            cells.iter().flatten().for_each(|&v| used[v] = true);
            used
        };
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no cell")));
        }

        Ok(Self { vertices, cells, edges, boundary_edges, cell_edges })
    }

    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.cell_edges[c]
    }

    /// Local edge indices of cell `c` lying on the domain boundary.
    pub fn boundary_local_edges(&self, c: usize) -> Vec<usize> {
        self.cell_edges[c]
            .iter()
            .enumerate()
            .filter(|(_, &e)| self.edges[e].is_boundary())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn cell_coordinates(&self, c: usize) -> Vec<Vec2<T>> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Mesh width `h = max_K h_K`.
    pub fn mesh_size(&self) -> T {
        (0..self.n_cells())
            .map(|c| geometry::diameter(&self.cell_coordinates(c)))
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn total_area(&self) -> T {
        (0..self.n_cells())
            .map(|c| geometry::signed_area(&self.cell_coordinates(c)))
            .fold(T::zero(), |a, b| a + b)
    }

    /// Walks the boundary edges and returns the vertex loop, failing unless
    /// they form exactly one closed curve.
    pub fn boundary_loop(&self) -> Result<Vec<usize>> {
        let mut next: HashMap<usize, usize> = HashMap::new();
        for &e in &self.boundary_edges {
            let [a, b] = self.edges[e].vertices;
            if next.insert(a, b).is_some() {
                return Err(Error::InvalidMesh(format!("boundary vertex {a} has two outgoing boundary edges")));
            }
        }
        let Some(&start) = self.boundary_edges.first().map(|&e| &self.edges[e].vertices[0]) else {
            return Err(Error::InvalidMesh("mesh has no boundary".into()));
        };
        let mut walk = vec![start];
        let mut v = start;
        loop {
            v = *next
                .get(&v)
                .ok_or_else(|| Error::InvalidMesh(format!("boundary is open at vertex {v}")))?;
            if v == start {
                break;
            }
            walk.push(v);
            if walk.len() > self.boundary_edges.len() {
                return Err(Error::InvalidMesh("boundary walk does not close".into()));
            }
        }
        if walk.len() != self.boundary_edges.len() {
            return Err(Error::InvalidMesh(format!(
                "boundary splits into several loops ({} of {} edges in the first)",
                walk.len(),
                self.boundary_edges.len()
            )));
        }
        Ok(walk)
    }

    /// Converts the mesh to another scalar type.
    pub fn cast<U: Real>(&self) -> PolygonalMesh<U> {
        PolygonalMesh {
            vertices: self.vertices.iter().map(|v| Vec2::new(U::lit(v.x.as_f64()), U::lit(v.y.as_f64()))).collect(),
            cells: self.cells.clone(),
            edges: self.edges.clone(),
            boundary_edges: self.boundary_edges.clone(),
            cell_edges: self.cell_edges.clone(),
        }
    }
}

fn validate_cell<T: Real>(vertices: &[Vec2<T>], c: usize, cell: &[usize]) -> Result<()> {
    if cell.len() < 3 {
        return Err(Error::InvalidMesh(format!("cell {c} has {} vertices", cell.len())));
    }
    for (i, &v) in cell.iter().enumerate() {
        if v >= vertices.len() {
            return Err(Error::InvalidMesh(format!(
                "cell {c} references vertex {v} but there are {}",
                vertices.len()
            )));
        }
        if cell[..i].contains(&v) {
            return Err(Error::InvalidMesh(format!("cell {c} repeats vertex {v}")));
        }
    }
    let pts: Vec<_> = cell.iter().map(|&v| vertices[v]).collect();
    if geometry::signed_area(&pts) <= T::zero() {
        return Err(Error::InvalidMesh(format!("cell {c} is not counter-clockwise")));
    }
    if !is_simple(&pts) {
        return Err(Error::SelfIntersecting(format!("cell {c}")));
    }
    Ok(())
}

/// True when no two non-adjacent edges of the closed polyline intersect.
pub(crate) fn is_simple<T: Real>(pts: &[Vec2<T>]) -> bool {
    let n = pts.len();
    if n < 4 {
        return true;
    }
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (pts[j], pts[(j + 1) % n]);
            if segments_intersect(&a, &b, &c, &d) {
                return false;
            }
        }
    }
    true
}

fn segments_intersect<T: Real>(a: &Vec2<T>, b: &Vec2<T>, c: &Vec2<T>, d: &Vec2<T>) -> bool {
    let o1 = cross(&(b - a), &(c - a));
    let o2 = cross(&(b - a), &(d - a));
    let o3 = cross(&(d - c), &(a - c));
    let o4 = cross(&(d - c), &(b - c));
    let z = T::zero();
    if ((o1 > z && o2 < z) || (o1 < z && o2 > z)) && ((o3 > z && o4 < z) || (o3 < z && o4 > z)) {
        return true;
    }
    let on = |p: &Vec2<T>, q: &Vec2<T>, r: &Vec2<T>, o: T| {
        o == z && r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_pair() -> PolygonalMesh<f64> {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        PolygonalMesh::new(v, vec![vec![0, 1, 2], vec![0, 2, 3]]).unwrap()
    }

    #[test]
    fn edge_topology_of_two_triangles() {
        let m = square_pair();
        assert_eq!(m.edges().len(), 5);
        assert_eq!(m.boundary_edges().len(), 4);
        let interior: Vec<_> = m.edges().iter().filter(|e| !e.is_boundary()).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].left, 0);
        assert_eq!(interior[0].right, Some(1));
        assert_eq!(m.boundary_loop().unwrap().len(), 4);
        assert_eq!(m.boundary_local_edges(0), vec![0, 1]);
    }

    #[test]
    fn rejects_clockwise_and_repeated() {
        let v = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        assert!(matches!(
            PolygonalMesh::new(v.clone(), vec![vec![0, 2, 1]]),
            Err(Error::InvalidMesh(_))
        ));
        assert!(PolygonalMesh::new(v.clone(), vec![vec![0, 1, 1]]).is_err());
        assert!(PolygonalMesh::new(v, vec![vec![0, 1, 5]]).is_err());
    }

    #[test]
    fn rejects_bowtie() {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(2.0, 1.2),
            Vec2::new(1.0, -1.0),
        ];
        // 0 -> 4 -> 1 -> 2 -> 3 crosses itself
        let err = PolygonalMesh::new(v, vec![vec![0, 4, 1, 2, 3]]);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_overlapping_cells() {
        let v = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0)];
        let err = PolygonalMesh::new(v, vec![vec![0, 1, 2], vec![0, 1, 3]]);
        assert!(matches!(err, Err(Error::InvalidMesh(_))));
    }
}
