//! Plain text mesh format.
//!
//! ```text
//! # pwvem-mesh 1
//! <nv> <nc>
//! <x> <y>                  (nv lines)
//! <m> <i_1> ... <i_m>      (nc lines, 0-based, counter-clockwise)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{Real, Vec2};

use super::{geometry::signed_area, PolygonalMesh};

const HEADER: &str = "# pwvem-mesh 1";

pub fn to_text<T: Real>(mesh: &PolygonalMesh<T>) -> String {
    let mut s = String::new();
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "{} {}", mesh.n_vertices(), mesh.n_cells()).unwrap();
    for v in mesh.vertices() {
        writeln!(s, "{:.16e} {:.16e}", v.x.as_f64(), v.y.as_f64()).unwrap();
    }
    for cell in mesh.cells() {
        write!(s, "{}", cell.len()).unwrap();
        for i in cell {
            write!(s, " {i}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn write_mesh<T: Real>(mesh: &PolygonalMesh<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_text(mesh))?;
    Ok(())
}

pub fn read_mesh<T: Real>(path: impl AsRef<Path>) -> Result<PolygonalMesh<T>> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn parse_mesh<T: Real>(text: &str) -> Result<PolygonalMesh<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, l)) if l == HEADER => {}
        Some((n, l)) => return Err(err(n, format!("expected header '{HEADER}', found '{l}'"))),
        None => return Err(err(1, "empty file")),
    }
    let (n, counts) = lines.next().ok_or_else(|| err(2, "missing vertex and cell counts"))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(n, format!("invalid count '{t}'"))))
        .collect::<Result<_>>()?;
    let [nv, nc] = counts[..] else {
        return Err(err(n, "expected two counts"));
    };

    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let (n, l) = lines.next().ok_or_else(|| err(3 + i, format!("missing vertex {i}")))?;
        let xy: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(n, format!("invalid coordinate '{t}'"))))
            .collect::<Result<_>>()?;
        match xy[..] {
            [x, y] if x.is_finite() && y.is_finite() => vertices.push(Vec2::new(T::lit(x), T::lit(y))),
            [_, _] => return Err(err(n, "non-finite coordinate")),
            _ => return Err(err(n, format!("expected 2 coordinates, found {}", xy.len()))),
        }
    }

    let mut cells = Vec::with_capacity(nc);
    for c in 0..nc {
        let (n, l) = lines.next().ok_or_else(|| err(3 + nv + c, format!("missing cell {c}")))?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(n, format!("invalid index '{t}'"))))
            .collect::<Result<_>>()?;
        let Some((&m, rest)) = ids.split_first() else {
            return Err(err(n, "empty cell line"));
        };
        if m < 3 || rest.len() != m {
            return Err(err(n, format!("cell declares {m} vertices and lists {}", rest.len())));
        }
        if let Some(&bad) = rest.iter().find(|&&v| v >= nv) {
            return Err(err(n, format!("vertex index {bad} out of range (nv = {nv})")));
        }
        let pts: Vec<_> = rest.iter().map(|&v| vertices[v]).collect();
        if signed_area(&pts) <= T::zero() {
            return Err(err(n, format!("cell {c} is clockwise or degenerate")));
        }
        cells.push(rest.to_vec());
    }
    if let Some((n, _)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(err(n, "unexpected trailing content"));
    }
    PolygonalMesh::new(vertices, cells)
}
