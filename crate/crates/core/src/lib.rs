//! Plane wave virtual element method for the 2D Helmholtz equation with
//! impedance boundary conditions on polygonal meshes of the unit square.
//!
//! The numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the tolerances in the test suite assume.

// `!(x > 0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod element;
pub mod error;
pub mod mesh;
pub mod postproc;
pub mod pwcore;
pub mod quadrature;
pub mod scalar;
pub mod specialfn;
pub mod study;
pub mod system;

pub use element::{ElementOptions, Variant};
pub use error::{Error, Result};
pub use scalar::Real;

pub type Mesh = mesh::PolygonalMesh<f64>;
pub type Geometry = mesh::ElementGeometry<f64>;
pub type Context = pwcore::WaveContext<f64>;
pub type Directions = pwcore::DirectionSet<f64>;
pub type Operators = element::LocalOperators<f64>;
pub type Exact = postproc::ExactSolution<f64>;
pub type System = system::GlobalSystem<f64>;
pub type Solution = system::DiscreteSolution<f64>;
pub type Matrix = element::CMatrix<f64>;
