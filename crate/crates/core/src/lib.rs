//! A posteriori error estimation for the curl–curl problem discretized with
//! Nédélec elements of arbitrary order on tetrahedral meshes.
//!
//! The estimator is built from broken patchwise equilibration: on every edge
//! patch a Nédélec field with prescribed curl is computed either by a mixed
//! patch problem or by a sweep of element problems around the edge.

pub mod cases;
pub mod equilibration;
pub mod error;
pub mod global;
pub mod linalg;
pub mod mesh;
pub mod oracles;
pub mod piola;
pub mod runner;
pub mod shape;

pub use error::{Error, MeshError, Result};
