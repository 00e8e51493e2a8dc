//! Finite-field linear algebra and a combinatorial census engine for
//! super-regular and contiguous-super-regular matrices over GF(q).
//!
//! The crate decides and counts (contiguous) super-regular and MDS
//! matrices, reproduces published count tables with exact arithmetic,
//! refutes low-period quasi-polynomial hypotheses for the 4×4
//! super-regular count by exact rational Lagrange interpolation, and
//! estimates regularity probabilities by seeded Monte Carlo.

pub mod census;
pub mod fixtures;
pub mod gf;
pub mod mat;
pub mod mc;
pub mod ratpoly;
pub mod regularity;

pub use gf::{Elem, Field, FieldMeta, GfError};
pub use mat::{MatError, MatGF};

/// Version string recorded in result records and manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
