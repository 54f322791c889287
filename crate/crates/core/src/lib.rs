//! Pentagram maps on twisted polygons in Grassmannians.
//!
//! A twisted N-gon in Gr(n, mn) is represented by a lifted chain of mn x n
//! matrices `X_k` with monodromy `M`. This crate provides the moduli
//! coordinates of such polygons (invariant block coefficients plus a
//! canonical gauge normalization), the generalized pentagram map in both its
//! geometric and invariant-coordinate forms, its scaling symmetry, and the
//! spectral data of the associated difference operator.

pub mod error;
pub mod field;
pub mod eigen;
pub mod json;
pub mod lax;
pub mod matrix;
pub mod normalize;
pub mod oracle;
pub mod pentamap;
pub mod polygon;

pub use error::{Error, Result};

/// Default comparison tolerance for floating-point pipelines.
pub const DEFAULT_EPS: f64 = 1e-9;
