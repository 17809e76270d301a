//! Abelian functions on the cyclic trigonal curve y³ = (x−b₁)(x−b₂)(x−b₃)(x−b₄).
//!
//! The crate computes period matrices by contour integration, the Riemann
//! theta function with characteristics, the Kleinian sigma function and the
//! trigonal al functions, together with the determinant based divisor
//! arithmetic on the curve. [`verify`] bundles numerical checks of the
//! identities relating all of these.

#![allow(clippy::needless_range_loop)]

pub mod al;
pub mod curve;
pub mod cx;
pub mod divisor;
pub mod error;
pub mod exec;
#[cfg(test)]
mod fixtures;
pub mod homology;
pub mod hyper;
pub mod path;
pub mod periods;
pub mod poly;
pub mod quad;
pub mod sample;
pub mod sigma;
pub mod theta;
pub mod verify;

pub use curve::{CurveSpec, SurfacePoint, TracedPath};
pub use cx::C;
pub use error::{Error, Result};
pub use exec::Exec;
