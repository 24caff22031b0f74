//! Conformal-geometry invariants of parametrized surfaces in R^{n+2}:
//! ellipse of curvature, central sphere congruence, superconformal and
//! (S-)Willmore residuals, dual superconformal surfaces and the
//! codimension-2 Rouxel picture.
//!
//! Core math is generic over the scalar: any num-traits float works as the
//! base field, and the same pipelines run over [`taylor::TaylorScalar`] to
//! produce exact jets of derived surfaces. Concrete f64 aliases live at the
//! crate root.

pub mod analysis;
pub mod dsl;
pub mod duality;
pub mod error;
pub mod fd;
pub mod frames;
pub mod gallery;
pub mod immersion;
pub mod linalg;
pub mod moebius;
pub mod taylor;
pub mod tolerances;
pub mod weierstrass;

pub use error::{Error, Result};
pub use tolerances::{Orientation, Tolerances};

/// Concrete scalar aliases used by the report and CLI layers.
pub type Taylor64 = taylor::TaylorScalar<f64>;
pub type Taylor32 = taylor::TaylorScalar<f32>;
pub type Jet64 = taylor::Jet<f64>;
pub type Jet32 = taylor::Jet<f32>;
