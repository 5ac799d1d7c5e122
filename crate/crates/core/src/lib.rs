//! Idempotent symmetric algebra on ℝ and ℝⁿ, limit convex hulls of two
//! points, B-forms and separation, plus a finite-exponent Hölder oracle for
//! checking the limits.

pub mod error;
pub mod hull;
pub mod oracle;
pub mod scalar;
pub mod separation;
pub mod vector;

pub use error::{Error, Result};
pub use scalar::{IndexSet, Tolerance};
pub use vector::Orthant;
