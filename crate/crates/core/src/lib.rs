//! Numerical laboratory for almost representations of discrete groups.

pub mod cocycle;
pub mod error;
pub mod group;
pub mod hyperfinite;
pub mod linalg;
pub mod rep;
pub mod report;
pub mod rigidity;
pub mod sl2;
pub mod spectral;

pub use error::{Error, Result};
