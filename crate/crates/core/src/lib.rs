//! Generalized estimators, squared slopes and interval geometry for
//! one-parameter statistical families.

pub mod error;
pub mod families;
pub mod gcore;
pub mod intervals;
pub mod klgeom;
pub mod mc;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
