//! Squeezed states of a massless scalar field in 1+1 dimensions.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod flux;
pub mod genfun;
pub mod jet;
pub mod modes;
pub mod quadrature;
pub mod suites;

pub use error::{Error, Result};

pub const PI: f64 = std::f64::consts::PI;

/// 17 significant digits, the form used in every CSV output.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
