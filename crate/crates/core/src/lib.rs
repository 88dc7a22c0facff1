// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod error;
pub mod fit;
pub mod heff;
pub mod linalg;
pub mod lindblad;
pub mod medium;
pub mod mie;
pub mod ode;
pub mod scenarios;
pub mod specfun;
pub mod weak;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
