//! Predictor–corrector orthogonal spline collocation for the two-dimensional
//! FitzHugh–Nagumo system.

pub mod analysis;
pub mod basis;
pub mod error;
pub mod forms;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod operators;
pub mod oracle;
pub mod spline;
pub mod stepper;
pub mod study;
pub mod timegrid;

pub use error::{Error, Phase, Result};
