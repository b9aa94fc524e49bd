//! Gaussian β-ensemble characteristic polynomials through the tridiagonal
//! model: exact recursions, the complex Prüfer phase, the martingale noise
//! fields and the limiting sine and stochastic Airy equations.
//!
//! Conventions used throughout:
//!
//! * `n_size` is the matrix size N, `z` a real spectral parameter.
//! * Entry `k` of a [`noise::NoiseStream`] carries `b_{k+1}` and `a_k²`, the
//!   pair consumed by the step `Φ̂_k → Φ̂_{k+1}` of the recursion.
//! * β = ∞ is represented by `f64::INFINITY` and switches all noise off.

pub mod airy;
pub mod charpoly;
mod error;
pub mod fields;
pub mod noise;
pub mod prufer;
mod recur;
pub mod sine;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
