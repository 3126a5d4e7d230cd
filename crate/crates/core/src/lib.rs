//! Numerical laboratory for the one-dimensional fourth-order Schrödinger
//! flow iu_t − μΔu + Δ²u = 0.
//!
//! The crate computes weighted space-time Lebesgue norms of the free
//! evolution and the associated sharp-constant quotients, builds Whitney
//! pairings of dyadic frequency intervals, evaluates the refined frequency
//! functional sup_τ |τ|^{1/2−1/p}‖f̂‖_{L^p(τ)}, extracts concentration
//! profiles ("bubbles") from a function by repeated frequency localization
//! and matched filtering, and runs the extremizer-dichotomy experiments that
//! compare the fourth-order quotient against the Schrödinger baseline
//! 12^{−1/12}.

pub mod error;
pub mod grid;
pub mod spectral;
pub mod quadrature;
pub mod whitney;
pub mod refined;
pub mod bubbles;
pub mod extremal;
pub mod presets;
pub mod io;

pub use error::{LabError, Result};
