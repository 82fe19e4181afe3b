//! Transition probabilities of bosons, fermions and distinguishable particles
//! in linear interferometers, together with numerical checks of the
//! complementarity relations that tie the three together.
//!
//! The `parallel` feature (on by default) spreads permanents of 14 or more
//! rows and the pattern sweeps over a rayon pool. Without it every routine
//! runs sequentially and returns bitwise-identical results.

pub mod combinat;
pub mod error;
pub mod genfunc;
pub mod identities;
pub mod matrix;
pub mod parallel;
pub mod permdet;
pub mod summation;
pub mod transition;

pub use combinat::OccupationVector;
pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, SubsetIndex, UnitaryMatrix};
pub use num_complex::Complex64;
pub use permdet::{determinant, permanent};
pub use transition::{Budget, PatternPair, Statistics, TransitionTriple};
