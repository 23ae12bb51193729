//! Numerical core for optimal-mixing experiments on the periodic torus.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod error;
pub mod fft;
pub mod field;
pub mod fixtures;
pub mod grid;
pub mod mixedness;
pub mod norms;
pub mod solver;
pub mod spectral;
pub mod velocity;

pub use error::{Error, Result};
pub use field::{Repr, ScalarField, VectorField};
pub use grid::{GridSpec, Point, WaveVector, MAX_DIM};
