//! Holographic MIMO channel synthesis in the wavenumber domain and sparse
//! channel estimation from compressed pilot observations.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: planar arrays, the propagating wavenumber lattice and the
//!   wavenumber-domain / angular-domain sparsifying bases.
//! - [`scattering`]: von Mises-Fisher cluster mixtures and their projection
//!   onto the wavenumber lattice as per-cell variances.
//! - [`channel`]: random wavenumber-domain channels and their spatial image.
//! - [`measurement`]: pilots, combiners, noise and SNR bookkeeping.
//! - [`estimators`]: rank-one-atom OMP and CoSaMP over arbitrary bases, plus
//!   the least-squares baseline.
//! - [`bench`]: the Monte-Carlo NMSE harness, presets and CSV output.

// Parameter checks use `!(x > 0.0)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod channel;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod linalg;
pub mod measurement;
pub mod rng;
pub mod scattering;
pub mod validate;

pub use error::{Error, Result};
pub use linalg::CMat;
