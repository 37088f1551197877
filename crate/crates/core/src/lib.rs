//! Sparse recovery of frequency-sparse multicomponent signals from randomly
//! selected time samples.
//!
//! Three threshold-based reconstruction algorithms are provided, all working
//! against the same partial inverse-DFT sensing model:
//!
//! - orthogonal matching pursuit ([`recovery::omp_recover`]),
//! - iterative hard thresholding ([`recovery::iht_recover`]),
//! - single iteration reconstruction ([`recovery::sira_recover`]), which
//!   thresholds the DFT of the zero-filled available samples and solves for
//!   the amplitudes of the detected bins by least squares.
//!
//! [`bench`] runs seeded Monte-Carlo sweeps over measurement counts and
//! [`cli`] drives it from a flat text config, emitting plot-ready CSV.

pub mod bench;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod recovery;
pub mod sensing;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
