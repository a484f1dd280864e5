//! Partially postselected photon filtering.
//!
//! The crate is organized around the physical pipeline:
//!
//! - [`fock`]: exact truncated multimode Fock-space engine (beam splitters,
//!   diagonal Kraus filters, number projections) and the photon-catalysis
//!   receivers built on top of it.
//! - [`scatter`]: lossless Drude slab treated as a frequency-dependent beam
//!   splitter, with an independent transfer-matrix oracle.
//! - [`spectra`]: single-photon frequency distributions and spectral-weight
//!   integration.
//! - [`filter`]: closed-form transmission/reflection enhancement under the
//!   filter `F = |0><0| + p|1><1|`.
//! - [`montecarlo`]: heralding-on-zero-photons coincidence counting, the
//!   estimator `M`, Gaussian fluctuations and MSE.
//! - [`imaging`]: pixel-grid radar imaging of the "207" target and contrast
//!   metrics.

pub mod error;
pub mod filter;
pub mod fock;
pub mod imaging;
pub mod montecarlo;
pub mod quad;
pub mod rng;
pub mod scatter;
pub mod spectra;

pub use error::{Error, Result};
