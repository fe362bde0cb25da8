//! Simulation and diagnostics toolkit for periodically kicked p-spin models.
//!
//! The crate covers the full pipeline from exact collective-spin operators in
//! the Dicke basis, through Floquet (one-period) unitaries and stroboscopic
//! evolution, to the diagnostics used to map out time-crystalline phases:
//! eigenphase clustering and spacing-ratio statistics, infinite-temperature
//! OTOCs, and the exact mean-field (thermodynamic-limit) map on the Bloch
//! sphere with its phase-space-averaged response.
//!
//! Conventions shared by every module:
//! - Dicke basis ordered `M = S, S-1, ..., -S` (index 0 is the stretched
//!   state), Hilbert dimension `N + 1` for `N` spins.
//! - The drive period is fixed to `T = 1`; "time" is the integer kick count.
//! - DFT bins are `omega_k = 2*pi*k / T_len`, reported over the folded range
//!   `omega/2pi` in `[0, 1/2]`.

use blas_src as _;

pub mod algebra;
pub mod classical;
pub mod critical;
pub mod error;
pub mod exec;
pub mod floquet;
pub mod otoc;
pub mod resonance;
pub mod series;
pub mod spectral;
pub mod sweep;

pub use algebra::{DensityOperator, SpinAlgebra, StateVector};
pub use error::{Error, Result};
pub use floquet::{DriveMode, FloquetOperator, ModelParams};
pub use series::{PowerSpectrum, TimeSeries};
