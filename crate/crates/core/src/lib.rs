//! Weak-form sparse regression for identifying nonlinear PDE models from
//! noisy, uniformly gridded spatiotemporal data.
//!
//! The pipeline:
//!
//! 1. [`field`] holds the data `u(x, t)`, injects noise, downsamples and
//!    characterises it (spectra, correlation scales).
//! 2. [`terms`] describes candidate terms `a · g(x,t) · ∂_t^νt ∂_x^νx (u^p)` and
//!    moves every derivative onto the weight by integration by parts.
//! 3. [`weights`] evaluates the windowed trigonometric weights and their exact
//!    derivatives.
//! 4. [`assembly`] integrates each term against every (domain, weight) pair with
//!    the composite trapezoidal rule, producing the library matrix `Q`.
//! 5. [`regression`] finds the unit vector `c` minimising `‖Qc‖` and prunes
//!    terms one by one while the residual grows by less than a factor `γ`.
//! 6. [`experiments`] runs seeded ensembles and parameter sweeps.
//!
//! [`ks`] generates Kuramoto-Sivashinsky reference data.

pub mod assembly;
pub mod error;
pub mod experiments;
pub mod field;
pub mod ks;
pub mod regression;
pub mod terms;
pub mod weights;

pub use assembly::{IntegrationDomain, LibraryMatrix};
pub use error::{Error, Result};
pub use field::{Axis, Field2D, SpectrumProfile};
pub use regression::{ColumnScaling, SparseModel};
pub use terms::{CoefficientBasis, MonomialTerm, WeakTerm};
pub use weights::{Parity, WeightSpec};
