//! Stokes multipliers of `-Phi'' + (X^m + a_1 X^{m-1} + ... + a_m) Phi = 0`.
//!
//! The crate computes the canonical solution `Phi_0` decaying in the sector
//! around the positive real axis, its rotated companions `Phi_{+-1}`, the
//! Stokes multiplier `C(a)` in the connection formula
//! `Phi_{-1} = C(a) Phi_0 + Phi_1`, and the zeros of `lambda -> C(a, lambda)`
//! and `lambda -> f_0(lambda) = Phi_0(0, lambda)`. The `verify` module turns
//! the structural identities these objects satisfy into numerical checks.
//!
//! Data-parallel loops go through [`par`]; build without the default
//! `parallel` feature for a purely sequential library.

pub mod error;
pub mod integrator;
pub mod par;
pub mod potential;
pub mod quadrature;
pub mod stokes;
pub mod verify;
pub mod zeros;

pub use error::{Error, Result};
pub use integrator::{canonical_origin, RayConfig, ScaledPair};
pub use par::Execution;
pub use potential::{AsymptoticFrame, Potential, C64};
