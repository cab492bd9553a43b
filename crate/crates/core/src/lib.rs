//! Higher-order phase reduction for networks of delay-coupled oscillators.
//!
//! The [`homological`] solver expands the invariant torus of a weakly
//! coupled network and its reduced phase dynamics order by order in the
//! coupling strength, using the truncated Fourier algebra in [`fourier`].
//! [`stuart_landau`] supplies closed-form results for two delay-coupled
//! Stuart-Landau oscillators, [`dde`] integrates the full delay system, and
//! [`bifurcation`] analyses stability of in-phase and anti-phase locking.

pub mod bifurcation;
pub mod dde;
pub mod error;
pub mod exec;
pub mod fourier;
pub mod homological;
pub mod stuart_landau;

pub use error::{Error, Result};
