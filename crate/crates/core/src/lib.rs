//! Numerical laboratory for the cyclic Toda (Hitchin) system with
//! subharmonic weights, the entropy of the resulting metric ratios, and the
//! large-rank asymptotics of the Cartan-spectrum baseline ensemble.
//!
//! Modules, bottom-up:
//!
//! * [`shannon`]: finite distributions, Shannon entropy, ratio domination.
//! * [`spectrum`]: Cartan spectra `λ_j = j(r-j)`, the β-ensemble, beta
//!   integrals and the `r → ∞` limit of `S_{r,β} - log r`.
//! * [`weights`]: holomorphic r-differentials and their weight functions.
//! * [`grid`]: planar lattices on discs and rectangles.
//! * [`toda`]: discretization, Newton solver, metric fields, inequality and
//!   entropy checks.
//! * [`persist`]: on-disk solution directories.

pub mod error;
pub mod grid;
pub mod numeric;
pub mod persist;
pub mod shannon;
pub mod spectrum;
pub mod toda;
pub mod weights;

pub use error::{Error, Result};
