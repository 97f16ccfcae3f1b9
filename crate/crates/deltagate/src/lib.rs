//! Time evolution of sharp-edged and Gaussian wavefronts across a single
//! delta barrier, real (elastic) or imaginary (absorbing), in reduced units
//! hbar = 1, 2m = 1 (dispersion exp(-i k^2 t)).
//!
//! The crate provides four layers:
//!  - [`special`]: a Faddeeva-function kernel accurate to ~1e-13,
//!  - [`analytic`]: exact closed-form wavefunctions for step, sine and
//!    Gaussian initial states on both sides of the barrier,
//!  - [`shorttime`]: fixed-order small-t expansions of amplitudes, densities
//!    and phases, exposing the barrier's leading-order signature,
//!  - [`oracle`]: two independent numerical checks (Crank-Nicolson lattice
//!    propagation and adaptive spectral quadrature),
//! plus an interferometric readout model ([`interferometer`]) and a
//! barrier-kind classifier ([`classifier`]) built on the scaling exponents.
//!
//! With the default `parallel` feature, field evaluations over grids fan out
//! over a rayon worker pool; disabling it yields a dependency-free
//! sequential build with identical results.

pub mod analytic;
pub mod classifier;
pub mod error;
pub mod grid;
pub mod interferometer;
pub mod oracle;
pub mod shorttime;
pub mod special;

/// Complex scalar used throughout (64-bit components).
pub type ComplexValue = num_complex::Complex64;

pub use error::{Error, Result};
pub use grid::{
    BarrierKind, BarrierSpec, InitialState, Provenance, SpacetimeGrid, SpacetimePoint, WaveField,
};
