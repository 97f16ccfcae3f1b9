use thiserror::Error;

/// Errors produced across the library.  Every fallible operation returns
/// [`Result`]; domain violations are reported with the offending value so
/// callers can surface actionable messages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Evaluation requested at a non-positive time for a solution that is
    /// singular at t = 0 (step and sine fronts carry t^(-1/2) structure).
    #[error("time must be positive for this solution, got t = {t}")]
    NonPositiveTime { t: f64 },

    /// A parameter violated a documented domain constraint.
    #[error("invalid parameter {name}: {message} (got {value})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        message: &'static str,
    },

    /// The Faddeeva reflection w(z) = 2 exp(-z^2) - w(-z) for Im z < 0
    /// overflows once Im(z)^2 - Re(z)^2 exceeds the exp range.
    #[error("faddeeva overflow for lower-half-plane argument ({re}, {im}): exp(im^2 - re^2) exceeds f64 range")]
    FaddeevaOverflow { re: f64, im: f64 },

    /// An operation was called with a barrier kind it does not model.
    #[error("operation requires a {expected} barrier kind")]
    WrongBarrierKind { expected: &'static str },

    /// Transmitted-side formulas require a detector beyond the barrier.
    #[error("detector position x = {x} must exceed the barrier position L = {l}")]
    NotTransmittedSide { x: f64, l: f64 },

    /// Reflected-side formulas require 0 < x < L.
    #[error("reflected-side evaluation requires 0 < x < L, got x = {x} with L = {l}")]
    NotReflectedSide { x: f64, l: f64 },

    /// The oscillatory reflected-side term is only usable while its phase
    /// argument L(L-x)/t stays above the documented threshold.
    #[error("reflected-side series inapplicable: phase argument L(L-x)/t = {argument} is below the threshold {threshold}")]
    OscillatoryPhaseTooSmall { argument: f64, threshold: f64 },

    /// The short-time inequality chain leaves no usable window after the
    /// safety factor is applied.
    #[error("no valid short-time window: need t in ({t_min}, {t_max}) after safety factor {safety}")]
    EmptyValidityWindow { t_min: f64, t_max: f64, safety: f64 },

    /// Gaussian regime formulas need the packet released well behind the
    /// barrier; the guard x + L > factor * sigma^2 k0 failed.
    #[error("gaussian regime guard violated: x + L = {lhs} must exceed {factor} * sigma^2 * k0 = {rhs}")]
    GaussianRegimeGuard { lhs: f64, rhs: f64, factor: f64 },

    /// Adaptive quadrature exhausted its panel budget before reaching the
    /// requested tolerance; the achieved error estimate is reported.
    #[error("spectral quadrature did not converge: error estimate {achieved:.3e} above tolerance {tolerance:.3e} after {panels} panels")]
    QuadratureNotConverged {
        achieved: f64,
        tolerance: f64,
        panels: usize,
    },

    /// Exponent fitting needs at least this many usable samples.
    #[error("exponent fit needs at least {needed} samples in the window, got {got}")]
    TooFewSamples { got: usize, needed: usize },

    /// The fitted signal changed sign inside the window, which signals a
    /// mis-chosen window rather than a power law.
    #[error("signal changes sign inside the fit window near t = {t}; the window does not isolate a single power law")]
    SignChangeInWindow { t: f64 },

    /// Classifier acceptance bands must not overlap.
    #[error("classifier bands overlap: real band ({real_lo}, {real_hi}) and imaginary band ({imag_lo}, {imag_hi})")]
    OverlappingBands {
        real_lo: f64,
        real_hi: f64,
        imag_lo: f64,
        imag_hi: f64,
    },

    /// Classification consumes transmitted-side data only.
    #[error("classifier accepts transmitted-side samples only: sample at x = {x} lies at or behind the barrier L = {l}")]
    ReflectedSideSamples { x: f64, l: f64 },

    /// All samples of a detector series must share one position.
    #[error("detector series mixes positions: found x = {first} and x = {other}")]
    MixedDetectorPositions { first: f64, other: f64 },

    /// A lattice description failed validation.
    #[error("invalid lattice: {message}")]
    InvalidLattice { message: String },

    /// Lattice propagation handles Gaussian packets only; sharp-front
    /// states have distributional initial data with no faithful lattice
    /// sample and are covered by the spectral reference.
    #[error("lattice propagation supports Gaussian initial states only")]
    UnsupportedInitialState,
}

pub type Result<T> = std::result::Result<T, Error>;
