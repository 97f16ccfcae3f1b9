//! Mach-Zehnder readout of the barrier's short-time signature.
//!
//! One arm of the interferometer contains the delta barrier, the other is
//! free; both beam splitters share real amplitudes c1, c2 with
//! c1^2 + c2^2 = 1 and imbalance eps defined by c1^2 = (1 - eps)/2,
//! c2^2 = (1 + eps)/2.  The detected amplitude is the arm-combination
//! model
//!     psi_MZ = sqrt(it/pi) (e^{i x^2/4t} / x) [c2^2 B_free(t) - c1^2 B_barrier(t)],
//! built from the second-order transmitted step brackets; the detector
//! port is chosen so that the short-time limit reads eps + i lambda t/2x
//! (the opposite port would carry (c1^2 - c2^2) = -eps).  A nearly dark
//! port amplifies the barrier term: the leading barrier-dependent density
//! grows as t^3 for a real barrier but t^2 for an absorbing one.

use crate::error::{Error, Result};
use crate::grid::{BarrierKind, BarrierSpec, SpacetimePoint};
use crate::shorttime::{diffraction_front, step_bracket};
use crate::ComplexValue;
use std::f64::consts::PI;

/// The short-time readout forms drop eps^2 corrections against 1; beyond
/// this imbalance they stop being meaningful.
pub const EPSILON_LIMIT: f64 = 0.2;

/// Beam-splitter amplitudes, imbalance, barrier arm and detector distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerSpec {
    c1: f64,
    c2: f64,
    epsilon: f64,
    barrier: BarrierSpec,
    x: f64,
}

impl InterferometerSpec {
    /// Build from both splitter amplitudes; they must satisfy
    /// c1^2 + c2^2 = 1 to 1e-14.
    pub fn new(c1: f64, c2: f64, barrier: BarrierSpec, x: f64) -> Result<Self> {
        if !(c1 >= 0.0 && c1.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "c1",
                value: c1,
                message: "splitter amplitude must be finite and >= 0",
            });
        }
        if !(c2 >= 0.0 && c2.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "c2",
                value: c2,
                message: "splitter amplitude must be finite and >= 0",
            });
        }
        let defect = (c1 * c1 + c2 * c2 - 1.0).abs();
        if defect > 1e-14 {
            return Err(Error::InvalidParameter {
                name: "c2",
                value: c2,
                message: "splitter amplitudes must satisfy c1^2 + c2^2 = 1 to 1e-14",
            });
        }
        let epsilon = c2 * c2 - c1 * c1;
        Self::validate_geometry(epsilon, barrier, x)?;
        Ok(Self {
            c1,
            c2,
            epsilon,
            barrier,
            x,
        })
    }

    /// Build from the first splitter amplitude, c2 = sqrt(1 - c1^2).
    pub fn from_c1(c1: f64, barrier: BarrierSpec, x: f64) -> Result<Self> {
        if !(c1 > 0.0 && c1 < 1.0) {
            return Err(Error::InvalidParameter {
                name: "c1",
                value: c1,
                message: "need 0 < c1 < 1",
            });
        }
        let c2 = (1.0 - c1 * c1).sqrt();
        let epsilon = c2 * c2 - c1 * c1;
        Self::validate_geometry(epsilon, barrier, x)?;
        Ok(Self {
            c1,
            c2,
            epsilon,
            barrier,
            x,
        })
    }

    /// Build from the imbalance: c1^2 = (1 - eps)/2, c2^2 = (1 + eps)/2.
    pub fn from_imbalance(epsilon: f64, barrier: BarrierSpec, x: f64) -> Result<Self> {
        Self::validate_geometry(epsilon, barrier, x)?;
        Ok(Self {
            c1: ((1.0 - epsilon) / 2.0).sqrt(),
            c2: ((1.0 + epsilon) / 2.0).sqrt(),
            epsilon,
            barrier,
            x,
        })
    }

    fn validate_geometry(epsilon: f64, barrier: BarrierSpec, x: f64) -> Result<()> {
        if !(epsilon.abs() <= EPSILON_LIMIT) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
                message: "imbalance beyond the small-epsilon readout regime",
            });
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "x",
                value: x,
                message: "detector distance must be positive and finite",
            });
        }
        if barrier.is_active() && x <= barrier.position() {
            return Err(Error::NotTransmittedSide {
                x,
                l: barrier.position(),
            });
        }
        Ok(())
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn barrier(&self) -> &BarrierSpec {
        &self.barrier
    }

    /// Nominal barrier-to-detector distance used by the curve operations.
    pub fn x(&self) -> f64 {
        self.x
    }
}

fn eval_bracket(coeffs: &[ComplexValue; 3], t: f64) -> ComplexValue {
    coeffs[0] + (coeffs[1] + coeffs[2] * t) * t
}

fn brackets_at(x: f64, k0: f64, spec: &InterferometerSpec, t: f64) -> (ComplexValue, ComplexValue) {
    let free = eval_bracket(&step_bracket(x, k0, ComplexValue::new(0.0, 0.0)), t);
    let barrier = eval_bracket(&step_bracket(x, k0, spec.barrier.coupling()), t);
    (free, barrier)
}

/// Detected amplitude of the arm-combination model at `p` (usually
/// p.x = spec.x(); other x values scan the detector position).  Perfectly
/// balanced splitters with no barrier give an exactly dark port.
pub fn mz_output(p: SpacetimePoint, k0: f64, spec: &InterferometerSpec) -> Result<ComplexValue> {
    if p.t <= 0.0 {
        return Err(Error::NonPositiveTime { t: p.t });
    }
    if spec.barrier.is_active() && p.x <= spec.barrier.position() {
        return Err(Error::NotTransmittedSide {
            x: p.x,
            l: spec.barrier.position(),
        });
    }
    let (free, barrier) = brackets_at(p.x, k0, spec, p.t);
    Ok(diffraction_front(p.x, p.t) * (spec.c2 * spec.c2 * free - spec.c1 * spec.c1 * barrier))
}

/// Leading-order detected density:
///   real barrier:      (t/pi x^2) [eps^2 + (lambda t/2x)^2]
///   absorbing barrier: (t eps/pi x^2) [eps + lambda t/x]
/// The barrier-dependent term is cubic in t for a real barrier but only
/// parabolic for an absorbing one — the readout the classifier exploits.
pub fn mz_density_shorttime(
    p: SpacetimePoint,
    _k0: f64,
    spec: &InterferometerSpec,
) -> Result<f64> {
    if p.t <= 0.0 {
        return Err(Error::NonPositiveTime { t: p.t });
    }
    let (x, t) = (p.x, p.t);
    let eps = spec.epsilon;
    let lam = spec.barrier.strength();
    Ok(match spec.barrier.kind() {
        BarrierKind::Real | BarrierKind::Absent => {
            let u = lam * t / (2.0 * x);
            t / (PI * x * x) * (eps * eps + u * u)
        }
        BarrierKind::Imaginary => t * eps / (PI * x * x) * (eps + lam * t / x),
    })
}

/// Barrier-induced part of the detected density at the nominal detector:
/// Delta(t) = |psi_MZ|^2 - eps^2 |psi_MZ at lambda = 0|^2, per time sample.
/// Identically zero without a barrier.
pub fn mz_delta_density_curve(
    t_grid: &[f64],
    spec: &InterferometerSpec,
    k0: f64,
) -> Result<Vec<(f64, f64)>> {
    let x = spec.x;
    t_grid
        .iter()
        .map(|&t| {
            if t <= 0.0 {
                return Err(Error::NonPositiveTime { t });
            }
            // both arms carry the same bracket: the difference is zero by
            // construction, not merely to rounding
            if !spec.barrier.is_active() {
                return Ok((t, 0.0));
            }
            let (free, barrier) = brackets_at(x, k0, spec, t);
            let mixed = spec.c2 * spec.c2 * free - spec.c1 * spec.c1 * barrier;
            let eps = spec.epsilon;
            let delta = t / (PI * x * x) * (mixed.norm_sqr() - eps * eps * free.norm_sqr());
            Ok((t, delta))
        })
        .collect()
}
