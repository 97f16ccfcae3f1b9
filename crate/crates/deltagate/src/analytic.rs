//! Exact time-evolved wavefunctions for the three initial states.
//!
//! Every solution is built from the front kernel
//!     M(u, t; k) = (exp(i u^2 / 4t) / 2) * w(sqrt(it) (u/2t - k)),
//! the Moshinsky diffraction-in-time integral, with w the Faddeeva function
//! and sqrt(it) on the principal branch (sqrt(t) exp(i pi/4) for t > 0).
//!
//! For a step front theta(-x) exp(i k0 x) crossing a delta barrier of
//! complex coupling g (g = lambda real, g = -i lambda absorbing) the
//! solution for all x > 0 is
//!     psi(x, t) = M(x, t; k0) + C [ M(y, t; k0) - M(y, t; -i g/2) ],
//! with y = L + |x - L| the unfolded path length and
//!     C = -(i g/2) / (k0 + i g/2)
//! the plane-wave reflection amplitude; on the transmitted side the first
//! two terms combine into the transmission amplitude k0/(k0 + i g/2).

use crate::error::{Error, Result};
use crate::grid::{BarrierKind, BarrierSpec, InitialState, Provenance, SpacetimeGrid, SpacetimePoint, WaveField};
use crate::special::faddeeva;
use crate::ComplexValue;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const I: ComplexValue = ComplexValue::new(0.0, 1.0);

/// sqrt(it) for t > 0 on the principal branch: sqrt(t) * exp(i pi/4).
fn sqrt_it(t: f64) -> ComplexValue {
    let r = t.sqrt() * FRAC_1_SQRT_2;
    ComplexValue::new(r, r)
}

/// Front kernel M(u, t; k) = (e^{iu^2/4t}/2) w(sqrt(it)(u/2t - k)).
fn front_kernel(u: f64, t: f64, k: ComplexValue) -> Result<ComplexValue> {
    let phase = (I * (u * u / (4.0 * t))).exp();
    let arg = sqrt_it(t) * (ComplexValue::new(u / (2.0 * t), 0.0) - k);
    Ok(phase * faddeeva(arg)? / 2.0)
}

/// Step-front solution for arbitrary complex coupling; shared core.
fn psi_step_core(x: f64, t: f64, k0: f64, coupling: ComplexValue, l: f64) -> Result<ComplexValue> {
    let k0c = ComplexValue::new(k0, 0.0);
    let free = front_kernel(x, t, k0c)?;
    if coupling == ComplexValue::new(0.0, 0.0) {
        return Ok(free);
    }
    let half_ig = I * coupling / 2.0;
    let y = l + (x - l).abs();
    let refl = -half_ig / (k0c + half_ig);
    let barrier = front_kernel(y, t, k0c)? - front_kernel(y, t, -half_ig)?;
    Ok(free + refl * barrier)
}

fn require_positive_time(t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveTime { t })
    }
}

/// Wavefunction at `p` for the step front theta(-x) exp(i k0 x) with a real
/// or absent barrier.  Valid on both sides of the barrier (x > 0); negative
/// k0 is admitted (used by the sine-front decomposition).
pub fn psi_step(p: SpacetimePoint, k0: f64, b: &BarrierSpec) -> Result<ComplexValue> {
    require_positive_time(p.t)?;
    if b.kind() == BarrierKind::Imaginary {
        return Err(Error::WrongBarrierKind {
            expected: "real or absent",
        });
    }
    psi_step_core(p.x, p.t, k0, b.coupling(), b.position())
}

/// Step-front solution for the absorbing barrier -i lambda delta(x - L),
/// obtained from the real-barrier form by the continuation lambda -> -i
/// lambda (the scattering amplitudes are rational in the coupling, so the
/// continuation is exact; the oracle suite verifies it independently).
pub fn psi_step_imaginary(p: SpacetimePoint, k0: f64, lambda: f64, l: f64) -> Result<ComplexValue> {
    require_positive_time(p.t)?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            message: "absorbing strength must be >= 0",
        });
    }
    psi_step_core(p.x, p.t, k0, ComplexValue::new(0.0, -lambda), l)
}

/// Wavefunction for the sine front theta(-x) sin(k0 x): the antisymmetric
/// combination (1/2i)[psi_step(k0) - psi_step(-k0)] assembled explicitly so
/// the shared w-term of the two barrier parts is evaluated once.
pub fn psi_sine(p: SpacetimePoint, k0: f64, b: &BarrierSpec) -> Result<ComplexValue> {
    require_positive_time(p.t)?;
    let g = b.coupling();
    let (x, t, l) = (p.x, p.t, b.position());
    let kp = ComplexValue::new(k0, 0.0);
    let km = ComplexValue::new(-k0, 0.0);
    let free = front_kernel(x, t, kp)? - front_kernel(x, t, km)?;
    if !b.is_active() {
        return Ok(free / (2.0 * I));
    }
    let half_ig = I * g / 2.0;
    let y = l + (x - l).abs();
    let refl_p = -half_ig / (kp + half_ig);
    let refl_m = -half_ig / (km + half_ig);
    let shared = front_kernel(y, t, -half_ig)?;
    let barrier = refl_p * (front_kernel(y, t, kp)? - shared) - refl_m * (front_kernel(y, t, km)? - shared);
    Ok((free + barrier) / (2.0 * I))
}

/// Transmitted-side wavefunction for a Gaussian packet released at the
/// origin: with s = sqrt(sigma^2/4 + it), beta = sigma^2 k0 / 2 + i x and
/// the pole q = -i g / 2,
///   psi = [ 1/(sqrt(2 pi) s) - (i q / sqrt 2) w(beta/2s - s q) ]
///         * exp(beta^2/4s^2 - sigma^2 k0^2/4).
/// With a barrier present the form holds for x > L only; without one the
/// q = 0 reduction is the free packet, valid on the whole line, and no
/// side restriction applies.  t = 0 recovers the initial packet.
pub fn psi_gaussian(p: SpacetimePoint, sigma: f64, k0: f64, b: &BarrierSpec) -> Result<ComplexValue> {
    if p.t < 0.0 {
        return Err(Error::NonPositiveTime { t: p.t });
    }
    if b.is_active() && p.x <= b.position() {
        return Err(Error::NotTransmittedSide {
            x: p.x,
            l: b.position(),
        });
    }
    let s = ComplexValue::new(sigma * sigma / 4.0, p.t).sqrt();
    let beta = ComplexValue::new(sigma * sigma * k0 / 2.0, p.x);
    let growth = (beta * beta / (4.0 * s * s) - sigma * sigma * k0 * k0 / 4.0).exp();
    let free = 1.0 / ((2.0 * PI).sqrt() * s);
    if !b.is_active() {
        return Ok(free * growth);
    }
    let q = -I * b.coupling() / 2.0;
    let w = faddeeva(beta / (2.0 * s) - s * q)?;
    Ok((free - I * q * w / 2.0_f64.sqrt()) * growth)
}

/// Probability density |psi|^2.
pub fn density(psi: ComplexValue) -> f64 {
    psi.norm_sqr()
}

/// Evaluate the exact solution for `state` across a grid.
pub fn evaluate_field(grid: &SpacetimeGrid, state: &InitialState, b: &BarrierSpec) -> Result<WaveField> {
    evaluate_with(grid, |p| psi_state(p, state, b))
}

/// Sequential twin of [`evaluate_field`], kept unconditionally for
/// benchmarking the parallel speedup; results are identical.
pub fn evaluate_field_sequential(
    grid: &SpacetimeGrid,
    state: &InitialState,
    b: &BarrierSpec,
) -> Result<WaveField> {
    let values = (0..grid.len())
        .map(|i| psi_state(grid.point(i), state, b))
        .collect::<Result<Vec<_>>>()?;
    WaveField::new(grid.clone(), values, Provenance::Analytic)
}

/// Dispatch the exact solution for any initial state.
pub fn psi_state(p: SpacetimePoint, state: &InitialState, b: &BarrierSpec) -> Result<ComplexValue> {
    match *state {
        InitialState::StepPlane { k0 } => match b.kind() {
            BarrierKind::Imaginary => psi_step_imaginary(p, k0, b.strength(), b.position()),
            _ => psi_step(p, k0, b),
        },
        InitialState::SineFront { k0 } => psi_sine(p, k0, b),
        InitialState::Gaussian { sigma, k0 } => psi_gaussian(p, sigma, k0, b),
    }
}

/// Pointwise density difference with-barrier minus barrier-free for the
/// step front: Delta|psi|^2(x, t).  Real-valued field (zero imaginary parts).
pub fn delta_density(grid: &SpacetimeGrid, k0: f64, b: &BarrierSpec) -> Result<WaveField> {
    let free = BarrierSpec::absent(b.position())?;
    evaluate_with(grid, |p| {
        let with = psi_state(p, &InitialState::StepPlane { k0 }, b)?;
        let without = psi_step(p, k0, &free)?;
        Ok(ComplexValue::new(density(with) - density(without), 0.0))
    })
}

#[cfg(feature = "parallel")]
fn evaluate_with<F>(grid: &SpacetimeGrid, f: F) -> Result<WaveField>
where
    F: Fn(SpacetimePoint) -> Result<ComplexValue> + Sync + Send,
{
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| f(grid.point(i)))
        .collect::<Result<Vec<_>>>()?;
    WaveField::new(grid.clone(), values, Provenance::Analytic)
}

#[cfg(not(feature = "parallel"))]
fn evaluate_with<F>(grid: &SpacetimeGrid, f: F) -> Result<WaveField>
where
    F: Fn(SpacetimePoint) -> Result<ComplexValue> + Sync,
{
    let values = (0..grid.len())
        .map(|i| f(grid.point(i)))
        .collect::<Result<Vec<_>>>()?;
    WaveField::new(grid.clone(), values, Provenance::Analytic)
}
