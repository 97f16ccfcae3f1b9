//! Faddeeva function w(z) = exp(-z^2) erfc(-iz) and the scaled complementary
//! error function, accurate to ~1e-13 relative over the working domain.
//!
//! Upper half-plane strategy, region-adaptive:
//!  - Im z <= 10: trapezoidal discretization of the Hilbert-transform
//!    representation with an exponentially small pole-sum correction
//!    (Chiarella & Reichel's corrected trapezoidal rule).  Two interleaved
//!    node lattices avoid the loss of accuracy when Re z falls near a node.
//!  - Im z > 10: Laplace continued fraction, which converges rapidly far
//!    from the real axis.
//! The lower half-plane uses the reflection w(z) = 2 exp(-z^2) - w(-z),
//! which overflows once Im(z)^2 - Re(z)^2 exceeds the exp range; that
//! domain is reported as an error rather than returning infinities.

use crate::error::{Error, Result};
use crate::ComplexValue;
use std::f64::consts::PI;

/// Trapezoid step of the corrected rule; chosen together with the node
/// count so the discretization error sits below 1e-13 for Im z <= 10.
const H: f64 = 0.45;

/// Lattice selection rule: use the integer lattice when Re z is at least
/// this many steps (in units of H) away from the nearest integer node,
/// otherwise the half-offset lattice.
const LATTICE_MARGIN: f64 = 0.25;

/// Above this height the Laplace continued fraction takes over.
const CF_HEIGHT: f64 = 10.0;

/// Continued-fraction depth; 24 levels hold ~1e-14 for Im z > 10.
const CF_DEPTH: u32 = 24;

/// exp overflow threshold for the lower-half-plane reflection.
const EXP_LIMIT: f64 = 709.0;

const FRAC_1_SQRT_PI: f64 = 0.5641895835477563;

/// Integer-lattice nodes n*H and weights exp(-(n*H)^2).
const TRAP_NODES_INT: [f64; 33] = [
    -7.2,
    -6.75,
    -6.3,
    -5.8500000000000005,
    -5.4,
    -4.95,
    -4.5,
    -4.05,
    -3.6,
    -3.15,
    -2.7,
    -2.25,
    -1.8,
    -1.35,
    -0.9,
    -0.45,
    0.0,
    0.45,
    0.9,
    1.35,
    1.8,
    2.25,
    2.7,
    3.15,
    3.6,
    4.05,
    4.5,
    4.95,
    5.4,
    5.8500000000000005,
    6.3,
    6.75,
    7.2,
];
const TRAP_WTS_INT: [f64; 33] = [
    3.06319086457743e-23,
    1.6310139226701858e-20,
    5.792312885394871e-18,
    1.3720094196451233e-15,
    2.167568882618954e-13,
    2.2840176579937026e-11,
    1.6052280551856116e-09,
    7.52462325764483e-08,
    2.352575200009771e-06,
    4.9058357456207724e-05,
    0.0006823280527563759,
    0.006329715427485747,
    0.039163895098987066,
    0.1616211924653392,
    0.4448580662229411,
    0.8166864825981108,
    1.0,
    0.8166864825981108,
    0.4448580662229411,
    0.1616211924653392,
    0.039163895098987066,
    0.006329715427485747,
    0.0006823280527563759,
    4.9058357456207724e-05,
    2.352575200009771e-06,
    7.52462325764483e-08,
    1.6052280551856116e-09,
    2.2840176579937026e-11,
    2.167568882618954e-13,
    1.3720094196451233e-15,
    5.792312885394871e-18,
    1.6310139226701858e-20,
    3.06319086457743e-23,
];

/// Half-offset lattice nodes (n + 1/2)*H and weights exp(-node^2).
const TRAP_NODES_HALF: [f64; 33] = [
    -6.9750000000000005,
    -6.525,
    -6.075,
    -5.625000000000001,
    -5.175000000000001,
    -4.7250000000000005,
    -4.275,
    -3.8249999999999997,
    -3.375,
    -2.925,
    -2.475,
    -2.025,
    -1.575,
    -1.125,
    -0.675,
    -0.225,
    0.225,
    0.675,
    1.125,
    1.5750000000000002,
    2.025,
    2.475,
    2.9250000000000003,
    3.375,
    3.825,
    4.2749999999999995,
    4.725,
    5.175,
    5.625,
    6.075,
    6.5249999999999995,
    6.975,
    7.425,
];
const TRAP_WTS_HALF: [f64; 33] = [
    7.435360353121773e-22,
    3.2332627505846425e-19,
    9.377578564319578e-17,
    1.8140579586316534e-14,
    2.3405738068898912e-12,
    2.014207725898966e-10,
    1.1561040142789227e-08,
    4.4258867371414475e-07,
    1.1300936043146307e-05,
    0.0001924594645839572,
    0.002186124363389384,
    0.01656232071581157,
    0.0836909024288926,
    0.28206295169381546,
    0.6340515618580675,
    0.9506350918586984,
    0.9506350918586984,
    0.6340515618580675,
    0.28206295169381546,
    0.08369090242889253,
    0.01656232071581157,
    0.002186124363389384,
    0.00019245946458395686,
    1.1300936043146307e-05,
    4.4258867371414316e-07,
    1.1561040142789308e-08,
    2.0142077258989876e-10,
    2.340573806889916e-12,
    1.814057958631673e-14,
    9.377578564319578e-17,
    3.233262750584665e-19,
    7.435360353121826e-22,
    1.1404435114244008e-24,
];

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
///
/// Errors with [`Error::FaddeevaOverflow`] for lower-half-plane arguments
/// where the reflection term exp(-z^2) exceeds the f64 range.
pub fn faddeeva(z: ComplexValue) -> Result<ComplexValue> {
    if z.im >= 0.0 {
        Ok(w_upper(z))
    } else {
        if z.im * z.im - z.re * z.re > EXP_LIMIT {
            return Err(Error::FaddeevaOverflow { re: z.re, im: z.im });
        }
        Ok(2.0 * (-z * z).exp() - w_upper(-z))
    }
}

/// Scaled complementary error function erfcx(z) = exp(z^2) erfc(z) = w(iz).
pub fn erfc_scaled(z: ComplexValue) -> Result<ComplexValue> {
    faddeeva(ComplexValue::new(-z.im, z.re))
}

fn w_upper(z: ComplexValue) -> ComplexValue {
    debug_assert!(z.im >= 0.0);
    if z.im > CF_HEIGHT {
        return w_continued_fraction(z);
    }
    // Pick the lattice whose nodes stay clear of Re z; both carry the same
    // truncation error, so the choice only controls roundoff in 1/(z - node).
    let dist = (z.re / H - (z.re / H).round()).abs();
    let (nodes, weights, sigma) = if dist >= LATTICE_MARGIN {
        (&TRAP_NODES_INT, &TRAP_WTS_INT, 1.0)
    } else {
        (&TRAP_NODES_HALF, &TRAP_WTS_HALF, -1.0)
    };
    let mut sum = ComplexValue::new(0.0, 0.0);
    for (node, wt) in nodes.iter().zip(weights.iter()) {
        sum += *wt / (z - *node);
    }
    let val = ComplexValue::new(0.0, H / PI) * sum;
    // The trapezoid picks up the poles of the interpolating cotangent; the
    // closed-form correction removes them.  Two algebraically equivalent
    // forms keep the exponentials bounded on either side of Im z = pi/H.
    let e = (-z * z).exp();
    let corr = if z.im <= PI / H {
        2.0 * e / (1.0 - sigma * (ComplexValue::new(0.0, -2.0 * PI / H) * z).exp())
    } else {
        let g = (ComplexValue::new(0.0, 2.0 * PI / H) * z).exp();
        -2.0 * sigma * e * g / (1.0 - sigma * g)
    };
    val + corr
}

fn w_continued_fraction(z: ComplexValue) -> ComplexValue {
    let mut f = z;
    for n in (1..=CF_DEPTH).rev() {
        f = z - (f64::from(n) / 2.0) / f;
    }
    ComplexValue::new(0.0, FRAC_1_SQRT_PI) / f
}
