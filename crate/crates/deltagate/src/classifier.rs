//! Decide whether the barrier is absent, real or absorbing from sampled
//! short-time density differences.
//!
//! The barrier-induced part of the transmitted density grows as t^3 for a
//! real barrier but as t^2 for an absorbing one.  Fitting the log-log
//! slope of |Delta|psi|^2| against t over an early-time window therefore
//! separates the three cases:
//!   - below the noise floor             -> Absent
//!   - exponent within 3 +- band, good fit -> Real
//!   - exponent within 2 +- band, good fit -> Imaginary
//!   - anything else                     -> Indeterminate
//! The window matters: beyond t ~ x/lambda (or once the main front at
//! t ~ x/k0 arrives) the density saturates and the fit degrades, which the
//! r^2 threshold catches as Indeterminate rather than a wrong verdict.

use crate::error::{Error, Result};
use std::fmt;

/// Default acceptance band half-width around the exponents 3 and 2.
pub const DEFAULT_BAND_HALF_WIDTH: f64 = 0.25;
/// Default minimum coefficient of determination for a trusted fit.
pub const DEFAULT_R2_THRESHOLD: f64 = 0.995;
/// Default noise floor for the Absent verdict, relative to the largest
/// barrier-free density in the window.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-12;
/// Default safety divisor applied to the validity-time estimate.
pub const DEFAULT_SAFETY: f64 = 10.0;
/// Default ratio t_max/t_min of the suggested fit window.
pub const DEFAULT_WINDOW_SPAN: f64 = 10.0;
/// Default number of samples over the suggested window.
pub const DEFAULT_GRID_POINTS: usize = 12;

/// Least-squares power-law fit of |Delta|psi|^2| ~ a t^n in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    /// Fitted exponent n.
    pub exponent: f64,
    /// Fitted ln a (so rescaling the data shifts only this field).
    pub intercept: f64,
    /// Coefficient of determination of the log-log regression.
    pub r_squared: f64,
    /// Time range (t_min, t_max) of the samples actually used.
    pub window: (f64, f64),
    /// Number of samples used.
    pub n_points: usize,
}

/// Outcome of a classification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Absent,
    Real,
    Imaginary,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Absent => "absent",
            Verdict::Real => "real",
            Verdict::Imaginary => "imaginary",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

/// Acceptance bands and fit-quality thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    /// Exponent band (lo, hi) accepted as a real barrier.
    pub real_band: (f64, f64),
    /// Exponent band (lo, hi) accepted as an absorbing barrier.
    pub imag_band: (f64, f64),
    /// Minimum r^2 below which the verdict is Indeterminate.
    pub r2_threshold: f64,
    /// Absent verdict when max|Delta| < noise_floor * max free density.
    pub noise_floor: f64,
    /// Fit window override; None uses the full data range.
    pub window: Option<(f64, f64)>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            real_band: (3.0 - DEFAULT_BAND_HALF_WIDTH, 3.0 + DEFAULT_BAND_HALF_WIDTH),
            imag_band: (2.0 - DEFAULT_BAND_HALF_WIDTH, 2.0 + DEFAULT_BAND_HALF_WIDTH),
            r2_threshold: DEFAULT_R2_THRESHOLD,
            noise_floor: DEFAULT_NOISE_FLOOR,
            window: None,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("real_band", self.real_band), ("imag_band", self.imag_band)] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: lo,
                    message: "acceptance band must be a finite interval (lo, hi)",
                });
            }
        }
        // the verdict must be unambiguous: bands may not intersect
        if self.real_band.0 < self.imag_band.1 && self.imag_band.0 < self.real_band.1 {
            return Err(Error::OverlappingBands {
                real_lo: self.real_band.0,
                real_hi: self.real_band.1,
                imag_lo: self.imag_band.0,
                imag_hi: self.imag_band.1,
            });
        }
        if !(self.r2_threshold > 0.0 && self.r2_threshold <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "r2_threshold",
                value: self.r2_threshold,
                message: "need 0 < r2_threshold <= 1",
            });
        }
        if !(self.noise_floor > 0.0) || !self.noise_floor.is_finite() {
            return Err(Error::InvalidParameter {
                name: "noise_floor",
                value: self.noise_floor,
                message: "noise floor must be positive and finite",
            });
        }
        if let Some((lo, hi)) = self.window {
            if !(0.0 < lo && lo < hi) || !hi.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "window",
                    value: lo,
                    message: "window must satisfy 0 < t_min < t_max",
                });
            }
        }
        Ok(())
    }
}

/// Verdict, the fit behind it (absent for all-zero data), and the
/// thresholds that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    pub fit: Option<ScalingFit>,
    pub thresholds: ClassifierConfig,
}

/// One detector sample: density difference and barrier-free reference
/// density at position x, time t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorPoint {
    pub x: f64,
    pub t: f64,
    pub delta: f64,
    pub free_density: f64,
}

/// Samples from a single transmitted-side detector.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSeries {
    points: Vec<DetectorPoint>,
    barrier_position: f64,
}

impl DetectorSeries {
    /// Validate that all samples share one detector position on the
    /// transmitted side of the barrier at `barrier_position`.
    pub fn new(points: Vec<DetectorPoint>, barrier_position: f64) -> Result<Self> {
        let first = match points.first() {
            Some(p) => p.x,
            None => {
                return Err(Error::TooFewSamples { got: 0, needed: 1 });
            }
        };
        for p in &points {
            if p.x != first {
                return Err(Error::MixedDetectorPositions {
                    first,
                    other: p.x,
                });
            }
            if p.x <= barrier_position {
                return Err(Error::ReflectedSideSamples {
                    x: p.x,
                    l: barrier_position,
                });
            }
            if !(p.t > 0.0) || !p.t.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "t",
                    value: p.t,
                    message: "sample times must be positive and finite",
                });
            }
            if !p.delta.is_finite() || !(p.free_density >= 0.0) || !p.free_density.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "delta",
                    value: p.delta,
                    message: "sample values must be finite (free density >= 0)",
                });
            }
        }
        Ok(Self {
            points,
            barrier_position,
        })
    }

    pub fn points(&self) -> &[DetectorPoint] {
        &self.points
    }

    /// Shared detector position.
    pub fn x(&self) -> f64 {
        self.points[0].x
    }

    pub fn barrier_position(&self) -> f64 {
        self.barrier_position
    }
}

/// Latest time at which the fixed-order short-time forms are trustworthy
/// at distance x, divided by `safety`: min(x/k0, x/lambda, x^2) / safety.
/// Pass lambda = 0 for a barrier-free run.
pub fn suggested_window(x: f64, k0: f64, lambda: f64, safety: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x,
            message: "detector distance must be positive and finite",
        });
    }
    if !(safety >= 1.0) || !safety.is_finite() {
        return Err(Error::InvalidParameter {
            name: "safety",
            value: safety,
            message: "safety divisor must be >= 1",
        });
    }
    let mut t_max = (x * x).min(if k0.abs() > 0.0 { x / k0.abs() } else { f64::MAX });
    if lambda > 0.0 {
        t_max = t_max.min(x / lambda);
    }
    t_max /= safety;
    let t_min = t_max / DEFAULT_WINDOW_SPAN;
    if !(t_min > 0.0 && t_min < t_max) || !t_max.is_finite() {
        return Err(Error::EmptyValidityWindow {
            t_min,
            t_max,
            safety,
        });
    }
    Ok((t_min, t_max))
}

/// Logarithmically spaced sample times covering [t_min, t_max].
pub fn log_time_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(0.0 < t_min && t_min < t_max) || !t_max.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t_min",
            value: t_min,
            message: "need 0 < t_min < t_max",
        });
    }
    if n < 2 {
        return Err(Error::TooFewSamples { got: n, needed: 2 });
    }
    let ratio = t_max / t_min;
    Ok((0..n)
        .map(|i| t_min * ratio.powf(i as f64 / (n - 1) as f64))
        .collect())
}

/// Least-squares fit of ln|Delta| against ln t over the samples inside
/// `window`.  The sign of Delta must not change inside the window (a flip
/// signals that the window extends past the short-time regime); the
/// magnitude is fitted.
pub fn fit_exponent(samples: &[(f64, f64)], window: (f64, f64)) -> Result<ScalingFit> {
    let (w_lo, w_hi) = window;
    if !(0.0 < w_lo && w_lo < w_hi) || !w_hi.is_finite() {
        return Err(Error::InvalidParameter {
            name: "window",
            value: w_lo,
            message: "window must satisfy 0 < t_min < t_max",
        });
    }
    let mut used: Vec<(f64, f64)> = Vec::new();
    let mut sign = 0.0;
    for &(t, delta) in samples {
        if t < w_lo || t > w_hi {
            continue;
        }
        // an exact zero is a crossing witness just like a sign flip
        if delta == 0.0 || (sign != 0.0 && delta.signum() != sign) {
            return Err(Error::SignChangeInWindow { t });
        }
        sign = delta.signum();
        used.push((t, delta.abs()));
    }
    if used.len() < 5 {
        return Err(Error::TooFewSamples {
            got: used.len(),
            needed: 5,
        });
    }

    let n = used.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(t, a) in &used {
        let (lx, ly) = (t.ln(), a.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    let exponent = (n * sxy - sx * sy) / denom;
    let intercept = (sy - exponent * sx) / n;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    let y_mean = sy / n;
    for &(t, a) in &used {
        let (lx, ly) = (t.ln(), a.ln());
        let r = ly - (intercept + exponent * lx);
        ss_res += r * r;
        let d = ly - y_mean;
        ss_tot += d * d;
    }
    // flat data fits its own mean perfectly
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };

    let t_lo = used.iter().map(|p| p.0).fold(f64::MAX, f64::min);
    let t_hi = used.iter().map(|p| p.0).fold(f64::MIN, f64::max);
    Ok(ScalingFit {
        exponent,
        intercept,
        r_squared,
        window: (t_lo, t_hi),
        n_points: used.len(),
    })
}

/// Classify the barrier from detector samples.  The noise-floor test runs
/// first (all-zero data never reaches the fit); then the log-log exponent
/// decides between the bands, with poor fits reported as Indeterminate.
pub fn classify(series: &DetectorSeries, config: &ClassifierConfig) -> Result<ClassificationResult> {
    config.validate()?;
    let window = config.window.unwrap_or_else(|| {
        let lo = series.points.iter().map(|p| p.t).fold(f64::MAX, f64::min);
        let hi = series.points.iter().map(|p| p.t).fold(f64::MIN, f64::max);
        (lo, hi)
    });

    let in_window: Vec<&DetectorPoint> = series
        .points
        .iter()
        .filter(|p| p.t >= window.0 && p.t <= window.1)
        .collect();
    if in_window.len() < 5 {
        return Err(Error::TooFewSamples {
            got: in_window.len(),
            needed: 5,
        });
    }
    let max_delta = in_window.iter().map(|p| p.delta.abs()).fold(0.0, f64::max);
    let max_free = in_window
        .iter()
        .map(|p| p.free_density)
        .fold(0.0, f64::max);
    if max_delta < config.noise_floor * max_free {
        return Ok(ClassificationResult {
            verdict: Verdict::Absent,
            fit: None,
            thresholds: *config,
        });
    }

    let pairs: Vec<(f64, f64)> = in_window.iter().map(|p| (p.t, p.delta)).collect();
    let fit = fit_exponent(&pairs, window)?;
    let in_band = |band: (f64, f64)| band.0 <= fit.exponent && fit.exponent <= band.1;
    let verdict = if fit.r_squared < config.r2_threshold {
        Verdict::Indeterminate
    } else if in_band(config.real_band) {
        Verdict::Real
    } else if in_band(config.imag_band) {
        Verdict::Imaginary
    } else {
        Verdict::Indeterminate
    };
    Ok(ClassificationResult {
        verdict,
        fit: Some(fit),
        thresholds: *config,
    })
}

/// The classifier's input contract: it consumes transmitted-side data
/// only.  One detector past the barrier suffices; no simultaneous
/// reflection measurement is required, and [`DetectorSeries::new`] rejects
/// reflected-side samples outright.
pub fn transmitted_only_note() -> &'static str {
    "Classification uses transmitted-side (x > L) samples from a single \
     detector only; reflected-side data is rejected rather than combined."
}

/// Helper for building a series from an interferometer or direct curve.
pub fn series_from_curve(
    x: f64,
    barrier_position: f64,
    curve: &[(f64, f64)],
    free_density: &[f64],
) -> Result<DetectorSeries> {
    if curve.len() != free_density.len() {
        return Err(Error::InvalidParameter {
            name: "free_density",
            value: free_density.len() as f64,
            message: "curve and free-density lengths must match",
        });
    }
    let points = curve
        .iter()
        .zip(free_density)
        .map(|(&(t, delta), &free)| DetectorPoint {
            x,
            t,
            delta,
            free_density: free,
        })
        .collect();
    DetectorSeries::new(points, barrier_position)
}
