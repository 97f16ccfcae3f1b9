//! Domain value types: barrier description, initial states, spacetime
//! sampling and evaluated fields.

use crate::error::{Error, Result};
use crate::ComplexValue;

/// Physical character of the delta barrier at x = L.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    /// No barrier; strength is treated as zero everywhere.
    Absent,
    /// Elastic barrier lambda * delta(x - L).
    Real,
    /// Absorbing barrier -i * lambda * delta(x - L) (removes probability).
    Imaginary,
}

/// A single delta barrier of strength `lambda >= 0` at position `L > 0`.
///
/// Units: with hbar = 1, 2m = 1 the strength carries inverse-length units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    kind: BarrierKind,
    strength: f64,
    position: f64,
}

impl BarrierSpec {
    pub fn new(kind: BarrierKind, strength: f64, position: f64) -> Result<Self> {
        if !(strength >= 0.0) || !strength.is_finite() {
            return Err(Error::InvalidParameter {
                name: "strength",
                value: strength,
                message: "barrier strength must be finite and >= 0",
            });
        }
        if !(position > 0.0) || !position.is_finite() {
            return Err(Error::InvalidParameter {
                name: "position",
                value: position,
                message: "barrier position must be finite and > 0",
            });
        }
        // Absent means "no barrier" regardless of the requested strength.
        let strength = match kind {
            BarrierKind::Absent => 0.0,
            _ => strength,
        };
        Ok(Self {
            kind,
            strength,
            position,
        })
    }

    pub fn absent(position: f64) -> Result<Self> {
        Self::new(BarrierKind::Absent, 0.0, position)
    }

    pub fn real(strength: f64, position: f64) -> Result<Self> {
        Self::new(BarrierKind::Real, strength, position)
    }

    pub fn imaginary(strength: f64, position: f64) -> Result<Self> {
        Self::new(BarrierKind::Imaginary, strength, position)
    }

    pub fn kind(&self) -> BarrierKind {
        self.kind
    }

    /// Barrier strength lambda (zero for an absent barrier).
    pub fn strength(&self) -> f64 {
        self.strength
    }

    /// Barrier position L.
    pub fn position(&self) -> f64 {
        self.position
    }

    /// Complex coupling entering every formula uniformly: lambda for a real
    /// barrier, -i*lambda for the absorbing one, 0 when absent.  With this
    /// convention the absorbing propagator is norm-decreasing.
    pub fn coupling(&self) -> ComplexValue {
        match self.kind {
            BarrierKind::Absent => ComplexValue::new(0.0, 0.0),
            BarrierKind::Real => ComplexValue::new(self.strength, 0.0),
            BarrierKind::Imaginary => ComplexValue::new(0.0, -self.strength),
        }
    }

    /// True when the barrier influences the dynamics.
    pub fn is_active(&self) -> bool {
        self.kind != BarrierKind::Absent && self.strength > 0.0
    }
}

/// Initial wavefunction, confined to x < 0 at t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// theta(-x) exp(i k0 x): a truncated plane wave with a sharp front.
    StepPlane { k0: f64 },
    /// theta(-x) sin(k0 x): a front vanishing at the edge.
    SineFront { k0: f64 },
    /// Normalized-width Gaussian exp(i k0 x - x^2/sigma^2) released at the
    /// origin (prefactor sqrt(2/pi)/sigma).
    Gaussian { sigma: f64, k0: f64 },
}

impl InitialState {
    pub fn step(k0: f64) -> Result<Self> {
        validate_k0(k0)?;
        Ok(Self::StepPlane { k0 })
    }

    pub fn sine(k0: f64) -> Result<Self> {
        validate_k0(k0)?;
        Ok(Self::SineFront { k0 })
    }

    pub fn gaussian(sigma: f64, k0: f64) -> Result<Self> {
        validate_k0(k0)?;
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
                message: "gaussian width must be finite and > 0",
            });
        }
        Ok(Self::Gaussian { sigma, k0 })
    }

    pub fn k0(&self) -> f64 {
        match *self {
            Self::StepPlane { k0 } | Self::SineFront { k0 } | Self::Gaussian { k0, .. } => k0,
        }
    }
}

fn validate_k0(k0: f64) -> Result<()> {
    if !(k0 > 0.0) || !k0.is_finite() {
        return Err(Error::InvalidParameter {
            name: "k0",
            value: k0,
            message: "carrier wavenumber must be finite and > 0",
        });
    }
    Ok(())
}

/// An evaluation point (x, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimePoint {
    pub x: f64,
    pub t: f64,
}

impl SpacetimePoint {
    pub fn new(x: f64, t: f64) -> Self {
        Self { x, t }
    }

    /// Unfolded coordinate y = L + |x - L| measuring the path length via the
    /// barrier; equals x on the transmitted side and the mirror image 2L - x
    /// behind it.
    pub fn unfolded(&self, l: f64) -> f64 {
        l + (self.x - l).abs()
    }
}

/// Rectangular sampling of spacetime: all (x, t) pairs from two strictly
/// increasing axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeGrid {
    xs: Vec<f64>,
    ts: Vec<f64>,
}

impl SpacetimeGrid {
    pub fn new(xs: Vec<f64>, ts: Vec<f64>) -> Result<Self> {
        for (name, axis) in [("x", &xs), ("t", &ts)] {
            if axis.is_empty() {
                return Err(Error::InvalidLattice {
                    message: format!("{name} axis is empty"),
                });
            }
            if !axis.windows(2).all(|w| w[0] < w[1]) || !axis.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidLattice {
                    message: format!("{name} axis must be finite and strictly increasing"),
                });
            }
        }
        Ok(Self { xs, ts })
    }

    /// Uniformly spaced x axis with a single evaluation time.
    pub fn single_time(x_min: f64, x_max: f64, n: usize, t: f64) -> Result<Self> {
        if n < 2 || !(x_max > x_min) {
            return Err(Error::InvalidLattice {
                message: format!("need n >= 2 and x_max > x_min, got n = {n}, [{x_min}, {x_max}]"),
            });
        }
        let dx = (x_max - x_min) / (n - 1) as f64;
        let xs = (0..n).map(|i| x_min + dx * i as f64).collect();
        Self::new(xs, vec![t])
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees non-empty axes
    }

    /// Point at flattened index (row-major over t, then x).
    pub fn point(&self, idx: usize) -> SpacetimePoint {
        let nx = self.xs.len();
        SpacetimePoint::new(self.xs[idx % nx], self.ts[idx / nx])
    }
}

/// Where a field's values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Exact closed-form evaluation.
    Analytic,
    /// Truncated short-time expansion of the given order.
    Expansion(u32),
    /// Numerical oracle (lattice propagation or spectral quadrature).
    Oracle,
}

/// A sampled complex field over a [`SpacetimeGrid`] (row-major over t, x).
/// Real-valued data (densities, differences) is stored with zero imaginary
/// parts.  `warnings` carries non-fatal diagnostics such as the lattice
/// accuracy guard; it is empty for clean runs.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: SpacetimeGrid,
    pub values: Vec<ComplexValue>,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
}

impl WaveField {
    pub fn new(grid: SpacetimeGrid, values: Vec<ComplexValue>, provenance: Provenance) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidLattice {
                message: format!(
                    "value count {} does not match grid size {}",
                    values.len(),
                    grid.len()
                ),
            });
        }
        if !values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::InvalidLattice {
                message: "field contains non-finite values".into(),
            });
        }
        Ok(Self {
            grid,
            values,
            provenance,
            warnings: Vec::new(),
        })
    }

    /// Value at x-index `ix` and t-index `it`.
    pub fn value_at(&self, ix: usize, it: usize) -> ComplexValue {
        self.values[it * self.grid.xs.len() + ix]
    }
}
