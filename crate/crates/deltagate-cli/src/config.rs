//! Scenario configuration: a sectioned TOML schema mirroring the library's
//! domain types, revalidated on load through the library constructors.
//! Unknown keys are rejected so a typo fails loudly instead of silently
//! falling back to a default.

use std::fmt;
use std::fs;
use std::path::Path;

use deltagate::grid::{BarrierSpec, InitialState};
use serde::{Deserialize, Serialize};

/// Configuration problem: unparsable file, unknown key, missing section, or
/// a value the library constructors reject.  Mapped to its own exit code so
/// scripts can tell bad input from a failed computation.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(message: impl Into<String>) -> ConfigError {
    ConfigError(message.into())
}

/// Built-in scenario files compiled into the binary; the same files live
/// under `presets/` for copying and editing.
pub const PRESETS: [(&str, &str); 4] = [
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig5-real", include_str!("../presets/fig5-real.toml")),
    ("fig5-imag", include_str!("../presets/fig5-imag.toml")),
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub state: StateSection,
    pub barrier: BarrierSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interferometer: Option<InterferometerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<ClassifierSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expand: Option<ExpandSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| config_err(format!("{origin}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        match PRESETS.iter().find(|(n, _)| *n == name) {
            Some((_, text)) => Self::from_toml(text, &format!("preset {name}")),
            None => {
                let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                Err(config_err(format!(
                    "unknown preset `{name}`; available presets: {}",
                    known.join(", ")
                )))
            }
        }
    }

    /// Initial state revalidated through the library constructors.
    pub fn state(&self) -> Result<InitialState, ConfigError> {
        match self.state.kind {
            StateKind::Step => InitialState::step(self.state.k0),
            StateKind::Sine => InitialState::sine(self.state.k0),
            StateKind::Gaussian => {
                let sigma = self.state.sigma.ok_or_else(|| {
                    config_err("[state] sigma is required when kind = \"gaussian\"")
                })?;
                InitialState::gaussian(sigma, self.state.k0)
            }
        }
        .map_err(|e| config_err(format!("[state] {e}")))
    }

    /// Barrier revalidated through the library constructors.
    pub fn barrier(&self) -> Result<BarrierSpec, ConfigError> {
        let b = &self.barrier;
        match b.kind {
            BarrierKindName::Absent => BarrierSpec::absent(b.position),
            BarrierKindName::Real => BarrierSpec::real(b.strength, b.position),
            BarrierKindName::Imaginary => BarrierSpec::imaginary(b.strength, b.position),
        }
        .map_err(|e| config_err(format!("[barrier] {e}")))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Step,
    Sine,
    Gaussian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub kind: StateKind,
    pub k0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarrierKindName {
    Absent,
    Real,
    Imaginary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierSection {
    pub kind: BarrierKindName,
    /// Defaults to zero so an absent barrier needs no strength line.
    #[serde(default)]
    pub strength: f64,
    pub position: f64,
}

/// Evaluation lattice for table commands: an x range and either a single
/// time `t` or a uniform range `t ..= t_max` with `n_t` samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_t: Option<usize>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

impl GridSection {
    pub fn axes(&self) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
        let xs = linspace(self.x_min, self.x_max, self.n_x);
        let ts = match (self.t_max, self.n_t) {
            (None, None) => vec![self.t],
            (Some(t_max), Some(n_t)) => linspace(self.t, t_max, n_t),
            _ => {
                return Err(config_err(
                    "[grid] t_max and n_t must be given together or not at all",
                ))
            }
        };
        Ok((xs, ts))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferometerSection {
    /// First splitter amplitude; the second is fixed by unitarity.
    pub c1: f64,
    /// Detector position past the barrier.
    pub x: f64,
}

fn default_safety() -> f64 {
    deltagate::classifier::DEFAULT_SAFETY
}

fn default_samples() -> usize {
    deltagate::classifier::DEFAULT_GRID_POINTS
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSection {
    /// Detector position for the direct-transmission pipeline; ignored when
    /// an [interferometer] section supplies one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    /// Safety factor tightening the auto-selected fit window.
    #[serde(default = "default_safety")]
    pub safety: f64,
    /// Number of log-spaced time samples.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Explicit fit window [t_min, t_max]; overrides the auto-selection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2_threshold: Option<f64>,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        Self {
            x: None,
            safety: default_safety(),
            samples: default_samples(),
            window: None,
            band_half_width: None,
            r2_threshold: None,
        }
    }
}

/// Time window for the expansion residual curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandSection {
    /// Evaluation position (transmitted or reflected side selects the
    /// series family for step states).
    pub x: f64,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_oracle_x_min() -> f64 {
    -18.0
}

fn default_oracle_x_max() -> f64 {
    22.0
}

fn default_oracle_n_points() -> usize {
    8001
}

fn default_oracle_dt() -> f64 {
    1e-3
}

fn default_oracle_t_final() -> f64 {
    0.5
}

fn default_oracle_sigma() -> f64 {
    1.0
}

fn default_oracle_k0() -> f64 {
    2.0
}

fn default_lattice_tolerance() -> f64 {
    1e-3
}

fn default_spectral_tolerance() -> f64 {
    1e-6
}

/// Lattice and tolerances for the cross-check battery.  The battery's
/// scenarios are fixed; this section only tunes how hard they run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_oracle_x_min")]
    pub x_min: f64,
    #[serde(default = "default_oracle_x_max")]
    pub x_max: f64,
    #[serde(default = "default_oracle_n_points")]
    pub n_points: usize,
    #[serde(default = "default_oracle_dt")]
    pub dt: f64,
    #[serde(default = "default_oracle_t_final")]
    pub t_final: f64,
    #[serde(default = "default_oracle_sigma")]
    pub sigma: f64,
    #[serde(default = "default_oracle_k0")]
    pub k0: f64,
    #[serde(default = "default_lattice_tolerance")]
    pub lattice_tolerance: f64,
    #[serde(default = "default_spectral_tolerance")]
    pub spectral_tolerance: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            x_min: default_oracle_x_min(),
            x_max: default_oracle_x_max(),
            n_points: default_oracle_n_points(),
            dt: default_oracle_dt(),
            t_final: default_oracle_t_final(),
            sigma: default_oracle_sigma(),
            k0: default_oracle_k0(),
            lattice_tolerance: default_lattice_tolerance(),
            spectral_tolerance: default_spectral_tolerance(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Add a with-minus-without density column to evolve tables.
    #[serde(default)]
    pub delta_column: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for (name, _) in PRESETS {
            let cfg = ScenarioConfig::preset(name).unwrap();
            cfg.state().unwrap();
            cfg.barrier().unwrap();
        }
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let err = ScenarioConfig::from_toml(
            "[state]\nkind = \"step\"\nk0 = 30.0\nwavenumber = 1.0\n\
             [barrier]\nkind = \"absent\"\nposition = 1.0\n",
            "inline",
        )
        .unwrap_err();
        assert!(err.to_string().contains("wavenumber"), "{err}");
    }

    #[test]
    fn unknown_preset_lists_alternatives() {
        let err = ScenarioConfig::preset("fig9").unwrap_err();
        assert!(err.to_string().contains("fig2"), "{err}");
    }

    #[test]
    fn gaussian_without_sigma_is_a_config_error() {
        let cfg = ScenarioConfig::from_toml(
            "[state]\nkind = \"gaussian\"\nk0 = 5.0\n\
             [barrier]\nkind = \"real\"\nstrength = 2.0\nposition = 1.0\n",
            "inline",
        )
        .unwrap();
        let err = cfg.state().unwrap_err();
        assert!(err.to_string().contains("sigma"), "{err}");
    }

    #[test]
    fn grid_time_range_needs_both_fields() {
        let grid = GridSection {
            x_min: 0.0,
            x_max: 1.0,
            n_x: 3,
            t: 0.01,
            t_max: Some(0.1),
            n_t: None,
        };
        assert!(grid.axes().is_err());
    }
}
