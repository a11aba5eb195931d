//! JSON configuration schemas for the command-line experiments.
//!
//! Every schema rejects unknown fields, so typos surface as configuration
//! errors instead of silently falling back to defaults, and every run
//! echoes its fully resolved configuration into the manifest.

use crate::field::{FieldError, SpectrumModel};
use crate::scale::{ScaleError, ShiftModel};
use serde::{Deserialize, Serialize};

/// Serializable description of a shift model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, tag = "family", rename_all = "snake_case")]
pub enum ShiftModelSpec {
    /// `ε_j = η / (j log j)`.
    Logarithmic { eta: f64 },
    /// `ε_j = η / j`.
    Polynomial { eta: f64 },
    /// `ε_j = η q (log j)^{q-1} / j`.
    LogPowerExponential { eta: f64, q: f64 },
    /// `ε_j = η j^{-p}`.
    MildExponential { eta: f64, p: f64 },
    /// `ε_j = log B`.
    StandardGeometric { ratio: f64 },
    /// `ε_j = j^p`.
    StretchedSuperExponential { p: f64 },
    /// `ε_j = a B^j`.
    DoubleExponential { a: f64, ratio: f64 },
    /// Scale values given directly.
    ExplicitTable { values: Vec<f64> },
}

impl ShiftModelSpec {
    /// Builds the validated model.
    pub fn build(&self) -> Result<ShiftModel, ScaleError> {
        match self {
            Self::Logarithmic { eta } => ShiftModel::logarithmic(*eta),
            Self::Polynomial { eta } => ShiftModel::polynomial(*eta),
            Self::LogPowerExponential { eta, q } => ShiftModel::log_power_exponential(*eta, *q),
            Self::MildExponential { eta, p } => ShiftModel::mild_exponential(*eta, *p),
            Self::StandardGeometric { ratio } => ShiftModel::standard_geometric(*ratio),
            Self::StretchedSuperExponential { p } => {
                ShiftModel::stretched_super_exponential(*p)
            }
            Self::DoubleExponential { a, ratio } => ShiftModel::double_exponential(*a, *ratio),
            Self::ExplicitTable { values } => ShiftModel::explicit_table(values.clone()),
        }
    }

    /// Short label safe for file names (parameters with `.` → `p`,
    /// `-` → `m`).
    pub fn label(&self) -> String {
        fn num(x: f64) -> String {
            format!("{x}").replace('.', "p").replace('-', "m")
        }
        match self {
            Self::Logarithmic { eta } => format!("logarithmic_eta{}", num(*eta)),
            Self::Polynomial { eta } => format!("polynomial_eta{}", num(*eta)),
            Self::LogPowerExponential { eta, q } => {
                format!("log_power_exponential_eta{}_q{}", num(*eta), num(*q))
            }
            Self::MildExponential { eta, p } => {
                format!("mild_exponential_eta{}_p{}", num(*eta), num(*p))
            }
            Self::StandardGeometric { ratio } => format!("standard_geometric_b{}", num(*ratio)),
            Self::StretchedSuperExponential { p } => {
                format!("stretched_super_exponential_p{}", num(*p))
            }
            Self::DoubleExponential { a, ratio } => {
                format!("double_exponential_a{}_b{}", num(*a), num(*ratio))
            }
            Self::ExplicitTable { values } => format!("explicit_table_n{}", values.len()),
        }
    }
}

/// One sine term of a modulated spectrum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SineTermSpec {
    /// Amplitude `c > 0`.
    pub c: f64,
    /// Offset `d > 1`.
    pub d: f64,
    /// Phase scale `M > 0`.
    pub m: f64,
    /// Flatness exponent `β ∈ (0, 1)`.
    pub beta: f64,
}

/// Serializable description of an angular power spectrum.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum SpectrumSpec {
    /// `C_ℓ = ℓ^{-α}`.
    PowerLaw { alpha: f64 },
    /// `C_ℓ = ℓ^{-α} Σ_p c_p (d_p + sin(ℓ^{β_p}/M_p))`.
    ModulatedSine { alpha: f64, terms: Vec<SineTermSpec> },
}

impl SpectrumSpec {
    /// Builds the validated model.
    pub fn build(&self) -> Result<SpectrumModel, FieldError> {
        match self {
            Self::PowerLaw { alpha } => SpectrumModel::power_law(*alpha),
            Self::ModulatedSine { alpha, terms } => SpectrumModel::modulated_sine(
                *alpha,
                terms.iter().map(|t| (t.c, t.d, t.m, t.beta)).collect(),
            ),
        }
    }
}

fn default_regime_families() -> Vec<ShiftModelSpec> {
    vec![
        ShiftModelSpec::Polynomial { eta: 2.0 },
        ShiftModelSpec::StandardGeometric { ratio: 2.0 },
        ShiftModelSpec::StretchedSuperExponential { p: 0.5 },
    ]
}

fn default_regime_levels() -> usize {
    128
}

/// Configuration of the `regimes` command: classify growth regimes and
/// tabulate the scale diagnostics of several families side by side.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RegimesConfig {
    /// Families to compare (default: the shrinking/stable/spreading trio).
    #[serde(default = "default_regime_families")]
    pub families: Vec<ShiftModelSpec>,
    /// Number of levels per family.
    #[serde(default = "default_regime_levels")]
    pub levels: usize,
}

impl Default for RegimesConfig {
    fn default() -> Self {
        Self {
            families: default_regime_families(),
            levels: default_regime_levels(),
        }
    }
}

fn default_window_family() -> ShiftModelSpec {
    ShiftModelSpec::StandardGeometric { ratio: 2.0 }
}

fn default_window_levels() -> usize {
    8
}

fn default_window_samples() -> usize {
    600
}

/// Configuration of the `windows` command: scaling/weight function tables
/// and the partition-of-unity residual.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WindowsConfig {
    /// Scale family backing the windows.
    #[serde(default = "default_window_family")]
    pub family: ShiftModelSpec,
    /// Number of needlet levels.
    #[serde(default = "default_window_levels")]
    pub levels: usize,
    /// Sample count of the frequency grid.
    #[serde(default = "default_window_samples")]
    pub samples: usize,
}

impl Default for WindowsConfig {
    fn default() -> Self {
        Self {
            family: default_window_family(),
            levels: default_window_levels(),
            samples: default_window_samples(),
        }
    }
}

fn default_localization_families() -> Vec<ShiftModelSpec> {
    // Shrinking/stable/spreading exemplars whose window widths are ordered
    // at the default level, so the spatial-envelope comparison is sharp.
    vec![
        ShiftModelSpec::Logarithmic { eta: 0.75 },
        ShiftModelSpec::StandardGeometric { ratio: 2.0 },
        ShiftModelSpec::StretchedSuperExponential { p: 0.5 },
    ]
}

fn default_localization_level() -> usize {
    2
}

fn default_localization_angles() -> usize {
    400
}

/// Configuration of the `localization` command: needlet decay profiles for
/// several families at one level.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LocalizationConfig {
    /// Families to profile.
    #[serde(default = "default_localization_families")]
    pub families: Vec<ShiftModelSpec>,
    /// Level `j ≥ 1` to profile.
    #[serde(default = "default_localization_level")]
    pub level: usize,
    /// Number of scan angles over `(0, π]`.
    #[serde(default = "default_localization_angles")]
    pub angles: usize,
}

impl Default for LocalizationConfig {
    fn default() -> Self {
        Self {
            families: default_localization_families(),
            level: default_localization_level(),
            angles: default_localization_angles(),
        }
    }
}

fn default_correlation_families() -> Vec<ShiftModelSpec> {
    vec![
        ShiftModelSpec::Logarithmic { eta: 1.0 },
        ShiftModelSpec::MildExponential { eta: 1.0, p: 0.5 },
    ]
}

fn default_spectrum() -> SpectrumSpec {
    SpectrumSpec::ModulatedSine {
        alpha: 2.0,
        terms: vec![SineTermSpec {
            c: 1.0,
            d: 2.0,
            m: 1.0,
            beta: 0.5,
        }],
    }
}

fn default_correlation_level() -> usize {
    4
}

fn default_correlation_replicates() -> usize {
    400
}

fn default_correlation_pairs() -> usize {
    48
}

/// Configuration of the `correlation` command: analytic and empirical
/// needlet-coefficient correlation profiles plus separation verdicts.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CorrelationConfig {
    /// Families to compare (default: a too-slow family vs a valid one).
    #[serde(default = "default_correlation_families")]
    pub families: Vec<ShiftModelSpec>,
    /// Spectrum of the simulated field.
    #[serde(default = "default_spectrum")]
    pub spectrum: SpectrumSpec,
    /// Level whose coefficients are correlated.
    #[serde(default = "default_correlation_level")]
    pub level: usize,
    /// Monte-Carlo replicates behind the empirical column.
    #[serde(default = "default_correlation_replicates")]
    pub replicates: usize,
    /// Number of equator pair separations sampled.
    #[serde(default = "default_correlation_pairs")]
    pub pairs: usize,
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        Self {
            families: default_correlation_families(),
            spectrum: default_spectrum(),
            level: default_correlation_level(),
            replicates: default_correlation_replicates(),
            pairs: default_correlation_pairs(),
        }
    }
}

fn default_gof_families() -> Vec<ShiftModelSpec> {
    vec![
        ShiftModelSpec::Logarithmic { eta: 1.0 },
        ShiftModelSpec::MildExponential { eta: 1.0, p: 0.5 },
    ]
}

fn default_gof_levels() -> Vec<usize> {
    vec![2, 3]
}

fn default_gof_replicates() -> usize {
    500
}

fn default_epsilon_sep() -> f64 {
    crate::gof::DEFAULT_EPSILON_SEP
}

/// Configuration of the `gof` command: the subsampled goodness-of-fit
/// statistic across families and levels.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GofFileConfig {
    /// Families to test; those failing the separation precondition get a
    /// `fail` verdict row instead of statistics.
    #[serde(default = "default_gof_families")]
    pub families: Vec<ShiftModelSpec>,
    /// Spectrum of the simulated null field.
    #[serde(default = "default_spectrum")]
    pub spectrum: SpectrumSpec,
    /// Levels to test per family.
    #[serde(default = "default_gof_levels")]
    pub levels: Vec<usize>,
    /// Separation exponent `ε_sep`.
    #[serde(default = "default_epsilon_sep")]
    pub epsilon_sep: f64,
    /// Monte-Carlo replicates per level.
    #[serde(default = "default_gof_replicates")]
    pub replicates: usize,
}

impl Default for GofFileConfig {
    fn default() -> Self {
        Self {
            families: default_gof_families(),
            spectrum: default_spectrum(),
            levels: default_gof_levels(),
            epsilon_sep: default_epsilon_sep(),
            replicates: default_gof_replicates(),
        }
    }
}

fn default_scales_family() -> ShiftModelSpec {
    ShiftModelSpec::MildExponential { eta: 1.0, p: 0.5 }
}

fn default_scales_levels() -> usize {
    32
}

fn default_scales_betas() -> Vec<f64> {
    vec![0.1, 0.5, 0.9]
}

/// Configuration of the `scales` command: the raw scale-sequence table and
/// separation diagnostics of one family.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScalesConfig {
    /// Family to tabulate.
    #[serde(default = "default_scales_family")]
    pub family: ShiftModelSpec,
    /// Number of levels.
    #[serde(default = "default_scales_levels")]
    pub levels: usize,
    /// Exponents `β` for the separation-ratio diagnostics (shrinking
    /// families only).
    #[serde(default = "default_scales_betas")]
    pub betas: Vec<f64>,
}

impl Default for ScalesConfig {
    fn default() -> Self {
        Self {
            family: default_scales_family(),
            levels: default_scales_levels(),
            betas: default_scales_betas(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_round_trip_and_build() {
        let spec = ShiftModelSpec::MildExponential { eta: 1.0, p: 0.5 };
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("mild_exponential"));
        let back: ShiftModelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        assert_eq!(back.build().unwrap().family_name(), "MildExponential");
        assert_eq!(spec.label(), "mild_exponential_eta1_p0p5");
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = serde_json::from_str::<RegimesConfig>(
            r#"{"levels": 32, "familiez": []}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("familiez"));
        let err = serde_json::from_str::<ShiftModelSpec>(
            r#"{"family": "polynomial", "eta": 2.0, "extra": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("extra"));
    }

    #[test]
    fn defaults_are_complete() {
        let cfg: RegimesConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, RegimesConfig::default());
        assert_eq!(cfg.families.len(), 3);
        let cfg: GofFileConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.replicates, 500);
        let cfg: ScalesConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.levels, 32);
    }

    #[test]
    fn spectrum_spec_builds() {
        let spec = SpectrumSpec::PowerLaw { alpha: 2.0 };
        assert!(spec.build().is_ok());
        let bad = SpectrumSpec::PowerLaw { alpha: 1.0 };
        assert!(bad.build().is_err());
        let modulated = default_spectrum();
        let model = modulated.build().unwrap();
        assert_eq!(model.beta_smoothness(), 0.5);
    }
}
