//! Scale sequences `S_j` generated by regularly varying shift sequences.
//!
//! A shift family prescribes positive increments `ε_j = γ(j) j^p` (with `γ`
//! slowly varying and `p` the regularity index); the scale sequence is the
//! cumulative exponential
//!
//! ```text
//! S_j = exp(Σ_{k=0}^{j-1} ε̃_k),   S_0 = 1,
//! ```
//!
//! where `ε̃_k = ε_{max(k, j_min)}` pads the first few indices for families
//! whose formula needs `j ≥ 1` or `j ≥ 2` (for example `log j` in a
//! denominator). The padding alters only finitely many terms, so every
//! asymptotic statement about the family is unaffected.
//!
//! Derived per-level quantities:
//!
//! * dilation factor `h_j = S_{j+1}/S_j` (always `> 1`),
//! * relative bandwidth ratio `Δ_j = (S_{j+1} - S_{j-1})/S_j`, which equals
//!   `h_j - 1/h_{j-1}` exactly and behaves like `2ε_j` when shifts are small,
//! * logarithmic growth index `L_j = log(S_j)/j`.
//!
//! The asymptotic behaviour of `Δ_j` splits sequences into three regimes:
//! **shrinking** (`Δ_j → 0`, subexponential growth), **stable**
//! (`Δ_j → const > 0`, exact exponential growth) and **spreading**
//! (`Δ_j → ∞`, superexponential growth). Shrinking sequences subdivide into
//! *totally convergent* (`Σ ε_j < ∞`, the scales accumulate at a finite
//! value) and *divergent* (`S_j → ∞`).

use thiserror::Error;

/// Natural log of the largest finite `f64`; cumulative log-scales beyond this
/// would overflow `exp`.
const LN_F64_MAX: f64 = 709.782712893384;

/// Default relative tolerance used by [`classify_regime`].
pub const DEFAULT_REGIME_TOL: f64 = 0.05;

/// Relative stabilization threshold below which a shrinking explicit table is
/// labelled totally convergent: `|S_last - S_mid| / S_last <` this value.
pub const CONVERGENCE_STABILIZATION_TOL: f64 = 0.05;

/// Errors raised by shift-family and scale-sequence operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScaleError {
    /// A family parameter violates its admissible range.
    #[error("invalid {family} parameter: {reason}")]
    Parameter {
        family: &'static str,
        reason: String,
    },
    /// A shift was requested at an index where the family formula is
    /// undefined (for example `j = 1` with `log j` in a denominator).
    #[error("{family} shift undefined at j = {j}; smallest valid index is {min}")]
    ShiftIndexTooSmall {
        family: &'static str,
        j: u32,
        min: u32,
    },
    /// Too few levels requested or available for the operation.
    #[error("{what} needs at least {needed} levels, got {got}")]
    HorizonTooShort {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    /// A per-level quantity was requested outside its valid index range.
    #[error("{what} index j = {j} outside valid range [{min}, {max}]")]
    IndexOutOfRange {
        what: &'static str,
        j: usize,
        min: usize,
        max: usize,
    },
    /// The correlation exponent must satisfy `0 ≤ β < 1`.
    #[error("beta = {beta} outside [0, 1)")]
    BetaOutOfRange { beta: f64 },
    /// The family has no analytic closed form for `S_j`.
    #[error("{family} has no closed-form scale")]
    NoClosedForm { family: &'static str },
    /// The operation applies only to shrinking families.
    #[error("{family} is not a shrinking family; {op} applies only to shrinking shifts")]
    NotShrinking {
        family: &'static str,
        op: &'static str,
    },
    /// The localization rate is not defined for the supplied parameters.
    #[error("localization rate undefined for {family}: {reason}")]
    LocalizationUndefined {
        family: &'static str,
        reason: String,
    },
    /// Overflow truncation left fewer than the minimum usable levels.
    #[error("scales overflow the floating-point range at level {level}, fewer than 3 finite levels")]
    Overflow { level: usize },
}

/// Named shift families, each a `(p, γ)` pair of regularity index and slowly
/// varying factor, plus an explicit table of scales for data-driven input.
#[derive(Debug, Clone, PartialEq)]
enum Family {
    /// `ε_j = η / (j log j)` — shrinking, `S_j ≍ (log j)^η`.
    Logarithmic { eta: f64 },
    /// `ε_j = η / j` — shrinking, `S_j ≍ j^η`.
    Polynomial { eta: f64 },
    /// `ε_j = η q (log j)^{q-1} / j`, `q ∈ (0,1)` — shrinking,
    /// `S_j ≍ exp(η (log j)^q)`.
    LogPowerExponential { eta: f64, q: f64 },
    /// `ε_j = η j^{-p}`, `p ∈ (0,1)` — shrinking,
    /// `S_j ≍ exp(η j^{1-p}/(1-p))`. The stored `p` is the positive decay
    /// exponent; the regularity index of the shift sequence is `-p`.
    MildExponential { eta: f64, p: f64 },
    /// `ε_j = log B`, `B > 1` — stable, `S_j = B^j`.
    StandardGeometric { b: f64 },
    /// `ε_j = j^p`, `p > 0` — spreading, `S_j ≍ exp(j^{p+1}/(p+1))`.
    StretchedSuperExponential { p: f64 },
    /// `ε_j = a B^j` — rapidly varying (no regularity index), spreading;
    /// `S_j = exp(a (B^j - 1)/(B - 1))` exactly.
    DoubleExponential { a: f64, b: f64 },
    /// Explicit strictly increasing table of the scales themselves,
    /// `values[j] = S_j` with `values[0] = 1`.
    ExplicitTable { values: Vec<f64> },
}

/// A validated shift-sequence model.
///
/// Construct through the per-family constructors, which check parameter
/// ranges once; every operation can then assume a well-formed model.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftModel {
    family: Family,
}

/// Growth regime of a scale sequence, decided by the tail behaviour of the
/// relative bandwidth ratio `Δ_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `Δ_j → 0`: subexponential scale growth.
    Shrinking,
    /// `Δ_j → const > 0`: exact exponential growth.
    Stable,
    /// `Δ_j → ∞`: superexponential growth.
    Spreading,
    /// The finite-sample trend tests conflict or the horizon is too short.
    Undetermined,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Shrinking => "shrinking",
            Regime::Stable => "stable",
            Regime::Spreading => "spreading",
            Regime::Undetermined => "undetermined",
        })
    }
}

/// Shrinking-regime subcase: whether the shift series converges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    /// `Σ ε_j < ∞`: the scales accumulate at a finite limit.
    TotallyConvergent,
    /// `Σ ε_j = ∞`: the scales still diverge, only subexponentially.
    Divergent,
    /// Not a shrinking sequence.
    NotApplicable,
}

impl std::fmt::Display for Convergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Convergence::TotallyConvergent => "totally-convergent",
            Convergence::Divergent => "divergent",
            Convergence::NotApplicable => "not-applicable",
        })
    }
}

fn require_positive(family: &'static str, name: &str, v: f64) -> Result<(), ScaleError> {
    if !v.is_finite() || v <= 0.0 {
        return Err(ScaleError::Parameter {
            family,
            reason: format!("{name} must be a positive finite real, got {v}"),
        });
    }
    Ok(())
}

impl ShiftModel {
    /// Logarithmic shifts `ε_j = η/(j log j)`, `η > 0`.
    pub fn logarithmic(eta: f64) -> Result<Self, ScaleError> {
        require_positive("Logarithmic", "eta", eta)?;
        Ok(Self {
            family: Family::Logarithmic { eta },
        })
    }

    /// Polynomial shifts `ε_j = η/j`, `η > 0`.
    pub fn polynomial(eta: f64) -> Result<Self, ScaleError> {
        require_positive("Polynomial", "eta", eta)?;
        Ok(Self {
            family: Family::Polynomial { eta },
        })
    }

    /// Log-power-exponential shifts `ε_j = ηq(log j)^{q-1}/j`, `η > 0`,
    /// `q ∈ (0,1)`.
    pub fn log_power_exponential(eta: f64, q: f64) -> Result<Self, ScaleError> {
        require_positive("LogPowerExponential", "eta", eta)?;
        if !q.is_finite() || q <= 0.0 || q >= 1.0 {
            return Err(ScaleError::Parameter {
                family: "LogPowerExponential",
                reason: format!("q must lie in (0, 1), got {q}"),
            });
        }
        Ok(Self {
            family: Family::LogPowerExponential { eta, q },
        })
    }

    /// Mild-exponential shifts `ε_j = η j^{-p}`, `η > 0`, `p ∈ (0,1)`.
    ///
    /// `p` here is the positive decay exponent of the shifts; the regularity
    /// index of the shift sequence is `-p` (see [`ShiftModel::regularity_index`]).
    pub fn mild_exponential(eta: f64, p: f64) -> Result<Self, ScaleError> {
        require_positive("MildExponential", "eta", eta)?;
        if !p.is_finite() || p <= 0.0 || p >= 1.0 {
            return Err(ScaleError::Parameter {
                family: "MildExponential",
                reason: format!("p must lie in (0, 1), got {p}"),
            });
        }
        Ok(Self {
            family: Family::MildExponential { eta, p },
        })
    }

    /// Constant shifts `ε_j = log B`, `B > 1` (geometric scales `S_j = B^j`).
    pub fn standard_geometric(b: f64) -> Result<Self, ScaleError> {
        if !b.is_finite() || b <= 1.0 {
            return Err(ScaleError::Parameter {
                family: "StandardGeometric",
                reason: format!("B must exceed 1, got {b}"),
            });
        }
        Ok(Self {
            family: Family::StandardGeometric { b },
        })
    }

    /// Growing shifts `ε_j = j^p`, `p > 0` (stretched superexponential).
    pub fn stretched_super_exponential(p: f64) -> Result<Self, ScaleError> {
        require_positive("StretchedSuperExponential", "p", p)?;
        Ok(Self {
            family: Family::StretchedSuperExponential { p },
        })
    }

    /// Rapidly growing shifts `ε_j = a B^j`, `a > 0`, `B > 1`.
    pub fn double_exponential(a: f64, b: f64) -> Result<Self, ScaleError> {
        require_positive("DoubleExponential", "a", a)?;
        if !b.is_finite() || b <= 1.0 {
            return Err(ScaleError::Parameter {
                family: "DoubleExponential",
                reason: format!("B must exceed 1, got {b}"),
            });
        }
        Ok(Self {
            family: Family::DoubleExponential { a, b },
        })
    }

    /// Explicit table of scale values `S_0, S_1, …`.
    ///
    /// The table must start at `S_0 = 1` and be strictly increasing (so the
    /// implied shifts `ε_j = log(S_{j+1}/S_j)` stay positive) with at least
    /// three entries.
    pub fn explicit_table(values: Vec<f64>) -> Result<Self, ScaleError> {
        if values.len() < 3 {
            return Err(ScaleError::Parameter {
                family: "ExplicitTable",
                reason: format!("need at least 3 values, got {}", values.len()),
            });
        }
        if values[0] != 1.0 {
            return Err(ScaleError::Parameter {
                family: "ExplicitTable",
                reason: format!("first value must be 1 (the base scale), got {}", values[0]),
            });
        }
        for (i, w) in values.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() || w[0] <= 0.0 {
                return Err(ScaleError::Parameter {
                    family: "ExplicitTable",
                    reason: format!("values must be positive finite reals (index {i})"),
                });
            }
            if w[1] <= w[0] {
                return Err(ScaleError::Parameter {
                    family: "ExplicitTable",
                    reason: format!(
                        "values must be strictly increasing; values[{}] = {} !< values[{}] = {}",
                        i,
                        w[0],
                        i + 1,
                        w[1]
                    ),
                });
            }
        }
        Ok(Self {
            family: Family::ExplicitTable { values },
        })
    }

    /// Short family label, e.g. `"Polynomial"`.
    pub fn family_name(&self) -> &'static str {
        match &self.family {
            Family::Logarithmic { .. } => "Logarithmic",
            Family::Polynomial { .. } => "Polynomial",
            Family::LogPowerExponential { .. } => "LogPowerExponential",
            Family::MildExponential { .. } => "MildExponential",
            Family::StandardGeometric { .. } => "StandardGeometric",
            Family::StretchedSuperExponential { .. } => "StretchedSuperExponential",
            Family::DoubleExponential { .. } => "DoubleExponential",
            Family::ExplicitTable { .. } => "ExplicitTable",
        }
    }

    /// Regularity index `p` of the shift sequence `ε_j = γ(j) j^p`.
    ///
    /// `None` for the rapidly varying double-exponential family (no
    /// polynomial index exists) and for explicit tables (unknown).
    pub fn regularity_index(&self) -> Option<f64> {
        match &self.family {
            Family::Logarithmic { .. }
            | Family::Polynomial { .. }
            | Family::LogPowerExponential { .. } => Some(-1.0),
            Family::MildExponential { p, .. } => Some(-p),
            Family::StandardGeometric { .. } => Some(0.0),
            Family::StretchedSuperExponential { p } => Some(*p),
            Family::DoubleExponential { .. } | Family::ExplicitTable { .. } => None,
        }
    }

    /// Human-readable description of the slowly varying factor `γ(j)`.
    pub fn gamma_description(&self) -> String {
        match &self.family {
            Family::Logarithmic { eta } => format!("gamma(j) = {eta}/log j"),
            Family::Polynomial { eta } => format!("gamma(j) = {eta} (constant)"),
            Family::LogPowerExponential { eta, q } => {
                format!("gamma(j) = {eta}*{q}*(log j)^({q} - 1)")
            }
            Family::MildExponential { eta, .. } => format!("gamma(j) = {eta} (constant)"),
            Family::StandardGeometric { b } => format!("gamma(j) = log {b} (constant)"),
            Family::StretchedSuperExponential { .. } => "gamma(j) = 1 (constant)".to_string(),
            Family::DoubleExponential { a, b } => {
                format!("rapidly varying: eps_j = {a}*{b}^j has no slowly varying factor")
            }
            Family::ExplicitTable { .. } => "explicit table; no analytic factor".to_string(),
        }
    }

    /// Whether the family is one of the named shrinking families
    /// (regularity index in `[-1, 0)`).
    pub fn is_shrinking_family(&self) -> bool {
        matches!(
            self.family,
            Family::Logarithmic { .. }
                | Family::Polynomial { .. }
                | Family::LogPowerExponential { .. }
                | Family::MildExponential { .. }
        )
    }

    /// Smallest index at which the raw shift formula is well defined.
    fn j_min(&self) -> u32 {
        match &self.family {
            Family::Logarithmic { .. } | Family::LogPowerExponential { .. } => 2,
            Family::Polynomial { .. }
            | Family::MildExponential { .. }
            | Family::StretchedSuperExponential { .. } => 1,
            Family::StandardGeometric { .. }
            | Family::DoubleExponential { .. }
            | Family::ExplicitTable { .. } => 0,
        }
    }

    /// Raw shift formula; callers must respect `j_min`.
    fn raw_shift(&self, j: u32) -> f64 {
        let jf = f64::from(j);
        match &self.family {
            Family::Logarithmic { eta } => eta / (jf * jf.ln()),
            Family::Polynomial { eta } => eta / jf,
            Family::LogPowerExponential { eta, q } => eta * q * jf.ln().powf(q - 1.0) / jf,
            Family::MildExponential { eta, p } => eta * jf.powf(-p),
            Family::StandardGeometric { b } => b.ln(),
            Family::StretchedSuperExponential { p } => jf.powf(*p),
            Family::DoubleExponential { a, b } => a * b.powf(jf),
            Family::ExplicitTable { values } => {
                (values[j as usize + 1] / values[j as usize]).ln()
            }
        }
    }

    /// Padded shift `ε̃_k = ε_{max(k, j_min)}` used when accumulating scales.
    fn shift_padded(&self, k: u32) -> f64 {
        self.raw_shift(k.max(self.j_min()))
    }

    /// Shift value `ε_j = γ(j) j^p`, strictly positive.
    ///
    /// Rejects `j = 0` for every family and indices below the family's
    /// smallest well-defined index (`j = 1` for families with `log j` in the
    /// formula). For explicit tables, returns `log(S_{j+1}/S_j)` and rejects
    /// `j` beyond the second-to-last entry.
    pub fn shift_value(&self, j: u32) -> Result<f64, ScaleError> {
        let min = self.j_min().max(1);
        if j < min {
            return Err(ScaleError::ShiftIndexTooSmall {
                family: self.family_name(),
                j,
                min,
            });
        }
        if let Family::ExplicitTable { values } = &self.family {
            if j as usize + 1 >= values.len() {
                return Err(ScaleError::IndexOutOfRange {
                    what: "table shift",
                    j: j as usize,
                    min: 1,
                    max: values.len().saturating_sub(2),
                });
            }
        }
        Ok(self.raw_shift(j))
    }

    /// Asymptotic closed form of the scale `S_j`, accepting real `j`.
    ///
    /// * Polynomial: `j^η`
    /// * Logarithmic: `(log j)^η`
    /// * Log-power exponential: `exp(η (log j)^q)`
    /// * Mild exponential: `exp(η j^{1-p}/(1-p))`
    /// * Standard geometric: `B^j` (exact)
    /// * Double exponential: `exp(a (B^j - 1)/(B - 1))` (exact at integer `j`)
    /// * Stretched superexponential: `exp(j^{p+1}/(p+1))`
    ///
    /// Explicit tables are rejected: they carry no closed form.
    pub fn closed_form_scale(&self, j: f64) -> Result<f64, ScaleError> {
        let needs_log = matches!(
            self.family,
            Family::Logarithmic { .. } | Family::LogPowerExponential { .. }
        );
        if !j.is_finite() || j <= 0.0 || (needs_log && j <= 1.0) {
            return Err(ScaleError::Parameter {
                family: self.family_name(),
                reason: format!("closed-form scale needs j > {}, got {j}", if needs_log { 1 } else { 0 }),
            });
        }
        match &self.family {
            Family::Polynomial { eta } => Ok(j.powf(*eta)),
            Family::Logarithmic { eta } => Ok(j.ln().powf(*eta)),
            Family::LogPowerExponential { eta, q } => Ok((eta * j.ln().powf(*q)).exp()),
            Family::MildExponential { eta, p } => Ok((eta * j.powf(1.0 - p) / (1.0 - p)).exp()),
            Family::StandardGeometric { b } => Ok(b.powf(j)),
            Family::DoubleExponential { a, b } => Ok((a * (b.powf(j) - 1.0) / (b - 1.0)).exp()),
            Family::StretchedSuperExponential { p } => Ok((j.powf(p + 1.0) / (p + 1.0)).exp()),
            Family::ExplicitTable { .. } => Err(ScaleError::NoClosedForm {
                family: self.family_name(),
            }),
        }
    }

    /// Spatial localization rate `Σ_{j;p}` of a shrinking family.
    ///
    /// Case table in terms of the regularity index `p` and slowly varying
    /// factor `γ(j)` of the shifts:
    ///
    /// * `p ∈ (-1, 0)` (mild exponential): `γ(j) j^p exp(j^{p+1} γ(j)/(p+1))`
    /// * `p = -1`, `γ` bounded away from `O(1/log j)` (polynomial,
    ///   log-power exponential): `γ(j) exp(γ(j) log j)`
    /// * `p = -1`, `γ(j) = η/log j` with `η > 1` (logarithmic):
    ///   `η (log j)^{η-1}`; for `η ≤ 1` the localization sum diverges and the
    ///   rate is undefined.
    ///
    /// Non-shrinking families are rejected. Requires `j ≥ 2` so that
    /// `log j > 0`.
    pub fn localization_rate(&self, j: u32) -> Result<f64, ScaleError> {
        if !self.is_shrinking_family() {
            return Err(ScaleError::NotShrinking {
                family: self.family_name(),
                op: "localization_rate",
            });
        }
        if j < 2 {
            return Err(ScaleError::ShiftIndexTooSmall {
                family: self.family_name(),
                j,
                min: 2,
            });
        }
        let jf = f64::from(j);
        match &self.family {
            Family::MildExponential { eta, p } => {
                // Regularity index -p ∈ (-1, 0), γ = η constant.
                Ok(eta * jf.powf(-p) * (eta * jf.powf(1.0 - p) / (1.0 - p)).exp())
            }
            Family::Polynomial { eta } => Ok(eta * jf.powf(*eta)),
            Family::LogPowerExponential { eta, q } => {
                let gamma = eta * q * jf.ln().powf(q - 1.0);
                Ok(gamma * (gamma * jf.ln()).exp())
            }
            Family::Logarithmic { eta } => {
                if *eta <= 1.0 {
                    return Err(ScaleError::LocalizationUndefined {
                        family: self.family_name(),
                        reason: format!(
                            "rate (log j)^(eta-1) requires eta > 1, got eta = {eta}"
                        ),
                    });
                }
                Ok(eta * jf.ln().powf(eta - 1.0))
            }
            _ => unreachable!("non-shrinking families rejected above"),
        }
    }

    /// Number of levels available from an explicit table (`None` for
    /// analytic families, which extend indefinitely).
    pub fn table_len(&self) -> Option<usize> {
        match &self.family {
            Family::ExplicitTable { values } => Some(values.len()),
            _ => None,
        }
    }
}

/// A built scale sequence with its derived per-level quantities.
///
/// `S` holds `n` strictly increasing values `S_0 < S_1 < … < S_{n-1}` with
/// `S_0 = 1`. Dilation factors exist for `0 ≤ j ≤ n-2`, bandwidth ratios for
/// `1 ≤ j ≤ n-2`, growth indices for `1 ≤ j ≤ n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSequence {
    s: Vec<f64>,
    h: Vec<f64>,
    delta: Vec<f64>,
    log_index: Vec<f64>,
    regime: Regime,
    convergence: Convergence,
    truncated: bool,
    family: String,
}

impl ScaleSequence {
    /// Number of scale values (levels `0..len-1`).
    pub fn len(&self) -> usize {
        self.s.len()
    }

    /// True when the sequence holds no values (never produced by
    /// [`build_scales`], which guarantees at least 3).
    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// All scale values `S_0..S_{n-1}`.
    pub fn scales(&self) -> &[f64] {
        &self.s
    }

    /// Scale `S_j`.
    pub fn scale(&self, j: usize) -> Result<f64, ScaleError> {
        self.s.get(j).copied().ok_or(ScaleError::IndexOutOfRange {
            what: "scale",
            j,
            min: 0,
            max: self.s.len() - 1,
        })
    }

    /// Dilation factor `h_j = S_{j+1}/S_j`, defined for `0 ≤ j ≤ n-2`.
    pub fn dilation_factor(&self, j: usize) -> Result<f64, ScaleError> {
        self.h.get(j).copied().ok_or(ScaleError::IndexOutOfRange {
            what: "dilation factor",
            j,
            min: 0,
            max: self.h.len().saturating_sub(1),
        })
    }

    /// Relative bandwidth ratio `Δ_j = (S_{j+1} - S_{j-1})/S_j`, defined for
    /// `1 ≤ j ≤ n-2`.
    pub fn bandwidth_ratio(&self, j: usize) -> Result<f64, ScaleError> {
        if j < 1 || j + 1 >= self.s.len() {
            return Err(ScaleError::IndexOutOfRange {
                what: "bandwidth ratio",
                j,
                min: 1,
                max: self.s.len().saturating_sub(2),
            });
        }
        Ok(self.delta[j - 1])
    }

    /// Logarithmic growth index `L_j = log(S_j)/j`, defined for `j ≥ 1`.
    pub fn log_growth_index(&self, j: usize) -> Result<f64, ScaleError> {
        if j < 1 || j >= self.s.len() {
            return Err(ScaleError::IndexOutOfRange {
                what: "log growth index",
                j,
                min: 1,
                max: self.s.len() - 1,
            });
        }
        Ok(self.log_index[j - 1])
    }

    /// One-step separation ratio `R_j(β) = (S_j - S_{j-1}) / S_{j-1}^{1-β}`,
    /// defined for `1 ≤ j ≤ n-1` and `0 ≤ β < 1`.
    pub fn separation_ratio(&self, j: usize, beta: f64) -> Result<f64, ScaleError> {
        if !(0.0..1.0).contains(&beta) {
            return Err(ScaleError::BetaOutOfRange { beta });
        }
        if j < 1 || j >= self.s.len() {
            return Err(ScaleError::IndexOutOfRange {
                what: "separation ratio",
                j,
                min: 1,
                max: self.s.len() - 1,
            });
        }
        let (prev, cur) = (self.s[j - 1], self.s[j]);
        Ok((cur - prev) / prev.powf(1.0 - beta))
    }

    /// Regime label assigned at build time (Undetermined when fewer than 16
    /// levels were available).
    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Shrinking-subcase label assigned at build time.
    pub fn convergence(&self) -> Convergence {
        self.convergence
    }

    /// Whether the sequence was truncated by the floating-point overflow
    /// guard before reaching the requested number of levels.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Family label of the generating model.
    pub fn family(&self) -> &str {
        &self.family
    }
}

/// Builds the scale sequence `S_j = exp(Σ_{k=0}^{j-1} ε̃_k)` for `levels`
/// levels (`j = 0..levels-1`) and fills every derived array.
///
/// Requires `levels ≥ 3`. For explicit tables the requested level count must
/// not exceed the table length. If the cumulative scale would overflow the
/// `f64` range (relevant for double-exponential shifts), the sequence is
/// truncated at the last finite level and flagged; truncation below 3 levels
/// is an error. The regime label is assigned by [`classify_regime`] when at
/// least 16 levels are available, otherwise `Undetermined`.
pub fn build_scales(model: &ShiftModel, levels: usize) -> Result<ScaleSequence, ScaleError> {
    if levels < 3 {
        return Err(ScaleError::HorizonTooShort {
            what: "build_scales",
            needed: 3,
            got: levels,
        });
    }
    let mut truncated = false;
    let s: Vec<f64> = if let Family::ExplicitTable { values } = &model.family {
        if levels > values.len() {
            return Err(ScaleError::HorizonTooShort {
                what: "explicit table",
                needed: levels,
                got: values.len(),
            });
        }
        values[..levels].to_vec()
    } else {
        let mut s = Vec::with_capacity(levels);
        s.push(1.0);
        let mut log_s = 0.0_f64;
        for j in 1..levels {
            let eps = model.shift_padded(j as u32 - 1);
            log_s += eps;
            if !log_s.is_finite() || log_s > LN_F64_MAX {
                truncated = true;
                break;
            }
            s.push(log_s.exp());
        }
        if s.len() < 3 {
            return Err(ScaleError::Overflow { level: s.len() });
        }
        s
    };

    let n = s.len();
    let h: Vec<f64> = (0..n - 1).map(|j| s[j + 1] / s[j]).collect();
    let delta: Vec<f64> = (1..n - 1).map(|j| (s[j + 1] - s[j - 1]) / s[j]).collect();
    let log_index: Vec<f64> = (1..n).map(|j| s[j].ln() / j as f64).collect();

    let regime = if n >= 16 {
        classify_deltas(&delta, DEFAULT_REGIME_TOL)
    } else {
        Regime::Undetermined
    };
    let convergence = if regime == Regime::Shrinking {
        if model.is_shrinking_family() {
            // The four named shrinking families all have divergent shift
            // series (Σ ε_j = ∞), so the scales grow without bound.
            Convergence::Divergent
        } else {
            // Data-driven: the scales stabilize iff the tail stops moving.
            let (mid, last) = (s[n / 2], s[n - 1]);
            if (last - mid) / last < CONVERGENCE_STABILIZATION_TOL {
                Convergence::TotallyConvergent
            } else {
                Convergence::Divergent
            }
        }
    } else {
        Convergence::NotApplicable
    };

    Ok(ScaleSequence {
        s,
        h,
        delta,
        log_index,
        regime,
        convergence,
        truncated,
        family: model.family_name().to_string(),
    })
}

/// Least-squares slope of `y` against `x`.
fn lsq_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        num += (xi - mx) * (yi - my);
        den += (xi - mx) * (xi - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Regime decision from the bandwidth-ratio tail (`delta[i]` is `Δ_{i+1}`).
fn classify_deltas(delta: &[f64], tol: f64) -> Regime {
    let count = delta.len();
    if count < 4 {
        return Regime::Undetermined;
    }
    let tail_start = count / 2;
    let tail = &delta[tail_start..];
    if tail.iter().any(|d| !d.is_finite()) {
        return Regime::Spreading;
    }
    // Log-log slope of Δ_j against j over the tail.
    let xs: Vec<f64> = (tail_start..count).map(|i| ((i + 1) as f64).ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|d| d.ln()).collect();
    let slope = lsq_slope(&xs, &ys);
    let first = tail[0];
    let last = tail[tail.len() - 1];
    if slope > 0.1 && last > first {
        return Regime::Spreading;
    }
    if slope < -0.1 && last < first {
        return Regime::Shrinking;
    }
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let max = tail.iter().cloned().fold(f64::MIN, f64::max);
    let min = tail.iter().cloned().fold(f64::MAX, f64::min);
    if (max - min) / mean <= tol {
        return Regime::Stable;
    }
    if last > 1.0 / tol && last > first {
        return Regime::Spreading;
    }
    Regime::Undetermined
}

/// Classifies the growth regime from the tail half of the bandwidth ratios.
///
/// Requires at least 16 levels so that tail estimation is meaningful.
/// Decision order: spreading when the tail is non-finite or has a clearly
/// positive log-log trend; shrinking when the trend is clearly negative and
/// decreasing; stable when the tail's relative variation stays within `tol`;
/// spreading when the final ratio exceeds `1/tol` and grew; otherwise
/// `Undetermined` rather than guessing.
pub fn classify_regime(seq: &ScaleSequence, tol: f64) -> Result<Regime, ScaleError> {
    if seq.len() < 16 {
        return Err(ScaleError::HorizonTooShort {
            what: "classify_regime",
            needed: 16,
            got: seq.len(),
        });
    }
    Ok(classify_deltas(&seq.delta, tol))
}

/// Result of scanning the separation ratios `R_j(β)` along a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparationCheck {
    /// First index after which `R_j(β) > 1` held for every later scanned
    /// index; `None` when the threshold is never permanently exceeded.
    pub satisfied_from: Option<usize>,
}

/// Scans `R_j(β) = (S_j - S_{j-1})/S_{j-1}^{1-β}` for `j = 1..=horizon` and
/// reports the first index after which the ratio stays above 1.
///
/// Only shrinking families are accepted. The scan runs entirely in the log
/// domain (`log R_j = β log S_{j-1} + log(e^{ε̃_{j-1}} - 1)`), so horizons
/// far beyond floating-point scale overflow — e.g. `10^6` levels of
/// mild-exponential growth — are handled exactly.
pub fn separation_threshold_check(
    model: &ShiftModel,
    beta: f64,
    horizon: usize,
) -> Result<SeparationCheck, ScaleError> {
    if !model.is_shrinking_family() {
        return Err(ScaleError::NotShrinking {
            family: model.family_name(),
            op: "separation_threshold_check",
        });
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(ScaleError::BetaOutOfRange { beta });
    }
    if horizon < 1 {
        return Err(ScaleError::HorizonTooShort {
            what: "separation_threshold_check",
            needed: 1,
            got: horizon,
        });
    }
    let mut log_s = 0.0_f64; // log S_{j-1}, starting at log S_0 = 0.
    let mut last_below: Option<usize> = None;
    let mut any_above = false;
    for j in 1..=horizon {
        let eps = model.shift_padded(j as u32 - 1);
        let log_r = beta * log_s + eps.exp_m1().ln();
        if log_r > 0.0 {
            any_above = true;
        } else {
            last_below = Some(j);
        }
        log_s += eps;
    }
    let satisfied_from = match (any_above, last_below) {
        (_, Some(j)) if j == horizon => None,
        (true, Some(j)) => Some(j + 1),
        (true, None) => Some(1),
        (false, _) => None,
    };
    Ok(SeparationCheck { satisfied_from })
}
