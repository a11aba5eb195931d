//! Subsampled goodness-of-fit statistic for isotropic Gaussian fields.
//!
//! At a needlet level `j`, normalized coefficients `β̃_{j,k} = β_{j,k} /
//! σ_{j,k}` are collected over a spatially separated subsample `D_j` of the
//! level grid, and the statistic
//!
//! ```text
//! I_j = (1 / card D_j) Σ_{k ∈ D_j} (β̃_{j,k}² − 1)
//! ```
//!
//! is simulated over many field replicates. When the scale sequence shrinks
//! fast enough that the separation ratio `(S_j − S_{j−1}) / S_{j−1}^{1−β}`
//! stays above one, the subsampled coefficients decorrelate, `I_j` obeys a
//! central limit theorem, and its exact variance — computable from the
//! Gaussian fourth-moment identity `Cov(β², β'²) = 2 Cov(β, β')²` — stays
//! close to the independent-case value `2 / card D_j`.
//!
//! The subsample spacing is `S_{j−1}^{−(1−β−ε_sep)}`: slightly wider than
//! the reciprocal `1 / S_{j−1}^{1−β}` of the correlation decay scale, so
//! pairwise correlations are uniformly small.

use crate::cubature::{subsample_separated, CubatureError};
use crate::field::{coeff_correlation, coeff_covariance, FieldError, SpectrumModel};
use crate::harmonics::packed_index;
use crate::needlet::{NeedletError, NeedletSystem};
use crate::scale::{build_scales, separation_threshold_check, ScaleError, ScaleSequence, ShiftModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

/// Largest next scale `S_{j+1}` the direct harmonic pipeline accepts.
pub const DESK_SCALE_CAP: f64 = 300.0;

/// Default separation exponent `ε_sep`.
pub const DEFAULT_EPSILON_SEP: f64 = 0.1;

/// Errors raised by the goodness-of-fit pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GofError {
    /// Scale-sequence construction failed.
    #[error(transparent)]
    Scale(#[from] ScaleError),
    /// Needlet-system construction failed.
    #[error(transparent)]
    Needlet(#[from] NeedletError),
    /// Grid subsampling failed.
    #[error(transparent)]
    Cubature(#[from] CubatureError),
    /// Spectrum or covariance evaluation failed.
    #[error(transparent)]
    Field(#[from] FieldError),
    /// Invalid configuration values.
    #[error("invalid configuration: {reason}")]
    BadConfig { reason: String },
    /// The separation threshold is not met at the requested level.
    #[error(
        "separation ratio below 1 at level {level} for beta = {beta} \
         (threshold first satisfied from {satisfied_from:?})"
    )]
    SeparationNotSatisfied {
        level: usize,
        beta: f64,
        satisfied_from: Option<usize>,
    },
    /// The level needs a bandlimit beyond the direct-synthesis cap.
    #[error(
        "level {level} needs next scale {s_next:.1} > {cap} — bandlimit \
         infeasible for direct harmonic synthesis"
    )]
    BandlimitInfeasible { level: usize, s_next: f64, cap: f64 },
    /// Too few separated points survive subsampling.
    #[error("subsample at level {level} kept {card} point(s); need at least 2")]
    EmptySubsample { level: usize, card: usize },
    /// Internal invariant violation: the subsample is not separated.
    #[error(
        "internal invariant violation: subsample pair ({a}, {b}) at angle \
         {angle:.6} below required separation {required:.6}"
    )]
    SeparationViolated {
        a: usize,
        b: usize,
        angle: f64,
        required: f64,
    },
}

/// Configuration of one goodness-of-fit run.
#[derive(Debug, Clone)]
pub struct GofConfig {
    /// Shift model generating the scale sequence (must shrink).
    pub shift_model: ShiftModel,
    /// Angular power spectrum of the simulated null field.
    pub spectrum: SpectrumModel,
    /// Needlet level `j ≥ 1` under test.
    pub level: usize,
    /// Separation exponent `ε_sep > 0`; subsample spacing is
    /// `S_{j−1}^{−(1−β−ε_sep)}`.
    pub epsilon_sep: f64,
    /// Monte-Carlo replicates (≥ 4 so all reported moments exist).
    pub replicates: usize,
    /// Master seed for subsampling and field replicates.
    pub seed: u64,
}

impl GofConfig {
    /// Configuration with the default separation exponent.
    pub fn new(
        shift_model: ShiftModel,
        spectrum: SpectrumModel,
        level: usize,
        replicates: usize,
        seed: u64,
    ) -> Self {
        Self {
            shift_model,
            spectrum,
            level,
            epsilon_sep: DEFAULT_EPSILON_SEP,
            replicates,
            seed,
        }
    }
}

/// Moments and distributional diagnostics of the simulated statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct GofReport {
    /// Level under test.
    pub level: usize,
    /// Subsample cardinality `card D_j`.
    pub card: usize,
    /// Required pairwise separation (radians).
    pub min_separation: f64,
    /// Replicates used.
    pub replicates: usize,
    /// Sample mean of `I_j` (expected 0 under the null).
    pub mean: f64,
    /// Standard error of the sample mean.
    pub mean_se: f64,
    /// Sample variance of `I_j`.
    pub variance: f64,
    /// Standard error of the sample variance (kurtosis-corrected).
    pub variance_se: f64,
    /// Exact variance from the Gaussian fourth-moment identity.
    pub exact_variance: f64,
    /// Sample skewness.
    pub skewness: f64,
    /// Sample excess kurtosis.
    pub excess_kurtosis: f64,
    /// Kolmogorov distance of `I_j / sqrt(exact_variance)` to N(0, 1).
    pub kolmogorov_distance: f64,
}

/// Standard normal CDF `Φ(x)` via the complementary error function.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov distance between a sample and the standard normal.
pub fn kolmogorov_distance_to_normal(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let cdf = standard_normal_cdf(z);
            let upper = (i as f64 + 1.0) / n - cdf;
            let lower = cdf - i as f64 / n;
            upper.max(lower)
        })
        .fold(0.0, f64::max)
}

/// `(2 / card²) Σ_{k,k'} corr(k, k')²` — the exact variance of the
/// statistic given a pairwise correlation function.
fn variance_double_sum<F: Fn(usize, usize) -> f64>(card: usize, corr: F) -> f64 {
    let mut acc = 0.0;
    for a in 0..card {
        acc += corr(a, a).powi(2);
        for b in (a + 1)..card {
            acc += 2.0 * corr(a, b).powi(2);
        }
    }
    2.0 * acc / (card as f64 * card as f64)
}

/// Everything `run_gof` and `exact_variance` share: the validated system,
/// the separated subsample, and the required spacing.
struct Prepared {
    seq: ScaleSequence,
    sys: NeedletSystem,
    subsample: Vec<usize>,
    min_dist: f64,
    beta: f64,
}

fn prepare(config: &GofConfig) -> Result<Prepared, GofError> {
    if config.replicates < 4 {
        return Err(GofError::BadConfig {
            reason: format!(
                "need at least 4 replicates for finite moment estimates, got {}",
                config.replicates
            ),
        });
    }
    if !(config.epsilon_sep > 0.0) || !config.epsilon_sep.is_finite() {
        return Err(GofError::BadConfig {
            reason: format!("epsilon_sep = {} must be positive", config.epsilon_sep),
        });
    }
    if config.level < 1 {
        return Err(GofError::BadConfig {
            reason: "level must be at least 1".into(),
        });
    }
    let beta = config.spectrum.beta_smoothness();
    if beta + config.epsilon_sep >= 1.0 {
        return Err(GofError::BadConfig {
            reason: format!(
                "beta + epsilon_sep = {} must stay below 1 for a positive \
                 spacing exponent",
                beta + config.epsilon_sep
            ),
        });
    }
    // The statistic is only valid where coefficients decorrelate: the
    // separation ratio must be at or above one from the tested level on.
    let horizon = config.level.max(62) + 2;
    let check = separation_threshold_check(&config.shift_model, beta, horizon)?;
    match check.satisfied_from {
        Some(m) if m <= config.level => {}
        other => {
            return Err(GofError::SeparationNotSatisfied {
                level: config.level,
                beta,
                satisfied_from: other,
            })
        }
    }
    let seq = build_scales(&config.shift_model, config.level + 2)?;
    let s_next = seq.scale(config.level + 1)?;
    if s_next > DESK_SCALE_CAP {
        return Err(GofError::BandlimitInfeasible {
            level: config.level,
            s_next,
            cap: DESK_SCALE_CAP,
        });
    }
    let sys = NeedletSystem::new(&seq, config.level + 1)?;
    let min_dist = seq
        .scale(config.level - 1)?
        .powf(-(1.0 - beta - config.epsilon_sep));
    let subsample = subsample_separated(sys.grid(config.level)?, min_dist, config.seed)?;
    if subsample.len() < 2 {
        return Err(GofError::EmptySubsample {
            level: config.level,
            card: subsample.len(),
        });
    }
    // Exact recheck of the separation invariant.
    let grid = sys.grid(config.level)?;
    for (i, &a) in subsample.iter().enumerate() {
        for &b in &subsample[i + 1..] {
            let angle = grid.point(a).great_circle_angle(grid.point(b));
            if angle < min_dist - 1e-12 {
                return Err(GofError::SeparationViolated {
                    a,
                    b,
                    angle,
                    required: min_dist,
                });
            }
        }
    }
    Ok(Prepared {
        seq,
        sys,
        subsample,
        min_dist,
        beta,
    })
}

/// Exact variance of `I_j` over a given subsample:
/// `(2 / card²) Σ_{k,k' ∈ D} Corr(β_{j,k}, β_{j,k'})²`.
pub fn exact_variance_for(
    sys: &NeedletSystem,
    model: &SpectrumModel,
    j: usize,
    subsample: &[usize],
) -> Result<f64, GofError> {
    let mut corr = vec![vec![0.0; subsample.len()]; subsample.len()];
    for (a, &k) in subsample.iter().enumerate() {
        corr[a][a] = 1.0;
        for (off, &k2) in subsample[a + 1..].iter().enumerate() {
            let b = a + 1 + off;
            let c = coeff_correlation(sys, model, j, k, k2)?;
            corr[a][b] = c;
            corr[b][a] = c;
        }
    }
    Ok(variance_double_sum(subsample.len(), |a, b| corr[a][b]))
}

/// Exact variance of the statistic under a validated configuration.
pub fn exact_variance(config: &GofConfig) -> Result<f64, GofError> {
    let prep = prepare(config)?;
    exact_variance_for(&prep.sys, &config.spectrum, config.level, &prep.subsample)
}

/// Support-local normalized weight rows: `β̃_{j,k} = Σ_i rows[k][i] z[i]`
/// where `z` are the standard normal draws of the support multipoles in
/// `(ℓ, m)` order. The rows fold in `sqrt(λ_k) b_j(ℓ) sqrt(C_ℓ) / σ_{j,k}`.
fn normalized_weight_rows(
    sys: &NeedletSystem,
    model: &SpectrumModel,
    j: usize,
    subsample: &[usize],
) -> Result<(Vec<u32>, Vec<Vec<f64>>), GofError> {
    let support = sys.support(j)?.to_vec();
    let b_weights = sys.support_weights(j)?;
    let grid = sys.grid(j)?;
    let row_len: usize = support.iter().map(|&l| 2 * l as usize + 1).sum();
    let lmax = *support.last().expect("validated nonempty support");
    let mut rows = Vec::with_capacity(subsample.len());
    for &k in subsample {
        let sigma = coeff_covariance(sys, model, j, k, k)?.sqrt();
        let center = grid.point(k);
        let sqrt_lambda = grid.weight(k).sqrt();
        let table = crate::harmonics::AssocLegendreTable::new(lmax, center.theta());
        let mut row = Vec::with_capacity(row_len);
        for (i, &l) in support.iter().enumerate() {
            let factor = sqrt_lambda * b_weights[i] * model.spectrum_eval(l)?.sqrt() / sigma;
            for m in -(l as i32)..=(l as i32) {
                let mu = m.unsigned_abs();
                let p = table.value(l, mu);
                let y = if m == 0 {
                    p
                } else {
                    let (sin_m, cos_m) = (f64::from(mu) * center.phi()).sin_cos();
                    std::f64::consts::SQRT_2 * p * if m > 0 { cos_m } else { sin_m }
                };
                row.push(factor * y);
            }
        }
        rows.push(row);
    }
    Ok((support, rows))
}

/// Runs the full Monte-Carlo pipeline: simulate `R` null fields, form the
/// statistic over the separated subsample, and report moments plus the
/// Kolmogorov distance of the exactly standardized statistic.
///
/// Replicate draws reuse the per-(ℓ, m) counter streams of the field
/// simulator, so the run is deterministic for a given configuration and
/// independent of the parallel schedule.
pub fn run_gof(config: &GofConfig) -> Result<GofReport, GofError> {
    let prep = prepare(config)?;
    let j = config.level;
    let exact_var = exact_variance_for(&prep.sys, &config.spectrum, j, &prep.subsample)?;
    let (support, rows) = normalized_weight_rows(&prep.sys, &config.spectrum, j, &prep.subsample)?;
    let card = prep.subsample.len() as f64;
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let stats: Vec<f64> = (0..config.replicates as u64)
        .into_par_iter()
        .map(|replicate| {
            let mut z = Vec::with_capacity(rows[0].len());
            for &l in &support {
                for m in -(l as i32)..=(l as i32) {
                    let stream = (replicate << 24) | packed_index(l, m) as u64;
                    let mut rng = base.clone();
                    rng.set_stream(stream);
                    z.push(StandardNormal.sample(&mut rng));
                }
            }
            let mut acc = 0.0;
            for row in &rows {
                let beta_tilde: f64 = row.iter().zip(&z).map(|(w, v): (&f64, &f64)| w * v).sum();
                acc += beta_tilde * beta_tilde - 1.0;
            }
            acc / card
        })
        .collect();
    let n = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / n;
    let m2 = stats.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = stats.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let m4 = stats.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let variance = m2 * n / (n - 1.0);
    let variance_se = ((m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt();
    let sd_exact = exact_var.sqrt();
    let standardized: Vec<f64> = stats.iter().map(|x| x / sd_exact).collect();
    Ok(GofReport {
        level: j,
        card: prep.subsample.len(),
        min_separation: prep.min_dist,
        replicates: config.replicates,
        mean,
        mean_se: (variance / n).sqrt(),
        variance,
        variance_se,
        exact_variance: exact_var,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        kolmogorov_distance: kolmogorov_distance_to_normal(&standardized),
    })
}

/// Subsample cardinality and spacing a configuration would use, without
/// running replicates (cheap feasibility probe).
pub fn subsample_summary(config: &GofConfig) -> Result<(usize, f64), GofError> {
    let prep = prepare(config)?;
    Ok((prep.subsample.len(), prep.min_dist))
}

/// The scale sequence and separation diagnostics backing a configuration.
pub fn prepared_scales(config: &GofConfig) -> Result<(ScaleSequence, f64), GofError> {
    let prep = prepare(config)?;
    Ok((prep.seq, prep.beta))
}
