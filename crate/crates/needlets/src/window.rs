//! Smooth frequency windows built from a compactly supported mollifier.
//!
//! Construction pipeline:
//!
//! 1. mollifier `φ₁(t) = exp(-1/(1-t²))` on `(-1, 1)`, zero outside;
//! 2. its normalized distribution function
//!    `φ₂(x) = ∫_{-1}^{x} φ₁ / ∫_{-1}^{1} φ₁`, a smooth step from 0 to 1;
//! 3. scaling functions `a_j(u)`: equal to 1 on `[0, S_{j-1}]`, the `φ₂`
//!    transition on `(S_{j-1}, S_j)`, and 0 from `S_j` on;
//! 4. weight functions `b_j(u) = sqrt(a_{j+1}(u) - a_j(u))`, supported on
//!    `[S_{j-1}, S_{j+1}]` with `b_j(S_j) = 1`.
//!
//! Because the `a_j` differences telescope, the squared weights form a
//! partition of unity: `Σ_j b_j²(u) = 1` on `[1, S_{J-1}]`. The sum includes
//! a level-0 residual `b_0²(u) := a_1(u)` (supported on `[0, S_1]`); without
//! it the telescoping sum equals `1 - a_1(u) ≠ 1` below `S_1`.
//!
//! Each `a_j` can equivalently be produced from one universal template
//! `a(x)` (1 below -1, `1 - φ₂(x)` inside, 0 above 1) through the affine
//! argument `τ_j(u) = (2u - S_j - S_{j-1})/(S_j - S_{j-1})`; `template_mode`
//! selects that route, and both agree to quadrature accuracy.

use crate::cubature::gauss_legendre;
use crate::scale::ScaleSequence;
use std::sync::OnceLock;
use thiserror::Error;

/// Gauss–Legendre order used for the cached normalization constant.
const NORMALIZATION_ORDER: usize = 128;

/// Default Gauss–Legendre order for distribution-function evaluations.
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

/// Errors raised by window construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WindowError {
    /// Quadrature order outside the supported range.
    #[error("quadrature order {order} outside [4, 4096]")]
    BadQuadratureOrder { order: usize },
    /// Window scales must be positive and strictly increasing with at least
    /// two values.
    #[error("invalid window scales: {reason}")]
    BadScales { reason: String },
    /// A level outside the defined range was requested.
    #[error("{what} level j = {j} outside valid range [{min}, {max}]")]
    LevelOutOfRange {
        what: &'static str,
        j: usize,
        min: usize,
        max: usize,
    },
    /// Frequency arguments must be nonnegative finite reals.
    #[error("frequency argument u = {u} must be a nonnegative finite real")]
    BadArgument { u: f64 },
    /// Derivative probe order outside `{1, 2}` or probe grid too coarse.
    #[error("derivative probe needs n in {{1, 2}} and grid_size >= 256, got n = {n}, grid_size = {grid_size}")]
    BadProbe { n: u32, grid_size: usize },
    /// Multipole enumeration would overflow (scales too large to list).
    #[error("support of level {j} reaches {s_next:.3e}, too large to enumerate multipoles")]
    SupportTooLarge { j: usize, s_next: f64 },
}

/// The mollifier `φ₁(t) = exp(-1/(1-t²))` for `|t| < 1`, zero outside;
/// smooth everywhere, flat to all orders at `±1`.
pub fn mollifier_eval(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Cached `∫_{-1}^{1} φ₁(t) dt` at quadrature order 128 (error well below
/// 1e-14; the value is ≈ 0.444).
pub fn mollifier_normalization() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| {
        let (nodes, weights) = gauss_legendre(NORMALIZATION_ORDER);
        nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * mollifier_eval(*x))
            .sum()
    })
}

/// Distribution function `φ₂(x)` at the default quadrature order.
pub fn mollifier_cdf(x: f64) -> f64 {
    static DEFAULT: OnceLock<Mollifier> = OnceLock::new();
    DEFAULT
        .get_or_init(|| Mollifier::new(DEFAULT_QUADRATURE_ORDER).expect("default order valid"))
        .cdf(x)
}

/// Mollifier evaluator with a fixed Gauss–Legendre order for the
/// distribution function.
#[derive(Debug, Clone)]
pub struct Mollifier {
    quadrature_order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for Mollifier {
    fn default() -> Self {
        Self::new(DEFAULT_QUADRATURE_ORDER).expect("default order valid")
    }
}

impl Mollifier {
    /// Builds an evaluator using `quadrature_order` Gauss–Legendre nodes per
    /// distribution-function call.
    pub fn new(quadrature_order: usize) -> Result<Self, WindowError> {
        if !(4..=4096).contains(&quadrature_order) {
            return Err(WindowError::BadQuadratureOrder {
                order: quadrature_order,
            });
        }
        let (nodes, weights) = gauss_legendre(quadrature_order);
        Ok(Self {
            quadrature_order,
            nodes,
            weights,
        })
    }

    /// Gauss–Legendre order used per distribution-function call.
    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    /// Normalization constant `∫_{-1}^{1} φ₁` (shared cache, order 128).
    pub fn normalization(&self) -> f64 {
        mollifier_normalization()
    }

    /// `φ₁(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        mollifier_eval(t)
    }

    /// Distribution function `φ₂(x) = ∫_{-1}^{x} φ₁ / ∫_{-1}^{1} φ₁`,
    /// clamped to 0 below `x = -1` and 1 above `x = 1`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        // Map [-1, 1] quadrature nodes onto [-1, x].
        let half_width = (x + 1.0) / 2.0;
        let center = (x - 1.0) / 2.0;
        let integral: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(u, w)| w * mollifier_eval(center + half_width * u))
            .sum::<f64>()
            * half_width;
        (integral / self.normalization()).clamp(0.0, 1.0)
    }
}

/// A family of frequency windows over a scale sequence.
///
/// Holds scales `S_0 < S_1 < … < S_n` and defines scaling functions `a_j`
/// for `1 ≤ j ≤ n` and weight functions `b_j` for `0 ≤ j ≤ n-1` (level 0 is
/// the residual `b_0² = a_1`). A system built over `n+1` scale values thus
/// carries `n` weight levels.
#[derive(Debug, Clone)]
pub struct WindowSystem {
    scales: Vec<f64>,
    mollifier: Mollifier,
    template_mode: bool,
}

impl WindowSystem {
    /// Builds the windows over a generated scale sequence.
    pub fn new(seq: &ScaleSequence, template_mode: bool) -> Result<Self, WindowError> {
        Self::from_values(seq.scales().to_vec(), template_mode)
    }

    /// Builds the windows over explicit scale values (positive, strictly
    /// increasing, at least two).
    pub fn from_values(scales: Vec<f64>, template_mode: bool) -> Result<Self, WindowError> {
        if scales.len() < 2 {
            return Err(WindowError::BadScales {
                reason: format!("need at least 2 scale values, got {}", scales.len()),
            });
        }
        for (i, w) in scales.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() || w[0] <= 0.0 || w[1] <= w[0] {
                return Err(WindowError::BadScales {
                    reason: format!(
                        "scales must be positive and strictly increasing; indices {i}, {} hold {}, {}",
                        i + 1,
                        w[0],
                        w[1]
                    ),
                });
            }
        }
        Ok(Self {
            scales,
            mollifier: Mollifier::default(),
            template_mode,
        })
    }

    /// Scale values `S_0..S_n`.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Number of weight levels (`b_0..b_{levels-1}`).
    pub fn levels(&self) -> usize {
        self.scales.len() - 1
    }

    /// Whether evaluation routes through the universal template.
    pub fn template_mode(&self) -> bool {
        self.template_mode
    }

    fn check_u(u: f64) -> Result<(), WindowError> {
        if !u.is_finite() || u < 0.0 {
            return Err(WindowError::BadArgument { u });
        }
        Ok(())
    }

    /// Scaling function `a_j(u)` for `1 ≤ j ≤ levels`: smooth cutoff equal
    /// to 1 up to `S_{j-1}`, transitioning to 0 at `S_j`.
    pub fn scaling_fn(&self, j: usize, u: f64) -> Result<f64, WindowError> {
        if j < 1 || j > self.levels() {
            return Err(WindowError::LevelOutOfRange {
                what: "scaling function",
                j,
                min: 1,
                max: self.levels(),
            });
        }
        Self::check_u(u)?;
        let (lo, hi) = (self.scales[j - 1], self.scales[j]);
        if u <= lo {
            return Ok(1.0);
        }
        if u >= hi {
            return Ok(0.0);
        }
        if self.template_mode {
            let tau = (2.0 * u - hi - lo) / (hi - lo);
            Ok((1.0 - self.mollifier.cdf(tau)).clamp(0.0, 1.0))
        } else {
            Ok(self.mollifier.cdf((hi + lo - 2.0 * u) / (hi - lo)))
        }
    }

    /// Weight function `b_j(u)`.
    ///
    /// For `j ≥ 1`: `sqrt(max(a_{j+1}(u) - a_j(u), 0))`, supported on
    /// `[S_{j-1}, S_{j+1}]` with `b_j(S_j) = 1`. For `j = 0`: the residual
    /// `sqrt(a_1(u))`, supported on `[0, S_1]`. The `max` guards `-1e-17`
    /// round-off at the support endpoints.
    pub fn weight_fn(&self, j: usize, u: f64) -> Result<f64, WindowError> {
        if j + 1 > self.levels() {
            return Err(WindowError::LevelOutOfRange {
                what: "weight function",
                j,
                min: 0,
                max: self.levels() - 1,
            });
        }
        Self::check_u(u)?;
        if j == 0 {
            return Ok(self.scaling_fn(1, u)?.sqrt());
        }
        let diff = self.scaling_fn(j + 1, u)? - self.scaling_fn(j, u)?;
        Ok(diff.max(0.0).sqrt())
    }

    /// Support multipoles `Λ_j = {ℓ ∈ ℕ : S_{j-1} < ℓ < S_{j+1}, b_j(ℓ) > 0}`
    /// (for `j = 0`: `{ℓ ∈ ℕ : ℓ < S_1, b_0(ℓ) > 0}`, which includes
    /// `ℓ = 0`). May be empty when no integer lies strictly inside the
    /// support — callers should treat empty levels as inactive.
    pub fn window_support_multipoles(&self, j: usize) -> Result<Vec<u32>, WindowError> {
        if j + 1 > self.levels() {
            return Err(WindowError::LevelOutOfRange {
                what: "support multipoles",
                j,
                min: 0,
                max: self.levels() - 1,
            });
        }
        let upper = self.scales[j + 1];
        if upper > u32::MAX as f64 / 2.0 {
            return Err(WindowError::SupportTooLarge { j, s_next: upper });
        }
        let lower = if j == 0 { -1.0 } else { self.scales[j - 1] };
        let mut out = Vec::new();
        let start = if j == 0 { 0 } else { lower.floor() as u32 + 1 };
        let mut l = start;
        while (l as f64) < upper {
            if (l as f64) > lower && self.weight_fn(j, l as f64)? > 0.0 {
                out.push(l);
            }
            l += 1;
        }
        Ok(out)
    }

    /// Partition-of-unity sum `Σ_{j=0}^{levels-1} b_j²(u)` (equals 1 on
    /// `[1, S_{levels-1}]` up to accumulated rounding).
    pub fn partition_sum(&self, u: f64) -> Result<f64, WindowError> {
        Self::check_u(u)?;
        let mut sum = self.scaling_fn(1, u)?; // b_0² = a_1
        for j in 1..self.levels() {
            let b = self.weight_fn(j, u)?;
            sum += b * b;
        }
        Ok(sum)
    }

    /// Finite-difference probe of the `n`-th derivative of `b_j`: returns
    /// `max |b_j^{(n)}(u)| · (S_j - S_{j-1})^n` over a uniform grid on
    /// `[S_{j-1}, S_{j+1}]`.
    ///
    /// The scaled product stays bounded across levels (self-similar
    /// transitions make it exactly level-independent for geometric scales).
    /// Requires `1 ≤ j ≤ levels-1`, `n ∈ {1, 2}`, `grid_size ≥ 256`.
    pub fn derivative_bound_probe(
        &self,
        j: usize,
        n: u32,
        grid_size: usize,
    ) -> Result<f64, WindowError> {
        if !(1..=2).contains(&n) || grid_size < 256 {
            return Err(WindowError::BadProbe { n, grid_size });
        }
        if j < 1 || j + 1 > self.levels() {
            return Err(WindowError::LevelOutOfRange {
                what: "derivative probe",
                j,
                min: 1,
                max: self.levels() - 1,
            });
        }
        let (lo, hi) = (self.scales[j - 1], self.scales[j + 1]);
        let h = (hi - lo) / (grid_size - 1) as f64;
        let values: Vec<f64> = (0..grid_size)
            .map(|i| self.weight_fn(j, lo + i as f64 * h))
            .collect::<Result<_, _>>()?;
        let mut max_abs = 0.0_f64;
        for i in 1..grid_size - 1 {
            let d = match n {
                1 => (values[i + 1] - values[i - 1]) / (2.0 * h),
                _ => (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h),
            };
            max_abs = max_abs.max(d.abs());
        }
        let width = self.scales[j] - self.scales[j - 1];
        Ok(max_abs * width.powi(n as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::{build_scales, ShiftModel};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn geometric_system(levels: usize) -> WindowSystem {
        let seq = build_scales(&ShiftModel::standard_geometric(2.0).unwrap(), levels + 1).unwrap();
        WindowSystem::new(&seq, false).unwrap()
    }

    #[test]
    fn mollifier_point_values() {
        assert_relative_eq!(mollifier_eval(0.0), (-1.0_f64).exp(), max_relative = 1e-15);
        assert_eq!(mollifier_eval(1.0), 0.0);
        assert_eq!(mollifier_eval(-1.0), 0.0);
        assert_eq!(mollifier_eval(1.7), 0.0);
        assert_relative_eq!(
            mollifier_eval(0.5),
            0.26359713811572677,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            mollifier_eval(0.9),
            0.0051789243705977536,
            max_relative = 1e-14
        );
    }

    /// Normalization constant against an arbitrary-precision oracle.
    #[test]
    fn normalization_constant() {
        let n = mollifier_normalization();
        assert_abs_diff_eq!(n, 0.4439938161680794, epsilon = 1e-13);
        assert!((0.443..0.445).contains(&n));
    }

    /// Distribution-function values against an arbitrary-precision oracle
    /// (64-node quadrature is accurate to ~2e-12 at worst).
    #[test]
    fn cdf_point_values() {
        let m = Mollifier::default();
        assert_eq!(m.cdf(-1.0), 0.0);
        assert_eq!(m.cdf(1.0), 1.0);
        assert_eq!(m.cdf(-3.0), 0.0);
        assert_eq!(m.cdf(42.0), 1.0);
        assert_abs_diff_eq!(m.cdf(0.0), 0.5, epsilon = 5e-12);
        assert_abs_diff_eq!(m.cdf(-0.5), 0.12296728327732907, epsilon = 5e-12);
        assert_abs_diff_eq!(m.cdf(0.3), 0.740907974643808, epsilon = 5e-12);
        assert_abs_diff_eq!(m.cdf(0.8), 0.9932090004705654, epsilon = 5e-12);
    }

    #[test]
    fn cdf_nondecreasing_and_symmetric() {
        let m = Mollifier::default();
        let mut prev = 0.0;
        for i in 0..=400 {
            let x = -1.0 + 2.0 * i as f64 / 400.0;
            let v = m.cdf(x);
            assert!(v >= prev - 1e-13, "cdf dipped at x = {x}");
            assert!((0.0..=1.0).contains(&v));
            // φ₁ even ⇒ φ₂(x) + φ₂(-x) = 1.
            assert_abs_diff_eq!(v + m.cdf(-x), 1.0, epsilon = 1e-11);
            prev = v;
        }
    }

    #[test]
    fn scaling_fn_boundary_values() {
        let ws = geometric_system(4);
        let s = ws.scales().to_vec(); // (1, 2, 4, 8, 16)
        for j in 1..=ws.levels() {
            assert_eq!(ws.scaling_fn(j, s[j - 1]).unwrap(), 1.0);
            assert_eq!(ws.scaling_fn(j, s[j]).unwrap(), 0.0);
            let mid = (s[j] + s[j - 1]) / 2.0;
            assert_abs_diff_eq!(ws.scaling_fn(j, mid).unwrap(), 0.5, epsilon = 5e-12);
            assert_eq!(ws.scaling_fn(j, 0.0).unwrap(), 1.0);
            assert_eq!(ws.scaling_fn(j, s[j] * 3.0).unwrap(), 0.0);
        }
        assert!(ws.scaling_fn(0, 1.0).is_err());
        assert!(ws.scaling_fn(5, 1.0).is_err());
        assert!(ws.scaling_fn(1, -0.5).is_err());
        assert!(ws.scaling_fn(1, f64::NAN).is_err());
    }

    #[test]
    fn scaling_fn_monotone_transition() {
        let ws = geometric_system(3);
        for j in 1..=3 {
            let (lo, hi) = (ws.scales()[j - 1], ws.scales()[j]);
            let mut prev = 1.0;
            for i in 0..=200 {
                let u = lo + (hi - lo) * i as f64 / 200.0;
                let a = ws.scaling_fn(j, u).unwrap();
                assert!(a <= prev + 1e-12, "a_{j} increased at u = {u}");
                assert!((0.0..=1.0).contains(&a));
                prev = a;
            }
        }
    }

    #[test]
    fn weight_fn_boundary_values() {
        let ws = geometric_system(4);
        let s = ws.scales().to_vec();
        for j in 1..ws.levels() {
            assert_abs_diff_eq!(ws.weight_fn(j, s[j]).unwrap(), 1.0, epsilon = 1e-12);
            assert_eq!(ws.weight_fn(j, s[j - 1]).unwrap(), 0.0);
            assert_eq!(ws.weight_fn(j, s[j + 1]).unwrap(), 0.0);
            assert_eq!(ws.weight_fn(j, s[j + 1] * 2.0).unwrap(), 0.0);
        }
        // Level-0 residual: b_0 = sqrt(a_1) is 1 at u ≤ S_0 and 0 from S_1.
        assert_eq!(ws.weight_fn(0, 0.0).unwrap(), 1.0);
        assert_eq!(ws.weight_fn(0, 1.0).unwrap(), 1.0);
        assert_eq!(ws.weight_fn(0, 2.0).unwrap(), 0.0);
        assert!(ws.weight_fn(4, 1.0).is_err());
    }

    /// Partition of unity over integer multipoles for geometric and
    /// polynomial scale systems.
    #[test]
    fn partition_of_unity_on_multipoles() {
        for model in [
            ShiftModel::standard_geometric(2.0).unwrap(),
            ShiftModel::polynomial(2.0).unwrap(),
        ] {
            let seq = build_scales(&model, 9).unwrap();
            let ws = WindowSystem::new(&seq, false).unwrap();
            let top = ws.scales()[ws.levels() - 1].floor() as u32;
            for l in 1..=top {
                let sum = ws.partition_sum(l as f64).unwrap();
                assert!(
                    (sum - 1.0).abs() < 1e-10,
                    "{}: PoU residual {} at l = {l}",
                    model.family_name(),
                    sum - 1.0
                );
            }
        }
    }

    /// Windows two or more levels apart never overlap.
    #[test]
    fn support_disjointness() {
        let ws = geometric_system(6);
        let top = *ws.scales().last().unwrap();
        for j in 0..ws.levels() {
            for jp in j + 2..ws.levels() {
                for i in 0..=500 {
                    let u = top * i as f64 / 500.0;
                    let prod = ws.weight_fn(j, u).unwrap() * ws.weight_fn(jp, u).unwrap();
                    assert_eq!(prod, 0.0, "overlap of levels {j}, {jp} at u = {u}");
                }
            }
        }
    }

    /// Per-level and template construction agree pointwise.
    #[test]
    fn template_equivalence() {
        let seq = build_scales(&ShiftModel::polynomial(2.0).unwrap(), 7).unwrap();
        let direct = WindowSystem::new(&seq, false).unwrap();
        let template = WindowSystem::new(&seq, true).unwrap();
        let top = *seq.scales().last().unwrap();
        for j in 1..=direct.levels() {
            for i in 0..=400 {
                let u = top * i as f64 / 400.0;
                assert_abs_diff_eq!(
                    direct.scaling_fn(j, u).unwrap(),
                    template.scaling_fn(j, u).unwrap(),
                    epsilon = 1e-12
                );
            }
        }
    }

    /// Consecutive cutoffs are ordered: a_{j+1} ≥ a_j everywhere.
    #[test]
    fn scaling_fns_nested() {
        let seq = build_scales(&ShiftModel::mild_exponential(1.0, 0.5).unwrap(), 7).unwrap();
        let ws = WindowSystem::new(&seq, false).unwrap();
        let top = *seq.scales().last().unwrap();
        for j in 1..ws.levels() {
            for i in 0..=400 {
                let u = top * i as f64 / 400.0;
                assert!(
                    ws.scaling_fn(j + 1, u).unwrap() >= ws.scaling_fn(j, u).unwrap() - 1e-13,
                    "a_{} < a_{j} at u = {u}",
                    j + 1
                );
            }
        }
    }

    #[test]
    fn support_multipoles_examples() {
        let ws = WindowSystem::from_values(vec![1.0, 2.0, 4.0], false).unwrap();
        assert_eq!(ws.window_support_multipoles(1).unwrap(), vec![2, 3]);
        let ws = WindowSystem::from_values(vec![1.0, 2.0, 4.0, 8.0], false).unwrap();
        assert_eq!(ws.window_support_multipoles(2).unwrap(), vec![3, 4, 5, 6, 7]);
        // Level 0 residual covers everything below S_1 including l = 0.
        assert_eq!(ws.window_support_multipoles(0).unwrap(), vec![0, 1]);
        // Degenerate narrow window with no interior integer.
        let ws = WindowSystem::from_values(vec![10.2, 10.5, 10.9], false).unwrap();
        assert!(ws.window_support_multipoles(1).unwrap().is_empty());
    }

    /// The scaled derivative products are level-independent for geometric
    /// scales (template self-similarity) and finite.
    #[test]
    fn derivative_probe_scaling() {
        let ws = geometric_system(9);
        for n in [1u32, 2] {
            let products: Vec<f64> = (2..=8)
                .map(|j| ws.derivative_bound_probe(j, n, 1024).unwrap())
                .collect();
            let max = products.iter().cloned().fold(f64::MIN, f64::max);
            let min = products.iter().cloned().fold(f64::MAX, f64::min);
            assert!(
                max / min < 2.0,
                "n = {n}: products spread {min}..{max}"
            );
            assert!(products.iter().all(|p| p.is_finite() && *p > 0.0));
        }
        // Frozen reference for the first-derivative product at B = 2.
        let p = ws.derivative_bound_probe(4, 1, 4096).unwrap();
        assert_abs_diff_eq!(p, 1.840375, epsilon = 1e-3);
        assert!(ws.derivative_bound_probe(2, 3, 1024).is_err());
        assert!(ws.derivative_bound_probe(2, 1, 100).is_err());
        assert!(ws.derivative_bound_probe(0, 1, 1024).is_err());
    }

    #[test]
    fn from_values_validation() {
        assert!(WindowSystem::from_values(vec![1.0], false).is_err());
        assert!(WindowSystem::from_values(vec![1.0, 1.0], false).is_err());
        assert!(WindowSystem::from_values(vec![-1.0, 2.0], false).is_err());
        assert!(WindowSystem::from_values(vec![1.0, f64::INFINITY], false).is_err());
    }
}
