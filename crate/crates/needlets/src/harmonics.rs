//! Legendre polynomials, the harmonic projector kernel `Z_l`, and real
//! spherical harmonics `Y_{l,m}` on the unit 2-sphere.
//!
//! Conventions used throughout the crate:
//!
//! * Legendre polynomials carry the standard normalization `P_l(1) = 1` and
//!   satisfy the three-term recurrence
//!   `(l+1) P_{l+1}(t) = (2l+1) t P_l(t) - l P_{l-1}(t)`.
//! * The projector kernel is `Z_l(x, y) = (2l+1)/(4π) · P_l(cos Θ(x, y))`
//!   with `Θ` the great-circle angle, so that `Σ_m Y_{l,m}(x) Y_{l,m}(y) =
//!   Z_l(x, y)` (addition formula).
//! * Spherical harmonics are **real** and orthonormal, built from normalized
//!   associated Legendre functions without the Condon–Shortley phase:
//!   `Y_{l,0} = P̃_l^0(cos θ)`, `Y_{l,m} = √2 P̃_l^m(cos θ) cos(mφ)` for
//!   `m > 0` and `Y_{l,m} = √2 P̃_l^{|m|}(cos θ) sin(|m|φ)` for `m < 0`,
//!   where `∫_{-1}^{1} P̃_l^m(t)² dt = 1/(2π)`.
//!
//! The normalized recurrence keeps every intermediate value of order one, so
//! evaluation is stable far beyond the desk-scale bandlimits used here (the
//! raw `P_l^m` overflow near `l ≈ 150`).

use thiserror::Error;

/// Absolute slack accepted when the Legendre argument overshoots `[-1, 1]`
/// through rounding; larger overshoots are rejected as errors.
pub const LEGENDRE_ARG_SLACK: f64 = 1e-12;

/// Errors for harmonic evaluations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarmonicsError {
    /// The Legendre argument lies outside `[-1 - slack, 1 + slack]`.
    #[error("legendre argument {t} outside [-1, 1] beyond tolerance {slack}")]
    ArgumentOutOfRange { t: f64, slack: f64 },
    /// A spherical-harmonic order with `|m| > l` was requested.
    #[error("spherical harmonic order m = {m} exceeds degree l = {l}")]
    OrderOutOfRange { l: u32, m: i32 },
    /// A colatitude outside `[0, π]` was supplied.
    #[error("colatitude theta = {theta} outside [0, pi]")]
    InvalidColatitude { theta: f64 },
    /// A longitude outside `[0, 2π)` was supplied.
    #[error("longitude phi = {phi} outside [0, 2*pi)")]
    InvalidLongitude { phi: f64 },
}

/// A point on the unit sphere in colatitude/longitude coordinates.
///
/// `theta ∈ [0, π]` is the angle from the north pole and `phi ∈ [0, 2π)` the
/// azimuth. The corresponding unit vector is
/// `(sin θ cos φ, sin θ sin φ, cos θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    theta: f64,
    phi: f64,
}

impl SpherePoint {
    /// Validates the coordinate ranges and builds the point.
    pub fn new(theta: f64, phi: f64) -> Result<Self, HarmonicsError> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(HarmonicsError::InvalidColatitude { theta });
        }
        if !phi.is_finite() || !(0.0..std::f64::consts::TAU).contains(&phi) {
            return Err(HarmonicsError::InvalidLongitude { phi });
        }
        Ok(Self { theta, phi })
    }

    /// Colatitude in radians, in `[0, π]`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Longitude in radians, in `[0, 2π)`.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Cartesian unit vector `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sp, cp) = (self.phi.sin(), self.phi.cos());
        [st * cp, st * sp, ct]
    }

    /// Great-circle angle `Θ(self, other) ∈ [0, π]`.
    ///
    /// Computed as `atan2(‖v × w‖, v · w)`, which stays fully accurate for
    /// nearly coincident and nearly antipodal pairs (where `acos` of the dot
    /// product loses half the significand).
    pub fn great_circle_angle(&self, other: &SpherePoint) -> f64 {
        let v = self.unit_vector();
        let w = other.unit_vector();
        let cross = [
            v[1] * w[2] - v[2] * w[1],
            v[2] * w[0] - v[0] * w[2],
            v[0] * w[1] - v[1] * w[0],
        ];
        let cross_norm = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        let dot = v[0] * w[0] + v[1] * w[1] + v[2] * w[2];
        cross_norm.atan2(dot)
    }

    /// Cosine of the great-circle angle, clamped to `[-1, 1]`.
    pub fn cos_angle(&self, other: &SpherePoint) -> f64 {
        let v = self.unit_vector();
        let w = other.unit_vector();
        (v[0] * w[0] + v[1] * w[1] + v[2] * w[2]).clamp(-1.0, 1.0)
    }
}

/// Validates and clamps a Legendre argument to `[-1, 1]`.
fn clamp_legendre_arg(t: f64) -> Result<f64, HarmonicsError> {
    if !t.is_finite() || t.abs() > 1.0 + LEGENDRE_ARG_SLACK {
        return Err(HarmonicsError::ArgumentOutOfRange {
            t,
            slack: LEGENDRE_ARG_SLACK,
        });
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// Legendre polynomial `P_l(t)` by the stable three-term recurrence.
///
/// Arguments with `|t| ≤ 1 + 1e-12` are clamped onto `[-1, 1]`; anything
/// farther out is rejected.
pub fn legendre(l: u32, t: f64) -> Result<f64, HarmonicsError> {
    let t = clamp_legendre_arg(t)?;
    Ok(legendre_iter(l, t))
}

/// Recurrence core for a pre-validated argument.
fn legendre_iter(l: u32, t: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => t,
        _ => {
            let (mut pm1, mut p) = (1.0, t);
            for k in 1..l {
                let k = f64::from(k);
                let next = ((2.0 * k + 1.0) * t * p - k * pm1) / (k + 1.0);
                pm1 = p;
                p = next;
            }
            p
        }
    }
}

/// All Legendre values `P_0(t), …, P_lmax(t)` in one recurrence pass.
pub fn legendre_sequence(lmax: u32, t: f64) -> Result<Vec<f64>, HarmonicsError> {
    let t = clamp_legendre_arg(t)?;
    let mut out = Vec::with_capacity(lmax as usize + 1);
    out.push(1.0);
    if lmax >= 1 {
        out.push(t);
        for k in 1..lmax {
            let kf = f64::from(k);
            let next = ((2.0 * kf + 1.0) * t * out[k as usize] - kf * out[k as usize - 1])
                / (kf + 1.0);
            out.push(next);
        }
    }
    Ok(out)
}

/// `P_l(t)` together with its derivative `P_l'(t)`.
///
/// The derivative uses `(1 - t²) P_l'(t) = l (P_{l-1}(t) - t P_l(t))`; at
/// `t = ±1` it falls back to the endpoint value `(±1)^{l+1} l (l+1) / 2`.
pub fn legendre_with_derivative(l: u32, t: f64) -> Result<(f64, f64), HarmonicsError> {
    let t = clamp_legendre_arg(t)?;
    if l == 0 {
        return Ok((1.0, 0.0));
    }
    let (mut pm1, mut p) = (1.0, t);
    for k in 1..l {
        let k = f64::from(k);
        let next = ((2.0 * k + 1.0) * t * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = next;
    }
    let lf = f64::from(l);
    let denom = 1.0 - t * t;
    let dp = if denom.abs() < 1e-30 {
        let sign = if t > 0.0 || l % 2 == 1 { 1.0 } else { -1.0 };
        sign * lf * (lf + 1.0) / 2.0
    } else {
        lf * (pm1 - t * p) / denom
    };
    Ok((p, dp))
}

/// Projector kernel `Z_l(x, y) = (2l+1)/(4π) · P_l(cos Θ(x, y))`.
pub fn projector_kernel(l: u32, x: &SpherePoint, y: &SpherePoint) -> f64 {
    let ct = x.cos_angle(y);
    (2.0 * f64::from(l) + 1.0) / (4.0 * std::f64::consts::PI) * legendre_iter(l, ct)
}

/// Projector kernel evaluated directly from `cos Θ`.
pub fn projector_kernel_cos(l: u32, cos_theta: f64) -> Result<f64, HarmonicsError> {
    let ct = clamp_legendre_arg(cos_theta)?;
    Ok((2.0 * f64::from(l) + 1.0) / (4.0 * std::f64::consts::PI) * legendre_iter(l, ct))
}

/// Table of normalized associated Legendre values `P̃_l^m(cos θ)` for all
/// `0 ≤ m ≤ l ≤ lmax` at a single colatitude.
///
/// Normalization: `∫_{-1}^{1} P̃_l^m(t)² dt = 1/(2π)`, no Condon–Shortley
/// phase, so `Y_{l,0} = P̃_l^0` and `Y_{l,±m} = √2 P̃_l^m · {cos, sin}(mφ)`.
#[derive(Debug, Clone)]
pub struct AssocLegendreTable {
    lmax: u32,
    /// Values grouped by order: for each `m`, degrees `l = m..=lmax`.
    data: Vec<f64>,
    /// Start offset of each order-`m` block inside `data`.
    offsets: Vec<usize>,
}

impl AssocLegendreTable {
    /// Evaluates the full table at colatitude `theta`.
    pub fn new(lmax: u32, theta: f64) -> Self {
        let n = lmax as usize + 1;
        let mut offsets = Vec::with_capacity(n);
        let mut total = 0;
        for m in 0..n {
            offsets.push(total);
            total += n - m;
        }
        let mut data = vec![0.0; total];
        let (sin_t, cos_t) = (theta.sin(), theta.cos());

        // P̃_m^m along the diagonal, then upward in degree for each order.
        let mut diag = (4.0 * std::f64::consts::PI).sqrt().recip();
        for m in 0..n {
            if m > 0 {
                let mf = m as f64;
                diag *= sin_t * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
            }
            let base = offsets[m];
            data[base] = diag;
            if m < lmax as usize {
                let mf = m as f64;
                data[base + 1] = cos_t * (2.0 * mf + 3.0).sqrt() * diag;
                for l in (m + 2)..n {
                    let (lf, mf) = (l as f64, m as f64);
                    let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                    let lp = lf - 1.0;
                    let a_prev = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
                    data[base + (l - m)] = a
                        * (cos_t * data[base + (l - m) - 1]
                            - data[base + (l - m) - 2] / a_prev);
                }
            }
        }
        Self { lmax, data, offsets }
    }

    /// Maximum degree covered by the table.
    pub fn lmax(&self) -> u32 {
        self.lmax
    }

    /// `P̃_l^m(cos θ)` for `0 ≤ m ≤ l ≤ lmax`.
    pub fn value(&self, l: u32, m: u32) -> f64 {
        debug_assert!(m <= l && l <= self.lmax);
        self.data[self.offsets[m as usize] + (l - m) as usize]
    }
}

/// Real orthonormal spherical harmonic `Y_{l,m}(x)`.
///
/// Rejects `|m| > l`. See the module docs for the basis convention.
pub fn real_spherical_harmonic(l: u32, m: i32, x: &SpherePoint) -> Result<f64, HarmonicsError> {
    if m.unsigned_abs() > l {
        return Err(HarmonicsError::OrderOutOfRange { l, m });
    }
    let table = AssocLegendreTable::new(l, x.theta());
    Ok(real_sh_from_table(&table, l, m, x.phi()))
}

/// `Y_{l,m}` assembled from a precomputed associated-Legendre table.
pub fn real_sh_from_table(table: &AssocLegendreTable, l: u32, m: i32, phi: f64) -> f64 {
    let am = m.unsigned_abs();
    let p = table.value(l, am);
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => p,
        std::cmp::Ordering::Greater => {
            std::f64::consts::SQRT_2 * p * (f64::from(am) * phi).cos()
        }
        std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * p * (f64::from(am) * phi).sin(),
    }
}

/// Packed index of the real coefficient `(l, m)` inside a flat array ordered
/// by degree then order: `index = l(l+1) + m`, for `-l ≤ m ≤ l`.
///
/// A bandlimited expansion with degrees `l ≤ lmax` therefore occupies
/// `(lmax+1)²` consecutive slots.
pub fn packed_index(l: u32, m: i32) -> usize {
    debug_assert!(m.unsigned_abs() <= l);
    (i64::from(l) * (i64::from(l) + 1) + i64::from(m)) as usize
}

/// Number of packed real coefficients for degrees `l ≤ lmax`.
pub fn packed_len(lmax: u32) -> usize {
    (lmax as usize + 1) * (lmax as usize + 1)
}
