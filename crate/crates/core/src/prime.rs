//! Schottky–Klein prime function of the annulus `r < |z| < 1`.
//!
//! The prime function is evaluated from its product representation
//!
//! ```text
//! ω(z, a) = (z − a) · ∏_{n≥1} (1 − q_n z/a)(1 − q_n a/z) / (1 − q_n)²,   q_n = r^{2n},
//! ```
//!
//! truncated after `N` factors where `r^{2N}` drops below the requested
//! tolerance. This normalized form keeps every factor close to one, so small
//! `r` does not lose digits to cancellation.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point of the complex plane.
pub type ComplexPoint = Complex64;

/// Default cap on the number of retained product factors.
pub const DEFAULT_MAX_TERMS: usize = 256;

/// Magnitude below which a factor is treated as an exact zero.
pub const POLE_TOL: f64 = 1e-300;

const GUARD_LOW: f64 = 0.99;
const GUARD_HIGH: f64 = 1.01;

/// Inner radius of the annulus together with the truncation policy for the
/// infinite products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusModulus {
    r: f64,
    trunc_tol: f64,
    max_terms: usize,
    terms: usize,
    capped: bool,
}

impl AnnulusModulus {
    pub fn new(r: f64, trunc_tol: f64) -> Result<Self> {
        Self::with_max_terms(r, trunc_tol, DEFAULT_MAX_TERMS)
    }

    pub fn with_max_terms(r: f64, trunc_tol: f64, max_terms: usize) -> Result<Self> {
        if !(r.is_finite() && r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("inner radius must lie in (0, 1), got {r}")));
        }
        if !(trunc_tol.is_finite() && trunc_tol > 0.0) {
            return Err(Error::Domain(format!("truncation tolerance must be positive, got {trunc_tol}")));
        }
        if max_terms == 0 {
            return Err(Error::Domain("max_terms must be at least 1".into()));
        }
        let wanted = if trunc_tol >= 1.0 {
            0.0
        } else {
            (trunc_tol.ln() / (2.0 * r.ln())).ceil()
        };
        let (terms, capped) = if wanted > max_terms as f64 {
            (max_terms, true)
        } else {
            (wanted as usize, false)
        };
        Ok(Self { r, trunc_tol, max_terms, terms, capped })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn trunc_tol(&self) -> f64 {
        self.trunc_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// Number of product factors actually retained.
    pub fn terms(&self) -> usize {
        self.terms
    }

    /// True when `max_terms` prevented reaching `trunc_tol`.
    pub fn capped(&self) -> bool {
        self.capped
    }

    /// Same inner radius with a different truncation tolerance.
    pub fn retuned(&self, trunc_tol: f64) -> Result<Self> {
        Self::with_max_terms(self.r, trunc_tol, self.max_terms)
    }

    /// Iterator over `r^{2n}` for `n = 1..=N`.
    fn powers(&self) -> impl Iterator<Item = f64> {
        let r2 = self.r * self.r;
        (0..self.terms).scan(1.0, move |q, _| {
            *q *= r2;
            Some(*q)
        })
    }

    fn check_point(&self, z: ComplexPoint, name: &str) -> Result<()> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain(format!("{name} is not finite")));
        }
        let m = z.norm();
        if m == 0.0 {
            return Err(Error::Domain(format!("{name} must be non-zero")));
        }
        let lo = self.r * self.r * GUARD_LOW;
        let hi = GUARD_HIGH / self.r;
        if m <= lo || m >= hi {
            return Err(Error::Domain(format!(
                "|{name}| = {m} outside evaluation band ({lo}, {hi})"
            )));
        }
        Ok(())
    }
}

/// Truncated product value of `ω(z, a)`.
pub fn prime_omega(z: ComplexPoint, a: ComplexPoint, m: &AnnulusModulus) -> Result<ComplexPoint> {
    m.check_point(z, "z")?;
    m.check_point(a, "a")?;
    let za = z / a;
    let az = a / z;
    let mut acc = z - a;
    for q in m.powers() {
        let one_minus = 1.0 - q;
        acc *= (1.0 - q * za) * (1.0 - q * az) / (one_minus * one_minus);
    }
    if !(acc.re.is_finite() && acc.im.is_finite()) {
        return Err(Error::Overflow(format!("ω({z}, {a}) is not representable")));
    }
    Ok(acc)
}

/// `∂_z log ω(z, a)`, differentiating the truncated product term by term.
pub fn prime_omega_log_deriv(
    z: ComplexPoint,
    a: ComplexPoint,
    m: &AnnulusModulus,
) -> Result<ComplexPoint> {
    m.check_point(z, "z")?;
    m.check_point(a, "a")?;
    let diff = z - a;
    if diff.norm() < POLE_TOL {
        return Err(Error::Pole(format!("z coincides with a = {a}")));
    }
    let mut acc = diff.inv();
    let za = z / a;
    let az = a / z;
    for q in m.powers() {
        let f1 = 1.0 - q * za;
        let f2 = 1.0 - q * az;
        if f1.norm() < POLE_TOL || f2.norm() < POLE_TOL {
            return Err(Error::Pole(format!("z = {z} is a zero of a retained factor")));
        }
        acc += (-q / a) / f1 + (q * a / (z * z)) / f2;
    }
    if !(acc.re.is_finite() && acc.im.is_finite()) {
        return Err(Error::Overflow(format!("log-derivative at {z} is not representable")));
    }
    Ok(acc)
}

/// `ω(z, a)` together with `∂_z ω(z, a)`.
///
/// Unlike [`prime_omega_log_deriv`] this stays finite at `z = a`, where the
/// derivative equals the product of the remaining factors.
pub fn prime_omega_with_derivative(
    z: ComplexPoint,
    a: ComplexPoint,
    m: &AnnulusModulus,
) -> Result<(ComplexPoint, ComplexPoint)> {
    m.check_point(z, "z")?;
    m.check_point(a, "a")?;
    let za = z / a;
    let az = a / z;
    let mut product = ComplexPoint::new(1.0, 0.0);
    let mut log_sum = ComplexPoint::new(0.0, 0.0);
    for q in m.powers() {
        let f1 = 1.0 - q * za;
        let f2 = 1.0 - q * az;
        if f1.norm() < POLE_TOL || f2.norm() < POLE_TOL {
            return Err(Error::Pole(format!("z = {z} is a zero of a retained factor")));
        }
        let one_minus = 1.0 - q;
        product *= f1 * f2 / (one_minus * one_minus);
        log_sum += (-q / a) / f1 + (q * a / (z * z)) / f2;
    }
    let diff = z - a;
    let value = diff * product;
    let deriv = product * (1.0 + diff * log_sum);
    if !(value.re.is_finite() && value.im.is_finite() && deriv.re.is_finite() && deriv.im.is_finite()) {
        return Err(Error::Overflow(format!("ω({z}, {a}) is not representable")));
    }
    Ok((value, deriv))
}

/// Relative error bound for truncating the product after `m.terms()` factors.
///
/// With `u = |z/a|`, `v = |a/z|` and `q = r^{2(N+1)}`, every omitted factor obeys
/// `|log F_n| ≤ q_n (u/(1 − q u) + v/(1 − q v) + 2/(1 − q))`, so the log of the
/// tail is bounded by `S = r^{2(N+1)}/(1 − r²) · (...)` and the relative error of
/// the truncated value, in either direction, by `exp(S) − 1`. Returns infinity
/// when the leading omitted factor may vanish.
pub fn truncation_error_bound(m: &AnnulusModulus, z_mag: f64, a_mag: f64) -> f64 {
    let u = z_mag / a_mag;
    let v = a_mag / z_mag;
    let r2 = m.r * m.r;
    let q = r2.powi(m.terms as i32 + 1);
    if q * u.max(v) >= 1.0 {
        return f64::INFINITY;
    }
    let c = u / (1.0 - q * u) + v / (1.0 - q * v) + 2.0 / (1.0 - q);
    (c * q / (1.0 - r2)).exp_m1()
}
