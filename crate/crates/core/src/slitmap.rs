//! Canonical maps of the annulus onto circularly slit disks.
//!
//! For `r < x < 1` the map
//!
//! ```text
//! f_x(z) = −(1/x) · ω(z, x) / ω(z, 1/x)
//! ```
//!
//! sends `A_r` onto the unit disk minus an arc of the circle `|w| = x`,
//! with `f_x(x) = 0`, `f_x'(x) > 0`, and the slit crossing the negative real
//! axis at `−x`. The map extends holomorphically to `r²/x < |z| < 1/x`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::prime::{
    prime_omega, prime_omega_log_deriv, prime_omega_with_derivative, AnnulusModulus, ComplexPoint,
    POLE_TOL,
};

/// Newton iteration cap for [`f_inverse`].
pub const NEWTON_MAX_ITER: usize = 64;

/// Largest real step used when continuing an inverse along a real segment.
pub const CONTINUATION_STEP: f64 = 0.01;

const ENDPOINT_THETA_MARGIN: f64 = 1e-9;
const ENDPOINT_WIDTH: f64 = 1e-13;
const DISK_SLACK: f64 = 1e-9;

/// The pair `(r, x)` selecting the map `f_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitMapParams {
    modulus: AnnulusModulus,
    x: f64,
}

impl SlitMapParams {
    pub fn new(modulus: AnnulusModulus, x: f64) -> Result<Self> {
        let r = modulus.r();
        if !(x.is_finite() && x > r && x < 1.0) {
            return Err(Error::Domain(format!("normalization point must lie in ({r}, 1), got {x}")));
        }
        Ok(Self { modulus, x })
    }

    pub fn modulus(&self) -> &AnnulusModulus {
        &self.modulus
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn r(&self) -> f64 {
        self.modulus.r()
    }

    /// Whether `z` lies in the extension annulus `r²/x < |z| < 1/x`.
    pub fn in_extended_domain(&self, z: ComplexPoint) -> bool {
        let m = z.norm();
        let r = self.r();
        m > r * r / self.x && m < 1.0 / self.x
    }

    fn check_domain(&self, z: ComplexPoint) -> Result<()> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain("point is not finite".into()));
        }
        if !self.in_extended_domain(z) {
            let r = self.r();
            return Err(Error::Domain(format!(
                "|z| = {} outside ({}, {})",
                z.norm(),
                r * r / self.x,
                1.0 / self.x
            )));
        }
        Ok(())
    }

    fn pole(&self) -> ComplexPoint {
        ComplexPoint::new(1.0 / self.x, 0.0)
    }

    fn center(&self) -> ComplexPoint {
        ComplexPoint::new(self.x, 0.0)
    }
}

/// The real disk automorphism `T(z) = (z − c)/(1 − c z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusReal {
    c: f64,
}

impl MobiusReal {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c.abs() < 1.0) {
            return Err(Error::Domain(format!("Möbius coefficient must lie in (-1, 1), got {c}")));
        }
        Ok(Self { c })
    }

    pub fn identity() -> Self {
        Self { c: 0.0 }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn inverse(&self) -> Self {
        Self { c: -self.c }
    }
}

fn check_in_disk(z: ComplexPoint) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain("point is not finite".into()));
    }
    if z.norm() > 1.0 + DISK_SLACK {
        return Err(Error::Domain(format!("|z| = {} exceeds the closed unit disk", z.norm())));
    }
    Ok(())
}

pub fn mobius_apply(t: MobiusReal, z: ComplexPoint) -> Result<ComplexPoint> {
    check_in_disk(z)?;
    let den = 1.0 - t.c * z;
    if den.norm() < POLE_TOL {
        return Err(Error::Pole(format!("1 - c z vanishes at z = {z}")));
    }
    Ok((z - t.c) / den)
}

pub fn mobius_inverse(t: MobiusReal, w: ComplexPoint) -> Result<ComplexPoint> {
    mobius_apply(t.inverse(), w)
}

/// `f_x(z)`.
pub fn f_eval(p: &SlitMapParams, z: ComplexPoint) -> Result<ComplexPoint> {
    p.check_domain(z)?;
    let num = prime_omega(z, p.center(), &p.modulus)?;
    let den = prime_omega(z, p.pole(), &p.modulus)?;
    if den.norm() < POLE_TOL {
        return Err(Error::Pole(format!("ω(z, 1/x) vanishes at z = {z}")));
    }
    Ok(-num / (den * p.x))
}

/// `f_x'(z)`, finite everywhere in the extension annulus including `z = x`.
pub fn f_prime(p: &SlitMapParams, z: ComplexPoint) -> Result<ComplexPoint> {
    p.check_domain(z)?;
    let (num, dnum) = prime_omega_with_derivative(z, p.center(), &p.modulus)?;
    let den = prime_omega(z, p.pole(), &p.modulus)?;
    if den.norm() < POLE_TOL {
        return Err(Error::Pole(format!("ω(z, 1/x) vanishes at z = {z}")));
    }
    let log_den = prime_omega_log_deriv(z, p.pole(), &p.modulus)?;
    Ok(-(dnum - num * log_den) / (den * p.x))
}

/// Closed product for `f_x'(x)`.
pub fn f_prime_at_center(p: &SlitMapParams) -> f64 {
    let r2 = p.r() * p.r();
    let x2 = p.x * p.x;
    let mut q = 1.0;
    let mut acc = 1.0 / (1.0 - x2);
    for _ in 0..p.modulus.terms() {
        q *= r2;
        let one_minus = 1.0 - q;
        acc *= one_minus * one_minus / ((1.0 - q * x2) * (1.0 - q / x2));
    }
    acc
}

/// `g_a(z) = ω(z, a) / (|a| ω(z, 1/ā))` for a general point `a` of the annulus.
pub fn g_eval(m: &AnnulusModulus, a: ComplexPoint, z: ComplexPoint) -> Result<ComplexPoint> {
    let r = m.r();
    let am = a.norm();
    if !(am > r && am < 1.0) {
        return Err(Error::Domain(format!("|a| = {am} outside ({r}, 1)")));
    }
    let zm = z.norm();
    if !(zm > r * r / am && zm < 1.0 / am) {
        return Err(Error::Domain(format!("|z| = {zm} outside ({}, {})", r * r / am, 1.0 / am)));
    }
    let num = prime_omega(z, a, m)?;
    let den = prime_omega(z, a.conj().inv(), m)?;
    if den.norm() < POLE_TOL {
        return Err(Error::Pole(format!("ω(z, 1/ā) vanishes at z = {z}")));
    }
    Ok(num / (den * am))
}

/// Newton solve of `f_x(z) = w` from `seed`.
pub fn f_inverse(p: &SlitMapParams, w: ComplexPoint, seed: ComplexPoint) -> Result<ComplexPoint> {
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain("target is not finite".into()));
    }
    p.check_domain(seed)?;
    let tol = 1e-12 * (1.0 + w.norm());
    let mut z = seed;
    let mut residual = f_eval(p, z)? - w;
    let mut iterations = 0;
    while residual.norm() > tol {
        if iterations == NEWTON_MAX_ITER {
            return Err(Error::NonConvergence { iterations, residual: residual.norm() });
        }
        let d = f_prime(p, z)?;
        if d.norm() < POLE_TOL {
            return Err(Error::Pole(format!("f_x' vanishes at iterate {z}")));
        }
        let step = residual / d;
        // Halve steps that would leave the extension annulus.
        let mut scale = 1.0;
        let mut next = z - step;
        while !p.in_extended_domain(next) && scale > 1e-3 {
            scale *= 0.5;
            next = z - step * scale;
        }
        if !p.in_extended_domain(next) {
            return Err(Error::Domain(format!("Newton iterate {next} left the extension annulus")));
        }
        z = next;
        residual = f_eval(p, z)? - w;
        iterations += 1;
    }
    let r = p.r();
    let zm = z.norm();
    if zm < r * (1.0 - DISK_SLACK) || zm > 1.0 + DISK_SLACK {
        return Err(Error::Domain(format!("preimage {z} lies outside the closed annulus")));
    }
    Ok(z)
}

/// Solve `f_x(z) = xi` for real `xi ∈ [−x, 0]`, marching from a known real
/// preimage `(start_xi, start_z)` in steps of at most [`CONTINUATION_STEP`].
pub fn real_preimage_from(
    p: &SlitMapParams,
    xi: f64,
    start_xi: f64,
    start_z: f64,
) -> Result<f64> {
    let span = xi - start_xi;
    let steps = (span.abs() / CONTINUATION_STEP).ceil().max(1.0) as usize;
    let mut z = start_z;
    for k in 1..=steps {
        let target = start_xi + span * (k as f64 / steps as f64);
        let seed = ComplexPoint::new(z.clamp(p.r(), p.x), 0.0);
        z = f_inverse(p, ComplexPoint::new(target, 0.0), seed)?.re;
    }
    Ok(z)
}

/// Real preimage of `xi ∈ [−x, 0]`, continued from `f_x(x) = 0`.
pub fn real_preimage(p: &SlitMapParams, xi: f64) -> Result<f64> {
    if !(xi >= -p.x && xi <= 0.0) {
        return Err(Error::Domain(format!("xi = {xi} outside [{}, 0]", -p.x)));
    }
    real_preimage_from(p, xi, 0.0, p.x)
}

/// The slit `Γ_x`: an arc of the circle `|w| = radius` symmetric about the
/// real axis and crossing it at `−radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitArc {
    pub radius: f64,
    pub endpoint_plus: ComplexPoint,
    pub preimage_theta: f64,
}

impl SlitArc {
    /// Argument of the upper endpoint, in `(0, π)`.
    pub fn endpoint_angle(&self) -> f64 {
        self.endpoint_plus.arg()
    }

    /// Total angle subtended by the arc.
    pub fn angular_width(&self) -> f64 {
        2.0 * (PI - self.endpoint_angle())
    }

    /// Angular interval `[θ⁺, 2π − θ⁺]` covered by the arc.
    pub fn angle_range(&self) -> (f64, f64) {
        let a = self.endpoint_angle();
        (a, 2.0 * PI - a)
    }

    /// `count` points evenly spaced along the arc, endpoints included.
    pub fn sample(&self, count: usize) -> Vec<ComplexPoint> {
        let (lo, hi) = self.angle_range();
        let n = count.max(2);
        (0..n)
            .map(|k| {
                let t = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                ComplexPoint::from_polar(self.radius, t)
            })
            .collect()
    }
}

/// Angular velocity of `arg f_x` along `|z| = r`.
fn endpoint_indicator(p: &SlitMapParams, theta: f64) -> Result<f64> {
    let z = ComplexPoint::from_polar(p.r(), theta);
    let a = prime_omega_log_deriv(z, p.center(), &p.modulus)?;
    let b = prime_omega_log_deriv(z, p.pole(), &p.modulus)?;
    Ok((z * (a - b)).re)
}

/// Locate the slit endpoint by bisection on the angular velocity of
/// `arg f_x(r e^{iθ})` over `θ ∈ (0, π)`.
pub fn slit_endpoint(p: &SlitMapParams) -> Result<SlitArc> {
    let mut lo = ENDPOINT_THETA_MARGIN;
    let mut hi = PI - ENDPOINT_THETA_MARGIN;
    let mut h_lo = endpoint_indicator(p, lo)?;
    let h_hi = endpoint_indicator(p, hi)?;
    if h_lo == 0.0 || h_hi == 0.0 || h_lo.signum() == h_hi.signum() {
        return Err(Error::Bracketing(format!(
            "angular velocity has no sign change on (0, π): h(0+) = {h_lo:e}, h(π−) = {h_hi:e}"
        )));
    }
    while hi - lo > ENDPOINT_WIDTH {
        let mid = 0.5 * (lo + hi);
        let h_mid = endpoint_indicator(p, mid)?;
        if h_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if h_mid.signum() == h_lo.signum() {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    let endpoint = f_eval(p, ComplexPoint::from_polar(p.r(), theta))?;
    Ok(SlitArc { radius: endpoint.norm(), endpoint_plus: endpoint, preimage_theta: theta })
}

/// The disk automorphism `T_x` moving `f_x(x0)` to the origin.
pub fn renormalizer(p: &SlitMapParams, x0: f64) -> Result<MobiusReal> {
    let c = f_eval(p, ComplexPoint::new(x0, 0.0))?;
    MobiusReal::new(c.re)
}

/// `q(x) = T_x(−x)`, where the renormalized slit meets the real axis.
pub fn q_eval(x: f64, x0: f64, m: &AnnulusModulus) -> Result<f64> {
    let p = SlitMapParams::new(*m, x)?;
    let c = renormalizer(&p, x0)?.c();
    Ok(-(x + c) / (1.0 + c * x))
}

/// `q'(x0) = −(1 − (1 − x0²) f_{x0}'(x0))`.
pub fn q_prime_at_x0(x0: f64, m: &AnnulusModulus) -> Result<f64> {
    let p = SlitMapParams::new(*m, x0)?;
    Ok(-(1.0 - (1.0 - x0 * x0) * f_prime_at_center(&p)))
}

/// `dist(0, Γ(x)) = |T_x(Γ_x⁺)|`.
pub fn slit_dist_after_mobius(x: f64, x0: f64, m: &AnnulusModulus) -> Result<f64> {
    check_x_order(x, x0, m)?;
    let p = SlitMapParams::new(*m, x)?;
    let t = renormalizer(&p, x0)?;
    let arc = slit_endpoint(&p)?;
    Ok(mobius_apply(t, arc.endpoint_plus)?.norm())
}

fn check_x_order(x: f64, x0: f64, m: &AnnulusModulus) -> Result<()> {
    let r = m.r();
    if !(x > r && x <= x0 && x0 < 1.0) {
        return Err(Error::Domain(format!("need {r} < x <= x0 < 1, got x = {x}, x0 = {x0}")));
    }
    Ok(())
}

/// `φ_x = T_x ∘ f_x ∘ f_{x0}^{-1}`, restricted to the real segment `[−x0, 0]`.
#[derive(Debug, Clone, Copy)]
pub struct PhiMap {
    fx: SlitMapParams,
    fx0: SlitMapParams,
    t: MobiusReal,
}

impl PhiMap {
    pub fn new(x: f64, x0: f64, m: &AnnulusModulus) -> Result<Self> {
        check_x_order(x, x0, m)?;
        let fx = SlitMapParams::new(*m, x)?;
        let fx0 = SlitMapParams::new(*m, x0)?;
        let t = renormalizer(&fx, x0)?;
        Ok(Self { fx, fx0, t })
    }

    pub fn x(&self) -> f64 {
        self.fx.x
    }

    pub fn x0(&self) -> f64 {
        self.fx0.x
    }

    pub fn mobius(&self) -> MobiusReal {
        self.t
    }

    pub fn outer_map(&self) -> &SlitMapParams {
        &self.fx
    }

    pub fn base_map(&self) -> &SlitMapParams {
        &self.fx0
    }

    /// `T_x(f_x(z))` for a preimage `z = f_{x0}^{-1}(ξ)` already in hand.
    pub fn eval_at_preimage(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        mobius_apply(self.t, f_eval(&self.fx, z)?)
    }

    /// `φ_x(ξ)` for real `ξ ∈ [−x0, 0]`.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        let z = real_preimage(&self.fx0, xi)?;
        Ok(self.eval_at_preimage(ComplexPoint::new(z, 0.0))?.re)
    }

    /// `φ_x(ξ)` for a general point `ξ` of the slit disk, with a seed for the
    /// preimage under `f_{x0}`.
    pub fn eval_complex(&self, xi: ComplexPoint, seed: ComplexPoint) -> Result<(ComplexPoint, ComplexPoint)> {
        let z = f_inverse(&self.fx0, xi, seed)?;
        Ok((self.eval_at_preimage(z)?, z))
    }
}

/// `φ_x(ξ)` for `ξ ∈ [−x0, 0]`.
pub fn phi_eval(x: f64, x0: f64, m: &AnnulusModulus, xi: f64) -> Result<f64> {
    PhiMap::new(x, x0, m)?.eval(xi)
}

/// Check that `f_x` increases strictly along `[r, x]` and maps it onto `[−x, 0]`.
pub fn check_real_monotonicity(p: &SlitMapParams, samples: usize) -> Result<()> {
    let n = samples.max(2);
    let r = p.r();
    let mut prev = f_eval(p, ComplexPoint::new(r, 0.0))?.re;
    for k in 1..n {
        let t = r + (p.x - r) * k as f64 / (n - 1) as f64;
        let v = f_eval(p, ComplexPoint::new(t, 0.0))?.re;
        if v <= prev {
            return Err(Error::Precondition(format!(
                "f_x is not increasing on [r, x] near t = {t} ({prev} -> {v})"
            )));
        }
        prev = v;
    }
    Ok(())
}
