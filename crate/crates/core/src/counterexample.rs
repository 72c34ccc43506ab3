//! Search and certification of the once-punctured slit disk counterexample.
//!
//! Fix `r` and `x0 ∈ (√r, 1)` and let `Ω_0 = f_{x0}(A_r)`. For `x ∈ (r, x0]`
//! the map `φ_x = T_x ∘ f_x ∘ f_{x0}^{-1}` sends `Ω_0` onto the disk minus the
//! arc `Γ(x) = T_x(Γ_x)`, fixing `0`. The pipeline looks for `x*`, `δ` and a
//! puncture `ζ* ∈ (−x0, −x0 + δ)` with
//!
//! * `φ_{x*}(ξ) < ξ` on `(−x0, −x0 + δ)`,
//! * `dist(0, Γ(x*)) > x0 − δ`,
//! * `min(|φ_{x*}(ζ*)|, dist(0, Γ(x*))) > |ζ*| > r/x0`,
//!
//! which together show that the identity and the map exchanging boundary
//! roles are both beaten by `φ_{x*}` on `Ω_0 \ {ζ*}` at the origin. Every
//! strict inequality is recorded with its numerical margin.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{harmonic_measure_upper_bound, shrink_mass_bound};
use crate::prime::{truncation_error_bound, AnnulusModulus, ComplexPoint};
use crate::slitmap::{
    check_real_monotonicity, f_eval, f_inverse, real_preimage_from, slit_endpoint, PhiMap,
    SlitArc, SlitMapParams,
};

/// Points on the grid used to check `φ_{x*}(ξ) < ξ` over `(−x0, −x0 + δ)`.
pub const LEMMA_GRID_POINTS: usize = 1000;

/// Bisection width for the crossing point defining `δ(x)`.
pub const CROSSING_WIDTH: f64 = 1e-12;

/// Samples per arc when measuring `|φ_{x*}|` on a shrinking arc.
pub const ARC_SAMPLES: usize = 257;

const MONOTONICITY_SAMPLES: usize = 400;
const LIPSCHITZ_SAMPLES: usize = 11;
const LIPSCHITZ_SAFETY: f64 = 2.0;
const MIN_GRID_FRACTION: f64 = 1e-7;

/// Parameters of a counterexample run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleConfig {
    pub r: f64,
    pub x0: f64,
    pub epsilon: f64,
    pub x_grid_step: f64,
    pub xi_scan_step: f64,
    pub tol: f64,
    pub trunc_tol: f64,
    pub n_list: Vec<usize>,
    pub m: usize,
}

impl CounterexampleConfig {
    /// Defaults: `ε = x0 − r/x0`, unit grid steps `1e-3`, `tol = 1e-6`,
    /// `trunc_tol = 1e-14`, `m = 3`, `n ∈ {10, 20, 40, 80, 160}`.
    pub fn new(r: f64, x0: f64) -> Self {
        Self {
            r,
            x0,
            epsilon: x0 - r / x0,
            x_grid_step: 1e-3,
            xi_scan_step: 1e-3,
            tol: 1e-6,
            trunc_tol: 1e-14,
            n_list: vec![10, 20, 40, 80, 160],
            m: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Self { r, x0, epsilon, .. } = *self;
        if !(r > 0.0 && x0 < 1.0 && r < x0 * x0) {
            return Err(Error::Domain(format!("need 0 < r < x0² < 1, got r = {r}, x0 = {x0}")));
        }
        if !(epsilon > 0.0 && epsilon <= x0 - r / x0 + 1e-15) {
            return Err(Error::Domain(format!(
                "epsilon must lie in (0, {}], got {epsilon}",
                x0 - r / x0
            )));
        }
        if !(self.x_grid_step > 0.0 && self.x_grid_step < 1.0) {
            return Err(Error::Domain(format!("x grid step must lie in (0, 1), got {}", self.x_grid_step)));
        }
        if !(self.xi_scan_step > 0.0 && self.xi_scan_step <= x0) {
            return Err(Error::Domain(format!("xi scan step must lie in (0, x0], got {}", self.xi_scan_step)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tol must be positive, got {}", self.tol)));
        }
        if self.m < 3 {
            return Err(Error::Domain(format!("target connectivity must be at least 3, got {}", self.m)));
        }
        if self.n_list.contains(&0) {
            return Err(Error::Domain("shrinking indices must be positive".into()));
        }
        Ok(())
    }

    pub fn modulus(&self) -> Result<AnnulusModulus> {
        AnnulusModulus::new(self.r, self.trunc_tol)
    }
}

/// Margins of the strict inequalities checked by a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// `min (ξ − φ_{x*}(ξ))` over the interior grid of `(−x0, −x0 + δ)`.
    pub lemma61_i: f64,
    /// `dist(0, Γ(x*)) − (x0 − δ)`.
    pub lemma61_ii: f64,
    /// `ζ* − φ_{x*}(ζ*)`.
    pub phi_gt_zeta: f64,
    /// `dist(0, Γ(x*)) − |ζ*|`.
    pub dist_gt_zeta: f64,
    /// `|ζ*| − r/x0`.
    pub r_over_x0_lt_zeta: f64,
}

impl Margins {
    pub fn min(&self) -> f64 {
        self.as_array().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.lemma61_i, self.lemma61_ii, self.phi_gt_zeta, self.dist_gt_zeta, self.r_over_x0_lt_zeta]
    }

    /// Largest absolute change between two margin sets.
    pub fn drift(&self, other: &Margins) -> f64 {
        self.as_array()
            .into_iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Record of one degenerate-case certification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub r: f64,
    pub x0: f64,
    pub epsilon: f64,
    pub x_star: f64,
    pub delta: f64,
    pub zeta_star: f64,
    pub dist_gamma: f64,
    pub q_at_xstar: f64,
    pub phi_at_zeta: f64,
    pub margins: Margins,
    pub tol: f64,
    pub truncation_report: f64,
    pub passed: bool,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// `min(|φ_{x*}(ζ*)|, dist(0, Γ(x*)))`, the distance from the origin to
    /// the boundary of `φ_{x*}(Ω_0 \ {ζ*})`.
    pub fn degenerate_image_distance(&self) -> f64 {
        self.phi_at_zeta.abs().min(self.dist_gamma)
    }

    fn structurally_valid(&self) -> bool {
        self.r < self.x_star
            && self.x_star < self.x0
            && self.delta > 0.0
            && self.delta <= self.epsilon
            && self.zeta_star > -self.x0
            && self.zeta_star < -self.x0 + self.delta
    }
}

/// Outcome of the walk over the `x` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub x_star: f64,
    pub delta: f64,
    /// `δ(x*)` before capping at `ε`.
    pub delta_at_x: f64,
    pub dist_gamma: f64,
    pub lemma_i_margin: f64,
    pub lipschitz_m: f64,
    /// Every `x` whose `dist(0, Γ(x))` was evaluated.
    pub visited: Vec<f64>,
    pub qualified: bool,
}

/// Shared state for one `(r, x0)` instance: the base map and the real
/// preimages of the `ξ` scan grid under `f_{x0}`.
#[derive(Debug, Clone)]
pub struct Instance {
    cfg: CounterexampleConfig,
    modulus: AnnulusModulus,
    base: SlitMapParams,
    scan_xi: Vec<f64>,
    scan_pre: Vec<f64>,
}

impl Instance {
    pub fn new(cfg: &CounterexampleConfig) -> Result<Self> {
        Self::with_modulus(cfg, cfg.modulus()?)
    }

    pub fn with_modulus(cfg: &CounterexampleConfig, modulus: AnnulusModulus) -> Result<Self> {
        cfg.validate()?;
        let base = SlitMapParams::new(modulus, cfg.x0)?;
        check_real_monotonicity(&base, MONOTONICITY_SAMPLES)?;
        let x0 = cfg.x0;
        let count = (x0 / cfg.xi_scan_step).ceil() as usize;
        let scan_xi: Vec<f64> = (0..count)
            .map(|k| -x0 + k as f64 * cfg.xi_scan_step)
            .filter(|&xi| xi < 0.0)
            .collect();
        // Continue the inverse from ξ = 0 (preimage x0) down to −x0.
        let mut scan_pre = vec![0.0; scan_xi.len()];
        let (mut prev_xi, mut prev_z) = (0.0, x0);
        for (i, &xi) in scan_xi.iter().enumerate().rev() {
            prev_z = real_preimage_from(&base, xi, prev_xi, prev_z)?;
            prev_xi = xi;
            scan_pre[i] = prev_z;
        }
        Ok(Self { cfg: cfg.clone(), modulus, base, scan_xi, scan_pre })
    }

    pub fn config(&self) -> &CounterexampleConfig {
        &self.cfg
    }

    pub fn modulus(&self) -> &AnnulusModulus {
        &self.modulus
    }

    pub fn base(&self) -> &SlitMapParams {
        &self.base
    }

    pub fn phi(&self, x: f64) -> Result<PhiMap> {
        PhiMap::new(x, self.cfg.x0, &self.modulus)
    }

    /// Real preimage of `ξ ∈ [−x0, 0]` under `f_{x0}`, seeded from the scan grid.
    pub fn preimage(&self, xi: f64) -> Result<f64> {
        let x0 = self.cfg.x0;
        if !(xi >= -x0 && xi <= 0.0) {
            return Err(Error::Domain(format!("xi = {xi} outside [{}, 0]", -x0)));
        }
        let idx = self
            .scan_xi
            .iter()
            .rposition(|&s| s <= xi)
            .unwrap_or(0);
        real_preimage_from(&self.base, xi, self.scan_xi[idx], self.scan_pre[idx])
    }

    fn phi_at(&self, phi: &PhiMap, pre: f64) -> Result<f64> {
        Ok(phi.eval_at_preimage(ComplexPoint::new(pre, 0.0))?.re)
    }

    /// `q(x) = φ_x(−x0) = T_x(−x)`.
    pub fn q(&self, phi: &PhiMap) -> f64 {
        let c = phi.mobius().c();
        let x = phi.x();
        -(x + c) / (1.0 + c * x)
    }

    /// `δ(x)`: distance from `−x0` to the first zero of `φ_x(ξ) − ξ`, or `x0`
    /// if there is none before the origin.
    pub fn delta(&self, x: f64) -> Result<f64> {
        let phi = self.phi(x)?;
        Ok(self.delta_within(&phi, self.cfg.x0)?.unwrap_or(self.cfg.x0))
    }

    /// Scan `ψ = φ_x − id` over the grid points in `[−x0, −x0 + limit]`.
    /// `Some(δ(x))` when a crossing is found there, `None` otherwise.
    fn delta_within(&self, phi: &PhiMap, limit: f64) -> Result<Option<f64>> {
        let x0 = self.cfg.x0;
        let q = self.q(phi);
        if q >= -x0 {
            return Err(Error::Precondition(format!("q(x) = {q} is not below -x0 = {}", -x0)));
        }
        let mut prev: Option<(f64, f64)> = None;
        for (&xi, &pre) in self.scan_xi.iter().zip(&self.scan_pre) {
            if xi > -x0 + limit {
                break;
            }
            let psi = self.phi_at(phi, pre)? - xi;
            if psi >= 0.0 {
                let Some((lo_xi, lo_pre)) = prev else {
                    return Ok(Some(0.0));
                };
                return Ok(Some(self.refine_crossing(phi, lo_xi, lo_pre, xi)? + x0));
            }
            prev = Some((xi, pre));
        }
        Ok(None)
    }

    fn refine_crossing(&self, phi: &PhiMap, mut lo: f64, mut lo_pre: f64, mut hi: f64) -> Result<f64> {
        while hi - lo > CROSSING_WIDTH {
            let mid = 0.5 * (lo + hi);
            let pre = real_preimage_from(&self.base, mid, lo, lo_pre)?;
            if self.phi_at(phi, pre)? - mid >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
                lo_pre = pre;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `dist(0, Γ(x)) = |T_x(Γ_x⁺)|`.
    pub fn dist_gamma(&self, x: f64) -> Result<f64> {
        let phi = self.phi(x)?;
        let arc = slit_endpoint(phi.outer_map())?;
        Ok(crate::slitmap::mobius_apply(phi.mobius(), arc.endpoint_plus)?.norm())
    }

    /// `min (ξ − φ_x(ξ))` over `LEMMA_GRID_POINTS` interior points of `(−x0, −x0 + δ)`.
    pub fn lemma_i_margin(&self, x: f64, delta: f64) -> Result<f64> {
        self.lemma_i_scan(x, delta, f64::NEG_INFINITY)
    }

    /// As `lemma_i_margin`, but stops at the first point whose margin is at
    /// most `floor` and returns that margin.
    fn lemma_i_scan(&self, x: f64, delta: f64, floor: f64) -> Result<f64> {
        let phi = self.phi(x)?;
        let x0 = self.cfg.x0;
        let mut margin = f64::INFINITY;
        let mut prev: Option<(f64, f64)> = None;
        for i in 1..=LEMMA_GRID_POINTS {
            let xi = -x0 + delta * i as f64 / (LEMMA_GRID_POINTS + 1) as f64;
            let pre = match prev {
                Some((pxi, pz)) => real_preimage_from(&self.base, xi, pxi, pz)?,
                None => self.preimage(xi)?,
            };
            prev = Some((xi, pre));
            margin = margin.min(xi - self.phi_at(&phi, pre)?);
            if margin <= floor {
                break;
            }
        }
        Ok(margin)
    }

    /// Twice the largest difference quotient of `x ↦ dist(0, Γ(x))` over the
    /// decade of distances `[(x0 − r)/100, (x0 − r)/10]` below `x0`, closed
    /// off by the exact value `dist(0, Γ(x0)) = x0`.
    pub fn lipschitz_estimate(&self) -> Result<(f64, Vec<f64>)> {
        let x0 = self.cfg.x0;
        let span = x0 - self.cfg.r;
        let mut xs: Vec<f64> = (0..LIPSCHITZ_SAMPLES)
            .map(|i| x0 - span * 10f64.powf(-1.0 - i as f64 / (LIPSCHITZ_SAMPLES - 1) as f64))
            .collect();
        let mut ds = xs
            .iter()
            .map(|&x| self.dist_gamma(x))
            .collect::<Result<Vec<_>>>()?;
        xs.push(x0);
        ds.push(x0);
        let slope = xs
            .windows(2)
            .zip(ds.windows(2))
            .map(|(x, d)| ((d[1] - d[0]) / (x[1] - x[0])).abs())
            .fold(0.0, f64::max);
        xs.pop();
        Ok((LIPSCHITZ_SAFETY * slope, xs))
    }

    /// Grid point `k` of the geometric approach `x_k = x0 − (x0 − r)(1 − step)^k`.
    fn grid_point(&self, k: usize) -> f64 {
        let c = &self.cfg;
        c.x0 - (c.x0 - c.r) * (1.0 - c.x_grid_step).powi(k as i32)
    }

    /// Walk the grid toward `x0`, returning the first qualifying point, or
    /// the visited point with the best `dist(0, Γ(x)) − (x0 − δ)` margin when
    /// none qualifies (`qualified = false`).
    pub fn search(&self) -> Result<SearchOutcome> {
        let c = &self.cfg;
        let (lipschitz_m, mut visited) = self.lipschitz_estimate()?;
        let mut fallback: Option<(f64, f64, f64, f64, f64)> = None;
        let mut last_valid: Option<(f64, f64)> = None;
        let mut k = 1usize;
        loop {
            let x = self.grid_point(k);
            k += 1;
            if c.x0 - x < MIN_GRID_FRACTION * (c.x0 - c.r) || x >= c.x0 {
                break;
            }
            let phi = self.phi(x)?;
            if self.q(&phi) >= -c.x0 {
                continue;
            }
            let dist = self.dist_gamma(x)?;
            visited.push(x);
            last_valid = Some((x, dist));
            // δ must exceed both of these to qualify; scan only that far.
            let needed = (c.x0 - dist + c.tol).max(lipschitz_m * (c.x0 - x));
            if needed >= c.epsilon {
                continue;
            }
            if let Some(delta_x) = self.delta_within(&phi, needed)? {
                let delta = c.epsilon.min(delta_x);
                let margin_ii = dist - (c.x0 - delta);
                if delta > 0.0 && fallback.is_none_or(|f| margin_ii > f.3) {
                    fallback = Some((x, delta, delta_x, margin_ii, dist));
                }
                continue;
            }
            // Only min(ε, δ(x)) matters here; the uncapped value is filled in on return.
            let delta_x = self.delta_within(&phi, c.epsilon)?.unwrap_or(c.epsilon);
            let delta = c.epsilon.min(delta_x);
            if delta <= 0.0 {
                continue;
            }
            let margin_ii = dist - (c.x0 - delta);
            if fallback.is_none_or(|f| margin_ii > f.3) {
                fallback = Some((x, delta, delta_x, margin_ii, dist));
            }
            if lipschitz_m * (c.x0 - x) > delta || margin_ii <= c.tol {
                continue;
            }
            if self.lemma_i_scan(x, delta, c.tol)? <= c.tol {
                continue;
            }
            let margin_i = self.lemma_i_margin(x, delta)?;
            return Ok(SearchOutcome {
                x_star: x,
                delta,
                delta_at_x: if delta_x < c.epsilon { delta_x } else { self.delta(x)? },
                dist_gamma: dist,
                lemma_i_margin: margin_i,
                lipschitz_m,
                visited,
                qualified: true,
            });
        }
        let fallback = match (fallback, last_valid) {
            (Some(f), _) => Some(f),
            (None, Some((x, dist))) => {
                let delta_x = self.delta(x)?;
                let delta = c.epsilon.min(delta_x);
                (delta > 0.0).then_some((x, delta, delta_x, dist - (c.x0 - delta), dist))
            }
            (None, None) => None,
        };
        let Some((x, delta, delta_x, _, dist)) = fallback else {
            return Err(Error::SearchFailure(format!(
                "no grid point with q(x) < -x0 and δ(x) > 0 for r = {}, x0 = {}",
                c.r, c.x0
            )));
        };
        let margin_i = self.lemma_i_margin(x, delta)?;
        Ok(SearchOutcome {
            x_star: x,
            delta,
            delta_at_x: if delta_x < c.epsilon { delta_x } else { self.delta(x)? },
            dist_gamma: dist,
            lemma_i_margin: margin_i,
            lipschitz_m,
            visited,
            qualified: false,
        })
    }

    /// Largest truncation bound over the moduli met by the certificate.
    pub fn truncation_report(&self, x_star: f64) -> f64 {
        let r = self.modulus.r();
        let x0 = self.cfg.x0;
        let mut worst: f64 = 0.0;
        for z in [r, 1.0] {
            for a in [x_star, 1.0 / x_star, x0, 1.0 / x0] {
                worst = worst.max(truncation_error_bound(&self.modulus, z, a));
            }
        }
        worst
    }

    /// Evaluate every check for a fixed `(x*, δ, ζ*)`.
    pub fn assess(&self, x_star: f64, delta: f64, zeta_star: f64) -> Result<Certificate> {
        let c = &self.cfg;
        let phi = self.phi(x_star)?;
        let dist = self.dist_gamma(x_star)?;
        let phi_zeta = self.phi_at(&phi, self.preimage(zeta_star)?)?;
        let margins = Margins {
            lemma61_i: self.lemma_i_margin(x_star, delta)?,
            lemma61_ii: dist - (c.x0 - delta),
            phi_gt_zeta: zeta_star - phi_zeta,
            dist_gt_zeta: dist - zeta_star.abs(),
            r_over_x0_lt_zeta: zeta_star.abs() - c.r / c.x0,
        };
        let mut cert = Certificate {
            r: c.r,
            x0: c.x0,
            epsilon: c.epsilon,
            x_star,
            delta,
            zeta_star,
            dist_gamma: dist,
            q_at_xstar: self.q(&phi),
            phi_at_zeta: phi_zeta,
            margins,
            tol: c.tol,
            truncation_report: self.truncation_report(x_star),
            passed: false,
        };
        cert.passed = cert.structurally_valid() && margins.min() > c.tol;
        Ok(cert)
    }
}

/// `δ(x)` for a single `x`.
pub fn delta_of(x: f64, cfg: &CounterexampleConfig) -> Result<f64> {
    Instance::new(cfg)?.delta(x)
}

/// First grid point `x*` satisfying both conditions, with `δ = min(ε, δ(x*))`.
pub fn search_x_star(cfg: &CounterexampleConfig) -> Result<(f64, f64)> {
    let out = Instance::new(cfg)?.search()?;
    if !out.qualified {
        return Err(Error::SearchFailure(format!(
            "no grid point qualified; best candidate x = {} has dist margin {:.3e}",
            out.x_star,
            out.dist_gamma - (cfg.x0 - out.delta)
        )));
    }
    Ok((out.x_star, out.delta))
}

/// Midpoint of the part of `(−x0, −x0 + δ)` where `|ζ| < dist − tol`.
pub fn choose_zeta(x0: f64, delta: f64, dist_gamma: f64, tol: f64) -> f64 {
    let lo = (-x0).max(-(dist_gamma - tol));
    let hi = -x0 + delta;
    0.5 * (lo + hi)
}

/// Run the search and assess the resulting `(x*, δ, ζ*)`.
pub fn certify_degenerate(cfg: &CounterexampleConfig) -> Result<Certificate> {
    certify_with(&Instance::new(cfg)?).map(|(cert, _)| cert)
}

/// As [`certify_degenerate`], also returning the search record.
pub fn certify_with(inst: &Instance) -> Result<(Certificate, SearchOutcome)> {
    let out = inst.search()?;
    let cfg = inst.config();
    let zeta = choose_zeta(cfg.x0, out.delta, out.dist_gamma, cfg.tol);
    let mut cert = inst.assess(out.x_star, out.delta, zeta)?;
    cert.passed &= out.qualified;
    Ok((cert, out))
}

/// Recompute a certificate's checks at its `(x*, δ, ζ*)` with a different
/// truncation tolerance.
pub fn revalidate(cfg: &CounterexampleConfig, cert: &Certificate, trunc_tol: f64) -> Result<Certificate> {
    let modulus = AnnulusModulus::new(cfg.r, trunc_tol)?;
    let inst = Instance::with_modulus(cfg, modulus)?;
    inst.assess(cert.x_star, cert.delta, cert.zeta_star)
}

/// One origin-centred circular arc `{radius e^{iθ} : θ_min ≤ θ ≤ θ_max}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub radius: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Arc {
    pub fn endpoints(&self) -> [ComplexPoint; 2] {
        [
            ComplexPoint::from_polar(self.radius, self.theta_min),
            ComplexPoint::from_polar(self.radius, self.theta_max),
        ]
    }

    pub fn point(&self, t: f64) -> ComplexPoint {
        ComplexPoint::from_polar(self.radius, self.theta_min + (self.theta_max - self.theta_min) * t)
    }

    /// Distance to another origin-centred arc with angles inside `[0, 2π]`.
    pub fn distance_to(&self, radius: f64, theta_min: f64, theta_max: f64) -> f64 {
        let gap = angular_gap((self.theta_min, self.theta_max), (theta_min, theta_max));
        (self.radius * self.radius + radius * radius - 2.0 * self.radius * radius * gap.cos())
            .max(0.0)
            .sqrt()
    }
}

/// Smallest angle between two angular intervals, zero when they overlap.
fn angular_gap(a: (f64, f64), b: (f64, f64)) -> f64 {
    let covers = |t: f64, (lo, hi): (f64, f64)| (t - lo).rem_euclid(2.0 * PI) <= hi - lo;
    if covers(b.0, a) || covers(a.0, b) {
        return 0.0;
    }
    let mut best = PI;
    for s in [a.0, a.1] {
        for t in [b.0, b.1] {
            let d = (s - t).rem_euclid(2.0 * PI);
            best = best.min(d.min(2.0 * PI - d));
        }
    }
    best
}

/// The `m − 2` shrinking arcs near `ζ*` for index `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcFamily {
    pub center: f64,
    pub n: usize,
    pub arcs: Vec<Arc>,
}

impl ArcFamily {
    /// Largest distance between two points of the family.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<ComplexPoint> = self.arcs.iter().flat_map(|a| a.endpoints()).collect();
        let mut best: f64 = 0.0;
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i + 1..] {
                best = best.max((p - q).norm());
            }
        }
        best
    }

    pub fn min_radius(&self) -> f64 {
        self.arcs.iter().map(|a| a.radius).fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.arcs.iter().map(|a| a.radius).fold(0.0, f64::max)
    }

    /// Distance to the fixed boundary `∂D ∪ Γ_{x0}`.
    pub fn distance_to_fixed_boundary(&self, slit: &SlitArc) -> f64 {
        let (lo, hi) = slit.angle_range();
        self.arcs
            .iter()
            .map(|a| (1.0 - a.radius).min(a.distance_to(slit.radius, lo, hi)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest distance from `ζ*` to a point of the family.
    pub fn reach(&self) -> f64 {
        let zeta = ComplexPoint::new(self.center, 0.0);
        self.arcs
            .iter()
            .flat_map(|a| a.endpoints())
            .map(|p| (p - zeta).norm())
            .fold(0.0, f64::max)
    }
}

/// `m − 2` arcs on radii `|ζ*| ∓ k/(2n(m−1))` (signs alternating, inward
/// first), each of angular half-width `1/(4n|ζ*|)` about the direction of
/// `ζ*`.
pub fn make_shrinking_arcs(cfg: &CounterexampleConfig, zeta_star: f64, n: usize, slit: &SlitArc) -> Result<ArcFamily> {
    if n == 0 || cfg.m < 3 {
        return Err(Error::Domain(format!("need n >= 1 and m >= 3, got n = {n}, m = {}", cfg.m)));
    }
    if !(zeta_star < 0.0 && zeta_star > -cfg.x0) {
        return Err(Error::Domain(format!("ζ* = {zeta_star} outside (-x0, 0)")));
    }
    let rho = zeta_star.abs();
    let nf = n as f64;
    let spacing = 1.0 / (2.0 * nf * (cfg.m - 1) as f64);
    let half_width = 1.0 / (4.0 * nf * rho);
    if half_width >= PI / 2.0 {
        return Err(Error::Geometry(format!("arc half-width {half_width} too large for n = {n}")));
    }
    let arcs: Vec<Arc> = (1..=cfg.m - 2)
        .map(|k| {
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            Arc {
                radius: rho + sign * k as f64 * spacing,
                theta_min: PI - half_width,
                theta_max: PI + half_width,
            }
        })
        .collect();
    let family = ArcFamily { center: zeta_star, n, arcs };
    check_family(&family, slit)?;
    Ok(family)
}

fn check_family(family: &ArcFamily, slit: &SlitArc) -> Result<()> {
    let limit = 1.0 / family.n as f64;
    if family.reach() >= limit {
        return Err(Error::Geometry(format!(
            "arcs reach {} from ζ*, not inside D(ζ*, {limit})",
            family.reach()
        )));
    }
    for (i, a) in family.arcs.iter().enumerate() {
        if !(a.theta_max > a.theta_min) || !(a.radius > 0.0) {
            return Err(Error::Geometry(format!("arc {i} is degenerate")));
        }
        if a.radius >= 1.0 {
            return Err(Error::Geometry(format!("arc {i} leaves the unit disk")));
        }
        let (lo, hi) = slit.angle_range();
        if a.distance_to(slit.radius, lo, hi) <= 0.0 {
            return Err(Error::Geometry(format!("arc {i} meets the base slit")));
        }
        for b in &family.arcs[i + 1..] {
            if a.radius == b.radius {
                return Err(Error::Geometry("two arcs share a circle".into()));
            }
        }
    }
    Ok(())
}

/// One row of the non-degenerate evidence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRow {
    pub n: usize,
    pub dist_boundary: f64,
    pub dist_phi_image: f64,
    pub cn_bound: f64,
    pub hm_bound_at_0: f64,
    pub margin_ineq1: f64,
}

/// Evidence for the shrinking-arc domains `Ω_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceTable {
    pub rows: Vec<EvidenceRow>,
    /// `min(|φ_{x*}(ζ*)|, dist(0, Γ(x*)))`.
    pub degenerate_value: f64,
    /// `max_n n · |dist(0, ∂φ_{x*}(Ω_n)) − degenerate_value|`.
    pub fitted_c: f64,
    /// Smallest listed `n` from which every first-inequality margin is positive.
    pub n_min: Option<usize>,
}

impl EvidenceTable {
    pub const HEADER: &'static str = "n,dist_boundary,dist_phi_image,cn_bound,hm_bound_at_0,margin_ineq1";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                r.n, r.dist_boundary, r.dist_phi_image, r.cn_bound, r.hm_bound_at_0, r.margin_ineq1
            );
        }
        s
    }
}

/// `min |φ_{x*}|` over `ARC_SAMPLES` points of an arc, continuing the
/// inverse of `f_{x0}` outward from the arc's midpoint.
fn min_phi_on_arc(inst: &Instance, phi: &PhiMap, arc: &Arc) -> Result<f64> {
    let mid = ComplexPoint::from_polar(arc.radius, 0.5 * (arc.theta_min + arc.theta_max));
    if (mid.im).abs() > 1e-12 || mid.re >= 0.0 {
        return Err(Error::Geometry("arc is not centred on the negative real axis".into()));
    }
    let mid_pre = real_preimage_anywhere(inst.base(), mid.re)?;
    let mut best = phi.eval_at_preimage(ComplexPoint::new(mid_pre, 0.0))?.norm();
    let half = ARC_SAMPLES / 2;
    for dir in [-1.0, 1.0] {
        let mut seed = ComplexPoint::new(mid_pre, 0.0);
        for k in 1..=half {
            let t = 0.5 + dir * 0.5 * k as f64 / half as f64;
            let p = arc.point(t);
            let z = f_inverse(inst.base(), p, seed)?;
            best = best.min(phi.eval_at_preimage(z)?.norm());
            seed = z;
        }
    }
    Ok(best)
}

/// Real preimage of `w ∈ (−1, 0]` under `f_{x0}`: on `[r, x0]` when
/// `w ≥ −x0`, on `[−1, −r]` beyond the slit.
fn real_preimage_anywhere(base: &SlitMapParams, w: f64) -> Result<f64> {
    let x0 = base.x();
    if w >= -x0 {
        return real_preimage_from(base, w, 0.0, x0);
    }
    if w <= -1.0 {
        return Err(Error::Domain(format!("{w} is not inside the unit disk")));
    }
    // f_{x0}(−t) decreases from −x0 to −1 as t runs over [r, 1].
    let value = |t: f64| f_eval(base, ComplexPoint::new(-t, 0.0)).map(|v| v.re - w);
    let (mut lo, mut hi) = (base.r(), 1.0);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if value(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(-0.5 * (lo + hi))
}

/// Build the evidence table for every `n` in the configuration.
pub fn nondegenerate_evidence(cfg: &CounterexampleConfig, cert: &Certificate) -> Result<EvidenceTable> {
    if !cert.passed {
        return Err(Error::Precondition("evidence requires a passing certificate".into()));
    }
    let inst = Instance::new(cfg)?;
    let slit = slit_endpoint(inst.base())?;
    let phi = inst.phi(cert.x_star)?;
    let degenerate = cert.degenerate_image_distance();
    let rows = cfg
        .n_list
        .par_iter()
        .map(|&n| {
            let family = make_shrinking_arcs(cfg, cert.zeta_star, n, &slit)?;
            let dist_boundary = family.min_radius().min(cfg.x0).min(1.0);
            let mut image = cert.dist_gamma.min(1.0);
            for arc in &family.arcs {
                image = image.min(min_phi_on_arc(&inst, &phi, arc)?);
            }
            // No finite bound while the family is wider than its gap to P_0.
            let (reach, diam) = (family.distance_to_fixed_boundary(&slit), family.diameter());
            let cn = if diam < reach { shrink_mass_bound(reach, diam)? } else { f64::INFINITY };
            Ok(EvidenceRow {
                n,
                dist_boundary,
                dist_phi_image: image,
                cn_bound: cn,
                hm_bound_at_0: harmonic_measure_upper_bound(family.min_radius(), 1.0, cn),
                margin_ineq1: image - dist_boundary,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fitted_c = rows
        .iter()
        .map(|r| r.n as f64 * (r.dist_phi_image - degenerate).abs())
        .fold(0.0, f64::max);
    let n_min = rows
        .iter()
        .rposition(|r| r.margin_ineq1 <= 0.0)
        .map_or(rows.first().map(|r| r.n), |i| rows.get(i + 1).map(|r| r.n));
    Ok(EvidenceTable { rows, degenerate_value: degenerate, fitted_c, n_min })
}
