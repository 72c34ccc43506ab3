//! Logarithmic potentials, annulus harmonic measure and periods, the slit
//! radii linear system, and the annulus squeezing function.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prime::{AnnulusModulus, ComplexPoint};
use crate::slitmap::{f_eval, mobius_apply, MobiusReal, SlitMapParams};

/// Default quadrature node count for circle and arc measures.
pub const DEFAULT_NODES: usize = 4096;

/// Default boundary sample count when measuring `dist(0, ∂h(A_r))`.
pub const BOUNDARY_SAMPLES: usize = 4096;

const SINGULAR_TOL: f64 = 1e-12;
const SUPPORT_TOL: f64 = 1e-12;

/// A positive measure represented by weighted nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    nodes: Vec<ComplexPoint>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(nodes: Vec<ComplexPoint>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::Domain(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Domain(format!("weight {w} is not a finite non-negative number")));
        }
        if nodes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Domain("node is not finite".into()));
        }
        Ok(Self { nodes, weights })
    }

    /// Mass `mass` spread uniformly over the circle `|z − center| = radius`
    /// (periodic trapezoid rule).
    pub fn uniform_circle(center: ComplexPoint, radius: f64, mass: f64, count: usize) -> Result<Self> {
        if !(radius > 0.0) || count == 0 {
            return Err(Error::Domain("circle needs positive radius and at least one node".into()));
        }
        let w = mass / count as f64;
        let nodes = (0..count)
            .map(|k| center + ComplexPoint::from_polar(radius, 2.0 * PI * k as f64 / count as f64))
            .collect();
        Self::new(nodes, vec![w; count])
    }

    /// Mass `mass` spread uniformly in arc length over the origin-centred arc
    /// `{radius e^{iθ} : θ_min ≤ θ ≤ θ_max}` (trapezoid rule, endpoints halved).
    pub fn uniform_arc(radius: f64, theta_min: f64, theta_max: f64, mass: f64, count: usize) -> Result<Self> {
        if !(radius > 0.0) || !(theta_max > theta_min) || count < 2 {
            return Err(Error::Domain("arc needs positive radius, θ_max > θ_min and two nodes".into()));
        }
        let intervals = (count - 1) as f64;
        let nodes: Vec<_> = (0..count)
            .map(|k| ComplexPoint::from_polar(radius, theta_min + (theta_max - theta_min) * k as f64 / intervals))
            .collect();
        let mut weights = vec![mass / intervals; count];
        weights[0] *= 0.5;
        weights[count - 1] *= 0.5;
        Self::new(nodes, weights)
    }

    pub fn nodes(&self) -> &[ComplexPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Check that every node lies on `|z − center| = radius`.
    pub fn check_on_circle(&self, center: ComplexPoint, radius: f64) -> Result<()> {
        match self.nodes.iter().find(|z| ((**z - center).norm() - radius).abs() > SUPPORT_TOL) {
            Some(z) => Err(Error::Domain(format!("node {z} is off the support circle"))),
            None => Ok(()),
        }
    }
}

/// `V_μ(w) = Σ_k μ_k log(1/|w − z_k|)`.
pub fn log_potential(mu: &DiscreteMeasure, w: ComplexPoint) -> Result<f64> {
    let mut acc = 0.0;
    for (z, m) in mu.nodes.iter().zip(&mu.weights) {
        let d = (w - z).norm();
        if d < SINGULAR_TOL {
            return Err(Error::Domain(format!("evaluation point {w} collides with node {z}")));
        }
        acc -= m * d.ln();
    }
    Ok(acc)
}

/// Harmonic measure of the inner circle in `A_r`: `log|z| / log r`.
pub fn annulus_harmonic_measure_inner(z: ComplexPoint, r: f64) -> Result<f64> {
    check_r(r)?;
    let m = z.norm();
    if !(m >= r && m <= 1.0) {
        return Err(Error::Domain(format!("|z| = {m} outside [{r}, 1]")));
    }
    Ok(m.ln() / r.ln())
}

/// Period of the inner harmonic measure of `A_r`: `1 / log(1/r)`.
pub fn annulus_period(r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(1.0 / (1.0 / r).ln())
}

fn check_r(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("inner radius must lie in (0, 1), got {r}")));
    }
    Ok(())
}

/// Periods `λ_jk` of a harmonic basis, indexed `0..=n` with `0` the outer
/// boundary component.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodMatrix {
    entries: DMatrix<f64>,
}

impl PeriodMatrix {
    /// Validates symmetry, zero row sums and invertibility of every principal
    /// minor obtained by deleting one row and the matching column.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let size = entries.nrows();
        if size < 2 || entries.ncols() != size {
            return Err(Error::Domain(format!(
                "period matrix must be square of size ≥ 2, got {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let scale = entries.amax().max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;
        for j in 0..size {
            for k in 0..j {
                if (entries[(j, k)] - entries[(k, j)]).abs() > tol {
                    return Err(Error::Domain(format!("period matrix is not symmetric at ({j}, {k})")));
                }
            }
            let sum: f64 = entries.row(j).iter().sum();
            if sum.abs() > tol * size as f64 {
                return Err(Error::Domain(format!("row {j} of the period matrix sums to {sum}")));
            }
        }
        let pm = Self { entries };
        for m in 0..size {
            let minor = pm.reduced(m);
            if minor.determinant().abs() <= 1e-14 * scale.powi(size as i32 - 1) {
                return Err(Error::Singular(format!("minor with index {m} deleted is singular")));
            }
        }
        Ok(pm)
    }

    /// The doubly connected case: `λ_11 = λ_00 = 1/log(1/r) = −λ_01`.
    pub fn annulus(r: f64) -> Result<Self> {
        let l = annulus_period(r)?;
        Self::new(DMatrix::from_row_slice(2, 2, &[l, -l, -l, l]))
    }

    /// Number of bounded boundary components.
    pub fn n(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.entries * factor)
    }

    /// `Λ_m`: the matrix with row and column `m` removed.
    pub fn reduced(&self, m: usize) -> DMatrix<f64> {
        self.entries.clone().remove_row(m).remove_column(m)
    }
}

/// Solve `Σ_{k≠m} λ_jk log(1/r_k) = ω_j(z0)` for `j ≠ m`.
///
/// `omega_at_z0` lists `ω_j(z0)` for `j ∈ {0..=n} \ {m}` in increasing order;
/// the returned radii use the same indexing.
pub fn radii_solve(periods: &PeriodMatrix, m: usize, omega_at_z0: &[f64]) -> Result<Vec<f64>> {
    let n = periods.n();
    if m > n {
        return Err(Error::Domain(format!("deleted index {m} exceeds n = {n}")));
    }
    if omega_at_z0.len() != n {
        return Err(Error::Domain(format!(
            "expected {n} harmonic measure values, got {}",
            omega_at_z0.len()
        )));
    }
    let lu = periods.reduced(m).lu();
    let rhs = DVector::from_column_slice(omega_at_z0);
    let logs = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular(format!("reduced period matrix Λ_{m} is singular")))?;
    Ok(logs.iter().map(|l| (-l).exp()).collect())
}

/// `S_{A_r}(z) = max(|z|, r/|z|)`.
pub fn squeezing_annulus(z: ComplexPoint, r: f64) -> Result<f64> {
    check_r(r)?;
    let m = z.norm();
    if !(m > r && m < 1.0) {
        return Err(Error::Domain(format!("|z| = {m} outside ({r}, 1)")));
    }
    Ok(m.max(r / m))
}

/// Upper bound `1/log(dist/diam)` for the common mass of the potential
/// representation of a shrinking boundary part.
pub fn shrink_mass_bound(dist_p0_pn: f64, diam_pn: f64) -> Result<f64> {
    if !(diam_pn > 0.0 && diam_pn < dist_p0_pn && dist_p0_pn.is_finite()) {
        return Err(Error::Domain(format!(
            "need 0 < diam < dist, got diam = {diam_pn}, dist = {dist_p0_pn}"
        )));
    }
    Ok(1.0 / (dist_p0_pn / diam_pn).ln())
}

/// Upper bound `c_n log(maxdist/dist)`, clamped at 0, for the harmonic measure
/// of the shrinking part seen from a point at distance `dist_z_pn` from it and
/// at most `maxdist_z_p0` from the fixed boundary.
pub fn harmonic_measure_upper_bound(dist_z_pn: f64, maxdist_z_p0: f64, cn_bound: f64) -> f64 {
    (cn_bound * (maxdist_z_p0 / dist_z_pn).ln()).max(0.0)
}

/// One competitor map `T_c ∘ f_x`, optionally precomposed with the boundary
/// swap `z ↦ r/z`, normalized so that the base point goes to the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Competitor {
    pub x: f64,
    pub inverted: bool,
    pub dist: f64,
}

/// `min |T_c(f_x(s(z)))|` over the two boundary circles of `A_r`, where `s`
/// is the identity or `z ↦ r/z` and `c = f_x(s(z0))` for real `z0 ∈ (r, 1)`.
pub fn competitor_boundary_distance(
    m: &AnnulusModulus,
    x: f64,
    z0: f64,
    inverted: bool,
    samples: usize,
) -> Result<f64> {
    let r = m.r();
    let p = SlitMapParams::new(*m, x)?;
    let swap = |z: ComplexPoint| if inverted { r / z } else { z };
    let c = f_eval(&p, swap(ComplexPoint::new(z0, 0.0)))?;
    let t = MobiusReal::new(c.re)?;
    let values: Vec<Result<f64>> = (0..2 * samples)
        .into_par_iter()
        .map(|k| {
            let radius = if k < samples { 1.0 } else { r };
            let theta = 2.0 * PI * (k % samples) as f64 / samples as f64;
            let w = f_eval(&p, swap(ComplexPoint::from_polar(radius, theta)))?;
            Ok(mobius_apply(t, w)?.norm())
        })
        .collect();
    let mut best = f64::INFINITY;
    for v in values {
        best = best.min(v?);
    }
    Ok(best)
}

/// Sweep `count` competitors (half direct, half through `z ↦ r/z`) with `x`
/// evenly spaced in `(r, 1)`.
pub fn competitor_sweep(m: &AnnulusModulus, z0: f64, count: usize, samples: usize) -> Result<Vec<Competitor>> {
    let r = m.r();
    if !(z0 > r && z0 < 1.0) {
        return Err(Error::Domain(format!("base point {z0} outside ({r}, 1)")));
    }
    let half = count.div_ceil(2);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let inverted = k >= half;
        let idx = if inverted { k - half } else { k };
        let per = if inverted { count - half } else { half };
        let x = r + (1.0 - r) * (idx as f64 + 0.5) / per as f64;
        let dist = competitor_boundary_distance(m, x, z0, inverted, samples)?;
        out.push(Competitor { x, inverted, dist });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    #[test]
    fn circle_potential_at_center() {
        let mu = DiscreteMeasure::uniform_circle(c(0.0, 0.0), 0.4, 1.0, 256).unwrap();
        assert!((log_potential(&mu, c(0.0, 0.0)).unwrap() - (1.0f64 / 0.4).ln()).abs() < 1e-13);
        let mu = DiscreteMeasure::uniform_circle(c(0.0, 0.0), 1.0, 1.0, 256).unwrap();
        assert!(log_potential(&mu, c(0.0, 0.0)).unwrap().abs() < 1e-13);
        mu.check_on_circle(c(0.0, 0.0), 1.0).unwrap();
    }

    #[test]
    fn circle_potential_outside_is_point_mass() {
        let mu = DiscreteMeasure::uniform_circle(c(0.0, 0.0), 0.5, 1.0, DEFAULT_NODES).unwrap();
        let w = c(0.6, 0.8) * 1.5;
        assert!((log_potential(&mu, w).unwrap() - (1.0 / 1.5f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn arc_measure_mass() {
        let mu = DiscreteMeasure::uniform_arc(0.7, 2.0, 3.0, 0.25, 101).unwrap();
        assert!((mu.total_mass() - 0.25).abs() < 1e-15);
        mu.check_on_circle(c(0.0, 0.0), 0.7).unwrap();
    }

    #[test]
    fn measure_validation() {
        assert!(DiscreteMeasure::new(vec![c(0.0, 0.0)], vec![]).is_err());
        assert!(DiscreteMeasure::new(vec![c(0.0, 0.0)], vec![-1.0]).is_err());
        let mu = DiscreteMeasure::new(vec![c(0.5, 0.0)], vec![1.0]).unwrap();
        assert!(log_potential(&mu, c(0.5, 0.0)).is_err());
    }

    #[test]
    fn harmonic_measure_values() {
        let r = 0.3;
        assert!((annulus_harmonic_measure_inner(c(r, 0.0), r).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(annulus_harmonic_measure_inner(c(0.0, 1.0), r).unwrap(), 0.0);
        let z = ComplexPoint::from_polar(r.sqrt(), 0.7);
        assert!((annulus_harmonic_measure_inner(z, r).unwrap() - 0.5).abs() < 1e-15);
        assert!(annulus_harmonic_measure_inner(c(0.1, 0.0), r).is_err());
    }

    #[test]
    fn period_values() {
        assert!((annulus_period((-1.0f64).exp()).unwrap() - 1.0).abs() < 1e-15);
        assert!((annulus_period((-2.0f64).exp()).unwrap() - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 1..100 {
            let p = annulus_period(k as f64 / 100.0).unwrap();
            assert!(p > prev);
            prev = p;
        }
    }

    #[test]
    fn annulus_radii() {
        let r = 0.3;
        let pm = PeriodMatrix::annulus(r).unwrap();
        let z0 = c(0.5, 0.2);
        let w = annulus_harmonic_measure_inner(z0, r).unwrap();
        let radii = radii_solve(&pm, 0, &[w]).unwrap();
        assert!((radii[0] - z0.norm()).abs() < 1e-12);
        let doubled = radii_solve(&pm.scaled(2.0).unwrap(), 0, &[2.0 * w]).unwrap();
        assert!((doubled[0] - radii[0]).abs() < 1e-15);
    }

    #[test]
    fn period_matrix_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 2.0]);
        assert!(PeriodMatrix::new(bad).is_err());
        let asym = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.5, 2.0, -0.5, -0.5, -1.0, 1.5]);
        assert!(PeriodMatrix::new(asym).is_err());
        let zero = DMatrix::zeros(2, 2);
        assert!(matches!(PeriodMatrix::new(zero), Err(Error::Singular(_))));
    }

    #[test]
    fn radii_solve_rejects_bad_input() {
        let pm = PeriodMatrix::annulus(0.4).unwrap();
        assert!(radii_solve(&pm, 2, &[0.5]).is_err());
        assert!(radii_solve(&pm, 0, &[0.5, 0.1]).is_err());
    }

    #[test]
    fn squeezing_values() {
        assert_eq!(squeezing_annulus(c(0.5, 0.0), 0.25).unwrap(), 0.5);
        assert_eq!(squeezing_annulus(c(0.0, 0.75), 0.5).unwrap(), 0.75);
        assert!(squeezing_annulus(c(0.2, 0.0), 0.25).is_err());
    }

    #[test]
    fn mass_bound_values() {
        assert!((shrink_mass_bound(0.5, 0.05).unwrap() - 1.0 / 10f64.ln()).abs() < 1e-15);
        assert!((shrink_mass_bound(std::f64::consts::E * 0.1, 0.1).unwrap() - 1.0).abs() < 1e-14);
        assert!(shrink_mass_bound(0.1, 0.1).is_err());
        assert!(shrink_mass_bound(1.0, 1e-12).unwrap() < 0.04);
    }

    #[test]
    fn harmonic_bound_values() {
        assert_eq!(harmonic_measure_upper_bound(0.05, 2.0, 0.0), 0.0);
        assert_eq!(harmonic_measure_upper_bound(0.3, 0.3, 0.7), 0.0);
        assert!((harmonic_measure_upper_bound(0.05, 2.0, 0.1) - 0.1 * 40f64.ln()).abs() < 1e-15);
        assert_eq!(harmonic_measure_upper_bound(2.0, 0.05, 0.1), 0.0);
    }

    #[test]
    fn canonical_competitor_attains_formula() {
        let m = AnnulusModulus::new(0.25, 1e-15).unwrap();
        let d = competitor_boundary_distance(&m, 0.6, 0.6, false, 512).unwrap();
        assert!((d - 0.6).abs() < 1e-9);
        let d = competitor_boundary_distance(&m, 0.25 / 0.3, 0.3, true, 512).unwrap();
        assert!((d - 0.25 / 0.3).abs() < 1e-9);
    }
}
