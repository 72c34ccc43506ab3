//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Built with `harness = false`. The process fails when a criterion fails
//! unless it is listed in `KNOWN_UNMET`, whose entries are printed as FAIL
//! all the same.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use slitkit::counterexample::{
    certify_with, nondegenerate_evidence, revalidate, Certificate, CounterexampleConfig, Instance,
};
use slitkit::potential::{
    annulus_harmonic_measure_inner, competitor_boundary_distance, competitor_sweep, radii_solve, squeezing_annulus,
    PeriodMatrix,
};
use slitkit::prime::{prime_omega, AnnulusModulus, ComplexPoint};
use slitkit::slitmap::{f_eval, f_prime_at_center, q_eval, q_prime_at_x0, slit_endpoint, SlitMapParams};

/// Criteria that fail at the pinned configuration; see the README.
const KNOWN_UNMET: &[u32] = &[8];

const GOLDEN: &str = include_str!("golden/certificate_r0.25_x0.8.json");

type Check = std::result::Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Check);

fn c(re: f64, im: f64) -> ComplexPoint {
    ComplexPoint::new(re, im)
}

fn within(label: &str, err: f64, tol: f64) -> std::result::Result<(), String> {
    if err.is_finite() && err < tol {
        Ok(())
    } else {
        Err(format!("{label}: {err:.3e} not below {tol:.0e}"))
    }
}

fn budget(t: Duration, limit: f64) -> std::result::Result<(), String> {
    if t.as_secs_f64() < limit {
        Ok(())
    } else {
        Err(format!("took {:.2} s, limit {limit} s", t.as_secs_f64()))
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn relative(lhs: ComplexPoint, rhs: ComplexPoint) -> f64 {
    (lhs - rhs).norm() / rhs.norm().max(1e-300)
}

fn criterion_1() -> Check {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let mut worst: f64 = 0.0;
    for r in [0.1, 0.3, 0.5, 0.7] {
        let m = AnnulusModulus::new(r, 1e-12).map_err(e)?;
        let mut pairs = 0;
        while pairs < 200 {
            let z = ComplexPoint::from_polar(rng.gen_range(1.0..1.0 / r), rng.gen_range(0.0..2.0 * PI));
            let a = ComplexPoint::from_polar(rng.gen_range(1.0..1.0 / r), rng.gen_range(0.0..2.0 * PI));
            if (z - a).norm() < 1e-3 {
                continue;
            }
            pairs += 1;
            let w = prime_omega(z, a, &m).map_err(e)?;
            let checks = [
                relative(prime_omega(a, z, &m).map_err(e)?, -w),
                relative(prime_omega(z.conj(), a.conj(), &m).map_err(e)?, w.conj()),
                relative(prime_omega(1.0 / z, 1.0 / a, &m).map_err(e)?, -w / (z * a)),
                relative(prime_omega(r * r * z, a, &m).map_err(e)?, -a * w / z),
            ];
            worst = checks.into_iter().fold(worst, f64::max);
        }
    }
    within("identity residual", worst, 1e-9)?;
    budget(t.elapsed(), 5.0)?;
    Ok(format!("max relative residual {worst:.2e} over 800 pairs, {:.2} s", t.elapsed().as_secs_f64()))
}

fn criterion_2() -> Check {
    let t = Instant::now();
    let p = SlitMapParams::new(AnnulusModulus::new(0.5, 1e-14).map_err(e)?, 0.75).map_err(e)?;
    let mut outer: f64 = 0.0;
    let mut inner: f64 = 0.0;
    for k in 0..1000 {
        let theta = 2.0 * PI * k as f64 / 1000.0;
        outer = outer.max((f_eval(&p, ComplexPoint::from_polar(1.0, theta)).map_err(e)?.norm() - 1.0).abs());
        inner = inner.max((f_eval(&p, ComplexPoint::from_polar(0.5, theta)).map_err(e)?.norm() - 0.75).abs());
    }
    let at_r = (f_eval(&p, c(0.5, 0.0)).map_err(e)? - c(-0.75, 0.0)).norm();
    let slit = (slit_endpoint(&p).map_err(e)?.radius - 0.75).abs();
    within("|f| on unit circle", outer, 1e-9)?;
    within("|f| on inner circle", inner, 1e-9)?;
    within("f(0.5)", at_r, 1e-9)?;
    within("slit radius", slit, 1e-9)?;
    budget(t.elapsed(), 1.0)?;
    Ok(format!(
        "errors {outer:.1e} / {inner:.1e} / {at_r:.1e} / {slit:.1e}, {:.3} s",
        t.elapsed().as_secs_f64()
    ))
}

fn criterion_3() -> Check {
    let h = 1e-5;
    let mut worst_f: f64 = 0.0;
    let mut tightest = f64::INFINITY;
    for i in 0..10 {
        let r = 0.05 + 0.09 * i as f64;
        let m = AnnulusModulus::new(r, 1e-14).map_err(e)?;
        for j in 0..10 {
            let x = r + (1.0 - r) * (j as f64 + 0.5) / 10.0;
            let p = SlitMapParams::new(m, x).map_err(e)?;
            let exact = f_prime_at_center(&p);
            let fd = (f_eval(&p, c(x + h, 0.0)).map_err(e)? - f_eval(&p, c(x - h, 0.0)).map_err(e)?) / (2.0 * h);
            worst_f = worst_f.max((fd - exact).norm() / exact.abs());
            let gap = exact - 1.0 / (1.0 - x * x);
            if gap <= 0.0 {
                return Err(format!("f'(x) = {exact} does not exceed 1/(1-x^2) at r = {r}, x = {x}"));
            }
            tightest = tightest.min(gap);
        }
    }
    within("f'(x) vs central difference", worst_f, 1e-6)?;
    let mut worst_q: f64 = 0.0;
    let mut least_q = f64::INFINITY;
    for r in [0.1, 0.2, 0.25, 0.3, 0.4, 0.49] {
        let m = AnnulusModulus::new(r, 1e-14).map_err(e)?;
        let lo = r.sqrt();
        for k in 1..=8 {
            let x0 = lo + (0.95 - lo) * k as f64 / 9.0;
            let exact = q_prime_at_x0(x0, &m).map_err(e)?;
            let fd = (q_eval(x0 + h, x0, &m).map_err(e)? - q_eval(x0 - h, x0, &m).map_err(e)?) / (2.0 * h);
            worst_q = worst_q.max((fd - exact).abs());
            least_q = least_q.min(exact);
        }
    }
    within("q'(x0) vs central difference", worst_q, 1e-5)?;
    if least_q <= 0.0 {
        return Err(format!("q'(x0) = {least_q} is not positive"));
    }
    Ok(format!(
        "f' rel err {worst_f:.1e}, min gap over 1/(1-x^2) {tightest:.2e}, q' err {worst_q:.1e}, min q' {least_q:.3e}"
    ))
}

fn criterion_4() -> Check {
    let r = 0.3;
    let m = AnnulusModulus::new(r, 1e-14).map_err(e)?;
    let grid: Vec<f64> = (0..20).map(|k| r + (1.0 - r) * (k as f64 + 0.5) / 20.0).collect();
    let mut worst: f64 = 0.0;
    for &alpha in &grid {
        let pa = SlitMapParams::new(m, alpha).map_err(e)?;
        for &x in &grid {
            let px = SlitMapParams::new(m, x).map_err(e)?;
            let lhs = f_eval(&pa, c(x, 0.0)).map_err(e)?;
            let rhs = -f_eval(&px, c(alpha, 0.0)).map_err(e)?;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    within("reflection residual", worst, 1e-10)?;
    Ok(format!("max residual {worst:.2e} on 400 pairs"))
}

fn criterion_5() -> Check {
    let r = 0.3;
    let m = AnnulusModulus::new(r, 1e-14).map_err(e)?;
    let samples = 2048;
    let mut excess = f64::NEG_INFINITY;
    let mut attain: f64 = 0.0;
    for z0 in [0.35, 0.45, 0.5477225575051661, 0.65, 0.85] {
        let s = squeezing_annulus(c(z0, 0.0), r).map_err(e)?;
        for comp in competitor_sweep(&m, z0, 100, samples).map_err(e)? {
            excess = excess.max(comp.dist - s);
        }
        let direct = competitor_boundary_distance(&m, z0, z0, false, samples).map_err(e)?;
        let swapped = competitor_boundary_distance(&m, r / z0, z0, true, samples).map_err(e)?;
        attain = attain.max((direct.max(swapped) - s).abs());
        // r/(r/t) need not round back to t, so allow the input's own rounding.
        let mirrored = squeezing_annulus(c(r / z0, 0.0), r).map_err(e)?;
        if (mirrored - s).abs() > 2.0 * f64::EPSILON * s {
            return Err(format!("S({z0}) = {s} but S({}) = {mirrored}", r / z0));
        }
    }
    if excess > 1e-8 {
        return Err(format!("a competitor exceeds the formula by {excess:.3e}"));
    }
    within("canonical attainment", attain, 1e-8)?;
    Ok(format!("max excess {excess:.3e}, attainment error {attain:.1e}, 500 competitors"))
}

fn criterion_6() -> Check {
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let r = rng.gen_range(0.05..0.9);
        let rho = rng.gen_range(r..1.0);
        let z0 = ComplexPoint::from_polar(rho, rng.gen_range(0.0..2.0 * PI));
        let pm = PeriodMatrix::annulus(r).map_err(e)?;
        let w = annulus_harmonic_measure_inner(z0, r).map_err(e)?;
        let radii = radii_solve(&pm, 0, &[w]).map_err(e)?;
        worst = worst.max((radii[0] - rho).abs());
    }
    let mut synth: f64 = 0.0;
    for _ in 0..50 {
        let (a, b, d) = (rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0));
        // Symmetric with zero row sums: off-diagonals −a, −b, −d.
        let entries = nalgebra::DMatrix::from_row_slice(3, 3, &[a + b, -a, -b, -a, a + d, -d, -b, -d, b + d]);
        let pm = PeriodMatrix::new(entries).map_err(e)?;
        let m = rng.gen_range(0..3);
        let truth = [rng.gen_range(0.1..0.95), rng.gen_range(0.1..0.95)];
        let logs = nalgebra::DVector::from_iterator(2, truth.iter().map(|t: &f64| (1.0 / t).ln()));
        let omega = pm.reduced(m) * logs;
        let got = radii_solve(&pm, m, omega.as_slice()).map_err(e)?;
        for (g, t) in got.iter().zip(truth) {
            synth = synth.max((g - t).abs());
        }
    }
    within("annulus radius", worst, 1e-12)?;
    within("synthetic round trip", synth, 1e-12)?;
    Ok(format!("annulus error {worst:.1e}, synthetic error {synth:.1e}"))
}

fn criterion_7() -> Check {
    let t = Instant::now();
    let cfg = CounterexampleConfig::new(0.25, 0.8);
    let inst = Instance::new(&cfg).map_err(e)?;
    let (cert, _) = certify_with(&inst).map_err(e)?;
    if !cert.passed {
        return Err(format!("certificate failed, margins {:?}", cert.margins));
    }
    let low = cert.margins.min();
    if low <= cfg.tol {
        return Err(format!("smallest margin {low:.3e} not above tol"));
    }
    let tight = revalidate(&cfg, &cert, cfg.trunc_tol / 100.0).map_err(e)?;
    let drift = cert.margins.drift(&tight.margins);
    within("margin drift", drift, 1e-5)?;
    let golden = Certificate::from_json(GOLDEN).map_err(e)?;
    let off = [
        (cert.x_star - golden.x_star).abs(),
        (cert.delta - golden.delta).abs(),
        (cert.zeta_star - golden.zeta_star).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    within("golden (x*, δ, ζ*)", off, 1e-10)?;
    budget(t.elapsed(), 10.0)?;
    Ok(format!(
        "x* = {:.6}, δ = {:.6}, ζ* = {:.6}, min margin {low:.3e}, drift {drift:.1e}, {:.2} s",
        cert.x_star,
        cert.delta,
        cert.zeta_star,
        t.elapsed().as_secs_f64()
    ))
}

fn criterion_8() -> Check {
    let t = Instant::now();
    let cfg = CounterexampleConfig::new(0.25, 0.8);
    let inst = Instance::new(&cfg).map_err(e)?;
    let (cert, _) = certify_with(&inst).map_err(e)?;
    let table = nondegenerate_evidence(&cfg, &cert).map_err(e)?;
    let elapsed = t.elapsed();
    for row in &table.rows {
        println!(
            "      n = {:>3}: margin {:+.3e}, c_n bound {:.4}, n·|Δ| = {:.4}",
            row.n,
            row.margin_ineq1,
            row.cn_bound,
            row.n as f64 * (row.dist_phi_image - table.degenerate_value).abs()
        );
    }
    let mut problems = Vec::new();
    if let Some(row) = table.rows.iter().find(|r| r.margin_ineq1 <= 0.0) {
        problems.push(format!("first inequality margin {:+.3e} at n = {}", row.margin_ineq1, row.n));
    }
    if !table.rows.windows(2).all(|w| w[1].cn_bound < w[0].cn_bound) {
        problems.push("c_n bound is not strictly decreasing".into());
    }
    let last = table.rows.last().map_or(f64::INFINITY, |r| r.cn_bound);
    if last.is_nan() || last >= 0.2 {
        problems.push(format!("c_n bound {last:.4} at n = 160 is not below 0.2"));
    }
    if !table.fitted_c.is_finite() {
        problems.push("fitted C is not finite".into());
    }
    if let Err(msg) = budget(elapsed, 30.0) {
        problems.push(msg);
    }
    let summary = format!("fitted C = {:.4}, n_min = {:?}, {:.2} s", table.fitted_c, table.n_min, elapsed.as_secs_f64());
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", problems.join("; ")))
    }
}

fn run_cli(args: &[&str]) -> std::result::Result<(Vec<u8>, i32), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_slitkit")).args(args).output().map_err(e)?;
    Ok((out.stdout, out.status.code().unwrap_or(-1)))
}

fn criterion_9() -> Check {
    let mut bytes = 0;
    for args in [
        &["certify", "--r", "0.25", "--x0", "0.8"][..],
        &["evidence", "--r", "0.25", "--x0", "0.8"][..],
        &["evidence", "--r", "0.25", "--x0", "0.8", "--format", "json", "--threads", "3"][..],
    ] {
        let (a, code_a) = run_cli(args)?;
        let (b, code_b) = run_cli(args)?;
        if a != b || code_a != code_b {
            return Err(format!("`{}` differs between runs", args.join(" ")));
        }
        if a.is_empty() {
            return Err(format!("`{}` printed nothing", args.join(" ")));
        }
        bytes += a.len();
    }
    Ok(format!("3 commands byte-identical across runs ({bytes} bytes)"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "prime-function identities", criterion_1),
        (2, "slit map boundary scenario", criterion_2),
        (3, "derivative checks", criterion_3),
        (4, "reflection identity", criterion_4),
        (5, "squeezing formula", criterion_5),
        (6, "radii solver", criterion_6),
        (7, "degenerate certificate", criterion_7),
        (8, "non-degenerate evidence", criterion_8),
        (9, "determinism", criterion_9),
    ];
    let mut unexpected = 0;
    for (id, name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {id} ({name}): {detail}"),
            Err(detail) => {
                let known = KNOWN_UNMET.contains(&id);
                println!("FAIL criterion {id} ({name}){}: {detail}", if known { " [known]" } else { "" });
                if !known {
                    unexpected += 1;
                }
            }
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criterion check(s) failed unexpectedly");
        std::process::exit(1);
    }
}
