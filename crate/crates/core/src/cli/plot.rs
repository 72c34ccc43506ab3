//! Two-panel SVG of the annulus polar grid and its image under `f_x`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::prime::{AnnulusModulus, ComplexPoint};
use crate::slitmap::{f_eval, slit_endpoint, SlitArc, SlitMapParams};

/// Points per polyline.
pub const CURVE_POINTS: usize = 257;

const PANEL: f64 = 400.0;
const MARGIN: f64 = 20.0;
const SCALE: f64 = 180.0;

struct Panel {
    cx: f64,
    cy: f64,
}

impl Panel {
    fn left() -> Self {
        Self { cx: MARGIN + PANEL / 2.0, cy: MARGIN + PANEL / 2.0 }
    }

    fn right() -> Self {
        Self { cx: 2.0 * MARGIN + 1.5 * PANEL, cy: MARGIN + PANEL / 2.0 }
    }

    fn map(&self, z: ComplexPoint) -> (f64, f64) {
        (self.cx + SCALE * z.re, self.cy - SCALE * z.im)
    }

    fn polyline(&self, out: &mut String, class: &str, pts: &[ComplexPoint]) {
        let _ = write!(out, r#"<polyline class="{class}" points=""#);
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.map(*p);
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{x:.2},{y:.2}");
        }
        out.push_str("\"/>\n");
    }
}

fn circle_points(radius: f64) -> Vec<ComplexPoint> {
    (0..CURVE_POINTS)
        .map(|k| ComplexPoint::from_polar(radius, 2.0 * PI * k as f64 / (CURVE_POINTS - 1) as f64))
        .collect()
}

fn ray_points(r: f64, theta: f64) -> Vec<ComplexPoint> {
    (0..CURVE_POINTS)
        .map(|k| ComplexPoint::from_polar(r + (1.0 - r) * k as f64 / (CURVE_POINTS - 1) as f64, theta))
        .collect()
}

fn image(p: &SlitMapParams, pts: &[ComplexPoint]) -> Result<Vec<ComplexPoint>> {
    pts.iter().map(|&z| f_eval(p, z)).collect()
}

/// Points along the slit, from the upper endpoint through `−x` to the lower.
pub fn slit_points(arc: &SlitArc) -> Vec<ComplexPoint> {
    arc.sample(CURVE_POINTS)
}

/// Render the SVG document for `f_x` with `n_radial` grid circles and
/// `n_angular` rays.
pub fn render_map_svg(r: f64, x: f64, n_radial: usize, n_angular: usize, trunc_tol: f64) -> Result<String> {
    if n_radial < 2 || n_angular < 2 {
        return Err(Error::Domain(format!("grid counts must be at least 2, got {n_radial}×{n_angular}")));
    }
    let p = SlitMapParams::new(AnnulusModulus::new(r, trunc_tol)?, x)?;
    let arc = slit_endpoint(&p)?;
    let (left, right) = (Panel::left(), Panel::right());
    let width = 3.0 * MARGIN + 2.0 * PANEL;
    let height = 2.0 * MARGIN + PANEL;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    );
    s.push_str("<style>.boundary{fill:none;stroke:#000;stroke-width:1.5}.grid{fill:none;stroke:#36c;stroke-width:0.7}.image{fill:none;stroke:#36c;stroke-width:0.7}.slit{fill:none;stroke:#c22;stroke-width:2.5}</style>\n");
    let _ = writeln!(s, "<!-- r = {r}, x = {x}, slit radius = {:.12}, endpoint angle = {:.12} -->", arc.radius, arc.endpoint_angle());

    s.push_str("<g id=\"domain\">\n");
    left.polyline(&mut s, "boundary", &circle_points(1.0));
    left.polyline(&mut s, "boundary", &circle_points(r));
    let radii: Vec<f64> = (1..=n_radial).map(|k| r + (1.0 - r) * k as f64 / (n_radial + 1) as f64).collect();
    let angles: Vec<f64> = (0..n_angular).map(|k| 2.0 * PI * k as f64 / n_angular as f64).collect();
    for &rho in &radii {
        left.polyline(&mut s, "grid", &circle_points(rho));
    }
    for &t in &angles {
        left.polyline(&mut s, "grid", &ray_points(r, t));
    }
    s.push_str("</g>\n<g id=\"image\">\n");
    right.polyline(&mut s, "boundary", &circle_points(1.0));
    for &rho in &radii {
        right.polyline(&mut s, "image", &image(&p, &circle_points(rho))?);
    }
    for &t in &angles {
        right.polyline(&mut s, "image", &image(&p, &ray_points(r, t))?);
    }
    right.polyline(&mut s, "slit", &slit_points(&arc));
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Render and write the SVG to `out`.
pub fn plot_map(r: f64, x: f64, grid: (usize, usize), out: &Path, trunc_tol: f64) -> std::io::Result<String> {
    let svg = render_map_svg(r, x, grid.0, grid.1, trunc_tol)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
    std::fs::write(out, &svg)?;
    Ok(svg)
}
