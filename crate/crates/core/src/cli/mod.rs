//! Command-line front end.
//!
//! Exit codes: `0` on success (or a passing certificate), `2` when a
//! certificate fails, `1` on usage or numerical errors.

pub mod plot;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::counterexample::{certify_with, nondegenerate_evidence, CounterexampleConfig, Instance};
use crate::error::Error;
use crate::potential::{annulus_harmonic_measure_inner, radii_solve, squeezing_annulus, PeriodMatrix};
use crate::prime::{prime_omega, AnnulusModulus, ComplexPoint};
use crate::slitmap::{f_eval, f_prime, SlitMapParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILED_CERTIFICATE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "slitkit", version, about = "Annulus slit maps and squeezing-function certificates")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads for boundary sampling.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Target relative truncation error of the prime-function products.
    #[arg(long = "trunc-tol", global = true, env = "SLITKIT_TRUNC_TOL", default_value_t = 1e-14)]
    pub trunc_tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the prime function ω(z, a).
    Prime {
        #[arg(long)]
        r: f64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: ComplexPoint,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        a: ComplexPoint,
    },
    /// Evaluate f_x(z) and f_x'(z).
    Map {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        x: f64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: ComplexPoint,
    },
    /// Squeezing function of the annulus at z.
    Squeeze {
        #[arg(long)]
        r: f64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: ComplexPoint,
    },
    /// Slit radius of the canonical map sending z to the origin.
    Radii {
        #[arg(long)]
        r: f64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: ComplexPoint,
    },
    /// Search for and certify the degenerate counterexample.
    Certify(CertifyArgs),
    /// Certify, then tabulate evidence for shrinking arc families.
    Evidence(CertifyArgs),
    /// Draw the annulus grid and its image under f_x.
    Plot {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        x: f64,
        /// Grid counts as `radial,angular`.
        #[arg(long, value_parser = parse_grid, default_value = "6,12")]
        grid: (usize, usize),
    },
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub x0: f64,
    /// Defaults to x0 − r/x0.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Shrinking indices, comma separated.
    #[arg(long = "n-list", value_delimiter = ',', default_value = "10,20,40,80,160")]
    pub n_list: Vec<usize>,
    /// Target connectivity.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Puncture override; checked with the searched x* and δ.
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: Option<f64>,
}

impl CertifyArgs {
    fn config(&self, trunc_tol: f64) -> CounterexampleConfig {
        let mut cfg = CounterexampleConfig::new(self.r, self.x0);
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        cfg.tol = self.tol;
        cfg.trunc_tol = trunc_tol;
        cfg.n_list = self.n_list.clone();
        cfg.m = self.m;
        cfg
    }
}

fn parse_complex(s: &str) -> Result<ComplexPoint, String> {
    let (re, im) = match s.split_once(',') {
        Some((a, b)) => (a, b),
        None => (s, "0"),
    };
    let re: f64 = re.trim().parse().map_err(|_| format!("bad real part in `{s}`"))?;
    let im: f64 = im.trim().parse().map_err(|_| format!("bad imaginary part in `{s}`"))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(ComplexPoint::new(re, im))
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `radial,angular`, got `{s}`"))?;
    let a = a.trim().parse().map_err(|_| format!("bad radial count in `{s}`"))?;
    let b = b.trim().parse().map_err(|_| format!("bad angular count in `{s}`"))?;
    Ok((a, b))
}

enum Failure {
    Numerical(Error),
    Io(std::io::Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn complex_json(z: ComplexPoint) -> serde_json::Value {
    json!({ "re": z.re, "im": z.im })
}

fn complex_text(z: ComplexPoint) -> String {
    format!("{},{}", z.re, z.im)
}

/// Parse `args` (including the program name) and execute.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_ERROR;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    let threads = cfg.common.threads;
    let result = match threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cfg)),
            Err(e) => Err(Failure::Usage(format!("--threads: {e}"))),
        },
        None => execute(&cfg),
    };
    match result {
        Ok((body, passed)) => {
            if let Err(e) = emit(&cfg.common, &body, stdout) {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_ERROR;
            }
            if passed {
                EXIT_OK
            } else {
                let _ = writeln!(stderr, "certificate failed: at least one margin is not above tol");
                EXIT_FAILED_CERTIFICATE
            }
        }
        Err(Failure::Numerical(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "usage error: {msg}");
            EXIT_ERROR
        }
    }
}

fn emit(common: &Common, body: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, body),
        None => stdout.write_all(body.as_bytes()),
    }
}

fn format_or(common: &Common, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = common.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::Usage(format!("--format {f:?} is not available for this subcommand").to_lowercase()))
    }
}

fn scalar_output(fmt: Format, text: String, value: serde_json::Value) -> String {
    match fmt {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&value).expect("json")),
        _ => format!("{text}\n"),
    }
}

/// Returns the rendered output and whether it counts as a pass.
fn execute(cfg: &RunConfig) -> Result<(String, bool), Failure> {
    let common = &cfg.common;
    let tt = common.trunc_tol;
    let scalar = [Format::Text, Format::Json];
    match &cfg.command {
        Command::Prime { r, z, a } => {
            let fmt = format_or(common, Format::Text, &scalar)?;
            let m = AnnulusModulus::new(*r, tt)?;
            let w = prime_omega(*z, *a, &m)?;
            Ok((scalar_output(fmt, complex_text(w), json!({ "omega": complex_json(w), "terms": m.terms() })), true))
        }
        Command::Map { r, x, z } => {
            let fmt = format_or(common, Format::Text, &scalar)?;
            let p = SlitMapParams::new(AnnulusModulus::new(*r, tt)?, *x)?;
            let w = f_eval(&p, *z)?;
            let d = f_prime(&p, *z)?;
            let text = format!("{}\n{}", complex_text(w), complex_text(d));
            Ok((scalar_output(fmt, text, json!({ "f": complex_json(w), "f_prime": complex_json(d) })), true))
        }
        Command::Squeeze { r, z } => {
            let fmt = format_or(common, Format::Text, &scalar)?;
            let s = squeezing_annulus(*z, *r)?;
            Ok((scalar_output(fmt, s.to_string(), json!({ "squeezing": s })), true))
        }
        Command::Radii { r, z } => {
            let fmt = format_or(common, Format::Text, &scalar)?;
            let pm = PeriodMatrix::annulus(*r)?;
            let w = annulus_harmonic_measure_inner(*z, *r)?;
            let radii = radii_solve(&pm, 0, &[w])?;
            Ok((scalar_output(fmt, radii[0].to_string(), json!({ "radii": radii })), true))
        }
        Command::Certify(args) => {
            format_or(common, Format::Json, &[Format::Json])?;
            let ce = args.config(tt);
            let inst = Instance::new(&ce)?;
            let cert = match args.zeta {
                Some(zeta) => {
                    let (base, out) = certify_with(&inst)?;
                    let mut c = inst.assess(base.x_star, base.delta, zeta)?;
                    c.passed &= out.qualified;
                    c
                }
                None => certify_with(&inst)?.0,
            };
            Ok((format!("{}\n", cert.to_json()), cert.passed))
        }
        Command::Evidence(args) => {
            let fmt = format_or(common, Format::Csv, &[Format::Csv, Format::Json])?;
            let ce = args.config(tt);
            let inst = Instance::new(&ce)?;
            let (cert, _) = certify_with(&inst)?;
            if !cert.passed {
                return Ok((format!("{}\n", cert.to_json()), false));
            }
            let table = nondegenerate_evidence(&ce, &cert)?;
            let body = match fmt {
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&json!({
                        "rows": table.rows,
                        "degenerate_value": table.degenerate_value,
                        "fitted_c": table.fitted_c,
                        "n_min": table.n_min,
                    }))
                    .expect("json")
                ),
                _ => table.to_csv(),
            };
            Ok((body, true))
        }
        Command::Plot { r, x, grid } => {
            format_or(common, Format::Svg, &[Format::Svg])?;
            let svg = plot::render_map_svg(*r, *x, grid.0, grid.1, tt)?;
            Ok((svg, true))
        }
    }
}
