//! Command-line front end: problem-file parsing, subcommands and output
//! formatting.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::endpoints::{enumerate_pairs, find_endpoints, EndpointLocation, EndpointPair, EndpointSpec};
use crate::error::{Error, Result};
use crate::families::make_family;
use crate::recurrence::{residual, Coefficients, InitialCondition, RecurrenceSpec, Window};
use crate::representation::{solve, tol_residual, IntegralRepresentation};
use crate::resolvent::{derive_resolvent, ResolventSolution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_NO_ENDPOINTS: i32 = 3;
pub const EXIT_NO_REPRESENTATION: i32 = 4;
pub const EXIT_VERIFICATION_FAILED: i32 = 5;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::UnknownFamily(_)
        | Error::InvalidParameter { .. }
        | Error::OutOfWindow { .. } => EXIT_INPUT,
        Error::DegenerateRecurrence(_)
        | Error::UnsupportedPoleOrder { .. }
        | Error::UnsupportedDegree(_)
        | Error::ZeroDenominator
        | Error::SingularStep { .. }
        | Error::Singularity(_) => EXIT_DEGENERATE,
        Error::NoRepresentation(_) | Error::PathPlanning(_) => EXIT_NO_ENDPOINTS,
        Error::NoValidRepresentation(_)
        | Error::NotConverged { .. }
        | Error::PathFailure { .. }
        | Error::DegenerateNormalization { .. } => EXIT_NO_REPRESENTATION,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "moment-ansatz",
    version,
    about = "Integral representations of linear difference equations with linear coefficients"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the weight function, boundary data, endpoints and pairs.
    Derive {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate the representation at a list or range of x.
    Eval {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        points: PointArgs,
    },
    /// Check the recurrence residual of the representation at probe points.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        verify: VerifyArgs,
    },
    /// Run a built-in family. Evaluates by default; `--probes` verifies,
    /// `--derive` prints the derivation.
    Family {
        /// gamma, legendre, hermite, laguerre or gauss2f1.
        name: String,
        /// Family parameter as `key=value`; complex values as `re,im`.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Add the reference oracle and the relative difference to each row.
        #[arg(long, conflicts_with_all = ["probes", "derive"])]
        compare: bool,
        /// Print the derivation instead of values.
        #[arg(long, conflicts_with = "probes")]
        derive: bool,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        points: PointArgs,
        /// Verify the recurrence at this many probe points.
        #[arg(long)]
        probes: Option<usize>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Quadrature tolerance, overriding the problem file.
    #[arg(long)]
    pub tol: Option<f64>,
    /// x window as `min,max`, overriding the problem file.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<Window>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Which surviving representation to use; 0 is the principal one.
    #[arg(long, default_value_t = 0)]
    pub pair_index: usize,
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// Comma-separated x values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Inclusive integer range `a..b`.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub n: Option<(i64, i64)>,
    /// Add the recurrence residual at each x.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 10)]
    pub probes: usize,
    /// Check the representation against the recurrence of another problem
    /// file.
    #[arg(long)]
    pub against: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Human,
    Json,
    Csv,
}

fn parse_window(s: &str) -> std::result::Result<Window, String> {
    let (a, b) = s.split_once(',').ok_or("expected min,max")?;
    let min = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let max = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Window::new(min, max).map_err(|e| e.to_string())
}

fn parse_range(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s.split_once("..").ok_or("expected a..b")?;
    let a = a.trim().parse::<i64>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<i64>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

/// A number in a problem file: a bare real or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged, expecting = "a number or an [re, im] pair")]
enum Scalar {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Scalar> for Complex64 {
    fn from(s: Scalar) -> Self {
        match s {
            Scalar::Real(re) => Complex64::new(re, 0.0),
            Scalar::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NamedCoefficients {
    alpha: Option<Scalar>,
    a: Option<Scalar>,
    beta: Scalar,
    b: Scalar,
    gamma: Scalar,
    c: Scalar,
}

#[derive(Debug)]
enum CoefficientList {
    Named(NamedCoefficients),
    List(Vec<Scalar>),
}

impl<'de> Deserialize<'de> for CoefficientList {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> serde::de::Visitor<'de> for V {
            type Value = CoefficientList;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a coefficient list or an object keyed alpha, a, beta, b, gamma, c")
            }
            fn visit_seq<A: serde::de::SeqAccess<'de>>(self, seq: A) -> std::result::Result<Self::Value, A::Error> {
                Deserialize::deserialize(serde::de::value::SeqAccessDeserializer::new(seq)).map(CoefficientList::List)
            }
            fn visit_map<A: serde::de::MapAccess<'de>>(self, map: A) -> std::result::Result<Self::Value, A::Error> {
                Deserialize::deserialize(serde::de::value::MapAccessDeserializer::new(map)).map(CoefficientList::Named)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCondition {
    x: Scalar,
    value: Scalar,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindow {
    min: f64,
    max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    order: u8,
    coefficients: CoefficientList,
    shift: Option<i32>,
    initial_conditions: Vec<RawCondition>,
    x_window: Option<RawWindow>,
    tolerance: Option<f64>,
}

/// A parsed problem file.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub spec: RecurrenceSpec,
    pub window: Window,
    pub tolerance: f64,
}

pub const DEFAULT_WINDOW: (f64, f64) = (0.0, 10.0);
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

impl Problem {
    pub fn parse(text: &str) -> Result<Problem> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawProblem = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::InvalidInput(format!("field `{path}`: {}", e.into_inner()))
        })?;
        let field = |name: &str, msg: String| Error::InvalidInput(format!("field `{name}`: {msg}"));
        let coefficients = match (raw.order, raw.coefficients) {
            (2, CoefficientList::Named(n)) => {
                let (Some(alpha), Some(a)) = (n.alpha, n.a) else {
                    return Err(field("coefficients", "order 2 needs alpha and a".into()));
                };
                Coefficients::Second {
                    alpha: alpha.into(),
                    a: a.into(),
                    beta: n.beta.into(),
                    b: n.b.into(),
                    gamma: n.gamma.into(),
                    c: n.c.into(),
                }
            }
            (1, CoefficientList::Named(n)) => {
                if n.alpha.is_some() || n.a.is_some() {
                    return Err(field("coefficients", "order 1 takes only beta, b, gamma, c".into()));
                }
                Coefficients::First {
                    beta: n.beta.into(),
                    b: n.b.into(),
                    gamma: n.gamma.into(),
                    c: n.c.into(),
                }
            }
            (2, CoefficientList::List(v)) if v.len() == 6 => Coefficients::Second {
                alpha: v[0].into(),
                a: v[1].into(),
                beta: v[2].into(),
                b: v[3].into(),
                gamma: v[4].into(),
                c: v[5].into(),
            },
            (1, CoefficientList::List(v)) if v.len() == 4 => Coefficients::First {
                beta: v[0].into(),
                b: v[1].into(),
                gamma: v[2].into(),
                c: v[3].into(),
            },
            (order @ (1 | 2), CoefficientList::List(v)) => {
                return Err(field(
                    "coefficients",
                    format!("order {order} needs {} coefficients, got {}", 2 * order + 2, v.len()),
                ))
            }
            (order, _) => return Err(field("order", format!("must be 1 or 2, got {order}"))),
        };
        let shift = raw.shift.unwrap_or(if raw.order == 1 { -1 } else { 0 });
        let ics = raw
            .initial_conditions
            .into_iter()
            .map(|ic| InitialCondition {
                x: ic.x.into(),
                value: ic.value.into(),
            })
            .collect();
        let spec = RecurrenceSpec::new(coefficients, shift, ics)?;
        let (min, max) = raw.x_window.map_or(DEFAULT_WINDOW, |w| (w.min, w.max));
        let window = Window::new(min, max).map_err(|e| field("x_window", e.to_string()))?;
        let tolerance = raw.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        Ok(Problem { spec, window, tolerance })
    }

    pub fn load(path: &FsPath) -> Result<Problem> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Problem::parse(&text)
    }

    fn with_overrides(mut self, common: &CommonArgs) -> Problem {
        if let Some(w) = common.window {
            self.window = w;
        }
        if let Some(t) = common.tol {
            self.tolerance = t;
        }
        self
    }
}

fn pair_json(rep_index: usize, pair: &EndpointPair) -> Value {
    json!({
        "index": rep_index,
        "lower": pair.lower,
        "upper": pair.upper,
        "joint_window": pair.joint_window,
        "kind": pair.kind,
    })
}

fn endpoint_text(e: &EndpointSpec) -> String {
    match e.location {
        EndpointLocation::Finite {
            location,
            approach_direction,
        } if e.essential => format!("t = {} (approached along {})", fmt_c(location), fmt_c(approach_direction)),
        EndpointLocation::Finite { location, .. } => format!("t = {}", fmt_c(location)),
        EndpointLocation::Infinite { angle } => format!("∞ along θ = {}", fmt_f(angle)),
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_c(z: Complex64) -> String {
    format!("{}{:+.16e}i", fmt_f(z.re), z.im)
}

/// The derivation document: everything needed to rebuild the weight, plus
/// the endpoint analysis on `window`.
pub fn derivation(sol: &ResolventSolution, window: &Window) -> Result<(Value, Vec<EndpointSpec>, Vec<EndpointPair>)> {
    let endpoints = find_endpoints(sol, window)?;
    let pairs = enumerate_pairs(&endpoints);
    let doc = json!({
        "order": sol.order,
        "shift": sol.shift,
        "x_window": window,
        "boundary_polynomial": sol.boundary_poly,
        "log_derivative": sol.log_derivative,
        "weight": sol.weight,
        "boundary_function": "t^(x+shift+1) * D(t) * h(t)",
        "endpoints": endpoints,
        "pairs": pairs.iter().enumerate().map(|(i, p)| pair_json(i, p)).collect::<Vec<_>>(),
    });
    Ok((doc, endpoints, pairs))
}

fn render_derivation(sol: &ResolventSolution, window: &Window, format: Format) -> Result<String> {
    let (doc, endpoints, pairs) = derivation(sol, window)?;
    if format == Format::Json {
        return Ok(to_json(&doc));
    }
    let mut out = String::new();
    let poly = |coeffs: &[Complex64]| {
        if coeffs.is_empty() {
            return "0".to_string();
        }
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| format!("({}) t^{i}", fmt_c(*c)))
            .collect::<Vec<_>>()
            .join(" + ")
    };
    let w = &sol.weight;
    let _ = writeln!(out, "order {}, shift {}", sol.order, sol.shift);
    let _ = writeln!(out, "D(t) = {}", poly(sol.boundary_poly.coeffs()));
    let _ = writeln!(out, "L(t) numerator   = {}", poly(sol.log_derivative.numerator().coeffs()));
    let _ = writeln!(out, "L(t) denominator = {}", poly(sol.log_derivative.denominator().coeffs()));
    let _ = writeln!(out, "h(t) = exp(P(t)) * Π (t − r)^μ * Π exp(−σ/(t − p))");
    let _ = writeln!(out, "  P(t) = {}", poly(w.exp_poly.coeffs()));
    for f in &w.power_factors {
        let _ = writeln!(out, "  power factor   r = {}, μ = {}", fmt_c(f.root), fmt_c(f.exponent));
    }
    for e in &w.essential_terms {
        let _ = writeln!(out, "  essential term p = {}, σ = {}", fmt_c(e.pole), fmt_c(e.strength));
    }
    let _ = writeln!(out, "Q(t) = D(t) h(t); boundary term t^(x+{}+1) Q(t)", sol.shift);
    let _ = writeln!(out, "endpoints on [{}, {}]:", window.min, window.max);
    for (i, e) in endpoints.iter().enumerate() {
        let _ = writeln!(
            out,
            "  [{i}] {}  valid on [{}, {}]",
            endpoint_text(e),
            e.validity_window.min,
            e.validity_window.max
        );
    }
    let _ = writeln!(out, "pairs:");
    for (i, p) in pairs.iter().enumerate() {
        let _ = writeln!(
            out,
            "  [{i}] {:?}: {}  →  {}  on [{}, {}]",
            p.kind,
            endpoint_text(&p.lower),
            endpoint_text(&p.upper),
            p.joint_window.min,
            p.joint_window.max
        );
    }
    Ok(out)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable document");
    s.push('\n');
    s
}

fn pick(reps: Vec<IntegralRepresentation>, index: usize) -> Result<IntegralRepresentation> {
    let count = reps.len();
    reps.into_iter()
        .nth(index)
        .ok_or_else(|| Error::InvalidInput(format!("pair index {index} out of range, {count} representation(s)")))
}

#[derive(Clone, Debug, Serialize)]
struct EvalRow {
    x: f64,
    re: f64,
    im: f64,
    error_estimate: f64,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    relative_residual: Option<f64>,
}

fn xs_from(points: &PointArgs, window: &Window) -> Vec<f64> {
    let mut xs = points.x.clone();
    if let Some((a, b)) = points.n {
        xs.extend((a..=b).map(|n| n as f64));
    }
    if points.x.is_empty() && points.n.is_none() {
        let first = window.min.ceil() as i64;
        let last = window.max.floor() as i64;
        xs.extend((first..=last).map(|n| n as f64));
    }
    xs
}

fn representation_json(rep: &IntegralRepresentation, index: usize) -> Value {
    json!({
        "pair_index": index,
        "principal": index == 0,
        "lower": rep.pair.lower,
        "upper": rep.pair.upper,
        "joint_window": rep.pair.joint_window,
        "normalization": rep.normalization,
        "tolerance": rep.tol,
    })
}

fn representation_text(rep: &IntegralRepresentation, index: usize) -> String {
    format!(
        "pair {index}{}: {} → {}, valid on [{}, {}], C = {}",
        if index == 0 { " (principal)" } else { "" },
        endpoint_text(&rep.pair.lower),
        endpoint_text(&rep.pair.upper),
        rep.pair.joint_window.min,
        rep.pair.joint_window.max,
        fmt_c(rep.normalization)
    )
}

fn run_eval(problem: &Problem, common: &CommonArgs, points: &PointArgs) -> Result<String> {
    let reps = solve(&problem.spec, &problem.window, problem.tolerance)?;
    let rep = pick(reps, common.pair_index)?;
    let xs = xs_from(points, &problem.window);
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let z = Complex64::new(x, 0.0);
        let r = rep.evaluate_detailed(z)?;
        let relative_residual = if points.verify {
            match rep.verify(&[z]) {
                Ok(v) => Some(v[0].relative_residual),
                Err(Error::OutOfWindow { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        rows.push(EvalRow {
            x,
            re: r.value.re,
            im: r.value.im,
            error_estimate: r.error_estimate,
            converged: r.converged,
            relative_residual,
        });
    }
    Ok(match common.format {
        Format::Json => to_json(&json!({
            "representation": representation_json(&rep, common.pair_index),
            "rows": rows,
        })),
        Format::Csv => {
            let mut out = String::from("x,re,im,error_estimate,converged");
            if points.verify {
                out.push_str(",relative_residual");
            }
            out.push('\n');
            for r in &rows {
                let _ = write!(
                    out,
                    "{},{},{},{},{}",
                    fmt_f(r.x),
                    fmt_f(r.re),
                    fmt_f(r.im),
                    fmt_f(r.error_estimate),
                    r.converged
                );
                if points.verify {
                    out.push(',');
                    if let Some(v) = r.relative_residual {
                        out.push_str(&fmt_f(v));
                    }
                }
                out.push('\n');
            }
            out
        }
        Format::Human => {
            let mut out = format!("# {}\n", representation_text(&rep, common.pair_index));
            let _ = write!(out, "{:>24} {:>24} {:>24} {:>12}", "x", "re", "im", "error");
            if points.verify {
                let _ = write!(out, " {:>12}", "residual");
            }
            out.push('\n');
            for r in &rows {
                let _ = write!(
                    out,
                    "{:>24} {:>24} {:>24} {:>12.3e}",
                    fmt_f(r.x),
                    fmt_f(r.re),
                    fmt_f(r.im),
                    r.error_estimate
                );
                if !r.converged {
                    out.push_str(" (not converged)");
                }
                if points.verify {
                    match r.relative_residual {
                        Some(v) => {
                            let _ = write!(out, " {v:>12.3e}");
                        }
                        None => {
                            let _ = write!(out, " {:>12}", "-");
                        }
                    }
                }
                out.push('\n');
            }
            out
        }
    })
}

#[derive(Clone, Debug, Serialize)]
struct VerifyRow {
    x: f64,
    absolute_residual: f64,
    relative_residual: f64,
    pass: bool,
}

/// Probe points spread over the usable part of the window, off the integer
/// grid.
fn verify_probes(rep: &IntegralRepresentation, window: &Window, count: usize) -> Vec<f64> {
    let w = window.intersect(&rep.pair.joint_window).unwrap_or(rep.pair.joint_window);
    let span = (w.max - w.min - rep.spec.order() as f64).max(0.0);
    (0..count)
        .map(|j| w.min + span * (j as f64 + 0.5) / count as f64)
        .collect()
}

fn run_verify(problem: &Problem, common: &CommonArgs, probes: usize, against: Option<&RecurrenceSpec>) -> Result<(String, bool)> {
    let reps = solve(&problem.spec, &problem.window, problem.tolerance)?;
    let rep = pick(reps, common.pair_index)?;
    let target = against.unwrap_or(&problem.spec);
    let limit = tol_residual(problem.tolerance);
    let mut rows = Vec::with_capacity(probes);
    for x in verify_probes(&rep, &problem.window, probes) {
        let z = Complex64::new(x, 0.0);
        let r = residual(target, |v| rep.evaluate(v), z)?;
        rows.push(VerifyRow {
            x,
            absolute_residual: r.absolute_residual,
            relative_residual: r.relative_residual,
            pass: r.relative_residual <= limit,
        });
    }
    let ok = rows.iter().all(|r| r.pass);
    let text = match common.format {
        Format::Json => to_json(&json!({
            "representation": representation_json(&rep, common.pair_index),
            "limit": limit,
            "passed": ok,
            "rows": rows,
        })),
        Format::Csv => {
            let mut out = String::from("x,absolute_residual,relative_residual,pass\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f(r.x),
                    fmt_f(r.absolute_residual),
                    fmt_f(r.relative_residual),
                    r.pass
                );
            }
            out
        }
        Format::Human => {
            let mut out = format!("# {}\n", representation_text(&rep, common.pair_index));
            let _ = writeln!(out, "{:>24} {:>12} {:>12}", "x", "abs", "rel");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:>24} {:>12.3e} {:>12.3e}{}",
                    fmt_f(r.x),
                    r.absolute_residual,
                    r.relative_residual,
                    if r.pass { "" } else { "  FAIL" }
                );
            }
            let _ = writeln!(
                out,
                "{} (limit {limit:.1e})",
                if ok { "verification passed" } else { "verification FAILED" }
            );
            out
        }
    };
    Ok((text, ok))
}

fn parse_param(s: &str) -> Result<(String, Complex64)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidInput(format!("parameter `{s}` is not key=value")))?;
    let bad = |_| Error::InvalidParameter {
        name: k.to_string(),
        reason: format!("`{v}` is not a number"),
    };
    let value = match v.split_once(',') {
        Some((re, im)) => Complex64::new(
            f64::from_str(re.trim()).map_err(bad)?,
            f64::from_str(im.trim()).map_err(bad)?,
        ),
        None => Complex64::new(f64::from_str(v.trim()).map_err(bad)?, 0.0),
    };
    Ok((k.trim().to_string(), value))
}

fn run_compare(problem: &Problem, family: &crate::families::FamilyDescriptor, common: &CommonArgs, points: &PointArgs) -> Result<String> {
    let xs: Vec<Complex64> = xs_from(points, &problem.window)
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    let reps = solve(&problem.spec, &problem.window, problem.tolerance)?;
    let rep = pick(reps, common.pair_index)?;
    let mut rows = Vec::new();
    for &x in &xs {
        let pipeline = rep.evaluate(x)?;
        let oracle = crate::families::oracle_eval(family, x)?;
        rows.push(crate::families::ComparisonRow {
            x,
            pipeline,
            oracle,
            relative_difference: crate::families::relative_difference(pipeline, oracle),
        });
    }
    Ok(match common.format {
        Format::Json => to_json(&json!({ "oracle": family.oracle, "rows": rows })),
        Format::Csv => {
            let mut out = String::from("x,pipeline_re,pipeline_im,oracle_re,oracle_im,relative_difference\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    fmt_f(r.x.re),
                    fmt_f(r.pipeline.re),
                    fmt_f(r.pipeline.im),
                    fmt_f(r.oracle.re),
                    fmt_f(r.oracle.im),
                    fmt_f(r.relative_difference)
                );
            }
            out
        }
        Format::Human => {
            let mut out = format!("# oracle: {}\n", family.oracle);
            let _ = writeln!(out, "{:>24} {:>24} {:>24} {:>12}", "x", "pipeline", "oracle", "rel diff");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:>24} {:>24} {:>24} {:>12.3e}",
                    fmt_f(r.x.re),
                    fmt_f(r.pipeline.re),
                    fmt_f(r.oracle.re),
                    r.relative_difference
                );
            }
            out
        }
    })
}

/// Runs one command, returning the text for stdout and the exit code.
pub fn execute(cli: &Cli) -> Result<(String, i32)> {
    match &cli.command {
        Command::Derive { file, common } => {
            let problem = Problem::load(file)?.with_overrides(common);
            let sol = derive_resolvent(&problem.spec)?;
            Ok((render_derivation(&sol, &problem.window, common.format)?, EXIT_OK))
        }
        Command::Eval { file, common, points } => {
            let problem = Problem::load(file)?.with_overrides(common);
            Ok((run_eval(&problem, common, points)?, EXIT_OK))
        }
        Command::Verify { file, common, verify } => {
            let problem = Problem::load(file)?.with_overrides(common);
            let against = verify.against.as_deref().map(Problem::load).transpose()?;
            let (text, ok) = run_verify(&problem, common, verify.probes, against.as_ref().map(|p| &p.spec))?;
            Ok((text, if ok { EXIT_OK } else { EXIT_VERIFICATION_FAILED }))
        }
        Command::Family {
            name,
            params,
            compare,
            derive,
            common,
            points,
            probes,
        } => {
            let params: BTreeMap<String, Complex64> = params.iter().map(|p| parse_param(p)).collect::<Result<_>>()?;
            let family = make_family(name, &params)?;
            let problem = Problem {
                spec: family.spec.clone(),
                window: family.default_window,
                tolerance: DEFAULT_TOLERANCE,
            }
            .with_overrides(common);
            if *derive {
                let sol = derive_resolvent(&problem.spec)?;
                return Ok((render_derivation(&sol, &problem.window, common.format)?, EXIT_OK));
            }
            if *compare {
                return Ok((run_compare(&problem, &family, common, points)?, EXIT_OK));
            }
            match probes {
                Some(n) => {
                    let (text, ok) = run_verify(&problem, common, *n, None)?;
                    Ok((text, if ok { EXIT_OK } else { EXIT_VERIFICATION_FAILED }))
                }
                None => Ok((run_eval(&problem, common, points)?, EXIT_OK)),
            }
        }
    }
}

/// Parses arguments, runs, prints and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok((text, code)) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NoValidRepresentation(diagnostics) = &e {
                for d in diagnostics {
                    eprintln!("  {d}");
                }
            }
            exit_code(&e)
        }
    }
}
