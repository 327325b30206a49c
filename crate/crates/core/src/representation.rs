//! End-to-end solution of a recurrence by the moment ansatz: derive the
//! weight, find endpoints, integrate along each pair, normalize against the
//! first initial condition and keep the pairs whose result actually solves
//! the recurrence.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::endpoints::{enumerate_pairs, find_endpoints, EndpointPair};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, plan_path, Path, QuadratureResult};
use crate::recurrence::{residual, RecurrenceSpec, ResidualReport, Window};
use crate::resolvent::{derive_resolvent, ResolventSolution};

/// Relative residual accepted for a representation at quadrature tolerance
/// `tol`.
pub fn tol_residual(tol: f64) -> f64 {
    (100.0 * tol).max(1e-6)
}

const NORMALIZATION_FLOOR: f64 = 1e-12;
const RESIDUAL_PROBES: usize = 5;

/// `f(x) = C · ∫ t^{x+k} h(t) dt` along `path`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralRepresentation {
    pub spec: RecurrenceSpec,
    pub solution: ResolventSolution,
    pub pair: EndpointPair,
    pub path: Path,
    pub normalization: Complex64,
    pub tol: f64,
    /// Worst mismatch against the initial conditions after the first, when
    /// any of them lies in the window.
    pub seed_mismatch: Option<f64>,
}

impl IntegralRepresentation {
    /// The unnormalized integral, without the window check.
    pub fn integral(&self, x: Complex64) -> Result<QuadratureResult> {
        integrate(&self.solution.weight, self.solution.moment_exponent(x), &self.path, self.tol)
    }

    fn check_window(&self, x: Complex64) -> Result<()> {
        let w = self.pair.joint_window;
        let slack = 1e-12 * (1.0 + w.min.abs().max(w.max.abs()));
        if x.re < w.min - slack || x.re > w.max + slack {
            return Err(Error::OutOfWindow {
                x,
                min: w.min,
                max: w.max,
            });
        }
        Ok(())
    }

    /// Normalized quadrature result at `x`.
    pub fn evaluate_detailed(&self, x: Complex64) -> Result<QuadratureResult> {
        self.check_window(x)?;
        Ok(self.scaled(self.integral(x)?))
    }

    pub fn evaluate(&self, x: Complex64) -> Result<Complex64> {
        Ok(self.evaluate_detailed(x)?.value)
    }

    fn scaled(&self, r: QuadratureResult) -> QuadratureResult {
        let c = self.normalization;
        QuadratureResult {
            value: c * r.value,
            error_estimate: c.norm() * r.error_estimate,
            magnitude: c.norm() * r.magnitude,
            ..r
        }
    }

    fn unchecked(&self, x: Complex64) -> Result<Complex64> {
        Ok(self.normalization * self.integral(x)?.value)
    }

    /// Recurrence residuals at each `x`; `x` and `x + order` must lie in the
    /// window.
    pub fn verify(&self, xs: &[Complex64]) -> Result<Vec<ResidualReport>> {
        let order = self.spec.order() as f64;
        xs.iter()
            .map(|&x| {
                self.check_window(x)?;
                self.check_window(x + order)?;
                residual(&self.spec, |z| self.evaluate(z), x)
            })
            .collect()
    }
}

/// Representations in ranking order plus one diagnostic per rejected pair.
#[derive(Clone, Debug)]
pub struct Solved {
    pub solution: ResolventSolution,
    pub pairs: Vec<EndpointPair>,
    pub representations: Vec<IntegralRepresentation>,
    pub diagnostics: Vec<String>,
}

/// Residual probe points: interior of `[min, max − order]`, nudged off the
/// grid of integers and off zeros of the leading coefficient.
fn probe_points(spec: &RecurrenceSpec, window: &Window) -> Vec<Complex64> {
    let order = spec.order() as f64;
    let span = (window.max - order - window.min).max(0.0);
    let mut xs: Vec<Complex64> = Vec::new();
    for j in 0..RESIDUAL_PROBES {
        let mut x = window.min + span * (j as f64 + 0.5 + 0.0371) / RESIDUAL_PROBES as f64;
        for _ in 0..8 {
            let lead = spec.coefficients().factors_at(Complex64::new(x, 0.0))[0];
            if lead.norm() > 1e-8 * (1.0 + x.abs()) {
                break;
            }
            x += 0.0137 * (1.0 + span);
        }
        let x = Complex64::new(x, 0.0);
        if !xs.iter().any(|&y| (y - x).norm() < 1e-12) {
            xs.push(x);
        }
    }
    xs
}

fn build(
    spec: &RecurrenceSpec,
    sol: &ResolventSolution,
    pair: &EndpointPair,
    tol: f64,
    probes: &[Complex64],
) -> Result<IntegralRepresentation> {
    let path = plan_path(pair, sol)?;
    let mut solution = sol.clone();
    solution.weight.branch_anchor = path.cuts.anchor();
    let mut rep = IntegralRepresentation {
        spec: spec.clone(),
        solution,
        pair: *pair,
        path,
        normalization: Complex64::new(1.0, 0.0),
        tol,
        seed_mismatch: None,
    };
    let ics = spec.initial_conditions();
    let norm = rep.integral(ics[0].x)?;
    if norm.value.norm() < NORMALIZATION_FLOOR * norm.magnitude || norm.value.norm() == 0.0 {
        return Err(Error::DegenerateNormalization {
            magnitude: norm.value.norm(),
        });
    }
    rep.normalization = ics[0].value / norm.value;

    let limit = tol_residual(tol);
    for &x in probes {
        let r = residual(spec, |z| rep.unchecked(z), x)?;
        if !(r.relative_residual <= limit) {
            return Err(Error::NoRepresentation(format!(
                "relative residual {:.3e} at x = {} exceeds {:.1e}",
                r.relative_residual, x.re, limit
            )));
        }
    }

    let mut mismatch: Option<f64> = None;
    for ic in &ics[1..] {
        if rep.check_window(ic.x).is_err() {
            continue;
        }
        let v = rep.unchecked(ic.x)?;
        let m = (v - ic.value).norm() / ic.value.norm().max(1.0);
        mismatch = Some(mismatch.map_or(m, |old| old.max(m)));
    }
    rep.seed_mismatch = mismatch;
    Ok(rep)
}

/// Like [`solve`], but keeps the intermediate stages and the per-pair
/// diagnostics.
pub fn solve_detailed(spec: &RecurrenceSpec, window: &Window, tol: f64) -> Result<Solved> {
    let sol = derive_resolvent(spec)?;
    let endpoints = find_endpoints(&sol, window)?;
    let pairs = enumerate_pairs(&endpoints);
    let limit = tol_residual(tol);
    let mut representations = Vec::new();
    let mut diagnostics = Vec::new();
    for (index, pair) in pairs.iter().enumerate() {
        let probes = probe_points(spec, &pair.joint_window);
        match build(spec, &sol, pair, tol, &probes) {
            Ok(rep) => representations.push(rep),
            Err(e) => diagnostics.push(format!("pair {index}: {e}")),
        }
    }
    if representations.is_empty() {
        if diagnostics.is_empty() {
            diagnostics.push("no endpoint pair has overlapping windows".into());
        }
        return Err(Error::NoValidRepresentation(diagnostics));
    }
    // representations that also reproduce the later seeds come first
    representations.sort_by_key(|r| r.seed_mismatch.is_some_and(|m| m > limit));
    Ok(Solved {
        solution: sol,
        pairs,
        representations,
        diagnostics,
    })
}

/// All representations that pass the residual screen; the first is the
/// principal one.
pub fn solve(spec: &RecurrenceSpec, window: &Window, tol: f64) -> Result<Vec<IntegralRepresentation>> {
    Ok(solve_detailed(spec, window, tol)?.representations)
}
