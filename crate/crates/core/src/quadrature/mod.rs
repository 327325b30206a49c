//! Contour quadrature of `t^{x+k} h(t)`.
//!
//! Finite segments use the tanh-sinh rule, rays an exp-sinh rule. Nodes near a
//! segment endpoint carry the exact offset from that endpoint so that factors
//! singular there are evaluated without cancellation.

mod path;
mod rules;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Polynomial;
use crate::branch::{same_point, BranchCuts, CutLog};
use crate::error::{Error, Result};
use crate::resolvent::WeightForm;

pub use path::{plan_path, plan_path_with, Path, PathOptions, PathSegment, SegmentShape, Transform, Winding};

/// Nodes beyond this modulus contribute nothing on decaying rays.
const FAR_FIELD: f64 = 1e100;

/// A quadrature node. When `endpoint` is set, `offset` is `t − endpoint`
/// computed without cancellation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodePoint {
    pub t: Complex64,
    pub endpoint: Option<Complex64>,
    pub offset: Complex64,
    pub winding: Option<Winding>,
}

impl NodePoint {
    /// `t − point`, using the stored offset when `point` is the endpoint.
    pub fn relative_to(&self, point: Complex64) -> Complex64 {
        match self.endpoint {
            Some(e) if same_point(e, point) => self.offset,
            _ => self.t - point,
        }
    }

    fn extra_turns(&self, point: Complex64) -> i32 {
        match self.winding {
            Some(w) if same_point(w.center, point) => w.turns,
            _ => 0,
        }
    }
}

pub trait Integrand {
    fn eval(&self, node: &NodePoint) -> Complex64;
}

impl<F: Fn(&NodePoint) -> Complex64> Integrand for F {
    fn eval(&self, node: &NodePoint) -> Complex64 {
        self(node)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub nodes_used: usize,
    pub converged: bool,
    /// `∫ |integrand| |dt|` as seen by the finest level; the scale against
    /// which a vanishing `value` is judged.
    pub magnitude: f64,
}

/// `t^{s} h(t)` with every logarithm taken on the sheets fixed by `cuts`.
pub struct MomentIntegrand {
    exp_poly: Polynomial,
    essentials: Vec<(Complex64, Complex64)>,
    factors: Vec<(Complex64, Complex64, CutLog)>,
}

impl MomentIntegrand {
    pub fn new(w: &WeightForm, moment_exponent: Complex64, cuts: &BranchCuts) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let mut factors: Vec<(Complex64, Complex64)> = vec![(zero, moment_exponent)];
        for f in &w.power_factors {
            match factors.iter_mut().find(|(r, _)| same_point(*r, f.root)) {
                Some(entry) => entry.1 += f.exponent,
                None => factors.push((f.root, f.exponent)),
            }
        }
        Self {
            exp_poly: w.exp_poly.clone(),
            essentials: w.essential_terms.iter().map(|e| (e.pole, e.strength)).collect(),
            factors: factors
                .into_iter()
                .filter(|(_, e)| *e != zero)
                .map(|(r, e)| (r, e, CutLog::new(cuts.direction(r))))
                .collect(),
        }
    }

    /// `log(t^{s} h(t))`, or `None` where a factor with positive exponent
    /// vanishes exactly.
    pub fn log_eval(&self, node: &NodePoint) -> Option<Complex64> {
        self.split_eval(node).map(|(l, phase)| l + Complex64::new(0.0, phase.arg()))
    }

    /// The integrand as `exp(l) · phase`. The integer part of each real
    /// exponent goes into `phase` as an exact power of `z/|z|`, which keeps
    /// e.g. `(is)^n` exactly real or imaginary.
    fn split_eval(&self, node: &NodePoint) -> Option<(Complex64, Complex64)> {
        let t = node.t;
        let mut acc = self.exp_poly.eval(t);
        let mut phase = Complex64::new(1.0, 0.0);
        for &(pole, strength) in &self.essentials {
            acc += strength / node.relative_to(pole);
        }
        for &(root, exponent, log) in &self.factors {
            let z = node.relative_to(root);
            if z == Complex64::new(0.0, 0.0) {
                return if exponent.re > 0.0 {
                    None
                } else {
                    Some((Complex64::new(f64::INFINITY, 0.0), phase))
                };
            }
            let m = exponent.re.round().clamp(-64.0, 64.0);
            let frac = exponent - m;
            let r = z.norm();
            let turns = node.extra_turns(root);
            if frac != Complex64::new(0.0, 0.0) {
                let mut l = log.log(z);
                if turns != 0 {
                    l += Complex64::new(0.0, 2.0 * PI * turns as f64);
                }
                acc += frac * l;
            }
            if m != 0.0 {
                acc += m * r.ln();
                phase *= (z / r).powi(m as i32);
            }
        }
        Some((acc, phase))
    }
}

impl Integrand for MomentIntegrand {
    fn eval(&self, node: &NodePoint) -> Complex64 {
        if node.t.norm() > FAR_FIELD {
            return Complex64::new(0.0, 0.0);
        }
        match self.split_eval(node) {
            None => Complex64::new(0.0, 0.0),
            Some((l, _)) if l.re < -745.0 || l.re == f64::NEG_INFINITY => Complex64::new(0.0, 0.0),
            Some((l, _)) if l.is_nan() => Complex64::new(f64::NAN, f64::NAN),
            Some((l, phase)) => l.exp() * phase,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-14..=1e-2).contains(&tol) {
        return Err(Error::InvalidInput(format!("tolerance {tol:e} outside [1e-14, 1e-2]")));
    }
    Ok(())
}

/// `∫ t^{x+k} h(t) dt` along `path`.
pub fn integrate(w: &WeightForm, x_plus_k: Complex64, path: &Path, tol: f64) -> Result<QuadratureResult> {
    let f = MomentIntegrand::new(w, x_plus_k, &path.cuts);
    integrate_segments(&f, &path.segments, tol)
}

/// Integrates an arbitrary integrand over a list of segments, summing in
/// path order.
pub fn integrate_segments<I: Integrand + ?Sized>(
    f: &I,
    segments: &[PathSegment],
    tol: f64,
) -> Result<QuadratureResult> {
    check_tol(tol)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut nodes = 0;
    let mut converged = true;
    let mut magnitude = 0.0;
    for (index, seg) in segments.iter().enumerate() {
        let out = rules::integrate_segment(f, seg, tol)
            .map_err(|detail| Error::PathFailure { segment: index, detail })?;
        value += out.value;
        error += out.error;
        nodes += out.nodes;
        converged &= out.converged;
        magnitude += out.magnitude;
    }
    Ok(QuadratureResult {
        value,
        error_estimate: error,
        nodes_used: nodes,
        converged: converged && error <= tol * (1.0 + value.norm()),
        magnitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endpoints::{enumerate_pairs, find_endpoints};
    use crate::recurrence::{InitialCondition, RecurrenceSpec, Window};
    use crate::resolvent::{derive_resolvent, ResolventSolution};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn setup(spec: RecurrenceSpec, window: (f64, f64)) -> (ResolventSolution, Path) {
        let sol = derive_resolvent(&spec).unwrap();
        let e = find_endpoints(&sol, &Window::new(window.0, window.1).unwrap()).unwrap();
        let pair = enumerate_pairs(&e)[0];
        let path = plan_path(&pair, &sol).unwrap();
        (sol, path)
    }

    fn gamma() -> (ResolventSolution, Path) {
        let spec =
            RecurrenceSpec::first_order_real([0.0, 1.0, 1.0, 0.0], -1, vec![InitialCondition::new(1.0, 1.0)])
                .unwrap();
        setup(spec, (0.5, 10.0))
    }

    #[test]
    fn gamma_at_one() {
        let (sol, path) = gamma();
        let r = integrate(&sol.weight, c(0.0, 0.0), &path, 1e-10).unwrap();
        assert!(r.converged);
        assert!((r.value - c(1.0, 0.0)).norm() < 1e-10, "{:?}", r);
    }

    #[test]
    fn gamma_at_half_integer() {
        let (sol, path) = gamma();
        let r = integrate(&sol.weight, c(-0.5, 0.0), &path, 1e-12).unwrap();
        assert!((r.value - c(PI.sqrt(), 0.0)).norm() < 1e-11, "{:?}", r);
    }

    #[test]
    fn legendre_normalization_is_i_pi() {
        for x in [2.0, 0.5] {
            let spec = RecurrenceSpec::second_order_real(
                [1.0, 2.0, 2.0 * x, 3.0 * x, -1.0, -1.0],
                0,
                vec![InitialCondition::new(0.0, 1.0)],
            )
            .unwrap();
            let (sol, path) = setup(spec, (0.0, 20.0));
            let r = integrate(&sol.weight, c(0.0, 0.0), &path, 1e-12).unwrap();
            assert!((r.value - c(0.0, PI)).norm() < 1e-10, "x = {x}: {:?}", r);
        }
    }

    #[test]
    fn hermite_zeroth_moment() {
        let x = 1.0;
        let spec = RecurrenceSpec::second_order_real(
            [0.0, 1.0, 0.0, 2.0 * x, -2.0, -2.0],
            0,
            vec![InitialCondition::new(0.0, 1.0)],
        )
        .unwrap();
        let (sol, path) = setup(spec, (0.0, 15.0));
        let r = integrate(&sol.weight, c(0.0, 0.0), &path, 1e-12).unwrap();
        let expect = c(0.0, 2.0 * PI.sqrt() * (-x * x).exp());
        assert!((r.value - expect).norm() < 1e-10 * expect.norm(), "{:?}", r);
    }

    #[test]
    fn tolerance_bounds() {
        let (sol, path) = gamma();
        assert!(integrate(&sol.weight, c(0.0, 0.0), &path, 1e-1).is_err());
        assert!(integrate(&sol.weight, c(0.0, 0.0), &path, 1e-15).is_err());
    }

    #[test]
    fn closure_integrand_on_a_line() {
        // ∫₀¹ t^{-1/2} dt = 2 with the endpoint offset doing the work
        let f = |p: &NodePoint| p.relative_to(c(0.0, 0.0)).powf(-0.5);
        let r = integrate_segments(&f, &[PathSegment::line(c(0.0, 0.0), c(1.0, 0.0))], 1e-12).unwrap();
        assert!((r.value - c(2.0, 0.0)).norm() < 1e-12, "{:?}", r);
    }
}
