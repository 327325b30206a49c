//! Closed-form weight `h(t)` and boundary factor `Q = D·h` for the ansatz
//! `f(x) = ∫ t^{x+k} h(t) dt`.
//!
//! Substituting the ansatz into the recurrence and integrating by parts leaves
//! two conditions on `h`:
//!
//! ```text
//! (I)   Q = D·h,                 D(t) = αt² − βt − γ
//! (II)  a t² h = b t h + c h + (k+1) Q + t Q'
//! ```
//!
//! Eliminating `Q` gives `h'/h = L = M / (t·D)` with
//! `M = a t² − b t − c − (k+1) D − t D'`. Partial fractions of `L` integrate
//! term by term into `exp(P(t) + Σ σ/(t−s)) · Π (t−r)^μ`. For first-order
//! recurrences `D₁ = βt − γ` and the `t²` terms drop out.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{partial_fractions, Polynomial, RationalFunction, ROOT_TOLERANCE};
use crate::branch::{same_point, BranchCuts};
use crate::error::{Error, Result};
use crate::recurrence::{Coefficients, RecurrenceSpec};

/// `(t − root)^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFactor {
    pub root: Complex64,
    pub exponent: Complex64,
}

impl PowerFactor {
    /// "integer" or "half-integer" when the exponent is one to within 1e−9.
    pub fn exponent_class(&self) -> Option<&'static str> {
        let e = self.exponent;
        if e.im.abs() > 1e-9 {
            return None;
        }
        if (e.re - e.re.round()).abs() <= 1e-9 {
            Some("integer")
        } else if (2.0 * e.re - (2.0 * e.re).round()).abs() <= 1e-9 {
            Some("half-integer")
        } else {
            None
        }
    }
}

/// `exp(strength / (t − pole))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssentialTerm {
    pub pole: Complex64,
    pub strength: Complex64,
}

/// `h(t) = exp(P(t) + Σ σ_j/(t − s_j)) · Π (t − r_i)^{μ_i}`, with the cut of
/// every power factor running away from `branch_anchor`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightForm {
    pub exp_poly: Polynomial,
    pub essential_terms: Vec<EssentialTerm>,
    pub power_factors: Vec<PowerFactor>,
    pub branch_anchor: Complex64,
}

impl WeightForm {
    pub fn with_anchor(&self, anchor: Complex64) -> Self {
        Self {
            branch_anchor: anchor,
            ..self.clone()
        }
    }

    /// `h'/h` rebuilt from the closed form.
    pub fn log_derivative_at(&self, t: Complex64) -> Complex64 {
        let mut l = self.exp_poly.derivative().eval(t);
        for e in &self.essential_terms {
            let z = t - e.pole;
            l -= e.strength / (z * z);
        }
        for f in &self.power_factors {
            l += f.exponent / (t - f.root);
        }
        l
    }

    /// Power-factor roots and essential poles, without duplicates.
    pub fn singular_points(&self) -> Vec<Complex64> {
        let mut points: Vec<Complex64> = Vec::new();
        let all = self
            .power_factors
            .iter()
            .map(|f| f.root)
            .chain(self.essential_terms.iter().map(|e| e.pole));
        for p in all {
            if !points.iter().any(|&q| same_point(p, q)) {
                points.push(p);
            }
        }
        points
    }

    /// Sum of the power exponents attached to `point` (zero if none).
    pub fn exponent_at(&self, point: Complex64) -> Complex64 {
        self.power_factors
            .iter()
            .filter(|f| same_point(f.root, point))
            .map(|f| f.exponent)
            .sum()
    }

    /// Essential strength at `point`, if any.
    pub fn essential_at(&self, point: Complex64) -> Option<Complex64> {
        let s: Complex64 = self
            .essential_terms
            .iter()
            .filter(|e| same_point(e.pole, point))
            .map(|e| e.strength)
            .sum();
        (s != Complex64::new(0.0, 0.0)).then_some(s)
    }

    pub fn total_exponent(&self) -> Complex64 {
        self.power_factors.iter().map(|f| f.exponent).sum()
    }

    /// `log h(t)` with the given cuts.
    pub fn log_eval(&self, t: Complex64, cuts: &BranchCuts) -> Result<Complex64> {
        for p in self.singular_points() {
            if (t - p).norm() <= ROOT_TOLERANCE * (1.0 + p.norm()) {
                return Err(Error::Singularity(p));
            }
        }
        let mut acc = self.exp_poly.eval(t);
        for e in &self.essential_terms {
            acc += e.strength / (t - e.pole);
        }
        for f in &self.power_factors {
            acc += f.exponent * cuts.log(f.root, t - f.root);
        }
        Ok(acc)
    }
}

/// Evaluates `h(t)` with cuts directed away from the weight's anchor.
pub fn weight_eval(w: &WeightForm, t: Complex64) -> Result<Complex64> {
    Ok(w.log_eval(t, &BranchCuts::from_anchor(w.branch_anchor))?.exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventSolution {
    pub weight: WeightForm,
    /// `D(t)`; the boundary function is `Q = D·h`.
    pub boundary_poly: Polynomial,
    pub log_derivative: RationalFunction,
    pub shift: i32,
    pub order: usize,
}

impl ResolventSolution {
    /// Exponent of `t` in the integrand `t^{x+k} h(t)` at `x`.
    pub fn moment_exponent(&self, x: Complex64) -> Complex64 {
        x + self.shift as f64
    }
}

/// `D` and `M` with `L = M / (t·D)`.
fn boundary_and_numerator(spec: &RecurrenceSpec) -> (Polynomial, Polynomial) {
    let kp1 = Complex64::new(spec.shift() as f64 + 1.0, 0.0);
    let (d, base) = match *spec.coefficients() {
        Coefficients::Second {
            alpha,
            a,
            beta,
            b,
            gamma,
            c,
        } => (
            Polynomial::new(vec![-gamma, -beta, alpha]),
            Polynomial::new(vec![-c, -b, a]),
        ),
        Coefficients::First { beta, b, gamma, c } => (
            Polynomial::new(vec![-gamma, beta]),
            Polynomial::new(vec![-c, b]),
        ),
    };
    let t = Polynomial::from_real(&[0.0, 1.0]);
    let m = &(&base - &d.scale(kp1)) - &(&t * &d.derivative());
    (d, m)
}

pub fn derive_resolvent(spec: &RecurrenceSpec) -> Result<ResolventSolution> {
    let (d, m) = boundary_and_numerator(spec);
    if d.is_zero() {
        return Err(Error::DegenerateRecurrence(
            "the boundary polynomial D(t) vanishes identically".into(),
        ));
    }
    let t = Polynomial::from_real(&[0.0, 1.0]);
    let log_derivative = RationalFunction::new(m, &t * &d)?;
    let pf = partial_fractions(&log_derivative)?;
    let mut power_factors = Vec::new();
    let mut essential_terms = Vec::new();
    for term in pf.terms {
        match term.order {
            1 => power_factors.push(PowerFactor {
                root: term.pole,
                exponent: term.coefficient,
            }),
            2 => essential_terms.push(EssentialTerm {
                pole: term.pole,
                strength: -term.coefficient,
            }),
            order => {
                return Err(Error::UnsupportedPoleOrder {
                    pole: term.pole,
                    order,
                })
            }
        }
    }
    Ok(ResolventSolution {
        weight: WeightForm {
            exp_poly: pf.polynomial_part.antiderivative(),
            essential_terms,
            power_factors,
            branch_anchor: Complex64::new(0.0, 0.0),
        },
        boundary_poly: d,
        log_derivative,
        shift: spec.shift(),
        order: spec.order(),
    })
}

/// Worst relative defect of equations I and II at the probes. Probes at
/// singular points of the weight are skipped.
pub fn resolvent_check(spec: &RecurrenceSpec, sol: &ResolventSolution, probes: &[Complex64]) -> f64 {
    let (d_spec, _) = boundary_and_numerator(spec);
    let kp1 = spec.shift() as f64 + 1.0;
    let (a, b, c) = match *spec.coefficients() {
        Coefficients::Second { a, b, c, .. } => (a, b, c),
        Coefficients::First { b, c, .. } => (Complex64::new(0.0, 0.0), b, c),
    };
    let d = &sol.boundary_poly;
    let dd = d.derivative();
    let mut worst: f64 = 0.0;
    for &t in probes {
        let Ok(h) = weight_eval(&sol.weight, t) else {
            continue;
        };
        let hp = h * sol.weight.log_derivative_at(t);
        let q = d.eval(t) * h;
        let qp = dd.eval(t) * h + d.eval(t) * hp;

        let rhs = d_spec.eval(t) * h;
        let eq1 = (q - rhs).norm() / q.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);

        let terms = [a * t * t * h, -b * t * h, -c * h, -kp1 * q, -t * qp];
        let sum: Complex64 = terms.iter().sum();
        let scale = terms.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
        worst = worst.max(eq1).max(sum.norm() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::InitialCondition;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn spec2(coeffs: [f64; 6]) -> RecurrenceSpec {
        RecurrenceSpec::second_order_real(coeffs, 0, vec![InitialCondition::new(0.0, 1.0)]).unwrap()
    }

    fn legendre(x: f64) -> RecurrenceSpec {
        spec2([1.0, 2.0, 2.0 * x, 3.0 * x, -1.0, -1.0])
    }

    fn probes() -> Vec<Complex64> {
        (0..50)
            .map(|j| {
                let r = 0.1 + 9.9 * (j as f64 / 49.0);
                Complex64::from_polar(r, 0.37 + 2.1 * j as f64)
            })
            .collect()
    }

    #[test]
    fn legendre_weight_is_inverse_square_root() {
        let x = 0.3;
        let sol = derive_resolvent(&legendre(x)).unwrap();
        assert!(sol.weight.exp_poly.is_zero() || sol.weight.exp_poly.max_coeff_abs() < 1e-15);
        assert!(sol.weight.essential_terms.is_empty());
        assert_eq!(sol.weight.power_factors.len(), 2);
        for f in &sol.weight.power_factors {
            assert!((f.exponent - c(-0.5)).norm() < 1e-12);
            assert_eq!(f.exponent_class(), Some("half-integer"));
        }
        // at t = 0 the two factors combine to 1/√1 when |x| < 1
        assert!((weight_eval(&sol.weight, c(0.0)).unwrap() - c(1.0)).norm() < 1e-12);
        let sol = derive_resolvent(&legendre(-2.0)).unwrap();
        assert!((weight_eval(&sol.weight, c(0.0)).unwrap() - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn hermite_weight() {
        let x = 1.0;
        let sol = derive_resolvent(&spec2([0.0, 1.0, 0.0, 2.0 * x, -2.0, -2.0])).unwrap();
        assert_eq!(sol.boundary_poly, Polynomial::from_real(&[2.0]));
        assert!(sol.weight.power_factors.is_empty());
        assert!(sol.weight.essential_terms.is_empty());
        let p = &sol.weight.exp_poly;
        assert!((p.coeff(1) - c(-x)).norm() < 1e-15);
        assert!((p.coeff(2) - c(0.25)).norm() < 1e-15);
        assert_eq!(weight_eval(&sol.weight, c(0.0)).unwrap(), c(1.0));
    }

    #[test]
    fn laguerre_weight() {
        let x = 1.0;
        let sol = derive_resolvent(&spec2([1.0, 2.0, 2.0, 3.0 - x, -1.0, -1.0])).unwrap();
        let w = &sol.weight;
        assert_eq!(w.power_factors.len(), 1);
        assert!((w.power_factors[0].root - c(1.0)).norm() < 1e-12);
        assert!((w.power_factors[0].exponent - c(-1.0)).norm() < 1e-12);
        assert_eq!(w.essential_terms.len(), 1);
        assert!((w.essential_terms[0].strength - c(-x)).norm() < 1e-12);
        let t = Complex64::new(2.5, 0.5);
        let expect = (-x / (t - 1.0)).exp() / (t - 1.0);
        assert!((weight_eval(w, t).unwrap() - expect).norm() < 1e-13);
    }

    #[test]
    fn gamma_weight() {
        let spec =
            RecurrenceSpec::first_order_real([0.0, 1.0, 1.0, 0.0], -1, vec![InitialCondition::new(1.0, 1.0)])
                .unwrap();
        let sol = derive_resolvent(&spec).unwrap();
        assert!(sol.weight.power_factors.is_empty());
        let h = weight_eval(&sol.weight, c(2.0)).unwrap();
        assert!((h - c((-2.0f64).exp())).norm() < 1e-15);
    }

    #[test]
    fn evaluation_at_singularity_fails() {
        let sol = derive_resolvent(&legendre(2.0)).unwrap();
        let r = sol.weight.power_factors[0].root;
        assert!(matches!(weight_eval(&sol.weight, r), Err(Error::Singularity(_))));
    }

    #[test]
    fn degenerate_boundary_polynomial() {
        // α = β = γ = 0 leaves D ≡ 0
        let err = derive_resolvent(&spec2([0.0, 1.0, 0.0, 1.0, 0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::DegenerateRecurrence(_)));
    }

    #[test]
    fn derived_solutions_satisfy_both_equations() {
        for spec in [
            legendre(0.3),
            legendre(2.0),
            spec2([0.0, 1.0, 0.0, 2.0, -2.0, -2.0]),
            spec2([1.0, 2.0, 2.0, 2.0, -1.0, -1.0]),
        ] {
            let sol = derive_resolvent(&spec).unwrap();
            let defect = resolvent_check(&spec, &sol, &probes());
            assert!(defect <= 1e-9, "defect {defect}");
        }
    }

    #[test]
    fn perturbed_exponent_is_detected() {
        let spec = legendre(0.3);
        let mut sol = derive_resolvent(&spec).unwrap();
        sol.weight.power_factors[0].exponent += 0.01;
        assert!(resolvent_check(&spec, &sol, &probes()) > 1e-3);
    }
}
