use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::roots::{roots_low_degree, Root, ROOT_TOLERANCE};
use super::Polynomial;
use crate::error::{Error, Result};

/// Quotient of two polynomials in reduced canonical form: common roots are
/// cancelled (to `ROOT_TOLERANCE`) and the denominator is monic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    numerator: Polynomial,
    denominator: Polynomial,
}

impl RationalFunction {
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let (mut num, mut den) = (numerator, denominator);
        if den.degree().unwrap_or(0) <= 3 && !num.is_zero() {
            for root in roots_low_degree(&den)? {
                for _ in 0..root.multiplicity {
                    let scale = num.eval_abs_scale(Complex64::new(root.value.norm().max(1.0), 0.0));
                    if num.is_zero() || num.eval(root.value).norm() > ROOT_TOLERANCE * scale {
                        break;
                    }
                    num = num.deflate(root.value);
                    den = den.deflate(root.value);
                }
            }
        }
        let lead = den.leading();
        Ok(Self {
            numerator: num.scale(lead.inv()),
            denominator: den.scale(lead.inv()),
        })
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.denominator
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.numerator.eval(t) / self.denominator.eval(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub pole: Complex64,
    pub order: usize,
    pub coefficient: Complex64,
}

/// `polynomial_part(t) + Σ coefficient / (t − pole)^order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialFractionExpansion {
    pub polynomial_part: Polynomial,
    pub terms: Vec<PoleTerm>,
}

impl PartialFractionExpansion {
    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.terms.iter().fold(self.polynomial_part.eval(t), |acc, term| {
            acc + term.coefficient / (t - term.pole).powi(term.order as i32)
        })
    }
}

/// Partial fraction decomposition of a rational function whose denominator
/// has degree at most three.
///
/// Coefficients at a pole `p` of order `m` come from the Taylor expansion of
/// `remainder / g` at `p`, where `denominator = (t − p)^m g(t)`; for simple
/// poles this is the residue `remainder(p) / denominator'(p)`.
pub fn partial_fractions(r: &RationalFunction) -> Result<PartialFractionExpansion> {
    let den = r.denominator();
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let (quotient, remainder) = r.numerator().div_rem(den)?;
    let roots: Vec<Root> = roots_low_degree(den)?;
    let lead = den.leading();
    let mut terms = Vec::new();
    for (i, root) in roots.iter().enumerate() {
        let others: Vec<Complex64> = roots
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .flat_map(|(_, q)| std::iter::repeat(q.value).take(q.multiplicity))
            .collect();
        let g = Polynomial::from_roots(lead, &others);
        let m = root.multiplicity;
        let rt = pad(remainder.taylor_at(root.value), m);
        let gt = pad(g.taylor_at(root.value), m);
        let mut series = Vec::with_capacity(m);
        for l in 0..m {
            let mut acc = rt[l];
            for k in 1..=l {
                acc -= gt[k] * series[l - k];
            }
            series.push(acc / gt[0]);
        }
        for (l, coefficient) in series.into_iter().enumerate() {
            if coefficient != Complex64::new(0.0, 0.0) {
                terms.push(PoleTerm {
                    pole: root.value,
                    order: m - l,
                    coefficient,
                });
            }
        }
    }
    Ok(PartialFractionExpansion {
        polynomial_part: quotient,
        terms,
    })
}

fn pad(mut v: Vec<Complex64>, n: usize) -> Vec<Complex64> {
    if v.len() < n {
        v.resize(n, Complex64::new(0.0, 0.0));
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn legendre_log_derivative_residues() {
        // (x − t)/(t² − 2xt + 1), x = 2: residue −1/2 at both roots
        let x = 2.0;
        let r = RationalFunction::new(
            Polynomial::from_real(&[x, -1.0]),
            Polynomial::from_real(&[1.0, -2.0 * x, 1.0]),
        )
        .unwrap();
        let pf = partial_fractions(&r).unwrap();
        assert!(pf.polynomial_part.is_zero());
        assert_eq!(pf.terms.len(), 2);
        for term in &pf.terms {
            assert_eq!(term.order, 1);
            assert!((term.coefficient - c(-0.5)).norm() < 1e-14);
            let expected = [x - 3f64.sqrt(), x + 3f64.sqrt()];
            assert!(expected.iter().any(|&e| (term.pole - c(e)).norm() < 1e-14));
        }
    }

    #[test]
    fn hermite_log_derivative_is_polynomial() {
        // (t² − 2xt)/(2t), x = 1 → t/2 − 1
        let r = RationalFunction::new(
            Polynomial::from_real(&[0.0, -2.0, 1.0]),
            Polynomial::from_real(&[0.0, 2.0]),
        )
        .unwrap();
        let pf = partial_fractions(&r).unwrap();
        assert!(pf.terms.is_empty());
        let p = &pf.polynomial_part;
        assert_eq!(p.degree(), Some(1));
        assert!((p.coeff(0) - c(-1.0)).norm() < 1e-15);
        assert!((p.coeff(1) - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn single_simple_pole() {
        let r = RationalFunction::new(Polynomial::from_real(&[1.0]), Polynomial::from_real(&[0.0, 1.0]))
            .unwrap();
        let pf = partial_fractions(&r).unwrap();
        assert_eq!(
            pf.terms,
            vec![PoleTerm {
                pole: c(0.0),
                order: 1,
                coefficient: c(1.0)
            }]
        );
        assert!(pf.polynomial_part.is_zero());
    }

    #[test]
    fn double_pole_split() {
        // (1 + x − t)/(t − 1)² = −1/(t − 1) + x/(t − 1)²
        let x = 0.75;
        let r = RationalFunction::new(
            Polynomial::from_real(&[1.0 + x, -1.0]),
            Polynomial::from_real(&[1.0, -2.0, 1.0]),
        )
        .unwrap();
        let pf = partial_fractions(&r).unwrap();
        let simple = pf.terms.iter().find(|t| t.order == 1).unwrap();
        let double = pf.terms.iter().find(|t| t.order == 2).unwrap();
        assert!((simple.coefficient - c(-1.0)).norm() < 1e-14);
        assert!((double.coefficient - c(x)).norm() < 1e-14);
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert!(matches!(
            RationalFunction::new(Polynomial::from_real(&[1.0]), Polynomial::zero()),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn common_factor_is_cancelled() {
        // t(x − t) / (t(t² − 2xt + 1)) reduces to (x − t)/(t² − 2xt + 1)
        let x = 0.3;
        let num = Polynomial::from_real(&[0.0, x, -1.0]);
        let den = Polynomial::from_real(&[0.0, 1.0, -2.0 * x, 1.0]);
        let r = RationalFunction::new(num, den).unwrap();
        assert_eq!(r.denominator().degree(), Some(2));
        assert!((r.numerator().coeff(0) - c(x)).norm() < 1e-15);
        assert!((r.numerator().coeff(1) - c(-1.0)).norm() < 1e-15);
    }
}
