//! Closed-form roots for polynomials of degree at most three.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Polynomial;
use crate::error::{Error, Result};

/// Relative tolerance for root clustering and common-factor cancellation.
pub const ROOT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Roots of `p` with multiplicities; the multiplicities sum to the degree.
///
/// Quadratics use the cancellation-free form of the quadratic formula, cubics
/// the closed form for the depressed cubic. Every root then gets one Newton
/// step (on the `(m−1)`-th derivative for a root of multiplicity `m`).
pub fn roots_low_degree(p: &Polynomial) -> Result<Vec<Root>> {
    let degree = match p.degree() {
        None | Some(0) => return Ok(Vec::new()),
        Some(d) if d > 3 => return Err(Error::UnsupportedDegree(d)),
        Some(d) => d,
    };
    // exact zero roots are split off so that t = 0 stays exactly 0
    let zeros = p.coeffs().iter().take_while(|c| **c == Complex64::new(0.0, 0.0)).count();
    let c = &p.coeffs()[zeros..];
    let mut raw = match degree - zeros {
        0 => vec![],
        1 => vec![-c[0] / c[1]],
        2 => quadratic(c[2], c[1], c[0]),
        _ => cubic(c[3], c[2], c[1], c[0]),
    };
    raw = raw.into_iter().map(|r| newton_step(p, r, 1)).collect();
    raw.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(zeros));
    Ok(cluster(p, raw))
}

fn quadratic(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // choose the sign that avoids cancellation in b ± √disc
    let plus = b + disc;
    let minus = b - disc;
    let q = if plus.norm() >= minus.norm() { plus } else { minus } * -0.5;
    if q.norm() == 0.0 {
        // b = 0 and c = 0: double root at the origin
        return vec![Complex64::new(0.0, 0.0); 2];
    }
    vec![q / a, c / q]
}

fn cubic(a3: Complex64, a2: Complex64, a1: Complex64, a0: Complex64) -> Vec<Complex64> {
    let a = a2 / a3;
    let b = a1 / a3;
    let c = a0 / a3;
    let d0 = a * a - 3.0 * b;
    let d1 = 2.0 * a * a * a - 9.0 * a * b + 27.0 * c;
    let s = (d1 * d1 - 4.0 * d0 * d0 * d0).sqrt();
    let plus = d1 + s;
    let minus = d1 - s;
    let big = if plus.norm() >= minus.norm() { plus } else { minus };
    let cc = (big * 0.5).powf(1.0 / 3.0);
    if cc.norm() == 0.0 {
        return vec![-a / 3.0; 3];
    }
    let xi = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut w = Complex64::new(1.0, 0.0);
    (0..3)
        .map(|_| {
            let ck = w * cc;
            w *= xi;
            -(a + ck + d0 / ck) / 3.0
        })
        .collect()
}

/// One Newton step on `p^{(m−1)}`, accepted only when it does not increase
/// the residual.
fn newton_step(p: &Polynomial, r: Complex64, multiplicity: usize) -> Complex64 {
    let mut f = p.clone();
    for _ in 1..multiplicity {
        f = f.derivative();
    }
    let df = f.derivative();
    let d = df.eval(r);
    if d.norm() == 0.0 {
        return r;
    }
    let next = r - f.eval(r) / d;
    if next.is_finite() && f.eval(next).norm() <= f.eval(r).norm() {
        next
    } else {
        r
    }
}

/// Groups roots that a relative coefficient perturbation of size
/// `ROOT_TOLERANCE` could have split apart, i.e. roots closer than
/// `√ROOT_TOLERANCE` relative.
fn cluster(p: &Polynomial, raw: Vec<Complex64>) -> Vec<Root> {
    let radius = ROOT_TOLERANCE.sqrt();
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for r in raw {
        let hit = groups.iter_mut().find(|g| {
            g.iter()
                .any(|&q| (q - r).norm() <= radius * (1.0 + q.norm().max(r.norm())))
        });
        match hit {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let m = g.len();
            let mean = g.iter().sum::<Complex64>() / m as f64;
            let value = if g.iter().all(|r| *r == Complex64::new(0.0, 0.0)) {
                mean
            } else if m > 1 {
                newton_step(p, mean, m)
            } else {
                mean
            };
            Root {
                value,
                multiplicity: m,
            }
        })
        .collect()
}
