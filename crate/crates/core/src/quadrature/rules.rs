//! Double-exponential rules on a single segment.
//!
//! Each rule maps an abscissa `τ` to a node and a Jacobian; the trapezoidal
//! sum over `τ` is refined by halving the step until two successive levels
//! agree.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::algebra::unit;

use super::path::{PathSegment, SegmentShape};
use super::{Integrand, NodePoint};

const MIN_LEVEL: u32 = 3;
pub(crate) const MAX_LEVEL: u32 = 12;
const TANH_SINH_RANGE: f64 = 6.1;
const EXP_SINH_RANGE: (f64, f64) = (-4.5, 6.5);

pub(crate) struct Outcome {
    pub value: Complex64,
    pub error: f64,
    pub nodes: usize,
    pub converged: bool,
    pub magnitude: f64,
}

/// tanh-sinh abscissa data at `τ`: `(1 + x, 1 − x, dx/dτ)`, with both
/// complements computed without cancellation.
fn tanh_sinh(tau: f64) -> (f64, f64, f64) {
    let u = FRAC_PI_2 * tau.sinh();
    let e = (-2.0 * u.abs()).exp();
    let small = 2.0 * e / (1.0 + e);
    let big = 2.0 / (1.0 + e);
    let weight = FRAC_PI_2 * tau.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
    if u >= 0.0 {
        (big, small, weight)
    } else {
        (small, big, weight)
    }
}

/// Node and `dt/dτ` for a segment, or `None` where the weight underflows.
fn node(seg: &PathSegment, tau: f64) -> Option<(NodePoint, Complex64)> {
    let winding = seg.winding;
    match seg.shape {
        SegmentShape::Line { start, end } => {
            let (onep, onem, w) = tanh_sinh(tau);
            if w == 0.0 {
                return None;
            }
            let half = (end - start) * 0.5;
            let (endpoint, offset) = if tau < 0.0 {
                (start, half * onep)
            } else {
                (end, -half * onem)
            };
            Some((
                NodePoint {
                    t: endpoint + offset,
                    endpoint: Some(endpoint),
                    offset,
                    winding,
                },
                half * w,
            ))
        }
        SegmentShape::Arc {
            center,
            radius,
            from_angle,
            to_angle,
        } => {
            let (onep, _, w) = tanh_sinh(tau);
            if w == 0.0 {
                return None;
            }
            let half = 0.5 * (to_angle - from_angle);
            let phi = from_angle + half * onep;
            let e = Complex64::from_polar(radius, phi);
            Some((
                NodePoint {
                    t: center + e,
                    endpoint: None,
                    offset: Complex64::new(0.0, 0.0),
                    winding,
                },
                Complex64::new(0.0, 1.0) * e * half * w,
            ))
        }
        SegmentShape::Ray {
            start,
            angle,
            outward,
        } => {
            let s = (FRAC_PI_2 * tau.sinh()).exp();
            let ds = s * FRAC_PI_2 * tau.cosh();
            if !ds.is_finite() || ds == 0.0 {
                return None;
            }
            let u = unit(angle);
            let offset = u * s;
            let jac = if outward { u * ds } else { -u * ds };
            Some((
                NodePoint {
                    t: start + offset,
                    endpoint: Some(start),
                    offset,
                    winding,
                },
                jac,
            ))
        }
    }
}

fn tau_range(seg: &PathSegment) -> (f64, f64) {
    match seg.shape {
        SegmentShape::Ray { .. } => EXP_SINH_RANGE,
        _ => (-TANH_SINH_RANGE, TANH_SINH_RANGE),
    }
}

/// Integrates `f` over one segment. Errors carry a description of the first
/// non-finite integrand value.
pub(crate) fn integrate_segment<I: Integrand + ?Sized>(
    f: &I,
    seg: &PathSegment,
    tol: f64,
) -> Result<Outcome, String> {
    let (lo, hi) = tau_range(seg);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    let mut nodes = 0usize;
    let mut eval = |tau: f64, sum: &mut Complex64, abs_sum: &mut f64| -> Result<(), String> {
        if let Some((p, jac)) = node(seg, tau) {
            let v = f.eval(&p);
            if !v.is_finite() {
                return Err(format!("integrand is {v} at t = {}", p.t));
            }
            let term = v * jac;
            if !term.is_finite() {
                return Err(format!("integrand overflows at t = {}", p.t));
            }
            *sum += term;
            *abs_sum += term.norm();
            nodes += 1;
        }
        Ok(())
    };

    let mut j = lo.ceil() as i64;
    while j as f64 <= hi {
        eval(j as f64, &mut sum, &mut abs_sum)?;
        j += 1;
    }
    let mut prev = sum;
    let mut value = sum;
    let mut error = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        let h = 0.5f64.powi(level as i32);
        // odd multiples of h inside [lo, hi]
        let first = ((lo / h).ceil() as i64) | 1;
        let mut k = first;
        while k as f64 * h <= hi {
            eval(k as f64 * h, &mut sum, &mut abs_sum)?;
            k += 2;
        }
        value = sum * h;
        error = (value - prev).norm();
        prev = value;
        if level >= MIN_LEVEL {
            let l1 = abs_sum * h;
            if error <= tol * value.norm() {
                return Ok(Outcome {
                    value,
                    error,
                    nodes,
                    converged: true,
                    magnitude: l1,
                });
            }
            // nothing more to gain once the change is at rounding level
            if error <= 64.0 * f64::EPSILON * l1 {
                return Ok(Outcome {
                    value,
                    error,
                    nodes,
                    converged: error <= tol * (1.0 + value.norm()),
                    magnitude: l1,
                });
            }
        }
    }
    Ok(Outcome {
        value,
        error,
        nodes,
        converged: false,
        magnitude: abs_sum * 0.5f64.powi(MAX_LEVEL as i32),
    })
}
