//! Integration endpoints: points where the boundary term
//! `B(t) = t^{x+k+1} · D(t) · h(t)` vanishes for every `x` in a window.
//!
//! Finite candidates are the origin, the roots of `D`, and the singular points
//! of the weight. Infinite candidates are rays along which the exponential
//! part decays (or, without one, along which the power law does). Every
//! candidate is confirmed numerically by following `|B|` towards it in the
//! log domain at both window edges.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{roots_low_degree, Root};
use crate::branch::same_point;
use crate::error::{Error, Result};
use crate::recurrence::Window;
use crate::resolvent::ResolventSolution;

/// Required drop of `|B|` below its running maximum: a factor of 1e8.
const DECAY_DROP: f64 = 18.420680743952367;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndpointLocation {
    Finite {
        location: Complex64,
        /// Unit direction pointing from the endpoint into the region the
        /// path comes from.
        approach_direction: Complex64,
    },
    Infinite {
        angle: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointSpec {
    pub location: EndpointLocation,
    pub validity_window: Window,
    /// The weight has an essential singularity here; the path must arrive
    /// along `approach_direction`.
    pub essential: bool,
}

impl EndpointSpec {
    pub fn point(&self) -> Option<Complex64> {
        match self.location {
            EndpointLocation::Finite { location, .. } => Some(location),
            EndpointLocation::Infinite { .. } => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self.location {
            EndpointLocation::Infinite { angle } => Some(angle),
            EndpointLocation::Finite { .. } => None,
        }
    }

    pub fn approach_direction(&self) -> Option<Complex64> {
        match self.location {
            EndpointLocation::Finite {
                approach_direction, ..
            } => Some(approach_direction),
            EndpointLocation::Infinite { .. } => None,
        }
    }

    fn order_key(&self, other: &Self) -> Ordering {
        match (self.location, other.location) {
            (EndpointLocation::Finite { location: a, .. }, EndpointLocation::Finite { location: b, .. }) => {
                (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap_or(Ordering::Equal)
            }
            (EndpointLocation::Finite { .. }, EndpointLocation::Infinite { .. }) => Ordering::Less,
            (EndpointLocation::Infinite { .. }, EndpointLocation::Finite { .. }) => Ordering::Greater,
            (EndpointLocation::Infinite { angle: a }, EndpointLocation::Infinite { angle: b }) => {
                a.partial_cmp(&b).unwrap_or(Ordering::Equal)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// Path from `lower` to `upper`.
    Open,
    /// Loop leaving an essential endpoint along its approach direction,
    /// circling it once counterclockwise and returning.
    Loop,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointPair {
    pub lower: EndpointSpec,
    pub upper: EndpointSpec,
    pub joint_window: Window,
    pub kind: PairKind,
}

/// Local data of a finite candidate point.
struct Local {
    point: Complex64,
    d_multiplicity: usize,
    exponent: Complex64,
    essential: Option<Complex64>,
    is_origin: bool,
}

impl Local {
    fn origin_only(&self) -> bool {
        self.is_origin
            && self.d_multiplicity == 0
            && self.exponent == Complex64::new(0.0, 0.0)
            && self.essential.is_none()
    }
}

/// `ln|B(t)|` with `t = base + offset`; factors whose singular point is
/// `base` use `offset` directly so that tiny offsets keep full precision.
pub(crate) struct BoundaryLog<'a> {
    sol: &'a ResolventSolution,
    d_roots: Vec<Root>,
    d_lead: Complex64,
}

impl<'a> BoundaryLog<'a> {
    pub(crate) fn new(sol: &'a ResolventSolution) -> Result<Self> {
        Ok(Self {
            sol,
            d_roots: roots_low_degree(&sol.boundary_poly)?,
            d_lead: sol.boundary_poly.leading(),
        })
    }

    pub(crate) fn eval(&self, x: f64, base: Complex64, offset: Complex64) -> f64 {
        let t = base + offset;
        let local = |r: Complex64| if same_point(r, base) { offset } else { t - r };
        let zero = Complex64::new(0.0, 0.0);
        let w = &self.sol.weight;
        let e = Complex64::new(x + self.sol.shift as f64 + 1.0, 0.0);
        let mut acc = log_power(local(zero), e) + self.d_lead.norm().ln();
        for r in &self.d_roots {
            acc += r.multiplicity as f64 * local(r.value).norm().ln();
        }
        acc += w.exp_poly.eval(t).re;
        for s in &w.essential_terms {
            acc += (s.strength / local(s.pole)).re;
        }
        for f in &w.power_factors {
            acc += log_power(local(f.root), f.exponent);
        }
        acc
    }
}

/// `Re(μ · log z)` with the principal argument.
fn log_power(z: Complex64, mu: Complex64) -> f64 {
    mu.re * z.norm().ln() - mu.im * z.im.atan2(z.re)
}

/// Follows `ln|B|` along `samples`; passes when, after the running maximum,
/// the sequence never rises and eventually drops `DECAY_DROP` below it.
fn decays(samples: impl Iterator<Item = f64>) -> bool {
    let mut max = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    for v in samples {
        if v.is_nan() {
            return false;
        }
        if v == f64::NEG_INFINITY {
            return max > f64::NEG_INFINITY;
        }
        if v >= max {
            max = v;
        } else if v > prev + 1e-9 * (1.0 + prev.abs()) {
            return false;
        }
        if max - v >= DECAY_DROP {
            return true;
        }
        prev = v;
    }
    false
}

fn finite_decays(b: &BoundaryLog, x: f64, p: Complex64, d: Complex64, rho0: f64) -> bool {
    decays((0..=600).map(|j| {
        let rho = rho0 * 10f64.powf(-(j as f64) / 2.0);
        b.eval(x, p, d * rho)
    }))
}

fn ray_decays(b: &BoundaryLog, x: f64, angle: f64, r0: f64) -> bool {
    let u = Complex64::from_polar(1.0, angle);
    decays(
        (0..)
            .map(|j| r0 * 2f64.powf(j as f64 / 2.0))
            .take_while(|r| *r <= 1e100)
            .map(|r| b.eval(x, Complex64::new(0.0, 0.0), u * r)),
    )
}

/// Re-checks an endpoint numerically at the given `x` values.
pub fn validate_decay(sol: &ResolventSolution, endpoint: &EndpointSpec, xs: &[f64]) -> Result<bool> {
    let b = BoundaryLog::new(sol)?;
    let points = candidate_points(sol, &b);
    Ok(xs.iter().all(|&x| match endpoint.location {
        EndpointLocation::Finite {
            location,
            approach_direction,
        } => finite_decays(&b, x, location, approach_direction, local_radius(location, &points)),
        EndpointLocation::Infinite { angle } => ray_decays(&b, x, angle, ray_start(&points)),
    }))
}

fn candidate_points(sol: &ResolventSolution, b: &BoundaryLog) -> Vec<Complex64> {
    let mut points = vec![Complex64::new(0.0, 0.0)];
    let extra = b
        .d_roots
        .iter()
        .map(|r| r.value)
        .chain(sol.weight.singular_points());
    for p in extra {
        if !points.iter().any(|&q| same_point(p, q)) {
            points.push(p);
        }
    }
    points
}

/// Half the distance to the nearest other candidate point.
fn local_radius(p: Complex64, points: &[Complex64]) -> f64 {
    points
        .iter()
        .filter(|&&q| !same_point(p, q))
        .map(|&q| 0.5 * (q - p).norm())
        .fold(f64::INFINITY, f64::min)
        .min(0.5 * (1.0 + p.norm()))
}

fn ray_start(points: &[Complex64]) -> f64 {
    points.iter().map(|p| 2.0 * p.norm()).fold(1.0, f64::max)
}

fn normalize_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

fn angular_distance(a: f64, b: f64) -> f64 {
    normalize_angle(a - b).abs()
}

/// Ray directions where the exponential part (or the power law) decays.
fn ray_candidates(sol: &ResolventSolution, points: &[Complex64], window: &Window) -> Vec<f64> {
    let p = &sol.weight.exp_poly;
    match p.degree() {
        Some(2) => {
            let theta = normalize_angle((PI - p.coeff(2).arg()) / 2.0);
            vec![theta, normalize_angle(theta - PI)]
        }
        Some(1) => vec![normalize_angle(PI - p.coeff(1).arg())],
        _ => {
            let deg_d = sol.boundary_poly.degree().unwrap_or(0) as f64;
            let base = sol.shift as f64 + 1.0 + deg_d + sol.weight.total_exponent().re;
            if window.edges().iter().any(|x| x + base >= 0.0) {
                return vec![];
            }
            // keep the ray as far as possible from the finite singular points
            let blocked: Vec<f64> = points
                .iter()
                .filter(|q| q.norm() > 0.0)
                .map(|q| q.arg())
                .collect();
            let clearance = |theta: f64| {
                blocked
                    .iter()
                    .map(|&b| angular_distance(theta, b))
                    .fold(PI, f64::min)
            };
            let best = (0..16)
                .map(|j| normalize_angle(j as f64 * PI / 8.0))
                .fold((0.0, -1.0), |(bt, bc), theta| {
                    let c = clearance(theta);
                    if c > bc + 1e-12 {
                        (theta, c)
                    } else {
                        (bt, bc)
                    }
                })
                .0;
            vec![best]
        }
    }
}

/// Validated endpoints, sorted finite-first.
pub fn find_endpoints(sol: &ResolventSolution, window: &Window) -> Result<Vec<EndpointSpec>> {
    let b = BoundaryLog::new(sol)?;
    let points = candidate_points(sol, &b);
    let zero = Complex64::new(0.0, 0.0);
    let edges = window.edges();

    let mut endpoints = Vec::new();
    let mut origin_fallback = None;
    for &p in &points {
        let local = Local {
            point: p,
            d_multiplicity: b
                .d_roots
                .iter()
                .find(|r| same_point(r.value, p))
                .map_or(0, |r| r.multiplicity),
            exponent: sol.weight.exponent_at(p),
            essential: sol.weight.essential_at(p),
            is_origin: same_point(p, zero),
        };
        let rho0 = local_radius(p, &points);
        let spec = if let Some(sigma) = local.essential {
            let d = -sigma / sigma.norm();
            edges
                .iter()
                .all(|&x| finite_decays(&b, x, p, d, rho0))
                .then_some(EndpointSpec {
                    location: EndpointLocation::Finite {
                        location: p,
                        approach_direction: d,
                    },
                    validity_window: *window,
                    essential: true,
                })
        } else {
            let moment = |x: f64| if local.is_origin { x + sol.shift as f64 } else { 0.0 };
            let admissible = edges.iter().all(|&x| {
                let integrand = local.exponent.re + moment(x);
                let boundary = local.d_multiplicity as f64 + integrand + if local.is_origin { 1.0 } else { 0.0 };
                boundary > 0.0 && integrand > -1.0
            });
            let d = approach_from(local.point, &points);
            (admissible && edges.iter().all(|&x| finite_decays(&b, x, p, d, rho0))).then_some(
                EndpointSpec {
                    location: EndpointLocation::Finite {
                        location: p,
                        approach_direction: d,
                    },
                    validity_window: *window,
                    essential: false,
                },
            )
        };
        match spec {
            Some(s) if local.origin_only() => origin_fallback = Some(s),
            Some(s) => endpoints.push(s),
            None => {}
        }
    }

    let r0 = ray_start(&points);
    for angle in ray_candidates(sol, &points, window) {
        if edges.iter().all(|&x| ray_decays(&b, x, angle, r0)) {
            endpoints.push(EndpointSpec {
                location: EndpointLocation::Infinite { angle },
                validity_window: *window,
                essential: false,
            });
        }
    }

    // the bare t^{x+k} factor only supplies an endpoint when the weight's own
    // endpoints cannot be paired among themselves
    if endpoints.len() < 2 {
        endpoints.extend(origin_fallback);
    }
    if endpoints.len() < 2 && !endpoints.iter().any(|e| e.essential) {
        return Err(Error::NoRepresentation(format!(
            "{} validated endpoint(s) on x window [{}, {}]",
            endpoints.len(),
            window.min,
            window.max
        )));
    }
    endpoints.sort_by(|a, b| a.order_key(b));
    Ok(endpoints)
}

/// Direction from `p` towards the centroid of the other candidate points.
fn approach_from(p: Complex64, points: &[Complex64]) -> Complex64 {
    let others: Vec<Complex64> = points.iter().copied().filter(|&q| !same_point(p, q)).collect();
    if others.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    let d = others.iter().sum::<Complex64>() / others.len() as f64 - p;
    if d.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        d / d.norm()
    }
}

/// All pairs with overlapping windows in `i < j` order of the sorted
/// endpoints, followed by one loop per essential endpoint.
pub fn enumerate_pairs(endpoints: &[EndpointSpec]) -> Vec<EndpointPair> {
    let mut sorted = endpoints.to_vec();
    sorted.sort_by(|a, b| a.order_key(b));
    let mut pairs = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            if let Some(joint_window) = sorted[i].validity_window.intersect(&sorted[j].validity_window) {
                pairs.push(EndpointPair {
                    lower: sorted[i],
                    upper: sorted[j],
                    joint_window,
                    kind: PairKind::Open,
                });
            }
        }
    }
    for e in sorted.iter().filter(|e| e.essential) {
        pairs.push(EndpointPair {
            lower: *e,
            upper: *e,
            joint_window: e.validity_window,
            kind: PairKind::Loop,
        });
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::{InitialCondition, RecurrenceSpec};
    use crate::resolvent::derive_resolvent;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn solve2(coeffs: [f64; 6]) -> ResolventSolution {
        derive_resolvent(
            &RecurrenceSpec::second_order_real(coeffs, 0, vec![InitialCondition::new(0.0, 1.0)]).unwrap(),
        )
        .unwrap()
    }

    fn window(a: f64, b: f64) -> Window {
        Window::new(a, b).unwrap()
    }

    #[test]
    fn legendre_endpoints_are_the_roots_of_d() {
        let x = 2.0;
        let sol = solve2([1.0, 2.0, 2.0 * x, 3.0 * x, -1.0, -1.0]);
        let e = find_endpoints(&sol, &window(0.0, 20.0)).unwrap();
        assert_eq!(e.len(), 2);
        assert!((e[0].point().unwrap() - c(2.0 - 3f64.sqrt())).norm() < 1e-12);
        assert!((e[1].point().unwrap() - c(2.0 + 3f64.sqrt())).norm() < 1e-12);
        assert_eq!(enumerate_pairs(&e).len(), 1);
    }

    #[test]
    fn legendre_complex_roots() {
        let x = 0.5;
        let sol = solve2([1.0, 2.0, 2.0 * x, 3.0 * x, -1.0, -1.0]);
        let e = find_endpoints(&sol, &window(0.0, 20.0)).unwrap();
        assert_eq!(e.len(), 2);
        let s = (1.0 - x * x).sqrt();
        assert!((e[0].point().unwrap() - Complex64::new(x, -s)).norm() < 1e-12);
        assert!((e[1].point().unwrap() - Complex64::new(x, s)).norm() < 1e-12);
    }

    #[test]
    fn hermite_rays() {
        let sol = solve2([0.0, 1.0, 0.0, 2.0, -2.0, -2.0]);
        let e = find_endpoints(&sol, &window(0.0, 15.0)).unwrap();
        assert_eq!(e.len(), 2);
        assert!((e[0].angle().unwrap() + PI / 2.0).abs() < 1e-12);
        assert!((e[1].angle().unwrap() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_origin_and_positive_axis() {
        let spec =
            RecurrenceSpec::first_order_real([0.0, 1.0, 1.0, 0.0], -1, vec![InitialCondition::new(1.0, 1.0)])
                .unwrap();
        let sol = derive_resolvent(&spec).unwrap();
        let e = find_endpoints(&sol, &window(0.5, 6.0)).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].point(), Some(c(0.0)));
        assert_eq!(e[1].angle(), Some(0.0));
        // the origin stops being an endpoint once x ≤ 0 is in the window
        assert!(find_endpoints(&sol, &window(-0.5, 6.0)).is_err());
    }

    #[test]
    fn laguerre_essential_endpoint() {
        let x = 1.0;
        let sol = solve2([1.0, 2.0, 2.0, 3.0 - x, -1.0, -1.0]);
        let e = find_endpoints(&sol, &window(0.0, 20.0)).unwrap();
        let ess: Vec<_> = e.iter().filter(|e| e.essential).collect();
        assert_eq!(ess.len(), 1);
        assert!((ess[0].point().unwrap() - c(1.0)).norm() < 1e-12);
        // σ = −x, so the approach is from Re t > 1
        assert!((ess[0].approach_direction().unwrap() - c(1.0)).norm() < 1e-12);
        let pairs = enumerate_pairs(&e);
        assert_eq!(pairs.last().unwrap().kind, PairKind::Loop);
    }

    #[test]
    fn pair_counts() {
        let w = window(0.0, 1.0);
        let mk = |re: f64, w: Window| EndpointSpec {
            location: EndpointLocation::Finite {
                location: c(re),
                approach_direction: c(1.0),
            },
            validity_window: w,
            essential: false,
        };
        assert_eq!(enumerate_pairs(&[mk(0.0, w), mk(1.0, w)]).len(), 1);
        let four: Vec<_> = (0..4).map(|j| mk(j as f64, w)).collect();
        assert_eq!(enumerate_pairs(&four).len(), 6);
        assert!(enumerate_pairs(&[mk(0.0, w), mk(1.0, window(2.0, 3.0))]).is_empty());
    }

    #[test]
    fn decay_sequence_rules() {
        assert!(decays([0.0, -5.0, -10.0, -20.0].into_iter()));
        assert!(decays([0.0, 3.0, -5.0, -16.0].into_iter()));
        assert!(!decays([0.0, -5.0, -4.0, -30.0].into_iter()));
        assert!(!decays([0.0, -1.0, -2.0].into_iter()));
    }
}
