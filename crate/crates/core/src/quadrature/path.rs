//! Integration paths between endpoint pairs.
//!
//! Finite endpoints are joined by straight lines. Singular points closer than
//! `δ = 1e−3 · diameter` to a line are bypassed on a semicircle of radius
//! `2δ`, except that an integrable singular point lying exactly on the line is
//! passed through. Infinite endpoints contribute a ray starting at `|t| = T`.
//! After planning, every segment is checked against every branch cut.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::unit;
use crate::branch::{same_point, BranchCuts};
use crate::endpoints::{EndpointLocation, EndpointPair, PairKind};
use crate::error::{Error, Result};
use crate::resolvent::ResolventSolution;

/// Loops around the factors centred at `center` add `2πi · turns` to their
/// logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    pub center: Complex64,
    pub turns: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SegmentShape {
    Line {
        start: Complex64,
        end: Complex64,
    },
    Arc {
        center: Complex64,
        radius: f64,
        from_angle: f64,
        to_angle: f64,
    },
    /// Ray from `start` to infinity when `outward`, otherwise from infinity
    /// back to `start`.
    Ray {
        start: Complex64,
        angle: f64,
        outward: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    FiniteRegular,
    FiniteEndpointSingular,
    InfiniteRay,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub shape: SegmentShape,
    pub transform: Transform,
    pub winding: Option<Winding>,
}

impl PathSegment {
    pub fn line(start: Complex64, end: Complex64) -> Self {
        Self {
            shape: SegmentShape::Line { start, end },
            transform: Transform::FiniteRegular,
            winding: None,
        }
    }

    pub fn arc(center: Complex64, radius: f64, from_angle: f64, to_angle: f64) -> Self {
        Self {
            shape: SegmentShape::Arc {
                center,
                radius,
                from_angle,
                to_angle,
            },
            transform: Transform::FiniteRegular,
            winding: None,
        }
    }

    pub fn ray(start: Complex64, angle: f64, outward: bool) -> Self {
        Self {
            shape: SegmentShape::Ray {
                start,
                angle,
                outward,
            },
            transform: Transform::InfiniteRay,
            winding: None,
        }
    }

    fn with_winding(mut self, winding: Winding) -> Self {
        self.winding = Some(winding);
        self
    }

    /// Polyline approximation used for cut-crossing checks; rays are cut off
    /// at `far`.
    fn polyline(&self, far: f64) -> Vec<Complex64> {
        match self.shape {
            SegmentShape::Line { start, end } => vec![start, end],
            SegmentShape::Arc {
                center,
                radius,
                from_angle,
                to_angle,
            } => (0..=64)
                .map(|j| {
                    let phi = from_angle + (to_angle - from_angle) * j as f64 / 64.0;
                    center + Complex64::from_polar(radius, phi)
                })
                .collect(),
            SegmentShape::Ray { start, angle, .. } => {
                vec![start, start + Complex64::from_polar(far, angle)]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub segments: Vec<PathSegment>,
    pub cuts: BranchCuts,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathOptions {
    /// `δ_path` as a fraction of the path diameter.
    pub delta_fraction: f64,
    /// The ray starts where `|exp P(t)|` first drops below this.
    pub split_threshold: f64,
    pub split_min: f64,
    pub split_max: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            delta_fraction: 1e-3,
            split_threshold: 1e-4,
            split_min: 1.0,
            split_max: 100.0,
        }
    }
}

struct Obstacle {
    point: Complex64,
    passable: bool,
}

pub fn plan_path(pair: &EndpointPair, sol: &ResolventSolution) -> Result<Path> {
    plan_path_with(pair, sol, &PathOptions::default())
}

pub fn plan_path_with(pair: &EndpointPair, sol: &ResolventSolution, opts: &PathOptions) -> Result<Path> {
    let w = &sol.weight;
    let zero = Complex64::new(0.0, 0.0);
    let mut points = vec![zero];
    for p in w.singular_points() {
        if !same_point(p, zero) {
            points.push(p);
        }
    }
    let edges = pair.joint_window.edges();
    let obstacles: Vec<Obstacle> = points
        .iter()
        .map(|&p| {
            let origin = same_point(p, zero);
            let integrable = edges.iter().all(|&x| {
                let moment = if origin { x + sol.shift as f64 } else { 0.0 };
                w.exponent_at(p).re + moment > -1.0
            });
            Obstacle {
                point: p,
                passable: w.essential_at(p).is_none() && integrable,
            }
        })
        .collect();
    let clearance = |p: Complex64| {
        points
            .iter()
            .filter(|&&q| !same_point(p, q))
            .map(|&q| 0.5 * (q - p).norm())
            .fold(0.5 * (1.0 + p.norm()), f64::min)
    };
    let max_modulus = points.iter().map(|p| p.norm()).fold(0.0, f64::max);

    let mut segments = Vec::new();
    let mut cuts;
    match (pair.kind, pair.lower.location, pair.upper.location) {
        (
            PairKind::Loop,
            EndpointLocation::Finite {
                location: p,
                approach_direction: d,
            },
            _,
        ) => {
            let rho = clearance(p);
            let phi = d.arg();
            let turn = Winding { center: p, turns: 1 };
            let mut out = PathSegment::line(p, p + d * rho);
            out.transform = Transform::FiniteEndpointSingular;
            let mut back = PathSegment::line(p + d * rho, p).with_winding(turn);
            back.transform = Transform::FiniteEndpointSingular;
            segments.push(out);
            segments.push(PathSegment::arc(p, rho, phi, phi + PI));
            segments.push(PathSegment::arc(p, rho, phi + PI, phi + 2.0 * PI).with_winding(turn));
            segments.push(back);
            cuts = BranchCuts::from_anchor(p);
            cuts.set_direction(p, -d);
        }
        (PairKind::Loop, EndpointLocation::Infinite { .. }, _) => {
            return Err(Error::PathPlanning("loop around an infinite endpoint".into()));
        }
        (PairKind::Open, lower, upper) => {
            let identical = match (lower, upper) {
                (EndpointLocation::Finite { location: a, .. }, EndpointLocation::Finite { location: b, .. }) => {
                    same_point(a, b)
                }
                (EndpointLocation::Infinite { angle: a }, EndpointLocation::Infinite { angle: b }) => {
                    (a - b).abs() <= 1e-12
                }
                _ => false,
            };
            if identical {
                return Err(Error::PathPlanning("identical endpoints".into()));
            }
            let finite_end = |loc: EndpointLocation| -> Vec<Complex64> {
                // essential endpoints are entered along their approach direction
                match loc {
                    EndpointLocation::Finite {
                        location,
                        approach_direction,
                    } if w.essential_at(location).is_some() => {
                        vec![location, location + approach_direction * clearance(location)]
                    }
                    EndpointLocation::Finite { location, .. } => vec![location],
                    EndpointLocation::Infinite { .. } => vec![],
                }
            };
            let split = |angle: f64| {
                let t = split_radius(sol, angle, opts);
                let finite_scale = [lower, upper]
                    .iter()
                    .filter_map(|l| match l {
                        EndpointLocation::Finite { location, .. } => Some(1.5 * location.norm()),
                        _ => None,
                    })
                    .fold(1.5 * max_modulus, f64::max);
                t.max(finite_scale).max(opts.split_min)
            };
            let (head, head_ray) = match lower {
                EndpointLocation::Finite { .. } => (finite_end(lower), None),
                EndpointLocation::Infinite { angle } => (vec![], Some(angle)),
            };
            let (mut tail, tail_ray) = match upper {
                EndpointLocation::Finite { .. } => (finite_end(upper), None),
                EndpointLocation::Infinite { angle } => (vec![], Some(angle)),
            };
            tail.reverse();
            let radius = match (head_ray, tail_ray) {
                (Some(a), Some(b)) => split(a).max(split(b)),
                (Some(a), None) | (None, Some(a)) => split(a),
                (None, None) => 0.0,
            };
            let mut waypoints = head;
            if let Some(a) = head_ray {
                waypoints.insert(0, radius * unit(a));
            }
            if let Some(b) = tail_ray {
                waypoints.push(radius * unit(b));
            }
            waypoints.extend(tail);
            let first = waypoints[0];
            let last = *waypoints.last().unwrap();
            let mid = (first + last) * 0.5;
            let anchor = match (head_ray, tail_ray) {
                (Some(a), Some(b)) if mid.norm() <= 1e-9 * radius => {
                    radius * unit(0.5 * (a + b))
                }
                _ => mid,
            };
            cuts = BranchCuts::from_anchor(anchor);
            let diameter = waypoints
                .windows(2)
                .map(|p| (p[1] - p[0]).norm())
                .sum::<f64>()
                .max(f64::MIN_POSITIVE);
            let delta = opts.delta_fraction * diameter;

            if let Some(a) = head_ray {
                segments.push(PathSegment::ray(waypoints[0], a, false));
            }
            for pair in waypoints.windows(2) {
                segments.extend(route_line(pair[0], pair[1], &obstacles, delta, &mut cuts));
            }
            if let Some(b) = tail_ray {
                segments.push(PathSegment::ray(last, b, true));
            }
        }
    }

    for seg in &mut segments {
        if let SegmentShape::Line { start, end } = seg.shape {
            if points.iter().any(|&p| same_point(p, start) || same_point(p, end)) {
                seg.transform = Transform::FiniteEndpointSingular;
            }
        }
    }
    check_cuts(&segments, &points, &cuts)?;
    Ok(Path { segments, cuts })
}

/// Radius where `|exp P|` along the ray first falls below the threshold.
fn split_radius(sol: &ResolventSolution, angle: f64, opts: &PathOptions) -> f64 {
    let p = &sol.weight.exp_poly;
    if p.degree().unwrap_or(0) < 1 {
        return opts.split_min;
    }
    let u = Complex64::from_polar(1.0, angle);
    let target = opts.split_threshold.ln();
    let mut r = 0.01;
    while r < opts.split_max {
        if p.eval(u * r).re < target {
            return r.clamp(opts.split_min, opts.split_max);
        }
        r *= 1.02;
    }
    opts.split_max
}

/// Straight line from `a` to `b`, bypassing obstacles within `delta`.
fn route_line(
    a: Complex64,
    b: Complex64,
    obstacles: &[Obstacle],
    delta: f64,
    cuts: &mut BranchCuts,
) -> Vec<PathSegment> {
    let len = (b - a).norm();
    let dir = (b - a) / len;
    let left = Complex64::new(0.0, 1.0) * dir;
    let mut hits: Vec<(f64, f64, &Obstacle)> = obstacles
        .iter()
        .filter(|o| !same_point(o.point, a) && !same_point(o.point, b))
        .filter_map(|o| {
            let rel = (o.point - a) * dir.conj();
            let (along, perp) = (rel.re, rel.im);
            (along > 0.0 && along < len && perp.abs() < delta).then_some((along, perp, o))
        })
        .collect();
    hits.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut out = Vec::new();
    let mut current = a;
    let phi = dir.arg();
    for (along, perp, o) in hits {
        let foot = a + dir * along;
        if o.passable && perp.abs() <= 1e-12 * (1.0 + o.point.norm()) {
            out.push(PathSegment::line(current, o.point));
            current = o.point;
            cuts.set_direction(o.point, left);
            continue;
        }
        // go round on the side away from the point; the cut leaves towards it
        let side = if perp > 0.0 { -1.0 } else { 1.0 };
        let rho = 2.0 * delta;
        out.push(PathSegment::line(current, foot - dir * rho));
        out.push(PathSegment::arc(foot, rho, phi + side * PI, phi));
        cuts.set_direction(o.point, -left * side);
        current = foot + dir * rho;
    }
    out.push(PathSegment::line(current, b));
    out
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// True when the open segment `(a, b)` meets the open ray from `q` along `u`.
fn crosses(a: Complex64, b: Complex64, q: Complex64, u: Complex64) -> bool {
    let ab = b - a;
    let scale = ab.norm().max((q - a).norm()).max(1e-300);
    let eps = 1e-9;
    let denom = cross(ab, u);
    if denom.abs() <= 1e-12 * ab.norm() {
        // parallel: only a collinear overlap counts
        if cross(q - a, u).abs() > 1e-12 * scale {
            return false;
        }
        let sa = ((a - q) * u.conj()).re;
        let sb = ((b - q) * u.conj()).re;
        return sa.max(sb) > eps * scale;
    }
    let lambda = cross(q - a, u) / denom;
    let s = cross(q - a, ab) / denom;
    lambda > eps && lambda < 1.0 - eps && s > eps * scale
}

fn check_cuts(segments: &[PathSegment], points: &[Complex64], cuts: &BranchCuts) -> Result<()> {
    let far = 1e6
        * segments
            .iter()
            .flat_map(|s| s.polyline(1.0))
            .chain(points.iter().copied())
            .map(|p| p.norm())
            .fold(1.0, f64::max);
    for (index, seg) in segments.iter().enumerate() {
        let line = seg.polyline(far);
        for &q in points {
            let u = cuts.direction(q);
            if line.windows(2).any(|p| crosses(p[0], p[1], q, u)) {
                return Err(Error::PathPlanning(format!(
                    "segment {index} crosses the branch cut leaving t = {q}"
                )));
            }
        }
    }
    Ok(())
}
