//! Property checks shared by the proptest suites and the acceptance run.
//! Each check takes a concrete case and reports the first violation.

#![allow(dead_code)]

use moment_ansatz::algebra::{partial_fractions, roots_low_degree, Polynomial, RationalFunction, ROOT_TOLERANCE};
use moment_ansatz::branch::BranchCuts;
use moment_ansatz::endpoints::{enumerate_pairs, find_endpoints, validate_decay, EndpointLocation, EndpointSpec};
use moment_ansatz::families::relative_difference;
use moment_ansatz::quadrature::{integrate, integrate_segments, plan_path, MomentIntegrand, NodePoint, PathSegment, SegmentShape};
use moment_ansatz::recurrence::{iterate_forward, residual, Coefficients, InitialCondition, RecurrenceSpec, Window};
use moment_ansatz::representation::solve;
use moment_ansatz::resolvent::derive_resolvent;
use num_complex::Complex64;
use rand::Rng;

pub type Check = Result<(), String>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn random_complex<R: Rng>(rng: &mut R, scale: f64) -> Complex64 {
    c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

pub fn legendre(x: f64) -> RecurrenceSpec {
    RecurrenceSpec::second_order_real([1.0, 2.0, 2.0 * x, 3.0 * x, -1.0, -1.0], 0, vec![InitialCondition::new(0.0, 1.0)])
        .unwrap()
}

pub fn hermite(x: f64) -> RecurrenceSpec {
    RecurrenceSpec::second_order_real([0.0, 1.0, 0.0, 2.0 * x, -2.0, -2.0], 0, vec![InitialCondition::new(0.0, 1.0)])
        .unwrap()
}

pub fn gamma() -> RecurrenceSpec {
    RecurrenceSpec::first_order_real([0.0, 1.0, 1.0, 0.0], -1, vec![InitialCondition::new(1.0, 1.0)]).unwrap()
}

fn dist_to_set(t: Complex64, points: &[Complex64]) -> f64 {
    points.iter().map(|p| (t - p).norm()).fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------- algebra

/// `num / (lead · Π (t − root)^mult)` expanded in partial fractions and
/// re-evaluated at the probes.
pub fn check_partial_fractions(
    num: &[Complex64],
    poles: &[(Complex64, usize)],
    lead: Complex64,
    probes: &[Complex64],
) -> Check {
    let roots: Vec<Complex64> = poles.iter().flat_map(|&(p, m)| std::iter::repeat(p).take(m)).collect();
    let den = Polynomial::from_roots(lead, &roots);
    let rf = RationalFunction::new(Polynomial::new(num.to_vec()), den.clone()).map_err(|e| e.to_string())?;
    let pf = partial_fractions(&rf).map_err(|e| e.to_string())?;
    let pole_points: Vec<Complex64> = poles.iter().map(|p| p.0).collect();
    let mut checked = 0;
    for &t in probes {
        if dist_to_set(t, &pole_points) < 0.1 {
            continue;
        }
        // direct evaluation of the original quotient, independent of any
        // cancellation inside RationalFunction
        let direct = Polynomial::new(num.to_vec()).eval(t) / den.eval(t);
        let rebuilt = pf.eval(t);
        if (rebuilt - direct).norm() > 1e-10 * (1.0 + direct.norm()) {
            return Err(format!("at t = {t}: expansion {rebuilt} vs quotient {direct}"));
        }
        checked += 1;
    }
    if checked == 0 {
        return Err("no probe away from the poles".into());
    }
    Ok(())
}

/// Roots of `lead · Π (t − r_i)` recover the `r_i`.
pub fn check_factor_roots(roots: &[Complex64], lead: Complex64) -> Check {
    let p = Polynomial::from_roots(lead, roots);
    let found = roots_low_degree(&p).map_err(|e| e.to_string())?;
    let mut values: Vec<Complex64> =
        found.iter().flat_map(|r| std::iter::repeat(r.value).take(r.multiplicity)).collect();
    if values.len() != roots.len() {
        return Err(format!("{} roots for degree {}", values.len(), roots.len()));
    }
    for &expected in roots {
        let (i, d) = values
            .iter()
            .enumerate()
            .map(|(i, v)| (i, (v - expected).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if d > 1e-12 * (1.0 + expected.norm()) {
            return Err(format!("root {expected} recovered as {} (error {d:e})", values[i]));
        }
        values.swap_remove(i);
    }
    Ok(())
}

/// Every reported root makes `p` small relative to its coefficients.
pub fn check_root_residual(coeffs: &[Complex64]) -> Check {
    let p = Polynomial::new(coeffs.to_vec());
    if p.degree().unwrap_or(0) == 0 {
        return Ok(());
    }
    for root in roots_low_degree(&p).map_err(|e| e.to_string())? {
        let v = p.eval(root.value).norm();
        let scale = p.max_coeff_abs() * (1.0 + root.value.norm()).powi(p.degree().unwrap() as i32);
        if v > ROOT_TOLERANCE * scale {
            return Err(format!("|p({})| = {v:e}", root.value));
        }
    }
    Ok(())
}

// -------------------------------------------------------------- recurrence

/// Random order-2 spec: generic, with `α = 0` (exponential weight) or with
/// `α = β = 0` (Gaussian weight).
pub fn random_spec<R: Rng>(rng: &mut R) -> RecurrenceSpec {
    let kind = rng.gen_range(0..3);
    let complex = rng.gen_bool(0.3);
    let draw = |rng: &mut R| {
        if complex {
            random_complex(rng, 2.0)
        } else {
            r(rng.gen_range(-2.0..2.0))
        }
    };
    let mut coeffs = [(); 6].map(|_| draw(rng));
    if kind >= 1 {
        coeffs[0] = r(0.0);
    }
    if kind == 2 {
        coeffs[2] = r(0.0);
    }
    if coeffs[1].norm() < 0.2 {
        coeffs[1] = r(1.0);
    }
    spec_from(coeffs)
}

pub fn spec_from(k: [Complex64; 6]) -> RecurrenceSpec {
    RecurrenceSpec::new(
        Coefficients::Second {
            alpha: k[0],
            a: k[1],
            beta: k[2],
            b: k[3],
            gamma: k[4],
            c: k[5],
        },
        0,
        vec![InitialCondition::new(0.0, 1.0)],
    )
    .unwrap()
}

/// The residual is linear in the candidate function, term by term.
pub fn check_residual_linearity(
    spec: &RecurrenceSpec,
    f: &[Complex64],
    g: &[Complex64],
    scale: Complex64,
    x: Complex64,
) -> Check {
    let (pf, pg) = (Polynomial::new(f.to_vec()), Polynomial::new(g.to_vec()));
    let rf = residual(spec, |z| Ok(pf.eval(z)), x).map_err(|e| e.to_string())?;
    let rg = residual(spec, |z| Ok(pg.eval(z)), x).map_err(|e| e.to_string())?;
    let rc = residual(spec, |z| Ok(scale * pf.eval(z) + pg.eval(z)), x).map_err(|e| e.to_string())?;
    for ((a, b), comb) in rf.term_values.iter().zip(&rg.term_values).zip(&rc.term_values) {
        let expect = scale * a + b;
        let size = (scale * a).norm() + b.norm();
        if (comb - expect).norm() > 1e-12 * size.max(f64::MIN_POSITIVE) {
            return Err(format!("term {comb} vs {expect}"));
        }
    }
    Ok(())
}

/// Iterates forward and checks every window of consecutive values.
pub fn check_forward_iteration(spec: &RecurrenceSpec, seeds: &[Complex64], x0: Complex64, steps: usize) -> Check {
    let values = match iterate_forward(spec, x0, seeds, steps) {
        Ok(v) => v,
        // a vanishing leading coefficient stops the iteration; nothing to check
        Err(moment_ansatz::Error::SingularStep { .. }) => return Ok(()),
        Err(e) => return Err(e.to_string()),
    };
    let order = spec.order();
    for j in 0..=values.len() - order - 1 {
        let x = x0 + j as f64;
        let rep = residual(spec, |z| Ok(values[(z - x0).re.round() as usize]), x).map_err(|e| e.to_string())?;
        if rep.relative_residual > 1e-13 {
            return Err(format!("relative residual {:e} at x = {x}", rep.relative_residual));
        }
    }
    Ok(())
}

// --------------------------------------------------------------- resolvent

fn distance_to_ray(t: Complex64, p: Complex64, u: Complex64) -> f64 {
    let z = (t - p) * u.conj();
    if z.re < 0.0 {
        (t - p).norm()
    } else {
        z.im.abs()
    }
}

/// Central differences of `log h` against the derived `L(t)` at up to
/// `wanted` probes away from singular points and branch cuts.
pub fn check_log_derivative(spec: &RecurrenceSpec, candidates: &[Complex64], wanted: usize) -> Check {
    let sol = match derive_resolvent(spec) {
        Ok(s) => s,
        Err(moment_ansatz::Error::UnsupportedPoleOrder { .. }) => return Ok(()),
        Err(e) => return Err(e.to_string()),
    };
    let w = &sol.weight;
    let cuts = BranchCuts::from_anchor(w.branch_anchor);
    let mut singular = w.singular_points();
    singular.push(r(0.0));
    let step = 1e-6;
    let mut used = 0;
    for &t in candidates {
        if used == wanted {
            break;
        }
        if dist_to_set(t, &singular) < 0.2
            || singular.iter().any(|&p| distance_to_ray(t, p, cuts.direction(p)) < 1e-3)
        {
            continue;
        }
        let lp = w.log_eval(t + step, &cuts).map_err(|e| e.to_string())?;
        let lm = w.log_eval(t - step, &cuts).map_err(|e| e.to_string())?;
        let fd = (lp - lm) / (2.0 * step);
        let l = sol.log_derivative.eval(t);
        if (fd - l).norm() > 1e-6 * l.norm().max(1.0) {
            return Err(format!("at t = {t}: finite difference {fd}, L = {l}"));
        }
        used += 1;
    }
    if used < wanted / 2 {
        return Err(format!("only {used} usable probes"));
    }
    Ok(())
}

/// `L_{k+1} − L_k = −1/t`, and only the exponent at the origin moves.
pub fn check_shift_covariance(spec: &RecurrenceSpec, probes: &[Complex64]) -> Check {
    let shifted = RecurrenceSpec::new(*spec.coefficients(), spec.shift() + 1, spec.initial_conditions().to_vec())
        .map_err(|e| e.to_string())?;
    let (a, b) = match (derive_resolvent(spec), derive_resolvent(&shifted)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(moment_ansatz::Error::UnsupportedPoleOrder { .. }), _)
        | (_, Err(moment_ansatz::Error::UnsupportedPoleOrder { .. })) => return Ok(()),
        (Err(e), _) | (_, Err(e)) => return Err(e.to_string()),
    };
    for &t in probes {
        if t.norm() < 0.1 || dist_to_set(t, &a.weight.singular_points()) < 0.1 {
            continue;
        }
        let diff = b.log_derivative.eval(t) - a.log_derivative.eval(t);
        let expect = -t.inv();
        let scale = 1.0 + a.log_derivative.eval(t).norm() + expect.norm();
        if (diff - expect).norm() > 1e-12 * scale {
            return Err(format!("at t = {t}: L_(k+1) − L_k = {diff}, expected {expect}"));
        }
    }
    let zero = r(0.0);
    let moved = b.weight.exponent_at(zero) - a.weight.exponent_at(zero);
    if (moved + 1.0).norm() > 1e-12 {
        return Err(format!("exponent at 0 moved by {moved}"));
    }
    for p in a.weight.singular_points().into_iter().filter(|p| p.norm() > 1e-9) {
        let d = b.weight.exponent_at(p) - a.weight.exponent_at(p);
        if d.norm() > 1e-12 {
            return Err(format!("exponent at {p} moved by {d}"));
        }
    }
    Ok(())
}

// --------------------------------------------------------------- endpoints

/// Every emitted endpoint passes the numeric decay test at both window
/// edges, and the pair count follows from the endpoint count. Returns the
/// number of endpoints checked.
pub fn check_decay(spec: &RecurrenceSpec, window: &Window) -> Result<usize, String> {
    let sol = match derive_resolvent(spec) {
        Ok(s) => s,
        Err(_) => return Ok(0),
    };
    let endpoints = match find_endpoints(&sol, window) {
        Ok(e) => e,
        Err(_) => return Ok(0),
    };
    for e in &endpoints {
        if !validate_decay(&sol, e, &e.validity_window.edges()).map_err(|e| e.to_string())? {
            return Err(format!("endpoint {e:?} fails the decay test"));
        }
    }
    let all_full = endpoints.iter().all(|e| e.validity_window == *window);
    if all_full {
        let n = endpoints.len();
        let essential = endpoints.iter().filter(|e| e.essential).count();
        let pairs = enumerate_pairs(&endpoints).len();
        if pairs != n * (n - 1) / 2 + essential {
            return Err(format!("{n} endpoints ({essential} essential) gave {pairs} pairs"));
        }
    }
    Ok(endpoints.len())
}

/// Legendre endpoints are `x ± √(x² − 1)`: a conjugate pair for |x| < 1,
/// real otherwise.
pub fn check_legendre_endpoints(x: f64) -> Check {
    let sol = derive_resolvent(&legendre(x)).map_err(|e| e.to_string())?;
    let e = find_endpoints(&sol, &Window::new(0.0, 20.0).unwrap()).map_err(|e| e.to_string())?;
    let s = (r(x * x - 1.0)).sqrt();
    let expect = [r(x) + s, r(x) - s];
    let got: Vec<Complex64> = e.iter().filter_map(EndpointSpec::point).collect();
    if got.len() != 2 || e.len() != 2 {
        return Err(format!("endpoints {e:?}"));
    }
    for want in expect {
        if dist_to_set(want, &got) > 1e-12 * (1.0 + want.norm()) {
            return Err(format!("missing endpoint {want}, got {got:?}"));
        }
    }
    let conjugate = (got[0] - got[1].conj()).norm() < 1e-12 * (1.0 + x.abs());
    let real = got.iter().all(|p| p.im.abs() <= 1e-12);
    if (x.abs() < 1.0 && !conjugate) || (x.abs() > 1.0 && !real) {
        return Err(format!("wrong regime at x = {x}: {got:?}"));
    }
    Ok(())
}

// -------------------------------------------------------------- quadrature

/// Rotating both Hermite rays inside their decay sectors leaves the
/// normalized value unchanged.
pub fn check_path_independence(x: f64, n: f64, rot_lower: f64, rot_upper: f64, tol: f64) -> Check {
    let window = Window::new(0.0, 15.0).unwrap();
    let reps = solve(&hermite(x), &window, tol).map_err(|e| e.to_string())?;
    let rep = &reps[0];
    let base = rep.evaluate(r(n)).map_err(|e| e.to_string())?;
    let mut pair = rep.pair;
    let rotate = |e: &mut EndpointSpec, by: f64| {
        if let EndpointLocation::Infinite { angle } = &mut e.location {
            *angle += by;
        }
    };
    rotate(&mut pair.lower, rot_lower);
    rotate(&mut pair.upper, rot_upper);
    let path = plan_path(&pair, &rep.solution).map_err(|e| e.to_string())?;
    let w = rep.solution.weight.with_anchor(path.cuts.anchor());
    let rotated = rep.normalization
        * integrate(&w, rep.solution.moment_exponent(r(n)), &path, tol)
            .map_err(|e| e.to_string())?
            .value;
    let d = relative_difference(rotated, base);
    if d > 10.0 * tol {
        return Err(format!(
            "x = {x}, n = {n}, rotations ({rot_lower}, {rot_upper}): {rotated} vs {base} ({d:e})"
        ));
    }
    Ok(())
}

/// Splitting a finite segment of a planned path at `fraction` leaves the
/// normalized value unchanged.
pub fn check_segment_additivity(spec: &RecurrenceSpec, window: &Window, x: f64, fraction: f64, tol: f64) -> Check {
    let reps = solve(spec, window, tol).map_err(|e| e.to_string())?;
    let rep = &reps[0];
    let s = rep.solution.moment_exponent(r(x));
    let f = MomentIntegrand::new(&rep.solution.weight, s, &rep.path.cuts);
    let whole = integrate_segments(&f, &rep.path.segments, tol).map_err(|e| e.to_string())?.value;
    let Some(index) = rep.path.segments.iter().position(|seg| matches!(seg.shape, SegmentShape::Line { .. }))
    else {
        return Err("path has no finite line segment".into());
    };
    let mut split: Vec<PathSegment> = Vec::new();
    for (i, seg) in rep.path.segments.iter().enumerate() {
        match seg.shape {
            SegmentShape::Line { start, end } if i == index => {
                let mid = start + (end - start) * fraction;
                for (a, b) in [(start, mid), (mid, end)] {
                    split.push(PathSegment {
                        shape: SegmentShape::Line { start: a, end: b },
                        ..*seg
                    });
                }
            }
            _ => split.push(*seg),
        }
    }
    let parts = integrate_segments(&f, &split, tol).map_err(|e| e.to_string())?.value;
    let d = relative_difference(rep.normalization * parts, rep.normalization * whole);
    if d > 10.0 * tol {
        return Err(format!("x = {x}, split at {fraction}: {parts} vs {whole} ({d:e})"));
    }
    Ok(())
}

// ---------------------------------------------------------------- families

/// `∫₀¹ t^{b−1} (1−t)^{c−b−1} (1 − zt)^{−a} dt` by direct quadrature.
pub fn euler_integral(a: Complex64, b: f64, c: f64, z: Complex64) -> Complex64 {
    let f = |p: &NodePoint| {
        let t = p.t;
        let left = p.relative_to(r(0.0));
        let right = -p.relative_to(r(1.0));
        left.powf(b - 1.0) * right.powf(c - b - 1.0) * (1.0 - z * t).powc(-a)
    };
    integrate_segments(&f, &[PathSegment::line(r(0.0), r(1.0))], 1e-13).unwrap().value
}
