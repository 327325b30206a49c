//! Built-in recurrences with independent reference evaluators.
//!
//! | family     | recurrence in `n`                                   | seed          |
//! |------------|-----------------------------------------------------|---------------|
//! | `gamma`    | `Γ(x+1) = x Γ(x)`                                   | `Γ(1) = 1`    |
//! | `legendre` | `(n+2) P_{n+2} = (2n+3) x P_{n+1} − (n+1) P_n`      | `P_0 = 1`     |
//! | `hermite`  | `H_{n+2} = 2x H_{n+1} − 2(n+1) H_n`                 | `H_0 = 1`     |
//! | `laguerre` | `(n+2) L_{n+2} = (2n+3−x) L_{n+1} − (n+1) L_n`      | `L_0 = 1`     |
//! | `gauss2f1` | Gauss contiguous relation in `a`, with `n = a − 1`  | `₂F₁(1,b;c;z)`|
//!
//! The polynomial families carry the second seed (`P_1 = x`, …) as a
//! verification-only initial condition.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recurrence::{iterate_forward, Coefficients, InitialCondition, RecurrenceSpec, Window};
use crate::representation::solve;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Gamma,
    Legendre,
    Hermite,
    Laguerre,
    Gauss2F1,
}

impl FamilyName {
    pub const ALL: [FamilyName; 5] = [
        FamilyName::Gamma,
        FamilyName::Legendre,
        FamilyName::Hermite,
        FamilyName::Laguerre,
        FamilyName::Gauss2F1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyName::Gamma => "gamma",
            FamilyName::Legendre => "legendre",
            FamilyName::Hermite => "hermite",
            FamilyName::Laguerre => "laguerre",
            FamilyName::Gauss2F1 => "gauss2f1",
        }
    }

    fn parameter_names(self) -> &'static [&'static str] {
        match self {
            FamilyName::Gamma => &[],
            FamilyName::Legendre | FamilyName::Hermite | FamilyName::Laguerre => &["x"],
            FamilyName::Gauss2F1 => &["b", "c", "z"],
        }
    }
}

impl fmt::Display for FamilyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FamilyName::ALL
            .into_iter()
            .find(|n| n.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub name: FamilyName,
    pub parameters: BTreeMap<String, Complex64>,
    pub spec: RecurrenceSpec,
    pub default_window: Window,
    pub oracle: String,
}

impl FamilyDescriptor {
    fn param(&self, name: &str) -> Complex64 {
        self.parameters[name]
    }
}

fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}

pub fn make_family(name: &str, parameters: &BTreeMap<String, Complex64>) -> Result<FamilyDescriptor> {
    let family: FamilyName = name.parse()?;
    let expected = family.parameter_names();
    for key in parameters.keys() {
        if !expected.contains(&key.as_str()) {
            return Err(invalid(key, format!("not a parameter of {family}")));
        }
    }
    for key in expected {
        match parameters.get(*key) {
            None => return Err(invalid(key, "missing")),
            Some(v) if !v.is_finite() => return Err(invalid(key, "not finite")),
            _ => {}
        }
    }
    let p = |k: &str| parameters[k];
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let ic = |x: f64, v: Complex64| InitialCondition {
        x: Complex64::new(x, 0.0),
        value: v,
    };
    let (coefficients, shift, ics, window, oracle) = match family {
        FamilyName::Gamma => (
            Coefficients::First {
                beta: zero,
                b: one,
                gamma: one,
                c: zero,
            },
            -1,
            vec![ic(1.0, one)],
            Window::new(0.5, 10.0)?,
            "product iteration from Γ(1) = 1 (integers) and Γ(1/2) = √π (half-integers)",
        ),
        FamilyName::Legendre => {
            let x = p("x");
            if (x - 1.0).norm() < 1e-12 || (x + 1.0).norm() < 1e-12 {
                return Err(invalid("x", "x = ±1 makes the two endpoints collide"));
            }
            (
                Coefficients::Second {
                    alpha: one,
                    a: 2.0 * one,
                    beta: 2.0 * x,
                    b: 3.0 * x,
                    gamma: -one,
                    c: -one,
                },
                0,
                vec![ic(0.0, one), ic(1.0, x)],
                Window::new(0.0, 20.0)?,
                "forward recurrence from P_0 = 1, P_1 = x",
            )
        }
        FamilyName::Hermite => {
            let x = p("x");
            (
                Coefficients::Second {
                    alpha: zero,
                    a: one,
                    beta: zero,
                    b: 2.0 * x,
                    gamma: -2.0 * one,
                    c: -2.0 * one,
                },
                0,
                vec![ic(0.0, one), ic(1.0, 2.0 * x)],
                Window::new(0.0, 15.0)?,
                "forward recurrence from H_0 = 1, H_1 = 2x",
            )
        }
        FamilyName::Laguerre => {
            let x = p("x");
            (
                Coefficients::Second {
                    alpha: one,
                    a: 2.0 * one,
                    beta: 2.0 * one,
                    b: 3.0 - x,
                    gamma: -one,
                    c: -one,
                },
                0,
                vec![ic(0.0, one), ic(1.0, 1.0 - x)],
                Window::new(0.0, 20.0)?,
                "forward recurrence from L_0 = 1, L_1 = 1 − x",
            )
        }
        FamilyName::Gauss2F1 => {
            let (b, c, z) = (p("b"), p("c"), p("z"));
            if z.norm() >= 1.0 {
                return Err(invalid("z", "|z| must be below 1"));
            }
            if c.im == 0.0 && c.re <= 0.0 && c.re == c.re.round() {
                return Err(invalid("c", "c must not be a non-positive integer"));
            }
            // (c−a) F(a−1) + (2a−c+(b−a)z) F(a) + a(z−1) F(a+1) = 0 with a = n + 2
            let f0 = hypergeometric_series(one, b, c, z)?;
            let f1 = hypergeometric_series(2.0 * one, b, c, z)?;
            (
                Coefficients::Second {
                    alpha: 1.0 - z,
                    a: 2.0 * (1.0 - z),
                    beta: 2.0 - z,
                    b: 4.0 - c + (b - 2.0) * z,
                    gamma: -one,
                    c: c - 2.0,
                },
                0,
                vec![ic(0.0, f0), ic(1.0, f1)],
                Window::new(0.0, 10.0)?,
                "truncated hypergeometric series with tail below 1e-14",
            )
        }
    };
    Ok(FamilyDescriptor {
        name: family,
        parameters: parameters.clone(),
        spec: RecurrenceSpec::new(coefficients, shift, ics)?,
        default_window: window,
        oracle: oracle.to_string(),
    })
}

fn as_nonnegative_integer(x: Complex64, what: &str) -> Result<usize> {
    let n = x.re.round();
    if x.im.abs() > 1e-12 || (x.re - n).abs() > 1e-12 || n < 0.0 {
        return Err(Error::InvalidInput(format!("{what} oracle needs a non-negative integer, got {x}")));
    }
    Ok(n as usize)
}

/// Reference value at `x` (the recurrence variable).
pub fn oracle_eval(family: &FamilyDescriptor, x: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    match family.name {
        FamilyName::Gamma => {
            let two_x = 2.0 * x;
            let m = as_nonnegative_integer(two_x, "gamma")
                .map_err(|_| Error::InvalidInput(format!("gamma oracle needs an integer or half-integer, got {x}")))?;
            if m == 0 {
                return Err(Error::InvalidInput("Γ has a pole at 0".into()));
            }
            // Γ(s) for s = m/2 by stepping up from Γ(1) or Γ(1/2)
            let (mut s, mut g) = if m % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
            while s < m as f64 / 2.0 {
                g *= s;
                s += 1.0;
            }
            Ok(Complex64::new(g, 0.0))
        }
        FamilyName::Legendre | FamilyName::Hermite | FamilyName::Laguerre => {
            let n = as_nonnegative_integer(x, family.name.as_str())?;
            let ics = family.spec.initial_conditions();
            let seeds = [ics[0].value, ics[1].value];
            let values = iterate_forward(&family.spec, Complex64::new(0.0, 0.0), &seeds, n.saturating_sub(1))?;
            Ok(values[n])
        }
        FamilyName::Gauss2F1 => hypergeometric_series(x + one, family.param("b"), family.param("c"), family.param("z")),
    }
}

/// `₂F₁(a, b; c; z)` by direct summation, stopped once a geometric bound on
/// the remaining terms drops below 1e−16 of the partial sum.
pub fn hypergeometric_series(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64> {
    if z.norm() >= 1.0 {
        return Err(Error::InvalidInput(format!("series needs |z| < 1, got {z}")));
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 0..200_000usize {
        let nf = n as f64;
        let denom = (c + nf) * (nf + 1.0);
        if denom.norm() == 0.0 {
            return Err(Error::InvalidInput("c is a non-positive integer".into()));
        }
        let ratio = (a + nf) * (b + nf) / denom * z;
        term *= ratio;
        sum += term;
        if term.norm() == 0.0 {
            return Ok(sum);
        }
        // once the term ratio settles below one, the tail is bounded by a
        // geometric series with a slightly inflated ratio
        let r = ratio.norm() * (1.0 + (a + b - c - 1.0).norm() / (nf + 2.0));
        let r = r.max(z.norm());
        if nf > (a.norm() + b.norm()) && r < 1.0 && term.norm() * r / (1.0 - r) < 1e-16 * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::InvalidInput("hypergeometric series did not converge".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub x: Complex64,
    pub pipeline: Complex64,
    pub oracle: Complex64,
    /// `|pipeline − oracle| / max(|oracle|, 1)`.
    pub relative_difference: f64,
}

/// Error measure used throughout: relative for large values, absolute near
/// zeros of the function.
pub fn relative_difference(value: Complex64, reference: Complex64) -> f64 {
    (value - reference).norm() / reference.norm().max(1.0)
}

/// Solves the family on its default window and compares the principal
/// representation with the oracle.
pub fn compare(family: &FamilyDescriptor, xs: &[Complex64], tol: f64) -> Result<Vec<ComparisonRow>> {
    compare_on(family, &family.default_window, xs, tol)
}

pub fn compare_on(
    family: &FamilyDescriptor,
    window: &Window,
    xs: &[Complex64],
    tol: f64,
) -> Result<Vec<ComparisonRow>> {
    let reps = solve(&family.spec, window, tol)?;
    let rep = &reps[0];
    xs.iter()
        .map(|&x| {
            let pipeline = rep.evaluate(x)?;
            let oracle = oracle_eval(family, x)?;
            Ok(ComparisonRow {
                x,
                pipeline,
                oracle,
                relative_difference: relative_difference(pipeline, oracle),
            })
        })
        .collect()
}
