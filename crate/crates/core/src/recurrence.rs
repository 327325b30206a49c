//! Difference equations with linear coefficients,
//!
//! ```text
//! (αx + a) f(x+2) = (βx + b) f(x+1) + (γx + c) f(x)      (order 2)
//! (βx + b) f(x+1) = (γx + c) f(x)                        (order 1)
//! ```
//!
//! together with the two independent checks every representation is held to:
//! direct forward iteration from seed values and the residual functional.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Division floor for relative residuals.
pub const RESIDUAL_SCALE_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "order")]
pub enum Coefficients {
    #[serde(rename = "2")]
    Second {
        alpha: Complex64,
        a: Complex64,
        beta: Complex64,
        b: Complex64,
        gamma: Complex64,
        c: Complex64,
    },
    #[serde(rename = "1")]
    First {
        beta: Complex64,
        b: Complex64,
        gamma: Complex64,
        c: Complex64,
    },
}

impl Coefficients {
    pub fn order(&self) -> usize {
        match self {
            Coefficients::Second { .. } => 2,
            Coefficients::First { .. } => 1,
        }
    }

    /// The linear coefficient factors evaluated at `x`, leading side first:
    /// `[αx+a, βx+b, γx+c]` or `[βx+b, γx+c]`.
    pub fn factors_at(&self, x: Complex64) -> Vec<Complex64> {
        match *self {
            Coefficients::Second {
                alpha,
                a,
                beta,
                b,
                gamma,
                c,
            } => vec![alpha * x + a, beta * x + b, gamma * x + c],
            Coefficients::First { beta, b, gamma, c } => vec![beta * x + b, gamma * x + c],
        }
    }

    fn all(&self) -> Vec<Complex64> {
        match *self {
            Coefficients::Second {
                alpha,
                a,
                beta,
                b,
                gamma,
                c,
            } => vec![alpha, a, beta, b, gamma, c],
            Coefficients::First { beta, b, gamma, c } => vec![beta, b, gamma, c],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub x: Complex64,
    pub value: Complex64,
}

impl InitialCondition {
    pub fn new(x: f64, value: f64) -> Self {
        Self {
            x: Complex64::new(x, 0.0),
            value: Complex64::new(value, 0.0),
        }
    }
}

/// A validated difference equation plus the ansatz shift `k` of
/// `f(x) = ∫ t^{x+k} h(t) dt` and its initial conditions. The first initial
/// condition normalizes; later ones are only checked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceSpec {
    coefficients: Coefficients,
    shift: i32,
    initial_conditions: Vec<InitialCondition>,
}

impl RecurrenceSpec {
    pub fn new(
        coefficients: Coefficients,
        shift: i32,
        initial_conditions: Vec<InitialCondition>,
    ) -> Result<Self> {
        if coefficients.all().iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite recurrence coefficient".into()));
        }
        let zero = Complex64::new(0.0, 0.0);
        match coefficients {
            Coefficients::Second { alpha, a, .. } if alpha == zero && a == zero => {
                return Err(Error::DegenerateRecurrence(
                    "leading coefficient αx + a vanishes identically".into(),
                ))
            }
            Coefficients::First { beta, b, .. } if beta == zero && b == zero => {
                return Err(Error::DegenerateRecurrence(
                    "leading coefficient βx + b vanishes identically".into(),
                ))
            }
            _ => {}
        }
        if initial_conditions.is_empty() {
            return Err(Error::InvalidInput(
                "at least one initial condition is required".into(),
            ));
        }
        if initial_conditions
            .iter()
            .any(|ic| !ic.x.is_finite() || !ic.value.is_finite())
        {
            return Err(Error::InvalidInput("non-finite initial condition".into()));
        }
        Ok(Self {
            coefficients,
            shift,
            initial_conditions,
        })
    }

    /// Order-2 spec from real coefficients `(α, a, β, b, γ, c)`.
    pub fn second_order_real(
        coeffs: [f64; 6],
        shift: i32,
        initial_conditions: Vec<InitialCondition>,
    ) -> Result<Self> {
        let [alpha, a, beta, b, gamma, c] = coeffs.map(|v| Complex64::new(v, 0.0));
        Self::new(
            Coefficients::Second {
                alpha,
                a,
                beta,
                b,
                gamma,
                c,
            },
            shift,
            initial_conditions,
        )
    }

    /// Order-1 spec from real coefficients `(β, b, γ, c)`.
    pub fn first_order_real(
        coeffs: [f64; 4],
        shift: i32,
        initial_conditions: Vec<InitialCondition>,
    ) -> Result<Self> {
        let [beta, b, gamma, c] = coeffs.map(|v| Complex64::new(v, 0.0));
        Self::new(
            Coefficients::First { beta, b, gamma, c },
            shift,
            initial_conditions,
        )
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    pub fn order(&self) -> usize {
        self.coefficients.order()
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn initial_conditions(&self) -> &[InitialCondition] {
        &self.initial_conditions
    }

    pub fn with_initial_conditions(&self, initial_conditions: Vec<InitialCondition>) -> Result<Self> {
        Self::new(self.coefficients, self.shift, initial_conditions)
    }

    pub fn with_coefficients(&self, coefficients: Coefficients) -> Result<Self> {
        Self::new(coefficients, self.shift, self.initial_conditions.clone())
    }
}

/// Closed interval of real parts of `x` on which a representation is claimed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub min: f64,
    pub max: f64,
}

impl Window {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(Error::InvalidInput(format!("invalid x window [{min}, {max}]")));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    pub fn intersect(&self, other: &Window) -> Option<Window> {
        let min = self.min.max(other.min);
        let max = self.max.min(other.max);
        (min <= max).then_some(Window { min, max })
    }

    pub fn edges(&self) -> [f64; 2] {
        [self.min, self.max]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub x: Complex64,
    pub absolute_residual: f64,
    pub relative_residual: f64,
    /// Leading-side term first, then the right-hand terms moved to the left,
    /// so that their sum is the residual.
    pub term_values: Vec<Complex64>,
}

/// Unrolls the recurrence from seeds at `x0, x0+1, …`; the output starts with
/// the seeds and has `seeds.len() + n_steps` entries.
pub fn iterate_forward(
    spec: &RecurrenceSpec,
    x0: Complex64,
    seeds: &[Complex64],
    n_steps: usize,
) -> Result<Vec<Complex64>> {
    let order = spec.order();
    if seeds.len() != order {
        return Err(Error::InvalidInput(format!(
            "order-{order} recurrence needs {order} seeds, got {}",
            seeds.len()
        )));
    }
    let mut values = seeds.to_vec();
    for step in 0..n_steps {
        let x = x0 + step as f64;
        let f = spec.coefficients.factors_at(x);
        if f[0].norm() <= RESIDUAL_SCALE_FLOOR {
            return Err(Error::SingularStep { x });
        }
        let next = match order {
            2 => (f[1] * values[step + 1] + f[2] * values[step]) / f[0],
            _ => f[1] * values[step] / f[0],
        };
        values.push(next);
    }
    Ok(values)
}

/// Substitutes `f` into the recurrence at `x`.
pub fn residual<F>(spec: &RecurrenceSpec, mut f: F, x: Complex64) -> Result<ResidualReport>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let factors = spec.coefficients.factors_at(x);
    let order = spec.order();
    let mut term_values = Vec::with_capacity(order + 1);
    term_values.push(factors[0] * f(x + order as f64)?);
    for (j, factor) in factors.iter().enumerate().skip(1) {
        term_values.push(-factor * f(x + (order - j) as f64)?);
    }
    let sum: Complex64 = term_values.iter().sum();
    let scale = term_values
        .iter()
        .map(|t| t.norm())
        .fold(0.0, f64::max)
        .max(RESIDUAL_SCALE_FLOOR);
    Ok(ResidualReport {
        x,
        absolute_residual: sum.norm(),
        relative_residual: sum.norm() / scale,
        term_values,
    })
}
