//! Complex polynomial and rational-function algebra: arithmetic, closed-form
//! roots up to degree three, and partial fraction decomposition.

mod polynomial;
mod rational;
mod roots;

pub use polynomial::Polynomial;
pub use rational::{partial_fractions, PartialFractionExpansion, PoleTerm, RationalFunction};
pub use roots::{roots_low_degree, Root, ROOT_TOLERANCE};

pub use num_complex::Complex64 as ComplexScalar;

/// Argument in `[−π, π)`: the negative real axis counts as angle `−π`.
/// `e^{iθ}` with exact zeros on the coordinate axes, so that rays along
/// the axes keep purely real or imaginary nodes.
pub(crate) fn unit(angle: f64) -> ComplexScalar {
    let snap = |v: f64| if v.abs() < 4.0 * f64::EPSILON { 0.0 } else { v };
    ComplexScalar::new(snap(angle.cos()), snap(angle.sin()))
}

pub(crate) fn arg_half_open(z: ComplexScalar) -> f64 {
    let a = z.im.atan2(z.re);
    if a >= std::f64::consts::PI {
        -std::f64::consts::PI
    } else {
        a
    }
}
