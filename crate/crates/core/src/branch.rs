//! Branch cuts for the multivalued factors `(t − r)^μ`.
//!
//! Every singular point `q` owns a straight cut running from `q` to infinity
//! along a unit direction `u`. By default `u` points away from an anchor (the
//! midpoint of the integration path), so a path through the anchor region
//! never meets a cut. Points that the path has to pass by closely get an
//! explicit direction instead.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::arg_half_open;

const SAME_POINT: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchCuts {
    anchor: Complex64,
    overrides: Vec<(Complex64, Complex64)>,
}

impl BranchCuts {
    pub fn from_anchor(anchor: Complex64) -> Self {
        Self {
            anchor,
            overrides: Vec::new(),
        }
    }

    pub fn anchor(&self) -> Complex64 {
        self.anchor
    }

    /// Forces the cut at `point` to run along `direction` (normalized here).
    pub fn set_direction(&mut self, point: Complex64, direction: Complex64) {
        let u = direction / direction.norm();
        match self.overrides.iter_mut().find(|(p, _)| same_point(*p, point)) {
            Some(entry) => entry.1 = u,
            None => self.overrides.push((point, u)),
        }
    }

    /// Unit direction of the cut leaving `point`. A point sitting on the
    /// anchor itself falls back to the principal cut along the negative axis.
    pub fn direction(&self, point: Complex64) -> Complex64 {
        if let Some((_, u)) = self.overrides.iter().find(|(p, _)| same_point(*p, point)) {
            return *u;
        }
        let d = point - self.anchor;
        if d.norm() <= SAME_POINT * (1.0 + point.norm()) {
            Complex64::new(-1.0, 0.0)
        } else {
            d / d.norm()
        }
    }

    /// `log(z)` for `z = t − point` on the sheet cut along this point's ray.
    pub fn log(&self, point: Complex64, z: Complex64) -> Complex64 {
        CutLog::new(self.direction(point)).log(z)
    }
}

/// Logarithm with its cut along a fixed unit direction `u`. The imaginary part
/// ranges over `[ψ − π, ψ + π)` where `ψ = arg(−u)` taken in `[−π, π)`, so
/// `u = −1` gives the principal logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutLog {
    v_conj: Complex64,
    psi: f64,
}

impl CutLog {
    pub fn new(u: Complex64) -> Self {
        let v = -u;
        Self {
            v_conj: v.conj(),
            psi: arg_half_open(v),
        }
    }

    pub fn log(&self, z: Complex64) -> Complex64 {
        let w = z * self.v_conj;
        Complex64::new(w.norm().ln(), arg_half_open(w) + self.psi)
    }
}

pub(crate) fn same_point(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= SAME_POINT * (1.0 + a.norm().max(b.norm()))
}
