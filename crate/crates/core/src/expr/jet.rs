use nalgebra::{DMatrix, DVector};

use super::{ExprError, Expression, Result};

/// Second-order jet of a scalar field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Jet2 {
    pub fn constant(dim: usize, value: f64) -> Self {
        Jet2 {
            value,
            gradient: DVector::zeros(dim),
            hessian: DMatrix::zeros(dim, dim),
        }
    }

    pub fn variable(dim: usize, index: usize, value: f64) -> Self {
        let mut j = Jet2::constant(dim, value);
        j.gradient[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|v| v.is_finite())
            && self.hessian.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.value
            .abs()
            .max(self.gradient.amax())
            .max(self.hessian.amax())
    }

    pub fn max_abs_diff(&self, other: &Jet2) -> f64 {
        (self.value - other.value)
            .abs()
            .max((&self.gradient - &other.gradient).amax())
            .max((&self.hessian - &other.hessian).amax())
    }

    pub(super) fn neg(self) -> Self {
        Jet2 {
            value: -self.value,
            gradient: -self.gradient,
            hessian: -self.hessian,
        }
    }

    pub(super) fn add(&self, o: &Jet2) -> Self {
        Jet2 {
            value: self.value + o.value,
            gradient: &self.gradient + &o.gradient,
            hessian: &self.hessian + &o.hessian,
        }
    }

    pub(super) fn sub(&self, o: &Jet2) -> Self {
        Jet2 {
            value: self.value - o.value,
            gradient: &self.gradient - &o.gradient,
            hessian: &self.hessian - &o.hessian,
        }
    }

    pub(super) fn mul(&self, o: &Jet2) -> Self {
        let gradient = &self.gradient * o.value + &o.gradient * self.value;
        let cross = &self.gradient * o.gradient.transpose();
        let hessian =
            &self.hessian * o.value + &o.hessian * self.value + &cross + cross.transpose();
        Jet2 {
            value: self.value * o.value,
            gradient,
            hessian,
        }
    }

    pub(super) fn div(&self, o: &Jet2) -> Self {
        let v = o.value;
        let recip = o
            .clone()
            .compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
        self.mul(&recip)
    }

    /// Jet of `phi(self)` given `phi`, `phi'` and `phi''` at the current value.
    pub(super) fn compose(self, f0: f64, f1: f64, f2: f64) -> Self {
        let outer = &self.gradient * self.gradient.transpose();
        Jet2 {
            value: f0,
            hessian: outer * f2 + &self.hessian * f1,
            gradient: self.gradient * f1,
        }
    }
}

/// Central-difference approximation of the jet of `e` at `point`, an
/// independent check on [`Expression::jet`].
pub fn finite_difference_jet(e: &Expression, point: &[f64], h: f64) -> Result<Jet2> {
    if !(h > 0.0) {
        return Err(ExprError::Domain {
            expr: e.to_canonical(),
            reason: "finite-difference step must be positive",
        });
    }
    let n = point.len();
    let value = e.eval(point)?;
    let at = |shifts: &[(usize, f64)]| {
        let mut q = point.to_vec();
        for &(i, s) in shifts {
            q[i] += s;
        }
        e.eval(&q)
    };
    let mut gradient = DVector::zeros(n);
    let mut hessian = DMatrix::zeros(n, n);
    for i in 0..n {
        let plus = at(&[(i, h)])?;
        let minus = at(&[(i, -h)])?;
        gradient[i] = (plus - minus) / (2.0 * h);
        hessian[(i, i)] = (plus - 2.0 * value + minus) / (h * h);
        for j in 0..i {
            let pp = at(&[(i, h), (j, h)])?;
            let pm = at(&[(i, h), (j, -h)])?;
            let mp = at(&[(i, -h), (j, h)])?;
            let mm = at(&[(i, -h), (j, -h)])?;
            let d = (pp - pm - mp + mm) / (4.0 * h * h);
            hessian[(i, j)] = d;
            hessian[(j, i)] = d;
        }
    }
    let hessian = (&hessian + hessian.transpose()) * 0.5;
    Ok(Jet2 {
        value,
        gradient,
        hessian,
    })
}
