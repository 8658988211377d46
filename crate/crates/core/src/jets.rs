//! Order-2 truncated Taylor arithmetic (jets) over complex scalars.
//!
//! A `Jet2` carries the value, gradient and Hessian of a scalar function of
//! `nvars` real variables at one point. Arithmetic propagates all three parts
//! by the chain rule, so any quantity composed from jets carries its own first
//! and second derivatives with no finite differencing.
//!
//! A `Jet1` carries value and gradient only. Differentiating a `Jet2` once
//! (`Jet2::deriv`) lands in `Jet1`; there is deliberately no way back up, so
//! an attempt to take a third derivative fails to type-check instead of
//! silently reading zeros.
//!
//! Binary operations panic if the variable counts disagree; that is a
//! programming error, not a data condition.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Value parts smaller than this are treated as singular by `inv`.
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-12;

/// Value, gradient and Hessian of a scalar at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    value: C64,
    grad: Vec<C64>,
    // Row-major nvars x nvars, symmetric by construction.
    hess: Vec<C64>,
}

impl Jet2 {
    pub fn constant(nvars: usize, value: C64) -> Self {
        Jet2 {
            value,
            grad: vec![C64::new(0.0, 0.0); nvars],
            hess: vec![C64::new(0.0, 0.0); nvars * nvars],
        }
    }

    pub fn zero(nvars: usize) -> Self {
        Self::constant(nvars, C64::new(0.0, 0.0))
    }

    /// Jet of the coordinate function x_index evaluated where it takes `value`.
    pub fn var(nvars: usize, index: usize, value: f64) -> Self {
        assert!(index < nvars, "variable index {index} out of range {nvars}");
        let mut j = Self::constant(nvars, C64::new(value, 0.0));
        j.grad[index] = C64::new(1.0, 0.0);
        j
    }

    pub fn from_parts(value: C64, grad: Vec<C64>, hess: Vec<C64>) -> Self {
        let m = grad.len();
        assert_eq!(hess.len(), m * m, "hessian shape mismatch");
        for a in 0..m {
            for b in (a + 1)..m {
                debug_assert!(
                    (hess[a * m + b] - hess[b * m + a]).norm() < 1e-9,
                    "hessian must be symmetric"
                );
            }
        }
        Jet2 { value, grad, hess }
    }

    pub fn nvars(&self) -> usize {
        self.grad.len()
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    pub fn grad(&self, a: usize) -> C64 {
        self.grad[a]
    }

    pub fn grad_slice(&self) -> &[C64] {
        &self.grad
    }

    pub fn hess(&self, a: usize, b: usize) -> C64 {
        self.hess[a * self.nvars() + b]
    }

    pub fn scale(&self, c: C64) -> Jet2 {
        Jet2 {
            value: self.value * c,
            grad: self.grad.iter().map(|g| g * c).collect(),
            hess: self.hess.iter().map(|h| h * c).collect(),
        }
    }

    /// Complex conjugate. Valid because the underlying variables are real.
    pub fn conj(&self) -> Jet2 {
        Jet2 {
            value: self.value.conj(),
            grad: self.grad.iter().map(|g| g.conj()).collect(),
            hess: self.hess.iter().map(|h| h.conj()).collect(),
        }
    }

    /// Forget the Hessian.
    pub fn truncate(&self) -> Jet1 {
        Jet1 {
            value: self.value,
            grad: self.grad.clone(),
        }
    }

    /// Jet of the partial derivative along variable `a`; one order is consumed.
    pub fn deriv(&self, a: usize) -> Jet1 {
        let m = self.nvars();
        assert!(a < m, "variable index {a} out of range {m}");
        Jet1 {
            value: self.grad[a],
            grad: self.hess[a * m..(a + 1) * m].to_vec(),
        }
    }

    pub fn inv(&self) -> Result<Jet2> {
        self.inv_with_tol(DEFAULT_SINGULAR_TOL)
    }

    pub fn inv_with_tol(&self, singular_tol: f64) -> Result<Jet2> {
        let m = self.nvars();
        if self.value.norm() < singular_tol {
            return Err(Error::NearSingular(self.value.norm()));
        }
        let w = C64::new(1.0, 0.0) / self.value;
        let w2 = w * w;
        let w3 = w2 * w;
        let grad: Vec<C64> = self.grad.iter().map(|g| -g * w2).collect();
        let mut hess = vec![C64::new(0.0, 0.0); m * m];
        let two = C64::new(2.0, 0.0);
        for a in 0..m {
            for b in 0..m {
                hess[a * m + b] =
                    -self.hess[a * m + b] * w2 + two * self.grad[a] * self.grad[b] * w3;
            }
        }
        Ok(Jet2 {
            value: w,
            grad,
            hess,
        })
    }

    /// Principal square root. The value must sit in the right half plane,
    /// which is what every caller in this crate needs.
    pub fn sqrt(&self) -> Result<Jet2> {
        if self.value.re <= 0.0 {
            return Err(Error::BranchCut(self.value));
        }
        let m = self.nvars();
        let s = self.value.sqrt();
        let half_inv_s = C64::new(0.5, 0.0) / s;
        let grad: Vec<C64> = self.grad.iter().map(|g| g * half_inv_s).collect();
        let mut hess = vec![C64::new(0.0, 0.0); m * m];
        let two = C64::new(2.0, 0.0);
        for a in 0..m {
            for b in 0..m {
                hess[a * m + b] = (self.hess[a * m + b] - two * grad[a] * grad[b]) * half_inv_s;
            }
        }
        Ok(Jet2 {
            value: s,
            grad,
            hess,
        })
    }

    pub fn is_finite(&self) -> bool {
        let ok = |c: &C64| c.re.is_finite() && c.im.is_finite();
        ok(&self.value) && self.grad.iter().all(ok) && self.hess.iter().all(ok)
    }

    /// Largest absolute value over all stored components.
    pub fn max_abs(&self) -> f64 {
        let mut m = self.value.norm();
        for g in &self.grad {
            m = m.max(g.norm());
        }
        for h in &self.hess {
            m = m.max(h.norm());
        }
        m
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.nvars(), rhs.nvars(), "jet variable count mismatch");
        Jet2 {
            value: self.value + rhs.value,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| a + b)
                .collect(),
            hess: self
                .hess
                .iter()
                .zip(&rhs.hess)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.nvars(), rhs.nvars(), "jet variable count mismatch");
        Jet2 {
            value: self.value - rhs.value,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| a - b)
                .collect(),
            hess: self
                .hess
                .iter()
                .zip(&rhs.hess)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.nvars(), rhs.nvars(), "jet variable count mismatch");
        let m = self.nvars();
        let value = self.value * rhs.value;
        let mut grad = vec![C64::new(0.0, 0.0); m];
        for a in 0..m {
            grad[a] = self.grad[a] * rhs.value + self.value * rhs.grad[a];
        }
        let mut hess = vec![C64::new(0.0, 0.0); m * m];
        for a in 0..m {
            for b in 0..m {
                hess[a * m + b] = self.hess[a * m + b] * rhs.value
                    + self.value * rhs.hess[a * m + b]
                    + self.grad[a] * rhs.grad[b]
                    + self.grad[b] * rhs.grad[a];
            }
        }
        Jet2 { value, grad, hess }
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Value and gradient only; the home of quantities that already consumed one
/// derivative order (Christoffel symbols, nabla J, the B tensor).
#[derive(Clone, Debug, PartialEq)]
pub struct Jet1 {
    value: C64,
    grad: Vec<C64>,
}

impl Jet1 {
    pub fn constant(nvars: usize, value: C64) -> Self {
        Jet1 {
            value,
            grad: vec![C64::new(0.0, 0.0); nvars],
        }
    }

    pub fn zero(nvars: usize) -> Self {
        Self::constant(nvars, C64::new(0.0, 0.0))
    }

    pub fn from_parts(value: C64, grad: Vec<C64>) -> Self {
        Jet1 { value, grad }
    }

    pub fn nvars(&self) -> usize {
        self.grad.len()
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    pub fn grad(&self, a: usize) -> C64 {
        self.grad[a]
    }

    pub fn grad_slice(&self) -> &[C64] {
        &self.grad
    }

    pub fn scale(&self, c: C64) -> Jet1 {
        Jet1 {
            value: self.value * c,
            grad: self.grad.iter().map(|g| g * c).collect(),
        }
    }

    pub fn conj(&self) -> Jet1 {
        Jet1 {
            value: self.value.conj(),
            grad: self.grad.iter().map(|g| g.conj()).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = self.value.norm();
        for g in &self.grad {
            m = m.max(g.norm());
        }
        m
    }
}

impl Add for &Jet1 {
    type Output = Jet1;
    fn add(self, rhs: &Jet1) -> Jet1 {
        assert_eq!(self.nvars(), rhs.nvars(), "jet variable count mismatch");
        Jet1 {
            value: self.value + rhs.value,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Jet1 {
    type Output = Jet1;
    fn sub(self, rhs: &Jet1) -> Jet1 {
        assert_eq!(self.nvars(), rhs.nvars(), "jet variable count mismatch");
        Jet1 {
            value: self.value - rhs.value,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Jet1 {
    type Output = Jet1;
    fn mul(self, rhs: &Jet1) -> Jet1 {
        assert_eq!(self.nvars(), rhs.nvars(), "jet variable count mismatch");
        let m = self.nvars();
        let mut grad = vec![C64::new(0.0, 0.0); m];
        for a in 0..m {
            grad[a] = self.grad[a] * rhs.value + self.value * rhs.grad[a];
        }
        Jet1 {
            value: self.value * rhs.value,
            grad,
        }
    }
}

impl Neg for &Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        self.scale(C64::new(-1.0, 0.0))
    }
}
