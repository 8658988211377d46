//! Sparse multivariate polynomials and polynomial vector fields.
//!
//! Charts and frames live on polynomial data: symplectic form entries, metric
//! perturbations and Kähler potentials are polynomials in the chart
//! coordinates, frame fields are low-degree polynomials in the coordinates
//! shifted to a base point. Differentiation is exact coefficient arithmetic,
//! and evaluation through jet arithmetic hands back exact derivatives.

use std::collections::BTreeMap;

use crate::jets::{C64, Jet2};

/// Polynomial in `nvars` real variables with complex coefficients, stored as
/// exponent-vector -> coefficient. The map keeps terms in a fixed order so
/// everything downstream is deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, C64>,
}

const COEFF_EPS: f64 = 0.0;

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(&vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(index < nvars);
        let mut e = vec![0; nvars];
        e[index] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(&e, C64::new(1.0, 0.0));
        p
    }

    pub fn monomial(nvars: usize, exponents: &[u32], coeff: C64) -> Self {
        assert_eq!(exponents.len(), nvars);
        let mut p = Self::zero(nvars);
        p.add_term(exponents, coeff);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exponents: &[u32], coeff: C64) {
        assert_eq!(exponents.len(), self.nvars);
        let entry = self
            .terms
            .entry(exponents.to_vec())
            .or_insert(C64::new(0.0, 0.0));
        *entry += coeff;
        if entry.norm() <= COEFF_EPS {
            self.terms.remove(exponents);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], C64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn add(&self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, c);
        }
        out
    }

    pub fn sub(&self, rhs: &MultiPoly) -> MultiPoly {
        self.add(&rhs.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> MultiPoly {
        if c == C64::new(0.0, 0.0) {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in self.terms() {
            for (eb, cb) in rhs.terms() {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(&e, ca * cb);
            }
        }
        out
    }

    /// Exact partial derivative along variable `index`.
    pub fn partial(&self, index: usize) -> MultiPoly {
        assert!(index < self.nvars);
        let mut out = Self::zero(self.nvars);
        for (e, c) in self.terms() {
            let k = e[index];
            if k == 0 {
                continue;
            }
            let mut d = e.to_vec();
            d[index] = k - 1;
            out.add_term(&d, c * C64::new(k as f64, 0.0));
        }
        out
    }

    pub fn conj(&self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.conj()))
                .collect(),
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Drop every term of total degree above `max_degree`.
    pub fn truncate_degree(&self, max_degree: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() <= max_degree)
                .map(|(e, c)| (e.clone(), *c))
                .collect(),
        }
    }

    pub fn eval_value(&self, xi: &[f64]) -> C64 {
        assert_eq!(xi.len(), self.nvars);
        let mut acc = C64::new(0.0, 0.0);
        for (e, c) in self.terms() {
            let mut m = 1.0;
            for (x, k) in xi.iter().zip(e) {
                m *= x.powi(*k as i32);
            }
            acc += c * C64::new(m, 0.0);
        }
        acc
    }

    /// Evaluate through jet arithmetic: the returned jet carries the exact
    /// gradient and Hessian of the polynomial at `xi`.
    pub fn eval_jet(&self, xi: &[f64]) -> Jet2 {
        assert_eq!(xi.len(), self.nvars);
        let m = self.nvars;
        let vars: Vec<Jet2> = (0..m).map(|a| Jet2::var(m, a, xi[a])).collect();
        let mut acc = Jet2::zero(m);
        for (e, c) in self.terms() {
            let mut term = Jet2::constant(m, c);
            for (a, k) in e.iter().enumerate() {
                for _ in 0..*k {
                    term = &term * &vars[a];
                }
            }
            acc = &acc + &term;
        }
        acc
    }

    /// Rebuild a degree-2 polynomial from jet data (value, gradient, half the
    /// Hessian); this is the Taylor polynomial of whatever produced the jet.
    pub fn from_jet(jet: &Jet2) -> MultiPoly {
        let m = jet.nvars();
        let mut p = Self::zero(m);
        p.add_term(&vec![0; m], jet.value());
        for a in 0..m {
            let mut e = vec![0; m];
            e[a] = 1;
            p.add_term(&e, jet.grad(a));
        }
        for a in 0..m {
            for b in a..m {
                let mut e = vec![0; m];
                e[a] += 1;
                e[b] += 1;
                let coeff = if a == b {
                    jet.hess(a, b) * C64::new(0.5, 0.0)
                } else {
                    // hess is symmetric; the (a,b) and (b,a) entries share one
                    // monomial.
                    jet.hess(a, b)
                };
                p.add_term(&e, coeff);
            }
        }
        p
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Complex vector field with polynomial components in the coordinates shifted
/// to a base point: component c of the field at x is `comps[c]` evaluated at
/// x - base.
#[derive(Clone, Debug)]
pub struct PolyVectorField {
    base: Vec<f64>,
    comps: Vec<MultiPoly>,
}

impl PolyVectorField {
    pub fn new(base: Vec<f64>, comps: Vec<MultiPoly>) -> Self {
        let m = base.len();
        assert_eq!(comps.len(), m, "field needs one component per coordinate");
        for c in &comps {
            assert_eq!(c.nvars(), m);
        }
        PolyVectorField { base, comps }
    }

    pub fn constant(base: Vec<f64>, values: &[C64]) -> Self {
        let m = base.len();
        let comps = values
            .iter()
            .map(|v| MultiPoly::constant(m, *v))
            .collect::<Vec<_>>();
        Self::new(base, comps)
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn component(&self, c: usize) -> &MultiPoly {
        &self.comps[c]
    }

    pub fn max_degree(&self) -> u32 {
        self.comps.iter().map(|p| p.total_degree()).max().unwrap_or(0)
    }

    fn shift(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        x.iter().zip(&self.base).map(|(a, b)| a - b).collect()
    }

    pub fn eval_values(&self, x: &[f64]) -> Vec<C64> {
        let xi = self.shift(x);
        self.comps.iter().map(|p| p.eval_value(&xi)).collect()
    }

    /// Component jets at x; gradients and Hessians are taken in the chart
    /// coordinates (shifting by a constant base point changes nothing).
    pub fn eval_jets(&self, x: &[f64]) -> Vec<Jet2> {
        let xi = self.shift(x);
        self.comps.iter().map(|p| p.eval_jet(&xi)).collect()
    }

    pub fn conj(&self) -> PolyVectorField {
        PolyVectorField {
            base: self.base.clone(),
            comps: self.comps.iter().map(|p| p.conj()).collect(),
        }
    }

    pub fn add(&self, rhs: &PolyVectorField) -> PolyVectorField {
        assert_eq!(self.base, rhs.base, "fields must share a base point");
        PolyVectorField {
            base: self.base.clone(),
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &PolyVectorField) -> PolyVectorField {
        self.add(&rhs.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> PolyVectorField {
        PolyVectorField {
            base: self.base.clone(),
            comps: self.comps.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Multiply every component by a scalar polynomial (in the same shifted
    /// coordinates).
    pub fn scale_poly(&self, s: &MultiPoly) -> PolyVectorField {
        PolyVectorField {
            base: self.base.clone(),
            comps: self.comps.iter().map(|p| p.mul(s)).collect(),
        }
    }

    pub fn truncate_degree(&self, max_degree: u32) -> PolyVectorField {
        PolyVectorField {
            base: self.base.clone(),
            comps: self
                .comps
                .iter()
                .map(|p| p.truncate_degree(max_degree))
                .collect(),
        }
    }

    /// Field whose components are the Taylor polynomials of the given jets,
    /// centered at `base`.
    pub fn from_jets(base: Vec<f64>, jets: &[Jet2]) -> PolyVectorField {
        let comps = jets.iter().map(MultiPoly::from_jet).collect::<Vec<_>>();
        Self::new(base, comps)
    }
}

/// Commutator [U, V] of two fields at x, from component jets alone.
pub fn lie_bracket_values(u: &PolyVectorField, v: &PolyVectorField, x: &[f64]) -> Vec<C64> {
    let uj = u.eval_jets(x);
    let vj = v.eval_jets(x);
    let m = x.len();
    let mut out = vec![C64::new(0.0, 0.0); m];
    for c in 0..m {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..m {
            acc += uj[a].value() * vj[c].grad(a) - vj[a].value() * uj[c].grad(a);
        }
        out[c] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn partial_derivative_is_exact() {
        // p = 3 x0^2 x1 + x1^3, dp/dx0 = 6 x0 x1.
        let mut p = MultiPoly::zero(2);
        p.add_term(&[2, 1], c(3.0));
        p.add_term(&[0, 3], c(1.0));
        let d = p.partial(0);
        let mut want = MultiPoly::zero(2);
        want.add_term(&[1, 1], c(6.0));
        assert_eq!(d, want);
    }

    #[test]
    fn jet_eval_matches_value_eval() {
        let mut p = MultiPoly::zero(3);
        p.add_term(&[2, 1, 0], C64::new(0.7, -0.3));
        p.add_term(&[0, 0, 4], c(-1.2));
        p.add_term(&[1, 1, 1], C64::new(0.0, 2.0));
        let x = [0.3, -0.8, 0.5];
        let j = p.eval_jet(&x);
        assert!((j.value() - p.eval_value(&x)).norm() < 1e-14);
        // Gradient against the exact polynomial derivative.
        for a in 0..3 {
            let d = p.partial(a).eval_value(&x);
            assert!((j.grad(a) - d).norm() < 1e-13);
        }
        for a in 0..3 {
            for b in 0..3 {
                let dd = p.partial(a).partial(b).eval_value(&x);
                assert!((j.hess(a, b) - dd).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn from_jet_round_trips_degree_two() {
        let mut p = MultiPoly::zero(2);
        p.add_term(&[0, 0], C64::new(1.0, -0.5));
        p.add_term(&[1, 0], c(2.0));
        p.add_term(&[1, 1], C64::new(-0.25, 1.0));
        p.add_term(&[0, 2], c(0.5));
        let x = [0.0, 0.0];
        let q = MultiPoly::from_jet(&p.eval_jet(&x));
        for probe in [[0.1, 0.2], [-0.4, 0.3], [0.25, -0.15]] {
            assert!((p.eval_value(&probe) - q.eval_value(&probe)).norm() < 1e-13);
        }
    }

    #[test]
    fn bracket_of_coordinate_scalings() {
        // U = x1 d/dx0, V = d/dx1 on R^2: [U, V] = -d/dx0.
        let base = vec![0.0, 0.0];
        let u = PolyVectorField::new(
            base.clone(),
            vec![MultiPoly::var(2, 1), MultiPoly::zero(2)],
        );
        let v = PolyVectorField::new(
            base.clone(),
            vec![MultiPoly::zero(2), MultiPoly::constant(2, c(1.0))],
        );
        let b = lie_bracket_values(&u, &v, &[0.4, 0.7]);
        assert!((b[0] - c(-1.0)).norm() < 1e-14);
        assert!(b[1].norm() < 1e-14);
    }

    #[test]
    fn shifted_base_point_evaluation() {
        // Field component (x - o)_0^2 evaluated at x: depends only on the shift.
        let base = vec![1.0, 2.0];
        let mut p = MultiPoly::zero(2);
        p.add_term(&[2, 0], c(1.0));
        let f = PolyVectorField::new(base, vec![p, MultiPoly::zero(2)]);
        let vals = f.eval_values(&[1.5, 2.0]);
        assert!((vals[0] - c(0.25)).norm() < 1e-14);
        let jets = f.eval_jets(&[1.5, 2.0]);
        assert!((jets[0].grad(0) - c(1.0)).norm() < 1e-14);
    }
}
