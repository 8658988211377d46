//! Dense linear algebra over the jet ring, plus the value-level complex
//! matrix helpers the frame constructions need.
//!
//! A jet-valued matrix is invertible exactly when its value part is, so
//! elimination pivots on value magnitudes. The matrix square root uses the
//! coupled Denman-Beavers iteration, which runs unchanged in jet arithmetic:
//! once the value parts converge the derivative parts have converged too,
//! because every step is built from jet products and inverses.

use crate::error::{Error, Result};
use crate::jets::{C64, Jet2};

/// Pivot-ratio bound used as a cheap condition estimate during elimination.
pub const DEFAULT_COND_TOL: f64 = 1e10;
/// Iteration cap for the square-root iteration.
pub const SQRT_MAX_ITER: usize = 100;
/// Value-part increment below which the square-root iteration stops.
pub const SQRT_STOP_TOL: f64 = 1e-13;

/// Row-major matrix of order-2 jets sharing one variable count.
#[derive(Clone, Debug)]
pub struct JetMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Jet2>,
}

impl JetMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet2) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        let m = JetMatrix { rows, cols, data };
        m.assert_consistent();
        m
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Jet2::constant(nvars, C64::new(1.0, 0.0))
            } else {
                Jet2::zero(nvars)
            }
        })
    }

    pub fn zero(rows: usize, cols: usize, nvars: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Jet2::zero(nvars))
    }

    fn assert_consistent(&self) {
        let nv = self.data[0].nvars();
        assert!(
            self.data.iter().all(|j| j.nvars() == nv),
            "jet matrix entries must share a variable count"
        );
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.data[0].nvars()
    }

    pub fn get(&self, r: usize, c: usize) -> &Jet2 {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Jet2) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add(&self, rhs: &JetMatrix) -> JetMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        JetMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) + rhs.get(r, c))
    }

    pub fn sub(&self, rhs: &JetMatrix) -> JetMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        JetMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) - rhs.get(r, c))
    }

    pub fn scale(&self, k: C64) -> JetMatrix {
        JetMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).scale(k))
    }

    pub fn mul(&self, rhs: &JetMatrix) -> JetMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let nv = self.nvars();
        JetMatrix::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = Jet2::zero(nv);
            for k in 0..self.cols {
                acc = &acc + &(self.get(r, k) * rhs.get(k, c));
            }
            acc
        })
    }

    pub fn transpose(&self) -> JetMatrix {
        JetMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn conj(&self) -> JetMatrix {
        JetMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).conj())
    }

    /// Value parts as a plain complex matrix.
    pub fn value_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).value())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|j| j.max_abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|j| j.is_finite())
    }

    /// Solve self * X = rhs by Gaussian elimination with value-part partial
    /// pivoting. Ties in pivot magnitude break toward the lowest row index,
    /// so the factorization is deterministic.
    pub fn solve(&self, rhs: &JetMatrix) -> Result<JetMatrix> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(self.rows, rhs.rows, "right-hand side shape mismatch");
        let n = self.rows;
        let nv = self.nvars();
        let mut a = self.clone();
        let mut b = rhs.clone();
        let mut pivot_min = f64::INFINITY;
        let mut pivot_max: f64 = 0.0;

        for k in 0..n {
            let mut best = k;
            let mut best_mag = a.get(k, k).value().norm();
            for r in (k + 1)..n {
                let mag = a.get(r, k).value().norm();
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            if best != k {
                for c in 0..n {
                    let t = a.get(k, c).clone();
                    a.set(k, c, a.get(best, c).clone());
                    a.set(best, c, t);
                }
                for c in 0..b.cols {
                    let t = b.get(k, c).clone();
                    b.set(k, c, b.get(best, c).clone());
                    b.set(best, c, t);
                }
            }
            pivot_min = pivot_min.min(best_mag);
            pivot_max = pivot_max.max(best_mag);
            if best_mag == 0.0 || pivot_max / pivot_min > DEFAULT_COND_TOL {
                return Err(Error::SingularMatrix(if pivot_min == 0.0 {
                    f64::INFINITY
                } else {
                    pivot_max / pivot_min
                }));
            }
            let piv_inv = a
                .get(k, k)
                .inv()
                .map_err(|_| Error::SingularMatrix(f64::INFINITY))?;
            for r in 0..n {
                if r == k {
                    continue;
                }
                let factor = &(a.get(r, k) * &piv_inv);
                if factor.max_abs() == 0.0 {
                    continue;
                }
                for c in k..n {
                    let upd = a.get(r, c) - &(factor * a.get(k, c));
                    a.set(r, c, upd);
                }
                for c in 0..b.cols {
                    let upd = b.get(r, c) - &(factor * b.get(k, c));
                    b.set(r, c, upd);
                }
            }
            // Normalize the pivot row so back substitution is a no-op.
            for c in k..n {
                let upd = a.get(k, c) * &piv_inv;
                a.set(k, c, upd);
            }
            for c in 0..b.cols {
                let upd = b.get(k, c) * &piv_inv;
                b.set(k, c, upd);
            }
            let _ = nv;
        }
        Ok(b)
    }

    pub fn inv(&self) -> Result<JetMatrix> {
        self.solve(&JetMatrix::identity(self.rows, self.nvars()))
    }

    /// Principal square root of a matrix whose value part is positive definite
    /// in the quadratic-form sense (its Hermitian part has positive spectrum).
    /// The input need not be Hermitian itself; the retraction feeds matrices
    /// that are self-adjoint only with respect to a varying metric.
    pub fn sqrt_pd(&self) -> Result<JetMatrix> {
        assert_eq!(self.rows, self.cols, "square root needs a square matrix");
        let vals = self.value_matrix();
        if !vals.hermitian_part_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        let half = C64::new(0.5, 0.0);
        let mut y = self.clone();
        let mut z = JetMatrix::identity(self.rows, self.nvars());
        for _ in 0..SQRT_MAX_ITER {
            let zi = z.inv().map_err(|_| Error::NoConvergence(SQRT_MAX_ITER))?;
            let yi = y.inv().map_err(|_| Error::NoConvergence(SQRT_MAX_ITER))?;
            let y_next = y.add(&zi).scale(half);
            let z_next = z.add(&yi).scale(half);
            if !y_next.is_finite() || !z_next.is_finite() {
                return Err(Error::NoConvergence(SQRT_MAX_ITER));
            }
            let mut delta: f64 = 0.0;
            for r in 0..self.rows {
                for c in 0..self.cols {
                    delta = delta
                        .max((y_next.get(r, c).value() - y.get(r, c).value()).norm());
                }
            }
            y = y_next;
            z = z_next;
            if delta < SQRT_STOP_TOL {
                return Ok(y);
            }
        }
        Err(Error::NoConvergence(SQRT_MAX_ITER))
    }
}

/// Plain complex matrix for value-level work.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| C64::new(0.0, 0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self.get(r, c) * v[c])
                    .sum::<C64>()
            })
            .collect()
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows);
        CMatrix::from_fn(self.rows, rhs.cols, |r, c| {
            (0..self.cols)
                .map(|k| self.get(r, k) * rhs.get(k, c))
                .sum()
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Gaussian elimination with partial pivoting; deterministic tie-breaks.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for k in 0..n {
            let mut best = k;
            let mut best_mag = a.get(k, k).norm();
            for r in (k + 1)..n {
                let mag = a.get(r, k).norm();
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            if best_mag < 1e-14 {
                return Err(Error::SingularMatrix(f64::INFINITY));
            }
            if best != k {
                for c in 0..n {
                    let t = a.get(k, c);
                    a.set(k, c, a.get(best, c));
                    a.set(best, c, t);
                }
                for c in 0..b.cols {
                    let t = b.get(k, c);
                    b.set(k, c, b.get(best, c));
                    b.set(best, c, t);
                }
            }
            let piv = a.get(k, k);
            for r in 0..n {
                if r == k {
                    continue;
                }
                let factor = a.get(r, k) / piv;
                if factor.norm() == 0.0 {
                    continue;
                }
                for c in k..n {
                    let upd = a.get(r, c) - factor * a.get(k, c);
                    a.set(r, c, upd);
                }
                for c in 0..b.cols {
                    let upd = b.get(r, c) - factor * b.get(k, c);
                    b.set(r, c, upd);
                }
            }
            for c in k..n {
                let upd = a.get(k, c) / piv;
                a.set(k, c, upd);
            }
            for c in 0..b.cols {
                let upd = b.get(k, c) / piv;
                b.set(k, c, upd);
            }
        }
        Ok(b)
    }

    pub fn inv(&self) -> Result<CMatrix> {
        self.solve(&CMatrix::identity(self.rows))
    }

    /// Determinant by partial-pivot elimination.
    pub fn det(&self) -> C64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = C64::new(1.0, 0.0);
        for k in 0..n {
            let mut best = k;
            let mut best_mag = a.get(k, k).norm();
            for r in (k + 1)..n {
                let mag = a.get(r, k).norm();
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            if best_mag == 0.0 {
                return C64::new(0.0, 0.0);
            }
            if best != k {
                for c in 0..n {
                    let t = a.get(k, c);
                    a.set(k, c, a.get(best, c));
                    a.set(best, c, t);
                }
                det = -det;
            }
            let piv = a.get(k, k);
            det *= piv;
            for r in (k + 1)..n {
                let f = a.get(r, k) / piv;
                if f.norm() == 0.0 {
                    continue;
                }
                for c in k..n {
                    let upd = a.get(r, c) - f * a.get(k, c);
                    a.set(r, c, upd);
                }
            }
        }
        det
    }

    /// Positive definiteness of the Hermitian part (M + M^H)/2, decided by a
    /// Cholesky attempt.
    pub fn hermitian_part_positive_definite(&self) -> bool {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let h = CMatrix::from_fn(n, n, |r, c| {
            (self.get(r, c) + self.get(c, r).conj()) * C64::new(0.5, 0.0)
        });
        let mut l = CMatrix::zero(n, n);
        for j in 0..n {
            let mut s = h.get(j, j).re;
            for k in 0..j {
                s -= l.get(j, k).norm_sqr();
            }
            // NaN pivots must also report failure.
            if s.is_nan() || s <= 0.0 {
                return false;
            }
            let d = s.sqrt();
            l.set(j, j, C64::new(d, 0.0));
            for r in (j + 1)..n {
                let mut v = h.get(r, j);
                for k in 0..j {
                    v -= l.get(r, k) * l.get(j, k).conj();
                }
                l.set(r, j, v / C64::new(d, 0.0));
            }
        }
        true
    }
}

/// Columns of `p` spanning its image, chosen by complete-pivoting elimination.
/// The pivot entry of largest magnitude wins each round; ties break toward
/// the lowest (row, column) index, so the selection is deterministic. Fails
/// with `RankMismatch` when the numerical rank differs from `expected_rank`.
pub fn projector_basis(p: &CMatrix, expected_rank: usize) -> Result<Vec<Vec<C64>>> {
    assert_eq!(p.rows(), p.cols(), "projector must be square");
    let n = p.rows();
    // Idempotency guard: catches callers handing in something that is not a
    // projector at all.
    let p2 = p.mul(p);
    let mut idem = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            idem = idem.max((p2.get(r, c) - p.get(r, c)).norm());
        }
    }
    if idem > 1e-10 {
        return Err(Error::RankMismatch {
            expected: expected_rank,
            found: usize::MAX,
        });
    }

    let tol = 1e-8 * p.max_abs().max(1.0);
    let mut work = p.clone();
    let mut used_rows = vec![false; n];
    let mut used_cols = vec![false; n];
    let mut picked = Vec::new();

    for _ in 0..expected_rank {
        let mut best: Option<(usize, usize)> = None;
        let mut best_mag = 0.0f64;
        for r in 0..n {
            if used_rows[r] {
                continue;
            }
            for c in 0..n {
                if used_cols[c] {
                    continue;
                }
                let mag = work.get(r, c).norm();
                if mag > best_mag {
                    best = Some((r, c));
                    best_mag = mag;
                }
            }
        }
        let (pr, pc) = match best {
            Some(rc) if best_mag >= tol => rc,
            _ => {
                return Err(Error::RankMismatch {
                    expected: expected_rank,
                    found: picked.len(),
                })
            }
        };
        picked.push(pc);
        used_rows[pr] = true;
        used_cols[pc] = true;
        let piv = work.get(pr, pc);
        for r in 0..n {
            if used_rows[r] {
                continue;
            }
            let f = work.get(r, pc) / piv;
            if f.norm() == 0.0 {
                continue;
            }
            for c in 0..n {
                if used_cols[c] {
                    continue;
                }
                let upd = work.get(r, c) - f * work.get(pr, c);
                work.set(r, c, upd);
            }
        }
    }

    // Anything left with weight above the threshold means the rank is larger
    // than requested.
    let mut leftover = 0.0f64;
    for r in 0..n {
        if used_rows[r] {
            continue;
        }
        for c in 0..n {
            if used_cols[c] {
                continue;
            }
            leftover = leftover.max(work.get(r, c).norm());
        }
    }
    if leftover >= tol {
        return Err(Error::RankMismatch {
            expected: expected_rank,
            found: expected_rank + 1,
        });
    }

    Ok(picked.iter().map(|&c| p.column(c)).collect())
}

/// Minimum-norm least-squares solution of a real system, via SVD with a
/// relative singular-value cutoff. Used by the frame constructions, whose
/// linear conditions are consistent but rank deficient.
pub fn lstsq_min_norm(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let rows = a.len();
    assert_eq!(rows, b.len());
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let m = nalgebra::DMatrix::from_fn(rows, cols, |r, c| a[r][c]);
    let rhs = nalgebra::DVector::from_fn(rows, |r, _| b[r]);
    let svd = m.svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let eps = 1e-12 * max_sv.max(1.0);
    let sol = svd
        .solve(&rhs, eps)
        .expect("svd solve cannot fail when factors are requested");
    sol.iter().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn const_mat(vals: &[&[f64]], nvars: usize) -> JetMatrix {
        JetMatrix::from_fn(vals.len(), vals[0].len(), |r, cc| {
            Jet2::constant(nvars, c(vals[r][cc]))
        })
    }

    #[test]
    fn inverse_of_constant_diagonal() {
        let m = const_mat(&[&[2.0, 0.0], &[0.0, 4.0]], 2);
        let inv = m.inv().unwrap();
        assert!((inv.get(0, 0).value() - c(0.5)).norm() < 1e-14);
        assert!((inv.get(1, 1).value() - c(0.25)).norm() < 1e-14);
        assert!(inv.get(0, 1).max_abs() < 1e-14);
    }

    #[test]
    fn inverse_with_jet_entries_squares_back() {
        let x = Jet2::var(2, 0, 0.3);
        let y = Jet2::var(2, 1, -0.2);
        let one = Jet2::constant(2, c(1.0));
        let m = JetMatrix::from_fn(2, 2, |r, cc| match (r, cc) {
            (0, 0) => &one + &(&x * &x),
            (0, 1) | (1, 0) => y.clone(),
            _ => &one + &(&y * &y),
        });
        let inv = m.inv().unwrap();
        let prod = m.mul(&inv);
        let res = prod.sub(&JetMatrix::identity(2, 2));
        assert!(res.max_abs() < 1e-11, "residual {}", res.max_abs());
    }

    #[test]
    fn singular_matrix_detected() {
        let m = const_mat(&[&[1.0, 2.0], &[2.0, 4.0]], 2);
        assert!(matches!(m.inv(), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn sqrt_of_diagonal() {
        let m = const_mat(&[&[4.0, 0.0], &[0.0, 9.0]], 2);
        let s = m.sqrt_pd().unwrap();
        assert!((s.get(0, 0).value() - c(2.0)).norm() < 1e-12);
        assert!((s.get(1, 1).value() - c(3.0)).norm() < 1e-12);
        assert!(s.get(0, 1).max_abs() < 1e-12);
    }

    #[test]
    fn sqrt_with_jets_squares_back_and_commutes() {
        let x = Jet2::var(2, 0, 0.25);
        let y = Jet2::var(2, 1, -0.1);
        let m = JetMatrix::from_fn(2, 2, |r, cc| match (r, cc) {
            (0, 0) => &Jet2::constant(2, c(2.0)) + &x,
            (0, 1) | (1, 0) => y.clone(),
            _ => &Jet2::constant(2, c(1.5)) - &x,
        });
        let s = m.sqrt_pd().unwrap();
        let back = s.mul(&s).sub(&m);
        assert!(back.max_abs() < 1e-10, "square-back {}", back.max_abs());
        let comm = s.mul(&m).sub(&m.mul(&s));
        assert!(comm.max_abs() < 1e-9, "commutator {}", comm.max_abs());
    }

    #[test]
    fn sqrt_rejects_indefinite_input() {
        let m = const_mat(&[&[-1.0, 0.0], &[0.0, 1.0]], 2);
        assert!(matches!(m.sqrt_pd(), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn projector_basis_diagonal() {
        let p = CMatrix::from_fn(2, 2, |r, cc| {
            if r == 0 && cc == 0 {
                c(1.0)
            } else {
                c(0.0)
            }
        });
        let basis = projector_basis(&p, 1).unwrap();
        assert_eq!(basis.len(), 1);
        assert!((basis[0][0] - c(1.0)).norm() < 1e-14);
        assert!(basis[0][1].norm() < 1e-14);
    }

    #[test]
    fn projector_basis_standard_complex_structure() {
        // P = (Id - i J0)/2 for the standard structure on R^2 picks a column
        // proportional to (1, -i).
        let j0 = CMatrix::from_fn(2, 2, |r, cc| match (r, cc) {
            (0, 1) => c(-1.0),
            (1, 0) => c(1.0),
            _ => c(0.0),
        });
        let i = C64::new(0.0, 1.0);
        let p = CMatrix::from_fn(2, 2, |r, cc| {
            let id = if r == cc { c(1.0) } else { c(0.0) };
            (id - i * j0.get(r, cc)) * c(0.5)
        });
        let basis = projector_basis(&p, 1).unwrap();
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        // v[1]/v[0] should be -i.
        let ratio = v[1] / v[0];
        assert!((ratio - C64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn projector_basis_rank_mismatch() {
        let p = CMatrix::identity(2);
        assert!(matches!(
            projector_basis(&p, 1),
            Err(Error::RankMismatch { .. })
        ));
    }

    #[test]
    fn projector_basis_gram_determinant_bounded() {
        let j0 = CMatrix::from_fn(4, 4, |r, cc| match (r, cc) {
            (0, 1) | (2, 3) => c(-1.0),
            (1, 0) | (3, 2) => c(1.0),
            _ => c(0.0),
        });
        let i = C64::new(0.0, 1.0);
        let p = CMatrix::from_fn(4, 4, |r, cc| {
            let id = if r == cc { c(1.0) } else { c(0.0) };
            (id - i * j0.get(r, cc)) * c(0.5)
        });
        let basis = projector_basis(&p, 2).unwrap();
        // Hermitian Gram determinant of the chosen columns stays away from 0.
        let g = CMatrix::from_fn(2, 2, |r, cc| {
            basis[r]
                .iter()
                .zip(&basis[cc])
                .map(|(a, b)| a * b.conj())
                .sum()
        });
        let det = g.get(0, 0) * g.get(1, 1) - g.get(0, 1) * g.get(1, 0);
        assert!(det.norm() > 1e-8);
    }

    #[test]
    fn min_norm_least_squares_underdetermined() {
        // x + y = 2 has min-norm solution (1, 1).
        let a = vec![vec![1.0, 1.0]];
        let b = vec![2.0];
        let x = lstsq_min_norm(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-10);
        assert!((x[1] - 1.0).abs() < 1e-10);
    }
}
