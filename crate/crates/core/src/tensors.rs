//! Structure tensors of a calibrated chart point and the identities tying
//! them together: the integrability obstruction N, the covariant derivative
//! of J, the tensor B built from both, and the covariant derivative of B.
//!
//! Index layout follows the component rules
//!   N^c_ab  = J^e_a d_e J^c_b - J^e_b d_e J^c_a + J^c_e (d_b J^e_a - d_a J^e_b),
//!   (D_a J)^c_b = d_a J^c_b + G^c_ad J^d_b - G^d_ab J^c_d,
//!   B^c_ab  = J^c_d (D_a J)^d_b - J^d_a (D_d J)^c_b,
//! with Tensor3 storage get(component, first lower, second lower).

use crate::error::{Error, Result};
use crate::geometry::{ChartPoint, ChartedStructure, Tensor3};
use crate::jets::{C64, Jet1};
use crate::poly::PolyVectorField;

/// Pointwise type-purity gate for field-based identities.
pub const TYPE_PURITY_TOL: f64 = 1e-9;

fn cvec_zero(m: usize) -> Vec<C64> {
    vec![C64::new(0.0, 0.0); m]
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// N, the covariant derivative of J, and B, all evaluated at one point.
/// The jet-valued tensors keep first derivatives so they can feed covariant
/// derivatives of B.
pub struct AcTensors {
    m: usize,
    nabla_j: Tensor3,
    b: Tensor3,
    nijenhuis: Vec<C64>,
}

impl AcTensors {
    pub fn new(pt: &ChartPoint) -> Self {
        let m = pt.dim();
        let j = pt.j_mat();
        let gamma = pt.gamma();
        let j1_store: Vec<Jet1> = (0..m * m).map(|k| j.get(k / m, k % m).truncate()).collect();
        let j1 = |c: usize, b: usize| &j1_store[c * m + b];

        let nabla_j = Tensor3::from_fn(m, |c, a, b| {
            let mut acc = j.get(c, b).deriv(a);
            for d in 0..m {
                acc = &acc + &(gamma.get(c, a, d) * j1(d, b));
                acc = &acc - &(gamma.get(d, a, b) * j1(c, d));
            }
            acc
        });

        let b = Tensor3::from_fn(m, |c, a, b| {
            let mut acc = Jet1::zero(m);
            for d in 0..m {
                acc = &acc + &(j1(c, d) * nabla_j.get(d, a, b));
                acc = &acc - &(j1(d, a) * nabla_j.get(c, d, b));
            }
            acc
        });

        let mut nijenhuis = cvec_zero(m * m * m);
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut v = C64::new(0.0, 0.0);
                    for e in 0..m {
                        v += j.get(e, a).value() * j.get(c, b).grad(e)
                            - j.get(e, b).value() * j.get(c, a).grad(e)
                            + j.get(c, e).value() * (j.get(e, a).grad(b) - j.get(e, b).grad(a));
                    }
                    nijenhuis[(c * m + a) * m + b] = v;
                }
            }
        }

        AcTensors {
            m,
            nabla_j,
            b,
            nijenhuis,
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn nabla_j(&self) -> &Tensor3 {
        &self.nabla_j
    }

    pub fn b(&self) -> &Tensor3 {
        &self.b
    }

    pub fn nijenhuis_comp(&self, c: usize, a: usize, b: usize) -> C64 {
        self.nijenhuis[(c * self.m + a) * self.m + b]
    }

    pub fn nijenhuis_apply(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let m = self.m;
        let mut out = cvec_zero(m);
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    out[c] += self.nijenhuis_comp(c, a, b) * x[a] * y[b];
                }
            }
        }
        out
    }

    /// (D_u J) y at value level.
    pub fn nabla_j_apply(&self, u: &[C64], y: &[C64]) -> Vec<C64> {
        let m = self.m;
        let mut out = cvec_zero(m);
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    out[c] += self.nabla_j.get(c, a, b).value() * u[a] * y[b];
                }
            }
        }
        out
    }

    pub fn b_apply(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let m = self.m;
        let mut out = cvec_zero(m);
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    out[c] += self.b.get(c, a, b).value() * x[a] * y[b];
                }
            }
        }
        out
    }

    /// B(W, H) for jet-valued arguments, keeping first derivatives.
    pub fn b_field_jet1(&self, w: &[Jet1], h: &[Jet1]) -> Vec<Jet1> {
        let m = self.m;
        (0..m)
            .map(|c| {
                let mut acc = Jet1::zero(m);
                for a in 0..m {
                    for b in 0..m {
                        acc = &acc + &(&(self.b.get(c, a, b) * &w[a]) * &h[b]);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn max_nijenhuis(&self) -> f64 {
        max_norm(&self.nijenhuis)
    }

    pub fn max_b_value(&self) -> f64 {
        let m = self.m;
        let mut worst: f64 = 0.0;
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    worst = worst.max(self.b.get(c, a, b).value().norm());
                }
            }
        }
        worst
    }

    pub fn max_nabla_j_value(&self) -> f64 {
        let m = self.m;
        let mut worst: f64 = 0.0;
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    worst = worst.max(self.nabla_j.get(c, a, b).value().norm());
                }
            }
        }
        worst
    }
}

/// Left minus right of the full compatibility identity
///   2 g((D_X J) Y, Z) = dk(X, JY, JZ) - dk(X, Y, Z) + g(N(Y, Z), JX),
/// valid on any chart, closed form or not.
pub fn hermitian_relation_residual(
    pt: &ChartPoint,
    t: &AcTensors,
    x: &[C64],
    y: &[C64],
    z: &[C64],
) -> C64 {
    let lhs = pt.g_pair_values(&t.nabla_j_apply(x, y), z) * C64::new(2.0, 0.0);
    let jy = pt.j_apply(y);
    let jz = pt.j_apply(z);
    let jx = pt.j_apply(x);
    let n_yz = t.nijenhuis_apply(y, z);
    let rhs = pt.dkappa_eval(x, &jy, &jz) - pt.dkappa_eval(x, y, z) + pt.g_pair_values(&n_yz, &jx);
    lhs - rhs
}

/// Left minus right of the closed-form specialization
///   2 g((D_X J) Y, Z) = g(N(Y, Z), JX).
pub fn closed_form_relation_residual(
    pt: &ChartPoint,
    t: &AcTensors,
    x: &[C64],
    y: &[C64],
    z: &[C64],
) -> C64 {
    let lhs = pt.g_pair_values(&t.nabla_j_apply(x, y), z) * C64::new(2.0, 0.0);
    let jx = pt.j_apply(x);
    let n_yz = t.nijenhuis_apply(y, z);
    lhs - pt.g_pair_values(&n_yz, &jx)
}

/// (D_u B)(X, Y) from the component rule
///   u^e d_e B^c_ab + u^e G^c_ed B^d_ab - u^e G^d_ea B^c_db - u^e G^d_eb B^c_ad.
pub fn nabla_b(pt: &ChartPoint, t: &AcTensors, u: &[C64], x: &[C64], y: &[C64]) -> Vec<C64> {
    let m = pt.dim();
    let gamma = pt.gamma();

    let mut out = cvec_zero(m);
    for c in 0..m {
        for a in 0..m {
            for b in 0..m {
                let mut dv = C64::new(0.0, 0.0);
                for e in 0..m {
                    dv += u[e] * t.b.get(c, a, b).grad(e);
                }
                out[c] += dv * x[a] * y[b];
            }
        }
    }

    let bxy = t.b_apply(x, y);
    for c in 0..m {
        for e in 0..m {
            for d in 0..m {
                out[c] += u[e] * gamma.get(c, e, d).value() * bxy[d];
            }
        }
    }

    let shift = |w: &[C64]| -> Vec<C64> {
        let mut v = cvec_zero(m);
        for d in 0..m {
            for e in 0..m {
                for a in 0..m {
                    v[d] += u[e] * gamma.get(d, e, a).value() * w[a];
                }
            }
        }
        v
    };
    let bx = t.b_apply(&shift(x), y);
    let by = t.b_apply(x, &shift(y));
    for c in 0..m {
        out[c] -= bx[c] + by[c];
    }
    out
}

/// (D B) with the direction projected to its (0,1) part first.
pub fn nabla_pp_b(pt: &ChartPoint, t: &AcTensors, u: &[C64], x: &[C64], y: &[C64]) -> Vec<C64> {
    let u01 = pt.proj01(u);
    nabla_b(pt, t, &u01, x, y)
}

fn require_type10(pt: &ChartPoint, field: &PolyVectorField) -> Result<Vec<C64>> {
    let vals = field.eval_values(pt.x());
    let defect = max_norm(&pt.proj01(&vals));
    if defect > TYPE_PURITY_TOL {
        return Err(Error::NotType10(defect));
    }
    Ok(vals)
}

/// Residual of the curvature expansion of half the (0,1)-direction
/// derivative of B on type (1,0) fields Z, W, H:
///   (1/2)(D_Zbar B)(W, H)
///     - [ R(Zbar, W) H
///         + i D_Zbar (J D_W H)
///         - i J D_W D_Zbar H
///         - i J D_{D_Zbar W} H
///         - D_{D_W Zbar} H ].
/// The first term expands through the Leibniz rule as
/// D_Zbar(B(W, H)) - B(D_Zbar W, H) - B(W, D_Zbar H), and the J inside
/// the second right-hand term rides along under the derivative as part of
/// the composite field J D_W H. Every term is an honest field evaluation,
/// so the residual must vanish on every symplectic chart regardless of
/// integrability or curvature.
pub fn lemma3_identity_residual(
    chart: &ChartedStructure,
    x: &[f64],
    z: &PolyVectorField,
    w: &PolyVectorField,
    h: &PolyVectorField,
) -> Result<Vec<C64>> {
    let pt = chart.at(x)?;
    let t = AcTensors::new(&pt);
    let m = pt.dim();
    let i = C64::new(0.0, 1.0);

    let zv = require_type10(&pt, z)?;
    let wv = require_type10(&pt, w)?;
    let hv = require_type10(&pt, h)?;
    let zbar_vals: Vec<C64> = zv.iter().map(|c| c.conj()).collect();
    let zbar_field = z.conj();

    let wj1: Vec<Jet1> = w.eval_jets(x).iter().map(|j| j.truncate()).collect();
    let hj1: Vec<Jet1> = h.eval_jets(x).iter().map(|j| j.truncate()).collect();

    // Left side.
    let bwh = t.b_field_jet1(&wj1, &hj1);
    let d_bwh = pt.cov_jet1(&zbar_vals, &bwh);
    let nzw = pt.cov_vec(&zbar_vals, w);
    let nzh = pt.cov_vec(&zbar_vals, h);
    let b_nzw_h = t.b_apply(&nzw, &hv);
    let b_w_nzh = t.b_apply(&wv, &nzh);
    let half = C64::new(0.5, 0.0);
    let lhs: Vec<C64> = (0..m)
        .map(|c| (d_bwh[c] - b_nzw_h[c] - b_w_nzh[c]) * half)
        .collect();

    // Right side, term by term.
    let r1 = pt.curvature_apply(&zbar_vals, &wv, &hv);

    let nwh = pt.cov_field(w, h);
    let j_nwh: Vec<Jet1> = (0..m)
        .map(|c| {
            let mut acc = Jet1::zero(m);
            for d in 0..m {
                acc = &acc + &(&pt.j_mat().get(c, d).truncate() * &nwh[d]);
            }
            acc
        })
        .collect();
    let r2: Vec<C64> = pt
        .cov_jet1(&zbar_vals, &j_nwh)
        .into_iter()
        .map(|v| v * i)
        .collect();

    let nzh_field = pt.cov_field(&zbar_field, h);
    let w_nzh = pt.cov_jet1(&wv, &nzh_field);
    let r3: Vec<C64> = pt.j_apply(&w_nzh).into_iter().map(|v| v * (-i)).collect();

    let n_nzw_h = pt.cov_vec(&nzw, h);
    let r4: Vec<C64> = pt.j_apply(&n_nzw_h).into_iter().map(|v| v * (-i)).collect();

    let nwz_bar = pt.cov_vec(&wv, &zbar_field);
    let r5: Vec<C64> = pt
        .cov_vec(&nwz_bar, h)
        .into_iter()
        .map(|v| -v)
        .collect();

    Ok((0..m)
        .map(|c| lhs[c] - (r1[c] + r2[c] + r3[c] + r4[c] + r5[c]))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorKind {
    Nijenhuis,
    NablaJ,
    BTensor,
    NablaB,
    Curvature,
}

/// Component snapshot of one tensor at one point, row-major over `dims`.
pub struct TensorValue {
    pub kind: TensorKind,
    pub base_point: Vec<f64>,
    pub dims: Vec<usize>,
    pub components: Vec<C64>,
}

impl TensorValue {
    pub fn get(&self, idx: &[usize]) -> C64 {
        assert_eq!(idx.len(), self.dims.len());
        let mut flat = 0;
        for (i, d) in idx.iter().zip(&self.dims) {
            assert!(i < d);
            flat = flat * d + i;
        }
        self.components[flat]
    }

    pub fn max_abs(&self) -> f64 {
        max_norm(&self.components)
    }
}

pub fn nijenhuis_components(pt: &ChartPoint, t: &AcTensors) -> TensorValue {
    let m = pt.dim();
    TensorValue {
        kind: TensorKind::Nijenhuis,
        base_point: pt.x().to_vec(),
        dims: vec![m, m, m],
        components: (0..m * m * m)
            .map(|k| t.nijenhuis_comp(k / (m * m), (k / m) % m, k % m))
            .collect(),
    }
}

pub fn b_components(pt: &ChartPoint, t: &AcTensors) -> TensorValue {
    let m = pt.dim();
    TensorValue {
        kind: TensorKind::BTensor,
        base_point: pt.x().to_vec(),
        dims: vec![m, m, m],
        components: (0..m * m * m)
            .map(|k| t.b.get(k / (m * m), (k / m) % m, k % m).value())
            .collect(),
    }
}

pub fn nabla_j_components(pt: &ChartPoint, t: &AcTensors) -> TensorValue {
    let m = pt.dim();
    TensorValue {
        kind: TensorKind::NablaJ,
        base_point: pt.x().to_vec(),
        dims: vec![m, m, m],
        components: (0..m * m * m)
            .map(|k| t.nabla_j.get(k / (m * m), (k / m) % m, k % m).value())
            .collect(),
    }
}

/// Full (D_e B)^c_ab as a 4-index snapshot, directions in the second slot.
pub fn nabla_b_components(pt: &ChartPoint, t: &AcTensors) -> TensorValue {
    let m = pt.dim();
    let gamma = pt.gamma();
    let mut components = cvec_zero(m * m * m * m);
    for c in 0..m {
        for e in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut v = t.b.get(c, a, b).grad(e);
                    for d in 0..m {
                        v += gamma.get(c, e, d).value() * t.b.get(d, a, b).value()
                            - gamma.get(d, e, a).value() * t.b.get(c, d, b).value()
                            - gamma.get(d, e, b).value() * t.b.get(c, a, d).value();
                    }
                    components[((c * m + e) * m + a) * m + b] = v;
                }
            }
        }
    }
    TensorValue {
        kind: TensorKind::NablaB,
        base_point: pt.x().to_vec(),
        dims: vec![m, m, m, m],
        components,
    }
}

pub fn curvature_components(pt: &ChartPoint) -> TensorValue {
    let m = pt.dim();
    let mut components = cvec_zero(m * m * m * m);
    for d in 0..m {
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    components[((d * m + c) * m + a) * m + b] = pt.riemann(d, c, a, b);
                }
            }
        }
    }
    TensorValue {
        kind: TensorKind::Curvature,
        base_point: pt.x().to_vec(),
        dims: vec![m, m, m, m],
        components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::builtin;
    use crate::sampling;

    fn rand_cvec(rng: &mut rand_chacha::ChaCha8Rng, m: usize) -> Vec<C64> {
        sampling::random_complex_vec(rng, m, 1.0)
    }

    #[test]
    fn flat_chart_has_no_structure_tensors() {
        let chart = builtin("flat_c2").unwrap();
        let pt = chart.at(&[0.3, -0.2, 0.1, 0.4]).unwrap();
        let t = AcTensors::new(&pt);
        assert!(t.max_nijenhuis() < 1e-14);
        assert!(t.max_b_value() < 1e-14);
        assert!(t.max_nabla_j_value() < 1e-14);
    }

    #[test]
    fn potential_chart_is_parallel_but_curved() {
        let chart = builtin("kahler_potential_c1").unwrap();
        let pt = chart.at(&[0.4, -0.3]).unwrap();
        let t = AcTensors::new(&pt);
        assert!(t.max_nijenhuis() < 1e-10, "{}", t.max_nijenhuis());
        assert!(t.max_nabla_j_value() < 1e-10, "{}", t.max_nabla_j_value());
        assert!(t.max_b_value() < 1e-10, "{}", t.max_b_value());
        let r = curvature_components(&pt);
        assert!(r.max_abs() > 1e-3, "curvature {}", r.max_abs());
    }

    #[test]
    fn perturbed_chart_is_visibly_nonintegrable() {
        let chart = builtin("perturbed_c2").unwrap();
        let pts = sampling::sample_points(chart.domain(), 40, 9);
        let mut worst: f64 = 0.0;
        for x in &pts {
            let pt = chart.at(x).unwrap();
            let t = AcTensors::new(&pt);
            worst = worst.max(t.max_nijenhuis());
        }
        assert!(worst > 1e-3, "max Nijenhuis over samples {worst}");
    }

    #[test]
    fn nijenhuis_antisymmetry_and_b_skew_relation() {
        let chart = builtin("perturbed_c2").unwrap();
        let pt = chart.at(&[0.2, 0.1, -0.3, 0.25]).unwrap();
        let t = AcTensors::new(&pt);
        let mut rng = sampling::rng_for(17, "tensor-skew");
        for _ in 0..10 {
            let x = rand_cvec(&mut rng, 4);
            let y = rand_cvec(&mut rng, 4);
            let nxy = t.nijenhuis_apply(&x, &y);
            let nyx = t.nijenhuis_apply(&y, &x);
            let bxy = t.b_apply(&x, &y);
            let byx = t.b_apply(&y, &x);
            for c in 0..4 {
                assert!((nxy[c] + nyx[c]).norm() < 1e-12);
                // B(X, Y) - B(Y, X) = -N(X, Y).
                assert!((bxy[c] - byx[c] + nxy[c]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn compatibility_identity_holds_even_without_closedness() {
        for name in ["perturbed_c2", "nonclosed_control_c2", "kahler_potential_c2"] {
            let chart = builtin(name).unwrap();
            let pts = sampling::sample_points(chart.domain(), 10, 23);
            for (idx, xpt) in pts.iter().enumerate() {
                let pt = chart.at(xpt).unwrap();
                let t = AcTensors::new(&pt);
                let mut rng = sampling::point_rng(23, "eq-one", idx);
                let x = rand_cvec(&mut rng, 4);
                let y = rand_cvec(&mut rng, 4);
                let z = rand_cvec(&mut rng, 4);
                let r = hermitian_relation_residual(&pt, &t, &x, &y, &z);
                assert!(r.norm() < 1e-9, "{name}: {}", r.norm());
            }
        }
    }

    #[test]
    fn closed_form_relation_needs_closedness() {
        let chart = builtin("perturbed_c2").unwrap();
        let pt = chart.at(&[0.2, -0.1, 0.3, 0.1]).unwrap();
        let t = AcTensors::new(&pt);
        let mut rng = sampling::rng_for(5, "eq-two");
        for _ in 0..10 {
            let x = rand_cvec(&mut rng, 4);
            let y = rand_cvec(&mut rng, 4);
            let z = rand_cvec(&mut rng, 4);
            let r = closed_form_relation_residual(&pt, &t, &x, &y, &z);
            assert!(r.norm() < 1e-9, "{}", r.norm());
        }

        // On the non-closed control the specialization must break.
        let chart = builtin("nonclosed_control_c2").unwrap();
        let pt = chart.at(&[0.3, 0.2, -0.2, 0.4]).unwrap();
        let t = AcTensors::new(&pt);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let x = rand_cvec(&mut rng, 4);
            let y = rand_cvec(&mut rng, 4);
            let z = rand_cvec(&mut rng, 4);
            worst = worst.max(closed_form_relation_residual(&pt, &t, &x, &y, &z).norm());
        }
        assert!(worst > 1e-3, "specialization should fail, worst {worst}");
    }

    #[test]
    fn mixed_type_arguments_annihilate_n_and_b() {
        let chart = builtin("perturbed_c2").unwrap();
        let pt = chart.at(&[0.15, 0.2, 0.1, -0.3]).unwrap();
        let t = AcTensors::new(&pt);
        let mut rng = sampling::rng_for(31, "mixed-types");
        for _ in 0..10 {
            let z1 = pt.proj10(&rand_cvec(&mut rng, 4));
            let z2bar = pt.proj01(&rand_cvec(&mut rng, 4));
            let n = t.nijenhuis_apply(&z1, &z2bar);
            let b = t.b_apply(&z1, &z2bar);
            let b_rev = t.b_apply(&z2bar, &z1);
            assert!(max_norm(&n) < 1e-10, "{}", max_norm(&n));
            assert!(max_norm(&b) < 1e-10, "{}", max_norm(&b));
            assert!(max_norm(&b_rev) < 1e-10, "{}", max_norm(&b_rev));
        }
    }

    #[test]
    fn b_lands_in_type_01_and_matches_projected_derivative() {
        let chart = builtin("perturbed_c2").unwrap();
        let pt = chart.at(&[0.1, -0.2, 0.2, 0.3]).unwrap();
        let t = AcTensors::new(&pt);
        let mut rng = sampling::rng_for(41, "b-type");
        for _ in 0..6 {
            let z1 = pt.proj10(&rand_cvec(&mut rng, 4));
            let v2 = rand_cvec(&mut rng, 4);
            let z2vals = pt.proj10(&v2);
            let b = t.b_apply(&z1, &z2vals);
            assert!(max_norm(&pt.proj10(&b)) < 1e-10, "B not (0,1)");

            // B(Z1, Z2) = 2 D_{Z1} Z2 + 2i J D_{Z1} Z2 for a field Z2 that
            // stays (1,0) pointwise near the base point.
            let z2_field = pt.taylor_field_10(&v2);
            let dz = pt.cov_vec(&z1, &z2_field);
            let jdz = pt.j_apply(&dz);
            let i = C64::new(0.0, 1.0);
            for c in 0..4 {
                let want = C64::new(2.0, 0.0) * dz[c] + C64::new(2.0, 0.0) * i * jdz[c];
                assert!((b[c] - want).norm() < 1e-9, "{}", (b[c] - want).norm());
            }
        }
    }

    #[test]
    fn n_and_b_are_tensorial_under_scalar_rescaling() {
        let chart = builtin("perturbed_c2").unwrap();
        let pt = chart.at(&[0.2, 0.2, -0.1, 0.1]).unwrap();
        let t = AcTensors::new(&pt);
        let mut rng = sampling::rng_for(53, "tensoriality");
        let x = rand_cvec(&mut rng, 4);
        let y = rand_cvec(&mut rng, 4);
        let s = C64::new(0.7, -1.3);
        let xs: Vec<C64> = x.iter().map(|v| v * s).collect();
        let n1 = t.nijenhuis_apply(&xs, &y);
        let n2 = t.nijenhuis_apply(&x, &y);
        let b1 = t.b_apply(&xs, &y);
        let b2 = t.b_apply(&x, &y);
        for c in 0..4 {
            assert!((n1[c] - s * n2[c]).norm() < 1e-12);
            assert!((b1[c] - s * b2[c]).norm() < 1e-12);
        }
    }

    #[test]
    fn nabla_b_is_linear_in_direction_and_matches_leibniz() {
        let chart = builtin("perturbed_c2").unwrap();
        let x0 = [0.2, -0.15, 0.1, 0.3];
        let pt = chart.at(&x0).unwrap();
        let t = AcTensors::new(&pt);
        let mut rng = sampling::rng_for(67, "nabla-b");
        let u = rand_cvec(&mut rng, 4);
        let xv = rand_cvec(&mut rng, 4);
        let yv = rand_cvec(&mut rng, 4);

        let two = C64::new(2.0, 0.0);
        let u2: Vec<C64> = u.iter().map(|v| v * two).collect();
        let d1 = nabla_b(&pt, &t, &u2, &xv, &yv);
        let d2 = nabla_b(&pt, &t, &u, &xv, &yv);
        for c in 0..4 {
            assert!((d1[c] - two * d2[c]).norm() < 1e-12);
        }

        // Leibniz oracle: random polynomial extensions of X and Y.
        let xf = random_linear_field(&mut rng, &x0, &xv);
        let yf = random_linear_field(&mut rng, &x0, &yv);
        let xj: Vec<Jet1> = xf.eval_jets(&x0).iter().map(|j| j.truncate()).collect();
        let yj: Vec<Jet1> = yf.eval_jets(&x0).iter().map(|j| j.truncate()).collect();
        let bxy = t.b_field_jet1(&xj, &yj);
        let d_bxy = pt.cov_jet1(&u, &bxy);
        let ndx = pt.cov_vec(&u, &xf);
        let ndy = pt.cov_vec(&u, &yf);
        let b_ndx_y = t.b_apply(&ndx, &yv);
        let b_x_ndy = t.b_apply(&xv, &ndy);
        for c in 0..4 {
            let via_fields = d_bxy[c] - b_ndx_y[c] - b_x_ndy[c];
            assert!(
                (via_fields - d2[c]).norm() < 1e-8,
                "{}",
                (via_fields - d2[c]).norm()
            );
        }
    }

    fn random_linear_field(
        rng: &mut rand_chacha::ChaCha8Rng,
        base: &[f64],
        value: &[C64],
    ) -> PolyVectorField {
        let m = base.len();
        let comps: Vec<crate::poly::MultiPoly> = (0..m)
            .map(|c| {
                let mut p = crate::poly::MultiPoly::constant(m, value[c]);
                for a in 0..m {
                    let coeff = sampling::random_complex_vec(rng, 1, 0.5)[0];
                    let mut expn = vec![0u32; m];
                    expn[a] = 1;
                    p.add_term(&expn, coeff);
                }
                p
            })
            .collect();
        PolyVectorField::new(base.to_vec(), comps)
    }

    #[test]
    fn projected_direction_derivative_vanishes_for_type10_direction() {
        let chart = builtin("perturbed_c2").unwrap();
        let pt = chart.at(&[0.1, 0.1, 0.2, -0.2]).unwrap();
        let t = AcTensors::new(&pt);
        let mut rng = sampling::rng_for(71, "pp-b");
        let u10 = pt.proj10(&rand_cvec(&mut rng, 4));
        let xv = rand_cvec(&mut rng, 4);
        let yv = rand_cvec(&mut rng, 4);
        let d = nabla_pp_b(&pt, &t, &u10, &xv, &yv);
        assert!(max_norm(&d) < 1e-12);
    }

    #[test]
    fn lemma_identity_residual_vanishes_on_all_symplectic_charts() {
        for name in ["flat_c2", "kahler_potential_c2", "perturbed_c2"] {
            let chart = builtin(name).unwrap();
            let pts = sampling::sample_points(chart.domain(), 5, 77);
            for (idx, x0) in pts.iter().enumerate() {
                let pt = chart.at(x0).unwrap();
                let mut rng = sampling::point_rng(77, "lemma-three", idx);
                let z = pt.taylor_field_10(&rand_cvec(&mut rng, 4));
                let w = pt.taylor_field_10(&rand_cvec(&mut rng, 4));
                let h = pt.taylor_field_10(&rand_cvec(&mut rng, 4));
                let r = lemma3_identity_residual(&chart, x0, &z, &w, &h).unwrap();
                assert!(max_norm(&r) < 1e-8, "{name}: {}", max_norm(&r));
            }
        }
    }

    #[test]
    fn lemma_identity_rejects_wrong_type_inputs() {
        let chart = builtin("flat_c2").unwrap();
        let pt = chart.at(&[0.0; 4]).unwrap();
        let mut rng = sampling::rng_for(3, "lemma-reject");
        let good = pt.taylor_field_10(&rand_cvec(&mut rng, 4));
        let bad = good.conj();
        match lemma3_identity_residual(&chart, &[0.0; 4], &bad, &good, &good) {
            Err(Error::NotType10(_)) => {}
            other => panic!("expected type rejection, got {:?}", other.map(|_| ())),
        }
    }
}
