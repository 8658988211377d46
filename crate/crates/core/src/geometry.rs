//! Charts carrying an almost-Kähler structure and the pointwise geometry
//! derived from it.
//!
//! A chart is an open box in R^(2n) with two jet-valued providers: the
//! symplectic form kappa_ab and the almost complex structure J^a_b. The
//! calibrated metric is g(X, Y) = kappa(JX, Y), i.e. g_ab = kappa_cb J^c_a;
//! the first slot carries J, and positive definiteness of g is part of chart
//! validation rather than an assumption.
//!
//! Sign conventions fixed here and relied on everywhere else:
//!   - type (1,0) vectors are the +i eigenvectors of J, with projector
//!     P^(1,0) = (Id - iJ)/2;
//!   - curvature is R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y];
//!   - the exterior derivative of a 2-form is the plain cyclic sum
//!     (d kappa)_abc = d_a kappa_bc + d_b kappa_ca + d_c kappa_ab.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet_linalg::{CMatrix, JetMatrix};
use crate::jets::{C64, Jet1, Jet2};
use crate::poly::PolyVectorField;
use crate::sampling;

/// Jet-valued matrix field over the chart.
pub type Provider = Arc<dyn Fn(&[f64]) -> Result<JetMatrix> + Send + Sync>;

/// Determinant floor for the non-degeneracy invariant.
pub const KAPPA_DET_FLOOR: f64 = 1e-6;

/// How a chart was built; drives which consistency probes expect zero and
/// which expect a visible signal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChartClass {
    /// Constant standard structure.
    Flat,
    /// Closed form from a potential, constant standard J; integrable.
    KahlerPotential,
    /// J produced by the polar retraction from an auxiliary metric.
    Retraction { integrable: Option<bool> },
    /// Both kappa and J supplied explicitly.
    Explicit { integrable: Option<bool> },
    /// Deliberately non-closed kappa; only structural checks and negative
    /// controls admit it.
    NonclosedControl,
}

impl ChartClass {
    pub fn closed_kappa(&self) -> bool {
        !matches!(self, ChartClass::NonclosedControl)
    }

    /// Whether the structure is known to be integrable (None = undetermined).
    pub fn integrable_hint(&self) -> Option<bool> {
        match self {
            ChartClass::Flat | ChartClass::KahlerPotential => Some(true),
            ChartClass::Retraction { integrable } | ChartClass::Explicit { integrable } => {
                *integrable
            }
            ChartClass::NonclosedControl => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ChartClass::Flat => "FLAT",
            ChartClass::KahlerPotential => "KAHLER_POTENTIAL",
            ChartClass::Retraction { .. } => "RETRACTION",
            ChartClass::Explicit { .. } => "EXPLICIT",
            ChartClass::NonclosedControl => "NONCLOSED_CONTROL",
        }
    }
}

/// Symplectic chart with a calibrated almost complex structure.
#[derive(Clone)]
pub struct ChartedStructure {
    name: String,
    n: usize,
    domain: Vec<(f64, f64)>,
    class: ChartClass,
    kappa: Provider,
    j: Provider,
}

impl ChartedStructure {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        domain: Vec<(f64, f64)>,
        class: ChartClass,
        kappa: Provider,
        j: Provider,
    ) -> Self {
        assert!(n >= 1);
        assert_eq!(domain.len(), 2 * n, "domain box needs 2n intervals");
        for (lo, hi) in &domain {
            assert!(lo < hi, "empty domain interval");
        }
        ChartedStructure {
            name: name.into(),
            n,
            domain,
            class,
            kappa,
            j,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn class(&self) -> &ChartClass {
        &self.class
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.domain)
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        assert_eq!(x.len(), self.dim(), "point dimension mismatch");
        for (i, (v, (lo, hi))) in x.iter().zip(&self.domain).enumerate() {
            if *v < *lo || *v > *hi {
                return Err(Error::DomainViolation {
                    index: i,
                    value: *v,
                });
            }
        }
        Ok(())
    }

    pub fn kappa_at(&self, x: &[f64]) -> Result<JetMatrix> {
        self.check_point(x)?;
        let m = (self.kappa)(x)?;
        assert_eq!((m.rows(), m.cols()), (self.dim(), self.dim()));
        assert_eq!(m.nvars(), self.dim());
        Ok(m)
    }

    pub fn j_at(&self, x: &[f64]) -> Result<JetMatrix> {
        self.check_point(x)?;
        let m = (self.j)(x)?;
        assert_eq!((m.rows(), m.cols()), (self.dim(), self.dim()));
        assert_eq!(m.nvars(), self.dim());
        Ok(m)
    }

    /// Evaluate all pointwise geometry at x.
    pub fn at(&self, x: &[f64]) -> Result<ChartPoint> {
        ChartPoint::new(self, x)
    }

    /// The six structural residuals at a single point. `probe` is the real
    /// direction used for the positivity test.
    pub fn structure_residuals_at(&self, x: &[f64], probe: &[C64]) -> Result<StructureResiduals> {
        let kappa = self.kappa_at(x)?;
        let j = self.j_at(x)?;
        let m = self.dim();

        let antisymmetry = kappa.add(&kappa.transpose()).max_abs();
        let j_square = j.mul(&j).add(&JetMatrix::identity(m, m)).max_abs();
        let invariance = j.transpose().mul(&kappa).mul(&j).sub(&kappa).max_abs();

        let g = metric_values(&kappa, &j);
        let norm2: f64 = probe.iter().map(|c| c.norm_sqr()).sum();
        let mut q = C64::new(0.0, 0.0);
        for a in 0..m {
            for b in 0..m {
                q += g.get(a, b) * probe[a] * probe[b];
            }
        }
        let positivity = (-q.re / norm2.max(1e-30)).max(0.0) + q.im.abs();

        let mut dkappa = 0.0f64;
        for a in 0..m {
            for b in (a + 1)..m {
                for c in (b + 1)..m {
                    let t = kappa.get(b, c).grad(a)
                        + kappa.get(c, a).grad(b)
                        + kappa.get(a, b).grad(c);
                    dkappa = dkappa.max(t.norm());
                }
            }
        }

        let det = kappa.value_matrix().det();
        let nondegeneracy = ((KAPPA_DET_FLOOR - det.norm()) / KAPPA_DET_FLOOR).max(0.0);
        Ok(StructureResiduals {
            antisymmetry,
            j_square,
            invariance,
            positivity,
            dkappa,
            nondegeneracy,
        })
    }

    /// Structural residuals maximized over sampled points.
    pub fn validate(&self, npoints: usize, seed: u64, _tol: f64) -> Result<StructureResiduals> {
        let pts = sampling::sample_points(&self.domain, npoints, seed);
        let mut res = StructureResiduals::default();
        for (idx, x) in pts.iter().enumerate() {
            let mut rng = sampling::point_rng(seed, "validate-positivity", idx);
            let probe = sampling::random_real_vec(&mut rng, self.dim(), 1.0);
            let one = self.structure_residuals_at(x, &probe)?;
            res.antisymmetry = res.antisymmetry.max(one.antisymmetry);
            res.j_square = res.j_square.max(one.j_square);
            res.invariance = res.invariance.max(one.invariance);
            res.positivity = res.positivity.max(one.positivity);
            res.dkappa = res.dkappa.max(one.dkappa);
            res.nondegeneracy = res.nondegeneracy.max(one.nondegeneracy);
        }
        Ok(res)
    }

    /// Validation that fails on the first invariant exceeding `tol`.
    /// `skip_dkappa` admits the deliberately non-closed control chart.
    pub fn validate_strict(
        &self,
        npoints: usize,
        seed: u64,
        tol: f64,
        skip_dkappa: bool,
    ) -> Result<()> {
        let r = self.validate(npoints, seed, tol)?;
        for (name, value) in r.named() {
            if skip_dkappa && name == "kappa_closed" {
                continue;
            }
            if value > tol {
                return Err(Error::ValidationFailed {
                    invariant: name.to_string(),
                    residual: value,
                });
            }
        }
        Ok(())
    }
}

/// Max residual of each structural invariant over the sampled points.
#[derive(Clone, Debug, Default)]
pub struct StructureResiduals {
    pub antisymmetry: f64,
    pub j_square: f64,
    pub invariance: f64,
    pub positivity: f64,
    pub dkappa: f64,
    pub nondegeneracy: f64,
}

impl StructureResiduals {
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("kappa_antisymmetry", self.antisymmetry),
            ("j_squares_to_minus_id", self.j_square),
            ("kappa_j_invariance", self.invariance),
            ("metric_positivity", self.positivity),
            ("kappa_closed", self.dkappa),
            ("kappa_nondegenerate", self.nondegeneracy),
        ]
    }
}

/// 3-index tensor of first-order jets, layout [c][a][b].
#[derive(Clone, Debug)]
pub struct Tensor3 {
    m: usize,
    data: Vec<Jet1>,
}

impl Tensor3 {
    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize, usize) -> Jet1) -> Self {
        let mut data = Vec::with_capacity(m * m * m);
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    data.push(f(c, a, b));
                }
            }
        }
        Tensor3 { m, data }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, c: usize, a: usize, b: usize) -> &Jet1 {
        &self.data[(c * self.m + a) * self.m + b]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|j| j.max_abs()).fold(0.0, f64::max)
    }
}

fn metric_values(kappa: &JetMatrix, j: &JetMatrix) -> CMatrix {
    let m = kappa.rows();
    CMatrix::from_fn(m, m, |a, b| {
        (0..m)
            .map(|c| kappa.get(c, b).value() * j.get(c, a).value())
            .sum()
    })
}

/// Everything derived from the providers at one point: metric, inverse,
/// Christoffel symbols with their first derivatives, curvature values.
pub struct ChartPoint {
    x: Vec<f64>,
    m: usize,
    kappa: JetMatrix,
    j: JetMatrix,
    g: JetMatrix,
    g_inv: JetMatrix,
    gamma: Tensor3,
    riemann: Vec<C64>,
}

impl ChartPoint {
    fn new(chart: &ChartedStructure, x: &[f64]) -> Result<Self> {
        let kappa = chart.kappa_at(x)?;
        let j = chart.j_at(x)?;
        let m = chart.dim();

        // g_ab = kappa_cb J^c_a.
        let g = JetMatrix::from_fn(m, m, |a, b| {
            let mut acc = Jet2::zero(m);
            for c in 0..m {
                acc = &acc + &(kappa.get(c, b) * j.get(c, a));
            }
            acc
        });
        let g_inv = g.inv()?;

        // Koszul formula; the inverse metric keeps its own first derivatives
        // so Gamma comes out with a gradient attached.
        let gamma = Tensor3::from_fn(m, |c, a, b| {
            let mut acc = Jet1::zero(m);
            for d in 0..m {
                let t = &(&g.get(b, d).deriv(a) + &g.get(a, d).deriv(b)) - &g.get(a, b).deriv(d);
                acc = &acc + &(&g_inv.get(c, d).truncate() * &t);
            }
            acc.scale(C64::new(0.5, 0.0))
        });

        // R(e_a, e_b) e_c = R^d_cab e_d from dGamma + Gamma Gamma.
        let mut riemann = vec![C64::new(0.0, 0.0); m * m * m * m];
        for d in 0..m {
            for c in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        let mut v = gamma.get(d, b, c).grad(a) - gamma.get(d, a, c).grad(b);
                        for e in 0..m {
                            v += gamma.get(d, a, e).value() * gamma.get(e, b, c).value()
                                - gamma.get(d, b, e).value() * gamma.get(e, a, c).value();
                        }
                        riemann[((d * m + c) * m + a) * m + b] = v;
                    }
                }
            }
        }

        Ok(ChartPoint {
            x: x.to_vec(),
            m,
            kappa,
            j,
            g,
            g_inv,
            gamma,
            riemann,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn kappa(&self) -> &JetMatrix {
        &self.kappa
    }

    pub fn j_mat(&self) -> &JetMatrix {
        &self.j
    }

    pub fn g(&self) -> &JetMatrix {
        &self.g
    }

    pub fn g_inv(&self) -> &JetMatrix {
        &self.g_inv
    }

    pub fn gamma(&self) -> &Tensor3 {
        &self.gamma
    }

    pub fn riemann(&self, d: usize, c: usize, a: usize, b: usize) -> C64 {
        self.riemann[((d * self.m + c) * self.m + a) * self.m + b]
    }

    pub fn j_value(&self, a: usize, b: usize) -> C64 {
        self.j.get(a, b).value()
    }

    /// J applied to a complexified tangent vector.
    pub fn j_apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.m);
        (0..self.m)
            .map(|a| (0..self.m).map(|b| self.j_value(a, b) * v[b]).sum())
            .collect()
    }

    /// Projection onto the +i eigenspace of J.
    pub fn proj10(&self, v: &[C64]) -> Vec<C64> {
        let jv = self.j_apply(v);
        let i = C64::new(0.0, 1.0);
        v.iter()
            .zip(&jv)
            .map(|(a, b)| (a - i * b) * C64::new(0.5, 0.0))
            .collect()
    }

    /// Projection onto the -i eigenspace of J.
    pub fn proj01(&self, v: &[C64]) -> Vec<C64> {
        let jv = self.j_apply(v);
        let i = C64::new(0.0, 1.0);
        v.iter()
            .zip(&jv)
            .map(|(a, b)| (a + i * b) * C64::new(0.5, 0.0))
            .collect()
    }

    pub fn g_value(&self, a: usize, b: usize) -> C64 {
        self.g.get(a, b).value()
    }

    /// Complex-bilinear metric pairing of two value vectors (no conjugation).
    pub fn g_pair_values(&self, u: &[C64], v: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..self.m {
            for b in 0..self.m {
                acc += self.g_value(a, b) * u[a] * v[b];
            }
        }
        acc
    }

    /// Metric pairing of two Jet1 component vectors; the result keeps its
    /// first derivatives.
    pub fn g_pair_jet1(&self, u: &[Jet1], v: &[Jet1]) -> Jet1 {
        let mut acc = Jet1::zero(self.m);
        for a in 0..self.m {
            for b in 0..self.m {
                acc = &acc + &(&(&self.g.get(a, b).truncate() * &u[a]) * &v[b]);
            }
        }
        acc
    }

    /// (d kappa)_abc at this point.
    pub fn dkappa(&self, a: usize, b: usize, c: usize) -> C64 {
        self.kappa.get(b, c).grad(a) + self.kappa.get(c, a).grad(b) + self.kappa.get(a, b).grad(c)
    }

    pub fn dkappa_eval(&self, x: &[C64], y: &[C64], z: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..self.m {
            for b in 0..self.m {
                for c in 0..self.m {
                    acc += self.dkappa(a, b, c) * x[a] * y[b] * z[c];
                }
            }
        }
        acc
    }

    /// Covariant derivative of a field in a constant direction, value level.
    pub fn cov_vec(&self, direction: &[C64], field: &PolyVectorField) -> Vec<C64> {
        let jets = field.eval_jets(&self.x);
        self.cov_of_jets(direction, &jets)
    }

    fn cov_of_jets(&self, direction: &[C64], jets: &[Jet2]) -> Vec<C64> {
        assert_eq!(direction.len(), self.m);
        (0..self.m)
            .map(|c| {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..self.m {
                    acc += direction[a] * jets[c].grad(a);
                    for b in 0..self.m {
                        acc += direction[a] * self.gamma.get(c, a, b).value() * jets[b].value();
                    }
                }
                acc
            })
            .collect()
    }

    /// Covariant derivative nabla_U V materialized with its own first
    /// derivatives, for iterated derivatives at this point.
    pub fn cov_field(&self, u: &PolyVectorField, v: &PolyVectorField) -> Vec<Jet1> {
        let uj: Vec<Jet1> = u.eval_jets(&self.x).iter().map(|j| j.truncate()).collect();
        let vj2 = v.eval_jets(&self.x);
        let vj: Vec<Jet1> = vj2.iter().map(|j| j.truncate()).collect();
        (0..self.m)
            .map(|c| {
                let mut acc = Jet1::zero(self.m);
                for a in 0..self.m {
                    acc = &acc + &(&uj[a] * &vj2[c].deriv(a));
                    for b in 0..self.m {
                        acc = &acc + &(&(&uj[a] * self.gamma.get(c, a, b)) * &vj[b]);
                    }
                }
                acc
            })
            .collect()
    }

    /// Covariant derivative (in a constant direction) of a vector whose
    /// components are given as first-order jets at this point.
    pub fn cov_jet1(&self, direction: &[C64], comps: &[Jet1]) -> Vec<C64> {
        assert_eq!(direction.len(), self.m);
        assert_eq!(comps.len(), self.m);
        (0..self.m)
            .map(|c| {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..self.m {
                    acc += direction[a] * comps[c].grad(a);
                    for b in 0..self.m {
                        acc += direction[a] * self.gamma.get(c, a, b).value() * comps[b].value();
                    }
                }
                acc
            })
            .collect()
    }

    /// Degree-2 polynomial field T[P^(1,0)](x) v built from the Taylor
    /// expansion of the projector at this point. The result is pointwise of
    /// type (1,0) up to a cubic defect in the offset, which is invisible to
    /// any quantity using at most two derivatives at the base point.
    pub fn taylor_field_10(&self, v: &[C64]) -> PolyVectorField {
        assert_eq!(v.len(), self.m);
        let i = C64::new(0.0, 1.0);
        let half = C64::new(0.5, 0.0);
        let jets: Vec<Jet2> = (0..self.m)
            .map(|c| {
                let mut acc = Jet2::constant(self.m, v[c] * half);
                for b in 0..self.m {
                    let p = self.j.get(c, b).scale(-i * half);
                    acc = &acc + &p.scale(v[b]);
                }
                acc
            })
            .collect();
        PolyVectorField::from_jets(self.x.clone(), &jets)
    }

    /// R(X, Y) Z from the stored curvature values.
    pub fn curvature_apply(&self, x: &[C64], y: &[C64], z: &[C64]) -> Vec<C64> {
        let m = self.m;
        (0..m)
            .map(|d| {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..m {
                    for a in 0..m {
                        for b in 0..m {
                            acc += self.riemann(d, c, a, b) * x[a] * y[b] * z[c];
                        }
                    }
                }
                acc
            })
            .collect()
    }
}

/// Calibrated metric (with inverse) at a point; fails if the value part is
/// not positive definite.
pub struct MetricData {
    pub g: JetMatrix,
    pub g_inv: JetMatrix,
}

pub fn metric_from_calibration(chart: &ChartedStructure, x: &[f64]) -> Result<MetricData> {
    let pt = chart.at(x)?;
    if !pt.g.value_matrix().hermitian_part_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(MetricData {
        g: pt.g.clone(),
        g_inv: pt.g_inv.clone(),
    })
}

pub fn christoffel(chart: &ChartedStructure, x: &[f64]) -> Result<Tensor3> {
    Ok(chart.at(x)?.gamma.clone())
}

pub fn covariant_derivative_vec(
    chart: &ChartedStructure,
    x: &[f64],
    direction: &[C64],
    field: &PolyVectorField,
) -> Result<Vec<C64>> {
    Ok(chart.at(x)?.cov_vec(direction, field))
}

pub fn curvature(
    chart: &ChartedStructure,
    x: &[f64],
    xv: &[C64],
    yv: &[C64],
    zv: &[C64],
) -> Result<Vec<C64>> {
    Ok(chart.at(x)?.curvature_apply(xv, yv, zv))
}

/// Fully antisymmetric 3-form components.
pub struct ThreeForm {
    m: usize,
    comps: Vec<C64>,
}

impl ThreeForm {
    pub fn get(&self, a: usize, b: usize, c: usize) -> C64 {
        self.comps[(a * self.m + b) * self.m + c]
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &[C64], y: &[C64], z: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..self.m {
            for b in 0..self.m {
                for c in 0..self.m {
                    acc += self.get(a, b, c) * x[a] * y[b] * z[c];
                }
            }
        }
        acc
    }
}

pub fn exterior_derivative_2form(chart: &ChartedStructure, x: &[f64]) -> Result<ThreeForm> {
    let pt = chart.at(x)?;
    let m = pt.dim();
    let mut comps = vec![C64::new(0.0, 0.0); m * m * m];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                comps[(a * m + b) * m + c] = pt.dkappa(a, b, c);
            }
        }
    }
    Ok(ThreeForm { m, comps })
}

/// Constant value matrix as a provider.
pub fn constant_provider(values: CMatrix, nvars: usize) -> Provider {
    Arc::new(move |_x: &[f64]| {
        Ok(JetMatrix::from_fn(values.rows(), values.cols(), |r, c| {
            Jet2::constant(nvars, values.get(r, c))
        }))
    })
}

/// Build a J provider from kappa and an auxiliary metric h via the polar
/// construction: with A the h-skew endomorphism defined by
/// kappa(u, v) = h(u, Av), the structure J = A (-A^2)^(-1/2) squares to -Id,
/// preserves kappa, and kappa(J., .) is positive definite.
pub fn calibrated_j_from_metric(kappa: Provider, h: Provider) -> Provider {
    Arc::new(move |x: &[f64]| {
        let k = kappa(x)?;
        let hm = h(x)?;
        let a = hm.inv()?.mul(&k);
        let minus_a2 = a.mul(&a).scale(C64::new(-1.0, 0.0));
        let s = minus_a2.sqrt_pd()?;
        Ok(a.mul(&s.inv()?))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard_kappa_values(n: usize) -> CMatrix {
        let m = 2 * n;
        let mut k = CMatrix::zero(m, m);
        for i in 0..n {
            k.set(2 * i, 2 * i + 1, C64::new(-1.0, 0.0));
            k.set(2 * i + 1, 2 * i, C64::new(1.0, 0.0));
        }
        k
    }

    fn standard_j_values(n: usize) -> CMatrix {
        let m = 2 * n;
        let mut j = CMatrix::zero(m, m);
        for i in 0..n {
            j.set(2 * i, 2 * i + 1, C64::new(-1.0, 0.0));
            j.set(2 * i + 1, 2 * i, C64::new(1.0, 0.0));
        }
        j
    }

    fn flat_chart(n: usize) -> ChartedStructure {
        let m = 2 * n;
        ChartedStructure::new(
            "flat-test",
            n,
            vec![(-1.0, 1.0); m],
            ChartClass::Flat,
            constant_provider(standard_kappa_values(n), m),
            constant_provider(standard_j_values(n), m),
        )
    }

    #[test]
    fn flat_metric_is_identity_and_connection_vanishes() {
        let chart = flat_chart(2);
        let pt = chart.at(&[0.1, -0.2, 0.3, 0.05]).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((pt.g_value(a, b) - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
        assert!(pt.gamma().max_abs() < 1e-14);
        for d in 0..4 {
            for c in 0..4 {
                for a in 0..4 {
                    for b in 0..4 {
                        assert!(pt.riemann(d, c, a, b).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn flat_chart_validates_clean() {
        let chart = flat_chart(1);
        let r = chart.validate(20, 7, 1e-9).unwrap();
        for (_, v) in r.named() {
            assert!(v < 1e-12, "{:?}", r);
        }
        chart.validate_strict(20, 7, 1e-9, false).unwrap();
    }

    #[test]
    fn projectors_split_standard_directions() {
        let chart = flat_chart(1);
        let pt = chart.at(&[0.0, 0.0]).unwrap();
        let dx = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let p = pt.proj10(&dx);
        // P^(1,0) dx = (dx - i dy)/2, a multiple of (1, -i).
        assert!((p[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((p[1] - C64::new(0.0, -0.5)).norm() < 1e-15);
        let q = pt.proj01(&dx);
        assert!((q[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((q[1] - C64::new(0.0, 0.5)).norm() < 1e-15);
        // The two projections sum back to the input.
        assert!((p[0] + q[0] - dx[0]).norm() < 1e-15);
        assert!((p[1] + q[1] - dx[1]).norm() < 1e-15);
    }

    #[test]
    fn domain_violation_reported() {
        let chart = flat_chart(1);
        match chart.at(&[2.0, 0.0]) {
            Err(Error::DomainViolation { index: 0, .. }) => {}
            other => panic!("expected domain violation, got {:?}", other.err()),
        }
    }

    #[test]
    fn retraction_with_identity_metric_recovers_standard_j() {
        let n = 2;
        let m = 2 * n;
        let kappa = constant_provider(standard_kappa_values(n), m);
        let h = constant_provider(CMatrix::identity(m), m);
        let j = calibrated_j_from_metric(kappa, h);
        let jm = j(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        let want = standard_j_values(n);
        for a in 0..m {
            for b in 0..m {
                assert!((jm.get(a, b).value() - want.get(a, b)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn retraction_output_is_calibrated() {
        // A non-identity auxiliary metric still yields J^2 = -Id, invariance
        // of kappa, and a positive definite calibrated metric.
        let n = 1;
        let m = 2;
        let mut h_vals = CMatrix::identity(m);
        h_vals.set(0, 0, C64::new(1.3, 0.0));
        h_vals.set(0, 1, C64::new(0.2, 0.0));
        h_vals.set(1, 0, C64::new(0.2, 0.0));
        let kappa = constant_provider(standard_kappa_values(n), m);
        let chart = ChartedStructure::new(
            "retraction-test",
            n,
            vec![(-1.0, 1.0); m],
            ChartClass::Retraction { integrable: None },
            kappa.clone(),
            calibrated_j_from_metric(kappa, constant_provider(h_vals, m)),
        );
        let r = chart.validate(10, 3, 1e-9).unwrap();
        for (name, v) in r.named() {
            assert!(v < 1e-9, "{name}: {v}");
        }
    }

    #[test]
    fn curvature_of_conformal_metric_is_nonzero_with_bianchi_closure() {
        // kappa scaled by a positive function of x gives a curved metric;
        // check the first Bianchi identity numerically.
        let m = 2usize;
        let kappa: Provider = Arc::new(move |x: &[f64]| {
            let f = 1.0 + 0.3 * x[0] * x[0] + 0.1 * x[1] * x[1];
            let grad_f = [0.6 * x[0], 0.2 * x[1]];
            let hess_f = [0.6, 0.0, 0.0, 0.2];
            let fj = Jet2::from_parts(
                C64::new(f, 0.0),
                grad_f.iter().map(|v| C64::new(*v, 0.0)).collect(),
                hess_f.iter().map(|v| C64::new(*v, 0.0)).collect(),
            );
            Ok(JetMatrix::from_fn(2, 2, |r, c| {
                if r == 0 && c == 1 {
                    fj.scale(C64::new(-1.0, 0.0))
                } else if r == 1 && c == 0 {
                    fj.clone()
                } else {
                    Jet2::zero(2)
                }
            }))
        });
        let chart = ChartedStructure::new(
            "curved-test",
            1,
            vec![(-1.0, 1.0); m],
            ChartClass::Explicit { integrable: None },
            kappa,
            constant_provider(standard_j_values(1), m),
        );
        let pt = chart.at(&[0.2, -0.3]).unwrap();
        let mut max_r = 0.0f64;
        let mut max_bianchi = 0.0f64;
        for d in 0..m {
            for c in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        max_r = max_r.max(pt.riemann(d, c, a, b).norm());
                        let cyc = pt.riemann(d, c, a, b)
                            + pt.riemann(d, a, b, c)
                            + pt.riemann(d, b, c, a);
                        max_bianchi = max_bianchi.max(cyc.norm());
                    }
                }
            }
        }
        assert!(max_r > 1e-3, "expected visible curvature, got {max_r}");
        assert!(max_bianchi < 1e-12, "first Bianchi residual {max_bianchi}");
    }
}
