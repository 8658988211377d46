//! Builtin charts and the JSON descriptor format for user-supplied ones.
//!
//! Coordinates interleave real and imaginary parts: (x_1, y_1, ..., x_n, y_n),
//! so coordinate 2i is x_{i+1} and coordinate 2i+1 is y_{i+1}. The standard
//! structure on each pair is kappa(e_x, e_y) = -1 and J e_x = e_y, which makes
//! the calibrated metric kappa(J., .) the identity.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{calibrated_j_from_metric, ChartClass, ChartedStructure, Provider};
use crate::jet_linalg::{CMatrix, JetMatrix};
use crate::jets::C64;
use crate::poly::MultiPoly;

pub const MAX_DESCRIPTOR_DEGREE: u32 = 4;

/// Payload terms are validated against this tolerance budget.
const DESCRIPTOR_VALIDATE_POINTS: usize = 20;
const DESCRIPTOR_VALIDATE_SEED: u64 = 0xA11C;
const DESCRIPTOR_VALIDATE_TOL: f64 = 1e-8;

pub fn standard_kappa_values(n: usize) -> CMatrix {
    let m = 2 * n;
    let mut k = CMatrix::zero(m, m);
    for i in 0..n {
        k.set(2 * i, 2 * i + 1, C64::new(-1.0, 0.0));
        k.set(2 * i + 1, 2 * i, C64::new(1.0, 0.0));
    }
    k
}

pub fn standard_j_values(n: usize) -> CMatrix {
    let m = 2 * n;
    let mut j = CMatrix::zero(m, m);
    for i in 0..n {
        j.set(2 * i, 2 * i + 1, C64::new(-1.0, 0.0));
        j.set(2 * i + 1, 2 * i, C64::new(1.0, 0.0));
    }
    j
}

/// Provider evaluating a matrix of polynomials, row-major entries.
pub fn poly_matrix_provider(m: usize, entries: Vec<MultiPoly>) -> Provider {
    assert_eq!(entries.len(), m * m);
    let entries = Arc::new(entries);
    Arc::new(move |x: &[f64]| {
        let e = Arc::clone(&entries);
        Ok(JetMatrix::from_fn(m, m, |r, c| e[r * m + c].eval_jet(x)))
    })
}

/// The symplectic form of a potential, by exact polynomial differentiation.
///
/// With H_jk = A_jk + i B_jk the complex Hessian of phi (A symmetric, B
/// antisymmetric, both real), the negative of the classical form expands in
/// real coordinates as
///   kappa_{x_j x_k} = B_jk,  kappa_{y_j y_k} = B_jk,
///   kappa_{x_j y_k} = -A_jk, kappa_{y_j x_k} = A_kj.
/// With phi = sum |z_i|^2 this reproduces the standard form above.
pub fn kappa_from_potential(n: usize, phi: &MultiPoly) -> Vec<MultiPoly> {
    let m = 2 * n;
    let quarter = C64::new(0.25, 0.0);
    let a = |j: usize, k: usize| -> MultiPoly {
        let xx = phi.partial(2 * j).partial(2 * k);
        let yy = phi.partial(2 * j + 1).partial(2 * k + 1);
        xx.add(&yy).scale(quarter)
    };
    let b = |j: usize, k: usize| -> MultiPoly {
        let xy = phi.partial(2 * j).partial(2 * k + 1);
        let yx = phi.partial(2 * k).partial(2 * j + 1);
        xy.sub(&yx).scale(quarter)
    };
    let mut out = vec![MultiPoly::zero(m); m * m];
    for j in 0..n {
        for k in 0..n {
            out[(2 * j) * m + 2 * k] = b(j, k);
            out[(2 * j + 1) * m + 2 * k + 1] = b(j, k);
            out[(2 * j) * m + 2 * k + 1] = a(j, k).scale(C64::new(-1.0, 0.0));
            out[(2 * j + 1) * m + 2 * k] = a(k, j);
        }
    }
    out
}

fn constant_matrix_polys(values: &CMatrix) -> Vec<MultiPoly> {
    let m = values.rows();
    let mut out = Vec::with_capacity(m * m);
    for r in 0..m {
        for c in 0..m {
            out.push(MultiPoly::constant(m, values.get(r, c)));
        }
    }
    out
}

fn potential_chart(name: &str, n: usize, phi: MultiPoly, half_width: f64) -> ChartedStructure {
    let m = 2 * n;
    let kappa = poly_matrix_provider(m, kappa_from_potential(n, &phi));
    let j = poly_matrix_provider(m, constant_matrix_polys(&standard_j_values(n)));
    ChartedStructure::new(
        name,
        n,
        vec![(-half_width, half_width); m],
        ChartClass::KahlerPotential,
        kappa,
        j,
    )
}

/// |z_i|^2 as a polynomial in the interleaved real coordinates.
fn abs2(m: usize, i: usize) -> MultiPoly {
    let x = MultiPoly::var(m, 2 * i);
    let y = MultiPoly::var(m, 2 * i + 1);
    x.mul(&x).add(&y.mul(&y))
}

fn flat_chart(name: &str, n: usize) -> ChartedStructure {
    let m = 2 * n;
    ChartedStructure::new(
        name,
        n,
        vec![(-1.0, 1.0); m],
        ChartClass::Flat,
        poly_matrix_provider(m, constant_matrix_polys(&standard_kappa_values(n))),
        poly_matrix_provider(m, constant_matrix_polys(&standard_j_values(n))),
    )
}

/// Quadratic bump added to the identity to seed the polar retraction.
/// The assignments deliberately mix coordinate pairs so the resulting J
/// fails integrability by a visible margin.
fn perturbed_h_polys(eps: f64) -> Vec<MultiPoly> {
    let m = 4usize;
    let e = C64::new(eps, 0.0);
    let mut h = constant_matrix_polys(&CMatrix::identity(m));
    let quad = |a: usize, b: usize| MultiPoly::var(m, a).mul(&MultiPoly::var(m, b));
    let mut add_sym = |r: usize, c: usize, p: MultiPoly| {
        let scaled = p.scale(e);
        h[r * m + c] = h[r * m + c].add(&scaled);
        if r != c {
            h[c * m + r] = h[c * m + r].add(&scaled);
        }
    };
    add_sym(0, 0, quad(1, 1));
    add_sym(1, 1, quad(2, 2));
    add_sym(2, 2, quad(3, 3));
    add_sym(3, 3, quad(0, 0));
    add_sym(0, 1, quad(2, 3));
    add_sym(0, 2, quad(0, 3));
    add_sym(1, 3, quad(1, 2));
    add_sym(2, 3, quad(0, 1));
    h
}

fn perturbed_chart() -> ChartedStructure {
    let n = 2;
    let m = 2 * n;
    let kappa = poly_matrix_provider(m, constant_matrix_polys(&standard_kappa_values(n)));
    let h = poly_matrix_provider(m, perturbed_h_polys(0.1));
    let j = calibrated_j_from_metric(kappa.clone(), h);
    ChartedStructure::new(
        "perturbed_c2",
        n,
        vec![(-0.5, 0.5); m],
        ChartClass::Retraction {
            integrable: Some(false),
        },
        kappa,
        j,
    )
}

fn nonclosed_chart() -> ChartedStructure {
    let n = 2;
    let m = 2 * n;
    // Scale the second coordinate pair's block by (1 + 0.3 x_1); the x_1
    // dependence leaves (d kappa)_{023} = -0.3, everything else intact.
    let mut entries = constant_matrix_polys(&standard_kappa_values(n));
    let factor = MultiPoly::constant(m, C64::new(1.0, 0.0))
        .add(&MultiPoly::var(m, 0).scale(C64::new(0.3, 0.0)));
    entries[2 * m + 3] = factor.scale(C64::new(-1.0, 0.0));
    entries[3 * m + 2] = factor;
    let kappa = poly_matrix_provider(m, entries);
    let h = poly_matrix_provider(m, constant_matrix_polys(&CMatrix::identity(m)));
    let j = calibrated_j_from_metric(kappa.clone(), h);
    ChartedStructure::new(
        "nonclosed_control_c2",
        n,
        vec![(-0.5, 0.5); m],
        ChartClass::NonclosedControl,
        kappa,
        j,
    )
}

pub fn builtin_names() -> Vec<&'static str> {
    vec![
        "flat_c1",
        "flat_c2",
        "kahler_potential_c1",
        "kahler_potential_c2",
        "perturbed_c2",
        "nonclosed_control_c2",
    ]
}

pub fn builtin_summaries() -> Vec<(&'static str, &'static str)> {
    vec![
        ("flat_c1", "standard structure on C, constant coefficients"),
        ("flat_c2", "standard structure on C^2, constant coefficients"),
        (
            "kahler_potential_c1",
            "potential |z|^2 + |z|^4/4, curved integrable structure",
        ),
        (
            "kahler_potential_c2",
            "quartic potential on C^2 with coordinate coupling",
        ),
        (
            "perturbed_c2",
            "polar retraction of a bumped metric, not integrable",
        ),
        (
            "nonclosed_control_c2",
            "non-closed form, negative control only",
        ),
    ]
}

pub fn builtin(name: &str) -> Result<ChartedStructure> {
    match name {
        "flat_c1" => Ok(flat_chart("flat_c1", 1)),
        "flat_c2" => Ok(flat_chart("flat_c2", 2)),
        "kahler_potential_c1" => {
            let m = 2;
            let r = abs2(m, 0);
            let phi = r.add(&r.mul(&r).scale(C64::new(0.25, 0.0)));
            Ok(potential_chart("kahler_potential_c1", 1, phi, 0.7))
        }
        "kahler_potential_c2" => {
            let m = 4;
            let r1 = abs2(m, 0);
            let r2 = abs2(m, 1);
            let quarter = C64::new(0.25, 0.0);
            let phi = r1
                .add(&r2)
                .add(&r1.mul(&r1).scale(quarter))
                .add(&r2.mul(&r2).scale(quarter))
                .add(&r1.mul(&r2).scale(quarter));
            Ok(potential_chart("kahler_potential_c2", 2, phi, 0.6))
        }
        "perturbed_c2" => Ok(perturbed_chart()),
        "nonclosed_control_c2" => Ok(nonclosed_chart()),
        other => Err(Error::UnknownChart(other.to_string())),
    }
}

/// Resolve a chart reference: builtin name first, then a descriptor path.
pub fn load_chart(reference: &str) -> Result<ChartedStructure> {
    if builtin_names().contains(&reference) {
        return builtin(reference);
    }
    let path = Path::new(reference);
    if path.exists() {
        let desc = ChartDescriptor::from_file(path)?;
        return desc.to_chart();
    }
    Err(Error::UnknownChart(reference.to_string()))
}

/// One polynomial monomial added to a descriptor target.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DescriptorTerm {
    pub target: String,
    #[serde(default)]
    pub indices: Vec<usize>,
    pub exponents: Vec<u32>,
    pub coeff_re: f64,
    #[serde(default)]
    pub coeff_im: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DescriptorPayload {
    #[serde(default)]
    pub terms: Vec<DescriptorTerm>,
}

/// JSON chart description. Payload terms perturb the standard structure:
/// kappa and J terms add to the standard constant matrices, h terms add to
/// the identity, phi terms build a potential from scratch.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChartDescriptor {
    pub name: String,
    pub n: usize,
    pub kind: String,
    pub domain_box: Vec<[f64; 2]>,
    #[serde(default)]
    pub payload: DescriptorPayload,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedDescriptor(msg.into())
}

impl ChartDescriptor {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let desc: ChartDescriptor = serde_json::from_str(&text)?;
        Ok(desc)
    }

    fn normalized_target(raw: &str) -> String {
        let lower = raw.to_ascii_lowercase();
        match lower.split('_').next().unwrap_or("") {
            "kappa" => "kappa".to_string(),
            "h" => "h".to_string(),
            "j" => "j".to_string(),
            "phi" => "phi".to_string(),
            _ => lower,
        }
    }

    /// Group payload terms by normalized target, applying the epsilon scale
    /// and shape rules (kappa strictly upper, h upper-or-diagonal, both
    /// mirrored automatically; phi takes no indices).
    #[allow(clippy::type_complexity)]
    fn collect(
        &self,
        m: usize,
    ) -> Result<(
        Vec<MultiPoly>,
        Vec<MultiPoly>,
        Vec<MultiPoly>,
        MultiPoly,
        bool,
        bool,
        bool,
        bool,
    )> {
        let eps = self.epsilon.unwrap_or(1.0);
        let mut kappa = vec![MultiPoly::zero(m); m * m];
        let mut h = vec![MultiPoly::zero(m); m * m];
        let mut j = vec![MultiPoly::zero(m); m * m];
        let mut phi = MultiPoly::zero(m);
        let (mut has_kappa, mut has_h, mut has_j, mut has_phi) = (false, false, false, false);

        for (ti, term) in self.payload.terms.iter().enumerate() {
            if term.coeff_im != 0.0 {
                return Err(malformed(format!(
                    "term {ti}: geometric data must be real, coeff_im is {}",
                    term.coeff_im
                )));
            }
            if term.exponents.len() != m {
                return Err(malformed(format!(
                    "term {ti}: expected {m} exponents, found {}",
                    term.exponents.len()
                )));
            }
            let degree: u32 = term.exponents.iter().sum();
            if degree > MAX_DESCRIPTOR_DEGREE {
                return Err(malformed(format!(
                    "term {ti}: degree {degree} exceeds {MAX_DESCRIPTOR_DEGREE}"
                )));
            }
            let coeff = C64::new(term.coeff_re * eps, 0.0);
            let mono = MultiPoly::monomial(m, &term.exponents, coeff);
            let target = Self::normalized_target(&term.target);
            match target.as_str() {
                "phi" => {
                    if !term.indices.is_empty() {
                        return Err(malformed(format!("term {ti}: phi takes no indices")));
                    }
                    phi = phi.add(&mono);
                    has_phi = true;
                }
                "kappa" | "h" | "j" => {
                    if term.indices.len() != 2 {
                        return Err(malformed(format!(
                            "term {ti}: {target} needs two indices"
                        )));
                    }
                    let (a, b) = (term.indices[0], term.indices[1]);
                    if a >= m || b >= m {
                        return Err(malformed(format!(
                            "term {ti}: index out of range for dimension {m}"
                        )));
                    }
                    match target.as_str() {
                        "kappa" => {
                            if a >= b {
                                return Err(malformed(format!(
                                    "term {ti}: kappa terms use strictly upper indices"
                                )));
                            }
                            kappa[a * m + b] = kappa[a * m + b].add(&mono);
                            kappa[b * m + a] =
                                kappa[b * m + a].add(&mono.scale(C64::new(-1.0, 0.0)));
                            has_kappa = true;
                        }
                        "h" => {
                            if a > b {
                                return Err(malformed(format!(
                                    "term {ti}: h terms use upper or diagonal indices"
                                )));
                            }
                            h[a * m + b] = h[a * m + b].add(&mono);
                            if a != b {
                                h[b * m + a] = h[b * m + a].add(&mono);
                            }
                            has_h = true;
                        }
                        _ => {
                            j[a * m + b] = j[a * m + b].add(&mono);
                            has_j = true;
                        }
                    }
                }
                other => {
                    return Err(malformed(format!("term {ti}: unknown target '{other}'")));
                }
            }
        }
        Ok((kappa, h, j, phi, has_kappa, has_h, has_j, has_phi))
    }

    pub fn to_chart(&self) -> Result<ChartedStructure> {
        if self.name.is_empty() {
            return Err(malformed("empty chart name"));
        }
        if self.n == 0 {
            return Err(malformed("n must be at least 1"));
        }
        let m = 2 * self.n;
        if self.domain_box.len() != m {
            return Err(malformed(format!(
                "domain_box needs {m} intervals, found {}",
                self.domain_box.len()
            )));
        }
        for (i, [lo, hi]) in self.domain_box.iter().enumerate() {
            // partial_cmp also rejects NaN bounds.
            if lo.partial_cmp(hi) != Some(std::cmp::Ordering::Less) {
                return Err(malformed(format!("domain interval {i} is empty")));
            }
        }
        let domain: Vec<(f64, f64)> = self.domain_box.iter().map(|[lo, hi]| (*lo, *hi)).collect();

        let (kappa_terms, h_terms, j_terms, phi, has_kappa, has_h, has_j, has_phi) =
            self.collect(m)?;

        let kind = self.kind.to_ascii_uppercase();
        let (class, kappa, j): (ChartClass, Provider, Provider) = match kind.as_str() {
            "FLAT" => {
                if has_kappa || has_h || has_j || has_phi {
                    return Err(malformed("FLAT charts take no payload terms"));
                }
                (
                    ChartClass::Flat,
                    poly_matrix_provider(m, constant_matrix_polys(&standard_kappa_values(self.n))),
                    poly_matrix_provider(m, constant_matrix_polys(&standard_j_values(self.n))),
                )
            }
            "KAHLER_POTENTIAL" => {
                if has_kappa || has_h || has_j {
                    return Err(malformed(
                        "KAHLER_POTENTIAL charts accept only phi terms",
                    ));
                }
                if !has_phi {
                    return Err(malformed("KAHLER_POTENTIAL charts need phi terms"));
                }
                (
                    ChartClass::KahlerPotential,
                    poly_matrix_provider(m, kappa_from_potential(self.n, &phi)),
                    poly_matrix_provider(m, constant_matrix_polys(&standard_j_values(self.n))),
                )
            }
            "RETRACTION" => {
                if has_j || has_phi {
                    return Err(malformed("RETRACTION charts accept only kappa and h terms"));
                }
                let kappa_entries = add_entrywise(
                    constant_matrix_polys(&standard_kappa_values(self.n)),
                    kappa_terms,
                );
                let h_entries =
                    add_entrywise(constant_matrix_polys(&CMatrix::identity(m)), h_terms);
                let kappa = poly_matrix_provider(m, kappa_entries);
                let h = poly_matrix_provider(m, h_entries);
                let j = calibrated_j_from_metric(kappa.clone(), h);
                (ChartClass::Retraction { integrable: None }, kappa, j)
            }
            "NONCLOSED_CONTROL" => {
                if has_phi {
                    return Err(malformed(
                        "NONCLOSED_CONTROL charts accept kappa, h, and J terms",
                    ));
                }
                if has_j && has_h {
                    return Err(malformed(
                        "NONCLOSED_CONTROL charts take either J terms or h terms, not both",
                    ));
                }
                let kappa_entries = add_entrywise(
                    constant_matrix_polys(&standard_kappa_values(self.n)),
                    kappa_terms,
                );
                let kappa = poly_matrix_provider(m, kappa_entries);
                let j = if has_j {
                    let j_entries = add_entrywise(
                        constant_matrix_polys(&standard_j_values(self.n)),
                        j_terms,
                    );
                    poly_matrix_provider(m, j_entries)
                } else {
                    let h_entries =
                        add_entrywise(constant_matrix_polys(&CMatrix::identity(m)), h_terms);
                    calibrated_j_from_metric(kappa.clone(), poly_matrix_provider(m, h_entries))
                };
                (ChartClass::NonclosedControl, kappa, j)
            }
            "EXPLICIT" => {
                if has_h || has_phi {
                    return Err(malformed("EXPLICIT charts accept only kappa and J terms"));
                }
                let kappa_entries = add_entrywise(
                    constant_matrix_polys(&standard_kappa_values(self.n)),
                    kappa_terms,
                );
                let j_entries =
                    add_entrywise(constant_matrix_polys(&standard_j_values(self.n)), j_terms);
                (
                    ChartClass::Explicit { integrable: None },
                    poly_matrix_provider(m, kappa_entries),
                    poly_matrix_provider(m, j_entries),
                )
            }
            other => {
                return Err(malformed(format!("unknown chart kind '{other}'")));
            }
        };

        let chart = ChartedStructure::new(self.name.clone(), self.n, domain, class, kappa, j);
        let skip_dkappa = !chart.class().closed_kappa();
        chart.validate_strict(
            DESCRIPTOR_VALIDATE_POINTS,
            DESCRIPTOR_VALIDATE_SEED,
            DESCRIPTOR_VALIDATE_TOL,
            skip_dkappa,
        )?;
        Ok(chart)
    }
}

fn add_entrywise(base: Vec<MultiPoly>, add: Vec<MultiPoly>) -> Vec<MultiPoly> {
    base.into_iter()
        .zip(add)
        .map(|(b, a)| b.add(&a))
        .collect()
}
