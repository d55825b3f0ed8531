//! The commutation-based incompatibility measure `Υ_p(E, F) = Σ_ab ‖[E_a, F_b]‖_p`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, h_p, SchattenP};
use crate::povm::{OverlapTable, Povm, Rank1Form};

/// Default tolerance on `|c_ab − 1/√d|` for maximality certification.
pub const CERT_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dense,
    Rank1FastPath,
}

#[derive(Clone, Debug)]
pub struct IncompatibilityResult {
    pub value: f64,
    pub p: SchattenP,
    /// `‖[E_a, F_b]‖_p`, indexed `(a, b)`.
    pub per_pair_terms: DMatrix<f64>,
    pub method: Method,
}

impl IncompatibilityResult {
    fn from_terms(terms: DMatrix<f64>, p: SchattenP, method: Method) -> Self {
        IncompatibilityResult { value: pairwise_sum(terms.as_slice()), p, per_pair_terms: terms, method }
    }
}

/// Tree reduction with a fixed shape, so sums are bit-stable regardless of how the
/// terms were produced.
fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Dense evaluation: Schatten norm of every commutator.
pub fn upsilon(e: &Povm, f: &Povm, p: SchattenP) -> Result<IncompatibilityResult> {
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "measurements act on C^{} and C^{}",
            e.dim(),
            f.dim()
        )));
    }
    let mut terms = DMatrix::zeros(e.len(), f.len());
    for (a, ea) in e.operators().iter().enumerate() {
        for (b, fb) in f.operators().iter().enumerate() {
            let c = linalg::commutator(ea.matrix(), fb.matrix())?;
            terms[(a, b)] = linalg::schatten_norm(&c, p);
        }
    }
    Ok(IncompatibilityResult::from_terms(terms, p, Method::Dense))
}

/// Closed form for rank-1 measurements: `Σ_ab α_a β_b h_p(c_ab)`.
pub fn upsilon_rank1(e: &Rank1Form, f: &Rank1Form, p: SchattenP) -> Result<IncompatibilityResult> {
    let table = OverlapTable::from_forms(e, f)?;
    let mut terms = DMatrix::zeros(e.len(), f.len());
    for a in 0..e.len() {
        for b in 0..f.len() {
            terms[(a, b)] = e.weights[a] * f.weights[b] * h_p(table.c[(a, b)], p)?;
        }
    }
    Ok(IncompatibilityResult::from_terms(terms, p, Method::Rank1FastPath))
}

/// Rank-1 fast path straight from POVMs; [`Error::NotRank1`] otherwise.
pub fn upsilon_rank1_povm(e: &Povm, f: &Povm, p: SchattenP) -> Result<IncompatibilityResult> {
    upsilon_rank1(&Rank1Form::from_povm(e)?, &Rank1Form::from_povm(f)?, p)
}

/// Largest achievable value in dimension `d`: `2^{1/p} d √(d − 1)`.
pub fn max_upsilon(dim: usize, p: SchattenP) -> Result<f64> {
    if dim < 2 {
        return Err(Error::Domain(format!("maximal incompatibility needs d ≥ 2, got {dim}")));
    }
    let d = dim as f64;
    Ok(p.two_root() * d * (d - 1.0).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct MaximalityCertificate {
    pub is_maximal: bool,
    pub max_value: f64,
    pub upsilon: f64,
    /// Every operator of both measurements has numerical rank one.
    pub rank1_ok: bool,
    /// `max_ab |c_ab − 1/√d|`, computed on the rank-1 refinement when the inputs are
    /// not rank-1 (in which case the value depends on the eigenbasis choice).
    pub overlap_deviation: f64,
    /// `|Υ_p − max| ≤ d² · cert_tol`; recorded, not part of the decision.
    pub value_consistent: bool,
    pub diagnostics: Vec<String>,
}

/// Decides whether `(E, F)` is a maximally incompatible pair: all operators rank-1
/// and all overlaps within `cert_tol` of `1/√d`.
pub fn certify_maximal(e: &Povm, f: &Povm, p: SchattenP, cert_tol: f64) -> Result<MaximalityCertificate> {
    let d = e.dim();
    let max_value = max_upsilon(d, p)?;
    let value = upsilon(e, f, p)?.value;
    let mut diagnostics = Vec::new();

    let forms = (Rank1Form::from_povm(e), Rank1Form::from_povm(f));
    let rank1_ok = forms.0.is_ok() && forms.1.is_ok();
    let (re, rf) = match forms {
        (Ok(re), Ok(rf)) => (re, rf),
        (re, rf) => {
            for (name, r) in [("E", &re), ("F", &rf)] {
                if let Err(err) = r {
                    diagnostics.push(format!("{name}: {err}"));
                }
            }
            let refine = |m: &Povm| Rank1Form::from_povm(&crate::povm::rank1_decompose(m).0);
            (refine(e)?, refine(f)?)
        }
    };
    let table = OverlapTable::from_forms(&re, &rf)?;
    let target = 1.0 / (d as f64).sqrt();
    let overlap_deviation = table.c.iter().fold(0.0_f64, |m, &c| m.max((c - target).abs()));
    if overlap_deviation > cert_tol {
        diagnostics.push(format!("overlap deviation {overlap_deviation:e} exceeds {cert_tol:e}"));
    }
    let is_maximal = rank1_ok && overlap_deviation <= cert_tol;
    let value_consistent = (value - max_value).abs() <= (d * d) as f64 * cert_tol;
    if is_maximal && !value_consistent {
        diagnostics.push(format!("Υ = {value} differs from maximum {max_value}"));
    }
    Ok(MaximalityCertificate {
        is_maximal,
        max_value,
        upsilon: value,
        rank1_ok,
        overlap_deviation,
        value_consistent,
        diagnostics,
    })
}

/// `Υ_p(E ⊗ 𝟙_{d₂}, F ⊗ 𝟙_{d₂})`, evaluated densely. Equals `d₂^{1/p} Υ_p(E, F)`.
pub fn trivial_extension(e: &Povm, f: &Povm, d2: usize, p: SchattenP) -> Result<IncompatibilityResult> {
    upsilon(&e.trivial_extension(d2)?, &f.trivial_extension(d2)?, p)
}

/// `Υ_p(E ⊕ Ē, F ⊕ F̄)`, evaluated densely. Equals `Υ_p(E, F) + Υ_p(Ē, F̄)`.
pub fn direct_sum(e: &Povm, f: &Povm, e_bar: &Povm, f_bar: &Povm, p: SchattenP) -> Result<IncompatibilityResult> {
    if e.dim() != f.dim() || e_bar.dim() != f_bar.dim() {
        return Err(Error::DimensionMismatch("each pair must share a dimension".into()));
    }
    upsilon(&e.direct_sum(e_bar), &f.direct_sum(f_bar), p)
}

/// `Υ_p(E ⊗ Ē, F ⊗ F̄)`, evaluated densely.
pub fn tensor_product(e: &Povm, f: &Povm, e_bar: &Povm, f_bar: &Povm, p: SchattenP) -> Result<IncompatibilityResult> {
    if e.dim() != f.dim() || e_bar.dim() != f_bar.dim() {
        return Err(Error::DimensionMismatch("each pair must share a dimension".into()));
    }
    upsilon(&e.tensor(e_bar), &f.tensor(f_bar), p)
}

/// Closed form of the tensor composition for rank-1 projective inputs:
/// `2^{1/p} Σ c_ab c̄_āb̄ √(1 − (c_ab c̄_āb̄)²)`.
pub fn tensor_product_closed_form(c: &DMatrix<f64>, c_bar: &DMatrix<f64>, p: SchattenP) -> f64 {
    let mut terms = Vec::with_capacity(c.len() * c_bar.len());
    for &x in c.iter() {
        for &y in c_bar.iter() {
            let z = x * y;
            terms.push(z * (1.0 - z * z).max(0.0).sqrt());
        }
    }
    p.two_root() * pairwise_sum(&terms)
}
