//! Quantum measurements (POVMs): data model, validation, classification and the
//! standard constructions.

mod channel;
mod json;
pub mod random;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, basis_vector, canonical_phase, eig_hermitian, CMatrix, CVector, Hermitian, EIG_ZERO_TOL,
};

pub use channel::{post_process, pre_process, KrausChannel, StochasticMap};
pub use json::{channel_from_json, channel_to_json, format_f64, povm_from_json, povm_to_json};

/// Smallest eigenvalue tolerated for a measurement operator.
pub const PSD_TOL: f64 = 1e-9;
/// Tolerance for projectivity (`E² = E`) checks, on eigenvalues.
pub const PROJECTIVE_TOL: f64 = 1e-9;

/// Completeness tolerance `‖Σ_a E_a − 𝟙‖_∞` in dimension `dim`.
pub fn completeness_tol(dim: usize) -> f64 {
    1e-8 * dim as f64
}

/// An ordered list of Hermitian operators on `C^d`.
///
/// Construction only checks structure (equal dimensions, Hermiticity, at least one
/// operator). Semantic validity (positivity, completeness, no zero operators) is
/// reported by [`Povm::validate`]; use [`Povm::checked`] to require it.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    operators: Vec<Hermitian>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub dim: usize,
    pub outcomes: usize,
    /// Smallest eigenvalue of each operator.
    pub min_eigenvalues: Vec<f64>,
    /// Indices with smallest eigenvalue below `−PSD_TOL`.
    pub psd_violations: Vec<usize>,
    /// `‖Σ_a E_a − 𝟙‖_∞`.
    pub completeness_residual: f64,
    pub completeness_ok: bool,
    /// Indices whose operator is numerically zero.
    pub zero_operators: Vec<usize>,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.ok {
            return write!(f, "valid {}-outcome POVM on C^{}", self.outcomes, self.dim);
        }
        let mut parts = Vec::new();
        if !self.psd_violations.is_empty() {
            parts.push(format!("operators {:?} not positive semidefinite", self.psd_violations));
        }
        if !self.completeness_ok {
            parts.push(format!("Σ E_a deviates from identity by {:e}", self.completeness_residual));
        }
        if !self.zero_operators.is_empty() {
            parts.push(format!("operators {:?} are zero", self.zero_operators));
        }
        write!(f, "{}", parts.join("; "))
    }
}

/// Structural class of a measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MeasurementClass {
    pub is_projective: bool,
    pub is_rank1: bool,
    pub is_basis: bool,
}

impl Povm {
    pub fn new(operators: Vec<Hermitian>) -> Result<Self> {
        let dim = operators
            .first()
            .map(Hermitian::dim)
            .ok_or_else(|| Error::Domain("a POVM needs at least one operator".into()))?;
        if let Some(bad) = operators.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {} in a POVM on C^{dim}",
                bad.dim()
            )));
        }
        Ok(Povm { dim, operators })
    }

    /// Builds and requires a passing [`ValidationReport`].
    pub fn checked(operators: Vec<Hermitian>) -> Result<Self> {
        let povm = Povm::new(operators)?;
        let report = povm.validate();
        if report.ok {
            Ok(povm)
        } else {
            Err(Error::InvalidPovm(Box::new(report)))
        }
    }

    pub fn from_matrices(ms: Vec<CMatrix>) -> Result<Self> {
        Povm::new(ms.into_iter().map(Hermitian::new).collect::<Result<_>>()?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[Hermitian] {
        &self.operators
    }

    pub fn operator(&self, a: usize) -> &Hermitian {
        &self.operators[a]
    }

    pub fn validate(&self) -> ValidationReport {
        let min_eigenvalues: Vec<f64> = self.operators.iter().map(Hermitian::min_eigenvalue).collect();
        let psd_violations = min_eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l < -PSD_TOL)
            .map(|(a, _)| a)
            .collect::<Vec<_>>();
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        for e in &self.operators {
            sum += e.matrix();
        }
        let completeness_residual = linalg::operator_norm(&(sum - CMatrix::identity(self.dim, self.dim)));
        let completeness_ok = completeness_residual <= completeness_tol(self.dim);
        let zero_operators = self
            .operators
            .iter()
            .enumerate()
            .filter(|(_, e)| linalg::max_abs(e.matrix()) <= EIG_ZERO_TOL)
            .map(|(a, _)| a)
            .collect::<Vec<_>>();
        ValidationReport {
            ok: psd_violations.is_empty() && completeness_ok && zero_operators.is_empty(),
            dim: self.dim,
            outcomes: self.len(),
            min_eigenvalues,
            psd_violations,
            completeness_residual,
            completeness_ok,
            zero_operators,
        }
    }

    pub fn classify(&self) -> MeasurementClass {
        let mut is_projective = true;
        let mut is_rank1 = true;
        for e in &self.operators {
            let eig = eig_hermitian(e);
            if eig
                .eigenvalues
                .iter()
                .any(|&l| l.abs() > PROJECTIVE_TOL && (l - 1.0).abs() > PROJECTIVE_TOL)
            {
                is_projective = false;
            }
            if eig.rank() != 1 {
                is_rank1 = false;
            }
        }
        MeasurementClass { is_projective, is_rank1, is_basis: is_projective && is_rank1 }
    }

    /// Measurement in the computational basis of `C^d`.
    pub fn computational_basis(dim: usize) -> Povm {
        let ops = (0..dim)
            .map(|k| {
                let mut diag = vec![0.0; dim];
                diag[k] = 1.0;
                Hermitian::from_real_diagonal(&diag)
            })
            .collect();
        Povm { dim, operators: ops }
    }

    /// The single-outcome measurement `{𝟙_d}`.
    pub fn trivial(dim: usize) -> Povm {
        Povm { dim, operators: vec![Hermitian::identity(dim)] }
    }

    /// Measurement in the orthonormal basis formed by the columns of `basis`.
    pub fn from_basis(basis: &CMatrix) -> Result<Povm> {
        if basis.nrows() != basis.ncols() {
            return Err(Error::DimensionMismatch("basis matrix must be square".into()));
        }
        let ops = basis
            .column_iter()
            .map(|col| Hermitian::rank_one(1.0, &col.into_owned()))
            .collect();
        Povm::new(ops)
    }

    /// `{U E_a U†}`.
    pub fn conjugate(&self, u: &CMatrix) -> Povm {
        Povm { dim: self.dim, operators: self.operators.iter().map(|e| e.conjugate_by(u)).collect() }
    }

    /// `{E_a ⊗ 𝟙_{d₂}}`.
    pub fn trivial_extension(&self, d2: usize) -> Result<Povm> {
        if d2 == 0 {
            return Err(Error::Domain("extension dimension must be at least 1".into()));
        }
        let id = CMatrix::identity(d2, d2);
        Povm::from_matrices(self.operators.iter().map(|e| linalg::kron(e.matrix(), &id)).collect())
    }

    /// Direct-sum composition on `C^{d₁} ⊕ C^{d₂}`: `E_a ⊕ 0` followed by `0 ⊕ Ē_ā`.
    pub fn direct_sum(&self, other: &Povm) -> Povm {
        let z1 = CMatrix::zeros(self.dim, self.dim);
        let z2 = CMatrix::zeros(other.dim, other.dim);
        let ops = self
            .operators
            .iter()
            .map(|e| linalg::direct_sum(e.matrix(), &z2))
            .chain(other.operators.iter().map(|e| linalg::direct_sum(&z1, e.matrix())))
            .map(|m| Hermitian::new(m).expect("block-diagonal of Hermitian blocks"))
            .collect();
        Povm { dim: self.dim + other.dim, operators: ops }
    }

    /// Tensor-product composition; outcome `(a, ā)` has index `a · n̄ + ā`.
    pub fn tensor(&self, other: &Povm) -> Povm {
        let mut ops = Vec::with_capacity(self.len() * other.len());
        for e in &self.operators {
            for f in &other.operators {
                ops.push(Hermitian::new(linalg::kron(e.matrix(), f.matrix())).expect("kron of Hermitians"));
            }
        }
        Povm { dim: self.dim * other.dim, operators: ops }
    }

    pub fn from_rank1_form(form: &Rank1Form) -> Povm {
        let ops = form
            .weights
            .iter()
            .zip(&form.vectors)
            .map(|(&w, v)| Hermitian::rank_one(w, v))
            .collect();
        Povm { dim: form.dim, operators: ops }
    }
}

/// Rank-1 representation `E_a = α_a |e_a⟩⟨e_a|` with unit vectors in canonical phase.
#[derive(Clone, Debug)]
pub struct Rank1Form {
    pub dim: usize,
    pub weights: Vec<f64>,
    pub vectors: Vec<CVector>,
}

impl Rank1Form {
    /// Fails with [`Error::NotRank1`] if some operator has numerical rank ≠ 1.
    pub fn from_povm(povm: &Povm) -> Result<Self> {
        let mut weights = Vec::with_capacity(povm.len());
        let mut vectors = Vec::with_capacity(povm.len());
        for (index, e) in povm.operators.iter().enumerate() {
            let eig = eig_hermitian(e);
            let rank = eig.rank();
            if rank != 1 || eig.eigenvalues[0] <= EIG_ZERO_TOL {
                return Err(Error::NotRank1 { index, rank });
            }
            weights.push(eig.eigenvalues[0]);
            vectors.push(canonical_phase(&eig.eigenvector(0)));
        }
        Ok(Rank1Form { dim: povm.dim, weights, vectors })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Overlap moduli `c_ab = |⟨e_a|f_b⟩|` between the rank-1 eigenvectors of two
/// measurements, plus their weights.
#[derive(Clone, Debug)]
pub struct OverlapTable {
    pub c: DMatrix<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl OverlapTable {
    pub fn from_forms(e: &Rank1Form, f: &Rank1Form) -> Result<Self> {
        if e.dim != f.dim {
            return Err(Error::DimensionMismatch(format!("overlaps between C^{} and C^{}", e.dim, f.dim)));
        }
        let c = DMatrix::from_fn(e.len(), f.len(), |a, b| {
            e.vectors[a].dotc(&f.vectors[b]).norm().min(1.0)
        });
        Ok(OverlapTable { c, alpha: e.weights.clone(), beta: f.weights.clone() })
    }

    /// Squared overlaps `t_ab = c_ab²`.
    pub fn squares(&self) -> DMatrix<f64> {
        self.c.map(|x| x * x)
    }

    /// `Σ_ab α_a β_b t_ab`, equal to `d` for any pair of rank-1 measurements.
    pub fn weighted_square_sum(&self) -> f64 {
        let mut s = 0.0;
        for a in 0..self.alpha.len() {
            for b in 0..self.beta.len() {
                s += self.alpha[a] * self.beta[b] * self.c[(a, b)].powi(2);
            }
        }
        s
    }

    /// Largest deviation of a row or column sum of `t` from 1.
    pub fn bistochastic_deviation(&self) -> f64 {
        let t = self.squares();
        let rows = t.row_iter().map(|r| (r.sum() - 1.0).abs());
        let cols = t.column_iter().map(|c| (c.sum() - 1.0).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }
}

/// Overlap table of two rank-1 measurements.
pub fn overlap_table(e: &Povm, f: &Povm) -> Result<OverlapTable> {
    OverlapTable::from_forms(&Rank1Form::from_povm(e)?, &Rank1Form::from_povm(f)?)
}

/// Computational basis and Fourier basis `F_jk = e^{2πi jk/d}/√d` on `C^d`.
pub fn mub_pair(dim: usize) -> Result<(Povm, Povm)> {
    if dim < 2 {
        return Err(Error::Domain(format!("MUB pair needs d ≥ 2, got {dim}")));
    }
    Ok((Povm::computational_basis(dim), Povm::from_basis(&fourier_matrix(dim))?))
}

/// Unitary discrete Fourier matrix; phases use `jk mod d` to keep arguments small.
pub fn fourier_matrix(dim: usize) -> CMatrix {
    let norm = 1.0 / (dim as f64).sqrt();
    CMatrix::from_fn(dim, dim, |j, k| {
        let angle = 2.0 * PI * ((j * k) % dim) as f64 / dim as f64;
        Complex64::from_polar(norm, angle)
    })
}

/// Splits every operator into its rank-1 spectral pieces.
///
/// Returns the rank-1 POVM (one outcome per non-zero eigenvalue, in operator order)
/// and the deterministic merge map that recovers the input through
/// [`post_process`]. Degenerate eigenspaces use whatever orthonormal eigenbasis the
/// eigensolver returns.
pub fn rank1_decompose(povm: &Povm) -> (Povm, StochasticMap) {
    let mut ops = Vec::new();
    let mut owner = Vec::new();
    for (a, e) in povm.operators.iter().enumerate() {
        let eig = eig_hermitian(e);
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > EIG_ZERO_TOL {
                ops.push(Hermitian::rank_one(lambda, &canonical_phase(&eig.eigenvector(k))));
                owner.push(a);
            }
        }
    }
    let map = StochasticMap::deterministic(&owner, povm.len()).expect("owner labels are in range");
    (Povm { dim: povm.dim, operators: ops }, map)
}

/// The two-outcome projective qutrit measurements `E = {diag(1,1,0), diag(0,0,1)}`
/// and `F = {diag(1,0,1), diag(0,1,0)}`. They commute, so `Υ_p(E, F) = 0`.
pub fn qutrit_commuting_fixture() -> (Povm, Povm) {
    let e = Povm {
        dim: 3,
        operators: vec![
            Hermitian::from_real_diagonal(&[1.0, 1.0, 0.0]),
            Hermitian::from_real_diagonal(&[0.0, 0.0, 1.0]),
        ],
    };
    let f = Povm {
        dim: 3,
        operators: vec![
            Hermitian::from_real_diagonal(&[1.0, 0.0, 1.0]),
            Hermitian::from_real_diagonal(&[0.0, 1.0, 0.0]),
        ],
    };
    (e, f)
}

/// Trine POVM `{⅔ |ψ_k⟩⟨ψ_k|}` on a qubit with real unit vectors at 120° in the
/// Bloch plane (60° in Hilbert space).
pub fn trine() -> Povm {
    let ops = (0..3)
        .map(|k| {
            let theta = PI * k as f64 / 3.0;
            let v = CVector::from_vec(vec![
                Complex64::new(theta.cos(), 0.0),
                Complex64::new(theta.sin(), 0.0),
            ]);
            Hermitian::rank_one(2.0 / 3.0, &v)
        })
        .collect();
    Povm { dim: 2, operators: ops }
}

/// `{|k⟩⟨k|}` rank-1 operators as unit vectors, exposed for tests and fixtures.
pub fn computational_vectors(dim: usize) -> Vec<CVector> {
    (0..dim).map(|k| basis_vector(dim, k)).collect()
}
