//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Hermitian operators are wrapped in
//! [`Hermitian`], which checks Hermiticity on construction and stores the exactly
//! symmetrized matrix so downstream eigensolves see a bit-exact Hermitian input.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Absolute tolerance on `max |A - A†|` accepted by [`Hermitian::new`].
pub const HERMITICITY_TOL: f64 = 1e-9;
/// Eigenvalues with modulus at or below this are treated as zero.
pub const EIG_ZERO_TOL: f64 = 1e-10;

/// Allowed `‖Σ λ_j P_j − A‖` residual for a decomposition of a `dim × dim` operator.
pub fn reconstruction_tol(dim: usize) -> f64 {
    1e-9 * dim as f64
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Schatten / vector norm index `p ∈ [1, ∞]`.
///
/// Infinity is a distinct variant, so the convention `2^{1/∞} = 1` holds exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchattenP {
    Finite(f64),
    Infinity,
}

impl SchattenP {
    pub const ONE: SchattenP = SchattenP::Finite(1.0);
    pub const TWO: SchattenP = SchattenP::Finite(2.0);
    pub const INF: SchattenP = SchattenP::Infinity;

    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(SchattenP::Finite(p))
        } else if p == f64::INFINITY {
            Ok(SchattenP::Infinity)
        } else {
            Err(Error::Domain(format!("Schatten index p = {p} must lie in [1, ∞]")))
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            SchattenP::Finite(p) => 1.0 / p,
            SchattenP::Infinity => 0.0,
        }
    }

    /// `x^{1/p}`; equals 1 for `p = ∞` whatever `x` is.
    pub fn root_of(self, x: f64) -> f64 {
        match self {
            SchattenP::Finite(p) if p == 1.0 => x,
            SchattenP::Finite(p) => x.powf(1.0 / p),
            SchattenP::Infinity => 1.0,
        }
    }

    /// `2^{1/p}`.
    pub fn two_root(self) -> f64 {
        self.root_of(2.0)
    }

    /// The dual index `q` with `1/p + 1/q = 1`.
    pub fn dual(self) -> SchattenP {
        match self {
            SchattenP::Infinity => SchattenP::ONE,
            SchattenP::Finite(p) if p == 1.0 => SchattenP::Infinity,
            SchattenP::Finite(p) => SchattenP::Finite(p / (p - 1.0)),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, SchattenP::Infinity)
    }
}

impl fmt::Display for SchattenP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchattenP::Finite(p) => write!(f, "{p}"),
            SchattenP::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for SchattenP {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(SchattenP::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::Parse(format!("cannot parse Schatten index {s:?}")))?;
                SchattenP::finite(p)
            }
        }
    }
}

impl Serialize for SchattenP {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SchattenP::Finite(p) => serializer.serialize_f64(*p),
            SchattenP::Infinity => serializer.serialize_str("inf"),
        }
    }
}

/// A square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    /// Checks shape, finiteness and Hermiticity (within [`HERMITICITY_TOL`]), then
    /// stores `(A + A†)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian operator must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let deviation = hermiticity_deviation(&m);
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Hermitian(symmetrize(&m)))
    }

    pub fn identity(dim: usize) -> Self {
        Hermitian(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Hermitian(CMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Hermitian(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    /// Real symmetric matrix from row-major entries.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries, got {}",
                dim * dim,
                rows.len()
            )));
        }
        Hermitian::new(CMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(rows[i * dim + j], 0.0)
        }))
    }

    /// `weight · |v⟩⟨v|`.
    pub fn rank_one(weight: f64, v: &CVector) -> Self {
        let outer = v * v.adjoint();
        Hermitian(symmetrize(&(outer * Complex64::new(weight, 0.0))))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, s: f64) -> Hermitian {
        Hermitian(&self.0 * Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &other.0)
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Hermitian {
        Hermitian(symmetrize(&(u * &self.0 * u.adjoint())))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eig_hermitian(self).eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        eig_hermitian(self).eigenvalues.first().copied().unwrap_or(0.0)
    }
}

/// `max_ij |A_ij − conj(A_ji)|`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian operator.
///
/// Eigenvalues are sorted in descending order; column `k` of `eigenvectors` is the
/// unit eigenvector for `eigenvalues[k]`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// `Σ_k g(λ_k) |v_k⟩⟨v_k|`.
    pub fn map_eigenvalues(&self, g: impl Fn(f64) -> f64) -> Hermitian {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = g(lambda);
            if w == 0.0 {
                continue;
            }
            let v = self.eigenvectors.column(k);
            out += (&v * v.adjoint()) * Complex64::new(w, 0.0);
        }
        Hermitian(symmetrize(&out))
    }

    pub fn reconstruct(&self) -> Hermitian {
        self.map_eigenvalues(|l| l)
    }

    /// Eigenprojectors grouped by clusters of eigenvalues closer than
    /// [`EIG_ZERO_TOL`]; each cluster is represented by its mean eigenvalue.
    pub fn projectors(&self) -> Vec<(f64, Hermitian)> {
        let n = self.dim();
        let mut out: Vec<(f64, Hermitian)> = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && self.eigenvalues[end - 1] - self.eigenvalues[end] <= EIG_ZERO_TOL {
                end += 1;
            }
            let mean = self.eigenvalues[start..end].iter().sum::<f64>() / (end - start) as f64;
            let mut proj = CMatrix::zeros(n, n);
            for k in start..end {
                let v = self.eigenvectors.column(k);
                proj += &v * v.adjoint();
            }
            out.push((mean, Hermitian(symmetrize(&proj))));
            start = end;
        }
        out
    }

    /// Number of eigenvalues with modulus above [`EIG_ZERO_TOL`].
    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|l| l.abs() > EIG_ZERO_TOL).count()
    }
}

/// Hermitian eigendecomposition, eigenvalues in descending order.
///
/// Backed by nalgebra's Householder tridiagonalization + implicit QR, which is
/// sequential and hence bit-reproducible for identical inputs.
pub fn eig_hermitian(a: &Hermitian) -> SpectralDecomposition {
    let eig = a.0.clone().symmetric_eigen();
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    SpectralDecomposition { eigenvalues, eigenvectors }
}

/// Checks Hermiticity then decomposes; the entry point for raw matrices.
pub fn eig_hermitian_matrix(a: &CMatrix) -> Result<SpectralDecomposition> {
    Ok(eig_hermitian(&Hermitian::new(a.clone())?))
}

/// Singular values, in no particular order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    a.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Vector p-norm of a list of moduli.
pub fn vector_norm(values: &[f64], p: SchattenP) -> f64 {
    match p {
        SchattenP::Infinity => values.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        SchattenP::Finite(q) if q == 1.0 => values.iter().map(|v| v.abs()).sum(),
        SchattenP::Finite(q) => values.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q),
    }
}

/// Schatten p-norm: the vector p-norm of the singular values.
pub fn schatten_norm(a: &CMatrix, p: SchattenP) -> f64 {
    if a.iter().all(|z| *z == ZERO) {
        return 0.0;
    }
    vector_norm(&singular_values(a), p)
}

/// `A⁺ = Σ_{λ>0} λ P_λ`. Eigenvalues within [`EIG_ZERO_TOL`] of zero are dropped.
pub fn positive_part(a: &Hermitian) -> Hermitian {
    eig_hermitian(a).map_eigenvalues(|l| if l > EIG_ZERO_TOL { l } else { 0.0 })
}

/// `A⁻ = Σ_{λ<0} λ P_λ` (a negative semidefinite operator).
pub fn negative_part(a: &Hermitian) -> Hermitian {
    eig_hermitian(a).map_eigenvalues(|l| if l < -EIG_ZERO_TOL { l } else { 0.0 })
}

/// `|A| = A⁺ − A⁻`.
pub fn absolute_value(a: &Hermitian) -> Hermitian {
    eig_hermitian(a).map_eigenvalues(|l| if l.abs() > EIG_ZERO_TOL { l.abs() } else { 0.0 })
}

/// `AB − BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != a.ncols() || b.shape() != a.shape() {
        return Err(Error::DimensionMismatch(format!(
            "commutator of {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a * b - b * a)
}

/// Hilbert–Schmidt inner product `⟨X, Y⟩ = tr(X† Y)`.
pub fn hs_inner(x: &CMatrix, y: &CMatrix) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Block-diagonal `A ⊕ B`.
pub fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (r1, c1) = a.shape();
    let (r2, c2) = b.shape();
    let mut out = CMatrix::zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(a);
    out.view_mut((r1, c1), (r2, c2)).copy_from(b);
    out
}

/// Entrywise max modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Operator (spectral) norm, `‖A‖_∞`.
pub fn operator_norm(a: &CMatrix) -> f64 {
    schatten_norm(a, SchattenP::Infinity)
}

fn check_unit_interval(c: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&c) || c.is_nan() {
        return Err(Error::Domain(format!("{what} = {c} must lie in [0, 1]")));
    }
    Ok(())
}

fn check_weights(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::Domain(format!("weights ({alpha}, {beta}) must be finite and non-negative")));
    }
    Ok(())
}

/// For `A = α|e⟩⟨e|`, `B = β|f⟩⟨f|` with overlap `c = |⟨e|f⟩|`, the non-zero
/// eigenvalues of `[A, B]` are `±iλ`; returns `λ = αβ c √(1 − c²)`.
pub fn rank1_commutator_spectrum(alpha: f64, beta: f64, c: f64) -> Result<f64> {
    check_weights(alpha, beta)?;
    check_unit_interval(c, "overlap")?;
    Ok(alpha * beta * c * (1.0 - c * c).max(0.0).sqrt())
}

/// Non-zero eigenvalues `(η₊, η₋)` of `α|e⟩⟨e| + β|f⟩⟨f|` with `c = |⟨e|f⟩|`.
pub fn rank1_sum_spectrum(alpha: f64, beta: f64, c: f64) -> Result<(f64, f64)> {
    check_weights(alpha, beta)?;
    check_unit_interval(c, "overlap")?;
    let diff = alpha - beta;
    let disc = (diff * diff + 4.0 * alpha * beta * c * c).sqrt();
    let plus = 0.5 * (alpha + beta + disc);
    // η₋ via the product η₊η₋ = αβ(1 − c²) avoids cancellation.
    let minus = if plus > 0.0 { alpha * beta * (1.0 - c * c) / plus } else { 0.0 };
    Ok((plus, minus))
}

/// `h_p(c) = 2^{1/p} c √(1 − c²)`, the Schatten p-norm of the commutator of two unit
/// rank-1 projectors with overlap `c`.
pub fn h_p(c: f64, p: SchattenP) -> Result<f64> {
    check_unit_interval(c, "overlap")?;
    Ok(p.two_root() * c * (1.0 - c * c).max(0.0).sqrt())
}

/// `h_p′(c) = 2^{1/p} (1 − 2c²)/√(1 − c²)` for `c ∈ [0, 1)`.
pub fn h_p_derivative(c: f64, p: SchattenP) -> Result<f64> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::Domain(format!("h_p' is defined on [0, 1), got {c}")));
    }
    Ok(p.two_root() * (1.0 - 2.0 * c * c) / (1.0 - c * c).sqrt())
}

/// `h̃_p(t) = 2^{1/p} √(t(1 − t))`, i.e. `h_p` as a function of the squared overlap.
///
/// Arguments are clamped to `[0, 1]` so that round-off just outside the interval
/// yields 0 rather than NaN.
pub fn h_tilde(t: f64, p: SchattenP) -> f64 {
    let t = t.clamp(0.0, 1.0);
    p.two_root() * (t * (1.0 - t)).sqrt()
}

/// A Hermitian `X` with `‖X‖_q = 1` and `⟨X, A⟩ = ‖A‖_p`, where `q` is dual to `p`.
///
/// Built from the spectral data of `A`; returns the zero operator when `A = 0`.
pub fn dual_optimizer(a: &Hermitian, p: SchattenP) -> Hermitian {
    let eig = eig_hermitian(a);
    let abs: Vec<f64> = eig.eigenvalues.iter().map(|l| l.abs()).collect();
    if abs.iter().all(|&l| l <= EIG_ZERO_TOL) {
        return Hermitian::zeros(a.dim());
    }
    match p {
        SchattenP::Infinity => {
            let (k, _) = abs
                .iter()
                .enumerate()
                .fold((0, -1.0), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) });
            let sign = eig.eigenvalues[k].signum();
            Hermitian::rank_one(sign, &eig.eigenvector(k))
        }
        SchattenP::Finite(q) if q == 1.0 => eig.map_eigenvalues(|l| {
            if l.abs() > EIG_ZERO_TOL {
                l.signum()
            } else {
                0.0
            }
        }),
        SchattenP::Finite(q) => {
            let norm = vector_norm(&abs, p);
            let scale = norm.powf(q - 1.0);
            eig.map_eigenvalues(|l| l.signum() * l.abs().powf(q - 1.0) / scale)
        }
    }
}

/// Unit vector `e_k` in `C^d`.
pub fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = ONE;
    v
}

/// Multiplies `v` by a global phase so its first non-negligible component is real
/// and positive.
pub fn canonical_phase(v: &CVector) -> CVector {
    let scale = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let lead = v.iter().find(|z| z.norm() > 1e-8 * scale.max(f64::MIN_POSITIVE));
    match lead {
        Some(z) => {
            let phase = z.conj() / z.norm();
            let mut out = v * phase;
            // Pin the leading component to exactly real.
            if let Some(first) = out.iter_mut().find(|w| w.norm() > 1e-8 * scale) {
                *first = Complex64::new(first.norm(), 0.0);
            }
            out
        }
        None => v.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli() -> [CMatrix; 3] {
        [
            CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
            CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
            CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
        ]
    }

    fn lcg_hermitian(dim: usize, mut seed: u64) -> Hermitian {
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = CMatrix::from_fn(dim, dim, |_, _| c(next(), next()));
        Hermitian::new(symmetrize(&m)).unwrap()
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = eig_hermitian(&Hermitian::identity(2));
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0]);
        assert_eq!(eig.projectors().len(), 1);
    }

    #[test]
    fn pauli_z_projectors() {
        let z = Hermitian::new(pauli()[2].clone()).unwrap();
        let eig = eig_hermitian(&z);
        assert_eq!(eig.eigenvalues, vec![1.0, -1.0]);
        let projs = eig.projectors();
        assert_eq!(projs.len(), 2);
        let p0 = Hermitian::from_real_diagonal(&[1.0, 0.0]);
        let p1 = Hermitian::from_real_diagonal(&[0.0, 1.0]);
        assert!(max_abs(&(projs[0].1.matrix() - p0.matrix())) < 1e-14);
        assert!(max_abs(&(projs[1].1.matrix() - p1.matrix())) < 1e-14);
    }

    #[test]
    fn random_reconstruction() {
        let a = lcg_hermitian(5, 42);
        let eig = eig_hermitian(&a);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let back = eig.reconstruct();
        assert!(max_abs(&(back.matrix() - a.matrix())) < 1e-10);
        for (i, (_, pi)) in eig.projectors().iter().enumerate() {
            assert!(max_abs(&(pi.matrix() * pi.matrix() - pi.matrix())) < 1e-10);
            for (_, pj) in eig.projectors().iter().skip(i + 1) {
                assert!(max_abs(&(pi.matrix() * pj.matrix())) < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(1., 0.), c(0., 0.), c(1., 0.)]);
        assert!(matches!(Hermitian::new(m.clone()), Err(Error::NotHermitian { .. })));
        assert!(matches!(eig_hermitian_matrix(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn schatten_of_diagonal() {
        let a = Hermitian::from_real_diagonal(&[3.0, -4.0]).into_matrix();
        assert!((schatten_norm(&a, SchattenP::ONE) - 7.0).abs() < 1e-14);
        assert!((schatten_norm(&a, SchattenP::TWO) - 5.0).abs() < 1e-14);
        assert!((schatten_norm(&a, SchattenP::INF) - 4.0).abs() < 1e-14);
        for p in [SchattenP::ONE, SchattenP::Finite(3.5), SchattenP::INF] {
            assert_eq!(schatten_norm(&CMatrix::zeros(3, 3), p), 0.0);
        }
    }

    #[test]
    fn frobenius_identity() {
        let a = CMatrix::from_fn(4, 3, |i, j| c(i as f64 - 0.3 * j as f64, (i * j) as f64 * 0.7 - 1.0));
        let frob = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((schatten_norm(&a, SchattenP::TWO) - frob).abs() < 1e-12);
    }

    #[test]
    fn spectral_parts() {
        let a = Hermitian::from_real_diagonal(&[1.0, -2.0]);
        assert_eq!(positive_part(&a).matrix(), Hermitian::from_real_diagonal(&[1.0, 0.0]).matrix());
        assert_eq!(negative_part(&a).matrix(), Hermitian::from_real_diagonal(&[0.0, -2.0]).matrix());
        assert_eq!(absolute_value(&a).matrix(), Hermitian::from_real_diagonal(&[1.0, 2.0]).matrix());

        let psd = Hermitian::from_real_diagonal(&[0.5, 0.0, 2.0]);
        assert_eq!(max_abs(negative_part(&psd).matrix()), 0.0);

        let r = lcg_hermitian(6, 7);
        let abs = absolute_value(&r);
        assert!((schatten_norm(r.matrix(), SchattenP::ONE) - abs.trace()).abs() < 1e-10);
        let sum = positive_part(&r).add(&negative_part(&r));
        assert!(max_abs(&(sum.matrix() - r.matrix())) < 1e-10);
    }

    #[test]
    fn commutators() {
        let [x, y, z] = pauli();
        assert_eq!(max_abs(&commutator(&x, &x).unwrap()), 0.0);
        let xy = commutator(&x, &y).unwrap();
        assert!(max_abs(&(xy - z * c(0., 2.))) < 1e-15);
        let d1 = Hermitian::from_real_diagonal(&[1.0, 2.0, 3.0]).into_matrix();
        let d2 = Hermitian::from_real_diagonal(&[-1.0, 0.5, 9.0]).into_matrix();
        assert_eq!(max_abs(&commutator(&d1, &d2).unwrap()), 0.0);
        assert!(matches!(commutator(&d1, &x), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn rank1_closed_forms() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((rank1_commutator_spectrum(1.0, 1.0, s).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(rank1_commutator_spectrum(1.0, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(rank1_commutator_spectrum(1.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(rank1_commutator_spectrum(0.0, 1.0, 0.3).unwrap(), 0.0);
        assert!(rank1_commutator_spectrum(1.0, 1.0, 1.5).is_err());

        assert_eq!(rank1_sum_spectrum(1.0, 1.0, 0.0).unwrap(), (1.0, 1.0));
        let (hi, lo) = rank1_sum_spectrum(1.0, 1.0, s).unwrap();
        assert!((hi - (1.0 + s)).abs() < 1e-15 && (lo - (1.0 - s)).abs() < 1e-15);
        assert_eq!(rank1_sum_spectrum(0.7, 0.0, 0.4).unwrap(), (0.7, 0.0));
        assert!(rank1_sum_spectrum(1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn h_p_values() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h_p(s, SchattenP::ONE).unwrap() - 1.0).abs() < 1e-15);
        assert!((h_p(s, SchattenP::INF).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(h_p(0.0, SchattenP::TWO).unwrap(), 0.0);
        assert_eq!(h_p(1.0, SchattenP::TWO).unwrap(), 0.0);
        assert!(h_p(1.01, SchattenP::ONE).is_err());
    }

    #[test]
    fn schatten_p_parsing() {
        assert_eq!("inf".parse::<SchattenP>().unwrap(), SchattenP::Infinity);
        assert_eq!("2".parse::<SchattenP>().unwrap(), SchattenP::TWO);
        assert!("0.5".parse::<SchattenP>().is_err());
        assert_eq!(SchattenP::INF.two_root(), 1.0);
        assert_eq!(SchattenP::ONE.dual(), SchattenP::INF);
        assert_eq!(SchattenP::Finite(3.0).dual(), SchattenP::Finite(1.5));
    }

    #[test]
    fn dual_optimizer_saturates() {
        let a = lcg_hermitian(4, 99);
        for p in [SchattenP::ONE, SchattenP::TWO, SchattenP::Finite(3.0), SchattenP::INF] {
            let x = dual_optimizer(&a, p);
            let inner = hs_inner(x.matrix(), a.matrix()).re;
            assert!((inner - schatten_norm(a.matrix(), p)).abs() < 1e-8, "p = {p}");
            assert!((schatten_norm(x.matrix(), p.dual()) - 1.0).abs() < 1e-8, "p = {p}");
        }
    }

    #[test]
    fn canonical_phase_is_real_positive() {
        let v = CVector::from_vec(vec![c(0.0, 0.0), c(0.0, -0.6), c(0.8, 0.0)]);
        let w = canonical_phase(&v);
        assert_eq!(w[1], c(0.6, 0.0));
        assert!((w[2] - c(0.0, 0.8)).norm() < 1e-15);
    }
}
