#![allow(dead_code)]

use num_complex::Complex64;
use qincompat::linalg::{CMatrix, CVector, Hermitian};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn cgauss<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> Hermitian {
    let g = CMatrix::from_fn(dim, dim, |_, _| cgauss(rng));
    Hermitian::new((&g + g.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
}

pub fn random_unit<R: Rng>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| cgauss(rng));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Unit vector `f` with `|⟨e|f⟩| = c`, random phase and random orthogonal part.
pub fn vector_with_overlap<R: Rng>(e: &CVector, c: f64, rng: &mut R) -> CVector {
    let mut w = random_unit(e.len(), rng);
    let proj = e.dotc(&w);
    w -= e * proj;
    let w = &w / Complex64::new(w.norm(), 0.0);
    let phase = Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU);
    (e * Complex64::new(c, 0.0) + w * Complex64::new((1.0 - c * c).max(0.0).sqrt(), 0.0)) * phase
}

/// The three-level construction `A = i[P₀, Q]`, `B = i[P₁, Q]` with
/// `P₀ = |0⟩⟨0|`, `P₁ = γ|1⟩⟨1|`, `Q = |ψ⟩⟨ψ|`, `ψ ∝ a|0⟩ + b|1⟩ + c|2⟩`.
pub fn three_level_pair(gamma: f64, a: Complex64, b: Complex64, c: Complex64) -> (CMatrix, CMatrix) {
    let i = Complex64::new(0.0, 1.0);
    let norm = (a.norm_sqr() + b.norm_sqr() + c.norm_sqr()).sqrt();
    let psi = CVector::from_vec(vec![a / norm, b / norm, c / norm]);
    let q = &psi * psi.adjoint();
    let mut p0 = CMatrix::zeros(3, 3);
    p0[(0, 0)] = Complex64::new(1.0, 0.0);
    let mut p1 = CMatrix::zeros(3, 3);
    p1[(1, 1)] = Complex64::new(gamma, 0.0);
    let comm = |x: &CMatrix| (x * &q - &q * x) * i;
    (comm(&p0), comm(&p1))
}
