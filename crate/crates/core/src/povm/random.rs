//! Seeded random measurements, maps and channels.
//!
//! Every `*_seeded` constructor uses `ChaCha8Rng::seed_from_u64`, so output is
//! identical across runs and platforms for a given seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{KrausChannel, Povm, StochasticMap};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, CMatrix, CVector, Hermitian};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian `(x + iy)/√2`.
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of `R`'s
/// diagonal absorbed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

pub fn random_basis_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Povm> {
    if dim < 2 {
        return Err(Error::Domain(format!("random basis needs d ≥ 2, got {dim}")));
    }
    Povm::from_basis(&random_unitary(dim, rng))
}

/// Measurement in a Haar-random orthonormal basis of `C^d`.
pub fn random_basis(dim: usize, seed: u64) -> Result<Povm> {
    random_basis_with(dim, &mut rng_from_seed(seed))
}

/// `n` Gaussian vectors `g_k`, whitened: `E_k = S^{-1/2}|g_k⟩⟨g_k|S^{-1/2}` with
/// `S = Σ_k |g_k⟩⟨g_k|`.
pub fn random_rank1_povm_with<R: Rng + ?Sized>(dim: usize, n: usize, rng: &mut R) -> Result<Povm> {
    if dim < 2 || n < dim {
        return Err(Error::Domain(format!("random rank-1 POVM needs d ≥ 2 and n ≥ d, got d = {dim}, n = {n}")));
    }
    let vectors: Vec<CVector> = (0..n)
        .map(|_| CVector::from_fn(dim, |_, _| complex_gaussian(rng)))
        .collect();
    let mut s = CMatrix::zeros(dim, dim);
    for g in &vectors {
        s += g * g.adjoint();
    }
    let eig = eig_hermitian(&Hermitian::new(s)?);
    if eig.eigenvalues.last().copied().unwrap_or(0.0) <= 1e-12 {
        return Err(Error::Domain("degenerate Gaussian frame".into()));
    }
    let inv_sqrt = eig.map_eigenvalues(|l| 1.0 / l.sqrt());
    let ops = vectors
        .iter()
        .map(|g| {
            let w = inv_sqrt.matrix() * g;
            let norm2 = w.norm_squared();
            Hermitian::rank_one(norm2, &(w / Complex64::new(norm2.sqrt(), 0.0)))
        })
        .collect();
    Povm::new(ops)
}

pub fn random_rank1_povm(dim: usize, n: usize, seed: u64) -> Result<Povm> {
    random_rank1_povm_with(dim, n, &mut rng_from_seed(seed))
}

/// Random column-stochastic map with strictly positive entries.
pub fn random_stochastic_map_with<R: Rng + ?Sized>(n_out: usize, n_in: usize, rng: &mut R) -> StochasticMap {
    let mut m = DMatrix::from_fn(n_out, n_in, |_, _| rng.random::<f64>() + 1e-3);
    for mut col in m.column_iter_mut() {
        let s = col.sum();
        col /= s;
        // Put the rounding error on the last entry so columns sum to 1 tightly.
        let drift = 1.0 - col.sum();
        col[n_out - 1] += drift;
    }
    StochasticMap::new(m).expect("normalized positive columns")
}

/// Random POVM with general (mixed-rank) operators: a random rank-1 POVM with
/// `n_fine` outcomes coarse-grained by a random stochastic map to `n` outcomes.
pub fn random_povm_with<R: Rng + ?Sized>(dim: usize, n: usize, n_fine: usize, rng: &mut R) -> Result<Povm> {
    let fine = random_rank1_povm_with(dim, n_fine, rng)?;
    super::post_process(&fine, &random_stochastic_map_with(n, n_fine, rng))
}

/// Random unital qubit channel: a convex mixture of 1–4 Haar unitary conjugations.
pub fn random_unital_qubit_channel_with<R: Rng + ?Sized>(rng: &mut R) -> KrausChannel {
    let terms = rng.random_range(1..=4);
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let kraus = weights
        .iter()
        .map(|w| random_unitary(2, rng) * Complex64::new((w / total).sqrt(), 0.0))
        .collect();
    KrausChannel::new(kraus).expect("mixture of unitaries is trace preserving")
}

pub fn random_unital_qubit_channel(seed: u64) -> KrausChannel {
    random_unital_qubit_channel_with(&mut rng_from_seed(seed))
}

/// Two qubit POVMs diagonal in the same random basis, hence commuting.
pub fn random_commuting_qubit_pair_with<R: Rng + ?Sized>(rng: &mut R) -> (Povm, Povm) {
    let u = random_unitary(2, rng);
    let make = |rng: &mut R| {
        let n = rng.random_range(2..=4);
        let map = random_stochastic_map_with(n, 2, rng);
        let ops = (0..n)
            .map(|a| {
                let diag = Hermitian::from_real_diagonal(&[map.entries()[(a, 0)], map.entries()[(a, 1)]]);
                diag.conjugate_by(&u)
            })
            .collect();
        Povm::new(ops).expect("same-dimension operators")
    };
    let e = make(rng);
    let f = make(rng);
    (e, f)
}
