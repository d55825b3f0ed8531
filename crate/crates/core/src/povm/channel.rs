use nalgebra::DMatrix;
use num_complex::Complex64;

use super::Povm;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Hermitian};

const STOCHASTIC_TOL: f64 = 1e-12;
const KRAUS_TOL: f64 = 1e-9;

/// Column-stochastic matrix `P(a'|a)`: `n_out × n_in`, non-negative, columns sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMap {
    entries: DMatrix<f64>,
}

impl StochasticMap {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidStochasticMap("empty matrix".into()));
        }
        if let Some(x) = entries.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidStochasticMap(format!("entry {x} is not a probability")));
        }
        for (a, col) in entries.column_iter().enumerate() {
            let s = col.sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidStochasticMap(format!("column {a} sums to {s}")));
            }
        }
        Ok(StochasticMap { entries })
    }

    pub fn identity(n: usize) -> Self {
        StochasticMap { entries: DMatrix::identity(n, n) }
    }

    /// Collapses every input outcome onto a single output.
    pub fn merge_all(n_in: usize) -> Self {
        StochasticMap { entries: DMatrix::from_element(1, n_in, 1.0) }
    }

    /// Input outcome `a` goes to output `assign[a]` with certainty.
    pub fn deterministic(assign: &[usize], n_out: usize) -> Result<Self> {
        if let Some(&bad) = assign.iter().find(|&&x| x >= n_out) {
            return Err(Error::InvalidStochasticMap(format!("label {bad} ≥ {n_out}")));
        }
        let mut entries = DMatrix::zeros(n_out, assign.len());
        for (a, &out) in assign.iter().enumerate() {
            entries[(out, a)] = 1.0;
        }
        StochasticMap::new(entries)
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn n_out(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_in(&self) -> usize {
        self.entries.ncols()
    }
}

/// `Ẽ_{a'} = Σ_a P(a'|a) E_a`.
pub fn post_process(povm: &Povm, map: &StochasticMap) -> Result<Povm> {
    if map.n_in() != povm.len() {
        return Err(Error::DimensionMismatch(format!(
            "stochastic map expects {} outcomes, POVM has {}",
            map.n_in(),
            povm.len()
        )));
    }
    let d = povm.dim();
    let ops = (0..map.n_out())
        .map(|out| {
            let mut acc = CMatrix::zeros(d, d);
            for (a, e) in povm.operators().iter().enumerate() {
                let w = map.entries[(out, a)];
                if w != 0.0 {
                    acc += e.matrix() * Complex64::new(w, 0.0);
                }
            }
            Hermitian::new(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(ops)
}

/// Channel `Λ(ρ) = Σ_j K_j ρ K_j†` from `C^{d′}` (input) to `C^d` (output); each
/// Kraus operator is `d × d′`.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl KrausChannel {
    /// Requires `Σ_j K_j†K_j = 𝟙_{d′}` within 1e-9.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let (dim_out, dim_in) = kraus
            .first()
            .map(|k| k.shape())
            .ok_or_else(|| Error::Domain("a channel needs at least one Kraus operator".into()))?;
        if kraus.iter().any(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch("Kraus operators of different shapes".into()));
        }
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let deviation = linalg::max_abs(&(sum - CMatrix::identity(dim_in, dim_in)));
        if deviation > KRAUS_TOL {
            return Err(Error::InvalidChannel { deviation });
        }
        Ok(KrausChannel { dim_in, dim_out, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel { dim_in: dim, dim_out: dim, kraus: vec![CMatrix::identity(dim, dim)] }
    }

    /// `ρ ↦ U ρ U†`; requires `U` unitary.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        KrausChannel::new(vec![u])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Schrödinger picture `Λ(ρ)`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Heisenberg picture `Λ†(A) = Σ_j K_j† A K_j`.
    pub fn adjoint_apply(&self, a: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * a * k;
        }
        out
    }

    /// `‖Σ_j K_j K_j† − 𝟙‖` (entrywise max); zero for unital channels.
    pub fn unitality_deviation(&self) -> f64 {
        if self.dim_in != self.dim_out {
            return f64::INFINITY;
        }
        let mut sum = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            sum += k * k.adjoint();
        }
        linalg::max_abs(&(sum - CMatrix::identity(self.dim_out, self.dim_out)))
    }

    /// The qutrit-to-qubit channel with Kraus operators
    ///
    /// ```text
    /// K₁ = (√2/3) [[1, 0], [1, 0], [−1, 0]]
    /// K₂ = [[−1/(2√3), 1/2], [1/(2√3), −1/2], [0, 0]]
    /// K₃ = [[−1/√6, −1/√2], [0, 0], [0, 0]]
    /// ```
    ///
    /// Its dual maps the commuting pair of [`super::qutrit_commuting_fixture`] to a
    /// non-commuting qubit pair.
    pub fn qutrit_to_qubit_fixture() -> KrausChannel {
        let r = |x: f64| Complex64::new(x, 0.0);
        let s3 = 3.0_f64.sqrt();
        let k1c = 2.0_f64.sqrt() / 3.0;
        let k1 = CMatrix::from_row_slice(3, 2, &[r(k1c), r(0.0), r(k1c), r(0.0), r(-k1c), r(0.0)]);
        let a = 1.0 / (2.0 * s3);
        let k2 = CMatrix::from_row_slice(3, 2, &[r(-a), r(0.5), r(a), r(-0.5), r(0.0), r(0.0)]);
        let k3 = CMatrix::from_row_slice(
            3,
            2,
            &[r(-1.0 / 6.0_f64.sqrt()), r(-std::f64::consts::FRAC_1_SQRT_2), r(0.0), r(0.0), r(0.0), r(0.0)],
        );
        KrausChannel::new(vec![k1, k2, k3]).expect("fixture is trace preserving")
    }
}

/// `F_a = Λ†(E_a)`: the measurement obtained by running `channel` first.
pub fn pre_process(povm: &Povm, channel: &KrausChannel) -> Result<Povm> {
    if channel.dim_out != povm.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel outputs C^{}, POVM acts on C^{}",
            channel.dim_out,
            povm.dim()
        )));
    }
    let ops = povm
        .operators()
        .iter()
        .map(|e| Hermitian::new(channel.adjoint_apply(e.matrix())))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{mub_pair, qutrit_commuting_fixture};

    #[test]
    fn stochastic_map_validation() {
        assert!(StochasticMap::new(DMatrix::from_row_slice(2, 1, &[0.5, 0.6])).is_err());
        assert!(StochasticMap::new(DMatrix::from_row_slice(2, 1, &[1.5, -0.5])).is_err());
        assert!(StochasticMap::deterministic(&[0, 2], 2).is_err());
        assert!(StochasticMap::new(DMatrix::from_row_slice(2, 2, &[0.25, 1.0, 0.75, 0.0])).is_ok());
    }

    #[test]
    fn post_process_permutation_and_merge() {
        let (_, f) = mub_pair(3).unwrap();
        let perm = StochasticMap::deterministic(&[2, 0, 1], 3).unwrap();
        let g = post_process(&f, &perm).unwrap();
        assert_eq!(g.operator(2), f.operator(0));
        assert_eq!(g.operator(0), f.operator(1));
        let merged = post_process(&f, &StochasticMap::merge_all(3)).unwrap();
        assert_eq!(merged.len(), 1);
        assert!(linalg::max_abs(&(merged.operator(0).matrix() - CMatrix::identity(3, 3))) < 1e-14);
        assert!(post_process(&f, &StochasticMap::identity(2)).is_err());
    }

    #[test]
    fn fixture_channel_is_trace_preserving_not_square() {
        let ch = KrausChannel::qutrit_to_qubit_fixture();
        assert_eq!((ch.dim_in(), ch.dim_out()), (2, 3));
        let id = ch.adjoint_apply(&CMatrix::identity(3, 3));
        assert!(linalg::max_abs(&(id - CMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn pre_process_identity_and_unitary() {
        let (e, _) = mub_pair(2).unwrap();
        let same = pre_process(&e, &KrausChannel::identity(2)).unwrap();
        assert_eq!(same, e);

        let h = crate::povm::fourier_matrix(2);
        let ch = KrausChannel::unitary(h.clone()).unwrap();
        let conj = pre_process(&e, &ch).unwrap();
        let expected = e.conjugate(&h.adjoint());
        for (x, y) in conj.operators().iter().zip(expected.operators()) {
            assert!(linalg::max_abs(&(x.matrix() - y.matrix())) < 1e-15);
        }

        let (q, _) = qutrit_commuting_fixture();
        let out = pre_process(&q, &KrausChannel::qutrit_to_qubit_fixture()).unwrap();
        assert_eq!((out.dim(), out.len()), (2, 2));
        assert!(out.validate().ok);
        assert!(pre_process(&e, &KrausChannel::qutrit_to_qubit_fixture()).is_err());
    }

    #[test]
    fn bad_channel_rejected() {
        let k = CMatrix::identity(2, 2) * Complex64::new(0.9, 0.0);
        assert!(matches!(KrausChannel::new(vec![k]), Err(Error::InvalidChannel { .. })));
    }
}
