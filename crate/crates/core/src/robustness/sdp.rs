//! Small dense primal-dual interior-point solver for block-diagonal complex
//! Hermitian SDPs.
//!
//! Primal: `min ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i,  X ⪰ 0`
//! Dual:   `max bᵀy    s.t.  Σ_i y_i A_i + Z = C,  Z ⪰ 0`
//!
//! with `⟨A, X⟩ = Re tr(A X)` summed over blocks. Search directions are HKM
//! (`ΔX = sym(H − X ΔZ Z⁻¹)`) with a Mehrotra predictor-corrector step and a dense
//! Cholesky-factored Schur complement. Everything is sequential, so identical inputs
//! give bit-identical iterates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::{hs_inner, CMatrix};

/// Non-zero entries `(row, col, value)` of a Hermitian coefficient matrix. Both
/// triangles are listed.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SparseHermitian {
    #[serde(serialize_with = "serialize_entries")]
    pub entries: Vec<(usize, usize, Complex64)>,
}

fn serialize_entries<S: serde::Serializer>(
    entries: &[(usize, usize, Complex64)],
    s: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(entries.len()))?;
    for &(i, j, v) in entries {
        seq.serialize_element(&(i, j, v.re, v.im))?;
    }
    seq.end()
}

impl SparseHermitian {
    pub fn scalar(v: f64) -> Self {
        SparseHermitian { entries: vec![(0, 0, Complex64::new(v, 0.0))] }
    }

    pub fn scaled(&self, s: f64) -> Self {
        SparseHermitian { entries: self.entries.iter().map(|&(i, j, v)| (i, j, v * s)).collect() }
    }

    /// `Re tr(A X)`.
    fn inner(&self, x: &CMatrix) -> f64 {
        self.entries.iter().map(|&(i, j, v)| (v * x[(j, i)]).re).sum()
    }

    fn add_to(&self, out: &mut CMatrix, scale: f64) {
        for &(i, j, v) in &self.entries {
            out[(i, j)] += v * scale;
        }
    }

    /// `X A` for dense `X`.
    fn left_mul(&self, x: &CMatrix) -> CMatrix {
        let n = x.nrows();
        let mut out = CMatrix::zeros(n, n);
        for &(i, j, v) in &self.entries {
            for r in 0..n {
                out[(r, j)] += x[(r, i)] * v;
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockTerm {
    pub block: usize,
    pub coeff: SparseHermitian,
}

#[derive(Clone, Debug, Serialize)]
pub struct Constraint {
    pub terms: Vec<BlockTerm>,
    pub rhs: f64,
}

/// A block-diagonal SDP in the primal standard form above.
#[derive(Clone, Debug, Serialize)]
pub struct BlockSdp {
    pub block_dims: Vec<usize>,
    pub objective: Vec<BlockTerm>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    /// Residual tolerance for declaring convergence.
    pub feas_tol: f64,
    /// Tolerance on `|primal − dual objective|` for declaring convergence.
    pub gap_tol: f64,
    /// Iteration stops early once all relative measures fall below this.
    pub target: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { feas_tol: 1e-8, gap_tol: 1e-6, target: 1e-11, max_iter: 200, step_fraction: 0.98 }
    }
}

#[derive(Clone, Debug)]
pub struct SdpIterate {
    pub x: Vec<CMatrix>,
    pub y: DVector<f64>,
    pub z: Vec<CMatrix>,
}

#[derive(Clone, Debug)]
pub struct SdpOutcome {
    pub iterate: SdpIterate,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `‖b − 𝒜(X)‖_∞`.
    pub primal_infeasibility: f64,
    /// Entrywise max of `C − Z − 𝒜*(y)`.
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Workspace<'a> {
    sdp: &'a BlockSdp,
    b: DVector<f64>,
    c: Vec<CMatrix>,
    /// For each block, the `(constraint, term)` pairs touching it.
    by_block: Vec<Vec<(usize, usize)>>,
    order: f64,
}

impl<'a> Workspace<'a> {
    fn new(sdp: &'a BlockSdp) -> Self {
        let mut c: Vec<CMatrix> = sdp.block_dims.iter().map(|&n| CMatrix::zeros(n, n)).collect();
        for t in &sdp.objective {
            t.coeff.add_to(&mut c[t.block], 1.0);
        }
        let mut by_block = vec![Vec::new(); sdp.block_dims.len()];
        for (i, con) in sdp.constraints.iter().enumerate() {
            for (t, term) in con.terms.iter().enumerate() {
                by_block[term.block].push((i, t));
            }
        }
        Workspace {
            sdp,
            b: DVector::from_iterator(sdp.constraints.len(), sdp.constraints.iter().map(|c| c.rhs)),
            c,
            by_block,
            order: sdp.block_dims.iter().sum::<usize>() as f64,
        }
    }

    fn term(&self, i: usize, t: usize) -> &BlockTerm {
        &self.sdp.constraints[i].terms[t]
    }

    /// `𝒜(X)_i = Σ_k ⟨A_ik, X_k⟩`.
    fn apply(&self, x: &[CMatrix]) -> DVector<f64> {
        DVector::from_iterator(
            self.sdp.constraints.len(),
            self.sdp
                .constraints
                .iter()
                .map(|con| con.terms.iter().map(|t| t.coeff.inner(&x[t.block])).sum::<f64>()),
        )
    }

    /// `𝒜*(y) = Σ_i y_i A_i`.
    fn adjoint(&self, y: &DVector<f64>) -> Vec<CMatrix> {
        let mut out: Vec<CMatrix> = self.sdp.block_dims.iter().map(|&n| CMatrix::zeros(n, n)).collect();
        for (i, con) in self.sdp.constraints.iter().enumerate() {
            if y[i] == 0.0 {
                continue;
            }
            for t in &con.terms {
                t.coeff.add_to(&mut out[t.block], y[i]);
            }
        }
        out
    }

    /// Schur complement `M_ij = ⟨A_i, X A_j Z⁻¹⟩`.
    fn schur(&self, x: &[CMatrix], zinv: &[CMatrix]) -> DMatrix<f64> {
        let m = self.sdp.constraints.len();
        let mut out = DMatrix::zeros(m, m);
        for (k, touching) in self.by_block.iter().enumerate() {
            if touching.is_empty() {
                continue;
            }
            let w: Vec<CMatrix> = touching
                .iter()
                .map(|&(j, t)| self.term(j, t).coeff.left_mul(&x[k]) * &zinv[k])
                .collect();
            for &(i, s) in touching {
                let a = &self.term(i, s).coeff;
                for (wj, &(j, _)) in w.iter().zip(touching) {
                    out[(i, j)] += a.inner(wj);
                }
            }
        }
        (&out + out.transpose()) * 0.5
    }
}

fn block_inner(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| hs_inner(x, y).re).sum()
}

fn herm(m: CMatrix) -> CMatrix {
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn max_entry(blocks: &[CMatrix]) -> f64 {
    blocks.iter().flat_map(|m| m.iter()).fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn inverse_pd(m: &CMatrix) -> Option<CMatrix> {
    m.clone().cholesky().map(|c| herm(c.inverse()))
}

/// Largest `α` with `X + α ΔX ⪰ 0` (may be infinite); `None` if `X` is not PD.
fn max_step(x: &CMatrix, dx: &CMatrix) -> Option<f64> {
    let l = x.clone().cholesky()?.unpack();
    let a = l.solve_lower_triangular(dx)?;
    let b = l.solve_lower_triangular(&a.adjoint())?;
    let lmin = herm(b).symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Some(if lmin < 0.0 { -1.0 / lmin } else { f64::INFINITY })
}

fn max_step_blocks(x: &[CMatrix], dx: &[CMatrix]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (xk, dk) in x.iter().zip(dx) {
        alpha = alpha.min(max_step(xk, dk)?);
    }
    Some(alpha)
}

/// Cholesky of the Schur complement; near the optimum it can lose numerical
/// definiteness, in which case a small escalating diagonal shift is added.
fn factor_schur(m: DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let scale = m.diagonal().amax().max(f64::MIN_POSITIVE);
    let mut shift = 0.0;
    for _ in 0..6 {
        let mut shifted = m.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += shift;
        }
        if let Some(c) = shifted.cholesky() {
            return Some(c);
        }
        shift = if shift == 0.0 { 1e-14 * scale } else { shift * 100.0 };
    }
    None
}

struct Direction {
    dx: Vec<CMatrix>,
    dy: DVector<f64>,
    dz: Vec<CMatrix>,
}

/// Solves the Newton system for complementarity target `σμ I − corr`.
#[allow(clippy::too_many_arguments)]
fn direction(
    ws: &Workspace,
    state: &SdpIterate,
    zinv: &[CMatrix],
    chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
    rp: &DVector<f64>,
    rd: &[CMatrix],
    sigma_mu: f64,
    corr: Option<&[CMatrix]>,
) -> Direction {
    let nb = state.x.len();
    let mut h = Vec::with_capacity(nb);
    let mut xrz = Vec::with_capacity(nb);
    for k in 0..nb {
        let mut hk = &zinv[k] * Complex64::new(sigma_mu, 0.0) - &state.x[k];
        if let Some(c) = corr {
            hk -= &c[k] * &zinv[k];
        }
        h.push(hk);
        xrz.push(&state.x[k] * &rd[k] * &zinv[k]);
    }
    let rhs = rp - ws.apply(&h) + ws.apply(&xrz);
    let dy = chol.solve(&rhs);
    let at = ws.adjoint(&dy);
    let dz: Vec<CMatrix> = rd.iter().zip(&at).map(|(r, a)| r - a).collect();
    let dx = (0..nb).map(|k| herm(&h[k] - &state.x[k] * &dz[k] * &zinv[k])).collect();
    Direction { dx, dy, dz }
}

fn residuals(ws: &Workspace, s: &SdpIterate) -> (DVector<f64>, Vec<CMatrix>) {
    let rp = &ws.b - ws.apply(&s.x);
    let at = ws.adjoint(&s.y);
    let rd = (0..s.z.len()).map(|k| &ws.c[k] - &s.z[k] - &at[k]).collect();
    (rp, rd)
}

fn outcome(ws: &Workspace, s: &SdpIterate, iterations: usize, opts: &SdpOptions) -> SdpOutcome {
    let (rp, rd) = residuals(ws, s);
    let primal_objective = block_inner(&ws.c, &s.x);
    let dual_objective = ws.b.dot(&s.y);
    let primal_infeasibility = rp.amax();
    let dual_infeasibility = max_entry(&rd);
    let converged = primal_infeasibility <= opts.feas_tol
        && dual_infeasibility <= opts.feas_tol
        && (primal_objective - dual_objective).abs() <= opts.gap_tol;
    SdpOutcome {
        iterate: s.clone(),
        primal_objective,
        dual_objective,
        primal_infeasibility,
        dual_infeasibility,
        iterations,
        converged,
    }
}

const STALL_LIMIT: usize = 6;

/// Runs the interior-point method from `start`, which must have `X, Z ≻ 0`.
pub fn solve(sdp: &BlockSdp, start: SdpIterate, opts: &SdpOptions) -> SdpOutcome {
    let ws = Workspace::new(sdp);
    let mut s = start;
    let scale_b = 1.0 + ws.b.amax();
    let scale_c = 1.0 + max_entry(&ws.c);
    let mut iterations = 0;
    // Near the optimum the Schur complement gets ill-conditioned and the
    // residuals can drift back up, so the best iterate seen is kept.
    let mut best = (f64::INFINITY, s.clone(), 0);
    let mut stalled = 0;

    while iterations < opts.max_iter {
        let (rp, rd) = residuals(&ws, &s);
        let pobj = block_inner(&ws.c, &s.x);
        let dobj = ws.b.dot(&s.y);
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let merit = (rp.amax() / scale_b).max(max_entry(&rd) / scale_c).max(rel_gap);
        if merit < best.0 {
            if merit < 0.5 * best.0 {
                stalled = 0;
            }
            best = (merit, s.clone(), iterations);
        } else {
            stalled += 1;
        }
        if merit <= opts.target || stalled >= STALL_LIMIT {
            break;
        }

        let mu = block_inner(&s.x, &s.z) / ws.order;
        let Some(zinv) = s.z.iter().map(inverse_pd).collect::<Option<Vec<_>>>() else { break };
        let Some(chol) = factor_schur(ws.schur(&s.x, &zinv)) else { break };

        let pred = direction(&ws, &s, &zinv, &chol, &rp, &rd, 0.0, None);
        let (Some(ap), Some(ad)) = (max_step_blocks(&s.x, &pred.dx), max_step_blocks(&s.z, &pred.dz)) else {
            break;
        };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let x_aff: Vec<CMatrix> = s.x.iter().zip(&pred.dx).map(|(x, d)| x + d * Complex64::new(ap, 0.0)).collect();
        let z_aff: Vec<CMatrix> = s.z.iter().zip(&pred.dz).map(|(z, d)| z + d * Complex64::new(ad, 0.0)).collect();
        let mu_aff = block_inner(&x_aff, &z_aff) / ws.order;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let corr: Vec<CMatrix> = pred.dx.iter().zip(&pred.dz).map(|(dx, dz)| dx * dz).collect();
        let step = direction(&ws, &s, &zinv, &chol, &rp, &rd, sigma * mu, Some(&corr));
        let (Some(ap), Some(ad)) = (max_step_blocks(&s.x, &step.dx), max_step_blocks(&s.z, &step.dz)) else {
            break;
        };
        let ap = (opts.step_fraction * ap).min(1.0);
        let ad = (opts.step_fraction * ad).min(1.0);
        if ap < 1e-14 && ad < 1e-14 {
            break;
        }
        for k in 0..s.x.len() {
            s.x[k] += &step.dx[k] * Complex64::new(ap, 0.0);
            s.z[k] += &step.dz[k] * Complex64::new(ad, 0.0);
        }
        s.y += &step.dy * ad;
        iterations += 1;
    }
    let (rp, rd) = residuals(&ws, &s);
    let pobj = block_inner(&ws.c, &s.x);
    let dobj = ws.b.dot(&s.y);
    let merit = (rp.amax() / scale_b).max(max_entry(&rd) / scale_c).max((pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()));
    if merit < best.0 {
        return outcome(&ws, &s, iterations, opts);
    }
    outcome(&ws, &best.1, best.2, opts)
}
