//! Generalized incompatibility robustness `η^g`.
//!
//! Primal:
//!
//! ```text
//! max η  s.t.  G_ab ⪰ 0,  Σ_b G_ab ⪰ η E_a,  Σ_a G_ab ⪰ η F_b,  Σ_ab G_ab = 𝟙
//! ```
//!
//! Dual:
//!
//! ```text
//! min tr N  s.t.  X_a, Y_b ⪰ 0,  N ⪰ X_a + Y_b,  Σ_a tr(X_a E_a) + Σ_b tr(Y_b F_b) = 1
//! ```
//!
//! The primal is put into standard form with slack blocks `S_a`, `T_b` and a 1×1
//! block for `η`, and the matrix equalities are expanded over an orthonormal
//! Hermitian basis of `d × d` matrices. [`eta_g_solve`] runs the interior-point
//! solver in [`sdp`] and audits the result with the solver-independent checkers
//! [`check_primal_feasible`] and [`check_dual_feasible`].

pub mod sdp;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::incompat::{certify_maximal, CERT_TOL};
use crate::linalg::{rank1_sum_spectrum, CMatrix, Hermitian, SchattenP};
use crate::povm::{overlap_table, Povm};
use sdp::{BlockSdp, BlockTerm, Constraint, SdpIterate, SdpOptions, SparseHermitian};

/// Constraint residual tolerance.
pub const SOLVER_TOL: f64 = 1e-8;
/// Tolerance on `|η − tr N|`.
pub const GAP_TOL: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 200;
/// Cap on `n_E · n_F · d²`.
pub const SIZE_CAP: usize = 20_000;

/// `½(1 + 1/√d)`, a lower bound on `η^g` for every pair in dimension `d`.
pub fn universal_lower_bound(dim: usize) -> f64 {
    0.5 * (1.0 + 1.0 / (dim as f64).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimalResiduals {
    /// `min_ab λ_min(G_ab)`.
    pub min_eig_g: f64,
    /// `λ_min(Σ_b G_ab − η E_a)` per `a`.
    pub marginal_e: Vec<f64>,
    /// `λ_min(Σ_a G_ab − η F_b)` per `b`.
    pub marginal_f: Vec<f64>,
    /// `max |Σ_ab G_ab − 𝟙|`.
    pub completeness: f64,
    /// Largest violation of any constraint (0 when feasible).
    pub max_violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualResiduals {
    pub min_eig_x: f64,
    pub min_eig_y: f64,
    /// `min_ab λ_min(N − X_a − Y_b)`.
    pub min_eig_n: f64,
    /// `Σ_a tr(X_a E_a) + Σ_b tr(Y_b F_b)`.
    pub normalization: f64,
    pub trace_n: f64,
    pub max_violation: f64,
}

fn check_shapes(e: &Povm, f: &Povm, ops: &[&Hermitian], what: &str) -> Result<()> {
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch(format!("POVMs act on C^{} and C^{}", e.dim(), f.dim())));
    }
    if let Some(bad) = ops.iter().find(|h| h.dim() != e.dim()) {
        return Err(Error::DimensionMismatch(format!("{what} operator on C^{}, expected C^{}", bad.dim(), e.dim())));
    }
    Ok(())
}

/// Audits a primal point `({G_ab}, η)`; `g` is indexed `a · n_F + b`.
pub fn check_primal_feasible(g: &[Hermitian], eta: f64, e: &Povm, f: &Povm) -> Result<PrimalResiduals> {
    check_shapes(e, f, &g.iter().collect::<Vec<_>>(), "G")?;
    let (ne, nf, d) = (e.len(), f.len(), e.dim());
    if g.len() != ne * nf {
        return Err(Error::DimensionMismatch(format!("expected {} G operators, got {}", ne * nf, g.len())));
    }
    let min_eig_g = g.iter().map(Hermitian::min_eigenvalue).fold(f64::INFINITY, f64::min);
    let marginal_e = (0..ne)
        .map(|a| {
            let mut acc = e.operator(a).matrix() * Complex64::new(-eta, 0.0);
            for b in 0..nf {
                acc += g[a * nf + b].matrix();
            }
            Hermitian::new(acc).map(|h| h.min_eigenvalue())
        })
        .collect::<Result<Vec<_>>>()?;
    let marginal_f = (0..nf)
        .map(|b| {
            let mut acc = f.operator(b).matrix() * Complex64::new(-eta, 0.0);
            for a in 0..ne {
                acc += g[a * nf + b].matrix();
            }
            Hermitian::new(acc).map(|h| h.min_eigenvalue())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = -CMatrix::identity(d, d);
    for gi in g {
        total += gi.matrix();
    }
    let completeness = crate::linalg::max_abs(&total);
    let worst_eig = marginal_e.iter().chain(&marginal_f).copied().fold(min_eig_g, f64::min);
    Ok(PrimalResiduals {
        min_eig_g,
        marginal_e,
        marginal_f,
        completeness,
        max_violation: (-worst_eig).max(completeness).max(0.0),
    })
}

/// Audits a dual point `({X_a}, {Y_b}, N)`.
pub fn check_dual_feasible(x: &[Hermitian], y: &[Hermitian], n: &Hermitian, e: &Povm, f: &Povm) -> Result<DualResiduals> {
    let all: Vec<&Hermitian> = x.iter().chain(y).chain(std::iter::once(n)).collect();
    check_shapes(e, f, &all, "dual")?;
    if x.len() != e.len() || y.len() != f.len() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} X and {} Y operators, got {} and {}",
            e.len(),
            f.len(),
            x.len(),
            y.len()
        )));
    }
    let min_eig_x = x.iter().map(Hermitian::min_eigenvalue).fold(f64::INFINITY, f64::min);
    let min_eig_y = y.iter().map(Hermitian::min_eigenvalue).fold(f64::INFINITY, f64::min);
    let mut min_eig_n = f64::INFINITY;
    for xa in x {
        for yb in y {
            min_eig_n = min_eig_n.min(n.sub(xa).sub(yb).min_eigenvalue());
        }
    }
    let pair_trace = |h: &Hermitian, m: &Hermitian| crate::linalg::hs_inner(h.matrix(), m.matrix()).re;
    let normalization = x.iter().zip(e.operators()).map(|(h, m)| pair_trace(h, m)).sum::<f64>()
        + y.iter().zip(f.operators()).map(|(h, m)| pair_trace(h, m)).sum::<f64>();
    let worst_eig = min_eig_x.min(min_eig_y).min(min_eig_n);
    Ok(DualResiduals {
        min_eig_x,
        min_eig_y,
        min_eig_n,
        normalization,
        trace_n: n.trace(),
        max_violation: (-worst_eig).max((normalization - 1.0).abs()).max(0.0),
    })
}

/// Result of [`eta_g_solve`]: primal and dual variables plus audit reports.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub eta: f64,
    /// `G_ab` at index `a · n_F + b`.
    pub g: Vec<Hermitian>,
    pub x: Vec<Hermitian>,
    pub y: Vec<Hermitian>,
    pub n: Hermitian,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    /// `|η − tr N|`.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residuals: PrimalResiduals,
    pub dual_residuals: DualResiduals,
}

impl SdpSolution {
    pub fn dual_objective(&self) -> f64 {
        self.n.trace()
    }
}

/// Orthonormal basis of `d × d` Hermitian matrices under `⟨A, B⟩ = tr(AB)`:
/// `E_jj`, `(E_jk + E_kj)/√2`, `i(E_jk − E_kj)/√2` for `j < k`.
pub fn hermitian_basis(dim: usize) -> Vec<SparseHermitian> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(dim * dim);
    for j in 0..dim {
        out.push(SparseHermitian { entries: vec![(j, j, Complex64::new(1.0, 0.0))] });
    }
    for j in 0..dim {
        for k in j + 1..dim {
            out.push(SparseHermitian { entries: vec![(j, k, Complex64::new(r, 0.0)), (k, j, Complex64::new(r, 0.0))] });
            out.push(SparseHermitian { entries: vec![(j, k, Complex64::new(0.0, r)), (k, j, Complex64::new(0.0, -r))] });
        }
    }
    out
}

fn basis_coefficient(gamma: &SparseHermitian, m: &Hermitian) -> f64 {
    gamma.entries.iter().map(|&(i, j, v)| (v * m.matrix()[(j, i)]).re).sum()
}

fn from_coefficients(basis: &[SparseHermitian], coeffs: &[f64], dim: usize) -> Hermitian {
    let mut m = CMatrix::zeros(dim, dim);
    for (gamma, &c) in basis.iter().zip(coeffs) {
        for &(i, j, v) in &gamma.entries {
            m[(i, j)] += v * c;
        }
    }
    Hermitian::new(m).expect("real combination of Hermitian basis elements")
}

struct Layout {
    ne: usize,
    nf: usize,
    dim: usize,
}

impl Layout {
    fn g(&self, a: usize, b: usize) -> usize {
        a * self.nf + b
    }
    fn s(&self, a: usize) -> usize {
        self.ne * self.nf + a
    }
    fn t(&self, b: usize) -> usize {
        self.ne * self.nf + self.ne + b
    }
    fn eta(&self) -> usize {
        self.ne * self.nf + self.ne + self.nf
    }
    fn d2(&self) -> usize {
        self.dim * self.dim
    }
}

fn layout_checked(e: &Povm, f: &Povm) -> Result<Layout> {
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch(format!("POVMs act on C^{} and C^{}", e.dim(), f.dim())));
    }
    let l = Layout { ne: e.len(), nf: f.len(), dim: e.dim() };
    let entries = l.ne * l.nf * l.d2();
    if entries > SIZE_CAP {
        return Err(Error::SizeCapExceeded { entries, cap: SIZE_CAP });
    }
    Ok(l)
}

fn build(e: &Povm, f: &Povm, l: &Layout) -> BlockSdp {
    let basis = hermitian_basis(l.dim);
    let mut block_dims = vec![l.dim; l.ne * l.nf + l.ne + l.nf];
    block_dims.push(1);
    let mut constraints = Vec::with_capacity((l.ne + l.nf + 1) * l.d2());

    for a in 0..l.ne {
        for gamma in &basis {
            let mut terms: Vec<BlockTerm> =
                (0..l.nf).map(|b| BlockTerm { block: l.g(a, b), coeff: gamma.clone() }).collect();
            terms.push(BlockTerm { block: l.s(a), coeff: gamma.scaled(-1.0) });
            let w = basis_coefficient(gamma, e.operator(a));
            if w != 0.0 {
                terms.push(BlockTerm { block: l.eta(), coeff: SparseHermitian::scalar(-w) });
            }
            constraints.push(Constraint { terms, rhs: 0.0 });
        }
    }
    for b in 0..l.nf {
        for gamma in &basis {
            let mut terms: Vec<BlockTerm> =
                (0..l.ne).map(|a| BlockTerm { block: l.g(a, b), coeff: gamma.clone() }).collect();
            terms.push(BlockTerm { block: l.t(b), coeff: gamma.scaled(-1.0) });
            let w = basis_coefficient(gamma, f.operator(b));
            if w != 0.0 {
                terms.push(BlockTerm { block: l.eta(), coeff: SparseHermitian::scalar(-w) });
            }
            constraints.push(Constraint { terms, rhs: 0.0 });
        }
    }
    for gamma in &basis {
        let terms = (0..l.ne * l.nf).map(|k| BlockTerm { block: k, coeff: gamma.clone() }).collect();
        let rhs = basis_coefficient(gamma, &Hermitian::identity(l.dim));
        constraints.push(Constraint { terms, rhs });
    }

    BlockSdp {
        block_dims,
        objective: vec![BlockTerm { block: l.eta(), coeff: SparseHermitian::scalar(-1.0) }],
        constraints,
    }
}

/// The `η^g` problem for `(E, F)` in solver standard form.
///
/// Blocks, in order: `G_ab` (index `a · n_F + b`), slacks `S_a`, slacks `T_b`, then
/// a 1×1 block holding `η`. Constraints, in order: `Σ_b G_ab − S_a − η E_a = 0`
/// for each `a`, `Σ_a G_ab − T_b − η F_b = 0` for each `b`, `Σ_ab G_ab = 𝟙`, each
/// expanded into `d²` real equations over [`hermitian_basis`]. The objective is
/// `min −η`.
pub fn eta_g_problem(e: &Povm, f: &Povm) -> Result<BlockSdp> {
    let l = layout_checked(e, f)?;
    Ok(build(e, f, &l))
}

/// JSON dump of [`eta_g_problem`] for cross-validation with external solvers.
pub fn eta_g_problem_json(e: &Povm, f: &Povm) -> Result<String> {
    #[derive(Serialize)]
    struct Dump<'a> {
        format: &'static str,
        sense: &'static str,
        objective_constant: f64,
        #[serde(flatten)]
        sdp: &'a BlockSdp,
    }
    let sdp = eta_g_problem(e, f)?;
    let dump = Dump { format: "block-hermitian-sdp-v1", sense: "minimize", objective_constant: 0.0, sdp: &sdp };
    Ok(serde_json::to_string_pretty(&dump)?)
}

fn scalar_block(x: f64) -> CMatrix {
    CMatrix::from_element(1, 1, Complex64::new(x, 0.0))
}

fn initial_point(e: &Povm, f: &Povm, l: &Layout, sdp: &BlockSdp) -> SdpIterate {
    let d = l.dim;
    let g0 = Hermitian::identity(d).scale(1.0 / (l.ne * l.nf) as f64);
    let slack = |eta: f64| {
        let s: Vec<Hermitian> = e.operators().iter().map(|ea| g0.scale(l.nf as f64).sub(&ea.scale(eta))).collect();
        let t: Vec<Hermitian> = f.operators().iter().map(|fb| g0.scale(l.ne as f64).sub(&fb.scale(eta))).collect();
        (s, t)
    };
    let mut eta = 0.5;
    let (mut s, mut t) = slack(eta);
    let margin = |s: &[Hermitian], t: &[Hermitian]| {
        s.iter().chain(t).map(Hermitian::min_eigenvalue).fold(f64::INFINITY, f64::min)
    };
    while margin(&s, &t) <= 1e-3 / (l.ne.max(l.nf) as f64) && eta > 1e-12 {
        eta *= 0.5;
        (s, t) = slack(eta);
    }

    let mut x: Vec<CMatrix> = vec![g0.matrix().clone(); l.ne * l.nf];
    x.extend(s.into_iter().map(Hermitian::into_matrix));
    x.extend(t.into_iter().map(Hermitian::into_matrix));
    x.push(scalar_block(eta));

    // Dual start: X_a = Y_b = 𝟙, N = 3𝟙, giving Z_G = Z_S = Z_T = 𝟙 and Z_η = 2d − 1.
    let d2 = l.d2();
    let mut y = DVector::zeros(sdp.constraints.len());
    for k in 0..d {
        for a in 0..l.ne {
            y[a * d2 + k] = 1.0;
        }
        for b in 0..l.nf {
            y[(l.ne + b) * d2 + k] = 1.0;
        }
        y[(l.ne + l.nf) * d2 + k] = -3.0;
    }
    let mut z: Vec<CMatrix> = vec![CMatrix::identity(d, d); l.ne * l.nf + l.ne + l.nf];
    z.push(scalar_block(2.0 * d as f64 - 1.0));
    SdpIterate { x, y, z }
}

/// Solves for `η^g(E, F)` with constraint tolerance `tol` (use [`SOLVER_TOL`] by
/// default). Non-convergence returns [`Error::SolverDidNotConverge`] carrying the
/// best iterate found.
pub fn eta_g_solve(e: &Povm, f: &Povm, tol: f64) -> Result<SdpSolution> {
    let l = layout_checked(e, f)?;
    let sdp = build(e, f, &l);
    let start = initial_point(e, f, &l, &sdp);
    let opts = SdpOptions { feas_tol: tol, gap_tol: GAP_TOL, max_iter: MAX_ITERATIONS, ..SdpOptions::default() };
    let out = sdp::solve(&sdp, start, &opts);

    let it = &out.iterate;
    let d = l.dim;
    let d2 = l.d2();
    let basis = hermitian_basis(d);
    let eta = it.x[l.eta()][(0, 0)].re;
    let g: Vec<Hermitian> = it.x[..l.ne * l.nf]
        .iter()
        .map(|m| Hermitian::new(m.clone()))
        .collect::<Result<_>>()?;
    let coeffs = |k: usize| it.y.as_slice()[k * d2..(k + 1) * d2].to_vec();
    let mut x: Vec<Hermitian> = (0..l.ne).map(|a| from_coefficients(&basis, &coeffs(a), d)).collect();
    let mut y: Vec<Hermitian> = (0..l.nf).map(|b| from_coefficients(&basis, &coeffs(l.ne + b), d)).collect();
    let mut n = from_coefficients(&basis, &coeffs(l.ne + l.nf), d).scale(-1.0);

    // The solver's dual only enforces normalization ≥ 1; rescaling to exactly 1
    // keeps every cone constraint and lowers tr N.
    let dual_pre = check_dual_feasible(&x, &y, &n, e, f)?;
    if dual_pre.normalization > 0.0 {
        let s = 1.0 / dual_pre.normalization;
        x = x.iter().map(|h| h.scale(s)).collect();
        y = y.iter().map(|h| h.scale(s)).collect();
        n = n.scale(s);
    }

    let primal_residuals = check_primal_feasible(&g, eta, e, f)?;
    let dual_residuals = check_dual_feasible(&x, &y, &n, e, f)?;
    let primal_infeasibility = primal_residuals.max_violation.max(out.primal_infeasibility);
    let dual_infeasibility = dual_residuals.max_violation.max(out.dual_infeasibility);
    let gap = (eta - n.trace()).abs();
    let converged = primal_infeasibility <= tol && dual_infeasibility <= tol && gap <= GAP_TOL;
    let solution = SdpSolution {
        eta,
        g,
        x,
        y,
        n,
        primal_infeasibility,
        dual_infeasibility,
        gap,
        iterations: out.iterations,
        converged,
        primal_residuals,
        dual_residuals,
    };
    if converged {
        Ok(solution)
    } else {
        Err(Error::SolverDidNotConverge { best: Box::new(solution) })
    }
}

/// Closed-form dual point for a maximally incompatible pair.
#[derive(Clone, Debug)]
pub struct DualCertificate {
    pub x: Vec<Hermitian>,
    pub y: Vec<Hermitian>,
    pub n: Hermitian,
    /// `tr N = ½(1 + 1/√d)`.
    pub trace_n: f64,
    /// `min_ab (N − λ_max(X_a + Y_b))`, the latter from the rank-1 sum spectrum.
    pub min_margin: f64,
}

/// `X_a = E_a / (2d tr E_a)`, `Y_b = F_b / (2d tr F_b)`, `N = (1 + 1/√d)/(2d) · 𝟙`,
/// which certifies `η^g ≤ ½(1 + 1/√d)` for rank-1 pairs with uniform overlaps.
pub fn dual_certificate_rank1_uniform(e: &Povm, f: &Povm) -> Result<DualCertificate> {
    let cert = certify_maximal(e, f, SchattenP::ONE, CERT_TOL)?;
    if !cert.is_maximal {
        return Err(Error::NotMaximalPair(cert.diagnostics.join("; ")));
    }
    let d = e.dim();
    let w = 1.0 / (2.0 * d as f64);
    let x: Vec<Hermitian> = e.operators().iter().map(|ea| ea.scale(w / ea.trace())).collect();
    let y: Vec<Hermitian> = f.operators().iter().map(|fb| fb.scale(w / fb.trace())).collect();
    let n_scalar = w * (1.0 + 1.0 / (d as f64).sqrt());
    let n = Hermitian::identity(d).scale(n_scalar);
    let table = overlap_table(e, f)?;
    let mut min_margin = f64::INFINITY;
    for c in table.c.iter() {
        let (top, _) = rank1_sum_spectrum(w, w, c.min(1.0))?;
        min_margin = min_margin.min(n_scalar - top);
    }
    Ok(DualCertificate { x, y, trace_n: n.trace(), n, min_margin })
}
