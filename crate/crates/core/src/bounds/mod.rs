//! Analytic relations for rank-1 projective pairs: the QRAC-based lower bound
//! `f(p, c̄, d)` and the entropic-uncertainty sandwich in terms of
//! `τ = max_ab |⟨e_a|f_b⟩|²`.

mod curves;

pub use curves::{emit_curves, CurveKind, CurveTable};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{h_p, h_p_derivative, h_tilde, operator_norm, rank1_sum_spectrum, SchattenP};
use crate::povm::{overlap_table, OverlapTable, Povm};

/// Relative guard for floors at exact divisors.
pub const FLOOR_GUARD: f64 = 1e-12;
const RANGE_SLACK: f64 = 1e-12;

/// `⌊x⌋`, snapping to the nearest integer when within `FLOOR_GUARD` relative.
pub fn guarded_floor(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= FLOOR_GUARD * x.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

/// Zero when `|x|` is round-off relative to `scale`, so square roots at exact
/// endpoints do not amplify it.
fn snap_zero(x: f64, scale: f64) -> f64 {
    if x.abs() <= FLOOR_GUARD * scale.abs().max(1.0) {
        0.0
    } else {
        x
    }
}

/// Extreme point of `{u ∈ [0, t]^n : Σ u = s}` with entries sorted descending:
/// `⌊s/t⌋` copies of `t`, one remainder entry, zeros elsewhere.
pub fn extremal_vector(n: usize, s: f64, t: f64) -> Result<Vec<f64>> {
    if n < 2 || !(s > 0.0) || !(t > 0.0) || !s.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("extremal vector needs n ≥ 2, s > 0, t > 0 (n = {n}, s = {s}, t = {t})")));
    }
    if t * (n as f64) < s * (1.0 - RANGE_SLACK) {
        return Err(Error::Domain(format!("infeasible: {n} entries of at most {t} cannot sum to {s}")));
    }
    let k = (guarded_floor(s / t) as usize).min(n);
    let mut u = vec![0.0; n];
    for x in u.iter_mut().take(k) {
        *x = t;
    }
    if k < n {
        u[k] = snap_zero(s - k as f64 * t, s).max(0.0);
    }
    Ok(u)
}

fn require_basis_pair(e: &Povm, f: &Povm) -> Result<OverlapTable> {
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch(format!("POVMs act on C^{} and C^{}", e.dim(), f.dim())));
    }
    if !e.classify().is_basis || !f.classify().is_basis {
        return Err(Error::NotRank1Projective);
    }
    overlap_table(e, f)
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct QracReport {
    pub p: SchattenP,
    pub dim: usize,
    /// `½ + Σ_ab c_ab / (2d²)`.
    pub p_ave: f64,
    /// `Σ_ab ‖E_a + F_b‖_∞ / (2d²)` from dense operator norms.
    pub p_ave_dense: f64,
    /// `2 p_ave − 1`.
    pub c_bar: f64,
    pub lower_bound_f: f64,
    pub alpha_factor: f64,
}

/// QRAC success probability of a basis pair and the resulting lower bound on `Υ_p`.
pub fn qrac_p_ave(e: &Povm, f: &Povm, p: SchattenP) -> Result<QracReport> {
    let table = require_basis_pair(e, f)?;
    let d = e.dim();
    let scale = 1.0 / (2.0 * (d * d) as f64);
    let p_ave = 0.5 + scale * table.c.sum();
    let mut dense = 0.0;
    for ea in e.operators() {
        for fb in f.operators() {
            dense += operator_norm(&(ea.matrix() + fb.matrix()));
        }
    }
    let c_bar = (2.0 * p_ave - 1.0).clamp(1.0 / d as f64, 1.0 / (d as f64).sqrt());
    Ok(QracReport {
        p,
        dim: d,
        p_ave,
        p_ave_dense: scale * dense,
        c_bar,
        lower_bound_f: qrac_lower_bound(p, c_bar, d)?,
        alpha_factor: qrac_alpha(p, c_bar)?,
    })
}

/// `p_ave` from overlaps alone, via the top eigenvalue `1 + c` of `E_a + F_b`.
pub fn p_ave_from_overlaps(c: &nalgebra::DMatrix<f64>) -> Result<f64> {
    let d = c.nrows();
    let mut total = 0.0;
    for &x in c.iter() {
        total += rank1_sum_spectrum(1.0, 1.0, x.min(1.0))?.0;
    }
    Ok(total / (2.0 * (d * d) as f64))
}

/// `α(c̄) = max{h_p(c̄)/(1−c̄), h_p(c̄)/c̄, |h_p′(c̄)|}`.
pub fn qrac_alpha(p: SchattenP, c_bar: f64) -> Result<f64> {
    if !(c_bar > 0.0 && c_bar < 1.0) {
        return Err(Error::Domain(format!("c̄ must lie in (0, 1), got {c_bar}")));
    }
    let h = h_p(c_bar, p)?;
    Ok((h / (1.0 - c_bar)).max(h / c_bar).max(h_p_derivative(c_bar, p)?.abs()))
}

/// `f(p, c̄, d) = d² h_p(c̄) − α(c̄) d √(d − d² c̄²)`, reported unclamped.
pub fn qrac_lower_bound(p: SchattenP, c_bar: f64, d: usize) -> Result<f64> {
    check_dim(d)?;
    let df = d as f64;
    let (lo, hi) = (1.0 / df, 1.0 / df.sqrt());
    if !(c_bar >= lo - RANGE_SLACK && c_bar <= hi + RANGE_SLACK) {
        return Err(Error::Domain(format!("c̄ = {c_bar} outside [{lo}, {hi}]")));
    }
    let c_bar = c_bar.clamp(lo, hi);
    let spread = snap_zero(df - df * df * c_bar * c_bar, df).max(0.0);
    Ok(df * df * h_p(c_bar, p)? - qrac_alpha(p, c_bar)? * df * spread.sqrt())
}

/// `τ = max_ab |⟨e_a|f_b⟩|²` for a pair of bases.
pub fn uncertainty_tau(e: &Povm, f: &Povm) -> Result<f64> {
    let table = require_basis_pair(e, f)?;
    Ok(table.squares().max().min(1.0))
}

fn check_tau(tau: f64, d: usize) -> Result<f64> {
    check_dim(d)?;
    let lo = 1.0 / d as f64;
    if !(tau >= lo - RANGE_SLACK && tau <= 1.0 + RANGE_SLACK) {
        return Err(Error::Domain(format!("τ = {tau} outside [{lo}, 1]")));
    }
    Ok(tau.clamp(lo, 1.0))
}

/// `2^{1/p}[√(τ(1−τ)) + 2√((1−τ)(d−2+τ)) + √((d−2+τ)(d²−3d+3−τ))]`.
pub fn uncertainty_upper_bound(tau: f64, d: usize, p: SchattenP) -> Result<f64> {
    let tau = check_tau(tau, d)?;
    let df = d as f64;
    let s = df - 2.0 + tau;
    let root = |x: f64| x.max(0.0).sqrt();
    Ok(p.two_root() * (root(tau * (1.0 - tau)) + 2.0 * root((1.0 - tau) * s) + root(s * (df * df - 3.0 * df + 3.0 - tau))))
}

/// `⌊(1−τ)/τ⌋` and `⌊(d−2+τ)/τ⌋`.
pub fn multiplicities(tau: f64, d: usize) -> Result<(usize, usize)> {
    let tau = check_tau(tau, d)?;
    let m_r = guarded_floor((1.0 - tau) / tau).max(0.0) as usize;
    let m_s = guarded_floor((d as f64 - 2.0 + tau) / tau).max(0.0) as usize;
    Ok((m_r, m_s))
}

/// `(1 + 2m_r + m_s) h̃(τ) + 2 h̃(1 − τ − m_r τ) + h̃(d − 2 + τ − m_s τ)`.
pub fn uncertainty_lower_bound(tau: f64, d: usize, p: SchattenP) -> Result<f64> {
    let (m_r, m_s) = multiplicities(tau, d)?;
    let tau = check_tau(tau, d)?;
    let (mr, ms) = (m_r as f64, m_s as f64);
    let rem_r = snap_zero(1.0 - tau - mr * tau, 1.0).max(0.0);
    let rem_s = snap_zero(d as f64 - 2.0 + tau - ms * tau, d as f64).max(0.0);
    Ok((1.0 + 2.0 * mr + ms) * h_tilde(tau, p) + 2.0 * h_tilde(rem_r, p) + h_tilde(rem_s, p))
}

#[derive(Clone, Debug, Serialize)]
pub struct UncertaintyReport {
    pub tau: f64,
    /// `−log₂ τ`.
    pub entropy_bound: f64,
    pub lower: f64,
    pub upper: f64,
    pub m_r: usize,
    pub m_s: usize,
}

pub fn uncertainty_report(tau: f64, d: usize, p: SchattenP) -> Result<UncertaintyReport> {
    let (m_r, m_s) = multiplicities(tau, d)?;
    Ok(UncertaintyReport {
        tau,
        entropy_bound: -tau.log2(),
        lower: uncertainty_lower_bound(tau, d, p)?,
        upper: uncertainty_upper_bound(tau, d, p)?,
        m_r,
        m_s,
    })
}

/// `h_p(c̄) + h_p′(c̄)(c − c̄)`, an upper envelope of `h_p` on `[0, 1]`.
pub fn h_p_tangent(c: f64, c_bar: f64, p: SchattenP) -> Result<f64> {
    Ok(h_p(c_bar, p)? + h_p_derivative(c_bar, p)? * (c - c_bar))
}

/// Piecewise chord through `(0, 0)`, `(c̄, h_p(c̄))`, `(1, 0)`, a lower envelope of `h_p`.
pub fn h_p_chord(c: f64, c_bar: f64, p: SchattenP) -> Result<f64> {
    if !(c_bar > 0.0 && c_bar < 1.0) {
        return Err(Error::Domain(format!("c̄ must lie in (0, 1), got {c_bar}")));
    }
    let h = h_p(c_bar, p)?;
    Ok(if c >= c_bar { h * (1.0 - c) / (1.0 - c_bar) } else { h * c / c_bar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incompat::max_upsilon;
    use crate::povm::mub_pair;

    const PS: [SchattenP; 4] = [SchattenP::ONE, SchattenP::TWO, SchattenP::Finite(3.0), SchattenP::INF];

    #[test]
    fn extremal_vector_examples() {
        assert_eq!(extremal_vector(3, 1.0, 1.0).unwrap(), vec![1.0, 0.0, 0.0]);
        let u = extremal_vector(3, 1.0, 0.4).unwrap();
        assert_eq!(&u[..2], &[0.4, 0.4]);
        assert!((u[2] - 0.2).abs() < 1e-15);
        assert_eq!(extremal_vector(2, 1.5, 1.0).unwrap(), vec![1.0, 0.5]);
        assert!(extremal_vector(2, 3.0, 1.0).is_err());
        assert!(extremal_vector(1, 0.5, 1.0).is_err());
    }

    #[test]
    fn guarded_floor_snaps_divisors() {
        assert_eq!(guarded_floor((1.0 - 0.2) / 0.2), 4.0);
        assert_eq!(guarded_floor(2.0 - 1e-14), 2.0);
        assert_eq!(guarded_floor(2.5), 2.0);
    }

    #[test]
    fn qrac_endpoints() {
        let (e, f) = mub_pair(2).unwrap();
        let r = qrac_p_ave(&e, &f, SchattenP::ONE).unwrap();
        assert!((r.p_ave - (0.5 + 0.5 / 2.0_f64.sqrt())).abs() < 1e-12);
        assert!((r.p_ave - r.p_ave_dense).abs() < 1e-9);
        assert!((r.lower_bound_f - 4.0).abs() < 1e-9);

        let c = Povm::computational_basis(3);
        let r = qrac_p_ave(&c, &c, SchattenP::ONE).unwrap();
        assert!((r.p_ave - (0.5 + 1.0 / 6.0)).abs() < 1e-12);

        let (e, f) = mub_pair(3).unwrap();
        let r = qrac_p_ave(&e, &f, SchattenP::ONE).unwrap();
        assert!((r.c_bar - 1.0 / 3.0_f64.sqrt()).abs() < 1e-12);
        let t = overlap_table(&e, &f).unwrap();
        assert!((p_ave_from_overlaps(&t.c).unwrap() - r.p_ave).abs() < 1e-12);

        let trine = crate::povm::trine();
        assert!(matches!(qrac_p_ave(&trine, &trine, SchattenP::ONE), Err(Error::NotRank1Projective)));
    }

    #[test]
    fn qrac_bound_values() {
        for d in 2..=6 {
            for p in PS {
                let top = qrac_lower_bound(p, 1.0 / (d as f64).sqrt(), d).unwrap();
                assert!((top - max_upsilon(d, p).unwrap()).abs() < 1e-9 * top);
            }
        }
        // d = 2 stays positive over the open range, d = 3 dips below zero near 1/3.
        for k in 1..100 {
            let c = 0.5 + (0.5_f64.sqrt() - 0.5) * k as f64 / 100.0;
            assert!(qrac_lower_bound(SchattenP::ONE, c, 2).unwrap() > 0.0);
        }
        assert!(qrac_lower_bound(SchattenP::ONE, 0.34, 3).unwrap() < 0.0);
        assert!(qrac_lower_bound(SchattenP::ONE, 0.2, 3).is_err());
    }

    #[test]
    fn uncertainty_endpoints() {
        let s2 = 2.0_f64.sqrt();
        assert!((uncertainty_upper_bound(1.0 / 3.0, 3, SchattenP::ONE).unwrap() - 6.0 * s2).abs() < 1e-12);
        assert!((uncertainty_lower_bound(1.0 / 3.0, 3, SchattenP::ONE).unwrap() - 6.0 * s2).abs() < 1e-12);
        assert!((uncertainty_upper_bound(1.0, 3, SchattenP::ONE).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(uncertainty_lower_bound(1.0, 3, SchattenP::ONE).unwrap(), 0.0);
        assert_eq!(multiplicities(0.5, 3).unwrap(), (1, 3));
        for d in 2..=8 {
            for p in PS {
                let m = max_upsilon(d, p).unwrap();
                let tau = 1.0 / d as f64;
                assert!((uncertainty_upper_bound(tau, d, p).unwrap() - m).abs() < 1e-9 * m);
                assert!((uncertainty_lower_bound(tau, d, p).unwrap() - m).abs() < 1e-9 * m);
                let top = p.two_root() * (d as f64 - 1.0) * (d as f64 - 2.0).sqrt();
                assert!((uncertainty_upper_bound(1.0, d, p).unwrap() - top).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qubit_bounds_coincide() {
        for k in 0..=50 {
            let tau = 0.5 + 0.5 * k as f64 / 50.0;
            let lo = uncertainty_lower_bound(tau, 2, SchattenP::ONE).unwrap();
            let hi = uncertainty_upper_bound(tau, 2, SchattenP::ONE).unwrap();
            assert!((lo - hi).abs() < 1e-12, "τ = {tau}: {lo} vs {hi}");
        }
    }

    #[test]
    fn envelopes_bracket_h() {
        for &cb in &[0.2, 0.5, 0.7] {
            for k in 0..=100 {
                let c = k as f64 / 100.0;
                let h = h_p(c, SchattenP::ONE).unwrap();
                assert!(h <= h_p_tangent(c, cb, SchattenP::ONE).unwrap() + 1e-12);
                assert!(h >= h_p_chord(c, cb, SchattenP::ONE).unwrap() - 1e-12);
            }
        }
    }
}
