//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use num_complex::Complex64;
use qincompat::bounds::{
    extremal_vector, qrac_p_ave, uncertainty_lower_bound, uncertainty_tau, uncertainty_upper_bound,
};
use qincompat::incompat::{direct_sum, tensor_product, tensor_product_closed_form, trivial_extension};
use qincompat::linalg::{
    eig_hermitian, rank1_commutator_spectrum, rank1_sum_spectrum, schatten_norm, Hermitian,
};
use qincompat::povm::random::{
    random_basis_with, random_commuting_qubit_pair_with, random_povm_with, random_stochastic_map_with,
    random_unital_qubit_channel_with, random_unitary, rng_from_seed,
};
use qincompat::povm::{mub_pair, overlap_table, post_process, pre_process, qutrit_commuting_fixture};
use qincompat::robustness::{
    check_dual_feasible, dual_certificate_rank1_uniform, eta_g_solve, universal_lower_bound, SOLVER_TOL,
};
use qincompat::{upsilon, KrausChannel, Povm, SchattenP};
use rand::Rng;

const PS: [SchattenP; 4] = [SchattenP::ONE, SchattenP::TWO, SchattenP::Finite(3.0), SchattenP::INF];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mub_maximality() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for d in 2..=8 {
        let (e, f) = mub_pair(d).unwrap();
        for p in PS {
            let expected = p.two_root() * d as f64 * (d as f64 - 1.0).sqrt();
            let got = upsilon(&e, &f, p).unwrap().value;
            worst = worst.max((got - expected).abs() / expected);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(1),
        format!("max rel err {worst:.2e}, {:.3} s", elapsed.as_secs_f64()),
    )
}

fn preprocessing_counterexample() -> Outcome {
    let (e, f) = qutrit_commuting_fixture();
    let ch = KrausChannel::qutrit_to_qubit_fixture();
    let (pe, pf) = (pre_process(&e, &ch).unwrap(), pre_process(&f, &ch).unwrap());
    let mut worst_before = 0.0_f64;
    let mut worst_after = 0.0_f64;
    let mut at_one = 0.0;
    for p in PS {
        worst_before = worst_before.max(upsilon(&e, &f, p).unwrap().value);
        let after = upsilon(&pe, &pf, p).unwrap().value;
        let expected = 2.0_f64.powf(p.reciprocal() + 2.0) / (9.0 * 3.0_f64.sqrt());
        worst_after = worst_after.max((after - expected).abs());
        if p == SchattenP::ONE {
            at_one = after;
        }
    }
    outcome(
        worst_before <= 1e-10 && worst_after <= 1e-10,
        format!(
            "before {worst_before:.1e}; after (p=1) {at_one:.10} vs expected {:.10}; max err {worst_after:.2e}",
            8.0 / (9.0 * 3.0_f64.sqrt())
        ),
    )
}

fn postprocessing_monotonicity() -> Outcome {
    let mut rng = rng_from_seed(3001);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..1000 {
        let d = rng.random_range(2..=4);
        let (ne, nf) = (rng.random_range(2..=4), rng.random_range(2..=4));
        let e = random_povm_with(d, ne, d + rng.random_range(0..=3), &mut rng).unwrap();
        let f = random_povm_with(d, nf, d + rng.random_range(0..=3), &mut rng).unwrap();
        let map = random_stochastic_map_with(rng.random_range(1..=4), ne, &mut rng);
        let p = PS[k % 4];
        let e2 = post_process(&e, &map).unwrap();
        let excess = upsilon(&e2, &f, p).unwrap().value - upsilon(&e, &f, p).unwrap().value;
        worst = worst.max(excess);
        if excess > 1e-9 || !e2.validate().ok {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("{violations} violations, max excess {worst:.2e}"))
}

fn unitary_invariance() -> Outcome {
    let mut rng = rng_from_seed(4001);
    let mut worst = 0.0_f64;
    for k in 0..1000 {
        let d = rng.random_range(2..=4);
        let e = random_povm_with(d, rng.random_range(2..=4), d + 2, &mut rng).unwrap();
        let f = random_povm_with(d, rng.random_range(2..=4), d + 2, &mut rng).unwrap();
        let u = random_unitary(d, &mut rng);
        let p = PS[k % 4];
        let before = upsilon(&e, &f, p).unwrap().value;
        let after = upsilon(&e.conjugate(&u), &f.conjugate(&u), p).unwrap().value;
        worst = worst.max((before - after).abs());
    }
    outcome(worst <= 1e-9, format!("max deviation {worst:.2e}"))
}

fn composition_laws() -> Outcome {
    let mut rng = rng_from_seed(5001);
    let mut worst = 0.0_f64;
    for d1 in 2..=3 {
        for d2 in 2..=3 {
            let (e, f) = mub_pair(d1).unwrap();
            let (eb, fb) = mub_pair(d2).unwrap();
            let re = random_povm_with(d1, 3, d1 + 2, &mut rng).unwrap();
            let rf = random_povm_with(d1, 2, d1 + 1, &mut rng).unwrap();
            for p in PS {
                for (x, y) in [(&e, &f), (&re, &rf)] {
                    let base = upsilon(x, y, p).unwrap().value;
                    let ext = trivial_extension(x, y, d2, p).unwrap().value;
                    worst = worst.max((ext - p.root_of(d2 as f64) * base).abs());
                }
                let sum = direct_sum(&re, &rf, &eb, &fb, p).unwrap().value;
                let parts = upsilon(&re, &rf, p).unwrap().value + upsilon(&eb, &fb, p).unwrap().value;
                worst = worst.max((sum - parts).abs());

                let dd = (d1 * d2) as f64;
                let closed = p.two_root() * dd * (dd - 1.0).sqrt();
                let dense = tensor_product(&e, &f, &eb, &fb, p).unwrap().value;
                let table = tensor_product_closed_form(
                    &overlap_table(&e, &f).unwrap().c,
                    &overlap_table(&eb, &fb).unwrap().c,
                    p,
                );
                worst = worst.max((dense - closed).abs()).max((table - closed).abs());
            }
        }
    }
    outcome(worst <= 1e-9, format!("max deviation {worst:.2e}"))
}

fn rank1_closed_forms() -> Outcome {
    let mut rng = rng_from_seed(6001);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let d = rng.random_range(2..=6);
        let (alpha, beta, c) = (rng.random::<f64>() * 2.0, rng.random::<f64>() * 2.0, rng.random::<f64>());
        let e = common::random_unit(d, &mut rng);
        let f = common::vector_with_overlap(&e, c, &mut rng);
        let a = Hermitian::rank_one(alpha, &e);
        let b = Hermitian::rank_one(beta, &f);

        // i[A, B] is Hermitian with spectrum {±λ, 0, ...}.
        let comm = (a.matrix() * b.matrix() - b.matrix() * a.matrix()) * Complex64::new(0.0, 1.0);
        let lam_dense = eig_hermitian(&Hermitian::new(comm).unwrap()).eigenvalues[0];
        let lam = rank1_commutator_spectrum(alpha, beta, c).unwrap();
        worst = worst.max((lam - lam_dense).abs());

        let sum = eig_hermitian(&a.add(&b)).eigenvalues;
        let (plus, minus) = rank1_sum_spectrum(alpha, beta, c).unwrap();
        worst = worst.max((plus - sum[0]).abs()).max((minus - sum[1]).abs());
    }
    outcome(worst <= 1e-10, format!("max error {worst:.2e}"))
}

fn robustness() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut slowest = Duration::ZERO;
    let mut worst_eta = 0.0_f64;
    let mut worst_cert = 0.0_f64;
    for d in 2..=4 {
        let c = Povm::computational_basis(d);
        let (e, f) = mub_pair(d).unwrap();
        for (x, y, target) in [(&c, &c, 1.0), (&e, &f, universal_lower_bound(d))] {
            let start = Instant::now();
            match eta_g_solve(x, y, SOLVER_TOL) {
                Ok(sol) => worst_eta = worst_eta.max((sol.eta - target).abs()),
                Err(err) => {
                    pass = false;
                    notes.push(format!("d={d}: {err}"));
                }
            }
            slowest = slowest.max(start.elapsed());
        }
        let cert = dual_certificate_rank1_uniform(&e, &f).unwrap();
        let rep = check_dual_feasible(&cert.x, &cert.y, &cert.n, &e, &f).unwrap();
        worst_cert = worst_cert.max(rep.max_violation).max((rep.trace_n - universal_lower_bound(d)).abs());
    }
    pass &= worst_eta <= 1e-6 && worst_cert <= 1e-9 && slowest < Duration::from_secs(10);
    notes.insert(
        0,
        format!(
            "max |η − target| {worst_eta:.2e}, certificate residual {worst_cert:.2e}, slowest solve {:.3} s",
            slowest.as_secs_f64()
        ),
    );
    outcome(pass, notes.join("; "))
}

fn unital_qubit_commutation() -> Outcome {
    let mut rng = rng_from_seed(8001);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let (e, f) = random_commuting_qubit_pair_with(&mut rng);
        let ch = random_unital_qubit_channel_with(&mut rng);
        let (pe, pf) = (pre_process(&e, &ch).unwrap(), pre_process(&f, &ch).unwrap());
        for a in pe.operators() {
            for b in pf.operators() {
                let c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
                worst = worst.max(schatten_norm(&c, SchattenP::ONE));
            }
        }
    }
    outcome(worst <= 1e-9, format!("max commutator trace norm {worst:.2e}"))
}

fn bound_sandwich() -> Outcome {
    let mut rng = rng_from_seed(9001);
    let p = SchattenP::ONE;
    let mut slack = f64::INFINITY;
    for k in 0..1000 {
        let d = 2 + k % 3;
        let e = random_basis_with(d, &mut rng).unwrap();
        let f = random_basis_with(d, &mut rng).unwrap();
        let value = upsilon(&e, &f, p).unwrap().value;
        let tau = uncertainty_tau(&e, &f).unwrap();
        let lo = uncertainty_lower_bound(tau, d, p).unwrap();
        let hi = uncertainty_upper_bound(tau, d, p).unwrap();
        let qrac = qrac_p_ave(&e, &f, p).unwrap();
        slack = slack.min(value - lo).min(hi - value).min(value - qrac.lower_bound_f);
    }
    let s = 6.0 * 2.0_f64.sqrt();
    let ends = [
        (uncertainty_upper_bound(1.0 / 3.0, 3, p).unwrap(), s),
        (uncertainty_lower_bound(1.0 / 3.0, 3, p).unwrap(), s),
        (uncertainty_upper_bound(1.0, 3, p).unwrap(), 4.0),
        (uncertainty_lower_bound(1.0, 3, p).unwrap(), 0.0),
    ];
    let end_err = ends.iter().fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    outcome(slack >= -1e-9 && end_err <= 1e-12, format!("min slack {slack:.2e}, endpoint err {end_err:.2e}"))
}

fn upper_bound_monotonicity() -> Outcome {
    let mut bad = 0;
    let mut min_drop = f64::INFINITY;
    for d in 2..=8 {
        let lo = 1.0 / d as f64;
        let mut prev = f64::INFINITY;
        for i in 0..1000 {
            let tau = lo + (1.0 - lo) * i as f64 / 999.0;
            let v = uncertainty_upper_bound(tau, d, SchattenP::ONE).unwrap();
            if i > 0 {
                min_drop = min_drop.min(prev - v);
                if v >= prev {
                    bad += 1;
                }
            }
            prev = v;
        }
    }
    outcome(bad == 0, format!("{bad} non-decreasing steps, smallest drop {min_drop:.2e}"))
}

fn three_level_strictness() -> Outcome {
    let mut rng = rng_from_seed(11001);
    let mut min_margin = f64::INFINITY;
    for k in 0..1000 {
        let gamma = 1.0 - rng.random::<f64>(); // (0, 1]
        let (a, b, c) = (common::cgauss(&mut rng), common::cgauss(&mut rng), common::cgauss(&mut rng));
        let (x, y) = common::three_level_pair(gamma, a, b, c);
        let p = PS[k % 4];
        let margin = schatten_norm(&x, p) + schatten_norm(&y, p) - schatten_norm(&(&x + &y), p);
        min_margin = min_margin.min(margin);
    }
    outcome(min_margin > 0.0, format!("min margin {min_margin:.3e}"))
}

/// Brute force on the grid of step `1/(2q)`, all quantities as integers in
/// those units: is there a non-zero `δ` with `Σδ = 0` and `u ± δ ∈ [0, t]ⁿ`? If
/// so, `u` is the midpoint of two distinct feasible points.
fn is_midpoint(u: &[i64], t: i64) -> bool {
    let n = u.len();
    let mut delta = vec![-t; n - 1];
    loop {
        let last = -delta.iter().sum::<i64>();
        let full: Vec<i64> = delta.iter().copied().chain(std::iter::once(last)).collect();
        let inside = |x: i64| (0..=t).contains(&x);
        if full.iter().any(|&x| x != 0) && u.iter().zip(&full).all(|(&x, &dx)| inside(x - dx) && inside(x + dx)) {
            return true;
        }
        let mut k = 0;
        loop {
            if k == n - 1 {
                return false;
            }
            delta[k] += 1;
            if delta[k] <= t {
                break;
            }
            delta[k] = -t;
            k += 1;
        }
    }
}

fn polytope_extremality() -> Outcome {
    let q = 6;
    let mut checked = 0;
    let mut failures = 0;
    let mut controls_ok = true;
    for n in 2..=4usize {
        for t_num in 1..=q {
            for s_num in 1..=(n as i64 * t_num) {
                let (s, t) = (s_num as f64 / q as f64, t_num as f64 / q as f64);
                let u = extremal_vector(n, s, t).unwrap();
                let scaled: Vec<i64> = u.iter().map(|x| (x * 2.0 * q as f64).round() as i64).collect();
                let sum_ok = (u.iter().sum::<f64>() - s).abs() < 1e-12 && u.iter().all(|&x| (0.0..=t + 1e-15).contains(&x));
                if !sum_ok || is_midpoint(&scaled, 2 * t_num) {
                    failures += 1;
                }
                checked += 1;
                // Positive control: the flat point s/n has n ≥ 2 interior entries
                // whenever s < nt, so it must be detected as a midpoint.
                if (2 * s_num) % n as i64 == 0 && s_num < n as i64 * t_num {
                    let flat = vec![2 * s_num / n as i64; n];
                    controls_ok &= is_midpoint(&flat, 2 * t_num);
                }
            }
        }
    }
    let controls = if controls_ok { "ok" } else { "missed" };
    outcome(
        failures == 0 && controls_ok,
        format!("{checked} extreme points checked, {failures} failures, interior controls {controls}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("MUB maximality", mub_maximality),
        ("pre-processing counterexample", preprocessing_counterexample),
        ("post-processing monotonicity", postprocessing_monotonicity),
        ("unitary invariance", unitary_invariance),
        ("composition laws", composition_laws),
        ("rank-1 closed forms", rank1_closed_forms),
        ("generalized robustness", robustness),
        ("qubit unital pre-processing", unital_qubit_commutation),
        ("bound sandwich", bound_sandwich),
        ("upper-bound monotonicity", upper_bound_monotonicity),
        ("three-level strict triangle inequality", three_level_strictness),
        ("polytope extremality", polytope_extremality),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("{} criterion {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
