use std::path::{Path, PathBuf};

use qincompat::bounds::{
    emit_curves, qrac_p_ave, uncertainty_lower_bound, uncertainty_tau, uncertainty_upper_bound, CurveKind,
};
use qincompat::incompat::upsilon_rank1_povm;
use qincompat::povm::random::{random_basis, random_basis_with, random_rank1_povm, rng_from_seed};
use qincompat::povm::{
    channel_from_json, channel_to_json, mub_pair, overlap_table, povm_from_json, povm_to_json, pre_process,
    qutrit_commuting_fixture,
};
use qincompat::robustness::{
    check_dual_feasible, dual_certificate_rank1_uniform, eta_g_problem_json, universal_lower_bound,
};
use qincompat::{certify_maximal, eta_g_solve, max_upsilon, upsilon, Error, KrausChannel, Povm, SchattenP};
use serde_json::{json, Value};

use crate::report::{emit, io_err, num, sci, CliError, Format, Report};
use crate::{Command, CurveArg, FixtureKind, Output, PairFiles, EXIT_NO_CONVERGENCE, EXIT_VALIDATION};

pub fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Upsilon { files, p, output } => upsilon_cmd(&files, p.p, &output),
        Command::EtaG { files, tol, dump_sdp, output } => eta_g_cmd(&files, tol, dump_sdp.as_deref(), &output),
        Command::Certify { files, p, tol, output } => certify_cmd(&files, p.p, tol, &output),
        Command::Mub { dim, p, output } => mub_cmd(dim, p.p, &output),
        Command::Random { dim, seed, count, tol, p, output } => random_cmd(dim, seed, count, tol, p.p, &output),
        Command::PreprocessDemo { p, output } => preprocess_cmd(p.p, &output),
        Command::Curves { kind, dim, p, grid, c_bar, format, out } => {
            curves_cmd(kind, dim, p.p, grid, c_bar, format, out.as_deref())
        }
        Command::Validate { file, output } => validate_cmd(&file, &output),
        Command::Fixture { kind, dim, n, seed, out } => fixture_cmd(kind, dim, n, seed, out.as_deref()),
    }
}

fn finish(report: &Report, output: &Output, code: u8) -> Result<u8, CliError> {
    emit(&report.render(output.format)?, output.out.as_deref())?;
    Ok(code)
}

fn require_dim(dim: usize) -> Result<(), CliError> {
    if dim < 2 {
        return Err(CliError::Usage(format!("--dim must be at least 2, got {dim}")));
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

/// Parses and validates; an invalid POVM is a validation failure.
fn read_povm(path: &Path) -> Result<Povm, CliError> {
    let povm = povm_from_json(&read_text(path)?)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let report = povm.validate();
    if !report.ok {
        return Err(CliError::Invalid(format!("{}: {report}", path.display())));
    }
    Ok(povm)
}

fn read_pair(files: &PairFiles) -> Result<(Povm, Povm), CliError> {
    let (e, f) = (read_povm(&files.e)?, read_povm(&files.f)?);
    if e.dim() != f.dim() {
        return Err(CliError::Invalid(format!("POVMs act on C^{} and C^{}", e.dim(), f.dim())));
    }
    Ok((e, f))
}

fn pair_inputs(files: &PairFiles) -> Value {
    json!({ "E": files.e.display().to_string(), "F": files.f.display().to_string() })
}

fn p_json(p: SchattenP) -> Value {
    serde_json::to_value(p).expect("SchattenP serializes")
}

fn upsilon_cmd(files: &PairFiles, p: SchattenP, output: &Output) -> Result<u8, CliError> {
    let (e, f) = read_pair(files)?;
    let dense = upsilon(&e, &f, p)?;
    let max_value = if e.dim() >= 2 { Some(max_upsilon(e.dim(), p)?) } else { None };
    let fast = upsilon_rank1_povm(&e, &f, p).ok().map(|r| r.value);

    let mut r = Report::new("upsilon");
    r.inputs = pair_inputs(files);
    r.params = json!({ "p": p_json(p) });
    let terms: Vec<Vec<f64>> = (0..e.len())
        .map(|a| (0..f.len()).map(|b| dense.per_pair_terms[(a, b)]).collect())
        .collect();
    r.results = json!({
        "upsilon": dense.value,
        "max_upsilon": max_value,
        "rank1_fast_path": fast,
        "per_pair_terms": terms,
    });
    r.residuals = json!({
        "completeness_e": e.validate().completeness_residual,
        "completeness_f": f.validate().completeness_residual,
        "rank1_vs_dense": fast.map(|v| (v - dense.value).abs()),
    });
    r.line("upsilon", num(dense.value));
    if let Some(m) = max_value {
        r.line("max_upsilon", num(m));
    }
    if let Some(v) = fast {
        r.line("rank1_fast_path", num(v));
    }
    let mut csv = String::from("a,b,term\n");
    for (a, row) in terms.iter().enumerate() {
        for (b, t) in row.iter().enumerate() {
            csv.push_str(&format!("{a},{b},{}\n", qincompat::povm::format_f64(*t)));
        }
    }
    r.csv = Some(csv);
    finish(&r, output, 0)
}

fn eta_g_cmd(files: &PairFiles, tol: f64, dump: Option<&Path>, output: &Output) -> Result<u8, CliError> {
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
    }
    let (e, f) = read_pair(files)?;
    if let Some(path) = dump {
        std::fs::write(path, eta_g_problem_json(&e, &f)?).map_err(io_err(path))?;
    }
    let (sol, code) = match eta_g_solve(&e, &f, tol) {
        Ok(sol) => (sol, 0),
        Err(Error::SolverDidNotConverge { best }) => (*best, EXIT_NO_CONVERGENCE),
        Err(err) => return Err(err.into()),
    };
    let lower = universal_lower_bound(e.dim());

    let mut r = Report::new("eta-g");
    r.inputs = pair_inputs(files);
    r.params = json!({ "tol": tol, "dump_sdp": dump.map(|p| p.display().to_string()) });
    r.results = json!({
        "eta_g": sol.eta,
        "dual_bound": sol.dual_objective(),
        "universal_lower_bound": lower,
        "converged": sol.converged,
        "iterations": sol.iterations,
    });
    r.residuals = json!({
        "primal_infeasibility": sol.primal_infeasibility,
        "dual_infeasibility": sol.dual_infeasibility,
        "gap": sol.gap,
        "primal": sol.primal_residuals,
        "dual": sol.dual_residuals,
    });
    r.line("eta_g", num(sol.eta));
    r.line("dual_bound", num(sol.dual_objective()));
    r.line("universal_lower_bound", num(lower));
    r.line("converged", sol.converged.to_string());
    r.line("iterations", sol.iterations.to_string());
    r.line("primal_infeasibility", sci(sol.primal_infeasibility));
    r.line("dual_infeasibility", sci(sol.dual_infeasibility));
    r.line("gap", sci(sol.gap));
    finish(&r, output, code)
}

fn certify_cmd(files: &PairFiles, p: SchattenP, tol: f64, output: &Output) -> Result<u8, CliError> {
    let (e, f) = read_pair(files)?;
    if e.dim() < 2 {
        return Err(CliError::Invalid("certification needs dimension at least 2".into()));
    }
    let cert = certify_maximal(&e, &f, p, tol)?;

    let mut r = Report::new("certify");
    r.inputs = pair_inputs(files);
    r.params = json!({ "p": p_json(p), "tol": tol });
    r.line("maximal", cert.is_maximal.to_string());
    r.line("upsilon", num(cert.upsilon));
    r.line("max_upsilon", num(cert.max_value));
    r.line("overlap_deviation", sci(cert.overlap_deviation));
    r.results = serde_json::to_value(&cert).expect("certificate serializes");
    if cert.is_maximal {
        let dual = dual_certificate_rank1_uniform(&e, &f)?;
        let residuals = check_dual_feasible(&dual.x, &dual.y, &dual.n, &e, &f)?;
        r.results["eta_g_upper_bound"] = json!(dual.trace_n);
        r.results["dual_margin"] = json!(dual.min_margin);
        r.residuals = json!({ "dual_certificate": residuals });
        r.line("eta_g_upper_bound", num(dual.trace_n));
        r.line("dual_certificate_violation", sci(residuals.max_violation));
    }
    for d in &cert.diagnostics {
        r.line("note", d.clone());
    }
    finish(&r, output, 0)
}

fn povm_value(povm: &Povm) -> Value {
    serde_json::from_str(&povm_to_json(povm)).expect("writer emits valid JSON")
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(io_err(path))
}

/// Writes `E.json` and `F.json` into `dir`, creating it if needed.
fn write_pair(dir: &Path, e: &Povm, f: &Povm) -> Result<(PathBuf, PathBuf), CliError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let (pe, pf) = (dir.join("E.json"), dir.join("F.json"));
    for (path, povm) in [(&pe, e), (&pf, f)] {
        let text = povm_to_json(povm);
        write_file(path, &text)?;
        check_round_trip(&read_text(path)?, povm)?;
    }
    Ok((pe, pf))
}

fn check_round_trip(text: &str, original: &Povm) -> Result<(), CliError> {
    let back = povm_from_json(text)?;
    let report = back.validate();
    if &back != original || !report.ok {
        return Err(CliError::Invalid(format!("fixture failed round-trip validation: {report}")));
    }
    Ok(())
}

fn mub_cmd(dim: usize, p: SchattenP, output: &Output) -> Result<u8, CliError> {
    require_dim(dim)?;
    let (e, f) = mub_pair(dim)?;
    let value = upsilon(&e, &f, p)?.value;
    let max_value = max_upsilon(dim, p)?;
    let target = 1.0 / (dim as f64).sqrt();
    let deviation = overlap_table(&e, &f)?.c.iter().fold(0.0_f64, |m, c| m.max((c - target).abs()));

    let mut r = Report::new("mub");
    r.params = json!({ "dim": dim, "p": p_json(p) });
    r.line("dim", dim.to_string());
    r.line("upsilon", num(value));
    r.line("max_upsilon", num(max_value));
    r.results = json!({ "upsilon": value, "max_upsilon": max_value });
    r.residuals = json!({ "overlap_deviation": deviation });
    // --out names the fixture directory here; the report goes to stdout.
    match &output.out {
        Some(dir) => {
            let (pe, pf) = write_pair(dir, &e, &f)?;
            r.results["files"] = json!([pe.display().to_string(), pf.display().to_string()]);
            r.line("wrote", format!("{} {}", pe.display(), pf.display()));
        }
        None => {
            r.results["E"] = povm_value(&e);
            r.results["F"] = povm_value(&f);
        }
    }
    emit(&r.render(output.format)?, None)?;
    Ok(0)
}

fn random_cmd(dim: usize, seed: u64, count: usize, tol: f64, p: SchattenP, output: &Output) -> Result<u8, CliError> {
    require_dim(dim)?;
    let mut rng = rng_from_seed(seed);
    let mut csv = String::from("index,tau,upsilon,lower,upper,qrac_f\n");
    let (mut violations, mut min_slack) = (0usize, f64::INFINITY);
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let e = random_basis_with(dim, &mut rng)?;
        let f = random_basis_with(dim, &mut rng)?;
        let value = upsilon(&e, &f, p)?.value;
        let tau = uncertainty_tau(&e, &f)?;
        let lower = uncertainty_lower_bound(tau, dim, p)?;
        let upper = uncertainty_upper_bound(tau, dim, p)?;
        let qrac = qrac_p_ave(&e, &f, p)?.lower_bound_f;
        let slack = (value - lower).min(upper - value).min(value - qrac);
        min_slack = min_slack.min(slack);
        if slack < -tol {
            violations += 1;
        }
        let row = [tau, value, lower, upper, qrac];
        let cells: Vec<String> = row.iter().map(|x| qincompat::povm::format_f64(*x)).collect();
        csv.push_str(&format!("{i},{}\n", cells.join(",")));
        rows.push(row.to_vec());
    }

    let mut r = Report::new("random");
    r.params = json!({ "dim": dim, "seed": seed, "count": count, "p": p_json(p), "tol": tol });
    r.results = json!({
        "violations": violations,
        "columns": ["tau", "upsilon", "lower", "upper", "qrac_f"],
        "rows": rows,
    });
    r.residuals = json!({ "min_slack": if count > 0 { Some(min_slack) } else { None } });
    r.line("samples", count.to_string());
    r.line("violations", violations.to_string());
    if count > 0 {
        r.line("min_slack", sci(min_slack));
    }
    r.csv = Some(csv);
    finish(&r, output, if violations > 0 { EXIT_VALIDATION } else { 0 })
}

fn preprocess_cmd(p: SchattenP, output: &Output) -> Result<u8, CliError> {
    let (e, f) = qutrit_commuting_fixture();
    let channel = KrausChannel::qutrit_to_qubit_fixture();
    let before = upsilon(&e, &f, p)?.value;
    let (e2, f2) = (pre_process(&e, &channel)?, pre_process(&f, &channel)?);
    let after = upsilon(&e2, &f2, p)?.value;
    let (ve, vf) = (e2.validate(), f2.validate());

    let mut r = Report::new("preprocess-demo");
    r.inputs = json!({ "E": "paper-qutrit-EF", "F": "paper-qutrit-EF", "channel": "paper-kraus-channel" });
    r.params = json!({ "p": p_json(p) });
    r.results = json!({ "before": before, "after": after, "dim_before": e.dim(), "dim_after": e2.dim() });
    r.residuals = json!({
        "completeness_e_after": ve.completeness_residual,
        "completeness_f_after": vf.completeness_residual,
    });
    r.line("before", num(before));
    r.line("after", num(after));
    let code = if ve.ok && vf.ok { 0 } else { EXIT_VALIDATION };
    finish(&r, output, code)
}

fn curves_cmd(
    kind: CurveArg,
    dim: usize,
    p: SchattenP,
    grid: usize,
    c_bar: f64,
    format: Format,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    require_dim(dim)?;
    if grid < 2 {
        return Err(CliError::Usage(format!("--grid must be at least 2, got {grid}")));
    }
    if !(0.0..=1.0).contains(&c_bar) {
        return Err(CliError::Usage(format!("--c-bar must lie in [0, 1], got {c_bar}")));
    }
    let kind = match kind {
        CurveArg::Qrac => CurveKind::Qrac,
        CurveArg::Uncertainty => CurveKind::Uncertainty,
        CurveArg::HP => CurveKind::HP { c_bar },
    };
    let table = emit_curves(kind, dim, p, grid)?;
    let text = match format {
        Format::Csv | Format::Text => table.to_csv(),
        Format::Json => {
            let params: serde_json::Map<String, Value> =
                table.params.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
            let doc = json!({
                "command": "curves",
                "inputs": {},
                "params": params,
                "results": { "columns": table.columns, "rows": table.rows },
                "residuals": {},
            });
            serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n"
        }
    };
    emit(&text, out)?;
    Ok(0)
}

fn validate_cmd(file: &Path, output: &Output) -> Result<u8, CliError> {
    let text = read_text(file)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", file.display())))?;
    let mut r = Report::new("validate");
    r.inputs = json!({ "file": file.display().to_string() });

    let ok = if doc.get("kraus").is_some() {
        r.line("kind", "channel");
        match channel_from_json(&text) {
            Ok(ch) => {
                r.results = json!({ "kind": "channel", "ok": true, "dim_in": ch.dim_in(), "dim_out": ch.dim_out() });
                r.line("dim_in", ch.dim_in().to_string());
                r.line("dim_out", ch.dim_out().to_string());
                // Unitality only makes sense between equal dimensions.
                if ch.dim_in() == ch.dim_out() {
                    r.residuals = json!({ "unitality": ch.unitality_deviation() });
                    r.line("unitality_deviation", sci(ch.unitality_deviation()));
                }
                true
            }
            Err(err @ Error::InvalidChannel { .. }) => {
                r.results = json!({ "kind": "channel", "ok": false, "error": err.to_string() });
                r.line("error", err.to_string());
                false
            }
            Err(err) => return Err(CliError::Invalid(format!("{}: {err}", file.display()))),
        }
    } else {
        r.line("kind", "povm");
        let povm = povm_from_json(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", file.display())))?;
        let report = povm.validate();
        let class = povm.classify();
        r.results = json!({ "kind": "povm", "ok": report.ok, "report": report, "class": class });
        r.residuals = json!({ "completeness": report.completeness_residual });
        r.line("dim", report.dim.to_string());
        r.line("outcomes", report.outcomes.to_string());
        r.line("completeness_residual", sci(report.completeness_residual));
        r.line("rank1", class.is_rank1.to_string());
        r.line("projective", class.is_projective.to_string());
        if !report.ok {
            r.line("error", report.to_string());
        }
        report.ok
    };
    r.line("valid", ok.to_string());
    finish(&r, output, if ok { 0 } else { EXIT_VALIDATION })
}

fn fixture_cmd(kind: FixtureKind, dim: usize, n: Option<usize>, seed: u64, out: Option<&Path>) -> Result<u8, CliError> {
    let pair = match kind {
        FixtureKind::MubPair => {
            require_dim(dim)?;
            Some(mub_pair(dim)?)
        }
        FixtureKind::PaperQutritEF => Some(qutrit_commuting_fixture()),
        _ => None,
    };
    if let Some((e, f)) = pair {
        let dir = out.ok_or_else(|| CliError::Usage("pair fixtures need --out DIR".into()))?;
        let (pe, pf) = write_pair(dir, &e, &f)?;
        println!("{}\n{}", pe.display(), pf.display());
        return Ok(0);
    }

    if kind == FixtureKind::PaperKrausChannel {
        let channel = KrausChannel::qutrit_to_qubit_fixture();
        let text = channel_to_json(&channel);
        channel_from_json(&text)?;
        emit(&text, out)?;
        return Ok(0);
    }

    if dim == 0 {
        return Err(CliError::Usage("--dim must be positive".into()));
    }
    let povm = match kind {
        FixtureKind::Computational => Povm::computational_basis(dim),
        FixtureKind::RandomBasis => random_basis(dim, seed)?,
        FixtureKind::RandomRank1 => {
            let n = n.unwrap_or(dim + 1);
            if n < dim {
                return Err(CliError::Usage(format!("--n must be at least --dim ({dim}), got {n}")));
            }
            random_rank1_povm(dim, n, seed)?
        }
        _ => unreachable!("pair and channel kinds handled above"),
    };
    let text = povm_to_json(&povm);
    check_round_trip(&text, &povm)?;
    emit(&text, out)?;
    Ok(0)
}
