//! Subcommand implementations: each turns resolved settings into a report, an optional CSV
//! curve, and a list of named contract checks.

use crate::settings::{usage, Settings};
use anyhow::{Context, Result};
use fibered::boundary::{self, BoundaryProblem, Example4Variant, InteriorData};
use fibered::calkin::{self, FredholmStatus, LadderShape};
use fibered::obstruction::{self, Representative};
use fibered::symbols::SymbolKind;
use fibered::{builtins, expr, quantize, CompatibleSymbol, Complex64, FrequencyGrid};
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;

/// Named pass/fail check with the measured value.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: Value,
}

fn check(name: &str, pass: bool, value: impl Serialize) -> Check {
    Check { name: name.into(), pass, value: serde_json::to_value(value).unwrap_or(Value::Null) }
}

/// Result of one subcommand.
pub struct Outcome {
    pub report: Value,
    pub csv: Option<String>,
    pub checks: Vec<Check>,
}

fn to_json(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Built-in name, or `expr:<principal>` with an optional `<key>-limit` setting.
pub fn resolve_symbol(s: &Settings, key: &str) -> Result<CompatibleSymbol> {
    let name = s.string(key)?;
    if let Some(e) = name.strip_prefix("expr:") {
        let limit = s.raw(&format!("{key}-limit"));
        return expr::expression_symbol(e, e, limit, None).map_err(|err| usage(format!("{key}: {err}")));
    }
    builtins::builtin(&name).map_err(|err| usage(format!("{key}: {err}")))
}

pub fn resolve_problem(name: &str) -> Result<BoundaryProblem> {
    let r = match name {
        "example3" => boundary::example3_problem(),
        "example4-half" => boundary::example4_problem(0, Example4Variant::HalfWeight),
        "scalar" => boundary::scalar_trace_problem(),
        other => match other.strip_prefix("example4:") {
            Some(n) => {
                let n: i64 = n.parse().map_err(|_| usage(format!("bad twist in '{other}'")))?;
                boundary::example4_problem(n, Example4Variant::AsStated)
            }
            None => return Err(usage(format!("unknown problem '{other}' (example3, example4:<n>, example4-half, scalar)"))),
        },
    };
    r.map_err(|e| usage(e.to_string()))
}

pub fn list_builtins() -> Value {
    json!({
        "symbols": builtins::list_builtins(),
        "corpus": builtins::corpus().iter().map(|s| s.name.clone()).collect::<Vec<_>>(),
        "elliptic_corpus": builtins::elliptic_corpus().iter().map(|s| s.name.clone()).collect::<Vec<_>>(),
        "problems": ["example3", "example4:<n>", "example4-half", "scalar"],
        "obstruction_problems": ["example3", "example4:<n> (with w = -1, 0, 1)"],
    })
}

pub fn quantize_cmd(s: &Settings) -> Result<Outcome> {
    let sym = resolve_symbol(s, "symbol")?;
    let (nx, ny) = s.grid_or("grid", (16, 16))?;
    let conv = match s.string_or("convention", "plus").as_str() {
        "plus" => fibered::symbols::EtaConvention::Plus,
        "minus" => fibered::symbols::EtaConvention::Minus,
        other => return Err(usage(format!("convention must be plus or minus, not '{other}'"))),
    };
    let tol = s.tolerance_or("convention-tol", 1e-10)?;
    let grid = FrequencyGrid::new(nx, ny, sym.rank);
    let op = quantize::quantize_between(&sym, &grid, &grid, conv)?;
    let delta = quantize::convention_independence_test(&sym, &grid)?;
    let compat = sym.check_compatibility(1e-8);
    if let Some(path) = s.raw("output") {
        let f = std::fs::File::create(path).with_context(|| format!("creating {path}"))?;
        fibered::io::write_operator(&op, std::io::BufWriter::new(f))?;
    }
    let mut csv = String::from("row,col,re,im\n");
    for j in 0..op.matrix.ncols {
        for (i, v) in op.matrix.column(j) {
            let _ = writeln!(csv, "{i},{j},{:e},{:e}", v.re, v.im);
        }
    }
    let checks = vec![
        check("compatibility", compat.max_deviation <= 1e-8, compat.max_deviation),
        check("convention_independence", delta <= tol, delta),
    ];
    let report = json!({
        "symbol": sym.name, "grid": grid, "dim": grid.dim(), "nnz": op.matrix.nnz(),
        "frobenius": op.matrix.frobenius(), "convention_delta": delta, "compatibility": to_json(&compat),
    });
    Ok(Outcome { report, csv: Some(csv), checks })
}

pub fn compose_cmd(s: &Settings) -> Result<Outcome> {
    let a = resolve_symbol(s, "a")?;
    let b = resolve_symbol(s, "b")?;
    let (nx, ny) = s.grid_or("grid", (48, 48))?;
    let shells = s.ladder_or("shells", &[4, 8, 16, 32])?;
    let max_slope: f64 = s.parse_or("max-slope", -0.8)?;
    let grid = FrequencyGrid::new(nx, ny, a.rank);
    let curve = calkin::composition_residual(&a, &b, &grid, &shells)?;
    let sigma0 = matches!(a.kind, SymbolKind::Smooth | SymbolKind::FiberFamily | SymbolKind::Sigma0);
    let checks = if curve.is_exact() {
        vec![check("exact_composition", true, 0.0)]
    } else if sigma0 {
        vec![check("slope", curve.slope.is_some_and(|sl| sl <= max_slope), curve.slope)]
    } else {
        vec![check("strictly_decreasing", curve.strictly_decreasing(), &curve.points)]
    };
    let mut csv = String::from("shell,norm\n");
    for (k, v) in &curve.points {
        let _ = writeln!(csv, "{k},{v:e}");
    }
    let report = json!({ "a": a.name, "b": b.name, "left_in_sigma0": sigma0, "grid": grid, "curve": to_json(&curve) });
    Ok(Outcome { report, csv: Some(csv), checks })
}

pub fn ess_norm_cmd(s: &Settings) -> Result<Outcome> {
    let sym = resolve_symbol(s, "symbol")?;
    let n = s.parse_or("n", 64usize)?;
    let shells = s.ladder_or("shells", &[16, 32])?;
    let tol = s.tolerance_or("tolerance", 0.05)?;
    let ptol = s.tolerance_or("perturbation-tolerance", 0.01)?;
    if shells.last().is_some_and(|&k| k > n) {
        return Err(usage("shells must not exceed n"));
    }
    let c = calkin::ess_norm_comparison(&sym, n, &shells)?;
    let mut csv = String::from("shell,compression,perturbed\n");
    for ((k, v), (_, p)) in c.estimate.shells.iter().zip(&c.perturbed.shells) {
        let _ = writeln!(csv, "{k},{v:e},{p:e}");
    }
    let checks = vec![
        check("relative_error", c.relative_error <= tol, c.relative_error),
        check("perturbation_shift", c.perturbation_shift < ptol, c.perturbation_shift),
    ];
    Ok(Outcome { report: to_json(&c), csv: Some(csv), checks })
}

pub fn fredholm_cmd(s: &Settings) -> Result<Outcome> {
    let sym = resolve_symbol(s, "symbol")?;
    let ladder = s.ladder_or("ladder", &[24, 32, 40])?;
    let shape = match s.string_or("shape", "square").as_str() {
        "square" => LadderShape::Square,
        "base" => LadderShape::BaseOnly,
        "fiber" => LadderShape::FiberOnly,
        other => return Err(usage(format!("shape must be square, base or fiber, not '{other}'"))),
    };
    let expect: Option<i64> = s.optional("expect-index")?;
    let rep = calkin::fredholm_check_shaped(&sym, &ladder, shape)?;
    let mut checks = Vec::new();
    if rep.ellipticity.elliptic {
        checks.push(check("stabilized", rep.stabilized, rep.index));
        if let Some(e) = expect {
            checks.push(check("index", rep.index == Some(e), rep.index));
        }
    } else {
        checks.push(check("flagged_not_fredholm", rep.status == FredholmStatus::NotFredholm, rep.min_singular_decay));
    }
    let mut csv = String::from("n,dim_ker,dim_coker,raw_ker,raw_coker,min_singular_value\n");
    for st in &rep.steps {
        let _ = writeln!(csv, "{},{},{},{},{},{:e}", st.n, st.dim_ker, st.dim_coker, st.raw_ker, st.raw_coker, st.min_singular_value);
    }
    Ok(Outcome { report: to_json(&rep), csv: Some(csv), checks })
}

fn read_complex(v: &Value, what: &str) -> Result<Vec<Complex64>> {
    let re = v["re"].as_array().ok_or_else(|| usage(format!("{what}: missing 're' array")))?;
    let im = v["im"].as_array().ok_or_else(|| usage(format!("{what}: missing 'im' array")))?;
    if re.len() != im.len() {
        return Err(usage(format!("{what}: 're' and 'im' differ in length")));
    }
    re.iter()
        .zip(im)
        .map(|(a, b)| Ok(Complex64::new(a.as_f64().ok_or_else(|| usage(format!("{what}: non-numeric entry")))?, b.as_f64().ok_or_else(|| usage(format!("{what}: non-numeric entry")))?)))
        .collect()
}

fn read_json(path: &str) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("reading {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{path}: {e}")))
}

/// `f.json`: `{"terms": [{"mu": 0.7, "re": [...], "im": [...]}, ...]}`; `g.json`: `{"re", "im"}`.
fn load_data(fpath: &str, gpath: &str) -> Result<(InteriorData, Vec<Complex64>)> {
    let f = read_json(fpath)?;
    let terms = f["terms"]
        .as_array()
        .ok_or_else(|| usage(format!("{fpath}: missing 'terms'")))?
        .iter()
        .map(|t| Ok((t["mu"].as_f64().ok_or_else(|| usage(format!("{fpath}: term without 'mu'")))?, read_complex(t, fpath)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok((InteriorData { terms }, read_complex(&read_json(gpath)?, gpath)?))
}

pub fn bvp_cmd(s: &Settings) -> Result<Outcome> {
    let bvp = resolve_problem(&s.string_or("problem", "example3"))?;
    let (nx, ny) = s.grid_or("grid", (16, 16))?;
    let ladder = s.ladder_or("ladder", &[6, 8, 10])?;
    let tol = s.tolerance_or("residual-tol", 1e-8)?;
    let seed = s.parse_or("seed", 1u64)?;
    let expect: Option<i64> = s.optional("expect-index")?;
    let grid = FrequencyGrid::new(nx, ny, bvp.model.rank);
    let ell = boundary::bvp_ellipticity_check(&bvp, &grid)?;
    let idx = boundary::bvp_index(&bvp, &ladder, ny == 0)?;
    let (f, g) = match (s.raw("f"), s.raw("g")) {
        (Some(fp), Some(gp)) => load_data(fp, gp)?,
        (None, None) => boundary::random_data(&bvp, &grid, seed),
        _ => return Err(usage("--f and --g must be given together")),
    };
    let mut checks = vec![
        check("principal_margin", ell.principal_margin > boundary::RANK_TOL, ell.principal_margin),
        check("operator_margin", ell.operator_margin > boundary::RANK_TOL, ell.operator_margin),
        check("index_stabilized", idx.stabilized, idx.index),
    ];
    if let Some(e) = expect {
        checks.push(check("index", idx.index == Some(e), idx.index));
    }
    let mut csv = String::from("t,xi,eta,component,re,im\n");
    let solution = match boundary::bvp_solve(&bvp, &grid, &f, &g) {
        Ok(sol) => {
            checks.push(check("equation_residual", sol.residuals.equation <= tol, sol.residuals.equation));
            checks.push(check("boundary_residual", sol.residuals.boundary <= tol, sol.residuals.boundary));
            let g2 = sol.grid;
            for (xi, eta) in g2.modes() {
                for t in boundary::t_grid() {
                    let u = sol.value(xi, eta, t);
                    for (c, v) in u.iter().enumerate() {
                        let _ = writeln!(csv, "{t:e},{xi},{eta},{c},{:e},{:e}", v.re, v.im);
                    }
                }
            }
            to_json(&sol.residuals)
        }
        Err(e) => {
            checks.push(check("solve", false, e.to_string()));
            Value::Null
        }
    };
    let report = json!({ "problem": bvp.name, "grid": grid, "ellipticity": to_json(&ell), "index": to_json(&idx), "residuals": solution });
    Ok(Outcome { report, csv: Some(csv), checks })
}

pub fn obstruction_cmd(s: &Settings) -> Result<Outcome> {
    let problem = s.string_or("problem", "example3");
    let truncation = s.parse_or("truncation", 8usize)?;
    let rep = match s.string_or("representative", "rescaled").as_str() {
        "rescaled" => Representative::Rescaled,
        "difference" => Representative::Difference,
        other => return Err(usage(format!("representative must be rescaled or difference, not '{other}'"))),
    };
    let mut checks = Vec::new();
    let (family, expected, homotopy) = if problem == "example3" {
        let fam = obstruction::example3_family(truncation, rep)?;
        let h = if s.bool_or("homotopy", true)? {
            let q = calkin::ProjectionSymbol::new(builtins::hirzebruch_calderon())?;
            let p = calkin::ProjectionSymbol::new(builtins::hirzebruch_boundary())?;
            let samples = s.parse_or("phi-samples", 9usize)?;
            Some(obstruction::homotopy_family(&q, &p, &builtins::hirzebruch_boundary(), truncation, &obstruction::phi_samples(samples))?)
        } else {
            None
        };
        (fam, 0, h)
    } else if let Some(n) = problem.strip_prefix("example4:") {
        let n: i64 = n.parse().map_err(|_| usage(format!("bad twist in '{problem}'")))?;
        let w = s.parse_or("w", 1i64)?;
        let fam = obstruction::example4_family(n, w, truncation, rep).map_err(|e| usage(e.to_string()))?;
        (fam, n * w, None)
    } else {
        return Err(usage(format!("unknown obstruction problem '{problem}' (example3, example4:<n>)")));
    };
    let r = obstruction::obstruction_invariant(&family)?;
    checks.push(check("stable", r.stable, &r.loops.iter().map(|l| l.winding_ccw).collect::<Vec<_>>()));
    checks.push(check("invariant", r.invariant == s.optional("expect")?.unwrap_or(expected), r.invariant));
    if let Some(h) = &homotopy {
        checks.push(check("homotopy_constant", h.constant, h.steps.iter().map(|st| st.invariant).collect::<Vec<_>>()));
        checks.push(check("invertible_at_end", h.invertible_at_end, h.steps.last().map(|st| st.ball_margin)));
    }
    let mut csv = String::from("loop,truncation,samples,k,theta,phase\n");
    for (li, l) in r.loops.iter().enumerate() {
        for (k, ph) in l.phases.iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * k as f64 / l.samples as f64;
            let _ = writeln!(csv, "{li},{},{},{k},{th:e},{ph:e}", l.truncation, l.samples);
        }
    }
    let report = json!({ "problem": problem, "expected": expected, "obstruction": to_json(&r), "homotopy": to_json(&homotopy) });
    Ok(Outcome { report, csv: Some(csv), checks })
}
