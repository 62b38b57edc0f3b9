use std::fmt::Write as _;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use solitonlab::catalog::{default_mode, soliton_by_name, CatalogEntry};
use solitonlab::flow::{self, log_grid};
use solitonlab::krylov::GmresOptions;
use solitonlab::ode::Dopri5Options;
use solitonlab::resolvent::{self, CutoffData, Discretization, Grid, GridTensorField};
use solitonlab::sampling::sample_points;
use solitonlab::scalar::parse_rational;
use solitonlab::stability::{optimal_omega, FormMode, StabilityContext};
use solitonlab::suite::{self, SuiteConfig};
use solitonlab::{Complex64, Mat, Rational, Scalar};

use crate::output::{float, to_csv, to_json};
use crate::{Cli, Format, FlowArgs, Outcome, ReproduceArgs, ResolventArgs, SemigroupArgs, StabilityArgs, UsageError, VerifyArgs};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_opt_rational(v: &Option<String>, flag: &str) -> Result<Option<Rational>> {
    v.as_deref()
        .map(|s| parse_rational(s).map_err(|e| usage(format!("--{flag}: {e}"))))
        .transpose()
}

fn lookup(name: &str, gamma: Option<Rational>, alpha: Option<Rational>) -> Result<CatalogEntry> {
    soliton_by_name(name, gamma, alpha).map_err(|e| match e {
        solitonlab::Error::UnknownGeometry(_) => e.into(),
        other => usage(other.to_string()),
    })
}

fn format_or(cli: &Cli, default: Format) -> Format {
    cli.format.unwrap_or(default)
}

fn rational_rows(m: &Mat<Rational>) -> Value {
    json!(m.row_vecs().iter().map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
}

pub fn verify_soliton(cli: &Cli, a: &VerifyArgs) -> Result<Outcome> {
    let gamma = parse_opt_rational(&a.gamma, "gamma")?;
    let alpha = parse_opt_rational(&a.alpha, "alpha")?;
    if a.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let s = lookup(&a.name, gamma, alpha)?.soliton;
    let n = s.dim();
    let pts = sample_points(n, a.samples - 1, a.radius, cli.seed);
    let residual = s.residual_tensor()?;
    let per_point: Vec<f64> =
        pts.iter().map(|p| residual.data().iter().map(|f| f.eval(p).abs()).fold(0.0, f64::max)).collect();
    let residual_max = per_point.iter().cloned().fold(0.0, f64::max);
    let jet = s.covariant_gradient()?;
    let divergence = match jet.divergence.constant_value() {
        Some(d) => d.to_string(),
        None => jet.divergence.to_string(),
    };
    let (dxi, nongradient) = s.nongradient_check()?;
    let passed = residual_max <= 1e-10;
    match format_or(cli, Format::Json) {
        Format::Json => {
            let dxi_samples: Vec<Value> = pts
                .iter()
                .take(5)
                .map(|p| json!({ "x": p, "dxi": dxi.map(|f| f.eval(p)).row_vecs() }))
                .collect();
            let body = json!({
                "name": s.name,
                "alpha": s.alpha.to_string(),
                "samples": pts.len(),
                "residual_max": residual_max,
                "exact": s.is_exact_soliton()?,
                "divergence": divergence,
                "nongradient": nongradient,
                "dxi_samples": dxi_samples,
                "passed": passed,
            });
            Ok(Outcome { body: to_json(&body), notes: None, passed })
        }
        Format::Csv => {
            let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            header.push("residual".into());
            let rows: Vec<Vec<String>> = pts
                .iter()
                .zip(&per_point)
                .map(|(p, r)| p.iter().chain(std::iter::once(r)).map(|v| float(*v)).collect())
                .collect();
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            Ok(Outcome { body: to_csv(&h, &rows)?, notes: None, passed })
        }
    }
}

pub fn stability(cli: &Cli, a: &StabilityArgs) -> Result<Outcome> {
    let gamma = parse_opt_rational(&a.gamma, "gamma")?;
    let entry = lookup(&a.name, gamma, None)?;
    let mode: FormMode = match &a.mode {
        Some(m) => m.parse().map_err(|e: solitonlab::Error| usage(e.to_string()))?,
        None => default_mode(&entry.soliton.name),
    };
    let ctx = StabilityContext::new(&entry.soliton)?;
    let q = ctx.integrated_form(mode)?;
    let labels: Vec<String> = (0..q.basis.len()).map(|p| q.basis.label(p)).collect();
    let mut passed = true;
    let mut body = json!({
        "name": entry.soliton.name,
        "mode": mode,
        "omega_paper": entry.omega_claimed,
        "basis": labels,
        "M": rational_rows(&q.m),
        "G": rational_rows(&q.g),
    });
    if a.optimal {
        let w = optimal_omega(&q)?;
        if let Some(claim) = entry.omega_claimed {
            passed = w.omega >= claim - 1e-9;
        }
        body["omega_optimal"] = json!(w.omega);
        body["witness_vector"] = json!(w.witness);
        body["passed"] = json!(passed);
    }
    match format_or(cli, Format::Json) {
        Format::Json => Ok(Outcome { body: to_json(&body), notes: None, passed }),
        Format::Csv => {
            let mut rows = Vec::new();
            for p in 0..labels.len() {
                for r in 0..labels.len() {
                    rows.push(vec![labels[p].clone(), labels[r].clone(), q.m[(p, r)].to_string(), q.g[(p, r)].to_string()]);
                }
            }
            Ok(Outcome { body: to_csv(&["p", "q", "M", "G"], &rows)?, notes: None, passed })
        }
    }
}

fn parse_matrix(text: &str, n: usize) -> Result<Mat<f64>> {
    let rows: Vec<Vec<f64>> = match serde_json::from_str(text) {
        Ok(r) => r,
        Err(_) => {
            let contents = std::fs::read_to_string(text)
                .map_err(|e| usage(format!("--g0 is neither a JSON matrix nor a readable file ({e})")))?;
            serde_json::from_str(&contents).map_err(|e| usage(format!("--g0 file {text}: {e}")))?
        }
    };
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(usage(format!("--g0 must be a {n}x{n} matrix")));
    }
    let m = Mat::from_rows(&rows)?;
    if !m.is_symmetric() || m.cholesky().is_err() {
        return Err(usage("--g0 must be symmetric positive definite"));
    }
    Ok(m)
}

pub fn flow(cli: &Cli, a: &FlowArgs) -> Result<Outcome> {
    let s = lookup(&a.name, None, None)?.soliton;
    if !(a.t1 > a.t0) || a.t0 < 0.0 {
        return Err(usage("need 0 ≤ t0 < t1"));
    }
    if !(a.rtol > 0.0) {
        return Err(usage("--rtol must be positive"));
    }
    let n = s.dim();
    let alpha = Scalar::to_f64(&s.alpha);
    let g = s.geom.metric_f64();
    let from_soliton = a.g0 == "soliton";
    let g0 = if from_soliton {
        if alpha <= 0.0 || a.t0 <= 0.0 {
            return Err(usage("--g0 soliton needs α > 0 and t0 > 0"));
        }
        g.scaled(&(alpha * a.t0))
    } else {
        parse_matrix(&a.g0, n)?
    };
    let sc = s.geom.structure_constants.map(Scalar::to_f64);
    let opts = Dopri5Options { rtol: a.rtol, ..Default::default() };
    let traj = flow::ricci_flow_integrate(&sc, &g0, a.t0, a.t1, &opts)?;
    let times: Vec<f64> = if a.t0 > 0.0 {
        log_grid(a.t0, a.t1, a.per_decade.max(1)).into_iter().map(|t| t.min(a.t1)).collect()
    } else {
        (0..=100).map(|k| a.t0 + (a.t1 - a.t0) * k as f64 / 100.0).collect()
    };
    let mut samples = Vec::with_capacity(times.len());
    for &t in &times {
        let gt = traj.metric_at(t)?;
        let rm = flow::rm_norm(&sc, &gt)?;
        samples.push((t, gt, t * rm));
    }
    let type3_sup = if a.t0 > 0.0 { Some(flow::type3_diagnostic(&traj, a.per_decade.max(1))?.sup) } else { None };
    let orbit_deviation = if s.is_exact_soliton()? && flow::eta_exponents(&s).is_ok() {
        let pts = sample_points(n, 4, 1.0, cli.seed);
        let horizon = a.t1.min(100.0);
        Some(flow::soliton_orbit_check(&s, &[0.0, horizon / 10.0, horizon], &pts)?)
    } else {
        None
    };
    let s_values: Vec<f64> = [1e2, 1e4, 1e6].into_iter().filter(|&v| v >= a.t0 && v <= a.t1).collect();
    let blowdown = if s_values.len() >= 2 && alpha > 0.0 {
        Some(flow::blowdown_check(&traj, &s_values, &g.scaled(&alpha))?)
    } else {
        None
    };
    let diagnostics = json!({
        "name": s.name,
        "t0": a.t0,
        "t1": a.t1,
        "initial_metric": g0.row_vecs(),
        "steps": traj.solution.t.len(),
        "type3_sup": type3_sup,
        "orbit_deviation": orbit_deviation,
        "blowdown_s": blowdown.as_ref().map(|b| b.s_values.clone()),
        "blowdown_distances": blowdown.as_ref().map(|b| b.distances.clone()),
    });
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    match format_or(cli, Format::Csv) {
        Format::Csv => {
            let mut header = vec!["t".to_string()];
            header.extend(pairs.iter().map(|(i, j)| format!("g{}{}", i + 1, j + 1)));
            header.push("t_rm".into());
            let rows: Vec<Vec<String>> = samples
                .iter()
                .map(|(t, gt, trm)| {
                    let mut r = vec![float(*t)];
                    r.extend(pairs.iter().map(|&(i, j)| float(gt[(i, j)])));
                    r.push(float(*trm));
                    r
                })
                .collect();
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            Ok(Outcome { body: to_csv(&h, &rows)?, notes: Some(to_json(&diagnostics)), passed: true })
        }
        Format::Json => {
            let traj_json: Vec<Value> = samples
                .iter()
                .map(|(t, gt, trm)| json!({ "t": t, "g": gt.row_vecs(), "t_rm": trm }))
                .collect();
            let body = json!({ "diagnostics": diagnostics, "trajectory": traj_json });
            Ok(Outcome { body: to_json(&body), notes: None, passed: true })
        }
    }
}

fn omega_for(s: &solitonlab::SolitonStructure, given: Option<f64>) -> Result<f64> {
    match given {
        Some(w) => Ok(w),
        None => Ok(resolvent::default_omega(s)?),
    }
}

pub fn resolvent(cli: &Cli, a: &ResolventArgs) -> Result<Outcome> {
    let s = lookup(&a.name, None, None)?.soliton;
    let grid = Grid::new(s.dim(), a.grid, a.box_radius).map_err(|e| usage(e.to_string()))?;
    let omega = omega_for(&s, a.omega)?;
    let cutoff = match a.cutoff {
        Some(k) => Some(CutoffData::for_soliton(&s, k, omega).map_err(|e| usage(e.to_string()))?),
        None => None,
    };
    let f = if a.f == "bump" {
        resolvent::default_bump(&s, &grid)
    } else {
        let text = std::fs::read_to_string(&a.f).with_context(|| format!("reading --f {}", a.f))?;
        let f: GridTensorField = serde_json::from_str(&text).map_err(|e| usage(format!("--f {}: {e}", a.f)))?;
        if f.grid != grid {
            return Err(usage(format!("--f {} lives on a different grid", a.f)));
        }
        f
    };
    let disc = Discretization::new(&s, &grid, cutoff.clone())?;
    let sol = resolvent::assemble_and_solve(
        &disc,
        Complex64::new(a.lambda, a.lambda_im),
        omega,
        &f,
        &GmresOptions::default(),
    )?;
    let r = &sol.report;
    // the H¹ bound needs Re λ + ω ≥ 1
    let u1_applies = a.lambda + omega >= 1.0;
    let passed = r.slack_u0 <= 0.05 && (!u1_applies || r.slack <= 0.05);
    let mut body = serde_json::to_value(r)?;
    body["name"] = json!(s.name);
    body["grid"] = json!(a.grid);
    body["box"] = json!(a.box_radius);
    body["cutoff"] = json!(cutoff);
    body["h1_bound_applies"] = json!(u1_applies);
    body["passed"] = json!(passed);
    match format_or(cli, Format::Json) {
        Format::Json => Ok(Outcome { body: to_json(&body), notes: None, passed }),
        Format::Csv => {
            let header = ["lambda_re", "lambda_im", "omega", "norm_f0", "norm_u0", "norm_u1", "bound_rhs", "slack", "slack_u0", "residual", "iterations"];
            let row = vec![
                float(r.lambda_re),
                float(r.lambda_im),
                float(r.omega),
                float(r.norm_f0),
                float(r.norm_u0),
                float(r.norm_u1),
                float(r.bound_rhs),
                float(r.slack),
                float(r.slack_u0),
                float(r.residual),
                r.iterations.to_string(),
            ];
            Ok(Outcome { body: to_csv(&header, &[row])?, notes: None, passed })
        }
    }
}

pub fn semigroup(cli: &Cli, a: &SemigroupArgs) -> Result<Outcome> {
    let s = lookup(&a.name, None, None)?.soliton;
    if !(a.dtau > 0.0) {
        return Err(usage("--dtau must be positive"));
    }
    let grid = Grid::new(s.dim(), a.grid, a.box_radius).map_err(|e| usage(e.to_string()))?;
    let omega = omega_for(&s, a.omega)?;
    let disc = Discretization::new(&s, &grid, None)?;
    let u0 = resolvent::default_bump(&s, &grid);
    let d = resolvent::semigroup_decay_check(&disc, &u0, a.dtau, a.steps, omega, &GmresOptions::default())?;
    let passed = d.max_factor <= 1.05 * d.bound_factor;
    match format_or(cli, Format::Csv) {
        Format::Csv => {
            let rows: Vec<Vec<String>> = d
                .norms
                .iter()
                .enumerate()
                .map(|(k, nrm)| {
                    let factor = if k == 0 { String::new() } else { float(d.factors[k - 1]) };
                    vec![k.to_string(), float(k as f64 * a.dtau), float(*nrm), factor]
                })
                .collect();
            let notes = format!(
                "max factor {:.6}, bound 1.05/(1+ωΔτ) = {:.6}, monotone {}\n",
                d.max_factor,
                1.05 * d.bound_factor,
                d.monotone
            );
            Ok(Outcome { body: to_csv(&["step", "tau", "norm0", "factor"], &rows)?, notes: Some(notes), passed })
        }
        Format::Json => {
            let mut body = serde_json::to_value(&d)?;
            body["name"] = json!(s.name);
            body["passed"] = json!(passed);
            Ok(Outcome { body: to_json(&body), notes: None, passed })
        }
    }
}

pub fn reproduce(cli: &Cli, a: &ReproduceArgs) -> Result<Outcome> {
    let ids = a.criteria.clone().unwrap_or_else(|| (1..=7).collect());
    if let Some(bad) = ids.iter().find(|i| !(1..=7).contains(*i)) {
        return Err(usage(format!("no criterion {bad}; choose from 1 to 7")));
    }
    for (flag, v) in [("resolvent", a.resolvent_grid), ("convergence", a.convergence_grid), ("semigroup", a.semigroup_grid)] {
        if v < 5 {
            return Err(usage(format!("--{flag}-grid must be at least 5")));
        }
    }
    let cfg = SuiteConfig {
        seed: cli.seed,
        resolvent_grid: a.resolvent_grid,
        convergence_grid: a.convergence_grid,
        semigroup_grid: a.semigroup_grid,
        ..SuiteConfig::default()
    };
    let report = suite::run_selected(&cfg, &ids);
    let mut table = String::new();
    for c in &report.criteria {
        let _ = writeln!(table, "{} criterion {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.title);
        for k in &c.checks {
            let tag = match (k.passed, k.gating) {
                (true, _) => "ok  ",
                (false, true) => "FAIL",
                (false, false) => "note",
            };
            let _ = writeln!(table, "    [{tag}] {}: {}", k.name, k.summary);
        }
    }
    let body = match format_or(cli, Format::Json) {
        Format::Json => to_json(&serde_json::to_value(&report)?),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .criteria
                .iter()
                .flat_map(|c| {
                    c.checks.iter().map(move |k| {
                        vec![
                            c.id.to_string(),
                            c.title.clone(),
                            k.name.clone(),
                            k.gating.to_string(),
                            k.passed.to_string(),
                            k.summary.clone(),
                        ]
                    })
                })
                .collect();
            to_csv(&["criterion", "title", "check", "gating", "passed", "summary"], &rows)?
        }
    };
    Ok(Outcome { body, notes: Some(table), passed: report.passed })
}
