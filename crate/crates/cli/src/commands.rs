use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use lpharmonic_core::battery::{run_criterion, table as battery_table, BatteryConfig, CRITERIA};
use lpharmonic_core::inequalities::{
    folner_profile, gerl_ratio_search, isoperimetric_check, mean_value_suite, sobolev_pd_check, sobolev_sd_check,
    z_example, InequalityReport, SetFamily, DEFAULT_CAUCHY_EPS,
};
use lpharmonic_core::sampling::trial_rng;
use lpharmonic_core::solver::{royden_decompose, solve_dirichlet};
use lpharmonic_core::spectral::{construct_harmonic, Backend};
use lpharmonic_core::{make_group, CayleyBall, GraphFunction, GroupSpec, SolverOptions};
use rand::Rng;
use serde_json::{json, Value};

use crate::config::{required, RunConfig};
use crate::output::{num, Artifacts, Table};

fn group(cfg: &RunConfig) -> Result<GroupSpec> {
    Ok(required(&cfg.group, "group")?.parse()?)
}

fn ball(cfg: &RunConfig) -> Result<Arc<CayleyBall>> {
    let spec = group(cfg)?;
    let radius = required(&cfg.radius, "radius")?;
    Ok(make_group(spec)?.build_ball(radius)?.into_shared())
}

fn solver_options(cfg: &RunConfig) -> Result<SolverOptions> {
    let mut o = SolverOptions::default();
    if let Some(t) = cfg.grad_tol {
        o.grad_tol = t;
    }
    if let Some(m) = cfg.max_iters {
        o.max_iters = m;
    }
    if let Some(e) = cfg.smoothing_eps {
        o.smoothing_eps = e;
    }
    o.seed = cfg.init_seed;
    o.validate()?;
    Ok(o)
}

const SOLVER_KEYS: [&str; 4] = ["grad_tol", "max_iters", "smoothing_eps", "init_seed"];

/// Values from `--input`, or seeded uniform `[-1, 1]` values.
fn input_values(cfg: &mut RunConfig, b: &CayleyBall) -> Result<Vec<f64>> {
    if let Some(path) = &cfg.input {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let doc: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let array = doc.get("values").unwrap_or(&doc);
        let values: Vec<f64> = serde_json::from_value(array.clone()).context("input must hold a `values` array")?;
        if values.len() != b.len() {
            bail!("input has {} values, ball has {} vertices", values.len(), b.len());
        }
        return Ok(values);
    }
    let seed = *cfg.seed.get_or_insert(1);
    let mut rng = trial_rng(seed, 0);
    Ok((0..b.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn labels(b: &CayleyBall) -> Vec<String> {
    b.elements().iter().map(|e| e.to_string()).collect()
}

pub fn ball_cmd(cfg: &mut RunConfig) -> Result<Artifacts> {
    cfg.restrict("ball", &["group", "radius"])?;
    let b = ball(cfg)?;
    let mut table = Table::new(vec!["index", "element", "distance", "interior"]);
    for (i, label) in labels(&b).into_iter().enumerate() {
        table.push(vec![i.to_string(), label, b.distance(i).to_string(), b.is_interior(i).to_string()]);
    }
    Ok(Artifacts { command: "ball", result: b.to_json(), table, pass: true, summary: None })
}

pub fn solve_cmd(cfg: &mut RunConfig) -> Result<Artifacts> {
    let mut keys = vec!["group", "radius", "p", "input", "seed"];
    keys.extend(SOLVER_KEYS);
    cfg.restrict("solve", &keys)?;
    let p = *cfg.p.get_or_insert(2.0);
    let b = ball(cfg)?;
    let values = input_values(cfg, &b)?;
    let bv: BTreeMap<usize, f64> = b.boundary().into_iter().map(|i| (i, values[i])).collect();
    let (h, report) = solve_dirichlet(&b, &bv, p, &solver_options(cfg)?)?;
    let mut table = Table::new(vec!["element", "h"]);
    for (label, v) in h.rows() {
        table.push(vec![label, num(v)]);
    }
    Ok(Artifacts {
        command: "solve",
        result: json!({ "h": h.values(), "report": report }),
        table,
        pass: true,
        summary: None,
    })
}

pub fn decompose_cmd(cfg: &mut RunConfig) -> Result<Artifacts> {
    let mut keys = vec!["group", "radius", "p", "input", "seed"];
    keys.extend(SOLVER_KEYS);
    cfg.restrict("decompose", &keys)?;
    let p = *cfg.p.get_or_insert(2.0);
    let b = ball(cfg)?;
    let f = GraphFunction::new(b.clone(), input_values(cfg, &b)?)?;
    let d = royden_decompose(&f, p, &solver_options(cfg)?)?;
    let mut table = Table::new(vec!["element", "f", "u", "h"]);
    for (i, label) in labels(&b).into_iter().enumerate() {
        table.push(vec![label, num(f.value(i)), num(d.u.value(i)), num(d.h.value(i))]);
    }
    Ok(Artifacts {
        command: "decompose",
        result: json!({ "u": d.u.values(), "h": d.h.values(), "report": d.report }),
        table,
        pass: true,
        summary: None,
    })
}

pub fn harmonic_cmd(cfg: &mut RunConfig) -> Result<Artifacts> {
    cfg.restrict("harmonic", &["group", "radius", "p", "removal_radius", "terms", "backend"])?;
    let p = *cfg.p.get_or_insert(2.0);
    let r = *cfg.removal_radius.get_or_insert(0);
    let backend = match cfg.backend.get_or_insert_with(|| "auto".into()).as_str() {
        "auto" => Backend::Auto,
        "explicit" => Backend::Explicit,
        "quotient" => Backend::Quotient,
        other => bail!("unknown backend '{other}' (auto, explicit, quotient)"),
    };
    let c = construct_harmonic(
        group(cfg)?,
        p,
        required(&cfg.radius, "radius")?,
        r,
        required(&cfg.terms, "terms")?,
        backend,
    )?;
    let mut table = Table::new(vec!["cell", "level", "multiplicity", "h", "h1"]);
    for i in 0..c.h.len() {
        table.push(vec![
            c.labels[i].clone(),
            c.levels[i].to_string(),
            num(c.multiplicities[i]),
            num(c.h[i]),
            num(c.h1[i]),
        ]);
    }
    let pass = c.report.residual_within_bound && c.report.support_matches;
    Ok(Artifacts { command: "harmonic", result: json!({ "report": c.report }), table, pass, summary: None })
}

pub fn folner_cmd(cfg: &mut RunConfig) -> Result<Artifacts> {
    cfg.restrict("folner", &["group", "kmax", "p"])?;
    let p = *cfg.p.get_or_insert(2.0);
    let records = folner_profile(group(cfg)?, required(&cfg.kmax, "kmax")?, p)?;
    let mut table = Table::new(vec![
        "k",
        "size",
        "boundary_size",
        "ratio",
        "folner_norm",
        "folner_energy",
        "literal_bound",
        "corrected_bound",
        "literal_holds",
        "corrected_holds",
    ]);
    for r in &records {
        table.push(vec![
            r.k.to_string(),
            r.size.to_string(),
            r.boundary_size.to_string(),
            num(r.ratio),
            num(r.folner_norm),
            num(r.folner_energy),
            num(r.literal_bound),
            num(r.corrected_bound),
            r.literal_holds.to_string(),
            r.corrected_holds.to_string(),
        ]);
    }
    let literal = records.iter().all(|r| r.literal_holds);
    let corrected = records.iter().all(|r| r.corrected_holds);
    Ok(Artifacts {
        command: "folner",
        result: json!({ "records": records, "literal_bound_holds": literal, "corrected_bound_holds": corrected }),
        table,
        pass: literal,
        summary: None,
    })
}

fn report_artifacts(command: &'static str, report: InequalityReport) -> Result<Artifacts> {
    let mut table = Table::new(vec!["candidate", "ratio"]);
    for s in &report.samples {
        table.push(vec![s.label.clone(), num(s.ratio)]);
    }
    let pass = report.pass;
    Ok(Artifacts { command, result: serde_json::to_value(report)?, table, pass, summary: None })
}

fn with_stability(
    cfg: &RunConfig,
    report: InequalityReport,
    rerun: impl Fn(&Arc<CayleyBall>) -> Result<InequalityReport>,
) -> Result<InequalityReport> {
    let mut report = report;
    if let Some(r) = cfg.compare_radius {
        let small = make_group(group(cfg)?)?.build_ball(r)?.into_shared();
        report = report.with_reference(&rerun(&small)?, cfg.stability_limit.unwrap_or(1.25));
    }
    if let Some(c) = cfg.ceiling {
        report = report.with_ceiling(c);
    }
    Ok(report)
}

pub fn gerl_cmd(cfg: &mut RunConfig) -> Result<Artifacts> {
    cfg.restrict("gerl", &["group", "radius", "p", "trials", "seed"])?;
    let p = *cfg.p.get_or_insert(2.0);
    let trials = *cfg.trials.get_or_insert(1000);
    let seed = *cfg.seed.get_or_insert(1);
    report_artifacts("gerl", gerl_ratio_search(&ball(cfg)?, p, trials, seed)?)
}

pub fn sobolev_cmd(cfg: &mut RunConfig) -> Result<Artifacts> {
    cfg.restrict(
        "sobolev",
        &["kind", "group", "radius", "p", "d", "trials", "seed", "compare_radius", "stability_limit", "ceiling"],
    )?;
    let trials = *cfg.trials.get_or_insert(1000);
    let seed = *cfg.seed.get_or_insert(1);
    let d = required(&cfg.d, "d")?;
    let b = ball(cfg)?;
    match cfg.kind.get_or_insert_with(|| "sd".into()).as_str() {
        "sd" => {
            if cfg.p.is_some() {
                bail!("'--p' applies to '--kind pd' only");
            }
            let run = |b: &Arc<CayleyBall>| Ok(sobolev_sd_check(b, d, trials, seed)?);
            let report = with_stability(cfg, run(&b)?, run)?;
            report_artifacts("sobolev", report)
        }
        "pd" => {
            let p = *cfg.p.get_or_insert(2.0);
            let run = |b: &Arc<CayleyBall>| Ok(sobolev_pd_check(b, p, d, trials, seed)?);
            let report = with_stability(cfg, run(&b)?, run)?;
            report_artifacts("sobolev", report)
        }
        other => bail!("unknown kind '{other}' (sd, pd)"),
    }
}

pub fn isoperimetric_cmd(cfg: &mut RunConfig) -> Result<Artifacts> {
    cfg.restrict("isoperimetric", &["group", "radius", "d", "family", "count", "seed", "ceiling"])?;
    let d = required(&cfg.d, "d")?;
    let family = match cfg.family.get_or_insert_with(|| "balls".into()).as_str() {
        "balls" => SetFamily::Balls,
        "boxes" => SetFamily::Boxes,
        "random" => SetFamily::RandomConnected {
            count: *cfg.count.get_or_insert(1000),
            seed: *cfg.seed.get_or_insert(1),
        },
        other => bail!("unknown family '{other}' (balls, boxes, random)"),
    };
    let mut report = isoperimetric_check(&ball(cfg)?, d, &family)?;
    if let Some(c) = cfg.ceiling {
        report = report.with_ceiling(c);
    }
    report_artifacts("isoperimetric", report)
}

pub fn meanvalue_cmd(cfg: &mut RunConfig) -> Result<Artifacts> {
    cfg.restrict("meanvalue", &["group", "radius", "t", "trials", "seed"])?;
    let ts = cfg.t.get_or_insert_with(|| vec![2.0, 2.5, 3.0]).clone();
    let trials = *cfg.trials.get_or_insert(1000);
    let seed = *cfg.seed.get_or_insert(1);
    let suite = mean_value_suite(&ball(cfg)?, &ts, trials, seed)?;
    let mut table = Table::new(vec!["group", "radius", "trials", "checks", "violations", "worst_ratio"]);
    table.push(vec![
        suite.group.clone(),
        suite.radius.to_string(),
        suite.trials.to_string(),
        suite.checks.to_string(),
        suite.violations.to_string(),
        num(suite.worst_ratio),
    ]);
    let pass = suite.pass;
    Ok(Artifacts { command: "meanvalue", result: serde_json::to_value(suite)?, table, pass, summary: None })
}

pub fn zexample_cmd(cfg: &mut RunConfig) -> Result<Artifacts> {
    cfg.restrict("zexample", &["p", "pprime", "n", "eps"])?;
    let p = *cfg.p.get_or_insert(2.0);
    let pprime = *cfg.pprime.get_or_insert(3.0);
    let n = *cfg.n.get_or_insert(1_000_000);
    let eps = *cfg.eps.get_or_insert(DEFAULT_CAUCHY_EPS);
    let r = z_example(p, pprime, n, eps)?;
    let mut table = Table::new(vec![
        "n",
        "lp_partial",
        "lp_half_gain",
        "lpprime_partial",
        "lpprime_tail_ratio",
        "difference_sum",
        "comparison_sum",
        "limit",
        "in_dp",
    ]);
    table.push(vec![
        r.n.to_string(),
        num(r.lp_partial),
        num(r.lp_half_gain),
        num(r.lpprime_partial),
        num(r.lpprime_tail_ratio),
        num(r.difference_sum),
        num(r.comparison_sum),
        num(r.limit),
        r.in_dp.to_string(),
    ]);
    let pass = r.pass;
    Ok(Artifacts { command: "zexample", result: serde_json::to_value(r)?, table, pass, summary: None })
}

pub fn reproduce_all_cmd(cfg: &mut RunConfig) -> Result<Artifacts> {
    cfg.restrict("reproduce-all", &["seed", "grad_tol", "only"])?;
    let mut battery = BatteryConfig::default();
    battery.seed = *cfg.seed.get_or_insert(battery.seed);
    if let Some(t) = cfg.grad_tol {
        if !(t > 0.0 && t.is_finite()) {
            bail!("grad_tol must be positive");
        }
        battery.grad_tol = Some(t);
    }
    let ids = cfg.only.clone().unwrap_or_else(|| (1..=CRITERIA).collect());
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > CRITERIA) {
        bail!("no criterion {bad} (1..={CRITERIA})");
    }
    let results: Vec<_> = ids
        .iter()
        .map(|&id| {
            let r = run_criterion(id, &battery);
            eprintln!("{}", r.line());
            r
        })
        .collect();
    let mut table = Table::new(vec!["criterion", "title", "pass", "detail"]);
    for r in &results {
        table.push(vec![r.id.to_string(), r.title.to_string(), r.pass.to_string(), r.detail.clone()]);
    }
    let passed = results.iter().filter(|r| r.pass).count();
    Ok(Artifacts {
        command: "reproduce-all",
        result: json!({ "criteria": results, "passed": passed, "total": results.len() }),
        table,
        pass: passed == results.len(),
        summary: Some(battery_table(&results)),
    })
}
