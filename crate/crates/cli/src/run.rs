use crate::args::{Command, EventArg, Global, KindArg, MixingMode, Param, ScaleArg};
use finitary::clusters::histogram_csv;
use finitary::experiments::*;
use finitary::ising::IsingLevels;
use finitary::representation::{logit_half, LevelDistribution, Logistic};
use finitary::threshold::{corollary_interval_report, talagrand_report, EventSpec};
use finitary::{Error, ExperimentConfig, Rect};
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;

/// What one command produced, in both output forms.
pub struct Report {
    pub name: &'static str,
    pub result: Value,
    pub csv: String,
}

pub type CliResult<T> = Result<T, String>;

fn e(err: Error) -> String {
    err.to_string()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

pub fn load_config(global: &Global) -> CliResult<ExperimentConfig> {
    let mut cfg = match &global.config {
        Some(path) => read_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = &global.model {
        cfg.model = m.parse()?;
    }
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if let Some(r) = global.replicas {
        cfg.replicas = r;
    }
    if let Some(b) = global.beta {
        cfg.beta = b;
    }
    if let Some(t) = global.t_max {
        cfg.t_max = t;
    }
    if let Some(t) = global.threshold {
        cfg.majority_threshold = t;
    }
    if let Some(o) = &global.out {
        cfg.out_dir = Some(o.clone());
    }
    Ok(cfg)
}

fn read_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|err| format!("reading {}: {err}", path.display()))?;
    let is_toml = path.extension().is_some_and(|x| x.eq_ignore_ascii_case("toml"));
    if is_toml {
        toml::from_str(&text).map_err(|err| format!("{}: {err}", path.display()))
    } else {
        serde_json::from_str(&text).map_err(|err| format!("{}: {err}", path.display()))
    }
}

fn param(p: &Param, cfg: &ExperimentConfig) -> CliResult<f64> {
    match (p.h, p.p) {
        (Some(h), _) => Ok(h),
        (None, Some(p)) if p > 0.0 && p < 1.0 => Ok(logit_half(p)),
        (None, Some(p)) => Err(format!("p = {p} outside (0, 1)")),
        (None, None) => Ok(cfg.h_grid[0]),
    }
}

fn size(n: Option<u32>, cfg: &ExperimentConfig) -> u32 {
    n.unwrap_or(cfg.sizes[0])
}

fn event(e: EventArg) -> CrossingEvent {
    match e {
        EventArg::H => CrossingEvent::H,
        EventArg::V => CrossingEvent::V,
        EventArg::HStar => CrossingEvent::H_STAR,
    }
}

fn scale(s: Option<ScaleArg>, model: &Model) -> Scale {
    match s {
        Some(ScaleArg::H) => Scale::H,
        Some(ScaleArg::P) => Scale::P,
        None if matches!(model, Model::Bernoulli) => Scale::P,
        None => Scale::H,
    }
}

fn pair<T: Copy>(v: &[T], what: &str) -> CliResult<(T, T)> {
    match v {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("{what} takes exactly two comma-separated values")),
    }
}

fn bracket(b: &Option<Vec<f64>>) -> CliResult<Option<(f64, f64)>> {
    b.as_deref().map(|v| pair(v, "--bracket")).transpose()
}

fn require_beta(model: &Model, what: &str) -> CliResult<f64> {
    model.beta().ok_or_else(|| format!("{what} needs --model ising"))
}

pub fn run(command: &Command, cfg: &ExperimentConfig) -> CliResult<Report> {
    let model = cfg.build_model().map_err(e)?;
    let reps = cfg.replicas;
    let seed = cfg.seed;
    match command {
        Command::Crossing { n, m, event: ev, h_grid, param: p } => {
            let n = size(*n, cfg);
            let rect = Rect::box_nm(n, m.unwrap_or(n));
            let grid = match (h_grid, p.h.is_some() || p.p.is_some()) {
                (Some(g), _) => g.clone(),
                (None, true) => vec![param(p, cfg)?],
                (None, false) => cfg.h_grid.clone(),
            };
            let curve = crossing_curve(&model, rect, event(*ev), &grid, reps, seed).map_err(e)?;
            Ok(Report { name: "crossing", csv: rows_csv(&curve.rows), result: to_value(&curve) })
        }
        Command::Critical { n, event: ev, target, tol, bracket: b, scale: s } => {
            let est = estimate_critical(&model, size(*n, cfg), event(*ev), *target, *tol, reps, seed, bracket(b)?, scale(*s, &model))
                .map_err(e)?;
            Ok(Report { name: "critical", csv: rows_csv(&est.probes), result: to_value(&est) })
        }
        Command::Matching { n, tol, bracket: b, scale: s } => {
            let r = matching_relation_check(&model, size(*n, cfg), *tol, reps, seed, bracket(b)?, scale(*s, &model)).map_err(e)?;
            let rows: Vec<EstimateRow> = r.ordinary.probes.iter().chain(&r.star.probes).cloned().collect();
            Ok(Report { name: "matching", csv: rows_csv(&rows), result: to_value(&r) })
        }
        Command::Fsc { big_n, eps, param: p, window, tail_replicas } => {
            let tail = TailOptions { window_half: *window, replicas: *tail_replicas, ..TailOptions::default() };
            let r = finite_size_check(&model, param(p, cfg)?, *big_n, *eps, reps, seed, tail).map_err(e)?;
            Ok(Report { name: "fsc", csv: rows_csv(std::slice::from_ref(&r.crossing)), result: to_value(&r) })
        }
        Command::Tail { param: p, window, fit, kind } => {
            let kind = match kind {
                KindArg::Plus => ClusterKind::PlusOrdinary,
                KindArg::MinusStar => ClusterKind::MinusStar,
            };
            let r = cluster_tail_experiment(&model, param(p, cfg)?, *window, reps, pair(fit, "--fit")?, seed, &[kind]).map_err(e)?;
            Ok(Report { name: "tail", csv: histogram_csv(&r.sides[0].hist), result: to_value(&r) })
        }
        Command::Tau { param: p, fit } => {
            let beta = require_beta(&model, "tau")?;
            let range = fit.as_deref().map(|v| pair(v, "--fit")).transpose()?;
            let r = tau_tail(beta, param(p, cfg)?, reps, seed, cfg.t_max, range).map_err(e)?;
            Ok(Report { name: "tau", csv: histogram_csv(&r.hist), result: to_value(&r) })
        }
        Command::Rsw { param: p, rhos, ns } => {
            let ns = ns.clone().unwrap_or_else(|| cfg.sizes.clone());
            let r = rsw_scan(&model, param(p, cfg)?, rhos, &ns, reps, seed).map_err(e)?;
            let mut csv = String::from("rho,n,width,estimate,std_error\n");
            for row in &r.rows {
                let _ = writeln!(csv, "{},{},{},{},{}", row.rho, row.n, row.width, row.estimate, row.std_error);
            }
            Ok(Report { name: "rsw", csv, result: to_value(&r) })
        }
        Command::Influence { n, param: p, step, depth } => {
            let n = size(*n, cfg);
            let sample = IndexSample::default_for(&model, &Rect::box_nm(3 * n, n), *step, *depth);
            let r = influence_scan(&model, n, param(p, cfg)?, &sample, reps, seed).map_err(e)?;
            let mut csv = String::from("index,estimate,std_error\n");
            for row in &r.rows {
                let _ = writeln!(csv, "\"{}\",{},{}", row.index, row.estimate, row.std_error);
            }
            Ok(Report { name: "influence", csv, result: to_value(&r) })
        }
        Command::Dlr { param: p, window } => {
            let beta = require_beta(&model, "dlr")?;
            let r = dlr_check(beta, param(p, cfg)?, Rect::centered(*window), reps, seed, cfg.t_max).map_err(e)?;
            let mut csv = String::from("m,occurrences,plus,expected,empirical,z\n");
            for b in &r.bins {
                let z = b.z.map(|z| z.to_string()).unwrap_or_default();
                let _ = writeln!(csv, "{},{},{},{},{},{z}", b.m, b.occurrences, b.plus, b.expected, b.empirical);
            }
            Ok(Report { name: "dlr", csv, result: to_value(&r) })
        }
        Command::Mixing { mode: MixingMode::Boundary { param: p, ns } } => {
            let beta = require_beta(&model, "mixing boundary")?;
            let rows = mixing_boundary(beta, param(p, cfg)?, ns, reps, seed, cfg.t_max).map_err(e)?;
            let mut csv = String::from("n,delta,std_error,ci_lo,ci_hi,replicas,order_violations\n");
            for r in &rows {
                let _ = writeln!(csv, "{},{},{},{},{},{},{}", r.n, r.delta, r.std_error, r.ci.0, r.ci.1, r.replicas, r.order_violations);
            }
            Ok(Report { name: "mixing", csv, result: to_value(&rows) })
        }
        Command::Mixing { mode: MixingMode::Pair { param: p, size, distances } } => {
            let rows = mixing_event_pair(&model, param(p, cfg)?, *size, distances, reps, seed).map_err(e)?;
            let mut csv = String::from("distance,p_a,p_b,covariance,std_error,compared\n");
            for r in &rows {
                let _ = writeln!(csv, "{},{},{},{},{},{}", r.distance, r.p_a, r.p_b, r.covariance, r.std_error, r.compared);
            }
            Ok(Report { name: "mixing", csv, result: to_value(&rows) })
        }
        Command::Threshold { event: name, event_file, param: p, h2 } => {
            let spec = match (name, event_file) {
                (_, Some(path)) => EventSpec::from_json_file(path).map_err(e)?,
                (Some(name), None) => EventSpec::builtin(name).map_err(e)?,
                (None, None) => return Err("threshold needs --event or --event-file".into()),
            };
            let ising;
            let family: &dyn LevelDistribution = match spec.k {
                1 => &Logistic,
                5 => {
                    ising = IsingLevels::new(cfg.beta).map_err(e)?;
                    &ising
                }
                k => {
                    return Err(format!("event {} has k = {k}; shipped level families have k = 1 (Bernoulli) or k = 5 (Ising)", spec.name))
                }
            };
            let h = param(p, cfg)?;
            let report = talagrand_report(&spec, family, h).map_err(e)?;
            let interval = h2.map(|h2| corollary_interval_report(&spec, family, h, h2)).transpose().map_err(e)?;
            let mut csv = String::from("coordinate,pivotal\n");
            for (i, x) in report.pivotal.iter().enumerate() {
                let _ = writeln!(csv, "{i},{x}");
            }
            Ok(Report { name: "threshold", csv, result: json!({ "report": report, "interval": interval }) })
        }
        Command::Audit { n, param: p } => {
            let n = size(*n, cfg);
            let r = duality_audit_run(&model, Rect::box_nm(n, n), param(p, cfg)?, reps, seed).map_err(e)?;
            let csv = format!("fields,violations,horizontal_plus\n{},{},{}\n", r.fields, r.violations, r.horizontal_plus);
            Ok(Report { name: "audit", csv, result: to_value(&r) })
        }
    }
}

pub fn summary(report: &Report, cfg: &ExperimentConfig) -> Value {
    json!({
        "command": report.name,
        "version": env!("FINITARY_GIT_DESCRIBE"),
        "config": cfg,
        "result": report.result,
    })
}
