//! Experiment plumbing: configs, dispatch, sweeps, result records and plots.
//!
//! [`run`] is pure: it computes a [`ResultRecord`] and touches no files.
//! [`execute`] runs inside a pool sized by `PERCTRUNC_THREADS` and writes the
//! JSON record and CSV rows the config asks for.

pub mod cli;
pub mod config;
mod plot;
mod record;

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::aniso::{
    choose_thm2_params, choose_thm3_params, choose_window, kesten_crossing, kw_connect_prob, kw_sweep, min_ell,
    probe_eta, thm2_coupling_runs, thm3_coupling_runs,
};
use crate::error::{Error, Result};
use crate::oriented::{estimate_survival, survival_sweep};
use crate::parallel;
use crate::renorm::{
    choose_block_params, estimate_exploration_survival, estimate_site_threshold, explore, prob_l, prob_s_exact,
    prob_t_exact, t_bound_chain, verify_coupling, CouplingReport, ORIENTED_SITE_THRESHOLD,
};
use crate::sampler::ConfigSeed;
use crate::sequences::{SumMode, DEFAULT_HORIZON};
use crate::stats::EstimateResult;

pub use config::{Axis, ExperimentConfig, Operation, SweepAxis};
pub use plot::{emit_plot, render_svg};
pub use record::{read_rows, write_rows, ResultRecord, RunMeta, SweepRow, SCHEMA_VERSION};

use record::{generator_version, unix_ms};

pub const DEFAULT_BOX: u64 = 8;
pub const DEFAULT_THM3_HEIGHT: u64 = 10;
pub const DEFAULT_THM3_HORIZON: u64 = 10_000;
pub const DEFAULT_SITE_LEVELS: u64 = 200;
pub const DEFAULT_ITERATIONS: u32 = 8;
/// Shifts and terms of the cross-sum probe used when `eta` is not given.
pub const PROBE_RANGE: u64 = 64;
pub const MAX_WINDOW: u64 = 256;

fn json<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Config(e.to_string()))
}

/// Validates and runs one experiment, or a sweep when the config names an axis.
pub fn run(config: &ExperimentConfig) -> Result<ResultRecord> {
    config.validate()?;
    let op = config.operation()?;
    let started = unix_ms();
    let clock = Instant::now();
    let (payload, rows) = match &config.sweep {
        Some(axis) => sweep_rows(config, op, axis)?,
        None => dispatch(config, op)?,
    };
    let meta = RunMeta {
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        wall_time_ms: clock.elapsed().as_millis(),
        threads: rayon::current_num_threads(),
    };
    Ok(ResultRecord::new(op.name(), config, payload, rows, meta))
}

/// [`run`] for configs that must carry a sweep axis.
pub fn sweep(config: &ExperimentConfig) -> Result<ResultRecord> {
    if config.sweep.is_none() {
        return Err(Error::Config("sweep needs an axis and values".into()));
    }
    run(config)
}

/// Runs under `PERCTRUNC_THREADS` and writes `out` (JSON) and `csv` when set.
pub fn execute(config: &ExperimentConfig) -> Result<ResultRecord> {
    let threads = parallel::threads_from_env()?;
    let record = parallel::with_threads(threads, || run(config))??;
    if let Some(path) = &config.out {
        record.write_json(path)?;
    }
    if let Some(path) = &config.csv {
        record.write_csv(path)?;
    }
    Ok(record)
}

type Output = (Value, Vec<SweepRow>);

fn dispatch(cfg: &ExperimentConfig, op: Operation) -> Result<Output> {
    let seed = cfg.seed();
    let trials = cfg.trials();
    match op {
        Operation::Analyze => Ok((analyze(cfg)?, vec![])),
        Operation::SimulateOriented => {
            let (k, h) = (cfg.need(cfg.cutoff, "K")?, cfg.need(cfg.height, "H")?);
            let r = estimate_survival(&cfg.sequence()?, k, h, cfg.d.unwrap_or(1), trials, seed)?;
            Ok((oriented_payload(cfg, k, h, &r), vec![SweepRow::new(k as f64, &r)]))
        }
        Operation::BlockParams => Ok((block_params(cfg)?, vec![])),
        Operation::Explore => {
            let eps = cfg.need(cfg.epsilon, "epsilon")?;
            let (payload, r) = explore_runs(cfg, eps)?;
            Ok((payload, vec![SweepRow::new(eps, &r)]))
        }
        Operation::AnisoThm2 => {
            let seq = cfg.sequence()?;
            let params = choose_thm2_params(
                &seq,
                cfg.need(cfg.shift, "N")?,
                cfg.need(cfg.epsilon, "epsilon")?,
                cfg.horizon.unwrap_or(DEFAULT_HORIZON),
            )?;
            let delta = cfg.need(cfg.delta, "delta")?;
            let summary = thm2_coupling_runs(&seq, delta, &params, cfg.box_size.unwrap_or(DEFAULT_BOX), trials, seed)?;
            Ok((json(&summary)?, vec![]))
        }
        Operation::AnisoThm3 => Ok((thm3(cfg)?, vec![])),
        Operation::Kw => {
            let big_l = cfg.need(cfg.span, "L")?;
            let l = cfg.need(cfg.l, "l")?;
            let r = kw_connect_prob(&cfg.sequence()?, l, big_l, trials, seed)?;
            let payload = json!({ "seq": cfg.seq, "l": l, "L": big_l, "result": r });
            Ok((payload, vec![SweepRow::new(big_l as f64, &r)]))
        }
        Operation::Kesten => {
            let (pv, ph, n) = (cfg.need(cfg.pv, "pv")?, cfg.need(cfg.ph, "ph")?, cfg.need(cfg.n, "n")?);
            let r = kesten_crossing(pv, ph, n, trials, seed)?;
            let payload = json!({ "pv": pv, "ph": ph, "n": n, "result": r });
            Ok((payload, vec![SweepRow::new(ph, &r)]))
        }
        Operation::SiteThreshold => {
            let levels = cfg.height.unwrap_or(DEFAULT_SITE_LEVELS);
            let iterations = cfg.iterations.unwrap_or(DEFAULT_ITERATIONS);
            let estimate = estimate_site_threshold(levels, trials, iterations, seed)?;
            let payload = json!({
                "levels": levels, "trials": trials, "iterations": iterations, "seed": seed,
                "estimate": estimate, "reference": ORIENTED_SITE_THRESHOLD,
            });
            Ok((payload, vec![]))
        }
    }
}

fn oriented_payload(cfg: &ExperimentConfig, k: u64, h: u64, r: &EstimateResult) -> Value {
    json!({
        "model": "oriented",
        "seq": cfg.seq,
        "K": k,
        "H": h,
        "d": cfg.d.unwrap_or(1),
        "trials": r.trials,
        "successes": r.successes,
        "estimate": r.estimate,
        "ci": r.ci,
        "seed": r.seed,
        "generator_version": generator_version(),
    })
}

fn analyze(cfg: &ExperimentConfig) -> Result<Value> {
    let seq = cfg.sequence()?;
    let horizon = cfg.horizon.unwrap_or(DEFAULT_HORIZON);
    let shifts: Vec<u64> = match cfg.shift {
        Some(n) => vec![n],
        None => vec![1, 2, 3],
    };
    let cross = shifts
        .iter()
        .map(|&n| Ok(json!({ "N": n, "sum": seq.partial_sum(SumMode::Cross(n), horizon)? })))
        .collect::<Result<Vec<_>>>()?;
    let gcd = seq.support_gcd(horizon);
    Ok(json!({
        "seq": cfg.seq,
        "horizon": horizon,
        "first_terms": (1..=10).map(|n| seq.p(n)).collect::<Vec<_>>(),
        "plain": seq.partial_sum(SumMode::Plain, horizon)?,
        "squares": seq.partial_sum(SumMode::Squares, horizon)?,
        "cross": cross,
        "support_min": seq.support_min(horizon),
        "support_gcd": gcd,
        // a finite-horizon gcd only certifies the full support when it is 1
        "gcd_certified": gcd == Some(1),
    }))
}

fn block_params(cfg: &ExperimentConfig) -> Result<Value> {
    let seq = cfg.sequence()?;
    let horizon = cfg.horizon.unwrap_or(DEFAULT_HORIZON);
    let bp = choose_block_params(&seq, cfg.need(cfg.epsilon, "epsilon")?, horizon)?;
    let prob_t = prob_t_exact(&seq, &bp)?;
    Ok(json!({
        "seq": cfg.seq,
        "epsilon": bp.epsilon,
        "k": bp.step,
        "M": bp.rounds,
        "K": bp.cutoff,
        "height": bp.height(),
        "prob_L": prob_l(&seq, horizon)?,
        "prob_S": prob_s_exact(&seq, bp.step, bp.cutoff)?,
        "prob_T": prob_t,
        "bound_chain": t_bound_chain(&bp, prob_t),
    }))
}

fn explore_runs(cfg: &ExperimentConfig, epsilon: f64) -> Result<(Value, EstimateResult)> {
    let seq = cfg.sequence()?;
    let (trials, seed) = (cfg.trials(), cfg.seed());
    let steps = cfg.steps.unwrap_or(config::DEFAULT_STEPS);
    let survival = estimate_exploration_survival(&seq, epsilon, trials, steps, seed)?;
    let mut payload = json!({ "seq": cfg.seq, "steps": steps, "survival": survival });
    if cfg.verify.unwrap_or(false) {
        let bp = survival.params;
        let runs = parallel::map_trials(trials, |t| {
            let key = ConfigSeed::new(seed, t);
            let state = explore(&seq, &bp, key, steps)?;
            let report = verify_coupling(&state, &seq, key, &bp)?;
            Ok((state.alive, state.accepted.len() as u64, report))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let mut totals = CouplingReport::default();
        for (_, _, r) in &runs {
            totals.footprint_checks += r.footprint_checks;
            totals.footprint_overlaps += r.footprint_overlaps;
            totals.path_checks += r.path_checks;
            totals.path_violations += r.path_violations;
            totals.ordering_violations += r.ordering_violations;
        }
        let alive = runs.iter().filter(|r| r.0).count() as u64;
        if alive != survival.estimate.successes {
            return Err(Error::Contract(format!(
                "recorded exploration survived {alive} times, unrecorded {}",
                survival.estimate.successes
            )));
        }
        payload["verify"] = json!({
            "report": totals,
            "violations": totals.violations(),
            "accepted_total": runs.iter().map(|r| r.1).sum::<u64>(),
        });
    }
    Ok((payload, survival.estimate))
}

fn thm3(cfg: &ExperimentConfig) -> Result<Value> {
    let seq = cfg.sequence()?;
    let (delta, epsilon) = (cfg.need(cfg.delta, "delta")?, cfg.need(cfg.epsilon, "epsilon")?);
    let horizon = cfg.horizon.unwrap_or(DEFAULT_THM3_HORIZON);
    let eta = match cfg.eta {
        Some(eta) => eta,
        None => probe_eta(&seq, PROBE_RANGE, PROBE_RANGE)?,
    };
    let window = match cfg.window {
        Some(w) => w,
        None => {
            let ell = min_ell(delta, eta, epsilon)?;
            choose_window(&seq, ell, 1.0 - epsilon / 3.0, 2000, cfg.seed(), MAX_WINDOW.max(4 * ell))?
        }
    };
    let params = choose_thm3_params(&seq, delta, epsilon, eta, window, horizon)?;
    let height = cfg.height.unwrap_or(DEFAULT_THM3_HEIGHT);
    let summary = thm3_coupling_runs(&seq, &params, height, cfg.trials(), cfg.seed())?;
    Ok(json!({
        "seq": cfg.seq,
        "eta_probed": cfg.eta.is_none(),
        "window_chosen": cfg.window.is_none(),
        "summary": summary,
    }))
}

fn integral(values: &[f64]) -> Vec<u64> {
    values.iter().map(|&v| v as u64).collect()
}

fn sweep_rows(cfg: &ExperimentConfig, op: Operation, axis: &SweepAxis) -> Result<Output> {
    let seed = cfg.seed();
    let trials = cfg.trials();
    let values = &axis.values;
    let mut payload = json!({
        "operation": op.name(),
        "axis": axis.param.name(),
        "values": values,
        "seq": cfg.seq,
        "trials": trials,
        "seed": seed,
        "generator_version": generator_version(),
    });
    let rows = match axis.param {
        Axis::K => {
            let ks = integral(values);
            let h = cfg.need(cfg.height, "H")?;
            let d = cfg.d.unwrap_or(1);
            let s = survival_sweep(&cfg.sequence()?, &ks, h, d, trials, seed)?;
            payload["H"] = json!(h);
            payload["d"] = json!(d);
            payload["monotonicity_violations"] = json!(s.monotonicity_violations);
            ks.iter().zip(&s.rows).map(|(&k, r)| SweepRow::new(k as f64, r)).collect()
        }
        Axis::H => {
            let seq = cfg.sequence()?;
            let k = cfg.need(cfg.cutoff, "K")?;
            let d = cfg.d.unwrap_or(1);
            payload["K"] = json!(k);
            payload["d"] = json!(d);
            integral(values)
                .into_iter()
                .map(|h| Ok(SweepRow::new(h as f64, &estimate_survival(&seq, k, h, d, trials, seed)?)))
                .collect::<Result<_>>()?
        }
        Axis::L => {
            let l = cfg.need(cfg.l, "l")?;
            let ls = integral(values);
            let s = kw_sweep(&cfg.sequence()?, l, &ls, trials, seed)?;
            payload["l"] = json!(l);
            payload["monotonicity_violations"] = json!(s.monotonicity_violations);
            ls.iter().zip(&s.rows).map(|(&big, r)| SweepRow::new(big as f64, r)).collect()
        }
        Axis::Ph => {
            let (pv, n) = (cfg.need(cfg.pv, "pv")?, cfg.need(cfg.n, "n")?);
            payload["pv"] = json!(pv);
            payload["n"] = json!(n);
            values
                .iter()
                .map(|&ph| Ok(SweepRow::new(ph, &kesten_crossing(pv, ph, n, trials, seed)?)))
                .collect::<Result<_>>()?
        }
        Axis::Epsilon => {
            payload["steps"] = json!(cfg.steps.unwrap_or(config::DEFAULT_STEPS));
            let mut points = Vec::new();
            let mut rows = Vec::new();
            for &eps in values {
                let (p, r) = explore_runs(cfg, eps)?;
                points.push(p);
                rows.push(SweepRow::new(eps, &r));
            }
            payload["points"] = Value::Array(points);
            rows
        }
    };
    Ok((payload, rows))
}

/// Parses `"2,8,32"` into sweep values.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Config(format!("sweep value `{v}` is not a number"))))
        .collect()
}
