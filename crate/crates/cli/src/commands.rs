use std::collections::BTreeSet;
use std::path::Path;

use anyhow::Result;
use kitinet_core::condense::{condensation_score, export_heatmap, layer_condensation};
use kitinet_core::csv::{fmt_f64, CsvBuf};
use kitinet_core::dsmc::{
    dsmc_step, init_gas, maxwell_reference, speed_histogram, temperature, timeseries_header, timeseries_row,
};
use kitinet_core::kinetic::check::run_suite;
use kitinet_core::net::{make_sine_dataset, train, NetworkSpec, ParameterSet, TrainConfig, TrainingRun};
use kitinet_core::{Error, RNG_FAMILY};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::output::RunDir;

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Failure,
}

pub fn kernel_check(cfg: &ExperimentConfig, out: &Path) -> Result<Status> {
    let mut dir = RunDir::create(out, cfg)?;
    let k = &cfg.kiti;
    let results = run_suite(&k.operator(), k.check_features, k.check_trials);
    let mut csv = CsvBuf::with_header(&["check_name", "metric", "tolerance", "pass"]);
    for r in &results {
        csv.row([r.name.to_string(), fmt_f64(r.metric), fmt_f64(r.tolerance), r.pass.to_string()]);
        log::info!("{:<18} metric {:e} tolerance {:e} {}", r.name, r.metric, r.tolerance, if r.pass { "ok" } else { "FAILED" });
    }
    dir.write("checks.csv", csv.as_str())?;
    dir.finish()?;
    match results.iter().find(|r| !r.pass) {
        Some(r) => {
            eprintln!("check failed: {} (metric {:e}, tolerance {:e})", r.name, r.metric, r.tolerance);
            Ok(Status::Failure)
        }
        None => Ok(Status::Success),
    }
}

pub fn dsmc(cfg: &ExperimentConfig, out: &Path) -> Result<Status> {
    let mut dir = RunDir::create(out, cfg)?;
    let d = &cfg.dsmc;
    let gas_cfg = d.gas();
    let mut gas = init_gas(&gas_cfg)?;

    let mut header = timeseries_header(gas.dim);
    header.extend(["candidates".to_string(), "collisions".to_string()]);
    let cols: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut series = CsvBuf::with_header(&cols);
    let (mut candidates, mut collisions) = (0usize, 0usize);
    for s in 1..=d.steps {
        let stats = dsmc_step(&mut gas, &gas_cfg);
        candidates += stats.candidates;
        collisions += stats.accepted;
        if s % d.record_every == 0 {
            let mut row = timeseries_row(&gas, d.bins, d.max_speed)?;
            row.extend([candidates.to_string(), collisions.to_string()]);
            series.row(row);
            candidates = 0;
            collisions = 0;
        }
    }
    dir.write("timeseries.csv", series.as_str())?;

    let hist = speed_histogram(&gas, d.bins, Some(d.max_speed))?;
    let reference = maxwell_reference(temperature(&gas), gas.dim, &hist.edges);
    let mut csv = CsvBuf::with_header(&["bin_lo", "bin_hi", "density", "maxwell_density"]);
    for ((w, h), r) in hist.edges.windows(2).zip(&hist.densities).zip(&reference) {
        csv.row([fmt_f64(w[0]), fmt_f64(w[1]), fmt_f64(*h), fmt_f64(*r)]);
    }
    dir.write("histogram.csv", csv.as_str())?;
    log::info!("dsmc: {} steps, final temperature {}", d.steps, temperature(&gas));
    dir.finish()?;
    Ok(Status::Success)
}

fn scores_at(params: &ParameterSet, layers: &[usize], epoch: usize, threshold: f64) -> Result<Vec<f64>> {
    layers
        .iter()
        .map(|&l| Ok(condensation_score(&layer_condensation(&params.layers[l], l, epoch), threshold)?))
        .collect()
}

fn run_training(spec: &NetworkSpec, trainer: &TrainConfig, cfg: &ExperimentConfig) -> kitinet_core::Result<TrainingRun> {
    let data = make_sine_dataset(cfg.train.dataset_size, cfg.train.dataset_seed)?;
    train(spec, trainer, &data)
}

pub fn train_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<Status> {
    let mut dir = RunDir::create(out, cfg)?;
    let run = match run_training(&cfg.network, &cfg.train.trainer(), cfg) {
        Ok(r) => r,
        Err(e @ Error::DivergenceDetected { .. }) => {
            eprintln!("{e}");
            dir.write("DIVERGED", &format!("{e}\n"))?;
            return Ok(Status::Failure);
        }
        Err(e) => return Err(e.into()),
    };

    let mut loss = CsvBuf::with_header(&["epoch", "train_mse"]);
    for (e, l) in run.losses.iter().enumerate() {
        loss.row([(e + 1).to_string(), fmt_f64(*l)]);
    }
    dir.write("loss.csv", loss.as_str())?;

    let threshold = cfg.train.threshold;
    let mut scores = CsvBuf::with_header(&["epoch", "layer", "threshold", "score"]);
    scores.comment(&format!("features=incoming weight rows, bias excluded; score uses |cosine|; rng={RNG_FAMILY}"));
    for snap in &run.snapshots {
        dir.write(&format!("snapshot_epoch{}.csv", snap.epoch), &snap.params.to_snapshot_csv(snap.epoch))?;
        for &l in &cfg.train.analyzed_layers {
            let m = layer_condensation(&snap.params.layers[l], l, snap.epoch);
            dir.write(&format!("heatmap_layer{l}_epoch{}.csv", snap.epoch), &export_heatmap(&m))?;
            let s = condensation_score(&m, threshold)?;
            scores.row([snap.epoch.to_string(), l.to_string(), fmt_f64(threshold), fmt_f64(s)]);
        }
    }
    dir.write("scores.csv", scores.as_str())?;
    log::info!(
        "train: {} epochs, loss {} -> {}",
        run.losses.len(),
        run.losses.first().copied().unwrap_or(f64::NAN),
        run.losses.last().copied().unwrap_or(f64::NAN)
    );
    dir.finish()?;
    Ok(Status::Success)
}

/// Removes repeated values, keeping first occurrences, with a warning.
fn dedup<T: Copy, K: Ord>(values: &[T], key: impl Fn(&T) -> K, what: &str) -> Vec<T> {
    let mut seen = BTreeSet::new();
    let kept: Vec<T> = values.iter().copied().filter(|v| seen.insert(key(v))).collect();
    if kept.len() != values.len() {
        log::warn!("sweep: dropped {} duplicate {what} value(s)", values.len() - kept.len());
    }
    kept
}

struct SweepRow {
    n_divide: usize,
    coll_coef: f64,
    seed: u64,
    outcome: kitinet_core::Result<(f64, Vec<f64>)>,
}

pub fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Status> {
    let mut dir = RunDir::create(out, cfg)?;
    let width = cfg.network.hidden_dim;
    let n_divide: Vec<usize> = dedup(&cfg.sweep.n_divide, |n| *n, "n_divide")
        .into_iter()
        .filter(|&n| {
            let ok = width % n == 0;
            if !ok {
                log::warn!("sweep: skipping n_divide = {n}, it does not divide hidden width {width}");
            }
            ok
        })
        .collect();
    let coll_coef = dedup(&cfg.sweep.coll_coef, |c| c.to_bits(), "coll_coef");
    let seeds = dedup(&cfg.sweep.seeds, |s| *s, "seed");

    let mut points = Vec::new();
    for &n in &n_divide {
        for &c in &coll_coef {
            for &s in &seeds {
                points.push((n, c, s));
            }
        }
    }
    let layers = &cfg.train.analyzed_layers;
    let mut rows: Vec<SweepRow> = points
        .into_par_iter()
        .map(|(n, c, seed)| {
            let mut spec = cfg.network.clone();
            spec.kiti_layers = cfg.sweep.kiti_layers.clone();
            spec.kiti.n_divide = n;
            spec.kiti.coll_coef = c;
            spec.kiti.seed = seed;
            let trainer = TrainConfig { seed, ..cfg.train.trainer() };
            let outcome = run_training(&spec, &trainer, cfg).map(|run| {
                let mse = run.losses.last().copied().unwrap_or(f64::NAN);
                let scores = scores_at(&run.final_params, layers, trainer.epochs, cfg.train.threshold)
                    .expect("threshold validated");
                (mse, scores)
            });
            SweepRow { n_divide: n, coll_coef: c, seed, outcome }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.n_divide
            .cmp(&b.n_divide)
            .then(a.coll_coef.total_cmp(&b.coll_coef))
            .then(a.seed.cmp(&b.seed))
    });

    let mut header = vec!["n_divide".to_string(), "coll_coef".into(), "seed".into(), "status".into(), "final_mse".into()];
    header.extend(layers.iter().map(|l| format!("score_layer{l}")));
    let cols: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvBuf::with_header(&cols);
    let mut status = Status::Success;
    for r in &rows {
        let mut row = vec![r.n_divide.to_string(), fmt_f64(r.coll_coef), r.seed.to_string()];
        match &r.outcome {
            Ok((mse, scores)) => {
                row.extend(["ok".to_string(), fmt_f64(*mse)]);
                row.extend(scores.iter().map(|s| fmt_f64(*s)));
            }
            Err(Error::DivergenceDetected { .. }) => {
                row.extend(["diverged".to_string(), fmt_f64(f64::NAN)]);
                row.extend(layers.iter().map(|_| fmt_f64(f64::NAN)));
                status = Status::Failure;
            }
            Err(e) => return Err(anyhow::anyhow!("sweep point n_divide={} coll_coef={}: {e}", r.n_divide, r.coll_coef)),
        }
        csv.row(row);
    }
    dir.write("sweep.csv", csv.as_str())?;
    log::info!("sweep: {} grid points", rows.len());
    dir.finish()?;
    if status == Status::Failure {
        eprintln!("sweep: one or more grid points diverged");
    }
    Ok(status)
}
