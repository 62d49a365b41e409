//! The `assess` and `simulate` drivers.
//!
//! Everything is computed in memory first; files are written only once the
//! run has succeeded, and removed again if writing fails part-way.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use xquant::protocol::{conventional_report, derive_cv_params, matched_method2_alphas, scv1, scv2, CvPlan, Method};
use xquant::seed::{derive_seed, rng_from_seed};
use xquant::simbench::{run_simulation, write_rmse_table, write_selection_freq, RmseEntry, Selector};
use xquant::{PredictorSet, ScoreReport, SimulationConfig, SimulationResult};

use crate::config::{Command, RunConfig, Source};
use crate::error::{CliError, Result};
use crate::ingest::{ingest_csv, IngestStats};

/// One output file, name relative to the output directory.
pub type OutputFile = (String, Vec<u8>);

/// Executes the run and writes its files, returning their paths.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let files = match config.command {
        Command::Assess => assess(config)?,
        Command::Simulate => simulate(config)?,
    };
    write_outputs(&config.out, &files)
}

fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<Vec<PathBuf>> {
    let io = |path: &Path, source| CliError::Io { path: path.to_path_buf(), source };
    let created = !dir.exists();
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let path = dir.join(name);
        if let Err(e) = std::fs::write(&path, bytes) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            if created {
                let _ = std::fs::remove_dir(dir);
            }
            return Err(io(&path, e));
        }
        written.push(path);
    }
    Ok(written)
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise");
    s.push('\n');
    s.into_bytes()
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum DataSource {
    Csv { path: String, zero_filter: bool, stats: IngestStats },
    Model { model: String, n: usize, seed: u64, zero_filter: bool, removed_zeros: usize },
}

#[derive(Serialize)]
struct AssessReport<'a> {
    data: &'a DataSource,
    n: usize,
    set: &'static str,
    seed: u64,
    #[serde(flatten)]
    report: &'a ScoreReport,
}

fn assess(config: &RunConfig) -> Result<Vec<OutputFile>> {
    let (sample, source) = match &config.source {
        Source::Input(path) => {
            let ingested = ingest_csv(path, config.zero_filter)?;
            let source = DataSource::Csv {
                path: path.display().to_string(),
                zero_filter: config.zero_filter,
                stats: ingested.stats,
            };
            (ingested.values, source)
        }
        Source::Models(models) => {
            let (label, model) = &models[0];
            let mut values = model.sample(config.n, &mut rng_from_seed(derive_seed(config.seed, 0)))?;
            let before = values.len();
            if config.zero_filter {
                values.retain(|&v| v != 0.0);
            }
            let source = DataSource::Model {
                model: label.clone(),
                n: config.n,
                seed: config.seed,
                zero_filter: config.zero_filter,
                removed_zeros: before - values.len(),
            };
            (values, source)
        }
    };
    let n = sample.len();
    let p0 = config.p0.resolve(n);
    let alphas2 = match &config.alphas2 {
        Some(a) => a.clone(),
        None => matched_method2_alphas(n, p0, &config.alphas)?,
    };
    let cv_seed = derive_seed(config.seed, 1);

    let mut files = Vec::new();
    let mut summary = String::new();
    writeln!(summary, "xquant assess").unwrap();
    match &source {
        DataSource::Csv { path, stats, .. } => writeln!(
            summary,
            "data: {path} ({} rows, {} kept, {} dropped, {} zeros removed)",
            stats.rows,
            stats.kept,
            stats.dropped(),
            stats.zeros
        ),
        DataSource::Model { model, seed, removed_zeros, .. } => {
            writeln!(summary, "data: {model}, n = {n}, seed {seed} ({removed_zeros} zeros removed)")
        }
    }
    .unwrap();
    writeln!(summary, "p0 = {p0} ({})", level_note(config, n)).unwrap();
    writeln!(summary, "alphas (method 1) = {:?}", config.alphas).unwrap();
    writeln!(summary, "alphas (method 2) = {alphas2:?}").unwrap();

    for &set in &config.sets {
        let specs = set.specs();
        writeln!(summary, "\nset {} ({} predictors)", set.name(), specs.len()).unwrap();
        writeln!(summary, "{:<6} {:>5}  {:<12} {:>14}", "method", "index", "label", "prediction").unwrap();
        for &method in &config.methods {
            let report = match method {
                Selector::Qs => conventional_report(&specs, p0, &sample)?,
                Selector::Scv1 => scv1(&specs, p0, &config.alphas, &sample, cv_seed)?,
                Selector::Scv2 => scv2(&specs, p0, &alphas2, &sample, cv_seed)?,
                Selector::Median | Selector::Random => unreachable!("rejected by config validation"),
            };
            let pick = report.selected_prediction();
            let fallback = if pick.fallback_used { "  (fallback to sample maximum)" } else { "" };
            writeln!(
                summary,
                "{:<6} {:>5}  {:<12} {:>14.6}{fallback}",
                method.name(),
                pick.spec.index,
                report.selected_label,
                pick.value
            )
            .unwrap();
            let doc = AssessReport { data: &source, n, set: set.name(), seed: config.seed, report: &report };
            files.push((format!("report_{}_{}.json", method.name(), set.name()), json(&doc)));
        }
    }
    files.push(("summary.txt".into(), summary.into_bytes()));
    Ok(files)
}

fn level_note(config: &RunConfig, n: usize) -> String {
    match config.p0 {
        crate::TargetLevel::Auto => format!("auto, 1 - 1/(2*{n})"),
        crate::TargetLevel::Fixed(_) => "fixed".into(),
    }
}

#[derive(Serialize)]
struct SimulationRun<'a> {
    model: &'a str,
    set: &'static str,
    true_quantile: f64,
    labels: &'a [String],
    rmse: &'a BTreeMap<Selector, f64>,
    modal_selection: BTreeMap<Selector, String>,
    selection_counts: &'a BTreeMap<Selector, Vec<usize>>,
}

#[derive(Serialize)]
struct SimulationReport<'a> {
    n: usize,
    p0: f64,
    replicates: usize,
    master_seed: u64,
    methods: &'a [Selector],
    alphas: &'a [f64],
    alphas_method2: Vec<f64>,
    plans: Vec<CvPlan>,
    runs: Vec<SimulationRun<'a>>,
}

fn simulate(config: &RunConfig) -> Result<Vec<OutputFile>> {
    let Source::Models(models) = &config.source else {
        return Err(CliError::Config("simulate needs --model".into()));
    };
    let p0 = config.p0.resolve(config.n);
    let alphas2 = match &config.alphas2 {
        Some(a) => a.clone(),
        None => matched_method2_alphas(config.n, p0, &config.alphas)?,
    };
    let mut plans = Vec::new();
    if config.methods.contains(&Selector::Scv1) {
        for &a in &config.alphas {
            plans.push(derive_cv_params(config.n, p0, a, Method::Method1)?);
        }
    }
    if config.methods.contains(&Selector::Scv2) {
        for &a in &alphas2 {
            plans.push(derive_cv_params(config.n, p0, a, Method::Method2)?);
        }
    }

    let mut results: Vec<(&str, PredictorSet, SimulationResult)> = Vec::new();
    for (label, model) in models {
        for &set in &config.sets {
            let sim = SimulationConfig {
                model: model.clone(),
                n: config.n,
                replicates: config.replicates,
                p0,
                alphas: config.alphas.clone(),
                alphas_method2: Some(alphas2.clone()),
                predictor_set: set,
                master_seed: config.seed,
                selectors: config.methods.clone(),
            };
            results.push((label, set, run_simulation(&sim)?));
        }
    }

    let entries: Vec<RmseEntry> = results
        .iter()
        .map(|(model, set, r)| RmseEntry { model: model.to_string(), set: *set, rmse: r.rmse.clone() })
        .collect();
    let mut rmse_csv = Vec::new();
    write_rmse_table(&mut rmse_csv, &entries)?;
    let freq: Vec<(&str, PredictorSet, &SimulationResult)> = results.iter().map(|(m, s, r)| (*m, *s, r)).collect();
    let mut freq_csv = Vec::new();
    write_selection_freq(&mut freq_csv, &freq)?;

    let mut summary = String::new();
    writeln!(summary, "xquant simulate").unwrap();
    writeln!(summary, "n = {}, replicates = {}, p0 = {p0}, master seed {}", config.n, config.replicates, config.seed)
        .unwrap();
    writeln!(summary, "alphas (method 1) = {:?}", config.alphas).unwrap();
    writeln!(summary, "alphas (method 2) = {alphas2:?}").unwrap();
    let mut runs = Vec::new();
    for (model, set, r) in &results {
        writeln!(summary, "\nmodel {model}, set {}, true quantile {:.6}", set.name(), r.true_quantile).unwrap();
        writeln!(summary, "{:<6} {:>14}  modal selection", "method", "rmse").unwrap();
        let mut modal = BTreeMap::new();
        for (sel, value) in &r.rmse {
            let mode = r.modal_selection(*sel).map(|i| r.labels[i].clone());
            writeln!(summary, "{:<6} {:>14.6}  {}", sel.name(), value, mode.as_deref().unwrap_or("-")).unwrap();
            if let Some(m) = mode {
                modal.insert(*sel, m);
            }
        }
        runs.push(SimulationRun {
            model,
            set: set.name(),
            true_quantile: r.true_quantile,
            labels: &r.labels,
            rmse: &r.rmse,
            modal_selection: modal,
            selection_counts: &r.selection_counts,
        });
    }
    let report = SimulationReport {
        n: config.n,
        p0,
        replicates: config.replicates,
        master_seed: config.seed,
        methods: &config.methods,
        alphas: &config.alphas,
        alphas_method2: alphas2.clone(),
        plans,
        runs,
    };

    Ok(vec![
        ("rmse_table.csv".into(), rmse_csv),
        ("selection_freq.csv".into(), freq_csv),
        ("simulation.json".into(), json(&report)),
        ("summary.txt".into(), summary.into_bytes()),
    ])
}
