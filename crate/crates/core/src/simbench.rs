//! Monte Carlo comparison of the three selectors.
//!
//! Each replicate draws a sample, lets the conventional score and the two
//! cross-validated scores pick a predictor, and records the picked
//! predictor's full-sample prediction at `p0`. The RMSE against the true
//! quantile is then reported per selector, next to two naive baselines
//! (median and uniformly random prediction).

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::DataModel;
use crate::error::{Error, Result};
use crate::estimators::{Prediction, PredictorKind, PredictorSet, PredictorSpec};
use crate::protocol::{
    cross_validated_scores, derive_cv_params, full_sample_predictions, matched_method2_alphas, Method,
};
use crate::scoring::conventional_assess;
use crate::seed::{derive_seed, rng_from_seed};

/// Anything that turns a replicate into one prediction of the `p0`-quantile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    Qs,
    Scv1,
    Scv2,
    Median,
    Random,
}

impl Selector {
    pub const ALL: [Selector; 5] = [Selector::Qs, Selector::Scv1, Selector::Scv2, Selector::Median, Selector::Random];

    pub fn name(self) -> &'static str {
        match self {
            Selector::Qs => "qs",
            Selector::Scv1 => "scv1",
            Selector::Scv2 => "scv2",
            Selector::Median => "median",
            Selector::Random => "random",
        }
    }

    /// Whether the selector picks a member of the predictor set.
    pub fn selects(self) -> bool {
        matches!(self, Selector::Qs | Selector::Scv1 | Selector::Scv2)
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Selector::ALL
            .into_iter()
            .find(|sel| sel.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub model: DataModel,
    pub n: usize,
    pub replicates: usize,
    pub p0: f64,
    /// Tuning values for Method 1.
    pub alphas: Vec<f64>,
    /// Tuning values for Method 2; `None` derives the ones matching the
    /// Method-1 fold counts.
    pub alphas_method2: Option<Vec<f64>>,
    pub predictor_set: PredictorSet,
    pub master_seed: u64,
    pub selectors: Vec<Selector>,
}

impl SimulationConfig {
    /// `n` observations, `p0 = 1 - 1/(2n)`, `alpha = (1, 2, 4, 8)`, all selectors.
    pub fn standard(model: DataModel, n: usize, replicates: usize, predictor_set: PredictorSet, seed: u64) -> Self {
        Self {
            model,
            n,
            replicates,
            p0: 1.0 - 1.0 / (2.0 * n as f64),
            alphas: vec![1.0, 2.0, 4.0, 8.0],
            alphas_method2: None,
            predictor_set,
            master_seed: seed,
            selectors: Selector::ALL.to_vec(),
        }
    }

    pub fn method2_alphas(&self) -> Result<Vec<f64>> {
        match &self.alphas_method2 {
            Some(a) => Ok(a.clone()),
            None => matched_method2_alphas(self.n, self.p0, &self.alphas),
        }
    }

    fn wants(&self, sel: Selector) -> bool {
        self.selectors.contains(&sel)
    }

    /// Checks every plan and that each predictor fits the smallest training set.
    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Domain("need at least one replicate".into()));
        }
        if self.selectors.is_empty() {
            return Err(Error::Domain("no selectors requested".into()));
        }
        let mut smallest = self.n;
        let mut check = |method: Method, alphas: &[f64]| -> Result<()> {
            if alphas.is_empty() {
                return Err(Error::Domain(format!("no alphas for {method:?}")));
            }
            for &a in alphas {
                let plan = derive_cv_params(self.n, self.p0, a, method)?;
                let train = match method {
                    Method::Method1 => self.n / plan.k,
                    Method::Method2 => self.n - self.n.div_ceil(plan.k),
                };
                smallest = smallest.min(train);
            }
            Ok(())
        };
        if self.wants(Selector::Scv1) {
            check(Method::Method1, &self.alphas)?;
        }
        if self.wants(Selector::Scv2) {
            check(Method::Method2, &self.method2_alphas()?)?;
        }
        for spec in self.predictor_set.specs() {
            if let PredictorKind::GpdUpperOrderCount(m) = spec.kind {
                if m >= smallest {
                    return Err(Error::SpecInfeasible { spec: spec.label(), n_train: smallest });
                }
            }
        }
        Ok(())
    }
}

/// What one selector produced in one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pick {
    pub selector: Selector,
    /// Position in the predictor set; `None` for the median baseline.
    pub selected: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub seed: u64,
    pub picks: Vec<Pick>,
}

impl ReplicateRecord {
    pub fn pick(&self, selector: Selector) -> Option<&Pick> {
        self.picks.iter().find(|p| p.selector == selector)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub true_quantile: f64,
    pub labels: Vec<String>,
    pub rmse: BTreeMap<Selector, f64>,
    /// Histogram over predictor positions, for the selectors that pick one.
    pub selection_counts: BTreeMap<Selector, Vec<usize>>,
    pub per_replicate: Vec<ReplicateRecord>,
}

impl SimulationResult {
    /// Position with the largest count; ties go to the lowest position.
    pub fn modal_selection(&self, selector: Selector) -> Option<usize> {
        let counts = self.selection_counts.get(&selector)?;
        let mut best = 0;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = i;
            }
        }
        Some(best)
    }
}

/// Root mean squared error of `values` against `truth`.
pub fn rmse(values: impl IntoIterator<Item = f64>, truth: f64) -> f64 {
    let (mut total, mut count) = (0.0, 0usize);
    for v in values {
        total += (v - truth) * (v - truth);
        count += 1;
    }
    (total / count as f64).sqrt()
}

/// Median of the predicted values (mean of the two middle ones for even counts).
pub fn median_baseline(predictions: &[Prediction]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::Domain("no predictions for the median baseline".into()));
    }
    let mut v: Vec<f64> = predictions.iter().map(|p| p.value).collect();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Ok(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

/// A uniformly chosen prediction; returns `(position, value)`.
pub fn random_baseline<R: Rng + ?Sized>(predictions: &[Prediction], rng: &mut R) -> Result<(usize, f64)> {
    if predictions.is_empty() {
        return Err(Error::Domain("no predictions for the random baseline".into()));
    }
    let i = rng.gen_range(0..predictions.len());
    Ok((i, predictions[i].value))
}

fn run_replicate(
    config: &SimulationConfig,
    specs: &[PredictorSpec],
    alphas2: &[f64],
    replicate: usize,
) -> Result<ReplicateRecord> {
    let seed = derive_seed(config.master_seed, replicate as u64);
    let sample = config.model.sample(config.n, &mut rng_from_seed(derive_seed(seed, 0)))?;
    let predictions = full_sample_predictions(specs, config.p0, &sample)?;
    let cv_seed = derive_seed(seed, 1);
    let pick_at = |selector, i: usize| Pick { selector, selected: Some(i), value: predictions[i].value };

    let mut picks = Vec::with_capacity(config.selectors.len());
    for &selector in &Selector::ALL {
        if !config.wants(selector) {
            continue;
        }
        let pick = match selector {
            Selector::Qs => pick_at(selector, conventional_assess(&predictions, config.p0, &sample)?.selected),
            Selector::Scv1 => {
                let cv = cross_validated_scores(Method::Method1, specs, config.p0, &config.alphas, &sample, cv_seed)?;
                pick_at(selector, cv.selected)
            }
            Selector::Scv2 => {
                let cv = cross_validated_scores(Method::Method2, specs, config.p0, alphas2, &sample, cv_seed)?;
                pick_at(selector, cv.selected)
            }
            Selector::Median => Pick { selector, selected: None, value: median_baseline(&predictions)? },
            Selector::Random => {
                let (i, _) = random_baseline(&predictions, &mut rng_from_seed(derive_seed(seed, 2)))?;
                pick_at(selector, i)
            }
        };
        picks.push(pick);
    }
    Ok(ReplicateRecord { replicate, seed, picks })
}

/// Runs every replicate (in parallel) and reduces in replicate order.
///
/// Replicate `i` depends only on `(master_seed, i)`, so a run with more
/// replicates extends a shorter one without changing shared records.
pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationResult> {
    config.validate()?;
    let specs = config.predictor_set.specs();
    let alphas2 = config.method2_alphas()?;
    let true_quantile = config.model.quantile(config.p0)?;

    let per_replicate = (0..config.replicates)
        .into_par_iter()
        .map(|i| run_replicate(config, &specs, &alphas2, i))
        .collect::<Result<Vec<_>>>()?;

    let mut rmse_by = BTreeMap::new();
    let mut selection_counts = BTreeMap::new();
    for &selector in &Selector::ALL {
        if !config.wants(selector) {
            continue;
        }
        let picks: Vec<&Pick> = per_replicate.iter().filter_map(|r| r.pick(selector)).collect();
        rmse_by.insert(selector, rmse(picks.iter().map(|p| p.value), true_quantile));
        if selector.selects() {
            let mut counts = vec![0usize; specs.len()];
            for p in &picks {
                if let Some(i) = p.selected {
                    counts[i] += 1;
                }
            }
            selection_counts.insert(selector, counts);
        }
    }
    Ok(SimulationResult {
        true_quantile,
        labels: specs.iter().map(PredictorSpec::label).collect(),
        rmse: rmse_by,
        selection_counts,
        per_replicate,
    })
}

/// One model's RMSEs for one predictor set.
#[derive(Debug, Clone, PartialEq)]
pub struct RmseEntry {
    pub model: String,
    pub set: PredictorSet,
    pub rmse: BTreeMap<Selector, f64>,
}

/// Writes RMSEs with one row per model and one column per
/// `(predictor set, selector)` pair, in first-seen order.
pub fn write_rmse_table<W: Write>(out: W, entries: &[RmseEntry]) -> Result<()> {
    let mut columns: Vec<(PredictorSet, Selector)> = Vec::new();
    let mut models: Vec<&str> = Vec::new();
    for e in entries {
        for &sel in e.rmse.keys() {
            if !columns.contains(&(e.set, sel)) {
                columns.push((e.set, sel));
            }
        }
        if !models.contains(&e.model.as_str()) {
            models.push(&e.model);
        }
    }
    let io = |e: csv::Error| Error::Domain(format!("writing RMSE table: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["model".to_string()];
    header.extend(columns.iter().map(|(set, sel)| format!("{sel}_{}", set.name())));
    w.write_record(&header).map_err(io)?;
    for model in models {
        let mut row = vec![model.to_string()];
        for (set, sel) in &columns {
            let cell = entries
                .iter()
                .find(|e| e.model == model && e.set == *set)
                .and_then(|e| e.rmse.get(sel))
                .map(|v| v.to_string())
                .unwrap_or_default();
            row.push(cell);
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Domain(format!("writing RMSE table: {e}")))?;
    Ok(())
}

/// Writes `model,set,method,index,label,count` rows for every selector histogram.
pub fn write_selection_freq<W: Write>(out: W, entries: &[(&str, PredictorSet, &SimulationResult)]) -> Result<()> {
    let io = |e: csv::Error| Error::Domain(format!("writing selection frequencies: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "set", "method", "index", "label", "count"]).map_err(io)?;
    for (model, set, result) in entries {
        let specs = set.specs();
        for (sel, counts) in &result.selection_counts {
            for (spec, count) in specs.iter().zip(counts) {
                w.write_record([
                    model.to_string(),
                    set.name().to_string(),
                    sel.to_string(),
                    spec.index.to_string(),
                    spec.label(),
                    count.to_string(),
                ])
                .map_err(io)?;
            }
        }
    }
    w.flush().map_err(|e| Error::Domain(format!("writing selection frequencies: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::reference_models;

    fn preds(values: &[f64]) -> Vec<Prediction> {
        values
            .iter()
            .map(|&value| Prediction { value, spec: PredictorSpec::empirical(), fallback_used: false })
            .collect()
    }

    #[test]
    fn median_examples() {
        assert_eq!(median_baseline(&preds(&[3.0, 1.0, 2.0])).unwrap(), 2.0);
        assert_eq!(median_baseline(&preds(&[4.0, 1.0, 3.0, 2.0])).unwrap(), 2.5);
        assert!(median_baseline(&[]).is_err());
    }

    #[test]
    fn random_examples() {
        assert_eq!(random_baseline(&preds(&[7.0]), &mut rng_from_seed(1)).unwrap(), (0, 7.0));
        let p = preds(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let a = random_baseline(&p, &mut rng_from_seed(12)).unwrap();
        let b = random_baseline(&p, &mut rng_from_seed(12)).unwrap();
        assert_eq!(a, b);
    }

    fn small_config(replicates: usize) -> SimulationConfig {
        let mut c =
            SimulationConfig::standard(reference_models::single_gpd(0.0), 1500, replicates, PredictorSet::A, 77);
        c.alphas = vec![1.0, 2.0];
        c
    }

    #[test]
    fn single_replicate_rmse_is_absolute_error() {
        let result = run_simulation(&small_config(1)).unwrap();
        let rec = &result.per_replicate[0];
        for (sel, r) in &result.rmse {
            let v = rec.pick(*sel).unwrap().value;
            assert!((r - (v - result.true_quantile).abs()).abs() < 1e-12, "{sel}");
        }
    }

    #[test]
    fn rmse_recomputes_and_histograms_sum_to_replicates() {
        let result = run_simulation(&small_config(6)).unwrap();
        for (sel, r) in &result.rmse {
            let values = result.per_replicate.iter().map(|rec| rec.pick(*sel).unwrap().value);
            assert!((rmse(values, result.true_quantile) - r).abs() <= 1e-12 * r.max(1.0));
        }
        for counts in result.selection_counts.values() {
            assert_eq!(counts.iter().sum::<usize>(), 6);
        }
    }

    #[test]
    fn longer_runs_extend_shorter_ones() {
        let short = run_simulation(&small_config(3)).unwrap();
        let long = run_simulation(&small_config(6)).unwrap();
        assert_eq!(short.per_replicate[..], long.per_replicate[..3]);
    }

    #[test]
    fn infeasible_configs_are_rejected_up_front() {
        let mut c = small_config(1);
        c.alphas = vec![1.0, 8.0];
        // Method-1 folds of 1500 / 17 = 88 cannot host m = 150.
        assert!(matches!(run_simulation(&c), Err(Error::SpecInfeasible { .. })));
        let mut c = small_config(1);
        c.alphas_method2 = Some(vec![5.0]);
        assert!(matches!(run_simulation(&c), Err(Error::InfeasiblePlan(_))));
    }

    #[test]
    fn csv_layout() {
        let mut rmse = BTreeMap::new();
        rmse.insert(Selector::Qs, 1.5);
        rmse.insert(Selector::Scv1, 0.25);
        let entries = vec![
            RmseEntry { model: "(i):(a)".into(), set: PredictorSet::AB, rmse: rmse.clone() },
            RmseEntry { model: "(i):(a)".into(), set: PredictorSet::A, rmse: rmse.clone() },
            RmseEntry { model: "(iv)".into(), set: PredictorSet::AB, rmse },
        ];
        let mut buf = Vec::new();
        write_rmse_table(&mut buf, &entries).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "model,qs_AB,scv1_AB,qs_A,scv1_A\n(i):(a),1.5,0.25,1.5,0.25\n(iv),1.5,0.25,,\n");
    }
}
