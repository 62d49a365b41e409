//! Cross-validated scoring of extreme-quantile predictors.
//!
//! For a target level `p0` on `n` observations and a tuning value `alpha`
//! (the expected number of validation exceedances of the trial quantile),
//! the trial problem predicts the `p_c = p0 - alpha / n` quantile from
//! `n_c` observations, where
//!
//! ```text
//! n_c (1 - p_c)       = n (1 - p0)   (equally extreme)
//! (n - n_c)(1 - p_c)  = alpha
//! ```
//!
//! Method 1 realises `n_c = n / k` (train on one fold, validate on the rest),
//! Method 2 realises `n_c = (k - 1) n / k` (ordinary k-fold). Scores are
//! averaged over folds, then with equal weights over the `alpha` values.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{Prediction, PredictorSpec, SortedSample};
use crate::scoring::{argmin, average_score, conventional_assess};
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    /// Train on one fold, validate on the other `k - 1`.
    Method1,
    /// Train on `k - 1` folds, validate on the remaining one.
    Method2,
}

/// The three selectors compared by the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Assessment {
    Conventional,
    Method1,
    Method2,
}

impl Assessment {
    pub fn short_name(self) -> &'static str {
        match self {
            Assessment::Conventional => "qs",
            Assessment::Method1 => "scv1",
            Assessment::Method2 => "scv2",
        }
    }
}

impl From<Method> for Assessment {
    fn from(m: Method) -> Self {
        match m {
            Method::Method1 => Assessment::Method1,
            Method::Method2 => Assessment::Method2,
        }
    }
}

/// Resolved cross-validation geometry for one tuning value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvPlan {
    pub n: usize,
    pub p0: f64,
    pub alpha: f64,
    pub method: Method,
    pub k: usize,
    /// Nominal training-sample size.
    pub n_c: usize,
    /// Trial quantile level.
    pub p_c: f64,
}

/// Floor that forgives representation error: `1 + 1/(2 * 0.5)` evaluated
/// with `p0 = 1 - 1/15000` lands a few ulps below 3.
fn snap_floor(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

/// Unfloored solution of the two calibration equations.
///
/// Sizes and tail probabilities are computed directly rather than as
/// differences (`n - n_c`, `1 - p_c`), which would cancel badly when
/// `alpha` is small against `n (1 - p0)` or `p0` is close to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousSolution {
    pub n_c: f64,
    /// `n - n_c`.
    pub n_valid: f64,
    /// `1 - p_c`.
    pub tail_c: f64,
}

pub fn continuous_solution(n: f64, p0: f64, alpha: f64) -> ContinuousSolution {
    let tail0 = 1.0 - p0;
    let expected = n * tail0;
    ContinuousSolution {
        n_c: n / (1.0 + alpha / expected),
        n_valid: alpha * n / (expected + alpha),
        tail_c: tail0 + alpha / n,
    }
}

/// Derives the fold count, training size and trial level for `alpha`.
pub fn derive_cv_params(n: usize, p0: f64, alpha: f64, method: Method) -> Result<CvPlan> {
    if n < 2 {
        return Err(Error::InfeasiblePlan(format!("need at least 2 observations, got {n}")));
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InfeasiblePlan(format!("p0 must lie in (0, 1), got {p0}")));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InfeasiblePlan(format!("alpha must be finite and > 0, got {alpha}")));
    }
    let nf = n as f64;
    let expected = nf * (1.0 - p0);
    let raw_k = match method {
        Method::Method1 => 1.0 + alpha / expected,
        Method::Method2 => expected / alpha + 1.0,
    };
    let k = snap_floor(raw_k);
    if k < 2.0 {
        return Err(Error::InfeasiblePlan(format!(
            "alpha = {alpha} gives k = {k} (< 2) for {method:?} with n = {n}, p0 = {p0}; \
             {} alpha",
            match method {
                Method::Method1 => "increase",
                Method::Method2 => "decrease",
            }
        )));
    }
    if k > nf {
        return Err(Error::InfeasiblePlan(format!("alpha = {alpha} gives k = {k} folds for only {n} observations")));
    }
    let k = k as usize;
    let p_c = p0 - alpha / nf;
    if !(p_c > 0.0 && p_c < 1.0) {
        return Err(Error::InfeasiblePlan(format!("alpha = {alpha} gives trial level p_c = {p_c} outside (0, 1)")));
    }
    let n_c = match method {
        Method::Method1 => n / k,
        Method::Method2 => n - n / k,
    };
    Ok(CvPlan { n, p0, alpha, method, k, n_c, p_c })
}

/// Method-2 tuning values giving the same fold counts as `alphas` do
/// under Method 1: `alpha_2 = n (1 - p0) / (k - 1)`.
pub fn matched_method2_alphas(n: usize, p0: f64, alphas: &[f64]) -> Result<Vec<f64>> {
    let expected = n as f64 * (1.0 - p0);
    alphas
        .iter()
        .map(|&a| derive_cv_params(n, p0, a, Method::Method1).map(|plan| expected / (plan.k - 1) as f64))
        .collect()
}

/// Random partition of `0..n` into `k` folds of near-equal size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldAssignment {
    /// Fold (0-based) of every sample index.
    pub fold_of: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }

    /// `(fold j, everything else)` as value vectors.
    pub fn split(&self, sample: &[f64], fold: usize) -> (Vec<f64>, Vec<f64>) {
        let mut inside = Vec::with_capacity(sample.len() / self.k + 1);
        let mut outside = Vec::with_capacity(sample.len());
        for (&x, &f) in sample.iter().zip(&self.fold_of) {
            if f == fold {
                inside.push(x);
            } else {
                outside.push(x);
            }
        }
        (inside, outside)
    }
}

/// Seeded uniform permutation of the indices, dealt round-robin into `k` folds.
pub fn partition_folds(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Domain(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::Domain(format!("cannot split {n} observations into {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut fold_of = vec![0; n];
    for (pos, &idx) in order.iter().enumerate() {
        fold_of[idx] = pos % k;
    }
    Ok(FoldAssignment { fold_of, k, seed })
}

/// Seed of the fold partition used for the `alpha_index`-th tuning value.
pub fn alpha_seed(seed: u64, alpha_index: usize) -> u64 {
    derive_seed(seed, alpha_index as u64)
}

/// Scores of one assessment method over a predictor set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub method: Assessment,
    pub p0: f64,
    pub alphas: Vec<f64>,
    /// Resolved plan per alpha; empty for the conventional score.
    pub plans: Vec<CvPlan>,
    pub labels: Vec<String>,
    /// `per_alpha_scores[i][a]`: predictor `i` at tuning value `a`. The
    /// conventional score has a single column.
    pub per_alpha_scores: Vec<Vec<f64>>,
    pub combined_scores: Vec<f64>,
    /// Position of the selected predictor in the input spec list.
    pub selected: usize,
    pub selected_label: String,
    /// Full-sample predictions at `p0`.
    pub predictions_at_p0: Vec<Prediction>,
    /// Per predictor, how many cross-validation fits fell back to the training maximum.
    pub fallback_counts: Vec<usize>,
}

impl ScoreReport {
    pub fn selected_prediction(&self) -> &Prediction {
        &self.predictions_at_p0[self.selected]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Cross-validated scores without the full-sample predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct CvScores {
    pub plans: Vec<CvPlan>,
    pub per_alpha_scores: Vec<Vec<f64>>,
    pub combined_scores: Vec<f64>,
    pub selected: usize,
    pub fallback_counts: Vec<usize>,
}

fn check_inputs(specs: &[PredictorSpec], alphas: &[f64], sample: &[f64]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::Domain("predictor set is empty".into()));
    }
    if alphas.is_empty() {
        return Err(Error::Domain("at least one alpha is required".into()));
    }
    if sample.is_empty() {
        return Err(Error::Domain("sample is empty".into()));
    }
    Ok(())
}

/// Scores of every predictor on one fold: `(score, fell back)`.
fn score_fold(
    method: Method,
    specs: &[PredictorSpec],
    p_c: f64,
    folds: &FoldAssignment,
    sample: &[f64],
    fold: usize,
) -> Result<Vec<(f64, bool)>> {
    let (inside, outside) = folds.split(sample, fold);
    let (training, validation) = match method {
        Method::Method1 => (inside, outside),
        Method::Method2 => (outside, inside),
    };
    let sorted = SortedSample::new(&training)?;
    sorted
        .predict_all(specs, p_c)
        .into_iter()
        .map(|pred| {
            let pred = pred?;
            Ok((average_score(pred.value, p_c, &validation)?, pred.fallback_used))
        })
        .collect()
}

/// Combined cross-validated score of every predictor under `method`.
///
/// Folds are evaluated in parallel; sums are reduced in fold order so the
/// result does not depend on the schedule.
pub fn cross_validated_scores(
    method: Method,
    specs: &[PredictorSpec],
    p0: f64,
    alphas: &[f64],
    sample: &[f64],
    seed: u64,
) -> Result<CvScores> {
    check_inputs(specs, alphas, sample)?;
    let plans = alphas.iter().map(|&a| derive_cv_params(sample.len(), p0, a, method)).collect::<Result<Vec<_>>>()?;

    let mut per_alpha_scores = vec![Vec::with_capacity(alphas.len()); specs.len()];
    let mut fallback_counts = vec![0usize; specs.len()];
    for (a, plan) in plans.iter().enumerate() {
        let folds = partition_folds(sample.len(), plan.k, alpha_seed(seed, a))?;
        let per_fold = (0..plan.k)
            .into_par_iter()
            .map(|j| score_fold(method, specs, plan.p_c, &folds, sample, j))
            .collect::<Result<Vec<_>>>()?;
        for (i, row) in per_alpha_scores.iter_mut().enumerate() {
            let mut total = 0.0;
            for fold_scores in &per_fold {
                let (score, fell_back) = fold_scores[i];
                total += score;
                fallback_counts[i] += usize::from(fell_back);
            }
            row.push(total / plan.k as f64);
        }
    }
    let combined_scores: Vec<f64> =
        per_alpha_scores.iter().map(|row| row.iter().sum::<f64>() / row.len() as f64).collect();
    let selected = argmin(&combined_scores).ok_or_else(|| Error::Domain("all combined scores are NaN".into()))?;
    Ok(CvScores { plans, per_alpha_scores, combined_scores, selected, fallback_counts })
}

/// Trains every predictor on the full sample and predicts the `p0`-quantile.
pub fn full_sample_predictions(specs: &[PredictorSpec], p0: f64, sample: &[f64]) -> Result<Vec<Prediction>> {
    SortedSample::new(sample)?.predict_all(specs, p0).into_iter().collect()
}

fn labels(specs: &[PredictorSpec]) -> Vec<String> {
    specs.iter().map(PredictorSpec::label).collect()
}

fn cv_report(
    method: Method,
    specs: &[PredictorSpec],
    p0: f64,
    alphas: &[f64],
    sample: &[f64],
    seed: u64,
) -> Result<ScoreReport> {
    let cv = cross_validated_scores(method, specs, p0, alphas, sample, seed)?;
    let predictions_at_p0 = full_sample_predictions(specs, p0, sample)?;
    Ok(ScoreReport {
        method: method.into(),
        p0,
        alphas: alphas.to_vec(),
        plans: cv.plans,
        labels: labels(specs),
        per_alpha_scores: cv.per_alpha_scores,
        combined_scores: cv.combined_scores,
        selected: cv.selected,
        selected_label: specs[cv.selected].label(),
        predictions_at_p0,
        fallback_counts: cv.fallback_counts,
    })
}

/// Method 1: small training fold, large validation remainder.
pub fn scv1(specs: &[PredictorSpec], p0: f64, alphas: &[f64], sample: &[f64], seed: u64) -> Result<ScoreReport> {
    cv_report(Method::Method1, specs, p0, alphas, sample, seed)
}

/// Method 2: large training remainder, small validation fold.
pub fn scv2(specs: &[PredictorSpec], p0: f64, alphas: &[f64], sample: &[f64], seed: u64) -> Result<ScoreReport> {
    cv_report(Method::Method2, specs, p0, alphas, sample, seed)
}

/// The conventional in-sample score as a report.
pub fn conventional_report(specs: &[PredictorSpec], p0: f64, sample: &[f64]) -> Result<ScoreReport> {
    if specs.is_empty() {
        return Err(Error::Domain("predictor set is empty".into()));
    }
    let predictions_at_p0 = full_sample_predictions(specs, p0, sample)?;
    let conv = conventional_assess(&predictions_at_p0, p0, sample)?;
    Ok(ScoreReport {
        method: Assessment::Conventional,
        p0,
        alphas: Vec::new(),
        plans: Vec::new(),
        labels: labels(specs),
        per_alpha_scores: conv.scores.iter().map(|&s| vec![s]).collect(),
        combined_scores: conv.scores,
        selected: conv.selected,
        selected_label: specs[conv.selected].label(),
        fallback_counts: vec![0; specs.len()],
        predictions_at_p0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::reference_models;
    use crate::estimators::{PredictorKind, PredictorSet};
    use proptest::prelude::*;

    const N: usize = 7500;
    const P0: f64 = 1.0 - 1.0 / 15000.0;

    #[test]
    fn method1_fold_counts() {
        for (alpha, k) in [(1.0, 3), (2.0, 5), (4.0, 9), (8.0, 17)] {
            let plan = derive_cv_params(N, P0, alpha, Method::Method1).unwrap();
            assert_eq!(plan.k, k);
            assert_eq!(plan.n_c, N / k);
            assert_eq!(plan.p_c, P0 - alpha / N as f64);
        }
        let plan = derive_cv_params(N, P0, 1.0, Method::Method1).unwrap();
        assert!((plan.p_c - (1.0 - 3.0 / 15000.0)).abs() < 1e-15);
    }

    #[test]
    fn method2_fold_counts() {
        for (alpha, k) in [(0.25, 3), (0.125, 5), (1.0 / 16.0, 9), (1.0 / 32.0, 17)] {
            let plan = derive_cv_params(N, P0, alpha, Method::Method2).unwrap();
            assert_eq!(plan.k, k, "alpha {alpha}");
            assert_eq!(plan.n_c, N - N / k);
        }
        let matched = matched_method2_alphas(N, P0, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        for (got, (want, k)) in matched.iter().zip([(0.25, 3), (0.125, 5), (1.0 / 16.0, 9), (1.0 / 32.0, 17)]) {
            assert!((got - want).abs() < 1e-12 * want);
            assert_eq!(derive_cv_params(N, P0, *got, Method::Method2).unwrap().k, k);
        }
    }

    #[test]
    fn alpha_equal_to_expected_exceedances_halves_the_sample() {
        let n = 1000;
        let p0 = 0.99;
        let alpha = n as f64 * (1.0 - p0);
        let plan = derive_cv_params(n, p0, alpha, Method::Method1).unwrap();
        assert_eq!((plan.k, plan.n_c), (2, 500));
    }

    #[test]
    fn infeasible_plans() {
        assert!(matches!(derive_cv_params(N, P0, 0.1, Method::Method1), Err(Error::InfeasiblePlan(_))));
        assert!(matches!(derive_cv_params(N, P0, 1.0, Method::Method2), Err(Error::InfeasiblePlan(_))));
        assert!(matches!(derive_cv_params(10, 0.5, 9.0, Method::Method1), Err(Error::InfeasiblePlan(_))));
        assert!(derive_cv_params(1, 0.5, 1.0, Method::Method1).is_err());
    }

    #[test]
    fn validation_exceedances_follow_fold_count() {
        for alpha in [1.0, 2.0, 4.0, 8.0] {
            let m1 = derive_cv_params(N, P0, alpha, Method::Method1).unwrap();
            let (n_c, tail_c) = (N as f64 / m1.k as f64, 1.0 - m1.p_c);
            let expect = N as f64 * (1.0 - P0) * (m1.k - 1) as f64;
            assert!(((N as f64 - n_c) * tail_c - expect).abs() < 1e-9 * expect);
        }
        for alpha in [0.25, 0.125] {
            let m2 = derive_cv_params(N, P0, alpha, Method::Method2).unwrap();
            let expect = N as f64 * (1.0 - P0) / (m2.k - 1) as f64;
            assert!((expect - alpha).abs() < 1e-9);
        }
    }

    #[test]
    fn fold_partitions() {
        let f = partition_folds(6, 3, 1).unwrap();
        assert_eq!(f.fold_sizes(), vec![2, 2, 2]);
        let f = partition_folds(7, 3, 1).unwrap();
        let mut sizes = f.fold_sizes();
        sizes.sort();
        assert_eq!(sizes, vec![2, 2, 3]);
        assert_eq!(partition_folds(7, 3, 9).unwrap(), partition_folds(7, 3, 9).unwrap());
        assert!(partition_folds(3, 4, 0).is_err());
        assert!(partition_folds(3, 1, 0).is_err());
    }

    fn two_specs() -> Vec<PredictorSpec> {
        vec![PredictorSpec::empirical(), PredictorSpec { kind: PredictorKind::GpdUpperOrderCount(3), index: 10 }]
    }

    #[test]
    fn single_predictor_is_selected() {
        let xs = reference_models::single_gpd(0.0).sample(200, &mut rng_from_seed(1)).unwrap();
        let spec = [PredictorSpec { kind: PredictorKind::GpdUpperOrderCount(10), index: 9 }];
        let p0 = 1.0 - 1.0 / 400.0;
        assert_eq!(scv1(&spec, p0, &[1.0, 2.0], &xs, 3).unwrap().selected, 0);
        assert_eq!(scv2(&spec, p0, &[0.25], &xs, 3).unwrap().selected, 0);
    }

    #[test]
    fn k2_methods_see_the_same_pairs() {
        // With k = 2 the two methods visit the same (train, validate) pairs.
        let n = 40;
        let p0 = 1.0 - 1.0 / 80.0;
        let xs = reference_models::single_gpd(0.3).sample(n, &mut rng_from_seed(2)).unwrap();
        let r1 = scv1(&two_specs(), p0, &[0.5], &xs, 17).unwrap();
        let r2 = scv2(&two_specs(), p0, &[0.5], &xs, 17).unwrap();
        assert_eq!(r1.plans[0].k, 2);
        assert_eq!(r2.plans[0].k, 2);
        for i in 0..2 {
            assert!((r1.combined_scores[i] - r2.combined_scores[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_fold_scores_follow_identity() {
        // The empirical predictor returns the fold maximum; where it clears
        // the whole complement the score is (1 - p_c)(prediction - mean).
        let n = 40;
        let p0 = 1.0 - 1.0 / 80.0;
        let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let spec = [PredictorSpec::empirical()];
        let r = scv1(&spec, p0, &[0.5], &xs, 5).unwrap();
        let plan = r.plans[0];
        let folds = partition_folds(n, 2, alpha_seed(5, 0)).unwrap();
        let mut expect = 0.0;
        for j in 0..2 {
            let (train, valid) = folds.split(&xs, j);
            let pred = train.iter().cloned().fold(f64::MIN, f64::max);
            let vmax = valid.iter().cloned().fold(f64::MIN, f64::max);
            if pred > vmax {
                expect += (1.0 - plan.p_c) * (pred - valid.iter().sum::<f64>() / valid.len() as f64);
            } else {
                expect += valid.iter().map(|&b| crate::scoring::check_loss(pred, b, plan.p_c)).sum::<f64>()
                    / valid.len() as f64;
            }
        }
        expect /= 2.0;
        assert!((r.combined_scores[0] - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn method1_trains_on_each_index_once() {
        for (alpha, k) in [(1.0, 3), (8.0, 17)] {
            let plan = derive_cv_params(N, P0, alpha, Method::Method1).unwrap();
            assert_eq!(plan.k, k);
            let folds = partition_folds(N, plan.k, alpha_seed(99, 0)).unwrap();
            let mut used = vec![0; N];
            for j in 0..plan.k {
                for (idx, &f) in folds.fold_of.iter().enumerate() {
                    if f == j {
                        used[idx] += 1;
                    }
                }
            }
            assert!(used.iter().all(|&u| u == 1));
        }
    }

    #[test]
    fn reports_are_deterministic_and_average_over_alpha() {
        let xs = reference_models::uniform_gpd_mix(0.5).sample(3000, &mut rng_from_seed(4)).unwrap();
        let p0 = 1.0 - 1.0 / 6000.0;
        let specs = PredictorSet::A.specs();
        let a = scv1(&specs, p0, &[1.0, 2.0], &xs, 8).unwrap();
        let b = scv1(&specs, p0, &[1.0, 2.0], &xs, 8).unwrap();
        assert_eq!(a, b);
        for (row, combined) in a.per_alpha_scores.iter().zip(&a.combined_scores) {
            assert_eq!(*combined, (row[0] + row[1]) / 2.0);
        }
        assert_eq!(a.selected, argmin(&a.combined_scores).unwrap());
        assert!(a.to_json().contains("\"selected_label\""));
    }

    #[test]
    fn infeasible_spec_on_fold_names_spec_and_size() {
        let xs = reference_models::single_gpd(0.0).sample(300, &mut rng_from_seed(5)).unwrap();
        let specs = [PredictorSpec { kind: PredictorKind::GpdUpperOrderCount(150), index: 1 }];
        let p0 = 1.0 - 1.0 / 600.0;
        // k = 3 folds of 100 cannot host 150 upper order statistics.
        let err = scv1(&specs, p0, &[1.0], &xs, 0).unwrap_err();
        assert_eq!(err, Error::SpecInfeasible { spec: "A:m=150".into(), n_train: 100 });
    }

    proptest! {
        #[test]
        fn continuous_solution_identities(
            n in 20.0f64..1e6,
            log_tail in -12.0f64..-0.7,
            alpha in 0.01f64..50.0,
        ) {
            let p0 = 1.0 - log_tail.exp();
            let s = continuous_solution(n, p0, alpha);
            let rhs1 = n * (1.0 - p0);
            prop_assert!((s.n_c * s.tail_c - rhs1).abs() <= 1e-12 * rhs1);
            prop_assert!((s.n_valid * s.tail_c - alpha).abs() <= 1e-12 * alpha);
            prop_assert!((s.n_c + s.n_valid - n).abs() <= 1e-12 * n);
        }
    }
}
