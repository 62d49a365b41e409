//! Check loss, average quantile score and the conventional in-sample
//! selector.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::Prediction;

/// Check (pinball) loss `(a - b)(1[b <= a] - p)` of prediction `a` at
/// observation `b`.
///
/// Over-prediction costs `1 - p` per unit and under-prediction `p`, so the
/// expected loss is minimised by the `p`-quantile. For `a` above every
/// observation the average score reduces to `(1 - p)(a - mean)`.
pub fn check_loss(a: f64, b: f64, p: f64) -> f64 {
    let diff = a - b;
    if diff < 0.0 {
        -diff * p
    } else {
        diff * (1.0 - p)
    }
}

/// Mean check loss of a single prediction over a validation sample.
pub fn average_score(prediction: f64, p: f64, validation: &[f64]) -> Result<f64> {
    if validation.is_empty() {
        return Err(Error::Domain("validation sample is empty".into()));
    }
    let total: f64 = validation.iter().map(|&b| check_loss(prediction, b, p)).sum();
    Ok(total / validation.len() as f64)
}

/// Index of the smallest score; ties go to the earliest entry.
pub fn argmin(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some(b) if !(s < scores[b]) => {}
            _ if s.is_nan() => {}
            _ => best = Some(i),
        }
    }
    best
}

/// In-sample scores of predictions made on the full sample at `p0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConventionalScores {
    pub scores: Vec<f64>,
    /// Position in `predictions` of the selected predictor.
    pub selected: usize,
}

/// Scores every full-sample prediction against the sample itself and picks
/// the minimiser.
pub fn conventional_assess(predictions: &[Prediction], p0: f64, sample: &[f64]) -> Result<ConventionalScores> {
    if predictions.is_empty() {
        return Err(Error::Domain("no predictions to assess".into()));
    }
    let scores = predictions.iter().map(|pr| average_score(pr.value, p0, sample)).collect::<Result<Vec<_>>>()?;
    let selected = argmin(&scores).ok_or_else(|| Error::Domain("all scores are NaN".into()))?;
    Ok(ConventionalScores { scores, selected })
}
