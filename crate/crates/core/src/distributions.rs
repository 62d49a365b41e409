//! Data-generating models: GPD, GEV, Gamma, Uniform and finite mixtures.
//!
//! Every family exposes `cdf`, `quantile` and inverse-transform sampling.
//! Mixtures are sampled by picking a component by weight and inverting
//! that component's CDF, so draws are exact and reproducible from a seed.

use std::fmt;
use std::str::FromStr;

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};

/// Below this |shape| the exponential (GPD) or Gumbel (GEV) limit is used.
pub const SHAPE_ZERO_TOL: f64 = 1e-6;

/// Tolerance on the sum of mixture weights.
const WEIGHT_SUM_TOL: f64 = 1e-12;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {v}")))
    }
}

fn check_level(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability level must lie in (0, 1), got {p}")))
    }
}

/// Generalized Pareto distribution above threshold `location`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdParams {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
}

impl GpdParams {
    pub fn new(location: f64, scale: f64, shape: f64) -> Result<Self> {
        check_finite("GPD location", location)?;
        check_positive("GPD scale", scale)?;
        check_finite("GPD shape", shape)?;
        Ok(Self { location, scale, shape })
    }

    /// Right end of the support; infinite unless `shape < 0`.
    pub fn upper_endpoint(&self) -> f64 {
        if self.shape < -SHAPE_ZERO_TOL {
            self.location - self.scale / self.shape
        } else {
            f64::INFINITY
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        if z <= 0.0 {
            return 0.0;
        }
        if self.shape.abs() < SHAPE_ZERO_TOL {
            return -(-z).exp_m1();
        }
        let t = self.shape * z;
        if t <= -1.0 {
            return 1.0;
        }
        -(-t.ln_1p() / self.shape).exp_m1()
    }

    /// Closed-form inverse CDF; `p` must lie in (0, 1).
    pub fn quantile_unchecked(&self, p: f64) -> f64 {
        let log_tail = (-p).ln_1p();
        if self.shape.abs() < SHAPE_ZERO_TOL {
            self.location - self.scale * log_tail
        } else {
            self.location + self.scale / self.shape * (-self.shape * log_tail).exp_m1()
        }
    }
}

/// Generalized extreme value distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
}

impl GevParams {
    pub fn new(location: f64, scale: f64, shape: f64) -> Result<Self> {
        check_finite("GEV location", location)?;
        check_positive("GEV scale", scale)?;
        check_finite("GEV shape", shape)?;
        Ok(Self { location, scale, shape })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        if self.shape.abs() < SHAPE_ZERO_TOL {
            return (-(-z).exp()).exp();
        }
        let t = self.shape * z;
        if t <= -1.0 {
            // Outside the support: below it for shape > 0, above it for shape < 0.
            return if self.shape > 0.0 { 0.0 } else { 1.0 };
        }
        (-(-t.ln_1p() / self.shape).exp()).exp()
    }

    pub fn quantile_unchecked(&self, p: f64) -> f64 {
        let log_y = (-p.ln()).ln();
        if self.shape.abs() < SHAPE_ZERO_TOL {
            self.location - self.scale * log_y
        } else {
            self.location + self.scale / self.shape * (-self.shape * log_y).exp_m1()
        }
    }
}

/// Gamma distribution; the effective scale is `scale / rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub rate: f64,
    pub scale: f64,
    pub shape: f64,
}

impl GammaParams {
    pub fn new(rate: f64, scale: f64, shape: f64) -> Result<Self> {
        check_positive("Gamma rate", rate)?;
        check_positive("Gamma scale", scale)?;
        check_positive("Gamma shape", shape)?;
        Ok(Self { rate, scale, shape })
    }

    fn effective_scale(&self) -> f64 {
        self.scale / self.rate
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        gamma_lr(self.shape, x / self.effective_scale())
    }

    /// Bisection on `ln x`; the lower tail of small-shape gammas spans
    /// hundreds of decades, so bisecting in `x` would not resolve it.
    pub fn quantile_unchecked(&self, p: f64) -> f64 {
        let theta = self.effective_scale();
        let cdf = |log_z: f64| gamma_lr(self.shape, log_z.exp());
        let mut lo = -1.0_f64;
        let mut hi = 1.0_f64;
        let mut step = 1.0;
        while cdf(lo) > p {
            lo -= step;
            step *= 2.0;
            if lo < -745.0 {
                lo = -745.0;
                break;
            }
        }
        step = 1.0;
        while cdf(hi) < p {
            hi += step;
            step *= 2.0;
        }
        bisect(lo, hi, |v| cdf(v) < p).exp() * theta
    }
}

/// Shrinks `[lo, hi]` with `below(lo) && !below(hi)` until it is a single
/// ulp wide; returns the upper end.
fn bisect(mut lo: f64, mut hi: f64, below: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..2100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// One parametric family of a mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Uniform { lo: f64, hi: f64 },
    Gpd(GpdParams),
    Gev(GevParams),
    Gamma(GammaParams),
}

impl Family {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        check_finite("uniform lower bound", lo)?;
        check_finite("uniform upper bound", hi)?;
        if lo >= hi {
            return Err(Error::Domain(format!("uniform bounds need lo < hi, got ({lo}, {hi})")));
        }
        Ok(Family::Uniform { lo, hi })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Family::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Family::Gpd(g) => g.cdf(x),
            Family::Gev(g) => g.cdf(x),
            Family::Gamma(g) => g.cdf(x),
        }
    }

    fn quantile_unchecked(&self, p: f64) -> f64 {
        match self {
            Family::Uniform { lo, hi } => lo + p * (hi - lo),
            Family::Gpd(g) => g.quantile_unchecked(p),
            Family::Gev(g) => g.quantile_unchecked(p),
            Family::Gamma(g) => g.quantile_unchecked(p),
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_level(p)?;
        Ok(self.quantile_unchecked(p))
    }
}

/// A finite mixture `sum_i w_i F_i`; a single family is a one-component mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataModel {
    components: Vec<(f64, Family)>,
}

impl DataModel {
    pub fn new(components: Vec<(f64, Family)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("a model needs at least one component".into()));
        }
        for (w, _) in &components {
            if !(w.is_finite() && *w > 0.0 && *w <= 1.0) {
                return Err(Error::Domain(format!("mixture weight {w} outside (0, 1]")));
            }
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Domain(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(Self { components })
    }

    pub fn single(family: Family) -> Self {
        Self { components: vec![(1.0, family)] }
    }

    pub fn components(&self) -> &[(f64, Family)] {
        &self.components
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let v: f64 = self.components.iter().map(|(w, f)| w * f.cdf(x)).sum();
        v.clamp(0.0, 1.0)
    }

    /// Smallest `x` with `cdf(x) >= p`. Mixtures are inverted by bisection
    /// after growing a bracket geometrically until it straddles `p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_level(p)?;
        if let [(_, family)] = self.components.as_slice() {
            return Ok(family.quantile_unchecked(p));
        }
        let mut lo = -1.0_f64;
        let mut hi = 1.0_f64;
        let mut width = 2.0;
        while self.cdf(lo) >= p {
            lo -= width;
            width *= 2.0;
        }
        width = 2.0;
        while self.cdf(hi) < p {
            hi += width;
            width *= 2.0;
        }
        Ok(bisect(lo, hi, |x| self.cdf(x) < p))
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let family = if self.components.len() == 1 {
            &self.components[0].1
        } else {
            let pick: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = &self.components[self.components.len() - 1].1;
            for (w, f) in &self.components {
                acc += w;
                if pick < acc {
                    chosen = f;
                    break;
                }
            }
            chosen
        };
        let u: f64 = rng.sample(Open01);
        family.quantile_unchecked(u)
    }

    /// `n` i.i.d. draws by inverse transform.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Domain("sample size must be at least 1".into()));
        }
        Ok((0..n).map(|_| self.draw(rng)).collect())
    }
}

impl From<Family> for DataModel {
    fn from(f: Family) -> Self {
        DataModel::single(f)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Uniform { lo, hi } => write!(f, "unif({lo},{hi})"),
            Family::Gpd(g) => write!(f, "gpd({},{},{})", g.location, g.scale, g.shape),
            Family::Gev(g) => write!(f, "gev({},{},{})", g.location, g.scale, g.shape),
            Family::Gamma(g) => write!(f, "gamma({},{},{})", g.rate, g.scale, g.shape),
        }
    }
}

impl fmt::Display for DataModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let [(_, family)] = self.components.as_slice() {
            return write!(f, "{family}");
        }
        write!(f, "mix(")?;
        for (i, (w, family)) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{w}*{family}")?;
        }
        write!(f, ")")
    }
}

/// Parses `name(a,b,...)` with a fixed argument count.
fn parse_call(text: &str, name: &str) -> Option<Result<Vec<f64>>> {
    let rest = text.strip_prefix(name)?.trim_start();
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    Some(
        inner
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {:?} in {text:?}", t.trim())))
            })
            .collect(),
    )
}

fn expect_args(args: Vec<f64>, n: usize, text: &str) -> Result<Vec<f64>> {
    if args.len() == n {
        Ok(args)
    } else {
        Err(Error::Parse(format!("{text:?} takes {n} arguments, got {}", args.len())))
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim();
        let lower = text.to_ascii_lowercase();
        let lower = lower.as_str();
        let wrap = |e: Error| match e {
            Error::Parse(m) => Error::Parse(m),
            other => Error::Parse(format!("{text:?}: {other}")),
        };
        if let Some(args) = parse_call(lower, "gpd") {
            let a = expect_args(args?, 3, text)?;
            return GpdParams::new(a[0], a[1], a[2]).map(Family::Gpd).map_err(wrap);
        }
        if let Some(args) = parse_call(lower, "gev") {
            let a = expect_args(args?, 3, text)?;
            return GevParams::new(a[0], a[1], a[2]).map(Family::Gev).map_err(wrap);
        }
        if let Some(args) = parse_call(lower, "gamma") {
            let a = expect_args(args?, 3, text)?;
            return GammaParams::new(a[0], a[1], a[2]).map(Family::Gamma).map_err(wrap);
        }
        if let Some(args) = parse_call(lower, "unif") {
            let a = expect_args(args?, 2, text)?;
            return Family::uniform(a[0], a[1]).map_err(wrap);
        }
        Err(Error::Parse(format!("unknown family {text:?}")))
    }
}

/// Splits on `+` at parenthesis depth zero.
fn split_top_level_plus(s: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse(format!("unbalanced parentheses in {s:?}")));
                }
            }
            '+' if depth == 0 => {
                // Not a term separator when it is an exponent sign, e.g. `1e+3`.
                let prev = s[..i].trim_end().chars().last();
                if !matches!(prev, Some('e') | Some('E')) || s[..i].ends_with(char::is_whitespace) {
                    parts.push(&s[start..i]);
                    start = i + 1;
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in {s:?}")));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

impl FromStr for DataModel {
    type Err = Error;

    /// Grammar: `gpd(u,sigma,xi)`, `gev(mu,sigma,xi)`, `gamma(rate,scale,shape)`,
    /// `unif(lo,hi)` or `mix(w1*F1 + w2*F2 + ...)`.
    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim();
        let lower = text.to_ascii_lowercase();
        let Some(body) = lower
            .strip_prefix("mix")
            .map(str::trim_start)
            .and_then(|r| r.strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
        else {
            return Ok(DataModel::single(text.parse()?));
        };
        let mut components = Vec::new();
        for term in split_top_level_plus(body)? {
            let (w, fam) = term
                .split_once('*')
                .ok_or_else(|| Error::Parse(format!("mixture term {:?} lacks `weight*`", term.trim())))?;
            let weight: f64 =
                w.trim().parse().map_err(|_| Error::Parse(format!("bad mixture weight {:?}", w.trim())))?;
            components.push((weight, fam.parse::<Family>()?));
        }
        DataModel::new(components).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// The simulation models (i)(a) through (iv).
pub mod reference_models {
    use super::*;

    fn gpd(u: f64, sigma: f64, xi: f64) -> Family {
        Family::Gpd(GpdParams { location: u, scale: sigma, shape: xi })
    }

    /// GPD(10, 1, xi) for xi in {-0.5, 0, 0.5}: models (i)(a), (i)(b), (i)(c).
    pub fn single_gpd(xi: f64) -> DataModel {
        DataModel::single(gpd(10.0, 1.0, xi))
    }

    /// `lambda * U(0,10) + (1 - lambda) * GPD(10, 1, 0.5)`: models (ii)(a), (ii)(b).
    pub fn uniform_gpd_mix(lambda: f64) -> DataModel {
        DataModel {
            components: vec![(lambda, Family::Uniform { lo: 0.0, hi: 10.0 }), (1.0 - lambda, gpd(10.0, 1.0, 0.5))],
        }
    }

    /// Equal mixture of GPD(10,1,0.1) and GPD(10,1,0.5): model (iii).
    pub fn gpd_pair_mix() -> DataModel {
        DataModel { components: vec![(0.5, gpd(10.0, 1.0, 0.1)), (0.5, gpd(10.0, 1.0, 0.5))] }
    }

    /// Gamma with rate 1, scale 1, shape 0.1: model (iv).
    pub fn gamma_model() -> DataModel {
        DataModel::single(Family::Gamma(GammaParams { rate: 1.0, scale: 1.0, shape: 0.1 }))
    }

    /// `(label, model)` for every simulation model, in table order.
    pub fn all() -> Vec<(&'static str, DataModel)> {
        vec![
            ("(i):(a)", single_gpd(-0.5)),
            ("(i):(b)", single_gpd(0.0)),
            ("(i):(c)", single_gpd(0.5)),
            ("(ii):(a)", uniform_gpd_mix(0.5)),
            ("(ii):(b)", uniform_gpd_mix(0.99)),
            ("(iii)", gpd_pair_mix()),
            ("(iv)", gamma_model()),
        ]
    }
}
