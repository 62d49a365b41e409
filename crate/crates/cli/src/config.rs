//! Command-line flags, the JSON config file, and the merged run configuration.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use xquant::distributions::reference_models;
use xquant::simbench::Selector;
use xquant::{DataModel, PredictorSet};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Assess,
    Simulate,
}

/// Flags shared by both subcommands. Every flag is optional so that a
/// config file can supply it.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Data model in the grammar `gpd(mu,sigma,xi)`, `gev(..)`, `gamma(rate,scale,shape)`,
    /// `unif(lo,hi)`, `mix(w*F + ...)`, or a built-in model label such as `i-c` / `(ii):(b)`.
    /// Repeat to simulate several models.
    #[arg(long)]
    pub model: Vec<String>,
    /// Single-column CSV (a `value` column or one unheadered column).
    #[arg(long, conflicts_with = "model")]
    pub input: Option<PathBuf>,
    /// Target level, or `auto` for 1 - 1/(2n).
    #[arg(long)]
    pub p0: Option<String>,
    /// Method-1 tuning values; fractions like `1/4` are accepted.
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    pub alphas: Option<Vec<f64>>,
    /// Method-2 tuning values. Defaults to the values giving the Method-1 fold counts.
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    pub alphas2: Option<Vec<f64>>,
    /// Any of qs, scv1, scv2; simulate also takes median and random.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Predictor sets: zero-ab, a, b, ab.
    #[arg(long, value_delimiter = ',')]
    pub set: Option<Vec<String>>,
    /// Monte Carlo replicates (simulate).
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Sample size drawn from a model.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Drop zero values from the input.
    #[arg(long)]
    pub zero_filter: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Level {
    Value(f64),
    Text(String),
}

/// The JSON config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub model: Option<OneOrMany<String>>,
    pub input: Option<PathBuf>,
    pub p0: Option<Level>,
    pub alphas: Option<Vec<f64>>,
    pub alphas2: Option<Vec<f64>>,
    pub methods: Option<OneOrMany<String>>,
    pub set: Option<OneOrMany<String>>,
    pub replicates: Option<usize>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub zero_filter: Option<bool>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetLevel {
    Auto,
    Fixed(f64),
}

impl TargetLevel {
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(TargetLevel::Auto);
        }
        let p = parse_real(s).map_err(CliError::Config)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(CliError::Config(format!("p0 must lie in (0, 1), got {p}")));
        }
        Ok(TargetLevel::Fixed(p))
    }

    pub fn resolve(self, n: usize) -> f64 {
        match self {
            TargetLevel::Auto => 1.0 - 1.0 / (2.0 * n as f64),
            TargetLevel::Fixed(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// Labelled models, label as given by the user.
    Models(Vec<(String, DataModel)>),
    Input(PathBuf),
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub source: Source,
    /// Sample size when drawing from a model.
    pub n: usize,
    pub p0: TargetLevel,
    pub alphas: Vec<f64>,
    pub alphas2: Option<Vec<f64>>,
    pub methods: Vec<Selector>,
    pub sets: Vec<PredictorSet>,
    pub replicates: usize,
    pub seed: u64,
    pub zero_filter: bool,
    pub out: PathBuf,
}

pub const DEFAULT_N: usize = 7500;
pub const DEFAULT_REPLICATES: usize = 200;
pub const DEFAULT_ALPHAS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

impl RunConfig {
    /// Merges flags over the config file named by `--config`, if any.
    pub fn from_flags(command: Command, flags: Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::merge(command, flags, file)
    }

    pub fn merge(command: Command, flags: Flags, file: FileConfig) -> Result<Self> {
        // The data source is one setting: a flag for either kind replaces the file's.
        let (models, input) = if !flags.model.is_empty() || flags.input.is_some() {
            (flags.model, flags.input)
        } else {
            (file.model.map(OneOrMany::into_vec).unwrap_or_default(), file.input)
        };
        let source = match (models.is_empty(), input) {
            (false, None) => Source::Models(
                models.into_iter().map(|m| parse_model(&m).map(|model| (m, model))).collect::<Result<_>>()?,
            ),
            (true, Some(path)) => Source::Input(path),
            (true, None) => return Err(CliError::Config("one of --model or --input is required".into())),
            (false, Some(_)) => return Err(CliError::Config("--model and --input are mutually exclusive".into())),
        };

        let p0 = match (flags.p0, file.p0) {
            (Some(s), _) | (None, Some(Level::Text(s))) => TargetLevel::parse(&s)?,
            (None, Some(Level::Value(p))) => TargetLevel::parse(&p.to_string())?,
            (None, None) => TargetLevel::Auto,
        };
        let alphas = flags.alphas.or(file.alphas).unwrap_or_else(|| DEFAULT_ALPHAS.to_vec());
        let alphas2 = flags.alphas2.or(file.alphas2);
        for a in alphas.iter().chain(alphas2.iter().flatten()) {
            if !(a.is_finite() && *a > 0.0) {
                return Err(CliError::Config(format!("alphas must be positive, got {a}")));
            }
        }
        if alphas.is_empty() || alphas2.as_ref().is_some_and(Vec::is_empty) {
            return Err(CliError::Config("alphas must be nonempty".into()));
        }

        let method_names = flags
            .methods
            .or(file.methods.map(OneOrMany::into_vec))
            .unwrap_or_else(|| vec!["qs".into(), "scv1".into(), "scv2".into()]);
        let mut methods = Vec::new();
        for name in &method_names {
            let sel: Selector = name.parse()?;
            if command == Command::Assess && !sel.selects() {
                return Err(CliError::Config(format!("method {sel} is only available to simulate")));
            }
            if !methods.contains(&sel) {
                methods.push(sel);
            }
        }
        if methods.is_empty() {
            return Err(CliError::Config("no methods requested".into()));
        }

        let set_names = flags.set.or(file.set.map(OneOrMany::into_vec)).unwrap_or_else(|| vec!["ab".into()]);
        let mut sets = Vec::new();
        for name in &set_names {
            let set: PredictorSet = name.parse()?;
            if !sets.contains(&set) {
                sets.push(set);
            }
        }
        if sets.is_empty() {
            return Err(CliError::Config("no predictor set requested".into()));
        }

        if command == Command::Assess {
            if let Source::Models(m) = &source {
                if m.len() > 1 {
                    return Err(CliError::Config("assess takes a single --model".into()));
                }
            }
        }
        if command == Command::Simulate && matches!(source, Source::Input(_)) {
            return Err(CliError::Config("simulate needs --model, not --input".into()));
        }

        Ok(RunConfig {
            command,
            source,
            n: flags.n.or(file.n).unwrap_or(DEFAULT_N),
            p0,
            alphas,
            alphas2,
            methods,
            sets,
            replicates: flags.replicates.or(file.replicates).unwrap_or(DEFAULT_REPLICATES),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            zero_filter: flags.zero_filter || file.zero_filter.unwrap_or(false),
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("xquant-out")),
        })
    }
}

/// A decimal or a fraction `a/b`.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("not a number: {s:?}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

/// Grammar string, or one of the built-in model labels (`(ii):(b)` or `ii-b`).
pub fn parse_model(s: &str) -> Result<DataModel> {
    let key = |label: &str| label.chars().filter(char::is_ascii_alphanumeric).collect::<String>();
    let wanted = key(s);
    if let Some((_, model)) = reference_models::all().into_iter().find(|(label, _)| key(label) == wanted) {
        return Ok(model);
    }
    Ok(s.parse()?)
}
