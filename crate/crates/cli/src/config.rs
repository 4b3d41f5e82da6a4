use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use vadesc_core::data::{CovarianceMode, LowRankMode, SurvMnistConfig, SyntheticConfig};
use vadesc_core::{FeatureKind, ReconLoss, TrainConfig};

use crate::error::{io_at, CliError, CliResult};

/// Which benchmark generator `simulate` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Synthetic,
    SurvMnist,
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::Synthetic => "synthetic",
            DatasetKind::SurvMnist => "survmnist",
        })
    }
}

impl FromStr for DatasetKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "synthetic" => Ok(DatasetKind::Synthetic),
            "survmnist" => Ok(DatasetKind::SurvMnist),
            other => Err(CliError::config(format!("dataset must be synthetic or survmnist, got {other:?}"))),
        }
    }
}

/// Every setting of a run. Training keys mirror [`TrainConfig`]; the rest
/// describe data generation, file locations and the split.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub dataset: DatasetKind,
    /// `None` picks real features for synthetic data and binary for survMNIST.
    pub feature_kind: Option<FeatureKind>,
    pub train_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    pub test_fraction: f64,
    pub out_dir: PathBuf,
    pub num_rows: usize,
    pub input_dim: usize,
    pub p_cens: f64,
    pub generator_width: usize,
    pub covariance: CovarianceMode,
    pub low_rank: LowRankMode,
    pub mean_time: f64,
    pub surrogate_noise: f64,
    pub mnist_images: Option<PathBuf>,
    pub mnist_labels: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let synthetic = SyntheticConfig::default();
        RunConfig {
            train: TrainConfig::default(),
            dataset: DatasetKind::Synthetic,
            feature_kind: None,
            train_path: None,
            test_path: None,
            test_fraction: 0.3,
            out_dir: PathBuf::from("."),
            num_rows: synthetic.num_rows,
            input_dim: synthetic.input_dim,
            p_cens: synthetic.p_cens,
            generator_width: synthetic.hidden_width,
            covariance: synthetic.covariance,
            low_rank: synthetic.low_rank,
            mean_time: SurvMnistConfig::default().mean_time,
            surrogate_noise: 0.1,
            mnist_images: None,
            mnist_labels: None,
        }
    }
}

/// Accepted keys, in the order [`RunConfig::to_text`] writes them.
pub const KEYS: &[&str] = &[
    "latent_dim",
    "num_clusters",
    "weibull_shape",
    "batch_size",
    "learning_rate",
    "epochs",
    "pretrain_epochs",
    "monte_carlo_samples",
    "recon_loss",
    "survival_weight",
    "gmm_prior",
    "hidden_layers",
    "seed",
    "dataset",
    "feature_kind",
    "train_path",
    "test_path",
    "test_fraction",
    "out_dir",
    "num_rows",
    "input_dim",
    "p_cens",
    "generator_width",
    "covariance",
    "low_rank",
    "mean_time",
    "surrogate_noise",
    "mnist_images",
    "mnist_labels",
];

struct Entry {
    line: usize,
    value: String,
}

fn value_error(key: &str, entry: &Entry, detail: impl fmt::Display) -> CliError {
    CliError::config(format!("line {}: bad value {:?} for {key}: {detail}", entry.line, entry.value))
}

fn parse_value<T: FromStr>(key: &str, entry: &Entry) -> CliResult<T>
where
    T::Err: fmt::Display,
{
    entry.value.parse::<T>().map_err(|e| value_error(key, entry, e))
}

fn parse_bool(key: &str, entry: &Entry) -> CliResult<bool> {
    match entry.value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(value_error(key, entry, "expected true or false")),
    }
}

fn parse_widths(key: &str, entry: &Entry) -> CliResult<Vec<usize>> {
    if entry.value.trim().is_empty() {
        return Ok(Vec::new());
    }
    entry
        .value
        .split(',')
        .map(|w| w.trim().parse::<usize>().map_err(|e| value_error(key, entry, e)))
        .collect()
}

fn optional_path(entry: &Entry) -> Option<PathBuf> {
    (!entry.value.is_empty()).then(|| PathBuf::from(&entry.value))
}

fn path_text(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment. Keys not given keep
    /// their defaults and are reported through the log.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries: BTreeMap<&'static str, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {line}: expected key = value, got {content:?}")))?;
            let key = key.trim();
            let known = KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| CliError::config(format!("line {line}: unknown key {key:?}")))?;
            let entry = Entry {
                line,
                value: value.trim().to_string(),
            };
            if let Some(previous) = entries.insert(known, entry) {
                return Err(CliError::config(format!(
                    "line {line}: duplicate key {key:?} (first set on line {})",
                    previous.line
                )));
            }
        }

        let mut c = RunConfig::default();
        for (key, e) in &entries {
            let t = &mut c.train;
            match *key {
                "latent_dim" => t.latent_dim = parse_value(key, e)?,
                "num_clusters" => t.num_clusters = parse_value(key, e)?,
                "weibull_shape" => t.weibull_shape = parse_value(key, e)?,
                "batch_size" => t.batch_size = parse_value(key, e)?,
                "learning_rate" => t.learning_rate = parse_value(key, e)?,
                "epochs" => t.epochs = parse_value(key, e)?,
                "pretrain_epochs" => t.pretrain_epochs = parse_value(key, e)?,
                "monte_carlo_samples" => t.monte_carlo_samples = parse_value(key, e)?,
                "recon_loss" => t.recon_loss = e.value.parse::<ReconLoss>().map_err(|err| value_error(key, e, err))?,
                "survival_weight" => t.survival_weight = parse_value(key, e)?,
                "gmm_prior" => t.gmm_prior = parse_bool(key, e)?,
                "hidden_layers" => t.hidden_layers = parse_widths(key, e)?,
                "seed" => t.seed = parse_value(key, e)?,
                "dataset" => c.dataset = e.value.parse().map_err(|err: CliError| value_error(key, e, err.message()))?,
                "feature_kind" => {
                    c.feature_kind = if e.value.is_empty() {
                        None
                    } else {
                        Some(e.value.parse::<FeatureKind>().map_err(|err| value_error(key, e, err))?)
                    }
                }
                "train_path" => c.train_path = optional_path(e),
                "test_path" => c.test_path = optional_path(e),
                "test_fraction" => c.test_fraction = parse_value(key, e)?,
                "out_dir" => c.out_dir = PathBuf::from(&e.value),
                "num_rows" => c.num_rows = parse_value(key, e)?,
                "input_dim" => c.input_dim = parse_value(key, e)?,
                "p_cens" => c.p_cens = parse_value(key, e)?,
                "generator_width" => c.generator_width = parse_value(key, e)?,
                "covariance" => c.covariance = e.value.parse::<CovarianceMode>().map_err(|err| value_error(key, e, err))?,
                "low_rank" => c.low_rank = e.value.parse::<LowRankMode>().map_err(|err| value_error(key, e, err))?,
                "mean_time" => c.mean_time = parse_value(key, e)?,
                "surrogate_noise" => c.surrogate_noise = parse_value(key, e)?,
                "mnist_images" => c.mnist_images = optional_path(e),
                "mnist_labels" => c.mnist_labels = optional_path(e),
                _ => unreachable!("key list and match arms agree"),
            }
        }
        c.train
            .validate()
            .map_err(|err| CliError::config(err.to_string()))?;
        if !(c.test_fraction > 0.0 && c.test_fraction < 1.0) {
            return Err(CliError::config(format!("test_fraction must lie in (0, 1), got {}", c.test_fraction)));
        }

        let defaulted: Vec<String> = c
            .values()
            .into_iter()
            .filter(|(key, _)| !entries.contains_key(key))
            .map(|(key, value)| format!("{key}={value}"))
            .collect();
        if !defaulted.is_empty() {
            log::info!("config defaults: {}", defaulted.join(" "));
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_at(path))?;
        RunConfig::parse(&text).map_err(|e| CliError::new(e.kind(), format!("{}: {}", path.display(), e.message())))
    }

    /// Keys the text leaves at their defaults.
    pub fn defaulted_keys(text: &str) -> Vec<&'static str> {
        let given: Vec<&str> = text
            .lines()
            .filter_map(|l| l.split('#').next()?.split_once('=').map(|(k, _)| k.trim()))
            .collect();
        KEYS.iter().copied().filter(|k| !given.contains(k)).collect()
    }

    fn values(&self) -> Vec<(&'static str, String)> {
        let t = &self.train;
        let widths: Vec<String> = t.hidden_layers.iter().map(|w| w.to_string()).collect();
        vec![
            ("latent_dim", t.latent_dim.to_string()),
            ("num_clusters", t.num_clusters.to_string()),
            ("weibull_shape", t.weibull_shape.to_string()),
            ("batch_size", t.batch_size.to_string()),
            ("learning_rate", t.learning_rate.to_string()),
            ("epochs", t.epochs.to_string()),
            ("pretrain_epochs", t.pretrain_epochs.to_string()),
            ("monte_carlo_samples", t.monte_carlo_samples.to_string()),
            ("recon_loss", t.recon_loss.to_string()),
            ("survival_weight", t.survival_weight.to_string()),
            ("gmm_prior", t.gmm_prior.to_string()),
            ("hidden_layers", widths.join(",")),
            ("seed", t.seed.to_string()),
            ("dataset", self.dataset.to_string()),
            ("feature_kind", self.feature_kind.map(|k| k.to_string()).unwrap_or_default()),
            ("train_path", path_text(&self.train_path)),
            ("test_path", path_text(&self.test_path)),
            ("test_fraction", self.test_fraction.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
            ("num_rows", self.num_rows.to_string()),
            ("input_dim", self.input_dim.to_string()),
            ("p_cens", self.p_cens.to_string()),
            ("generator_width", self.generator_width.to_string()),
            ("covariance", self.covariance.to_string()),
            ("low_rank", self.low_rank.to_string()),
            ("mean_time", self.mean_time.to_string()),
            ("surrogate_noise", self.surrogate_noise.to_string()),
            ("mnist_images", path_text(&self.mnist_images)),
            ("mnist_labels", path_text(&self.mnist_labels)),
        ]
    }

    /// Canonical text; [`RunConfig::parse`] reads it back to an equal value.
    pub fn to_text(&self) -> String {
        self.values().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn resolved_feature_kind(&self) -> FeatureKind {
        self.feature_kind.unwrap_or(match self.dataset {
            DatasetKind::Synthetic => FeatureKind::Real,
            DatasetKind::SurvMnist => FeatureKind::Binary,
        })
    }

    pub fn synthetic(&self) -> SyntheticConfig {
        SyntheticConfig {
            num_clusters: self.train.num_clusters,
            num_rows: self.num_rows,
            latent_dim: self.train.latent_dim,
            input_dim: self.input_dim,
            weibull_shape: self.train.weibull_shape,
            p_cens: self.p_cens,
            hidden_width: self.generator_width,
            covariance: self.covariance,
            low_rank: self.low_rank,
            seed: self.train.seed,
        }
    }

    pub fn survmnist(&self) -> SurvMnistConfig {
        SurvMnistConfig {
            num_clusters: self.train.num_clusters,
            p_cens: self.p_cens,
            mean_time: self.mean_time,
            seed: self.train.seed,
        }
    }
}
