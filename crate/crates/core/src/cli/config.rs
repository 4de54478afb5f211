//! Run configuration: defaults, then a `key = value` file, then flags.

use std::path::{Path, PathBuf};

use crate::dataset::Quantizer;
use crate::error::{PupError, Result};
use crate::evaluation::{Protocol, DEFAULT_KS};
use crate::model::Variant;
use crate::training::TrainConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub interactions: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    /// Prepared dataset bundle; defaults to `<out>/dataset.json`.
    pub dataset: Option<PathBuf>,
    /// Defaults to `<out>/checkpoint.ckpt`.
    pub checkpoint: Option<PathBuf>,
    pub quantizer: Quantizer,
    pub price_levels: usize,
    pub variant: Variant,
    pub ks: Vec<usize>,
    pub protocol: Protocol,
    pub entropy_threshold: f64,
    pub out: PathBuf,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            train: TrainConfig::default(),
            interactions: None,
            catalog: None,
            dataset: None,
            checkpoint: None,
            quantizer: Quantizer::Uniform,
            price_levels: 10,
            variant: Variant::Pup,
            ks: DEFAULT_KS.to_vec(),
            protocol: Protocol::Standard,
            entropy_threshold: 0.5,
            out: PathBuf::from("out"),
            threads: 1,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| PupError::InvalidArgument(format!("bad value {value:?} for {key}")))
}

fn parse_pair(key: &str, value: &str, sep: char) -> Result<(usize, usize)> {
    let (a, b) = value.split_once(sep).ok_or_else(|| {
        PupError::InvalidArgument(format!("{key} expects a{sep}b, got {value:?}"))
    })?;
    Ok((parse(key, a.trim())?, parse(key, b.trim())?))
}

impl RunConfig {
    /// Sets one option from its textual form. Keys match the config file.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let t = &mut self.train;
        match key {
            "interactions" => self.interactions = Some(value.into()),
            "catalog" => self.catalog = Some(value.into()),
            "dataset" => self.dataset = Some(value.into()),
            "checkpoint" => self.checkpoint = Some(value.into()),
            "out" => self.out = value.into(),
            "quantizer" => self.quantizer = value.parse()?,
            "levels" => self.price_levels = parse(key, value)?,
            "variant" => self.variant = value.parse()?,
            "k" => {
                self.ks = value
                    .split(',')
                    .map(|k| parse(key, k.trim()))
                    .collect::<Result<Vec<usize>>>()?
            }
            "protocol" => self.protocol = value.parse()?,
            "entropy_threshold" => self.entropy_threshold = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            "seed" => t.seed = parse(key, value)?,
            "alpha" => t.alpha = parse(key, value)?,
            "total_dim" => t.total_dim = parse(key, value)?,
            "dim_split" => {
                t.dim_split = parse_pair(key, value, '/')?;
                t.total_dim = t.dim_split.0 + t.dim_split.1;
            }
            "learning_rate" => t.learning_rate = parse(key, value)?,
            "batch_size" => t.batch_size = parse(key, value)?,
            "epochs" => t.epochs = parse(key, value)?,
            "neg_rate" => t.neg_rate = parse(key, value)?,
            "lambda_reg" => t.lambda_reg = parse(key, value)?,
            "dropout_p" => t.dropout_p = parse(key, value)?,
            "layers" => t.layers = parse(key, value)?,
            "lr_decay_epochs" => {
                t.lr_decay_epochs = if value == "auto" {
                    None
                } else {
                    Some(parse_pair(key, value, ',')?)
                }
            }
            other => {
                return Err(PupError::InvalidArgument(format!(
                    "unknown config key {other:?}"
                )))
            }
        }
        Ok(())
    }

    /// Applies a `key = value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                PupError::InvalidArgument(format!("config line {}: expected key = value", no + 1))
            })?;
            self.apply(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| PupError::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.dataset
            .clone()
            .unwrap_or_else(|| self.out.join("dataset.json"))
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.checkpoint
            .clone()
            .unwrap_or_else(|| self.out.join("checkpoint.ckpt"))
    }

    /// Options that determine a trained model.
    pub fn model_echo(&self) -> Vec<(String, String)> {
        let t = &self.train;
        let decay = match t.lr_decay_epochs {
            Some((a, b)) => format!("{a},{b}"),
            None => "auto".into(),
        };
        [
            ("variant", self.variant.to_string()),
            ("seed", t.seed.to_string()),
            ("dim_split", format!("{}/{}", t.dim_split.0, t.dim_split.1)),
            ("learning_rate", t.learning_rate.to_string()),
            ("batch_size", t.batch_size.to_string()),
            ("epochs", t.epochs.to_string()),
            ("neg_rate", t.neg_rate.to_string()),
            ("lambda_reg", t.lambda_reg.to_string()),
            ("alpha", t.alpha.to_string()),
            ("dropout_p", t.dropout_p.to_string()),
            ("layers", t.layers.to_string()),
            ("lr_decay_epochs", decay),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// Every option, for run manifests.
    pub fn echo(&self) -> Vec<(String, String)> {
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map_or(String::new(), |p| p.display().to_string())
        };
        let ks: Vec<String> = self.ks.iter().map(usize::to_string).collect();
        let mut out: Vec<(String, String)> = [
            ("interactions", path(&self.interactions)),
            ("catalog", path(&self.catalog)),
            ("dataset", self.dataset_path().display().to_string()),
            ("checkpoint", self.checkpoint_path().display().to_string()),
            ("out", self.out.display().to_string()),
            ("quantizer", self.quantizer.to_string()),
            ("levels", self.price_levels.to_string()),
            ("k", ks.join(",")),
            ("protocol", self.protocol.to_string()),
            ("entropy_threshold", self.entropy_threshold.to_string()),
            ("threads", self.threads.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        out.extend(self.model_echo());
        out
    }
}
