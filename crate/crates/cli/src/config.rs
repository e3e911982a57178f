use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use jsloss::data::{
    gen_blobs, inject_noise, load_cifar10_binary, split_with_test, Dataset, NoiseKind, NoiseReport, NoiseSpec, ViewSpec,
};
use jsloss::par::Exec;
use jsloss::seed::derive_seed;
use jsloss::train::{LrDrop, TrainConfig};
use jsloss::LossSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// One experiment. Only `loss.kind` is required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every stochastic component derives its own stream from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Write measured epoch times; off keeps metrics files byte-identical across runs.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub dataset: DatasetBlock,
    #[serde(default)]
    pub noise: NoiseBlock,
    pub loss: LossSpec,
    #[serde(default)]
    pub train: TrainBlock,
    #[serde(default)]
    pub views: ViewsBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs/default")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Blobs,
    Cifar10,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetBlock {
    pub source: Source,
    pub k: usize,
    pub n_per_class: usize,
    pub dim: usize,
    pub spread: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<PathBuf>,
    pub normalize: bool,
    pub val_fraction: f64,
    pub test_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_seed: Option<u64>,
}

impl Default for DatasetBlock {
    fn default() -> Self {
        DatasetBlock {
            source: Source::Blobs,
            k: 4,
            n_per_class: 500,
            dim: 24,
            spread: 0.33,
            paths: Vec::new(),
            normalize: true,
            val_fraction: 0.1,
            test_fraction: 0.3,
            seed: None,
            split_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseBlock {
    pub kind: NoiseKind,
    pub eta: f64,
    /// Class-to-class map; TOML keys are strings, e.g. `pair_map = { "9" = 1 }`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_map: Option<BTreeMap<String, usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for NoiseBlock {
    fn default() -> Self {
        NoiseBlock { kind: NoiseKind::SymmetricResample, eta: 0.0, pair_map: None, groups: None, seed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainBlock {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Defaults to x0.1 at 50% and 75% of `epochs`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_drops: Option<Vec<LrDrop>>,
    pub shards: usize,
    pub exec: Exec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for TrainBlock {
    fn default() -> Self {
        TrainBlock {
            hidden: vec![128, 128],
            epochs: 100,
            batch_size: 64,
            lr: 0.1,
            momentum: 0.9,
            weight_decay: 1e-3,
            lr_drops: None,
            shards: 1,
            exec: Exec::Parallel,
            seed: None,
        }
    }
}

/// Augmentation settings; the number of views follows the loss.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ViewsBlock {
    pub jitter_sigma: f64,
    pub mask_prob: f64,
    pub include_clean: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "pi1")]
    Pi1,
    #[serde(rename = "M", alias = "m")]
    M,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "jitter")]
    Jitter,
}

impl std::str::FromStr for Axis {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pi1" => Ok(Axis::Pi1),
            "M" | "m" => Ok(Axis::M),
            "eta" => Ok(Axis::Eta),
            "jitter" => Ok(Axis::Jitter),
            _ => Err(CliError::Config(format!("unknown sweep axis `{s}` (expected pi1, M, eta or jitter)"))),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Pi1 => "pi1",
            Axis::M => "M",
            Axis::Eta => "eta",
            Axis::Jitter => "jitter",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub axis: Axis,
    pub values: Vec<f64>,
}

/// Seeds actually used, after defaults are derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub dataset: u64,
    pub split: u64,
    pub noise: u64,
    pub train: u64,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn seeds(&self) -> Seeds {
        let m = self.seed;
        Seeds {
            master: m,
            dataset: self.dataset.seed.unwrap_or_else(|| derive_seed(m, "dataset", 0)),
            split: self.dataset.split_seed.unwrap_or_else(|| derive_seed(m, "split", 0)),
            noise: self.noise.seed.unwrap_or_else(|| derive_seed(m, "noise", 0)),
            train: self.train.seed.unwrap_or_else(|| derive_seed(m, "train", 0)),
        }
    }

    /// The same experiment with every derived seed and default schedule written out.
    pub fn resolved(&self) -> Result<Self> {
        let seeds = self.seeds();
        let mut r = self.clone();
        r.dataset.seed = Some(seeds.dataset);
        r.dataset.split_seed = Some(seeds.split);
        r.noise.seed = Some(seeds.noise);
        r.train.seed = Some(seeds.train);
        r.train.lr_drops = Some(self.train_config()?.lr_drops);
        Ok(r)
    }

    pub fn noise_spec(&self) -> Result<NoiseSpec> {
        let pair_map = match &self.noise.pair_map {
            None => None,
            Some(m) => Some(
                m.iter()
                    .map(|(k, &v)| {
                        k.trim().parse::<usize>().map(|k| (k, v)).map_err(|_| CliError::Config(format!("noise.pair_map: key `{k}` is not a class index")))
                    })
                    .collect::<Result<BTreeMap<_, _>>>()?,
            ),
        };
        Ok(NoiseSpec { kind: self.noise.kind, eta: self.noise.eta, pair_map, groups: self.noise.groups.clone(), seed: self.seeds().noise })
    }

    pub fn view_spec(&self) -> ViewSpec {
        let v = self.views;
        ViewSpec { num_views: 1, jitter_sigma: v.jitter_sigma, mask_prob: v.mask_prob, include_clean: v.include_clean }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let t = &self.train;
        let lr_drops = t.lr_drops.clone().unwrap_or_else(|| {
            vec![LrDrop { epoch: t.epochs / 2, factor: 0.1 }, LrDrop { epoch: t.epochs * 3 / 4, factor: 0.1 }]
        });
        let cfg = TrainConfig {
            loss: self.loss,
            hidden: t.hidden.clone(),
            epochs: t.epochs,
            batch_size: t.batch_size,
            lr: t.lr,
            momentum: t.momentum,
            weight_decay: t.weight_decay,
            lr_drops,
            views: self.view_spec(),
            seed: self.seeds().train,
            shards: t.shards,
            exec: t.exec,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Generates or loads the data, splits it, then corrupts training labels.
    pub fn build_dataset(&self) -> Result<(Dataset, NoiseReport)> {
        let d = &self.dataset;
        let seeds = self.seeds();
        let raw = match d.source {
            Source::Blobs => gen_blobs(d.k, d.n_per_class, d.dim, d.spread, seeds.dataset)?,
            Source::Cifar10 => {
                if d.paths.is_empty() {
                    return Err(CliError::Config("dataset.paths: cifar10 needs at least one file".into()));
                }
                load_cifar10_binary(&d.paths, d.normalize)?
            }
        };
        let ds = split_with_test(&raw, d.val_fraction, d.test_fraction, seeds.split)?;
        let noise = self.noise_spec()?;
        noise.validate(ds.k)?;
        Ok(inject_noise(&ds, &noise)?)
    }

    /// Number of classes the dataset will have, when known without loading it.
    pub fn num_classes(&self) -> Option<usize> {
        match self.dataset.source {
            Source::Blobs => Some(self.dataset.k),
            Source::Cifar10 => Some(10),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use jsloss::LossKind;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::parse("[loss]\nkind = \"js\"\n").unwrap();
        assert_eq!(c.loss.kind, LossKind::Js);
        assert_eq!(c.dataset, DatasetBlock::default());
        assert_eq!(c.train_config().unwrap().lr_drops.len(), 2);
    }

    #[test]
    fn missing_kind_names_the_field() {
        let e = ExperimentConfig::parse("[loss]\npi1 = 0.3\n").unwrap_err().to_string();
        assert!(e.contains("kind"), "{e}");
        let e = ExperimentConfig::parse("seed = 3\n").unwrap_err().to_string();
        assert!(e.contains("loss"), "{e}");
    }

    #[test]
    fn unknown_fields_are_rejected_with_location() {
        let e = ExperimentConfig::parse("[loss]\nkind = \"js\"\n\n[train]\nepoch = 3\n").unwrap_err().to_string();
        assert!(e.contains("epoch") && e.contains("line 5"), "{e}");
    }

    #[test]
    fn seeds_fan_out_from_master() {
        let a = ExperimentConfig::parse("seed = 1\n[loss]\nkind = \"ce\"\n").unwrap().seeds();
        let b = ExperimentConfig::parse("seed = 2\n[loss]\nkind = \"ce\"\n").unwrap().seeds();
        assert_ne!(a.dataset, b.dataset);
        assert_ne!(a.noise, a.train);
        let c = ExperimentConfig::parse("seed = 1\n[noise]\nseed = 5\n[loss]\nkind = \"ce\"\n").unwrap().seeds();
        assert_eq!((c.noise, c.dataset), (5, a.dataset));
    }

    #[test]
    fn pair_map_keys_parse() {
        let c = ExperimentConfig::parse("[noise]\nkind = \"asymmetric-pairmap\"\neta = 0.3\npair_map = { \"0\" = 1 }\n[loss]\nkind = \"ce\"\n").unwrap();
        assert_eq!(c.noise_spec().unwrap().pair_map.unwrap()[&0], 1);
        let c = ExperimentConfig::parse("[noise]\npair_map = { \"x\" = 1 }\n[loss]\nkind = \"ce\"\n").unwrap();
        assert!(c.noise_spec().unwrap_err().to_string().contains("pair_map"));
    }

    #[test]
    fn resolved_config_is_equivalent() {
        let c = ExperimentConfig::parse("seed = 4\n[loss]\nkind = \"gjs\"\n").unwrap();
        let r = c.resolved().unwrap();
        assert_eq!(r.seeds(), c.seeds());
        assert_eq!(r.train_config().unwrap(), c.train_config().unwrap());
        assert_eq!(ExperimentConfig::parse(&r.to_toml()).unwrap(), r);
    }

    #[test]
    fn toml_roundtrip() {
        let c = ExperimentConfig::parse("seed = 9\n[loss]\nkind = \"gjs\"\nm = 3\n[sweep]\naxis = \"M\"\nvalues = [2, 3]\n").unwrap();
        assert_eq!(ExperimentConfig::parse(&c.to_toml()).unwrap(), c);
    }
}
