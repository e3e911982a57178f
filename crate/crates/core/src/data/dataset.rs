use std::path::Path;

use serde::{Deserialize, Serialize};

use super::noise::NoiseSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

/// Where a dataset came from, kept alongside the data on export.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub seed: Option<u64>,
    pub noise: Option<NoiseSpec>,
    pub split_seed: Option<u64>,
}

/// Row-major features with observed and clean labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub k: usize,
    pub dim: usize,
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
    pub clean_labels: Vec<usize>,
    pub split: Vec<SplitTag>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl Dataset {
    /// All rows start tagged `Train` with `labels == clean_labels`.
    pub fn new(k: usize, dim: usize, features: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        let ds = Dataset {
            k,
            dim,
            features,
            clean_labels: labels.clone(),
            labels,
            split: vec![SplitTag::Train; n],
            provenance: Provenance::default(),
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDataset(m));
        let n = self.labels.len();
        if n == 0 {
            return bad("dataset has no rows".into());
        }
        if self.k < 2 {
            return bad(format!("K = {} < 2", self.k));
        }
        if self.dim == 0 || self.features.len() != n * self.dim {
            return bad(format!("{} feature values for {} rows of dim {}", self.features.len(), n, self.dim));
        }
        if self.clean_labels.len() != n || self.split.len() != n {
            return bad("label, clean label and split lengths differ".into());
        }
        if let Some(&y) = self.labels.iter().chain(&self.clean_labels).find(|&&y| y >= self.k) {
            return bad(format!("label {y} outside [0, {})", self.k));
        }
        if self.features.iter().any(|v| !v.is_finite()) {
            return bad("non-finite feature".into());
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows_with(&self, tag: SplitTag) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.split[i] == tag).collect()
    }

    pub fn class_counts(&self, labels: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.k];
        for &y in labels {
            c[y] += 1;
        }
        c
    }

    /// Concatenates `other` below `self`, keeping each row's tag.
    pub fn append(&mut self, other: &Dataset) -> Result<()> {
        if other.k != self.k || other.dim != self.dim {
            return Err(Error::InvalidDataset("appending dataset of different shape".into()));
        }
        self.features.extend_from_slice(&other.features);
        self.labels.extend_from_slice(&other.labels);
        self.clean_labels.extend_from_slice(&other.clean_labels);
        self.split.extend_from_slice(&other.split);
        Ok(())
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(f, self)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        let ds: Dataset = serde_json::from_reader(f)?;
        ds.validate()?;
        Ok(ds)
    }
}
