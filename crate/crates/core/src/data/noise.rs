use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, SplitTag};
use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// With probability `eta` the label is redrawn uniformly over all `K` classes.
    SymmetricResample,
    /// With probability `eta` the label moves uniformly to one of the other classes.
    SymmetricExclusive,
    /// With probability `eta` a mapped class moves to its image.
    AsymmetricPairmap,
    /// With probability `eta` a class moves to the next member of its group.
    AsymmetricCycle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    #[serde(default)]
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_map: Option<BTreeMap<usize, usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    pub fn symmetric_resample(eta: f64, seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::SymmetricResample, eta, pair_map: None, groups: None, seed }
    }

    pub fn symmetric_exclusive(eta: f64, seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::SymmetricExclusive, ..Self::symmetric_resample(eta, seed) }
    }

    pub fn pairmap(eta: f64, map: BTreeMap<usize, usize>, seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::AsymmetricPairmap, pair_map: Some(map), ..Self::symmetric_resample(eta, seed) }
    }

    pub fn cycle(eta: f64, groups: Vec<Vec<usize>>, seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::AsymmetricCycle, groups: Some(groups), ..Self::symmetric_resample(eta, seed) }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if !(0.0..1.0).contains(&self.eta) {
            return Err(Error::InvalidNoiseRate { eta: self.eta, reason: "must lie in [0, 1)".into() });
        }
        let spec_err = |m: String| Err(Error::InvalidNoiseSpec(m));
        match self.kind {
            NoiseKind::AsymmetricPairmap => {
                let Some(map) = &self.pair_map else {
                    return spec_err("asymmetric-pairmap needs pair_map".into());
                };
                if let Some((a, b)) = map.iter().find(|(a, b)| **a >= k || **b >= k) {
                    return spec_err(format!("pair {a} -> {b} outside [0, {k})"));
                }
            }
            NoiseKind::AsymmetricCycle => {
                let Some(groups) = &self.groups else {
                    return spec_err("asymmetric-cycle needs groups".into());
                };
                let mut seen = vec![false; k];
                for &c in groups.iter().flatten() {
                    if c >= k {
                        return spec_err(format!("group member {c} outside [0, {k})"));
                    }
                    if std::mem::replace(&mut seen[c], true) {
                        return spec_err(format!("class {c} appears in two groups"));
                    }
                }
            }
            _ => {
                if self.pair_map.is_some() {
                    return spec_err("pair_map given for a non-pairmap kind".into());
                }
            }
        }
        Ok(())
    }

    /// Checks the precondition `eta < 1 - 1/K` of the uniform-noise risk bounds.
    pub fn validate_for_risk_bounds(&self, k: usize) -> Result<()> {
        self.validate(k)?;
        if self.kind != NoiseKind::SymmetricExclusive {
            return Err(Error::InvalidNoiseSpec("risk bounds use symmetric-exclusive noise".into()));
        }
        let limit = 1.0 - 1.0 / k as f64;
        if self.eta >= limit {
            return Err(Error::InvalidNoiseRate { eta: self.eta, reason: format!("needs eta < 1 - 1/K = {limit}") });
        }
        Ok(())
    }

    fn cycle_next(&self, k: usize) -> Vec<usize> {
        let mut next: Vec<usize> = (0..k).collect();
        for g in self.groups.iter().flatten() {
            for (i, &c) in g.iter().enumerate() {
                next[c] = g[(i + 1) % g.len()];
            }
        }
        next
    }

    /// Row-stochastic matrix `T[i][j] = P(observed j | clean i)`.
    pub fn transition_matrix(&self, k: usize) -> Result<Vec<Vec<f64>>> {
        self.validate(k)?;
        let eta = self.eta;
        let mut t = vec![vec![0.0; k]; k];
        match self.kind {
            NoiseKind::SymmetricResample => {
                for (i, row) in t.iter_mut().enumerate() {
                    row.iter_mut().for_each(|v| *v = eta / k as f64);
                    row[i] += 1.0 - eta;
                }
            }
            NoiseKind::SymmetricExclusive => {
                for (i, row) in t.iter_mut().enumerate() {
                    row.iter_mut().for_each(|v| *v = eta / (k - 1) as f64);
                    row[i] = 1.0 - eta;
                }
            }
            NoiseKind::AsymmetricPairmap | NoiseKind::AsymmetricCycle => {
                let next = self.targets(k);
                for (i, row) in t.iter_mut().enumerate() {
                    row[i] += 1.0 - eta;
                    row[next[i]] += eta;
                }
            }
        }
        Ok(t)
    }

    fn targets(&self, k: usize) -> Vec<usize> {
        match self.kind {
            NoiseKind::AsymmetricPairmap => {
                let mut next: Vec<usize> = (0..k).collect();
                for (&a, &b) in self.pair_map.iter().flatten() {
                    next[a] = b;
                }
                next
            }
            _ => self.cycle_next(k),
        }
    }

    /// Expected fraction of labels that change.
    pub fn expected_change_rate(&self, k: usize) -> Result<f64> {
        let t = self.transition_matrix(k)?;
        Ok(t.iter().enumerate().map(|(i, r)| 1.0 - r[i]).sum::<f64>() / k as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub rows_considered: usize,
    pub changed: usize,
    pub changed_fraction: f64,
    pub expected_fraction: f64,
    /// `counts[i][j]`: training rows with clean label `i` observed as `j`.
    pub confusion: Vec<Vec<usize>>,
}

/// Corrupts the labels of `Train` rows once; validation and test rows keep clean labels.
pub fn inject_noise(ds: &Dataset, spec: &NoiseSpec) -> Result<(Dataset, NoiseReport)> {
    spec.validate(ds.k)?;
    let k = ds.k;
    let mut out = ds.clone();
    let mut rng = rng_for(spec.seed, "label-noise", 0);
    let next = spec.targets(k);
    let mut confusion = vec![vec![0; k]; k];
    let mut considered = 0;
    let mut changed = 0;
    for i in 0..ds.len() {
        if ds.split[i] != SplitTag::Train {
            continue;
        }
        considered += 1;
        let clean = ds.clean_labels[i];
        let mut y = clean;
        if spec.eta > 0.0 && rng.random::<f64>() < spec.eta {
            y = match spec.kind {
                NoiseKind::SymmetricResample => rng.random_range(0..k),
                NoiseKind::SymmetricExclusive => {
                    let j = rng.random_range(0..k - 1);
                    if j >= clean {
                        j + 1
                    } else {
                        j
                    }
                }
                _ => next[clean],
            };
        }
        if y != clean {
            changed += 1;
        }
        confusion[clean][y] += 1;
        out.labels[i] = y;
    }
    out.provenance.noise = Some(spec.clone());
    let report = NoiseReport {
        rows_considered: considered,
        changed,
        changed_fraction: if considered > 0 { changed as f64 / considered as f64 } else { 0.0 },
        expected_fraction: spec.expected_change_rate(k)?,
        confusion,
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labelled(k: usize, n: usize) -> Dataset {
        let labels: Vec<usize> = (0..n).map(|i| i % k).collect();
        Dataset::new(k, 1, vec![0.0; n], labels).unwrap()
    }

    fn within_3_sigma(observed: f64, p: f64, n: usize) -> bool {
        (observed - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt()
    }

    #[test]
    fn zero_rate_is_identity() {
        let ds = labelled(4, 100);
        let (out, rep) = inject_noise(&ds, &NoiseSpec::symmetric_resample(0.0, 1)).unwrap();
        assert_eq!(out.labels, ds.labels);
        assert_eq!(rep.changed, 0);
    }

    #[test]
    fn symmetric_rates_match_expectation() {
        let ds = labelled(10, 100_000);
        let (out, rep) = inject_noise(&ds, &NoiseSpec::symmetric_resample(0.4, 5)).unwrap();
        assert!((rep.expected_fraction - 0.36).abs() < 1e-12);
        assert!(within_3_sigma(rep.changed_fraction, 0.36, ds.len()));
        assert_eq!(out.clean_labels, ds.clean_labels);
        let (_, rep) = inject_noise(&ds, &NoiseSpec::symmetric_exclusive(0.4, 5)).unwrap();
        assert!(within_3_sigma(rep.changed_fraction, 0.40, ds.len()));
    }

    #[test]
    fn deterministic_under_seed() {
        let ds = labelled(5, 1000);
        let spec = NoiseSpec::symmetric_resample(0.5, 77);
        assert_eq!(inject_noise(&ds, &spec).unwrap(), inject_noise(&ds, &spec).unwrap());
    }

    #[test]
    fn pairmap_moves_only_along_map() {
        let ds = labelled(10, 10_000);
        let map = BTreeMap::from([(9, 1), (2, 0), (3, 5), (5, 3), (4, 7)]);
        let (out, _) = inject_noise(&ds, &NoiseSpec::pairmap(0.4, map.clone(), 3)).unwrap();
        for (c, y) in ds.clean_labels.iter().zip(&out.labels) {
            assert!(c == y || map.get(c) == Some(y));
        }
        assert!(NoiseSpec { pair_map: None, ..NoiseSpec::pairmap(0.4, map, 3) }.validate(10).is_err());
    }

    #[test]
    fn cycle_preserves_groups() {
        let ds = labelled(6, 6000);
        let groups = vec![vec![0, 1, 2], vec![3, 4], vec![5]];
        let (out, rep) = inject_noise(&ds, &NoiseSpec::cycle(0.3, groups.clone(), 2)).unwrap();
        let group_of = |c: usize| groups.iter().position(|g| g.contains(&c)).unwrap();
        for (c, y) in ds.clean_labels.iter().zip(&out.labels) {
            assert_eq!(group_of(*c), group_of(*y));
        }
        assert!(out.labels.iter().zip(&ds.labels).filter(|(a, b)| a != b).all(|(a, _)| *a != 5));
        assert!(rep.changed > 0);
        assert!(NoiseSpec::cycle(0.3, vec![vec![0, 1], vec![1]], 0).validate(6).is_err());
    }

    #[test]
    fn transition_rows_are_stochastic() {
        let specs = [
            NoiseSpec::symmetric_resample(0.3, 0),
            NoiseSpec::symmetric_exclusive(0.3, 0),
            NoiseSpec::pairmap(0.3, BTreeMap::from([(0, 1)]), 0),
            NoiseSpec::cycle(0.3, vec![vec![0, 1, 2]], 0),
        ];
        for s in &specs {
            for row in s.transition_matrix(4).unwrap() {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn risk_bound_precondition() {
        assert!(NoiseSpec::symmetric_exclusive(0.49, 0).validate_for_risk_bounds(2).is_ok());
        assert!(NoiseSpec::symmetric_exclusive(0.5, 0).validate_for_risk_bounds(2).is_err());
        assert!(NoiseSpec::symmetric_resample(0.1, 0).validate_for_risk_bounds(2).is_err());
        assert!(NoiseSpec::symmetric_resample(1.0, 0).validate(2).is_err());
    }
}
