//! Exhaustive enumeration of the uniform-noise risk bounds on tiny instances.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bounds::bound_constants;
use super::draws;
use super::grid::{grid_size, simplex_grid};
use crate::data::NoiseSpec;
use crate::error::{Error, Result};
use crate::loss::{loss_value, LossSpec};
use crate::seed::rng_for;
use crate::simplex::ProbVec;

pub const ENUMERATION_CAP: u128 = 10_000_000;

/// A finite input space with a clean label per input and an input distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskInstance {
    pub num_inputs: usize,
    pub k: usize,
    pub clean_labels: Vec<usize>,
    pub input_weights: Vec<f64>,
    pub noise: NoiseSpec,
    pub hypothesis_grid_resolution: usize,
}

impl RiskInstance {
    /// Random labels and input weights drawn from `seed`.
    pub fn seeded(num_inputs: usize, k: usize, eta: f64, grid: usize, seed: u64) -> Self {
        let mut rng = rng_for(seed, "risk-instance", 0);
        let clean_labels = (0..num_inputs).map(|_| rng.random_range(0..k)).collect();
        let input_weights = if num_inputs >= 2 {
            draws::flat(&mut rng, num_inputs).into_vec()
        } else {
            vec![1.0; num_inputs]
        };
        RiskInstance {
            num_inputs,
            k,
            clean_labels,
            input_weights,
            noise: NoiseSpec::symmetric_exclusive(eta, seed),
            hypothesis_grid_resolution: grid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate_for_risk_bounds(self.k)?;
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.hypothesis_grid_resolution < 2 {
            return bad("hypothesis grid resolution must be >= 2".into());
        }
        if self.num_inputs == 0 || self.clean_labels.len() != self.num_inputs || self.input_weights.len() != self.num_inputs {
            return bad("inputs, labels and weights disagree in length".into());
        }
        if self.clean_labels.iter().any(|&y| y >= self.k) {
            return bad("clean label out of range".into());
        }
        let s: f64 = self.input_weights.iter().sum();
        if self.input_weights.iter().any(|&w| !(w >= 0.0)) || (s - 1.0).abs() > 1e-9 {
            return bad("input weights must form a distribution".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskGaps {
    /// `R^eta(f*) - R^eta(f*_eta)`.
    pub noisy_gap: f64,
    /// `eta (B_U - B_L) / (K - 1)`.
    pub noisy_bound: f64,
    /// `R(f*) - R(f*_eta)`.
    pub clean_gap: f64,
    /// `-eta (B_U - B_L) / (K - 1 - eta K)`.
    pub clean_bound: f64,
    pub hypotheses: u64,
}

impl RiskGaps {
    pub fn holds(&self, tol: f64) -> bool {
        self.noisy_gap >= -tol && self.noisy_gap <= self.noisy_bound + tol && self.clean_gap <= tol && self.clean_gap >= self.clean_bound - tol
    }
}

/// Finds both risk minimizers over every assignment of grid points to inputs
/// and returns the two gaps beside their bounds. Multi-view losses see the
/// same prediction in every slot.
pub fn risk_bound_enumeration(inst: &RiskInstance, spec: &LossSpec) -> Result<RiskGaps> {
    inst.validate()?;
    let k = inst.k;
    let (b_l, b_u) = bound_constants(spec, k)?;
    let g = grid_size(k, inst.hypothesis_grid_resolution);
    let needed = g.checked_pow(inst.num_inputs as u32).unwrap_or(u128::MAX);
    if needed > ENUMERATION_CAP {
        return Err(Error::ResourceCap { needed, cap: ENUMERATION_CAP });
    }
    let grid = simplex_grid(k, inst.hypothesis_grid_resolution)?;
    let t = inst.noise.transition_matrix(k)?;

    // Per input and grid point: clean and noisy expected loss.
    let slots = spec.num_predictions();
    let mut clean = vec![vec![0.0; grid.len()]; inst.num_inputs];
    let mut noisy = vec![vec![0.0; grid.len()]; inst.num_inputs];
    for (gi, p) in grid.iter().enumerate() {
        let preds: Vec<&ProbVec> = vec![p; slots];
        let per_label: Vec<f64> = (0..k).map(|j| loss_value(spec, j, &preds)).collect::<Result<_>>()?;
        for x in 0..inst.num_inputs {
            let y = inst.clean_labels[x];
            clean[x][gi] = per_label[y];
            noisy[x][gi] = (0..k).map(|j| t[y][j] * per_label[j]).sum();
        }
    }

    let gl = grid.len();
    let total = needed as u64;
    let risk = |table: &[Vec<f64>], mut idx: u64| -> f64 {
        let mut r = 0.0;
        for x in (0..inst.num_inputs).rev() {
            r += inst.input_weights[x] * table[x][(idx % gl as u64) as usize];
            idx /= gl as u64;
        }
        r
    };
    let (mut best_clean, mut f_star) = (f64::INFINITY, 0);
    let (mut best_noisy, mut f_eta) = (f64::INFINITY, 0);
    for idx in 0..total {
        let rc = risk(&clean, idx);
        if rc < best_clean {
            best_clean = rc;
            f_star = idx;
        }
        let rn = risk(&noisy, idx);
        if rn < best_noisy {
            best_noisy = rn;
            f_eta = idx;
        }
    }
    let eta = inst.noise.eta;
    let kf = k as f64;
    Ok(RiskGaps {
        noisy_gap: risk(&noisy, f_star) - risk(&noisy, f_eta),
        noisy_bound: eta * (b_u - b_l) / (kf - 1.0),
        clean_gap: risk(&clean, f_star) - risk(&clean, f_eta),
        clean_bound: -eta * (b_u - b_l) / (kf - 1.0 - eta * kf),
        hypotheses: total,
    })
}
