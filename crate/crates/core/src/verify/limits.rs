//! Convergence of the JS losses to CE and MAE at the ends of the `pi1` range.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::draws;
use crate::error::Result;
use crate::loss::{loss_baseline, loss_gjs, loss_js, LossKind, LossSpec};
use crate::seed::rng_for;
use crate::simplex::ProbVec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    /// `|L_JS - CE| / CE` as `pi1 -> 0`.
    CeLimit,
    /// `|L_JS - MAE|` as `pi1 -> 1`.
    MaeLimit,
    /// `|L_GJS - MAE(e_y, mean)|` as `pi1 -> 1`, with `M = 3`.
    GjsMaeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitRung {
    pub pi1: f64,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTable {
    pub kind: LimitKind,
    pub rungs: Vec<LimitRung>,
}

impl LimitTable {
    pub fn monotone(&self) -> bool {
        self.rungs.windows(2).all(|w| w[1].max_deviation <= w[0].max_deviation)
    }

    pub fn last(&self) -> f64 {
        self.rungs.last().map_or(0.0, |r| r.max_deviation)
    }
}

pub const CE_LADDER: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
pub const MAE_LADDER: [f64; 5] = [0.9, 0.99, 0.999, 0.9999, 1.0 - 1e-6];
/// Entry floor of the probed predictions.
pub const PROBE_FLOOR: f64 = 0.1;

struct Trial {
    y: usize,
    preds: Vec<ProbVec>,
}

fn trials(kind: LimitKind, n: usize, seed: u64) -> Vec<Trial> {
    let mut rng = rng_for(seed, "limit-probe", 0);
    let views = if kind == LimitKind::GjsMaeLimit { 2 } else { 1 };
    (0..n)
        .map(|t| {
            let k = 2 + t % 9;
            Trial { y: rng.random_range(0..k), preds: (0..views).map(|_| draws::floored(&mut rng, k, PROBE_FLOOR)).collect() }
        })
        .collect()
}

fn deviation(kind: LimitKind, pi1: f64, t: &Trial) -> Result<f64> {
    let p = &t.preds[0];
    Ok(match kind {
        LimitKind::CeLimit => {
            let ce = loss_baseline(&LossSpec::new(LossKind::Ce), t.y, p)?;
            let js = loss_js(&LossSpec::js(pi1), t.y, p)?;
            if ce == 0.0 && js == 0.0 {
                0.0
            } else {
                (js - ce).abs() / ce
            }
        }
        LimitKind::MaeLimit => {
            (loss_js(&LossSpec::js(pi1), t.y, p)? - loss_baseline(&LossSpec::new(LossKind::Mae), t.y, p)?).abs()
        }
        LimitKind::GjsMaeLimit => {
            let refs: Vec<&ProbVec> = t.preds.iter().collect();
            let k = p.len();
            let mean: Vec<f64> = (0..k).map(|c| refs.iter().map(|q| q[c]).sum::<f64>() / refs.len() as f64).collect();
            let mae = 0.5 * crate::loss::l1_to_one_hot(&mean, t.y);
            (loss_gjs(&LossSpec::gjs(pi1, 3), t.y, &refs)? - mae).abs()
        }
    })
}

/// Largest deviation per rung over the same `trials` random `(y, p)`, each
/// prediction entry at least [`PROBE_FLOOR`] and `K` cycling through `2..=10`.
pub fn limit_convergence_probe(kind: LimitKind, ladder: &[f64], n_trials: usize, seed: u64) -> Result<LimitTable> {
    let ts = trials(kind, n_trials, seed);
    let rungs = ladder
        .iter()
        .map(|&pi1| {
            let mut worst: f64 = 0.0;
            for t in &ts {
                worst = worst.max(deviation(kind, pi1, t)?);
            }
            Ok(LimitRung { pi1, max_deviation: worst })
        })
        .collect::<Result<_>>()?;
    Ok(LimitTable { kind, rungs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladders_converge() {
        let ce = limit_convergence_probe(LimitKind::CeLimit, &CE_LADDER, 500, 1).unwrap();
        assert!(ce.monotone() && ce.last() < 0.01, "{ce:?}");
        let mae = limit_convergence_probe(LimitKind::MaeLimit, &MAE_LADDER, 500, 1).unwrap();
        assert!(mae.monotone() && mae.last() < 0.0485, "{mae:?}");
        let gjs = limit_convergence_probe(LimitKind::GjsMaeLimit, &MAE_LADDER, 500, 1).unwrap();
        assert!(gjs.monotone(), "{gjs:?}");
    }

    #[test]
    fn degenerate_prediction_has_no_deviation() {
        let t = Trial { y: 1, preds: vec![ProbVec::one_hot(3, 1).unwrap()] };
        for pi1 in MAE_LADDER {
            assert_eq!(deviation(LimitKind::MaeLimit, pi1, &t).unwrap(), 0.0);
        }
    }
}
