//! The three loss conditions behind the class-conditional noise result.

use serde::{Deserialize, Serialize};

use super::draws;
use crate::divergence::gjs_div;
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::par::{map_indices, Exec};
use crate::seed::rng_for;
use crate::simplex::{ProbVec, WeightVec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymReport {
    pub m: usize,
    pub k: usize,
    /// `H(pi)`.
    pub c1: f64,
    /// `H(pi1) + H(1 - pi1)` as scalar entropy terms.
    pub c2: f64,
    /// Divergence of `M` distinct one-hots, when `M <= K`.
    pub c1_numeric: Option<f64>,
    /// Largest `|D(e_i, e_j, ..., e_j) - C2|` over `i != j`.
    pub c2_deviation: f64,
    /// Condition (i): zero at the label, positive elsewhere.
    pub zero_iff_label: bool,
    /// Condition (ii): largest excursion outside `[0, C1]`.
    pub max_violation: f64,
    pub draws: u64,
}

fn h(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Checks the conditions on the unnormalized divergence scale.
pub fn asym_condition_check(spec: &LossSpec, k: usize, m: usize, draws_n: u64, seed: u64, exec: Exec) -> Result<AsymReport> {
    if !spec.kind.is_js_family() {
        return Err(Error::InvalidLossSpec(format!("{} is not a JS-family loss", spec.kind)));
    }
    let w = WeightVec::label_weighted(spec.pi1, m)?;
    let c1 = w.entropy();
    let c2 = h(spec.pi1) + h(w.as_slice()[1..].iter().sum());

    let one_hots: Vec<ProbVec> = (0..k).map(|i| ProbVec::one_hot(k, i)).collect::<Result<_>>()?;
    let c1_numeric = if m <= k {
        let refs: Vec<&ProbVec> = one_hots[..m].iter().collect();
        Some(gjs_div(&w, &refs)?)
    } else {
        None
    };

    let mut c2_deviation: f64 = 0.0;
    let mut zero_iff_label = true;
    for i in 0..k {
        let same: Vec<&ProbVec> = vec![&one_hots[i]; m];
        zero_iff_label &= gjs_div(&w, &same)? == 0.0;
        for j in (0..k).filter(|&j| j != i) {
            let mut ps = vec![&one_hots[i]];
            ps.extend(std::iter::repeat_n(&one_hots[j], m - 1));
            c2_deviation = c2_deviation.max((gjs_div(&w, &ps)? - c2).abs());
        }
    }

    const CHUNK: u64 = 4096;
    let chunks = draws_n.div_ceil(CHUNK) as usize;
    let parts = map_indices(exec, chunks, |c| -> Result<(f64, bool)> {
        let mut rng = rng_for(seed, "asym-conditions", c as u64);
        let mut worst: f64 = 0.0;
        let mut positive = true;
        for _ in 0..CHUNK.min(draws_n - c as u64 * CHUNK) {
            let y = rand::Rng::random_range(&mut rng, 0..k);
            let preds: Vec<ProbVec> = (0..m - 1).map(|_| draws::mixed(&mut rng, k)).collect();
            let mut ps = vec![&one_hots[y]];
            ps.extend(preds.iter());
            let d = gjs_div(&w, &ps)?;
            worst = worst.max(-d).max(d - c1);
            if preds.iter().any(|p| p.as_slice()[y] < 1.0) && d <= 0.0 {
                positive = false;
            }
        }
        Ok((worst, positive))
    });
    let mut max_violation: f64 = 0.0;
    for p in parts {
        let (v, pos) = p?;
        max_violation = max_violation.max(v);
        zero_iff_label &= pos;
    }
    Ok(AsymReport { m, k, c1, c2, c1_numeric, c2_deviation, zero_iff_label, max_violation, draws: draws_n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constants() {
        let r = asym_condition_check(&LossSpec::gjs(1.0 / 3.0, 3), 3, 3, 2000, 0, Exec::Sequential).unwrap();
        assert_abs_diff_eq!(r.c1, 3f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.c2, 0.6365141682948128, epsilon = 1e-15);
        assert_abs_diff_eq!(r.c1_numeric.unwrap(), r.c1, epsilon = 1e-12);
        assert!(r.c2_deviation < 1e-12);
        assert!(r.zero_iff_label && r.max_violation <= 1e-12);
        let r = asym_condition_check(&LossSpec::js(0.3), 4, 2, 100, 0, Exec::Sequential).unwrap();
        assert_abs_diff_eq!(r.c1, r.c2, epsilon = 1e-15);
    }
}
