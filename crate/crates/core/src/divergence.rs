//! The Jensen-Shannon family and the KL-based divergences it is dissected into.
//!
//! `JS_pi` and `GJS_pi` are evaluated in entropy form, `H(sum pi_i p_i) - sum
//! pi_i H(p_i)`, which never needs absolute continuity. The weighted-KL form
//! is kept as a cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{check_same_len, entropy, kl_div, mixture, xlnx_neg, ProbVec, WeightVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceKind {
    Kl,
    KlReverse,
    Jeffreys,
    K,
    KPrime,
    Js,
    Gjs,
}

impl DivergenceKind {
    pub const ALL: [DivergenceKind; 7] = [
        DivergenceKind::Kl,
        DivergenceKind::KlReverse,
        DivergenceKind::Jeffreys,
        DivergenceKind::K,
        DivergenceKind::KPrime,
        DivergenceKind::Js,
        DivergenceKind::Gjs,
    ];

    /// Symmetric under argument swap (JS with equal weights).
    pub fn is_symmetric(self) -> bool {
        matches!(self, DivergenceKind::Jeffreys | DivergenceKind::Js | DivergenceKind::Gjs)
    }

    pub fn is_bounded(self) -> bool {
        matches!(
            self,
            DivergenceKind::K | DivergenceKind::KPrime | DivergenceKind::Js | DivergenceKind::Gjs
        )
    }
}

/// `JS_pi(p1, p2) = H(m) - pi1 H(p1) - pi2 H(p2)`.
pub fn js_div(w: &WeightVec, p1: &ProbVec, p2: &ProbVec) -> Result<f64> {
    if w.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: w.len() });
    }
    gjs_div(w, &[p1, p2])
}

/// `pi1 KL(p1 || m) + pi2 KL(p2 || m)`.
pub fn js_div_kl_form(w: &WeightVec, p1: &ProbVec, p2: &ProbVec) -> Result<f64> {
    if w.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: w.len() });
    }
    gjs_div_kl_form(w, &[p1, p2])
}

pub fn gjs_div(w: &WeightVec, ps: &[&ProbVec]) -> Result<f64> {
    let m = mixture(w, ps)?;
    let inner: f64 = w.as_slice().iter().zip(ps).map(|(&wi, p)| wi * entropy(p)).sum();
    Ok((entropy(&m) - inner).max(0.0))
}

pub fn gjs_div_kl_form(w: &WeightVec, ps: &[&ProbVec]) -> Result<f64> {
    let m = mixture(w, ps)?;
    let mut acc = 0.0;
    for (&wi, p) in w.as_slice().iter().zip(ps) {
        acc += wi * kl_div(p, &m)?;
    }
    Ok(acc)
}

/// `f(t) = h(pi1 t + 1 - pi1) - pi1 h(t)` with `h(x) = -x ln x`; convex, `f(1) = 0`.
pub fn js_f_generator(pi1: f64, t: f64) -> f64 {
    xlnx_neg(pi1 * t + 1.0 - pi1) - pi1 * xlnx_neg(t)
}

/// `JS_pi(p1, p2) = sum_k p2_k f(p1_k / p2_k)`.
pub fn js_div_f_form(pi1: f64, p1: &ProbVec, p2: &ProbVec) -> Result<f64> {
    check_same_len(p1.len(), p2.len())?;
    let mut acc = 0.0;
    for (&a, &b) in p1.as_slice().iter().zip(p2.as_slice()) {
        acc += match (a > 0.0, b > 0.0) {
            (_, true) => b * js_f_generator(pi1, a / b),
            // 0 f(0/0) = 0
            (false, false) => 0.0,
            // lim_{b -> 0} b f(a / b)
            (true, false) => -pi1 * a * pi1.ln(),
        };
    }
    Ok(acc)
}

/// `K(p, q) = KL(p || (p + q) / 2)`; finite for all inputs.
pub fn k_div(p: &ProbVec, q: &ProbVec) -> Result<f64> {
    check_same_len(p.len(), q.len())?;
    let mut acc = 0.0;
    for (&a, &b) in p.as_slice().iter().zip(q.as_slice()) {
        if a > 0.0 {
            acc += a * (2.0 * a / (a + b)).ln();
        }
    }
    Ok(acc.max(0.0))
}

/// `K'(p, q) = KL(q || (p + q) / 2)`.
pub fn k_prime_div(p: &ProbVec, q: &ProbVec) -> Result<f64> {
    k_div(q, p)
}

/// `(KL(p || q) + KL(q || p)) / 2`.
pub fn jeffreys_div(p: &ProbVec, q: &ProbVec) -> Result<f64> {
    Ok(0.5 * (kl_div(p, q)? + kl_div(q, p)?))
}

/// The two pieces of a GJS divergence with a one-hot label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GjsDecomposition {
    /// `JS_{pi'}(e_y, m_{>1})` with `pi' = [pi1, 1 - pi1]`.
    pub js_term: f64,
    /// `(1 - pi1) GJS_{pi''}(p_2, ..., p_M)`.
    pub consistency_term: f64,
    /// `m_{>1} = sum_{j>=2} pi_j p_j / (1 - pi1)`.
    pub mean_prediction: ProbVec,
}

impl GjsDecomposition {
    pub fn total(&self) -> f64 {
        self.js_term + self.consistency_term
    }
}

pub fn decompose_gjs(w: &WeightVec, label: &ProbVec, preds: &[&ProbVec]) -> Result<GjsDecomposition> {
    if w.len() < 3 {
        return Err(Error::InvalidWeights(format!("decomposition needs M >= 3, got {}", w.len())));
    }
    if preds.len() + 1 != w.len() {
        return Err(Error::DimensionMismatch { expected: w.len() - 1, got: preds.len() });
    }
    label.one_hot_index().ok_or(Error::NotOneHot)?;
    let tail = w.tail()?;
    let mean_prediction = mixture(&tail, preds)?;
    check_same_len(label.len(), mean_prediction.len())?;
    let js_term = js_div(&w.label_split(), label, &mean_prediction)?;
    let consistency_term = (1.0 - w[0]) * gjs_div(&tail, preds)?;
    Ok(GjsDecomposition { js_term, consistency_term, mean_prediction })
}
