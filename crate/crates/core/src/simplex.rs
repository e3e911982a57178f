//! Categorical distributions and the numerically safe primitives built on them.
//!
//! Every logarithm is natural. Terms with a zero probability contribute zero
//! (`0 ln 0 = 0`), so one-hot vectors are first-class citizens.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied by [`clamp_project`] before any logarithm of a prediction.
pub const PROB_FLOOR: f64 = 1e-12;
/// A validated vector sums to one within this tolerance.
pub const SUM_TOL: f64 = 1e-9;
/// Constructors renormalize inputs whose sum is within this distance of one.
pub const RENORM_TOL: f64 = 1e-6;

/// `-x ln x` with the `0 ln 0 = 0` convention.
#[inline]
pub fn xlnx_neg(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// A point on the probability simplex with at least two classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVec(Vec<f64>);

impl ProbVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidProbVec(format!(
                "need at least 2 classes, got {}",
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidProbVec(format!("entry {i} = {v}")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > RENORM_TOL {
            return Err(Error::InvalidProbVec(format!("entries sum to {sum}")));
        }
        let mut values = values;
        if (sum - 1.0).abs() > f64::EPSILON * values.len() as f64 {
            values.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(ProbVec(values))
    }

    /// Caller guarantees the invariants (softmax output, convex combinations).
    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= 2);
        debug_assert!((values.iter().sum::<f64>() - 1.0).abs() < SUM_TOL * 10.0);
        ProbVec(values)
    }

    pub fn one_hot(k: usize, class: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidProbVec(format!("need at least 2 classes, got {k}")));
        }
        if class >= k {
            return Err(Error::IndexOutOfRange { index: class, len: k });
        }
        let mut v = vec![0.0; k];
        v[class] = 1.0;
        Ok(ProbVec(v))
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidProbVec(format!("need at least 2 classes, got {k}")));
        }
        Ok(ProbVec(vec![1.0 / k as f64; k]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Index of the largest entry, ties broken by the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }

    /// Returns the hot index if this vector is one-hot.
    pub fn one_hot_index(&self) -> Option<usize> {
        let hot = self.argmax();
        let exact = self
            .0
            .iter()
            .enumerate()
            .all(|(i, &v)| if i == hot { (v - 1.0).abs() < 1e-12 } else { v < 1e-12 });
        exact.then_some(hot)
    }
}

impl std::ops::Index<usize> for ProbVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for ProbVec {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbVec::new(v)
    }
}

impl From<ProbVec> for Vec<f64> {
    fn from(p: ProbVec) -> Self {
        p.0
    }
}

/// Lowest index of the maximum; NaN entries never win.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Pre-softmax scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitVec(Vec<f64>);

impl LogitVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidLogits(format!("need at least 2 logits, got {}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidLogits(format!("non-finite logit {v}")));
        }
        Ok(LogitVec(values))
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        LogitVec(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for LogitVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Strictly positive mixture weights summing to one, `M >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVec(Vec<f64>);

impl WeightVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidWeights(format!("need at least 2 weights, got {}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::InvalidWeights(format!("weight {v} is not strictly positive")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > RENORM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
        }
        let mut values = values;
        if sum != 1.0 {
            values.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(WeightVec(values))
    }

    /// `[pi1, (1-pi1)/(M-1), ..., (1-pi1)/(M-1)]`: label weight first, equal
    /// weights on the `M-1` predictions.
    pub fn label_weighted(pi1: f64, m: usize) -> Result<Self> {
        if !(pi1 > 0.0 && pi1 < 1.0) {
            return Err(Error::InvalidWeights(format!("pi1 = {pi1} outside (0, 1)")));
        }
        if m < 2 {
            return Err(Error::InvalidWeights(format!("need M >= 2, got {m}")));
        }
        let rest = (1.0 - pi1) / (m - 1) as f64;
        let mut v = Vec::with_capacity(m);
        v.push(pi1);
        v.extend(std::iter::repeat_n(rest, m - 1));
        Ok(WeightVec(v))
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidWeights(format!("need M >= 2, got {m}")));
        }
        Ok(WeightVec(vec![1.0 / m as f64; m]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Shannon entropy of the weights themselves, `H(pi)`.
    pub fn entropy(&self) -> f64 {
        self.0.iter().map(|&w| xlnx_neg(w)).sum()
    }

    /// `pi' = [pi1, 1 - pi1]`.
    pub fn label_split(&self) -> WeightVec {
        WeightVec(vec![self.0[0], 1.0 - self.0[0]])
    }

    /// `pi'' = [pi2, ..., piM] / (1 - pi1)`; requires `M >= 3`.
    pub fn tail(&self) -> Result<WeightVec> {
        if self.0.len() < 3 {
            return Err(Error::InvalidWeights("tail weights need M >= 3".into()));
        }
        let rest: f64 = self.0[1..].iter().sum();
        Ok(WeightVec(self.0[1..].iter().map(|w| w / rest).collect()))
    }
}

impl std::ops::Index<usize> for WeightVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Shannon entropy `-sum p ln p`, in `[0, ln K]`.
pub fn entropy(p: &ProbVec) -> f64 {
    p.0.iter().map(|&x| xlnx_neg(x)).sum()
}

/// `KL(p || q)`; errors when `q_k = 0 < p_k`.
pub fn kl_div(p: &ProbVec, q: &ProbVec) -> Result<f64> {
    check_same_len(p.len(), q.len())?;
    let mut acc = 0.0;
    for (k, (&a, &b)) in p.0.iter().zip(&q.0).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::AbsoluteContinuityViolation { index: k, p: a });
            }
            acc += a * (a / b).ln();
        }
    }
    Ok(acc.max(0.0))
}

pub fn mixture(w: &WeightVec, ps: &[&ProbVec]) -> Result<ProbVec> {
    if ps.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: w.len(), got: ps.len() });
    }
    let k = ps[0].len();
    let mut m = vec![0.0; k];
    for (&wi, p) in w.0.iter().zip(ps) {
        check_same_len(k, p.len())?;
        for (mk, &pk) in m.iter_mut().zip(&p.0) {
            *mk += wi * pk;
        }
    }
    // Convex combinations stay on the simplex up to rounding.
    let sum: f64 = m.iter().sum();
    m.iter_mut().for_each(|v| *v /= sum);
    Ok(ProbVec(m))
}

/// Shift-invariant softmax (max is subtracted before exponentiation).
pub fn softmax(z: &LogitVec) -> ProbVec {
    ProbVec(softmax_slice(&z.0))
}

pub(crate) fn softmax_slice(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= sum);
    out
}

/// `dp_j / dz_i = p_j (1[i = j] - p_i)`.
pub fn softmax_jacobian_entry(p: &ProbVec, j: usize, i: usize) -> Result<f64> {
    let k = p.len();
    for idx in [j, i] {
        if idx >= k {
            return Err(Error::IndexOutOfRange { index: idx, len: k });
        }
    }
    let delta = if i == j { 1.0 } else { 0.0 };
    Ok(p.0[j] * (delta - p.0[i]))
}

/// Clamp to `[PROB_FLOOR, 1]` and renormalize.
pub fn clamp_project(raw: &[f64]) -> Result<ProbVec> {
    clamp_project_with(raw, PROB_FLOOR)
}

pub fn clamp_project_with(raw: &[f64], floor: f64) -> Result<ProbVec> {
    if raw.len() < 2 {
        return Err(Error::InvalidProbVec(format!("need at least 2 classes, got {}", raw.len())));
    }
    if raw.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidProbVec("NaN entry".into()));
    }
    if raw.iter().all(|&v| v <= 0.0) {
        return Err(Error::InvalidProbVec("no positive entry to project".into()));
    }
    let mut v: Vec<f64> = raw.iter().map(|&x| x.clamp(floor, 1.0)).collect();
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= sum);
    Ok(ProbVec(v))
}

pub(crate) fn check_same_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
