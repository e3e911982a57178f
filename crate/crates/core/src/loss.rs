//! Training losses over predicted distributions, with exact logit gradients.
//!
//! The divergence losses compare the one-hot label `e_y` against one or more
//! predictions. `JS` and `GJS` divide by `Z = -(1 - pi1) ln(1 - pi1)` in
//! [`ZMode::Normalized`]; this rescales values and gradients but leaves every
//! minimizer where it was.
//!
//! Gradients are taken with respect to the logits of each prediction. For a
//! loss `L(p)` with `p = softmax(z)` the chain rule collapses to
//! `dL/dz_i = p_i g_i - p_i sum_k p_k g_k` where `g = dL/dp`; every kind
//! below supplies the products `p_k g_k` directly so that zero probabilities
//! never meet an infinite logarithm.

use serde::{Deserialize, Serialize};

use crate::divergence::{decompose_gjs, gjs_div, js_div};
use crate::error::{Error, Result};
use crate::simplex::{
    check_same_len, clamp_project, softmax_slice, LogitVec, ProbVec, WeightVec, PROB_FLOOR,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Js,
    Gjs,
    JsOnMean,
    Ce,
    Mae,
    Gce,
    Ls,
    Bs,
    /// `KL(e_y, p)`; identical to CE on clamped predictions.
    Kl,
    /// `KL(p, e_y)` against the clamped label.
    KlReverse,
    Jeffreys,
    K,
    KPrime,
}

impl LossKind {
    pub const ALL: [LossKind; 13] = [
        LossKind::Js,
        LossKind::Gjs,
        LossKind::JsOnMean,
        LossKind::Ce,
        LossKind::Mae,
        LossKind::Gce,
        LossKind::Ls,
        LossKind::Bs,
        LossKind::Kl,
        LossKind::KlReverse,
        LossKind::Jeffreys,
        LossKind::K,
        LossKind::KPrime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Js => "js",
            LossKind::Gjs => "gjs",
            LossKind::JsOnMean => "js-on-mean",
            LossKind::Ce => "ce",
            LossKind::Mae => "mae",
            LossKind::Gce => "gce",
            LossKind::Ls => "ls",
            LossKind::Bs => "bs",
            LossKind::Kl => "kl",
            LossKind::KlReverse => "kl-reverse",
            LossKind::Jeffreys => "jeffreys",
            LossKind::K => "k",
            LossKind::KPrime => "k-prime",
        }
    }

    /// Uses `pi1` and the `Z` normalizer.
    pub fn is_js_family(self) -> bool {
        matches!(self, LossKind::Js | LossKind::Gjs | LossKind::JsOnMean)
    }

    pub fn is_multi_view(self) -> bool {
        matches!(self, LossKind::Gjs | LossKind::JsOnMean)
    }

    /// True when `sum_k L(e_k, p)` is bounded for every prediction.
    pub fn is_bounded(self) -> bool {
        !matches!(
            self,
            LossKind::Ce | LossKind::Ls | LossKind::Bs | LossKind::Kl | LossKind::KlReverse | LossKind::Jeffreys
        )
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidLossSpec(format!("unknown loss kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ZMode {
    /// Divide by `-(1 - pi1) ln(1 - pi1)`.
    #[default]
    Normalized,
    Unit,
    /// Divide by an explicit constant.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawLossSpec")]
pub struct LossSpec {
    pub kind: LossKind,
    pub pi1: f64,
    /// Number of distributions including the label; `M - 1` predictions.
    pub m: usize,
    pub z_mode: ZMode,
    pub q: f64,
    pub epsilon_ls: f64,
    pub beta_bs: f64,
}

/// Serialized form; an absent `m` means 3 for multi-view kinds and 2 otherwise.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLossSpec {
    kind: LossKind,
    #[serde(default = "defaults::pi1")]
    pi1: f64,
    #[serde(default)]
    m: Option<usize>,
    #[serde(default)]
    z_mode: ZMode,
    #[serde(default = "defaults::q")]
    q: f64,
    #[serde(default = "defaults::epsilon_ls")]
    epsilon_ls: f64,
    #[serde(default = "defaults::beta_bs")]
    beta_bs: f64,
}

impl From<RawLossSpec> for LossSpec {
    fn from(r: RawLossSpec) -> Self {
        let m = r.m.unwrap_or(if r.kind.is_multi_view() { defaults::m() } else { 2 });
        LossSpec { kind: r.kind, pi1: r.pi1, m, z_mode: r.z_mode, q: r.q, epsilon_ls: r.epsilon_ls, beta_bs: r.beta_bs }
    }
}

mod defaults {
    pub fn pi1() -> f64 {
        0.5
    }
    pub fn m() -> usize {
        3
    }
    pub fn q() -> f64 {
        0.7
    }
    pub fn epsilon_ls() -> f64 {
        0.7
    }
    pub fn beta_bs() -> f64 {
        0.9
    }
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Self {
        LossSpec {
            kind,
            pi1: defaults::pi1(),
            m: if kind.is_multi_view() { defaults::m() } else { 2 },
            z_mode: ZMode::Normalized,
            q: defaults::q(),
            epsilon_ls: defaults::epsilon_ls(),
            beta_bs: defaults::beta_bs(),
        }
    }

    pub fn js(pi1: f64) -> Self {
        LossSpec { pi1, m: 2, ..Self::new(LossKind::Js) }
    }

    pub fn gjs(pi1: f64, m: usize) -> Self {
        LossSpec { pi1, m, ..Self::new(LossKind::Gjs) }
    }

    pub fn js_on_mean(pi1: f64, m: usize) -> Self {
        LossSpec { pi1, m, ..Self::new(LossKind::JsOnMean) }
    }

    pub fn gce(q: f64) -> Self {
        LossSpec { q, ..Self::new(LossKind::Gce) }
    }

    pub fn ls(epsilon: f64) -> Self {
        LossSpec { epsilon_ls: epsilon, ..Self::new(LossKind::Ls) }
    }

    pub fn bs(beta: f64) -> Self {
        LossSpec { beta_bs: beta, ..Self::new(LossKind::Bs) }
    }

    pub fn with_z(mut self, z_mode: ZMode) -> Self {
        self.z_mode = z_mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidLossSpec(msg));
        if self.kind.is_js_family() {
            if !(self.pi1 > 0.0 && self.pi1 < 1.0) {
                return bad(format!("pi1 = {} outside (0, 1)", self.pi1));
            }
            if let ZMode::Fixed(z) = self.z_mode {
                if !(z.is_finite() && z > 0.0) {
                    return bad(format!("fixed Z = {z} must be positive"));
                }
            }
        }
        match self.kind {
            LossKind::Js if self.m != 2 => return bad(format!("JS uses M = 2, got {}", self.m)),
            LossKind::Gjs if self.m < 2 => return bad(format!("GJS needs M >= 2, got {}", self.m)),
            LossKind::JsOnMean if self.m < 3 => {
                return bad(format!("JS-on-mean needs M >= 3, got {}", self.m))
            }
            LossKind::Gce if !(self.q > 0.0 && self.q <= 1.0) => {
                return bad(format!("GCE q = {} outside (0, 1]", self.q))
            }
            LossKind::Ls if !(0.0..1.0).contains(&self.epsilon_ls) => {
                return bad(format!("LS epsilon = {} outside [0, 1)", self.epsilon_ls))
            }
            LossKind::Bs if !(self.beta_bs > 0.0 && self.beta_bs <= 1.0) => {
                return bad(format!("BS beta = {} outside (0, 1]", self.beta_bs))
            }
            _ => {}
        }
        Ok(())
    }

    /// How many predictive distributions a single evaluation consumes.
    pub fn num_predictions(&self) -> usize {
        if self.kind.is_multi_view() {
            self.m - 1
        } else {
            1
        }
    }

    /// The divisor applied to JS-family losses; 1 for every other kind.
    pub fn z(&self) -> f64 {
        if !self.kind.is_js_family() {
            return 1.0;
        }
        match self.z_mode {
            ZMode::Normalized => normalizer(self.pi1),
            ZMode::Unit => 1.0,
            ZMode::Fixed(z) => z,
        }
    }

    /// `[pi1, (1 - pi1)/(M - 1), ...]`.
    pub fn weights(&self) -> Result<WeightVec> {
        WeightVec::label_weighted(self.pi1, self.m)
    }
}

/// `Z = -(1 - pi1) ln(1 - pi1)`.
pub fn normalizer(pi1: f64) -> f64 {
    let rest = 1.0 - pi1;
    -rest * rest.ln()
}

/// Value and per-prediction logit gradients of one loss evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEval {
    pub value: f64,
    pub grad_logits: Vec<LogitVec>,
}

fn label_check(y: usize, k: usize) -> Result<()> {
    if y >= k {
        return Err(Error::IndexOutOfRange { index: y, len: k });
    }
    Ok(())
}

fn expect_kind(spec: &LossSpec, kinds: &[LossKind]) -> Result<()> {
    if !kinds.contains(&spec.kind) {
        return Err(Error::InvalidLossSpec(format!("{} is not accepted here", spec.kind)));
    }
    spec.validate()
}

fn expect_views(spec: &LossSpec, preds: &[&ProbVec]) -> Result<usize> {
    if preds.len() != spec.num_predictions() {
        return Err(Error::DimensionMismatch { expected: spec.num_predictions(), got: preds.len() });
    }
    let k = preds[0].len();
    for p in preds {
        check_same_len(k, p.len())?;
    }
    Ok(k)
}

/// `JS_[pi1, 1-pi1](e_y, p) / Z`.
pub fn loss_js(spec: &LossSpec, y: usize, p: &ProbVec) -> Result<f64> {
    expect_kind(spec, &[LossKind::Js])?;
    label_check(y, p.len())?;
    let label = ProbVec::one_hot(p.len(), y)?;
    Ok(js_div(&spec.weights()?, &label, p)? / spec.z())
}

/// `GJS_pi(e_y, p_2, ..., p_M) / Z`.
pub fn loss_gjs(spec: &LossSpec, y: usize, preds: &[&ProbVec]) -> Result<f64> {
    expect_kind(spec, &[LossKind::Gjs])?;
    let k = expect_views(spec, preds)?;
    label_check(y, k)?;
    let label = ProbVec::one_hot(k, y)?;
    let mut all = Vec::with_capacity(preds.len() + 1);
    all.push(&label);
    all.extend_from_slice(preds);
    Ok(gjs_div(&spec.weights()?, &all)? / spec.z())
}

/// The JS term of the GJS decomposition alone: `JS_{pi'}(e_y, m_{>1}) / Z`.
pub fn loss_js_on_mean(spec: &LossSpec, y: usize, preds: &[&ProbVec]) -> Result<f64> {
    expect_kind(spec, &[LossKind::JsOnMean])?;
    let k = expect_views(spec, preds)?;
    label_check(y, k)?;
    let label = ProbVec::one_hot(k, y)?;
    Ok(decompose_gjs(&spec.weights()?, &label, preds)?.js_term / spec.z())
}

/// Bootstrap target `beta e_y + (1 - beta) p`.
pub fn bs_target(beta: f64, y: usize, p: &ProbVec) -> Result<ProbVec> {
    label_check(y, p.len())?;
    let mut t: Vec<f64> = p.as_slice().iter().map(|&v| (1.0 - beta) * v).collect();
    t[y] += beta;
    Ok(ProbVec::from_vec_unchecked(t))
}

/// Label-smoothing target `(1 - eps) e_y + eps u`.
pub fn ls_target(epsilon: f64, y: usize, k: usize) -> Result<ProbVec> {
    label_check(y, k)?;
    let mut t = vec![epsilon / k as f64; k];
    t[y] += 1.0 - epsilon;
    ProbVec::new(t)
}

fn cross_entropy(target: &[f64], p: &ProbVec) -> Result<f64> {
    let pc = clamp_project(p.as_slice())?;
    Ok(-target
        .iter()
        .zip(pc.as_slice())
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, q)| t * q.ln())
        .sum::<f64>())
}

fn clamped_label(k: usize, y: usize) -> Vec<f64> {
    let mut t = vec![PROB_FLOOR; k];
    t[y] = 1.0;
    let s: f64 = t.iter().sum();
    t.iter_mut().for_each(|v| *v /= s);
    t
}

/// The single-prediction losses: CE, MAE, GCE, LS, BS and the KL dissection.
pub fn loss_baseline(spec: &LossSpec, y: usize, p: &ProbVec) -> Result<f64> {
    expect_kind(
        spec,
        &[
            LossKind::Ce,
            LossKind::Mae,
            LossKind::Gce,
            LossKind::Ls,
            LossKind::Bs,
            LossKind::Kl,
            LossKind::KlReverse,
            LossKind::Jeffreys,
            LossKind::K,
            LossKind::KPrime,
        ],
    )?;
    let k = p.len();
    label_check(y, k)?;
    let py = p[y];
    Ok(match spec.kind {
        LossKind::Ce | LossKind::Kl => -clamp_project(p.as_slice())?[y].ln(),
        LossKind::Mae => 0.5 * l1_to_one_hot(p.as_slice(), y),
        LossKind::Gce => (1.0 - py.powf(spec.q)) / spec.q,
        LossKind::Ls => cross_entropy(ls_target(spec.epsilon_ls, y, k)?.as_slice(), p)?,
        LossKind::Bs => cross_entropy(bs_target(spec.beta_bs, y, p)?.as_slice(), p)?,
        LossKind::KlReverse => reverse_kl_to_label(p.as_slice(), y),
        LossKind::Jeffreys => {
            0.5 * (-clamp_project(p.as_slice())?[y].ln() + reverse_kl_to_label(p.as_slice(), y))
        }
        LossKind::K => -((1.0 + py) / 2.0).ln(),
        LossKind::KPrime => k_prime_to_label(p.as_slice(), y),
        _ => unreachable!(),
    })
}

/// `0.5 * ||e_y - p||_1` computed without the `1 - p_y` shortcut.
pub(crate) fn l1_to_one_hot(p: &[f64], y: usize) -> f64 {
    p.iter()
        .enumerate()
        .map(|(k, &v)| if k == y { (1.0 - v).abs() } else { v.abs() })
        .sum()
}

fn reverse_kl_to_label(p: &[f64], y: usize) -> f64 {
    let t = clamped_label(p.len(), y);
    p.iter()
        .zip(&t)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum::<f64>()
        .max(0.0)
}

fn k_prime_to_label(p: &[f64], y: usize) -> f64 {
    let py = p[y];
    let head = if py > 0.0 { py * (2.0 * py / (1.0 + py)).ln() } else { 0.0 };
    (head + (1.0 - py) * std::f64::consts::LN_2).max(0.0)
}

/// Dispatches any kind. Single-prediction kinds take exactly one prediction.
pub fn loss_value(spec: &LossSpec, y: usize, preds: &[&ProbVec]) -> Result<f64> {
    match spec.kind {
        LossKind::Gjs => loss_gjs(spec, y, preds),
        LossKind::JsOnMean => loss_js_on_mean(spec, y, preds),
        _ => {
            expect_views(spec, preds)?;
            if spec.kind == LossKind::Js {
                loss_js(spec, y, preds[0])
            } else {
                loss_baseline(spec, y, preds[0])
            }
        }
    }
}

/// `sum_k L(e_k, preds)`: constant for a noise-robust loss.
pub fn sum_over_classes(spec: &LossSpec, preds: &[&ProbVec]) -> Result<f64> {
    let k = expect_views(spec, preds)?;
    (0..k).map(|c| loss_value(spec, c, preds)).sum()
}

/// Closed-form JS gradient,
/// `-(1 - pi1) dp_y/dz_i ln(pi1 / ((1 - pi1) p_y) + 1) / Z`.
pub fn grad_js_logits(spec: &LossSpec, y: usize, z: &LogitVec) -> Result<LogitVec> {
    expect_kind(spec, &[LossKind::Js])?;
    label_check(y, z.len())?;
    let p = softmax_slice(z.as_slice());
    let pi1 = spec.pi1;
    let py = p[y];
    // p_y * ln(pi1 / ((1 - pi1) p_y) + 1), which tends to 0 with p_y.
    let scaled = if py > 0.0 { py * (pi1 / ((1.0 - pi1) * py)).ln_1p() } else { 0.0 };
    let c = -(1.0 - pi1) * scaled / spec.z();
    let g = p
        .iter()
        .enumerate()
        .map(|(i, &pi)| c * (if i == y { 1.0 } else { 0.0 } - pi))
        .collect();
    Ok(LogitVec::from_vec_unchecked(g))
}

/// Softmax chain rule from the products `p_k dL/dp_k`.
fn chain_softmax(p: &[f64], pg: &[f64]) -> Vec<f64> {
    let total: f64 = pg.iter().sum();
    p.iter().zip(pg).map(|(&pi, &pgi)| pgi - pi * total).collect()
}

/// `p ln(p / m)` with `0 ln 0 = 0`.
#[inline]
fn plogratio(p: f64, m: f64) -> f64 {
    if p > 0.0 {
        p * (p / m).ln()
    } else {
        0.0
    }
}

/// Value and analytic logit gradients from raw logit slices (one per prediction).
pub fn eval_logits(spec: &LossSpec, y: usize, zs: &[&[f64]]) -> Result<LossEval> {
    spec.validate()?;
    if zs.len() != spec.num_predictions() {
        return Err(Error::DimensionMismatch { expected: spec.num_predictions(), got: zs.len() });
    }
    let k = zs[0].len();
    for z in zs {
        check_same_len(k, z.len())?;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidLogits("non-finite logit".into()));
        }
    }
    if k < 2 {
        return Err(Error::InvalidLogits("need at least 2 classes".into()));
    }
    label_check(y, k)?;

    let probs: Vec<ProbVec> = zs.iter().map(|z| ProbVec::from_vec_unchecked(softmax_slice(z))).collect();
    let refs: Vec<&ProbVec> = probs.iter().collect();
    let value = loss_value(spec, y, &refs)?;

    let grads: Vec<Vec<f64>> = match spec.kind {
        LossKind::Js | LossKind::Gjs => {
            let w = spec.weights()?;
            let z = spec.z();
            let mut m: Vec<f64> = vec![0.0; k];
            m[y] += w[0];
            for (j, p) in refs.iter().enumerate() {
                for (mk, &pk) in m.iter_mut().zip(p.as_slice()) {
                    *mk += w[j + 1] * pk;
                }
            }
            refs.iter()
                .enumerate()
                .map(|(j, p)| {
                    let pg: Vec<f64> =
                        p.as_slice().iter().zip(&m).map(|(&pk, &mk)| w[j + 1] * plogratio(pk, mk) / z).collect();
                    chain_softmax(p.as_slice(), &pg)
                })
                .collect()
        }
        LossKind::JsOnMean => {
            let pi1 = spec.pi1;
            let views = refs.len() as f64;
            let mut mean = vec![0.0; k];
            for p in &refs {
                for (a, &b) in mean.iter_mut().zip(p.as_slice()) {
                    *a += b / views;
                }
            }
            let mut mix: Vec<f64> = mean.iter().map(|&v| (1.0 - pi1) * v).collect();
            mix[y] += pi1;
            let scale = (1.0 - pi1) / views / spec.z();
            let g: Vec<f64> = mean
                .iter()
                .zip(&mix)
                .map(|(&a, &b)| if a > 0.0 { scale * (a / b).ln() } else { 0.0 })
                .collect();
            refs.iter()
                .map(|p| {
                    let pg: Vec<f64> = p.as_slice().iter().zip(&g).map(|(&pk, &gk)| if pk > 0.0 { pk * gk } else { 0.0 }).collect();
                    chain_softmax(p.as_slice(), &pg)
                })
                .collect()
        }
        _ => {
            let p = refs[0].as_slice();
            let py = p[y];
            let mut pg = vec![0.0; k];
            match spec.kind {
                LossKind::Ce | LossKind::Kl => pg[y] = -1.0,
                LossKind::Mae => pg[y] = -py,
                LossKind::Gce => pg[y] = -py.powf(spec.q),
                LossKind::Ls => {
                    let t = ls_target(spec.epsilon_ls, y, k)?;
                    pg.copy_from_slice(&t.as_slice().iter().map(|v| -v).collect::<Vec<_>>());
                }
                LossKind::Bs => {
                    // Target held constant: no gradient flows through its p.
                    let t = bs_target(spec.beta_bs, y, refs[0])?;
                    pg.copy_from_slice(&t.as_slice().iter().map(|v| -v).collect::<Vec<_>>());
                }
                LossKind::KlReverse => {
                    let t = clamped_label(k, y);
                    for ((g, &a), &b) in pg.iter_mut().zip(p).zip(&t) {
                        *g = plogratio(a, b);
                    }
                }
                LossKind::Jeffreys => {
                    let t = clamped_label(k, y);
                    for ((g, &a), &b) in pg.iter_mut().zip(p).zip(&t) {
                        *g = 0.5 * plogratio(a, b);
                    }
                    pg[y] -= 0.5;
                }
                LossKind::K => pg[y] = -py / (1.0 + py),
                LossKind::KPrime => {
                    for (g, &a) in pg.iter_mut().zip(p) {
                        *g = a * std::f64::consts::LN_2;
                    }
                    pg[y] = if py > 0.0 {
                        py * ((2.0 * py / (1.0 + py)).ln() + 1.0 - py / (1.0 + py))
                    } else {
                        0.0
                    };
                }
                _ => unreachable!(),
            }
            vec![chain_softmax(p, &pg)]
        }
    };

    Ok(LossEval { value, grad_logits: grads.into_iter().map(LogitVec::from_vec_unchecked).collect() })
}

/// Analytic gradients for any kind; the label receives none.
pub fn grad_loss_logits(spec: &LossSpec, y: usize, zs: &[LogitVec]) -> Result<Vec<LogitVec>> {
    let slices: Vec<&[f64]> = zs.iter().map(|z| z.as_slice()).collect();
    Ok(eval_logits(spec, y, &slices)?.grad_logits)
}

/// The loss as a function of logits, matching the value [`eval_logits`] reports.
pub fn loss_from_logits(spec: &LossSpec, y: usize, zs: &[&[f64]]) -> Result<f64> {
    let probs: Vec<ProbVec> = zs.iter().map(|z| ProbVec::from_vec_unchecked(softmax_slice(z))).collect();
    let refs: Vec<&ProbVec> = probs.iter().collect();
    loss_value(spec, y, &refs)
}
