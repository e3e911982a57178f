//! Closed-form bounds on `sum_k L(e_k, f(x))` and the brute-force search that checks them.

use serde::{Deserialize, Serialize};

use super::draws;
use super::grid::{grid_size, simplex_grid};
use crate::divergence::decompose_gjs;
use crate::error::{Error, Result};
use crate::loss::{normalizer, sum_over_classes, LossKind, LossSpec, ZMode};
use crate::par::{map_indices, Exec};
use crate::seed::rng_for;
use crate::simplex::{ProbVec, WeightVec};

/// Hypotheses a single search may evaluate.
pub const SEARCH_CAP: u128 = 10_000_000;
const CHUNK: u64 = 2048;

fn h(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// The normalizer the closed-form bounds are stated with. A [`ZMode::Fixed`]
/// override changes the loss but not the bound.
fn bound_z(spec: &LossSpec) -> f64 {
    if !spec.kind.is_js_family() {
        return 1.0;
    }
    match spec.z_mode {
        ZMode::Unit => 1.0,
        ZMode::Normalized | ZMode::Fixed(_) => normalizer(spec.pi1),
    }
}

/// Single-prediction bounded losses depend on `p` only through `p_y`;
/// this is that scalar profile, unnormalized.
fn profile(spec: &LossSpec, t: f64) -> Option<f64> {
    let pi1 = spec.pi1;
    let rest = 1.0 - pi1;
    Some(match spec.kind {
        LossKind::Js | LossKind::JsOnMean => h(pi1 + rest * t) - rest * h(t) + (1.0 - t) * h(rest),
        LossKind::Mae => 1.0 - t,
        LossKind::Gce => (1.0 - t.powf(spec.q)) / spec.q,
        LossKind::K => -((1.0 + t) / 2.0).ln(),
        LossKind::KPrime => {
            let head = if t > 0.0 { t * (2.0 * t / (1.0 + t)).ln() } else { 0.0 };
            head + (1.0 - t) * std::f64::consts::LN_2
        }
        _ => return None,
    })
}

/// `(B_L, B_U)`: the loss summed over labels at the uniform prediction and at
/// one-hot predictions (distinct one-hots for GJS).
pub fn bound_constants(spec: &LossSpec, k: usize) -> Result<(f64, f64)> {
    spec.validate()?;
    if k < 2 {
        return Err(Error::InvalidConfig(format!("K = {k} < 2")));
    }
    let kf = k as f64;
    let z = bound_z(spec);
    if spec.kind == LossKind::Gjs {
        let m = spec.m;
        if m > k + 1 {
            return Err(Error::InvalidLossSpec(format!("M = {m} exceeds K + 1 = {}", k + 1)));
        }
        let pi1 = spec.pi1;
        let rest = 1.0 - pi1;
        let lower = kf * (h(pi1 + rest / kf) + (kf - 1.0) * h(rest / kf) - rest * kf.ln());
        let w = rest / (m - 1) as f64;
        let inside = h(pi1 + w) + (m - 2) as f64 * h(w);
        let outside = h(pi1) + (m - 1) as f64 * h(w);
        let upper = (m - 1) as f64 * inside + (k + 1 - m) as f64 * outside;
        return Ok((lower / z, upper / z));
    }
    match profile(spec, 0.0) {
        Some(_) => {
            let f = |t| profile(spec, t).unwrap();
            Ok((kf * f(1.0 / kf) / z, (f(1.0) + (kf - 1.0) * f(0.0)) / z))
        }
        None => {
            let vertex = ProbVec::one_hot(k, 0)?;
            let clamp_bound = sum_over_classes(spec, &[&vertex])?;
            Err(Error::UnboundedLoss { kind: spec.kind.to_string(), clamp_bound })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub loss: LossSpec,
    pub k: usize,
    pub b_lower: f64,
    pub b_upper: f64,
    pub observed_min: f64,
    pub observed_max: f64,
    pub worst_violation: f64,
    pub argmin_point: Vec<ProbVec>,
    pub argmax_point: Vec<ProbVec>,
    pub grid_resolution: usize,
    pub grid_points: u64,
    pub random_draws: u64,
}

impl BoundReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.worst_violation <= tol
    }

    /// Every slot of the located minimizer lies within one lattice step of `u`.
    pub fn argmin_near_uniform(&self) -> bool {
        let step = if self.grid_resolution > 0 { 1.0 / self.grid_resolution as f64 } else { 0.0 };
        let u = 1.0 / self.k as f64;
        self.argmin_point.iter().all(|p| p.as_slice().iter().all(|v| (v - u).abs() <= step + 1e-12))
    }

    /// Every slot of the located maximizer is a one-hot, and slots are distinct.
    pub fn argmax_at_vertices(&self) -> bool {
        let idx: Option<Vec<usize>> = self.argmax_point.iter().map(ProbVec::one_hot_index).collect();
        match idx {
            Some(mut v) => {
                let n = v.len();
                v.sort_unstable();
                v.dedup();
                v.len() == n
            }
            None => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub samples: u64,
    /// Grid denominator; 0 skips the grid.
    pub grid_resolution: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { samples: 100_000, grid_resolution: 30, seed: 0, exec: Exec::Parallel }
    }
}

struct Extrema<P> {
    min: f64,
    min_at: Option<P>,
    max: f64,
    max_at: Option<P>,
    worst: f64,
}

impl<P> Extrema<P> {
    fn new() -> Self {
        Extrema { min: f64::INFINITY, min_at: None, max: f64::NEG_INFINITY, max_at: None, worst: 0.0 }
    }

    fn observe(&mut self, s: f64, bounds: (f64, f64), at: impl Fn() -> P) {
        if s < self.min {
            self.min = s;
            self.min_at = Some(at());
        }
        if s > self.max {
            self.max = s;
            self.max_at = Some(at());
        }
        let v = (bounds.0 - s).max(s - bounds.1);
        if v > self.worst || v.is_nan() {
            self.worst = v;
        }
    }

    /// Earlier chunks win ties, so the merge is independent of scheduling.
    fn merge(&mut self, o: Extrema<P>) {
        if o.min < self.min {
            self.min = o.min;
            self.min_at = o.min_at;
        }
        if o.max > self.max {
            self.max = o.max;
            self.max_at = o.max_at;
        }
        if o.worst > self.worst || o.worst.is_nan() {
            self.worst = o.worst;
        }
    }
}

fn merge_all<P>(parts: Vec<Result<Extrema<P>>>) -> Result<Extrema<P>> {
    let mut acc = Extrema::new();
    for p in parts {
        acc.merge(p?);
    }
    Ok(acc)
}

/// [`bound_search_with`] using the default seed and parallel execution.
pub fn bound_search(spec: &LossSpec, k: usize, samples: u64, grid_resolution: usize) -> Result<BoundReport> {
    bound_search_with(spec, k, &SearchOptions { samples, grid_resolution, ..Default::default() })
}

/// Evaluates `sum_over_classes` on every grid tuple and on random draws
/// (one independent point per prediction slot), tracking the largest
/// excursion outside `[B_L, B_U]`. Extremizers come from the grid when one
/// is searched, otherwise from the random draws.
pub fn bound_search_with(spec: &LossSpec, k: usize, opts: &SearchOptions) -> Result<BoundReport> {
    let bounds = bound_constants(spec, k)?;
    let slots = spec.num_predictions();
    let eval = |preds: &[&ProbVec]| sum_over_classes(spec, preds);

    let mut grid_points = 0u64;
    let mut grid_ext: Option<Extrema<Vec<ProbVec>>> = None;
    if opts.grid_resolution > 0 {
        let g = grid_size(k, opts.grid_resolution);
        let needed = g.checked_pow(slots as u32).unwrap_or(u128::MAX);
        if needed > SEARCH_CAP {
            return Err(Error::ResourceCap { needed, cap: SEARCH_CAP });
        }
        let grid = simplex_grid(k, opts.grid_resolution)?;
        let gl = grid.len() as u64;
        let total = needed as u64;
        let chunks = total.div_ceil(CHUNK) as usize;
        let decode = |mut idx: u64| {
            let mut ix = vec![0usize; slots];
            for s in (0..slots).rev() {
                ix[s] = (idx % gl) as usize;
                idx /= gl;
            }
            ix
        };
        let parts = map_indices(opts.exec, chunks, |c| {
            let mut ext: Extrema<u64> = Extrema::new();
            let lo = c as u64 * CHUNK;
            for idx in lo..(lo + CHUNK).min(total) {
                let ix = decode(idx);
                let preds: Vec<&ProbVec> = ix.iter().map(|&i| &grid[i]).collect();
                ext.observe(eval(&preds)?, bounds, || idx);
            }
            Ok(ext)
        });
        let e = merge_all(parts)?;
        let points = |idx: Option<u64>| idx.map(|i| decode(i).into_iter().map(|j| grid[j].clone()).collect());
        grid_ext = Some(Extrema { min: e.min, min_at: points(e.min_at), max: e.max, max_at: points(e.max_at), worst: e.worst });
        grid_points = total;
    }

    let chunks = opts.samples.div_ceil(CHUNK) as usize;
    let parts = map_indices(opts.exec, chunks, |c| {
        let mut rng = rng_for(opts.seed, "bound-search", c as u64);
        let mut ext: Extrema<Vec<ProbVec>> = Extrema::new();
        let n = CHUNK.min(opts.samples - c as u64 * CHUNK);
        for _ in 0..n {
            let pts: Vec<ProbVec> = (0..slots).map(|_| draws::mixed(&mut rng, k)).collect();
            let refs: Vec<&ProbVec> = pts.iter().collect();
            ext.observe(eval(&refs)?, bounds, || pts.clone());
        }
        Ok(ext)
    });
    let random_ext = merge_all(parts)?;

    let (min, max, worst) = match &grid_ext {
        Some(g) => (g.min.min(random_ext.min), g.max.max(random_ext.max), g.worst.max(random_ext.worst)),
        None => (random_ext.min, random_ext.max, random_ext.worst),
    };
    let located = grid_ext.unwrap_or(random_ext);
    Ok(BoundReport {
        loss: *spec,
        k,
        b_lower: bounds.0,
        b_upper: bounds.1,
        observed_min: min,
        observed_max: max,
        worst_violation: worst.max(0.0),
        argmin_point: located.min_at.unwrap_or_default(),
        argmax_point: located.max_at.unwrap_or_default(),
        grid_resolution: opts.grid_resolution,
        grid_points,
        random_draws: opts.samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub m: usize,
    pub b_lower: f64,
    pub b_upper: f64,
    pub gap: f64,
    /// `K (1 - pi1) H(pi'') / Z`, the consistency term's share of `B_U`.
    pub consistency_part: f64,
    pub js_part: f64,
    /// `|B_U - sum_k (js_term + consistency_term)|` recomputed from the decomposition.
    pub decomposition_residual: f64,
}

/// `B_U - B_L` of normalized GJS for each `M`, with `B_U` split into its JS
/// and consistency parts.
pub fn bound_gap_vs_m(pi1: f64, k: usize, m_values: &[usize]) -> Result<Vec<GapEntry>> {
    m_values
        .iter()
        .map(|&m| {
            let spec = LossSpec::gjs(pi1, m);
            let (lo, hi) = bound_constants(&spec, k)?;
            let z = normalizer(pi1);
            let mut consistency_part = 0.0;
            let mut residual = 0.0;
            if m >= 3 {
                let tail = vec![1.0 / (m - 1) as f64; m - 1];
                consistency_part = k as f64 * (1.0 - pi1) * WeightVec::new(tail)?.entropy() / z;
                let w = spec.weights()?;
                let verts: Vec<ProbVec> = (0..m - 1).map(|j| ProbVec::one_hot(k, j)).collect::<Result<_>>()?;
                let refs: Vec<&ProbVec> = verts.iter().collect();
                let mut total = 0.0;
                for y in 0..k {
                    total += decompose_gjs(&w, &ProbVec::one_hot(k, y)?, &refs)?.total() / z;
                }
                residual = (total - hi).abs();
            }
            Ok(GapEntry {
                m,
                b_lower: lo,
                b_upper: hi,
                gap: hi - lo,
                consistency_part,
                js_part: hi - consistency_part,
                decomposition_residual: residual,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn js_constants() {
        let (lo, hi) = bound_constants(&LossSpec::js(0.5), 2).unwrap();
        assert_abs_diff_eq!(lo, 1.2451124978365315, epsilon = 1e-13);
        assert_abs_diff_eq!(hi, 2.0, epsilon = 1e-13);
        let table = [
            (0.1, 3, 3.1684518284, 6.8565211837),
            (0.5, 4, 4.3903595256, 6.0),
            (0.9, 2, 1.1222215038, 1.4118174150),
        ];
        for (pi1, k, l, u) in table {
            let (lo, hi) = bound_constants(&LossSpec::js(pi1), k).unwrap();
            assert_abs_diff_eq!(lo, l, epsilon = 1e-9);
            assert_abs_diff_eq!(hi, u, epsilon = 1e-9);
        }
    }

    #[test]
    fn gjs_two_matches_js() {
        for pi1 in [0.1, 0.5, 0.9] {
            for k in 2..6 {
                let a = bound_constants(&LossSpec::js(pi1), k).unwrap();
                let b = bound_constants(&LossSpec::gjs(pi1, 2), k).unwrap();
                assert_abs_diff_eq!(a.0, b.0, epsilon = 1e-12);
                assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-12);
            }
        }
        assert!(bound_constants(&LossSpec::gjs(0.5, 5), 3).is_err());
    }

    #[test]
    fn mae_constants_and_unbounded() {
        assert_eq!(bound_constants(&LossSpec::new(LossKind::Mae), 5).unwrap(), (4.0, 4.0));
        match bound_constants(&LossSpec::new(LossKind::Ce), 3) {
            Err(Error::UnboundedLoss { clamp_bound, .. }) => assert!(clamp_bound > 50.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_search_passes() {
        let r = bound_search(&LossSpec::js(0.5), 3, 5000, 12).unwrap();
        assert!(r.passes(1e-9), "{r:?}");
        assert!(r.argmin_near_uniform());
        assert!(r.argmax_at_vertices());
        let r = bound_search(&LossSpec::gjs(0.5, 3), 3, 2000, 6).unwrap();
        assert!(r.passes(1e-9));
        assert!(r.argmax_at_vertices());
        assert_eq!(r.argmax_point.len(), 2);
    }

    #[test]
    fn search_is_schedule_independent() {
        let spec = LossSpec::gjs(0.3, 3);
        let o = SearchOptions { samples: 9000, grid_resolution: 5, seed: 4, exec: Exec::Sequential };
        let a = bound_search_with(&spec, 3, &o).unwrap();
        let b = bound_search_with(&spec, 3, &SearchOptions { exec: Exec::Parallel, ..o }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn corrupted_z_is_caught() {
        let spec = LossSpec::js(0.5).with_z(ZMode::Fixed(0.3));
        let r = bound_search(&spec, 2, 100, 10).unwrap();
        assert!(!r.passes(1e-9));
    }

    #[test]
    fn gap_grows_with_m() {
        for pi1 in [0.1, 0.5, 0.9] {
            let g = bound_gap_vs_m(pi1, 4, &[2, 3, 4, 5]).unwrap();
            for w in g.windows(2) {
                assert!(w[1].gap > w[0].gap);
                assert!(w[1].gap - g[0].gap <= w[1].consistency_part + 1e-12);
            }
            assert!(g.iter().all(|e| e.decomposition_residual < 1e-10));
        }
        let g = bound_gap_vs_m(0.5, 4, &[2, 3, 4]).unwrap();
        assert_abs_diff_eq!(g[0].gap, 6.0 - 4.3903595256, epsilon = 1e-9);
    }
}
