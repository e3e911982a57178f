//! Random points for the searches and property checks.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::simplex::ProbVec;

/// Uniform on the simplex (flat Dirichlet).
pub fn flat<R: Rng + ?Sized>(rng: &mut R, k: usize) -> ProbVec {
    let e: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = e.iter().sum();
    ProbVec::from_vec_unchecked(e.into_iter().map(|v| v / s).collect())
}

/// A vertex pulled in by a log-uniform amount in `[1e-8, 1e-1]`.
pub fn near_vertex<R: Rng + ?Sized>(rng: &mut R, k: usize) -> ProbVec {
    let j = rng.random_range(0..k);
    let eps = 10f64.powf(-rng.random_range(1.0..8.0));
    let d = flat(rng, k);
    let mut v: Vec<f64> = d.as_slice().iter().map(|x| eps * x).collect();
    v[j] += 1.0 - eps;
    ProbVec::from_vec_unchecked(v)
}

/// Three flat draws for every near-vertex draw.
pub fn mixed<R: Rng + ?Sized>(rng: &mut R, k: usize) -> ProbVec {
    if rng.random_range(0..4) == 0 {
        near_vertex(rng, k)
    } else {
        flat(rng, k)
    }
}

/// `floor + (1 - k floor) d` with `d` flat, so every entry is at least `floor`.
pub fn floored<R: Rng + ?Sized>(rng: &mut R, k: usize, floor: f64) -> ProbVec {
    let d = flat(rng, k);
    let scale = 1.0 - k as f64 * floor;
    ProbVec::from_vec_unchecked(d.as_slice().iter().map(|x| floor + scale * x).collect())
}

pub fn logits<R: Rng + ?Sized>(rng: &mut R, k: usize, scale: f64) -> Vec<f64> {
    (0..k).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}
