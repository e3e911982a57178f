use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The augmentation `A(x)`: Gaussian jitter followed by random masking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewSpec {
    #[serde(default = "one")]
    pub num_views: usize,
    #[serde(default)]
    pub jitter_sigma: f64,
    #[serde(default)]
    pub mask_prob: f64,
    /// Replace the first view with the unaugmented input.
    #[serde(default)]
    pub include_clean: bool,
}

fn one() -> usize {
    1
}

impl Default for ViewSpec {
    fn default() -> Self {
        ViewSpec { num_views: 1, jitter_sigma: 0.0, mask_prob: 0.0, include_clean: false }
    }
}

impl ViewSpec {
    pub fn identity(num_views: usize) -> Self {
        ViewSpec { num_views, ..Default::default() }
    }

    pub fn jitter(num_views: usize, sigma: f64) -> Self {
        ViewSpec { num_views, jitter_sigma: sigma, ..Default::default() }
    }

    pub fn is_identity(&self) -> bool {
        self.jitter_sigma == 0.0 && self.mask_prob == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_views == 0 {
            return Err(Error::InvalidConfig("views.num_views must be >= 1".into()));
        }
        if !(self.jitter_sigma.is_finite() && self.jitter_sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!("views.jitter_sigma = {}", self.jitter_sigma)));
        }
        if !(0.0..1.0).contains(&self.mask_prob) {
            return Err(Error::InvalidConfig(format!("views.mask_prob = {} outside [0, 1)", self.mask_prob)));
        }
        Ok(())
    }

    /// Draws one augmented copy of `x` into `out`.
    pub fn augment_into<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(x);
        if self.jitter_sigma > 0.0 {
            for v in out.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += self.jitter_sigma * z;
            }
        }
        if self.mask_prob > 0.0 {
            for v in out.iter_mut() {
                if rng.random::<f64>() < self.mask_prob {
                    *v = 0.0;
                }
            }
        }
    }
}

/// `num_views` independent perturbations of `x`. The identity spec draws no randomness.
pub fn make_views<R: Rng + ?Sized>(x: &[f64], vs: &ViewSpec, rng: &mut R) -> Vec<Vec<f64>> {
    (0..vs.num_views)
        .map(|v| {
            let mut out = Vec::with_capacity(x.len());
            if v == 0 && vs.include_clean {
                out.extend_from_slice(x);
            } else {
                vs.augment_into(x, rng, &mut out);
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;

    #[test]
    fn identity_views_copy_input() {
        let x = [0.5, -1.0, 2.0];
        let mut rng = rng_for(0, "t", 0);
        let views = make_views(&x, &ViewSpec::identity(3), &mut rng);
        assert!(views.iter().all(|v| v == &x));
    }

    #[test]
    fn jitter_mean_converges() {
        let x = [0.5, -1.0];
        let sigma = 0.1;
        let n = 10_000;
        let mut rng = rng_for(3, "t", 0);
        let vs = ViewSpec::jitter(n, sigma);
        let views = make_views(&x, &vs, &mut rng);
        assert_ne!(views[0], views[1]);
        for d in 0..2 {
            let mean: f64 = views.iter().map(|v| v[d]).sum::<f64>() / n as f64;
            assert!((mean - x[d]).abs() < 3.0 * sigma / (n as f64).sqrt());
        }
    }

    #[test]
    fn masking_zeroes_coordinates() {
        let x = vec![1.0; 1000];
        let mut rng = rng_for(1, "t", 0);
        let vs = ViewSpec { num_views: 1, mask_prob: 0.5, ..Default::default() };
        let v = &make_views(&x, &vs, &mut rng)[0];
        let zeros = v.iter().filter(|&&a| a == 0.0).count();
        assert!(zeros > 400 && zeros < 600);
    }

    #[test]
    fn include_clean_keeps_first_view() {
        let x = [1.0, 2.0];
        let mut rng = rng_for(1, "t", 0);
        let vs = ViewSpec { num_views: 2, jitter_sigma: 1.0, include_clean: true, ..Default::default() };
        let v = make_views(&x, &vs, &mut rng);
        assert_eq!(v[0], x);
        assert_ne!(v[1], x);
    }
}
