use rand::Rng;
use rand_distr::StandardNormal;

use super::dataset::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Class centers at unit distance from the origin: on the coordinate axes
/// when `dim >= k`, otherwise evenly around a circle in the first two
/// coordinates (or along a line when `dim == 1`).
pub fn blob_centers(k: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|j| {
            let mut c = vec![0.0; dim];
            if dim >= k {
                c[j] = 1.0;
            } else if dim >= 2 {
                let a = std::f64::consts::TAU * j as f64 / k as f64;
                c[0] = a.cos();
                c[1] = a.sin();
            } else {
                c[0] = j as f64;
            }
            c
        })
        .collect()
}

/// `k` isotropic Gaussian clusters of `n_per_class` points each, class-major order.
pub fn gen_blobs(k: usize, n_per_class: usize, dim: usize, spread: f64, seed: u64) -> Result<Dataset> {
    if k < 2 || n_per_class == 0 || dim == 0 {
        return Err(Error::InvalidDataset(format!("blobs need K >= 2, n >= 1, dim >= 1; got {k}, {n_per_class}, {dim}")));
    }
    if !(spread.is_finite() && spread >= 0.0) {
        return Err(Error::InvalidDataset(format!("spread = {spread}")));
    }
    let centers = blob_centers(k, dim);
    let mut rng = rng_for(seed, "blobs", 0);
    let mut features = Vec::with_capacity(k * n_per_class * dim);
    let mut labels = Vec::with_capacity(k * n_per_class);
    for (j, c) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            for &cd in c {
                let z: f64 = rng.sample(StandardNormal);
                features.push(cd + spread * z);
            }
            labels.push(j);
        }
    }
    let mut ds = Dataset::new(k, dim, features, labels)?;
    ds.provenance = Provenance { source: format!("blobs(k={k}, n={n_per_class}, dim={dim}, spread={spread})"), seed: Some(seed), ..Default::default() };
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let a = gen_blobs(3, 20, 4, 0.3, 11).unwrap();
        assert_eq!(a, gen_blobs(3, 20, 4, 0.3, 11).unwrap());
        assert_ne!(a.features, gen_blobs(3, 20, 4, 0.3, 12).unwrap().features);
    }

    #[test]
    fn zero_spread_is_separable() {
        let ds = gen_blobs(2, 10, 2, 0.0, 1).unwrap();
        // The linear probe sign(x0 - x1) separates the two axis centers.
        for i in 0..ds.len() {
            let r = ds.row(i);
            let pred = if r[0] > r[1] { 0 } else { 1 };
            assert_eq!(pred, ds.labels[i]);
        }
    }

    #[test]
    fn circle_centers_when_dim_small() {
        let c = blob_centers(4, 2);
        assert!((c[1][1] - 1.0).abs() < 1e-15);
        assert!(gen_blobs(1, 10, 2, 0.1, 0).is_err());
        assert!(gen_blobs(2, 10, 2, -0.1, 0).is_err());
    }
}
