//! Lattice points of the simplex with a fixed denominator.

use crate::error::{Error, Result};
use crate::simplex::ProbVec;

/// Number of compositions of `res` into `k` non-negative parts.
pub fn grid_size(k: usize, res: usize) -> u128 {
    // C(res + k - 1, k - 1), built incrementally so every division is exact.
    let mut c: u128 = 1;
    for i in 1..k as u128 {
        c = c * (res as u128 + i) / i;
    }
    c
}

/// All count vectors summing to `res`, starting from `[res, 0, ..., 0]`.
pub fn compositions(k: usize, res: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            rec(k, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k >= 1 {
        rec(k, res, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Every point of the simplex grid with step `1/res`.
pub fn simplex_grid(k: usize, res: usize) -> Result<Vec<ProbVec>> {
    if k < 2 || res < 1 {
        return Err(Error::InvalidConfig(format!("grid needs K >= 2 and resolution >= 1, got {k}, {res}")));
    }
    let cap = 10_000_000u128;
    let n = grid_size(k, res);
    if n > cap {
        return Err(Error::ResourceCap { needed: n, cap });
    }
    let r = res as f64;
    Ok(compositions(k, res)
        .into_iter()
        .map(|c| ProbVec::from_vec_unchecked(c.into_iter().map(|v| v as f64 / r).collect()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        assert_eq!(grid_size(3, 30), 496);
        assert_eq!(grid_size(2, 10), 11);
        assert_eq!(compositions(3, 30).len(), 496);
        assert_eq!(compositions(4, 5).len() as u128, grid_size(4, 5));
        let g = simplex_grid(3, 30).unwrap();
        assert_eq!(g[0].as_slice(), &[1.0, 0.0, 0.0]);
        assert!(g.iter().any(|p| p.as_slice().iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15)));
        assert!(simplex_grid(20, 60).is_err());
    }
}
