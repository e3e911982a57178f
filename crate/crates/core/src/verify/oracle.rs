//! Plain-slice reference formulas, written without touching the library
//! entropy, KL and mixture code so that they can check it.

/// `sum_i w_i KL(p_i || m)`, using `ln(x) - ln(y)` rather than `ln(x / y)`.
pub fn gjs_kl(w: &[f64], ps: &[&[f64]]) -> f64 {
    let k = ps[0].len();
    let mut m = vec![0.0f64; k];
    for (wi, p) in w.iter().zip(ps) {
        for c in 0..k {
            m[c] += wi * p[c];
        }
    }
    let mut total = 0.0;
    for (wi, p) in w.iter().zip(ps) {
        for c in 0..k {
            if p[c] != 0.0 {
                total += wi * p[c] * (p[c].ln() - m[c].ln());
            }
        }
    }
    total
}

pub fn one_hot(k: usize, y: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    v[y] = 1.0;
    v
}

/// `(JS_{[pi1, 1-pi1]}(e_y, mean), (1 - pi1) GJS_uniform(preds))`, unnormalized.
pub fn decomposition_terms(pi1: f64, y: usize, preds: &[&[f64]]) -> (f64, f64) {
    let k = preds[0].len();
    let n = preds.len() as f64;
    let mean: Vec<f64> = (0..k).map(|c| preds.iter().map(|p| p[c]).sum::<f64>() / n).collect();
    let label = one_hot(k, y);
    let js = gjs_kl(&[pi1, 1.0 - pi1], &[&label, &mean]);
    let w = vec![1.0 / n; preds.len()];
    (js, (1.0 - pi1) * gjs_kl(&w, preds))
}

/// `H(w)` for a weight vector.
pub fn weight_entropy(w: &[f64]) -> f64 {
    -w.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let u = [0.5, 0.5];
        let e = [1.0, 0.0];
        assert!((gjs_kl(&[0.5, 0.5], &[&e, &u]) - 0.2157615543388357).abs() < 1e-15);
        let (js, c) = decomposition_terms(1.0 / 3.0, 0, &[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert!((js + c - 3f64.ln()).abs() < 1e-15);
    }
}
