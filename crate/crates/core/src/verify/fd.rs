//! Central finite differences over logit vectors.

use crate::error::{Error, Result};

/// `(f(z + h e_i) - f(z - h e_i)) / 2h` for every coordinate of every vector.
pub fn finite_diff_grad<F>(f: F, zs: &[Vec<f64>], h: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[Vec<f64>]) -> Result<f64>,
{
    if !(1e-8..=1e-3).contains(&h) {
        return Err(Error::InvalidConfig(format!("finite-difference step {h} outside [1e-8, 1e-3]")));
    }
    let mut work: Vec<Vec<f64>> = zs.to_vec();
    let mut out = Vec::with_capacity(zs.len());
    for j in 0..zs.len() {
        let mut g = Vec::with_capacity(zs[j].len());
        for i in 0..zs[j].len() {
            let base = zs[j][i];
            work[j][i] = base + h;
            let up = f(&work)?;
            work[j][i] = base - h;
            let down = f(&work)?;
            work[j][i] = base;
            if !(up.is_finite() && down.is_finite()) {
                return Err(Error::NonFiniteValue);
            }
            g.push((up - down) / (2.0 * h));
        }
        out.push(g);
    }
    Ok(out)
}

/// `max |a - b| / max(max |a|, max |b|)` over all coordinates, 0 when both vanish.
pub fn relative_error(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let (mut diff, mut scale): (f64, f64) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        for (p, q) in x.iter().zip(y) {
            diff = diff.max((p - q).abs());
            scale = scale.max(p.abs()).max(q.abs());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let f = |z: &[Vec<f64>]| Ok(z[0].iter().map(|v| v * v).sum::<f64>());
        let g = finite_diff_grad(f, &[vec![1.0, 2.0]], 1e-5).unwrap();
        assert!((g[0][0] - 2.0).abs() < 1e-8 && (g[0][1] - 4.0).abs() < 1e-8);
        assert!(finite_diff_grad(f, &[vec![1.0]], 1e-2).is_err());
        let bad = |_: &[Vec<f64>]| Ok(f64::NAN);
        assert_eq!(finite_diff_grad(bad, &[vec![1.0]], 1e-5), Err(Error::NonFiniteValue));
    }

    #[test]
    fn js_example_gradient() {
        use crate::loss::{loss_from_logits, LossSpec};
        let spec = LossSpec::js(0.5);
        let f = |z: &[Vec<f64>]| loss_from_logits(&spec, 0, &[&z[0]]);
        let g = finite_diff_grad(f, &[vec![0.0, 0.0]], 1e-6).unwrap();
        assert!((g[0][0] + 0.3962406251802890).abs() < 1e-6);
        // Symmetric point: antisymmetric gradient.
        assert!((g[0][0] + g[0][1]).abs() < 1e-9);
    }
}
