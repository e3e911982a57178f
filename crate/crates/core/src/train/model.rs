use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out x n_in`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// Fully connected layers with ReLU between them and raw logits at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub widths: Vec<usize>,
    pub layers: Vec<Layer>,
}

/// Parameters of every layer drawn from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
pub fn init_model(widths: &[usize], seed: u64) -> Result<MlpModel> {
    if widths.len() < 2 || widths.contains(&0) {
        return Err(Error::InvalidModel(format!("widths {widths:?} need >= 2 positive entries")));
    }
    if *widths.last().unwrap() < 2 {
        return Err(Error::InvalidModel("output width must be >= 2 classes".into()));
    }
    let mut rng = rng_for(seed, "init", 0);
    let layers = widths
        .windows(2)
        .map(|p| {
            let (n_in, n_out) = (p[0], p[1]);
            let bound = 1.0 / (n_in as f64).sqrt();
            let mut draw = || rng.random_range(-bound..bound);
            let w = (0..n_in * n_out).map(|_| draw()).collect();
            let b = (0..n_out).map(|_| draw()).collect();
            Layer { n_in, n_out, w, b }
        })
        .collect();
    Ok(MlpModel { widths: widths.to_vec(), layers })
}

/// Same shapes as the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros(m: &MlpModel) -> Self {
        Gradients { w: m.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(), b: m.layers.iter().map(|l| vec![0.0; l.b.len()]).collect() }
    }

    pub fn add(&mut self, o: &Gradients) {
        for (a, b) in self.w.iter_mut().zip(&o.w).chain(self.b.iter_mut().zip(&o.b)) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.w.iter().zip(&self.b).flat_map(|(w, b)| w.iter().chain(b).copied()).collect()
    }
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn num_classes(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.w.iter().chain(&l.b).all(|v| v.is_finite()))
    }

    /// Layer order, weights before biases.
    pub fn params_flat(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(&l.b).copied()).collect()
    }

    pub fn set_params_flat(&mut self, p: &[f64]) {
        let mut it = p.iter().copied();
        for l in &mut self.layers {
            for v in l.w.iter_mut().chain(l.b.iter_mut()) {
                *v = it.next().expect("parameter vector too short");
            }
        }
    }

    /// Fills `acts[0] = x`, then each layer's output; ReLU on all but the last.
    pub fn forward_into(&self, x: &[f64], acts: &mut Vec<Vec<f64>>) {
        acts.resize(self.layers.len() + 1, Vec::new());
        acts[0].clear();
        acts[0].extend_from_slice(x);
        let last = self.layers.len() - 1;
        for (li, l) in self.layers.iter().enumerate() {
            let (prev, rest) = acts.split_at_mut(li + 1);
            let input = &prev[li];
            let out = &mut rest[0];
            out.clear();
            for o in 0..l.n_out {
                let row = &l.w[o * l.n_in..(o + 1) * l.n_in];
                let mut s = l.b[o];
                for (w, a) in row.iter().zip(input) {
                    s += w * a;
                }
                out.push(if li < last { s.max(0.0) } else { s });
            }
        }
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        let mut acts = Vec::new();
        self.forward_into(x, &mut acts);
        acts.pop().unwrap()
    }

    /// Accumulates parameter gradients given `dlogits` and the activations of one forward pass.
    pub fn backward(&self, acts: &[Vec<f64>], dlogits: &[f64], grads: &mut Gradients, delta: &mut Vec<f64>, scratch: &mut Vec<f64>) {
        delta.clear();
        delta.extend_from_slice(dlogits);
        for li in (0..self.layers.len()).rev() {
            let l = &self.layers[li];
            let input = &acts[li];
            let gw = &mut grads.w[li];
            for o in 0..l.n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                grads.b[li][o] += d;
                let row = &mut gw[o * l.n_in..(o + 1) * l.n_in];
                for (g, a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
            }
            if li == 0 {
                break;
            }
            scratch.clear();
            scratch.resize(l.n_in, 0.0);
            for o in 0..l.n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (s, w) in scratch.iter_mut().zip(&l.w[o * l.n_in..(o + 1) * l.n_in]) {
                    *s += d * w;
                }
            }
            // ReLU derivative from the stored post-activation.
            for (s, a) in scratch.iter_mut().zip(input) {
                if *a <= 0.0 {
                    *s = 0.0;
                }
            }
            std::mem::swap(delta, scratch);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seeded() {
        let a = init_model(&[2, 8, 3], 5).unwrap();
        assert_eq!(a, init_model(&[2, 8, 3], 5).unwrap());
        assert_ne!(a, init_model(&[2, 8, 3], 6).unwrap());
        assert_eq!(a.param_count(), 51);
        assert!(init_model(&[2], 0).is_err());
        assert!(init_model(&[2, 0, 3], 0).is_err());
        assert!(init_model(&[2, 1], 0).is_err());
    }

    #[test]
    fn flat_roundtrip() {
        let mut m = init_model(&[3, 4, 2], 1).unwrap();
        let p = m.params_flat();
        let q: Vec<f64> = p.iter().map(|v| v * 2.0).collect();
        m.set_params_flat(&q);
        assert_eq!(m.params_flat(), q);
    }
}
