//! Noisy-blobs training criteria. The benchmark and thresholds are the ones
//! frozen in CALIBRATION.md; `examples/calibrate.rs` reruns any single arm.

use jsloss::data::{gen_blobs, inject_noise, split_with_test, Dataset, NoiseSpec, ViewSpec};
use jsloss::train::{train_loop, LrDrop, MetricsRecord, TrainConfig};
use jsloss::verify::suites::Claim;
use jsloss::{LossKind, LossSpec};

use super::{run, Outcome};

const EPOCHS: usize = 100;
const OVERFIT_DROP: f64 = 0.05;
const STABLE_DROP: f64 = 0.02;
const MIN_MARGIN: f64 = 0.05;
const MIN_PEARSON: f64 = 0.5;

fn benchmark() -> Dataset {
    let ds = gen_blobs(4, 500, 24, 0.33, 7).unwrap();
    let ds = split_with_test(&ds, 0.1, 0.3, 8).unwrap();
    inject_noise(&ds, &NoiseSpec::symmetric_resample(0.4, 9)).unwrap().0
}

fn config(loss: LossSpec) -> TrainConfig {
    let mut cfg = TrainConfig::new(loss);
    cfg.hidden = vec![128, 128];
    cfg.epochs = EPOCHS;
    cfg.batch_size = 64;
    cfg.lr = 0.1;
    cfg.momentum = 0.9;
    cfg.weight_decay = 1e-3;
    cfg.lr_drops = vec![LrDrop { epoch: EPOCHS / 2, factor: 0.1 }, LrDrop { epoch: EPOCHS * 3 / 4, factor: 0.1 }];
    cfg.views = ViewSpec::jitter(1, 0.2);
    cfg.seed = 10;
    cfg
}

struct Curve {
    label: String,
    metrics: Vec<MetricsRecord>,
}

impl Curve {
    fn train(ds: &Dataset, loss: LossSpec) -> Curve {
        let metrics = train_loop(ds, &config(loss)).unwrap().metrics;
        assert!(metrics.iter().all(|m| m.train_loss.is_finite()));
        Curve { label: loss.kind.to_string(), metrics }
    }

    fn test(&self) -> Vec<f64> {
        self.metrics.iter().map(|m| m.test_acc.unwrap()).collect()
    }

    fn peak(&self) -> f64 {
        self.test().into_iter().fold(0.0, f64::max)
    }

    fn last(&self) -> f64 {
        *self.test().last().unwrap()
    }

    fn drop(&self) -> f64 {
        self.peak() - self.last()
    }

    fn shape(&self) -> String {
        format!("{} peak {:.4} final {:.4}", self.label, self.peak(), self.last())
    }
}

/// Passes when `value >= threshold`; reported as the shortfall.
fn at_least(name: &str, value: f64, threshold: f64, detail: String) -> Claim {
    let mut c = Claim::new(name, name, 0.0, threshold - value, detail);
    c.passed = value >= threshold;
    c
}

fn overfits(c: &Curve) -> Claim {
    at_least(&format!("{}-overfits", c.label), c.drop(), OVERFIT_DROP, c.shape())
}

fn stable(c: &Curve) -> Claim {
    at_least(&format!("{}-stays-near-peak", c.label), STABLE_DROP - c.drop(), 0.0, c.shape())
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Correlation of consistency and validation accuracy from the val-acc peak on.
fn post_peak_pearson(m: &[MetricsRecord]) -> (usize, f64) {
    let at = (0..m.len()).fold(0, |b, i| if m[i].val_acc > m[b].val_acc { i } else { b });
    let post = &m[at..];
    let cons: Vec<f64> = post.iter().map(|r| r.consistency).collect();
    let val: Vec<f64> = post.iter().map(|r| r.val_acc).collect();
    (at + 1, pearson(&cons, &val))
}

pub fn training_criteria() -> Vec<Outcome> {
    let ds = benchmark();
    let outcomes = vec![
        run(10, "noisy blobs: CE overfits, GJS does not", 180, || {
            let ce = Curve::train(&ds, LossSpec::new(LossKind::Ce));
            let gjs = Curve::train(&ds, LossSpec::gjs(0.5, 3));
            let (from, r) = post_peak_pearson(&ce.metrics);
            let noisy_fit = ce.metrics.last().unwrap().train_acc_noisy;
            vec![
                overfits(&ce),
                stable(&gjs),
                at_least("gjs-beats-ce", gjs.last() - ce.last(), MIN_MARGIN, format!("{} vs {}", gjs.shape(), ce.shape())),
                at_least(
                    "ce-consistency-tracks-val",
                    r,
                    MIN_PEARSON + f64::EPSILON,
                    format!("pearson {r:.3} over epochs {from}..={EPOCHS}"),
                ),
                at_least("ce-memorizes-noise", noisy_fit, 1.0 - 0.4 * 3.0 / 4.0, format!("final noisy train acc {noisy_fit:.4}")),
            ]
        }),
        run(11, "JS dissection: KL and Jeffreys overfit, JS does not", 300, || {
            let kl = Curve::train(&ds, LossSpec::new(LossKind::Kl));
            let jeffreys = Curve::train(&ds, LossSpec::new(LossKind::Jeffreys));
            let js = Curve::train(&ds, LossSpec::js(0.9));
            vec![overfits(&kl), overfits(&jeffreys), stable(&js)]
        }),
        run(12, "consistency term: GJS >= JS on the mean prediction", 180, || {
            let gjs = Curve::train(&ds, LossSpec::gjs(0.5, 3));
            let mean = Curve::train(&ds, LossSpec::js_on_mean(0.5, 3));
            vec![at_least("gjs-not-below-js-on-mean", gjs.last() - mean.last(), 0.0, format!("{} vs {}", gjs.shape(), mean.shape()))]
        }),
    ];
    outcomes.iter().for_each(Outcome::print);
    outcomes
}
