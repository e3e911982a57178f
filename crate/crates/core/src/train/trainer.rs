use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::model::{init_model, Gradients, MlpModel};
use crate::data::{Dataset, SplitTag, ViewSpec};
use crate::error::{Error, Result};
use crate::loss::{eval_logits, LossSpec};
use crate::par::{map_indices, Exec};
use crate::seed::{derive_seed, rng_for};
use crate::simplex::argmax;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrDrop {
    /// Zero-based epoch from which the factor applies.
    pub epoch: usize,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossSpec,
    /// Hidden layer widths; input and output widths come from the dataset.
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub lr_drops: Vec<LrDrop>,
    /// Augmentation; the number of views is taken from the loss.
    pub views: ViewSpec,
    pub seed: u64,
    /// Fixed gradient shards per batch; 1 is the single-threaded reference mode.
    pub shards: usize,
    pub exec: Exec,
}

impl TrainConfig {
    pub fn new(loss: LossSpec) -> Self {
        TrainConfig {
            loss,
            hidden: vec![128, 128],
            epochs: 100,
            batch_size: 64,
            lr: 0.1,
            momentum: 0.9,
            weight_decay: 1e-3,
            lr_drops: vec![LrDrop { epoch: 50, factor: 0.1 }, LrDrop { epoch: 75, factor: 0.1 }],
            views: ViewSpec::default(),
            seed: 0,
            shards: 1,
            exec: Exec::Parallel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        self.loss.validate()?;
        self.views.validate()?;
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr = {} must be positive", self.lr));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum = {} outside [0, 1)", self.momentum));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad(format!("weight_decay = {}", self.weight_decay));
        }
        if self.batch_size == 0 || self.shards == 0 {
            return bad("batch_size and shards must be >= 1".into());
        }
        if let Some(d) = self.lr_drops.iter().find(|d| !(d.factor > 0.0 && d.factor.is_finite())) {
            return bad(format!("lr drop factor {} must be positive", d.factor));
        }
        Ok(())
    }

    /// The training view spec with as many views as the loss has predictions.
    pub fn train_views(&self) -> ViewSpec {
        ViewSpec { num_views: self.loss.num_predictions(), ..self.views }
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        self.lr_drops.iter().filter(|d| d.epoch <= epoch).fold(self.lr, |lr, d| lr * d.factor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// One-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc_noisy: f64,
    pub train_acc_clean: f64,
    pub val_acc: f64,
    pub consistency: f64,
    pub seconds: f64,
    /// Clean accuracy on `Test` rows, when there are any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_acc: Option<f64>,
}

/// SGD with Nesterov momentum and L2 weight decay.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    velocity: Gradients,
}

impl Optimizer {
    pub fn new(model: &MlpModel) -> Self {
        Optimizer { velocity: Gradients::zeros(model) }
    }

    /// `g += wd theta; v = mu v + g; theta -= lr (g + mu v)`.
    pub fn step(&mut self, model: &mut MlpModel, grads: &Gradients, lr: f64, momentum: f64, weight_decay: f64) {
        for (li, layer) in model.layers.iter_mut().enumerate() {
            let pairs = [(&mut layer.w, &grads.w[li], &mut self.velocity.w[li]), (&mut layer.b, &grads.b[li], &mut self.velocity.b[li])];
            for (theta, g, v) in pairs {
                for ((t, &gi), vi) in theta.iter_mut().zip(g.iter()).zip(v.iter_mut()) {
                    let g = gi + weight_decay * *t;
                    *vi = momentum * *vi + g;
                    *t -= lr * (g + momentum * *vi);
                }
            }
        }
    }
}

fn view_index(ds: &Dataset, epoch: usize, row: usize) -> u64 {
    epoch as u64 * ds.len() as u64 + row as u64
}

/// Mean loss and mean parameter gradient over `rows`. Rows are split into
/// `cfg.shards` contiguous shards whose sums are added in shard order.
pub fn batch_gradient(model: &MlpModel, ds: &Dataset, rows: &[usize], cfg: &TrainConfig, epoch: usize, batch: usize) -> Result<(f64, Gradients)> {
    if rows.is_empty() {
        return Err(Error::InvalidConfig("empty batch".into()));
    }
    let vs = cfg.train_views();
    let shards = cfg.shards.min(rows.len());
    let per = rows.len().div_ceil(shards);
    let parts = map_indices(cfg.exec, shards, |s| -> Result<(f64, Gradients)> {
        let mut grads = Gradients::zeros(model);
        let mut total = 0.0;
        let mut acts: Vec<Vec<Vec<f64>>> = vec![Vec::new(); vs.num_views];
        let (mut delta, mut scratch, mut view) = (Vec::new(), Vec::new(), Vec::new());
        for &row in rows.iter().skip(s * per).take(per) {
            let mut rng = rng_for(cfg.seed, "views", view_index(ds, epoch, row));
            let x = ds.row(row);
            for (v, a) in acts.iter_mut().enumerate() {
                if v == 0 && vs.include_clean {
                    model.forward_into(x, a);
                } else {
                    vs.augment_into(x, &mut rng, &mut view);
                    model.forward_into(&view, a);
                }
            }
            let logits: Vec<&[f64]> = acts.iter().map(|a| a.last().unwrap().as_slice()).collect();
            let ev = eval_logits(&cfg.loss, ds.labels[row], &logits)?;
            if !ev.value.is_finite() || ev.grad_logits.iter().any(|g| g.as_slice().iter().any(|v| !v.is_finite())) {
                return Err(Error::NonFiniteLoss { epoch, batch });
            }
            total += ev.value;
            for (a, g) in acts.iter().zip(&ev.grad_logits) {
                model.backward(a, g.as_slice(), &mut grads, &mut delta, &mut scratch);
            }
        }
        Ok((total, grads))
    });
    let mut total = 0.0;
    let mut grads = Gradients::zeros(model);
    for p in parts {
        let (l, g) = p?;
        total += l;
        grads.add(&g);
    }
    let scale = 1.0 / rows.len() as f64;
    for v in grads.w.iter_mut().chain(grads.b.iter_mut()).flatten() {
        *v *= scale;
    }
    Ok((total * scale, grads))
}

/// One optimizer step on `rows`; returns the batch's mean loss before the step.
#[allow(clippy::too_many_arguments)]
pub fn train_step(
    model: &mut MlpModel,
    opt: &mut Optimizer,
    ds: &Dataset,
    rows: &[usize],
    cfg: &TrainConfig,
    epoch: usize,
    batch: usize,
    lr: f64,
) -> Result<f64> {
    let (loss, grads) = batch_gradient(model, ds, rows, cfg, epoch, batch)?;
    opt.step(model, &grads, lr, cfg.momentum, cfg.weight_decay);
    Ok(loss)
}

/// Top-1 class; ties go to the lowest index.
pub fn predict(model: &MlpModel, x: &[f64]) -> usize {
    argmax(&model.logits(x))
}

/// Fraction of `rows` whose prediction equals `labels[row]`; 0 for no rows.
pub fn evaluate(model: &MlpModel, ds: &Dataset, rows: &[usize], labels: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter().filter(|&&r| predict(model, ds.row(r)) == labels[r]).count() as f64 / rows.len() as f64
}

/// Fraction of `rows` whose prediction is unchanged under one fresh view; 1 for no rows.
pub fn consistency_rate(model: &MlpModel, ds: &Dataset, rows: &[usize], vs: &ViewSpec, seed: u64) -> f64 {
    if rows.is_empty() {
        return 1.0;
    }
    let one = ViewSpec { num_views: 1, include_clean: false, ..*vs };
    let mut view = Vec::new();
    let same = rows
        .iter()
        .filter(|&&r| {
            let x = ds.row(r);
            let mut rng = rng_for(seed, "consistency", r as u64);
            one.augment_into(x, &mut rng, &mut view);
            predict(model, x) == predict(model, &view)
        })
        .count();
    same as f64 / rows.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub metrics: Vec<MetricsRecord>,
    pub model: MlpModel,
}

pub fn train_loop(ds: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_loop_with(ds, cfg, |_| Ok(()))
}

/// Trains on `Train` rows, calling `on_epoch` after each epoch's metrics are computed.
pub fn train_loop_with(ds: &Dataset, cfg: &TrainConfig, mut on_epoch: impl FnMut(&MetricsRecord) -> Result<()>) -> Result<TrainOutcome> {
    cfg.validate()?;
    ds.validate()?;
    let train = ds.rows_with(SplitTag::Train);
    if train.is_empty() {
        return Err(Error::InvalidDataset("no training rows".into()));
    }
    let val = ds.rows_with(SplitTag::Val);
    let test = ds.rows_with(SplitTag::Test);
    let mut widths = vec![ds.dim];
    widths.extend(&cfg.hidden);
    widths.push(ds.k);
    let mut model = init_model(&widths, derive_seed(cfg.seed, "model", 0))?;
    let mut opt = Optimizer::new(&model);
    let mut metrics = Vec::with_capacity(cfg.epochs);
    let mut order = train.clone();
    for epoch in 0..cfg.epochs {
        let start = Instant::now();
        let lr = cfg.lr_at(epoch);
        order.copy_from_slice(&train);
        order.shuffle(&mut rng_for(cfg.seed, "shuffle", epoch as u64));
        let mut loss_sum = 0.0;
        for (b, rows) in order.chunks(cfg.batch_size).enumerate() {
            loss_sum += train_step(&mut model, &mut opt, ds, rows, cfg, epoch, b, lr)? * rows.len() as f64;
        }
        if !model.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, batch: order.len().div_ceil(cfg.batch_size) });
        }
        let rec = MetricsRecord {
            epoch: epoch + 1,
            train_loss: loss_sum / train.len() as f64,
            train_acc_noisy: evaluate(&model, ds, &train, &ds.labels),
            train_acc_clean: evaluate(&model, ds, &train, &ds.clean_labels),
            val_acc: evaluate(&model, ds, &val, &ds.clean_labels),
            consistency: consistency_rate(&model, ds, &train, &cfg.views, derive_seed(cfg.seed, "consistency-epoch", epoch as u64)),
            seconds: start.elapsed().as_secs_f64(),
            test_acc: (!test.is_empty()).then(|| evaluate(&model, ds, &test, &ds.clean_labels)),
        };
        on_epoch(&rec)?;
        metrics.push(rec);
    }
    Ok(TrainOutcome { metrics, model })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_blobs, split};
    use crate::loss::LossKind;
    use crate::verify::fd::relative_error;

    fn small_ds() -> Dataset {
        split(&gen_blobs(3, 20, 2, 0.3, 1).unwrap(), 0.2, 1).unwrap()
    }

    fn without_time(m: &[MetricsRecord]) -> Vec<MetricsRecord> {
        m.iter().map(|r| MetricsRecord { seconds: 0.0, ..r.clone() }).collect()
    }

    #[test]
    fn zero_lr_leaves_parameters() {
        let ds = small_ds();
        let cfg = TrainConfig::new(LossSpec::js(0.5));
        let mut m = init_model(&[2, 4, 3], 0).unwrap();
        let before = m.clone();
        let mut opt = Optimizer::new(&m);
        train_step(&mut m, &mut opt, &ds, &[0, 1, 2], &cfg, 0, 0, 0.0).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn small_step_descends() {
        let ds = small_ds();
        let mut cfg = TrainConfig::new(LossSpec::js(0.5));
        cfg.weight_decay = 0.0;
        cfg.momentum = 0.0;
        let mut m = init_model(&[2, 8, 3], 3).unwrap();
        let mut opt = Optimizer::new(&m);
        let before = train_step(&mut m, &mut opt, &ds, &[5], &cfg, 0, 0, 1e-3).unwrap();
        let (after, _) = batch_gradient(&m, &ds, &[5], &cfg, 0, 0).unwrap();
        assert!(after <= before);
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let ds = small_ds();
        let rows: Vec<usize> = (0..10).collect();
        let specs = LossKind::ALL.map(|k| match k {
            LossKind::Gjs => LossSpec::gjs(0.4, 3),
            LossKind::JsOnMean => LossSpec::js_on_mean(0.4, 3),
            _ => LossSpec::new(k),
        });
        for spec in specs {
            if spec.kind == LossKind::Bs {
                continue;
            }
            let mut cfg = TrainConfig::new(spec);
            cfg.views = ViewSpec::jitter(1, 0.2);
            let model = init_model(&[2, 4, 3], 11).unwrap();
            let (_, g) = batch_gradient(&model, &ds, &rows, &cfg, 0, 0).unwrap();
            let p = model.params_flat();
            let h = 1e-6;
            let mut num = Vec::with_capacity(p.len());
            let mut probe = model.clone();
            for i in 0..p.len() {
                let mut q = p.clone();
                q[i] = p[i] + h;
                probe.set_params_flat(&q);
                let up = batch_gradient(&probe, &ds, &rows, &cfg, 0, 0).unwrap().0;
                q[i] = p[i] - h;
                probe.set_params_flat(&q);
                let down = batch_gradient(&probe, &ds, &rows, &cfg, 0, 0).unwrap().0;
                num.push((up - down) / (2.0 * h));
            }
            let err = relative_error(&[g.flat()], &[num]);
            assert!(err < 1e-5, "{}: {err}", spec.kind);
        }
    }

    #[test]
    fn deterministic_and_shard_stable() {
        let ds = small_ds();
        let mut cfg = TrainConfig::new(LossSpec::gjs(0.5, 3));
        cfg.epochs = 3;
        cfg.batch_size = 8;
        cfg.views = ViewSpec::jitter(2, 0.3);
        let a = train_loop(&ds, &cfg).unwrap();
        let b = train_loop(&ds, &cfg).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(without_time(&a.metrics), without_time(&b.metrics));
        let par = TrainConfig { shards: 4, exec: Exec::Parallel, ..cfg.clone() };
        let seq = TrainConfig { shards: 4, exec: Exec::Sequential, ..cfg };
        assert_eq!(train_loop(&ds, &par).unwrap().model, train_loop(&ds, &seq).unwrap().model);
    }

    #[test]
    fn gjs_two_reproduces_js() {
        let ds = small_ds();
        let mut js = TrainConfig::new(LossSpec::js(0.3));
        js.epochs = 3;
        js.batch_size = 8;
        let gjs = TrainConfig { loss: LossSpec::gjs(0.3, 2), ..js.clone() };
        let a = train_loop(&ds, &js).unwrap();
        let b = train_loop(&ds, &gjs).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(without_time(&a.metrics), without_time(&b.metrics));
    }

    #[test]
    fn zero_epochs() {
        let ds = small_ds();
        let mut cfg = TrainConfig::new(LossSpec::new(LossKind::Ce));
        cfg.epochs = 0;
        let out = train_loop(&ds, &cfg).unwrap();
        assert!(out.metrics.is_empty());
        assert_eq!(out.model, init_model(&[2, 128, 128, 3], derive_seed(0, "model", 0)).unwrap());
    }

    #[test]
    fn initial_loss_near_ln_k() {
        let ds = gen_blobs(4, 50, 5, 1.0, 2).unwrap();
        let cfg = TrainConfig::new(LossSpec::new(LossKind::Ce));
        let m = init_model(&[5, 128, 128, 4], 9).unwrap();
        let rows: Vec<usize> = (0..ds.len()).collect();
        let (l, _) = batch_gradient(&m, &ds, &rows, &cfg, 0, 0).unwrap();
        assert!((l / 4f64.ln() - 1.0).abs() < 0.2, "{l}");
    }

    #[test]
    fn evaluation_helpers() {
        let ds = Dataset::new(2, 1, (0..10).map(|i| i as f64 - 4.5).collect(), vec![0, 0, 0, 0, 1, 1, 1, 1, 1, 0]).unwrap();
        let mut m = init_model(&[1, 2], 0).unwrap();
        // logits = [-x, x]: class 1 for positive inputs.
        m.set_params_flat(&[-1.0, 1.0, 0.0, 0.0]);
        let rows: Vec<usize> = (0..10).collect();
        assert_eq!(evaluate(&m, &ds, &rows, &ds.labels), 0.8);
        m.set_params_flat(&[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(evaluate(&m, &ds, &rows, &ds.labels), 0.5);
        assert_eq!(consistency_rate(&m, &ds, &rows, &ViewSpec::identity(1), 0), 1.0);
    }
}
