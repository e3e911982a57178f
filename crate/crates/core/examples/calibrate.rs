//! Seeded noisy-blobs runs used to freeze the training acceptance thresholds.
//!
//! cargo run --release -p jsloss --example calibrate -- <loss> [key=value ...]

use jsloss::data::{gen_blobs, inject_noise, split_with_test, NoiseSpec, ViewSpec};
use jsloss::train::{train_loop, LrDrop, TrainConfig};
use jsloss::{LossKind, LossSpec};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind: LossKind = args.first().map(String::as_str).unwrap_or("ce").parse().unwrap();
    let arg = |key: &str, d: f64| -> f64 {
        args.iter().filter_map(|a| a.strip_prefix(&format!("{key}="))).next().map(|v| v.parse().unwrap()).unwrap_or(d)
    };
    let dim = arg("dim", 24.0) as usize;
    let spread = arg("spread", 0.33);
    let hidden = arg("hidden", 128.0) as usize;
    let epochs = arg("epochs", 100.0) as usize;
    let lr = arg("lr", 0.1);
    let sigma = arg("sigma", 0.2);
    let wd = arg("wd", 1e-3);
    let drops = arg("drops", 1.0) != 0.0;
    let test_frac = arg("test", 0.3);
    let mask = arg("mask", 0.0);
    let pi1 = arg("pi1", 0.5);
    let batch = arg("batch", 64.0) as usize;
    let ds = gen_blobs(4, 500, dim, spread, 7).unwrap();
    let ds = split_with_test(&ds, 0.1, test_frac, 8).unwrap();
    let (ds, rep) = inject_noise(&ds, &NoiseSpec::symmetric_resample(0.4, 9)).unwrap();
    eprintln!("changed fraction {:.3}", rep.changed_fraction);

    let spec = match kind {
        LossKind::Gjs => LossSpec::gjs(pi1, 3),
        LossKind::JsOnMean => LossSpec::js_on_mean(pi1, 3),
        LossKind::Js => LossSpec::js(pi1),
        k => LossSpec::new(k),
    };
    let mut cfg = TrainConfig::new(spec);
    cfg.hidden = vec![hidden, hidden];
    cfg.epochs = epochs;
    cfg.lr = lr;
    cfg.batch_size = batch;
    cfg.weight_decay = wd;
    if !drops {
        cfg.lr_drops = vec![];
    } else {
        cfg.lr_drops = vec![LrDrop { epoch: epochs / 2, factor: 0.1 }, LrDrop { epoch: epochs * 3 / 4, factor: 0.1 }];
    }
    cfg.views = ViewSpec { mask_prob: mask, ..ViewSpec::jitter(1, sigma) };
    cfg.seed = 10;
    let t = std::time::Instant::now();
    let out = train_loop(&ds, &cfg).unwrap();
    let test: Vec<f64> = out.metrics.iter().map(|m| m.test_acc.unwrap()).collect();
    let peak = test.iter().cloned().fold(0.0, f64::max);
    for m in out.metrics.iter().step_by((epochs / 20).max(1)) {
        println!(
            "{:>4} loss {:.4} noisy {:.3} clean {:.3} val {:.3} test {:.3} cons {:.3}",
            m.epoch, m.train_loss, m.train_acc_noisy, m.train_acc_clean, m.val_acc, m.test_acc.unwrap(), m.consistency
        );
    }
    let peak_at = (0..out.metrics.len()).fold(0, |b, i| if out.metrics[i].val_acc > out.metrics[b].val_acc { i } else { b });
    let post = &out.metrics[peak_at..];
    let r = pearson(&post.iter().map(|m| m.consistency).collect::<Vec<_>>(), &post.iter().map(|m| m.val_acc).collect::<Vec<_>>());
    println!("post-peak (from epoch {}) consistency/val pearson {r:.3}", peak_at + 1);
    println!("{kind}: peak {peak:.4} final {:.4} in {:.1}s", test.last().unwrap(), t.elapsed().as_secs_f64());
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
