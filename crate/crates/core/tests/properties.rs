use jsloss::data::{gen_blobs, inject_noise, NoiseSpec};
use jsloss::divergence::{decompose_gjs, gjs_div, gjs_div_kl_form, jeffreys_div, js_div, js_div_f_form, js_div_kl_form};
use jsloss::loss::{grad_js_logits, grad_loss_logits, loss_gjs, loss_js, sum_over_classes};
use jsloss::verify::bounds::bound_constants;
use jsloss::verify::grid::{compositions, simplex_grid};
use jsloss::{LogitVec, LossSpec, ProbVec, WeightVec};
use proptest::prelude::*;

fn prob(k: usize) -> impl Strategy<Value = ProbVec> {
    prop::collection::vec(1e-3f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        ProbVec::new(v.into_iter().map(|x| x / s).collect()).unwrap()
    })
}

/// `k`-class vectors that may sit next to a vertex or face.
fn rough_prob(k: usize) -> impl Strategy<Value = ProbVec> {
    prop::collection::vec(prop_oneof![Just(0.0), 1e-9f64..1e-6, 1e-3f64..1.0], k).prop_filter_map("all zero", |v| {
        let s: f64 = v.iter().sum();
        (s > 0.0).then(|| ProbVec::new(v.into_iter().map(|x| x / s).collect()).unwrap())
    })
}

fn truncate(p: &ProbVec, k: usize) -> ProbVec {
    let head = &p.as_slice()[..k];
    let s: f64 = head.iter().sum::<f64>() + k as f64 * 1e-15;
    ProbVec::new(head.iter().map(|v| (v + 1e-15) / s).collect()).unwrap()
}

fn pair() -> impl Strategy<Value = (ProbVec, ProbVec)> {
    (2usize..=10).prop_flat_map(|k| (prob(k), prob(k)))
}

fn family() -> impl Strategy<Value = (WeightVec, Vec<ProbVec>)> {
    (2usize..=6, 2usize..=8).prop_flat_map(|(m, k)| {
        (prop::collection::vec(1e-3f64..1.0, m), prop::collection::vec(rough_prob(k), m)).prop_map(|(w, ps)| {
            let s: f64 = w.iter().sum();
            (WeightVec::new(w.into_iter().map(|x| x / s).collect()).unwrap(), ps)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn symmetric_divergences((p, q) in pair()) {
        let w = WeightVec::uniform(2).unwrap();
        prop_assert!((js_div(&w, &p, &q).unwrap() - js_div(&w, &q, &p).unwrap()).abs() < 1e-12);
        prop_assert!((jeffreys_div(&p, &q).unwrap() - jeffreys_div(&q, &p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn gjs_at_most_weight_entropy((w, ps) in family()) {
        let refs: Vec<&ProbVec> = ps.iter().collect();
        let d = gjs_div(&w, &refs).unwrap();
        prop_assert!(d >= -1e-15 && d <= w.entropy() + 1e-12, "{d} vs {}", w.entropy());
    }

    #[test]
    fn entropy_and_kl_forms_agree((w, ps) in family()) {
        let refs: Vec<&ProbVec> = ps.iter().collect();
        prop_assert!((gjs_div(&w, &refs).unwrap() - gjs_div_kl_form(&w, &refs).unwrap()).abs() < 1e-10);
        let w2 = w.label_split();
        prop_assert!((js_div(&w2, &ps[0], &ps[1]).unwrap() - js_div_kl_form(&w2, &ps[0], &ps[1]).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn f_form_matches((p, q) in pair(), pi1 in 0.01f64..0.99) {
        let w = WeightVec::new(vec![pi1, 1.0 - pi1]).unwrap();
        prop_assert!((js_div(&w, &p, &q).unwrap() - js_div_f_form(pi1, &p, &q).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn decomposition_sums_to_gjs((w, ps) in family(), y in 0usize..8) {
        prop_assume!(ps.len() >= 3);
        let k = ps[0].len();
        let label = ProbVec::one_hot(k, y % k).unwrap();
        let preds: Vec<&ProbVec> = ps.iter().skip(1).collect();
        let mut all = vec![&label];
        all.extend(&preds);
        let d = decompose_gjs(&w, &label, &preds).unwrap();
        prop_assert!((d.total() - gjs_div(&w, &all).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn closed_form_js_gradient_matches_chain_rule(k in 2usize..=10, raw in prop::collection::vec(-3.0f64..3.0, 10), pi1 in 1e-3f64..0.999, y in 0usize..10) {
        let spec = LossSpec::js(pi1);
        let z = LogitVec::new(raw[..k].to_vec()).unwrap();
        let closed = grad_js_logits(&spec, y % k, &z).unwrap();
        let chain = grad_loss_logits(&spec, y % k, std::slice::from_ref(&z)).unwrap();
        for (a, b) in closed.as_slice().iter().zip(chain[0].as_slice()) {
            prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn gjs_with_two_predictions_is_js(k in 2usize..=10, pi1 in 0.01f64..0.99, y in 0usize..10, p in (2usize..=10).prop_flat_map(prob)) {
        let k = k.min(p.len());
        let p = truncate(&p, k);
        let js = loss_js(&LossSpec::js(pi1), y % k, &p).unwrap();
        let gjs = loss_gjs(&LossSpec::gjs(pi1, 2), y % k, &[&p]).unwrap();
        prop_assert!((js - gjs).abs() < 1e-12);
    }

    #[test]
    fn class_sums_within_closed_form_bounds(k in 2usize..=6, pi1 in 0.05f64..0.95, m in 2usize..=4, ps in prop::collection::vec(rough_prob(6), 3)) {
        let ps: Vec<ProbVec> = ps.iter().map(|p| truncate(p, k)).collect();
        let m = m.min(k + 1);
        let spec = LossSpec::gjs(pi1, m);
        let refs: Vec<&ProbVec> = ps.iter().take(m - 1).collect();
        let (lo, hi) = bound_constants(&spec, k).unwrap();
        let s = sum_over_classes(&spec, &refs).unwrap();
        prop_assert!(s >= lo - 1e-9 && s <= hi + 1e-9, "{lo} <= {s} <= {hi}");
    }

    #[test]
    fn noise_keeps_clean_labels_and_is_reproducible(eta in 0.0f64..0.99, seed in any::<u64>()) {
        let ds = gen_blobs(5, 20, 2, 0.5, 3).unwrap();
        let spec = NoiseSpec::symmetric_resample(eta, seed);
        let (a, ra) = inject_noise(&ds, &spec).unwrap();
        let (b, rb) = inject_noise(&ds, &spec).unwrap();
        prop_assert_eq!(&a.clean_labels, &ds.clean_labels);
        prop_assert_eq!(&a.labels, &b.labels);
        prop_assert_eq!(ra.changed, rb.changed);
        prop_assert_eq!(ra.changed, a.labels.iter().zip(&a.clean_labels).filter(|(x, y)| x != y).count());
    }
}

#[test]
fn js_class_sum_extremizers_on_fine_grid() {
    for k in 2..=4 {
        for pi1 in [0.1, 0.5, 0.9] {
            let spec = LossSpec::js(pi1);
            let grid = simplex_grid(k, 60).unwrap();
            let counts = compositions(k, 60);
            let sums: Vec<f64> = grid.iter().map(|p| sum_over_classes(&spec, &[p]).unwrap()).collect();
            let argmin = (0..sums.len()).fold(0, |b, i| if sums[i] < sums[b] { i } else { b });
            let max = sums.iter().cloned().fold(f64::MIN, f64::max);
            assert!(counts[argmin].iter().all(|&c| c * k == 60), "K={k} pi1={pi1}: argmin {:?}", counts[argmin]);
            for (c, s) in counts.iter().zip(&sums) {
                let vertex = c.contains(&60);
                assert_eq!(vertex, max - s < 1e-12, "K={k} pi1={pi1}: {c:?}");
            }
        }
    }
}
