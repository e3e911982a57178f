use rand::seq::SliceRandom;

use super::dataset::{Dataset, SplitTag};
use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Tags a class-stratified `val_fraction` of rows as validation. Validation
/// rows get their clean labels back.
pub fn split(ds: &Dataset, val_fraction: f64, seed: u64) -> Result<Dataset> {
    split_with_test(ds, val_fraction, 0.0, seed)
}

/// As [`split`], additionally carving out a stratified clean test set.
pub fn split_with_test(ds: &Dataset, val_fraction: f64, test_fraction: f64, seed: u64) -> Result<Dataset> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("val_fraction = {val_fraction} outside (0, 1)")));
    }
    if !(0.0..1.0).contains(&test_fraction) || val_fraction + test_fraction >= 1.0 {
        return Err(Error::InvalidConfig(format!("test_fraction = {test_fraction} leaves no training rows")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.k];
    for (i, &c) in ds.clean_labels.iter().enumerate() {
        by_class[c].push(i);
    }
    let mut rng = rng_for(seed, "split", 0);
    for rows in by_class.iter_mut() {
        rows.shuffle(&mut rng);
    }
    let sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let n_val = allocate(&sizes, val_fraction);
    let n_test = allocate(&sizes, test_fraction);

    let mut out = ds.clone();
    out.split = vec![SplitTag::Train; ds.len()];
    for (c, rows) in by_class.iter().enumerate() {
        for (pos, &i) in rows.iter().enumerate() {
            let tag = if pos < n_val[c] {
                SplitTag::Val
            } else if pos < n_val[c] + n_test[c] {
                SplitTag::Test
            } else {
                SplitTag::Train
            };
            out.split[i] = tag;
            if tag != SplitTag::Train {
                out.labels[i] = ds.clean_labels[i];
            }
        }
    }
    out.provenance.split_seed = Some(seed);
    Ok(out)
}

/// Largest-remainder allocation of `round(N f)` rows across classes.
fn allocate(sizes: &[usize], f: f64) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    let target = (n as f64 * f).round() as usize;
    let mut out: Vec<usize> = sizes.iter().map(|&s| (s as f64 * f).floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    let frac = |c: usize| sizes[c] as f64 * f - out[c] as f64;
    order.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(a.cmp(&b)));
    let mut missing = target.saturating_sub(out.iter().sum());
    for &c in order.iter().cycle().take(order.len() * 2) {
        if missing == 0 {
            break;
        }
        if out[c] < sizes[c] {
            out[c] += 1;
            missing -= 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::noise::{inject_noise, NoiseSpec};

    fn labelled(k: usize, n: usize) -> Dataset {
        Dataset::new(k, 1, (0..n).map(|i| i as f64).collect(), (0..n).map(|i| i % k).collect()).unwrap()
    }

    #[test]
    fn stratified_counts() {
        let ds = labelled(4, 1000);
        let s = split(&ds, 0.1, 3).unwrap();
        let val = s.rows_with(SplitTag::Val);
        assert_eq!(val.len(), 100);
        let labels: Vec<usize> = val.iter().map(|&i| s.clean_labels[i]).collect();
        for c in s.class_counts(&labels) {
            assert!((24..=26).contains(&c));
        }
        assert_eq!(s, split(&ds, 0.1, 3).unwrap());
        assert!(split(&ds, 1.0, 3).is_err());
        assert!(split(&ds, 0.0, 3).is_err());
    }

    #[test]
    fn unbalanced_total_is_exact() {
        let labels: Vec<usize> = (0..997).map(|i| if i % 7 == 0 { 0 } else { 1 + i % 3 }).collect();
        let ds = Dataset::new(4, 1, vec![0.0; 997], labels).unwrap();
        let s = split_with_test(&ds, 0.13, 0.2, 1).unwrap();
        assert_eq!(s.rows_with(SplitTag::Val).len(), (997.0f64 * 0.13).round() as usize);
        assert_eq!(s.rows_with(SplitTag::Test).len(), (997.0f64 * 0.2).round() as usize);
    }

    #[test]
    fn noise_after_split_spares_validation() {
        let ds = split(&labelled(5, 2000), 0.2, 7).unwrap();
        let (noisy, _) = inject_noise(&ds, &NoiseSpec::symmetric_resample(0.8, 1)).unwrap();
        for i in noisy.rows_with(SplitTag::Val) {
            assert_eq!(noisy.labels[i], noisy.clean_labels[i]);
        }
    }
}
