use std::path::Path;

use super::dataset::{Dataset, Provenance};
use crate::error::{Error, Result};

/// One label byte followed by 3 planes of 32x32 pixels.
pub const CIFAR_RECORD_LEN: usize = 3073;
const PIXELS: usize = 3072;
const PLANE: usize = 1024;

/// Parses raw records into labels and pixels scaled to [0, 1].
pub fn decode_cifar10(bytes: &[u8], path: &str) -> Result<(Vec<usize>, Vec<f64>)> {
    if !bytes.len().is_multiple_of(CIFAR_RECORD_LEN) {
        return Err(Error::TruncatedFile { path: path.to_string(), len: bytes.len() });
    }
    let n = bytes.len() / CIFAR_RECORD_LEN;
    let mut labels = Vec::with_capacity(n);
    let mut pixels = Vec::with_capacity(n * PIXELS);
    for (r, rec) in bytes.chunks_exact(CIFAR_RECORD_LEN).enumerate() {
        if rec[0] > 9 {
            return Err(Error::InvalidLabel { record: r, label: rec[0] });
        }
        labels.push(rec[0] as usize);
        pixels.extend(rec[1..].iter().map(|&b| b as f64 / 255.0));
    }
    Ok((labels, pixels))
}

/// Subtracts each channel's mean and divides by its standard deviation
/// (left at 1 when a channel is constant).
fn normalize_channels(pixels: &mut [f64]) {
    let n = pixels.len() / PIXELS;
    if n == 0 {
        return;
    }
    for ch in 0..3 {
        let vals = || pixels.chunks_exact(PIXELS).flat_map(|r| &r[ch * PLANE..(ch + 1) * PLANE]);
        let count = (n * PLANE) as f64;
        let mean = vals().sum::<f64>() / count;
        let var = vals().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        for row in pixels.chunks_exact_mut(PIXELS) {
            for v in &mut row[ch * PLANE..(ch + 1) * PLANE] {
                *v = (*v - mean) / sd;
            }
        }
    }
}

/// Reads CIFAR-10 binary batch files into one dataset.
pub fn load_cifar10_binary<P: AsRef<Path>>(paths: &[P], normalize: bool) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut pixels = Vec::new();
    for p in paths {
        let p = p.as_ref();
        let bytes = std::fs::read(p)?;
        let (l, px) = decode_cifar10(&bytes, &p.display().to_string())?;
        labels.extend(l);
        pixels.extend(px);
    }
    if normalize {
        normalize_channels(&mut pixels);
    }
    let mut ds = Dataset::new(10, PIXELS, pixels, labels)?;
    ds.provenance = Provenance { source: "cifar10-binary".into(), ..Default::default() };
    Ok(ds)
}

/// Writes records in the CIFAR-10 binary layout.
pub fn write_cifar10_binary(path: &Path, records: &[(u8, Vec<u8>)]) -> Result<()> {
    let mut out = Vec::with_capacity(records.len() * CIFAR_RECORD_LEN);
    for (label, px) in records {
        if px.len() != PIXELS {
            return Err(Error::InvalidDataset(format!("record has {} pixel bytes", px.len())));
        }
        out.push(*label);
        out.extend_from_slice(px);
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_labels_and_pixels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.bin");
        let px: Vec<u8> = (0..PIXELS).map(|i| (i % 256) as u8).collect();
        write_cifar10_binary(&path, &[(3, px.clone()), (7, vec![255; PIXELS])]).unwrap();
        let ds = load_cifar10_binary(&[&path], false).unwrap();
        assert_eq!(ds.labels, vec![3, 7]);
        let back: Vec<u8> = ds.row(0).iter().map(|v| (v * 255.0).round() as u8).collect();
        assert_eq!(back, px);
        assert!(ds.row(1).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn rejects_bad_files() {
        let mut rec = vec![0u8; CIFAR_RECORD_LEN];
        rec[0] = 12;
        assert_eq!(decode_cifar10(&rec, "x"), Err(Error::InvalidLabel { record: 0, label: 12 }));
        assert!(matches!(decode_cifar10(&rec[..100], "x"), Err(Error::TruncatedFile { len: 100, .. })));
    }

    #[test]
    fn normalized_channels_are_standardized() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.bin");
        let recs: Vec<(u8, Vec<u8>)> = (0..4u8).map(|r| (r, (0..PIXELS).map(|i| ((i * 7 + r as usize * 13) % 256) as u8).collect())).collect();
        write_cifar10_binary(&path, &recs).unwrap();
        let ds = load_cifar10_binary(&[&path], true).unwrap();
        let red: Vec<f64> = (0..4).flat_map(|i| ds.row(i)[..PLANE].to_vec()).collect();
        let mean = red.iter().sum::<f64>() / red.len() as f64;
        let var = red.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / red.len() as f64;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
    }
}
