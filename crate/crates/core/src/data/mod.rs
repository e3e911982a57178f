//! Datasets, label noise and the stochastic view pipeline.

mod blobs;
mod cifar;
mod dataset;
mod noise;
mod split;
mod views;

pub use blobs::{blob_centers, gen_blobs};
pub use cifar::{decode_cifar10, load_cifar10_binary, write_cifar10_binary, CIFAR_RECORD_LEN};
pub use dataset::{Dataset, Provenance, SplitTag};
pub use noise::{inject_noise, NoiseKind, NoiseReport, NoiseSpec};
pub use split::{split, split_with_test};
pub use views::{make_views, ViewSpec};
