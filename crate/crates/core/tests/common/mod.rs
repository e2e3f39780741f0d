#![allow(dead_code)]

pub mod oracles;

use std::sync::OnceLock;

use nfscan::classifiers::Features;
use nfscan::field::FieldKind;
use nfscan::geometry::{generate_wire_library, LibraryConfig};
use nfscan::imaging::{build_dataset, Dataset, ImagingConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The default-config magnetic dataset, built once per test binary.
pub fn magnetic() -> &'static Dataset {
    static DATA: OnceLock<Dataset> = OnceLock::new();
    DATA.get_or_init(|| {
        let lib = generate_wire_library(&LibraryConfig::default(), 0).unwrap();
        build_dataset(&lib, FieldKind::H, &ImagingConfig::default()).unwrap()
    })
}

/// Two noisy Gaussian blobs in `d` dimensions, labels alternating.
pub fn blobs(n: usize, d: usize, seed: u64) -> (Features, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = (i % 2) as u8;
        let shift = if label == 1 { 0.8 } else { 0.0 };
        rows.push((0..d).map(|j| shift * ((j % 3) as f64 - 0.5) + rng.gen_range(-1.0..1.0)).collect());
        y.push(label);
    }
    (Features::from_rows(&rows), y)
}
