//! PCA of the joint EEG + motion feature matrix: variance explained, the
//! PC1/PC2 loading vectors, and a slice of the correlation map.
//!
//! cargo run --example pca_loading_map

use eeg_sentinel::pca::{correlation_map, loading_plane_vectors, svd_decompose};
use eeg_sentinel::preprocess::build_feature_matrix;
use eeg_sentinel::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let recording = generate(&SynthConfig::default().with_seed(11))?;
    let features = build_feature_matrix(&recording)?;
    println!("feature matrix {} x {} at {} Hz", features.rows(), features.cols(), features.sample_rate_hz);

    let pca = svd_decompose(&features)?;
    for (i, f) in pca.variance_fractions.iter().take(5).enumerate() {
        println!("  PC{} explains {:5.1} %", i + 1, 100.0 * f);
    }

    let plane = loading_plane_vectors(&pca, (0, 1))?;
    println!("loading vectors (PC1, PC2):");
    for (name, v) in plane.channel_names.iter().zip(&plane.vectors) {
        println!("  {name:<4} ({:+.3}, {:+.3})", v[0], v[1]);
    }

    let map = correlation_map(&plane);
    for (a, b) in [("AF3", "AF4"), ("O1", "O2"), ("AF3", "A.X"), ("A.X", "M.Y")] {
        println!("corr({a}, {b}) = {:+.3}", map.entry(a, b)?);
    }
    Ok(())
}
