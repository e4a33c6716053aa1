//! Welch spectra of a clean and a high-mains channel, and the normalised
//! mains level of every channel.
//!
//! cargo run --example welch_spectrum

use eeg_sentinel::spectral::{mains_level, normalize_levels, welch_psd};
use eeg_sentinel::synth::{generate, FailureMode, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SynthConfig::default().with_seed(5).with_failure("F4", FailureMode::HIGH_MAINS);
    let recording = generate(&config)?;
    let psds = recording
        .eeg
        .iter()
        .map(|s| welch_psd(s, 1.0, 0.5))
        .collect::<Result<Vec<_>, _>>()?;

    for name in ["AF3", "F4"] {
        let psd = psds.iter().find(|p| p.channel_name == name).unwrap();
        println!(
            "{name}: {} segments, total power {:.1} uV^2, peak at {} Hz",
            psd.segment_count,
            psd.total_power(),
            psd.peak_bin() as f64 * psd.bin_hz
        );
        for hz in [8, 10, 12, 48, 50, 52] {
            println!("  {hz:>3} Hz  {:>10.4}", psd.power[hz]);
        }
    }

    let levels = psds.iter().map(|p| mains_level(p, 50.0)).collect::<Result<Vec<_>, _>>()?;
    let normalized = normalize_levels(&levels)?;
    println!("normalised 50 Hz level:");
    for (psd, level) in psds.iter().zip(normalized) {
        println!("  {:<4} {level:.4}", psd.channel_name);
    }
    Ok(())
}
