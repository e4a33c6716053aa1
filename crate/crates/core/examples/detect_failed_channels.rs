//! Run the detector on a synthetic recording with known failures and print
//! the per-channel evidence next to the ground truth.
//!
//! cargo run --example detect_failed_channels [seed]

use eeg_sentinel::detect::{assess, DetectorConfig};
use eeg_sentinel::synth::{generate, FailureMode, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map_or(Ok(1), |s| s.parse())?;
    let config = SynthConfig::default()
        .with_seed(seed)
        .with_failure("P7", FailureMode::OPEN_CONTACT)
        .with_failure("O1", FailureMode::OPEN_CONTACT)
        .with_failure("T8", FailureMode::HIGH_MAINS);
    let recording = generate(&config)?;
    let report = assess(&recording, &DetectorConfig::default())?;

    println!("{:<5} {:>8} {:>9} {:>8}  {:<8} {:<14} flags", "chan", "mains", "pca corr", "motion", "verdict", "injected");
    for c in &report.channels {
        let injected = config.failures.get(&c.name).map(|m| m.to_string()).unwrap_or_default();
        let flags: Vec<String> = c.flags.iter().map(|f| format!("{f:?}")).collect();
        println!(
            "{:<5} {:>8.4} {:>9} {:>8}  {:<8} {:<14} {}",
            c.name,
            c.mains_level_normalized,
            c.pca_mean_corr.map_or("-".into(), |v| format!("{v:.3}")),
            c.motion_coupling.map_or("-".into(), |v| format!("{v:.3}")),
            format!("{:?}", c.verdict).to_lowercase(),
            injected,
            flags.join(" ")
        );
    }
    Ok(())
}
