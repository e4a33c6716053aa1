//! Compare detector verdicts with the headset's own contact-quality traces.
//!
//! cargo run --example device_quality

use eeg_sentinel::detect::{assess, compare_with_device_quality, DetectorConfig, DEVICE_FAILED_CUTOFF};
use eeg_sentinel::synth::{generate, FailureMode, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SynthConfig::default()
        .with_seed(8)
        .with_failure("P7", FailureMode::OPEN_CONTACT)
        .with_failure("F7", FailureMode::SPIKE_ARTEFACT)
        .with_failure("F4", FailureMode::HIGH_MAINS);
    let recording = generate(&config)?;
    let report = assess(&recording, &DetectorConfig::default())?;
    let quality = recording.quality.as_ref().expect("synth emits quality traces");
    let cmp = compare_with_device_quality(&report, quality, DEVICE_FAILED_CUTOFF)?;

    println!("{:<5} {:>7} {:>7} {:>9}", "chan", "median", "device", "artifact");
    for c in &cmp.channels {
        println!("{:<5} {:>7.1} {:>7} {:>9}", c.name, c.median_quality, c.device_failed, c.artifact_failed);
    }
    println!(
        "TP {}  FP {}  FN {}  TN {}",
        cmp.true_positive, cmp.false_positive, cmp.false_negative, cmp.true_negative
    );
    Ok(())
}
