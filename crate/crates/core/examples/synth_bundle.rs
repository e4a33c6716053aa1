//! Generate a synthetic recording with two broken electrodes and write it
//! as a bundle directory.
//!
//! cargo run --example synth_bundle -- /tmp/demo-bundle

use eeg_sentinel::synth::{generate, Activity, FailureMode, SynthConfig};
use eeg_sentinel::write_bundle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "demo-bundle".into());
    let config = SynthConfig::default()
        .with_seed(2024)
        .with_activity(Activity::HeadShaking)
        .with_failure("T8", FailureMode::HIGH_MAINS)
        .with_failure("O1", FailureMode::OPEN_CONTACT);
    let recording = generate(&config)?;
    write_bundle(&recording, &out)?;

    println!("wrote {out}");
    println!(
        "  {} EEG channels @ {} Hz, {} motion channels @ {} Hz, {:.0} s",
        recording.eeg.len(),
        recording.eeg_rate_hz(),
        recording.motion.len(),
        recording.motion_rate_hz(),
        recording.eeg[0].duration_s()
    );
    for (name, mode) in recording.ground_truth.as_ref().unwrap() {
        println!("  injected {mode} on {name}");
    }
    Ok(())
}
