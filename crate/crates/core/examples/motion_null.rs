//! Coupling between EEG channels and motion sensors for each activity.
//! Failed channels couple no more than good ones.
//!
//! cargo run --example motion_null

use eeg_sentinel::detect::{assess, DetectorConfig};
use eeg_sentinel::synth::{generate, mean_motion_std, Activity, FailureMode, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for activity in [Activity::Walking, Activity::HeadShaking, Activity::Blinking] {
        let config = SynthConfig::default()
            .with_seed(31)
            .with_activity(activity)
            .with_failure("T7", FailureMode::HIGH_MAINS)
            .with_failure("O2", FailureMode::OPEN_CONTACT);
        let recording = generate(&config)?;
        let report = assess(&recording, &DetectorConfig::default())?;
        print!("{activity:<13} motion std {:.4}  ", mean_motion_std(&recording));
        match &report.motion_null_summary {
            None => println!("too little motion, coupling not analysed"),
            Some(s) => {
                let bad = ["T7", "O2"]
                    .iter()
                    .map(|n| report.channel(n).unwrap().motion_coupling.unwrap())
                    .sum::<f64>()
                    / 2.0;
                println!(
                    "mean |coupling| {:.3}, max {:.3}, injected channels {:.3}",
                    s.mean_abs_coupling, s.max_abs_coupling, bad
                );
            }
        }
    }
    Ok(())
}
