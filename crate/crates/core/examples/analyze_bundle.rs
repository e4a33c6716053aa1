//! Load a bundle from disk and print the JSON report.
//!
//! cargo run --example analyze_bundle -- path/to/bundle [50|60]

use eeg_sentinel::{assess, load_bundle, DetectorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().ok_or("usage: analyze_bundle BUNDLE [MAINS_HZ]")?;
    let mains_hz = args.next().map_or(Ok(50.0), |s| s.parse())?;
    let recording = load_bundle(&path)?;
    let report = assess(&recording, &DetectorConfig { mains_hz, ..DetectorConfig::default() })?;
    print!("{}", report.to_json());
    Ok(())
}
