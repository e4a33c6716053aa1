//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::time::{Duration, Instant};

use common::*;
use eeg_sentinel::detect::{
    assess, mains_flag_channels, ChannelFlag, ChannelQualityReport, DetectError, DetectorConfig,
    Verdict,
};
use eeg_sentinel::pca::{svd, PcaError};
use eeg_sentinel::preprocess::build_feature_matrix;
use eeg_sentinel::recording::{load_bundle, write_bundle, ChannelMeta, ChannelSeries, Recording};
use eeg_sentinel::spectral::{normalize_levels, welch_samples, SpectralError};
use eeg_sentinel::synth::{generate, FailureMode, SynthConfig, DEFAULT_EEG_CHANNELS};
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit_s: u64, started: Instant) -> Result<Duration, String> {
    let elapsed = started.elapsed();
    check(elapsed <= Duration::from_secs(limit_s), || {
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64())
    })?;
    Ok(elapsed)
}

fn svd_correctness() -> Outcome {
    let started = Instant::now();
    let mut rng = rng(0x5eed_0001);
    let (mut worst_rec, mut worst_orth, mut worst_eig) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..200 {
        let cols = rng.random_range(2..=20);
        let rows = match case % 10 {
            0 => 4000,
            1 => rng.random_range(2..cols.max(3)),
            _ => rng.random_range(cols..=1000),
        };
        let mut a = gaussian_matrix(rows, cols, &mut rng);
        for mut col in a.columns_mut() {
            col *= rng.random_range(0.1..10.0);
        }
        let s = svd(&a).map_err(|e| format!("case {case} ({rows}×{cols}): {e}"))?;
        worst_rec = worst_rec.max(frobenius(&(&a - &s.reconstruct())) / frobenius(&a));
        worst_orth = worst_orth
            .max(orthonormality_residual(&s.u))
            .max(orthonormality_residual(&s.v));
        let eig = jacobi_eigenvalues(&a.t().dot(&a));
        for (i, sigma) in s.sigma.iter().enumerate() {
            worst_eig = worst_eig.max((sigma * sigma - eig[i]).abs() / eig[i]);
        }
    }
    let elapsed = within(60, started)?;
    check(worst_rec <= 1e-8, || format!("reconstruction residual {worst_rec:e}"))?;
    check(worst_orth <= 1e-8, || format!("orthonormality residual {worst_orth:e}"))?;
    check(worst_eig <= 1e-6, || format!("σ² vs eigenvalue relative error {worst_eig:e}"))?;
    Ok(format!(
        "200 matrices, max recon {worst_rec:.1e}, orth {worst_orth:.1e}, eig {worst_eig:.1e}, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn welch_oracle() -> Outcome {
    let started = Instant::now();
    let mut hits = 0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut worst_oracle = 0.0f64;
    for f in 2..=126 {
        let x = unit_sine(f as f64, 256.0, 8.0);
        let psd = welch_samples("tone", &x, 256.0, 1.0, 0.5).map_err(|e| e.to_string())?;
        if psd.peak_bin() == f {
            hits += 1;
        }
        let total = psd.total_power();
        lo = lo.min(total);
        hi = hi.max(total);
        if f % 8 == 2 {
            let reference = naive_welch(&x, 256, 128);
            for (a, b) in psd.power.iter().zip(&reference) {
                worst_oracle = worst_oracle.max((a - b).abs());
            }
        }
    }
    let elapsed = within(10, started)?;
    check(hits == 125, || format!("argmax correct for {hits}/125 tones"))?;
    check(lo >= 0.495 && hi <= 0.505, || format!("bin sums span [{lo}, {hi}]"))?;
    check(worst_oracle <= 1e-12, || format!("direct-DFT oracle gap {worst_oracle:e}"))?;
    Ok(format!(
        "125/125 argmax, sums in [{lo:.6}, {hi:.6}], DFT oracle gap {worst_oracle:.1e}, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn parseval() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let mut rng = rng(0x9a25_0000 + seed);
        let scale = rng.random_range(0.1..100.0);
        let x: Vec<f64> = gaussian_vec(256 * 60, &mut rng).iter().map(|v| v * scale).collect();
        let psd = welch_samples("noise", &x, 256.0, 1.0, 0.5).map_err(|e| e.to_string())?;
        let variance = population_variance(&x);
        worst = worst.max((psd.total_power() - variance).abs() / variance);
    }
    check(worst <= 0.02, || format!("worst relative gap {worst:.4}"))?;
    Ok(format!("50 seeds, worst relative gap {:.3} %", worst * 100.0))
}

fn rule_fidelity() -> Outcome {
    let config = DetectorConfig::default();
    let mut rng = rng(0x4u64);
    for n in 4..=64 {
        for _ in 0..20 {
            let levels: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let flags = mains_flag_channels(&normalize_levels(&levels).unwrap(), &config)
                .map_err(|e| e.to_string())?;
            let high = flags.iter().filter(|f| **f == Some(ChannelFlag::MainsHigh)).count();
            let total = flags.iter().filter(|f| f.is_some()).count();
            let expected = (0.25 * n as f64).ceil() as usize;
            check(high == 1 && total == expected, || {
                format!("N = {n}: {high} high, {total} flagged, expected {expected}")
            })?;
        }
    }
    // on a full synthetic 14-channel recording
    let recording = generate(&SynthConfig::default().with_seed(14)).map_err(|e| e.to_string())?;
    let report = assess(&recording, &config).map_err(|e| e.to_string())?;
    let count = |flag| report.channels.iter().filter(|c| c.flags.contains(&flag)).count();
    let (high, low) = (count(ChannelFlag::MainsHigh), count(ChannelFlag::MainsLow));
    check(high == 1 && low == 3, || format!("14 channels: {high} MainsHigh + {low} MainsLow"))?;
    Ok("N = 14 gives 1 MainsHigh + 3 MainsLow; N ∈ [4, 64] gives ceil(0.25·N)".into())
}

/// One HighMains and two OpenContact channels chosen by seed.
fn faulty_config(seed: u64) -> (SynthConfig, String, Vec<String>) {
    let mut rng = rng(0xfa17_0000 ^ seed);
    let mut names: Vec<&str> = DEFAULT_EEG_CHANNELS.to_vec();
    names.shuffle(&mut rng);
    let high = names[0].to_owned();
    let open = vec![names[1].to_owned(), names[2].to_owned()];
    let config = SynthConfig::default()
        .with_seed(seed)
        .with_failure(&high, FailureMode::HIGH_MAINS)
        .with_failure(&open[0], FailureMode::OPEN_CONTACT)
        .with_failure(&open[1], FailureMode::OPEN_CONTACT);
    (config, high, open)
}

fn recovery() -> Outcome {
    let started = Instant::now();
    let config = DetectorConfig::default();
    let (mut high_ok, mut open_ok, mut clean_ok) = (0, 0, 0);
    for seed in 0..100 {
        let (synth, high, open) = faulty_config(seed);
        let recording = generate(&synth).map_err(|e| e.to_string())?;
        let report = assess(&recording, &config).map_err(|e| format!("seed {seed}: {e}"))?;
        let get = |name: &str| report.channel(name).expect("channel in report");
        if get(&high).flags.contains(&ChannelFlag::MainsHigh) {
            high_ok += 1;
        }
        if open.iter().all(|n| get(n).verdict != Verdict::Good) {
            open_ok += 1;
        }
        let bad: BTreeSet<&String> = open.iter().chain([&high]).collect();
        if report
            .channels
            .iter()
            .filter(|c| !bad.contains(&c.name))
            .all(|c| c.verdict != Verdict::Failed)
        {
            clean_ok += 1;
        }
    }
    let elapsed = within(120, started)?;
    check(high_ok >= 95, || format!("HighMains got MainsHigh in {high_ok}/100 seeds"))?;
    check(open_ok >= 90, || format!("OpenContact not Good in {open_ok}/100 seeds"))?;
    check(clean_ok >= 95, || format!("no clean channel Failed in {clean_ok}/100 seeds"))?;
    Ok(format!(
        "MainsHigh {high_ok}/100, OpenContact flagged {open_ok}/100, clean never Failed {clean_ok}/100, {:.1} s",
        elapsed.as_secs_f64()
    ))
}

fn null_result() -> Outcome {
    let config = DetectorConfig::default();
    let (mut mean_sum, mut gap_sum, mut worst_mean) = (0.0, 0.0, 0.0f64);
    for seed in 0..50 {
        let (synth, high, open) = faulty_config(1000 + seed);
        let recording = generate(&synth).map_err(|e| e.to_string())?;
        let report = assess(&recording, &config).map_err(|e| e.to_string())?;
        check(report.motion_analysis_performed, || format!("seed {seed}: motion gate closed"))?;
        let bad: BTreeSet<&String> = open.iter().chain([&high]).collect();
        let (mut b, mut g) = (Vec::new(), Vec::new());
        for c in &report.channels {
            let v = c.motion_coupling.expect("coupling when motion analysed");
            if bad.contains(&c.name) { b.push(v) } else { g.push(v) }
        }
        let all = report.motion_null_summary.as_ref().expect("summary").mean_abs_coupling;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        worst_mean = worst_mean.max(all);
        mean_sum += all;
        gap_sum += mean(&b) - mean(&g);
    }
    let (mean, gap) = (mean_sum / 50.0, gap_sum / 50.0);
    check(mean <= 0.25, || format!("mean |coupling| {mean:.3}"))?;
    check(gap.abs() <= 0.15, || format!("bad − good coupling {gap:.3}"))?;
    Ok(format!(
        "50 seeds, mean |coupling| {mean:.3} (worst seed {worst_mean:.3}), bad − good {gap:+.3}"
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (synth, _, _) = faulty_config(7);
    let recording = generate(&synth).map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    write_bundle(&recording, &a).map_err(|e| e.to_string())?;
    write_bundle(&generate(&synth).map_err(|e| e.to_string())?, &b).map_err(|e| e.to_string())?;
    let mut files = 0;
    for entry in fs::read_dir(&a).map_err(|e| e.to_string())? {
        let name = entry.map_err(|e| e.to_string())?.file_name();
        let left = fs::read(a.join(&name)).map_err(|e| e.to_string())?;
        let right = fs::read(b.join(&name)).map_err(|e| e.to_string())?;
        check(left == right, || format!("{name:?} differs between runs"))?;
        files += 1;
    }
    let loaded = load_bundle(&a).map_err(|e| e.to_string())?;
    check(loaded == recording, || "bundle round trip is not bit-exact".into())?;
    let config = DetectorConfig::default();
    let first = assess(&loaded, &config).map_err(|e| e.to_string())?.to_json();
    let second = assess(&load_bundle(&a).map_err(|e| e.to_string())?, &config)
        .map_err(|e| e.to_string())?
        .to_json();
    check(first == second, || "reports differ".into())?;
    let direct = assess(&recording, &config).map_err(|e| e.to_string())?.to_json();
    check(first == direct, || "report of loaded bundle differs from in-memory".into())?;
    let reparsed = ChannelQualityReport::from_json(&first).map_err(|e| e.to_string())?;
    check(reparsed.to_json() == first, || "report JSON does not re-serialize identically".into())?;
    Ok(format!("{files} bundle files byte-identical, round trip bit-exact, reports identical"))
}

fn all_finite(report: &ChannelQualityReport) -> bool {
    let summary = report
        .motion_null_summary
        .as_ref()
        .map_or(true, |s| s.mean_abs_coupling.is_finite() && s.max_abs_coupling.is_finite());
    summary
        && report.channels.iter().all(|c| {
            c.mains_level_normalized.is_finite()
                && c.pca_mean_corr.map_or(true, f64::is_finite)
                && c.motion_coupling.map_or(true, f64::is_finite)
        })
}

fn short_config(seed: u64, channels: &[&str]) -> SynthConfig {
    SynthConfig {
        duration_s: 10.0,
        eeg_channel_names: channels.iter().map(|s| s.to_string()).collect(),
        ..SynthConfig::default()
    }
    .with_seed(seed)
}

fn flatten(recording: &mut Recording, name: &str, value: f64) {
    let series = recording.eeg.iter_mut().find(|s| s.name() == name).unwrap();
    series.samples.iter_mut().for_each(|v| *v = value);
}

fn degenerate_inputs() -> Outcome {
    let config = DetectorConfig::default();
    let four = ["AF3", "F7", "O1", "P7"];
    let mut cases = 0;

    // constant channel: Degenerate flag, zero mains level, no NaN
    let mut rec = generate(&short_config(1, &four)).map_err(|e| e.to_string())?;
    flatten(&mut rec, "O1", 3.5);
    let report = assess(&rec, &config).map_err(|e| format!("constant channel: {e}"))?;
    let o1 = report.channel("O1").unwrap();
    check(o1.flags.contains(&ChannelFlag::Degenerate) && o1.pca_mean_corr.is_none(), || {
        format!("constant channel flags {:?}", o1.flags)
    })?;
    check(o1.mains_level_normalized == 0.0 && all_finite(&report), || "constant channel produced non-finite output".into())?;
    let features = build_feature_matrix(&rec).map_err(|e| e.to_string())?;
    check(features.degenerate == vec!["O1".to_string()], || "feature matrix did not record O1".into())?;
    cases += 1;

    // every EEG channel flat: mains levels all zero
    let mut rec = generate(&short_config(2, &four)).map_err(|e| e.to_string())?;
    for name in four {
        flatten(&mut rec, name, 0.0);
    }
    check(
        matches!(assess(&rec, &config), Err(DetectError::Spectral(SpectralError::AllZero))),
        || "all-zero mains levels did not give AllZero".into(),
    )?;
    check(matches!(normalize_levels(&[0.0, 0.0]), Err(SpectralError::AllZero)), || "normalize of zeros".into())?;
    cases += 1;

    // everything flat: no variance to decompose
    for m in rec.motion.iter_mut() {
        m.samples.iter_mut().for_each(|v| *v = 1.0);
    }
    check(
        matches!(assess(&rec, &config), Err(DetectError::Pca(PcaError::ZeroMatrix))),
        || "all-constant recording did not give ZeroMatrix".into(),
    )?;
    cases += 1;

    // two EEG channels: quota of one, MainsHigh only
    let rec = generate(&short_config(3, &["O1", "O2"])).map_err(|e| e.to_string())?;
    let report = assess(&rec, &config).map_err(|e| format!("two channels: {e}"))?;
    let flagged: usize = report.channels.iter().map(|c| c.flags.iter().filter(|f| f.is_mains()).count()).sum();
    check(flagged == 1 && all_finite(&report), || format!("two channels: {flagged} mains flags"))?;
    cases += 1;

    // one EEG channel and one motion channel: no pairwise mean
    let mut rec = generate(&short_config(4, &["O1"])).map_err(|e| e.to_string())?;
    rec.motion.truncate(1);
    let report = assess(&rec, &config).map_err(|e| format!("single channel: {e}"))?;
    check(report.channels[0].pca_mean_corr.is_none() && all_finite(&report), || "single channel".into())?;
    cases += 1;

    // tied mains levels: lower index wins
    let flags = mains_flag_channels(&[1.0; 8], &config).map_err(|e| e.to_string())?;
    check(
        flags[0] == Some(ChannelFlag::MainsHigh) && flags[1] == Some(ChannelFlag::MainsLow) && flags[2..].iter().all(Option::is_none),
        || format!("ties: {flags:?}"),
    )?;
    let mut rec = generate(&short_config(5, &four)).map_err(|e| e.to_string())?;
    let copy = rec.eeg[0].samples.clone();
    for s in rec.eeg.iter_mut() {
        s.samples = copy.clone();
    }
    let report = assess(&rec, &config).map_err(|e| format!("identical channels: {e}"))?;
    check(report.channels[0].flags.contains(&ChannelFlag::MainsHigh) && all_finite(&report), || "identical channels".into())?;
    cases += 1;

    // non-finite samples and too-short series are rejected up front
    check(
        ChannelSeries::new(ChannelMeta::eeg("X"), 256.0, vec![0.0, f64::NAN]).is_err(),
        || "NaN sample accepted".into(),
    )?;
    let rec = generate(&SynthConfig { duration_s: 2.0, ..short_config(6, &four) }).map_err(|e| e.to_string())?;
    let coarse = DetectorConfig { psd_resolution_hz: 0.25, ..DetectorConfig::default() };
    check(
        matches!(assess(&rec, &coarse), Err(DetectError::Spectral(SpectralError::SeriesTooShort { .. }))),
        || "short series not rejected".into(),
    )?;
    let mut nan = ndarray::Array2::<f64>::zeros((3, 3));
    nan[[1, 2]] = f64::INFINITY;
    check(matches!(svd(&nan), Err(PcaError::NonFiniteInput { row: 1, col: 2 })), || "infinite SVD input".into())?;
    cases += 1;

    Ok(format!("{cases} degenerate scenarios hit their documented paths"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 svd-correctness", svd_correctness),
        ("2 welch-oracle", welch_oracle),
        ("3 parseval", parseval),
        ("4 mains-rule-fidelity", rule_fidelity),
        ("5 end-to-end-recovery", recovery),
        ("6 motion-null-result", null_result),
        ("7 determinism-round-trip", determinism),
        ("8 degenerate-inputs", degenerate_inputs),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}: {reason}");
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
