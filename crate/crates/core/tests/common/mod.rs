//! Independent reference computations used by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi rotations,
/// sorted in decreasing order.
pub fn jacobi_eigenvalues(sym: &Array2<f64>) -> Vec<f64> {
    let n = sym.nrows();
    let mut a = sym.clone();
    for _sweep in 0..200 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum();
        let diag: f64 = (0..n).map(|i| a[[i, i]] * a[[i, i]]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[[p, q]] == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

pub fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest absolute entry of `QᵀQ − I`.
pub fn orthonormality_residual(q: &Array2<f64>) -> f64 {
    let g = q.t().dot(q);
    g.indexed_iter()
        .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

/// Sample variance with the `n` divisor.
pub fn population_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Welch estimate by direct O(n²) DFT sums, periodic Hann window,
/// per-segment mean removal, one-sided, normalised so bins sum to power.
pub fn naive_welch(x: &[f64], segment: usize, hop: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..segment)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / segment as f64).cos())
        .collect();
    let energy: f64 = w.iter().map(|v| v * v).sum();
    let bins = segment / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut count = 0;
    let mut start = 0;
    while start + segment <= x.len() {
        let chunk = &x[start..start + segment];
        let mean = chunk.iter().sum::<f64>() / segment as f64;
        for (k, slot) in acc.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in chunk.iter().enumerate() {
                let arg = -2.0 * PI * (k * t % segment) as f64 / segment as f64;
                let y = (v - mean) * w[t];
                re += y * arg.cos();
                im += y * arg.sin();
            }
            let fold = if k == 0 || (segment % 2 == 0 && k == segment / 2) { 1.0 } else { 2.0 };
            *slot += fold * (re * re + im * im) / (segment as f64 * energy);
        }
        count += 1;
        start += hop;
    }
    acc.iter().map(|v| v / count as f64).collect()
}

pub fn unit_sine(freq: f64, rate: f64, seconds: f64) -> Vec<f64> {
    let n = (rate * seconds).round() as usize;
    (0..n).map(|k| (2.0 * PI * freq * k as f64 / rate).sin()).collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
