//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Naive O(N^2) DFT power for bins `0..=N/2`, with exact integer phase reduction.
pub fn naive_power(frame: &[f64]) -> Vec<f64> {
    let n = frame.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, x) in frame.iter().enumerate() {
                let angle = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                re += x * angle.cos();
                im += x * angle.sin();
            }
            re * re + im * im
        })
        .collect()
}

/// Index of the largest DFT bin of `signal` (length `n`) evaluated directly.
pub fn peak_bin(signal: &[f64]) -> usize {
    let p = naive_power(signal);
    p.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap()
}

/// Percentile by sorting and indexing at `(n - 1) q`, interpolating linearly.
pub fn sorted_percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = (v.len() - 1) as f64 * q;
    let i = pos as usize;
    if i + 1 >= v.len() {
        return v[v.len() - 1];
    }
    v[i] * (1.0 - (pos - i as f64)) + v[i + 1] * (pos - i as f64)
}

/// Sign changes counted on a plain loop: above-threshold samples only.
pub fn count_crossings(frame: &[f64], epsilon_rel: f64) -> usize {
    let peak = frame.iter().map(|s| s.abs()).fold(0.0, f64::max);
    let kept: Vec<f64> = frame.iter().copied().filter(|s| s.abs() > epsilon_rel * peak).collect();
    kept.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
}

pub fn random_frame(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}
