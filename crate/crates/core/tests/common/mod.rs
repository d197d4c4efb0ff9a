#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two-pole resonator with unity gain at DC.
pub fn resonate(x: &[f64], freq: f64, bw: f64, fs: f64) -> Vec<f64> {
    let c = -(-2.0 * PI * bw / fs).exp();
    let b = 2.0 * (-PI * bw / fs).exp() * (2.0 * PI * freq / fs).cos();
    let a = 1.0 - b - c;
    let mut y1 = 0.0;
    let mut y2 = 0.0;
    x.iter()
        .map(|&v| {
            let y = a * v + b * y1 + c * y2;
            y2 = y1;
            y1 = y;
            y
        })
        .collect()
}

pub fn pulse_train(f0: f64, n: usize, fs: f64) -> Vec<f64> {
    let period = fs / f0;
    let mut next = 0.0;
    (0..n)
        .map(|i| {
            if i as f64 >= next {
                next += period;
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Pulse train through a cascade of formant resonators, scaled to `peak`.
pub fn vowel(f0: f64, formants: &[(f64, f64)], seconds: f64, peak: f64) -> Vec<f64> {
    let fs = 16000.0;
    let mut x = pulse_train(f0, (seconds * fs) as usize, fs);
    for &(f, bw) in formants {
        x = resonate(&x, f, bw, fs);
    }
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    x.iter().map(|v| v * peak / m).collect()
}

/// Deterministic xorshift white noise in [-amp, amp].
pub fn white_noise(n: usize, amp: f64, mut seed: u64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            amp * ((seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
        })
        .collect()
}

/// One-hot identity over the inventory (minus ε) plus a pad bit, then 0/1 features.
pub fn phone_code(fs: &neurotts::phonology::FeatureSystem, sym: Option<&str>) -> Vec<f64> {
    let symbols: Vec<&str> = fs.phones().iter().map(|p| p.symbol.as_str()).filter(|s| *s != "ε").collect();
    let mut v = vec![0.0; symbols.len() + 1];
    match sym {
        Some(s) => v[symbols.iter().position(|x| *x == s).unwrap()] = 1.0,
        None => v[symbols.len()] = 1.0,
    }
    for name in fs.feature_names() {
        v.push(match sym {
            Some(s) if fs.has_feature(s, name) => 1.0,
            _ => 0.0,
        });
    }
    v
}

pub fn vowel_segment(rng: &mut ChaCha8Rng, seconds: f64) -> Vec<f64> {
    let f0 = rng.random_range(80.0..250.0);
    let f1 = rng.random_range(300.0..900.0);
    let f2 = rng.random_range(1000.0..2500.0);
    let f3 = rng.random_range(2500.0..3500.0);
    vowel(f0, &[(f1, 80.0), (f2, 100.0), (f3, 150.0)], seconds, rng.random_range(0.1..0.8))
}

// One minute of voiced, unvoiced, mixed and silent stretches.
pub fn test_audio(seconds: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let mut out = Vec::new();
    for i in 0..seconds {
        let seg = match i % 4 {
            0 => vowel_segment(&mut rng, 1.0),
            1 => white_noise(16_000, rng.random_range(0.01..0.5), i as u64 + 1),
            2 => {
                let v = vowel_segment(&mut rng, 1.0);
                let n = white_noise(v.len(), 0.05, i as u64 + 7);
                v.iter().zip(&n).map(|(a, b)| a + b).collect()
            }
            _ => {
                let mut s = vec![0.0; 16_000 / 2];
                s.extend(vowel_segment(&mut rng, 0.5));
                s
            }
        };
        out.extend(seg);
    }
    out
}

// Autocorrelation pitch with parabolic peak refinement, searched over 60-400 Hz.
pub fn pitch(x: &[f64]) -> f64 {
    let ac = |l: usize| x.iter().zip(&x[l..]).map(|(a, b)| a * b).sum::<f64>();
    let (lo, hi) = ((16000.0 / 400.0) as usize, (16000.0 / 60.0) as usize);
    let vals: Vec<f64> = (lo - 1..=hi + 1).map(ac).collect();
    let mut best = 1;
    for i in 1..vals.len() - 1 {
        if vals[i] > vals[best] {
            best = i;
        }
    }
    let (a, b, c) = (vals[best - 1], vals[best], vals[best + 1]);
    let shift = 0.5 * (a - c) / (a - 2.0 * b + c);
    16000.0 / ((lo - 1 + best) as f64 + shift)
}

