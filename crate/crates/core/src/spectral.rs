// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Discrete spectral analysis of uniformly sampled real traces.

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    /// Frequency in cycles per unit of the sample spacing's reciprocal
    /// (MHz for spacing in μs, GHz for ns).
    pub frequency: f64,
    pub magnitude: f64,
}

/// Magnitude spectrum of the mean-removed signal, zero-padded by `pad`.
/// Returns (bin spacing, magnitudes for non-negative frequencies).
pub fn magnitude_spectrum(signal: &[f64], dt: f64, pad: usize) -> (f64, Vec<f64>) {
    let n = signal.len();
    let len = (n * pad.max(1)).next_power_of_two();
    let mean = signal.iter().sum::<f64>() / n.max(1) as f64;
    let mut buf: Vec<Complex64> = signal
        .iter()
        .map(|v| Complex64::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(len)
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let scale = 2.0 / n.max(1) as f64;
    let mags = buf[..len / 2 + 1].iter().map(|c| c.norm() * scale).collect();
    (1.0 / (len as f64 * dt), mags)
}

/// The `count` largest local maxima of the spectrum, refined by parabolic
/// interpolation, sorted by frequency.
pub fn spectral_peaks(signal: &[f64], dt: f64, count: usize, pad: usize) -> Vec<SpectralPeak> {
    let (df, mags) = magnitude_spectrum(signal, dt, pad);
    let mut maxima: Vec<SpectralPeak> = (1..mags.len().saturating_sub(1))
        .filter(|&k| mags[k] > mags[k - 1] && mags[k] >= mags[k + 1])
        .map(|k| {
            let (a, b, c) = (mags[k - 1], mags[k], mags[k + 1]);
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            SpectralPeak {
                frequency: (k as f64 + shift) * df,
                magnitude: b - 0.25 * (a - c) * shift,
            }
        })
        .collect();
    maxima.sort_by(|x, y| y.magnitude.total_cmp(&x.magnitude));
    maxima.truncate(count);
    maxima.sort_by(|x, y| x.frequency.total_cmp(&y.frequency));
    maxima
}

/// Frequency of the strongest spectral component.
pub fn dominant_frequency(signal: &[f64], dt: f64) -> Option<f64> {
    spectral_peaks(signal, dt, 1, 16).first().map(|p| p.frequency)
}
