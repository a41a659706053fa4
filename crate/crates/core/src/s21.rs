// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Feedline transmission past a notch-coupled resonator, in the
//! diameter-correction form, and its fit.
//!
//! S21(f) = 1 − (Q/|Q̂c|)·e^{iφ} / (1 + 2iQ(f − f0)/f0), with |Q̂c| = Qc·cos φ
//! and 1/Q = 1/Qi + 1/Qc. The asymmetry φ rotates the resonance circle about
//! the off-resonant point 1; Qc is the real part of the complex coupling Q.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, LmOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S21Sweep {
    pub freqs_ghz: Vec<f64>,
    pub s21: Vec<Complex64>,
    /// Incident power; carried as a label only.
    pub power_dbm: Option<f64>,
}

impl S21Sweep {
    pub fn new(freqs_ghz: Vec<f64>, s21: Vec<Complex64>) -> Result<Self> {
        let sweep = Self {
            freqs_ghz,
            s21,
            power_dbm: None,
        };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn validate(&self) -> Result<()> {
        if self.freqs_ghz.len() != self.s21.len() {
            return Err(Error::InvalidConfig("frequency and S21 arrays differ in length".into()));
        }
        if self.freqs_ghz.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("sweep frequencies must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceFit {
    pub f0_ghz: f64,
    pub qi: f64,
    pub qc: f64,
    pub asymmetry_rad: f64,
    /// RMS magnitude of the complex misfit.
    pub residual: f64,
}

impl ResonanceFit {
    pub fn q_loaded(&self) -> f64 {
        1.0 / (1.0 / self.qi + 1.0 / self.qc)
    }
}

fn check_q(qi: f64, qc: f64, phi: f64) -> Result<()> {
    if !(qi > 0.0 && qc > 0.0) {
        return Err(Error::domain("notch_model", format!("Qi = {qi}, Qc = {qc} must be positive")));
    }
    if !(phi.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain("notch_model", format!("asymmetry {phi} rad outside (−π/2, π/2)")));
    }
    Ok(())
}

/// Single-point transmission; Qi may be infinite.
pub fn notch_s21(f0_ghz: f64, qi: f64, qc: f64, asymmetry_rad: f64, f_ghz: f64) -> Complex64 {
    let q = 1.0 / (1.0 / qi + 1.0 / qc);
    let qc_mag = qc * asymmetry_rad.cos();
    let x = (f_ghz - f0_ghz) / f0_ghz;
    Complex64::new(1.0, 0.0)
        - Complex64::from_polar(q / qc_mag, asymmetry_rad) / Complex64::new(1.0, 2.0 * q * x)
}

pub fn notch_model(f0_ghz: f64, qi: f64, qc: f64, asymmetry_rad: f64, freqs_ghz: &[f64]) -> Result<S21Sweep> {
    check_q(qi, qc, asymmetry_rad)?;
    let s21 = freqs_ghz
        .iter()
        .map(|&f| notch_s21(f0_ghz, qi, qc, asymmetry_rad, f))
        .collect();
    S21Sweep::new(freqs_ghz.to_vec(), s21)
}

/// Sweep of `points` frequencies spanning ± `linewidths` loaded linewidths.
pub fn sweep_grid(f0_ghz: f64, q_loaded: f64, linewidths: f64, points: usize) -> Vec<f64> {
    let half = linewidths * f0_ghz / q_loaded;
    crate::transmon::uniform_grid(f0_ghz - half, f0_ghz + half, points)
}

/// Adds independent Gaussian noise of standard deviation `sigma` to the real
/// and imaginary parts, reproducibly from `seed`.
pub fn add_noise(sweep: &S21Sweep, sigma: f64, seed: u64) -> Result<S21Sweep> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidConfig(format!("noise sigma: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s21 = sweep
        .s21
        .iter()
        .map(|z| z + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    Ok(S21Sweep {
        freqs_ghz: sweep.freqs_ghz.clone(),
        s21,
        power_dbm: sweep.power_dbm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: Complex64,
    pub radius: f64,
    /// RMS of the radial misfit.
    pub rms: f64,
}

/// Algebraic (Kåsa) least-squares circle through the points.
pub fn fit_circle(points: &[Complex64]) -> Result<CircleFit> {
    if points.len() < 3 {
        return Err(Error::InvalidConfig("circle fit needs three points".into()));
    }
    let cols = vec![
        points.iter().map(|z| z.re).collect(),
        points.iter().map(|z| z.im).collect(),
        vec![1.0; points.len()],
    ];
    let rhs: Vec<f64> = points.iter().map(|z| -z.norm_sqr()).collect();
    let c = crate::fit::linear_least_squares(&cols, &rhs)
        .ok_or_else(|| Error::singular("fit_circle", "degenerate point set"))?;
    let center = Complex64::new(-0.5 * c[0], -0.5 * c[1]);
    let r2 = center.norm_sqr() - c[2];
    if !(r2 > 0.0) {
        return Err(Error::singular("fit_circle", "points are collinear"));
    }
    let radius = r2.sqrt();
    let rms = (points.iter().map(|z| ((z - center).norm() - radius).powi(2)).sum::<f64>() / points.len() as f64).sqrt();
    Ok(CircleFit { center, radius, rms })
}

/// Starting point from the resonance circle and the dip lineshape.
fn initial_guess(sweep: &S21Sweep) -> Result<ResonanceFit> {
    let circle = fit_circle(&sweep.s21)?;
    let one = Complex64::new(1.0, 0.0);
    let phi = (one - circle.center).arg();
    let depth: Vec<f64> = sweep.s21.iter().map(|z| (z - one).norm_sqr()).collect();
    let (k0, peak) = depth
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
    let f0 = sweep.freqs_ghz[k0];
    let half = 0.5 * peak;
    let lo = (0..k0).rev().find(|&k| depth[k] < half).unwrap_or(0);
    let hi = (k0..depth.len()).find(|&k| depth[k] < half).unwrap_or(depth.len() - 1);
    let fwhm = (sweep.freqs_ghz[hi] - sweep.freqs_ghz[lo]).max(sweep.freqs_ghz[1] - sweep.freqs_ghz[0]);
    let q = f0 / fwhm;
    let qc_mag = q / (2.0 * circle.radius);
    let qc = qc_mag / phi.cos();
    let inv_qi = 1.0 / q - 1.0 / qc;
    let qi = if inv_qi > 0.0 { 1.0 / inv_qi } else { 1e3 * qc };
    Ok(ResonanceFit {
        f0_ghz: f0,
        qi,
        qc,
        asymmetry_rad: phi,
        residual: f64::NAN,
    })
}

/// Complex least-squares fit of [`notch_model`] to a measured sweep.
///
/// Without `initial`, the start point comes from a circle fit. Internally
/// f0 is scaled by the guessed linewidth and the quality factors are fitted
/// logarithmically.
pub fn fit_notch(sweep: &S21Sweep, initial: Option<ResonanceFit>) -> Result<ResonanceFit> {
    sweep.validate()?;
    if sweep.freqs_ghz.len() < 8 {
        return Err(Error::InvalidConfig("sweep too short to fit".into()));
    }
    let guess = match initial {
        Some(g) => g,
        None => initial_guess(sweep)?,
    };
    check_q(guess.qi, guess.qc, guess.asymmetry_rad)?;
    let scale = guess.f0_ghz / guess.q_loaded();
    let unpack = |p: &[f64]| (guess.f0_ghz + p[0] * scale, p[1].exp(), p[2].exp(), p[3]);
    let residuals = |p: &[f64]| {
        let (f0, qi, qc, phi) = unpack(p);
        let mut r = Vec::with_capacity(2 * sweep.s21.len());
        for (f, z) in sweep.freqs_ghz.iter().zip(&sweep.s21) {
            let d = notch_s21(f0, qi, qc, phi, *f) - z;
            r.push(d.re);
            r.push(d.im);
        }
        r
    };
    let p0 = [0.0, guess.qi.ln(), guess.qc.ln(), guess.asymmetry_rad];
    let opts = LmOptions {
        max_iterations: 500,
        ..LmOptions::default()
    };
    let out = levenberg_marquardt(residuals, &p0, opts).map_err(|e| match e {
        Error::FitFailed {
            iterations,
            residual,
            best,
        } => {
            let (f0, qi, qc, phi) = unpack(&best);
            Error::FitFailed {
                iterations,
                residual,
                best: vec![f0, qi, qc, phi],
            }
        }
        other => other,
    })?;
    let (f0, qi, qc, phi) = unpack(&out.params);
    Ok(ResonanceFit {
        f0_ghz: f0,
        qi,
        qc,
        asymmetry_rad: phi,
        // rms over re/im pairs → rms complex magnitude
        residual: out.rms * std::f64::consts::SQRT_2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitState {
    Ground,
    Excited,
    /// High drive power: the resonator returns to its bare frequency.
    Saturated,
}

/// Resonator frequency seen with the qubit in `state`, for a dispersive
/// shift χ/2π in MHz.
pub fn dispersive_pull(f0_ghz: f64, chi_mhz: f64, state: QubitState) -> f64 {
    match state {
        QubitState::Ground => f0_ghz - chi_mhz * 1e-3,
        QubitState::Excited => f0_ghz + chi_mhz * 1e-3,
        QubitState::Saturated => f0_ghz,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn on_resonance_depth() {
        let z = notch_s21(7.52, 38600.0, 5500.0, 0.0, 7.52);
        assert!((z.norm() - 5500.0 / 44100.0).abs() < 1e-12);
        assert!((20.0 * z.norm().log10() + 18.08).abs() < 0.01);
        let lossless = notch_s21(7.52, f64::INFINITY, 5500.0, 0.0, 7.52);
        assert!(lossless.norm() < 1e-12);
        assert!((notch_s21(7.52, 38600.0, 5500.0, 0.0, 8.0).norm() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn model_lies_on_a_circle() {
        let f = sweep_grid(7.52, 4813.0, 10.0, 401);
        let s = notch_model(7.52, 38600.0, 5500.0, 0.3, &f).unwrap();
        let c = fit_circle(&s.s21).unwrap();
        assert!(c.rms < 1e-10);
    }

    #[test]
    fn noiseless_roundtrip() {
        let f = sweep_grid(7.52, 4813.0, 10.0, 2001);
        let s = notch_model(7.52, 38600.0, 5500.0, 0.3, &f).unwrap();
        let r = fit_notch(&s, None).unwrap();
        assert!(((r.f0_ghz - 7.52) / 7.52).abs() < 1e-6);
        assert!(((r.qi - 38600.0) / 38600.0).abs() < 1e-6, "{}", r.qi);
        assert!(((r.qc - 5500.0) / 5500.0).abs() < 1e-6);
        assert!((r.asymmetry_rad - 0.3).abs() < 1e-6);
    }

    #[test]
    fn pull_is_symmetric() {
        let g = dispersive_pull(7.52, 3.9, QubitState::Ground);
        let e = dispersive_pull(7.52, 3.9, QubitState::Excited);
        assert!((g - 7.5161).abs() < 1e-12);
        assert!((0.5 * (g + e) - 7.52).abs() < 1e-12);
        assert_eq!(dispersive_pull(7.52, 0.0, QubitState::Ground), 7.52);
    }
}
