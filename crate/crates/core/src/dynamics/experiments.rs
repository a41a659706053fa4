// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Standard time-domain qubit experiments built on the Lindblad engine.

use std::collections::HashMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{Engine, Evolution, SegmentPropagator};
use super::{LindbladConfig, PulseSegment};
use crate::coupling::purcell_t1;
use crate::error::{Error, Result};
use crate::fit::{fit_exponential, separable_fit, ExponentialFit, LmOptions};
use crate::spectral::{dominant_frequency, spectral_peaks, SpectralPeak};

/// Duration of a resonant π-pulse, 1/(2Ω), in ns for Ω in MHz.
pub fn pi_time_ns(rabi_mhz: f64) -> f64 {
    1e3 / (2.0 * rabi_mhz)
}

fn check_grid(taus_ns: &[f64]) -> Result<()> {
    if taus_ns.len() < 4 {
        return Err(Error::InvalidConfig("delay grid needs at least 4 points".into()));
    }
    if taus_ns[0] < 0.0 || taus_ns.windows(2).any(|w| !(w[1] > w[0])) || !taus_ns.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidConfig("delay grid must be finite, non-negative and increasing".into()));
    }
    Ok(())
}

fn uniform_spacing(taus_ns: &[f64]) -> Option<f64> {
    let dt = taus_ns[1] - taus_ns[0];
    taus_ns
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.max(1.0))
        .then_some(dt)
}

/// Configurations of the parity branches: qubit at ν ± split/2, or the bare
/// qubit when there is no splitting.
fn parity_branches(config: &LindbladConfig) -> Vec<LindbladConfig> {
    if config.parity_split_mhz == 0.0 {
        return vec![*config];
    }
    [0.5, -0.5]
        .iter()
        .map(|s| LindbladConfig {
            qubit_freq_ghz: config.qubit_freq_ghz + s * config.parity_split_mhz * 1e-3,
            ..*config
        })
        .collect()
}

fn drive_freq(config: &LindbladConfig) -> f64 {
    config.qubit_freq_ghz + config.detuning_mhz * 1e-3
}

/// Delay propagators keyed by duration, so repeated gaps are built once.
struct DelayCache<'e> {
    engine: &'e Engine,
    frame_ghz: f64,
    cache: HashMap<u64, SegmentPropagator>,
}

impl<'e> DelayCache<'e> {
    fn new(engine: &'e Engine, frame_ghz: f64) -> Self {
        Self {
            engine,
            frame_ghz,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, duration_ns: f64) -> Result<&SegmentPropagator> {
        let key = duration_ns.to_bits();
        if !self.cache.contains_key(&key) {
            let q = self.engine.config().qubit_freq_ghz;
            let p = self.engine.propagator(&PulseSegment::delay(duration_ns), q, self.frame_ghz)?;
            self.cache.insert(key, p);
        }
        Ok(&self.cache[&key])
    }
}

/// Excited-state population as a function of drive frequency and duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChevronMap {
    pub drive_freqs_ghz: Vec<f64>,
    pub durations_ns: Vec<f64>,
    /// `excited[i][j]`: drive frequency i, duration j.
    pub excited: Vec<Vec<f64>>,
    /// Strongest oscillation frequency along each duration column, MHz.
    pub dominant_mhz: Vec<f64>,
}

/// Rectangular drive of variable length swept across frequency.
pub fn rabi_chevron(
    config: &LindbladConfig,
    rabi_mhz: f64,
    freq_span_ghz: (f64, f64),
    duration_span_ns: (f64, f64),
    grid: (usize, usize),
) -> Result<ChevronMap> {
    let (nf, nt) = grid;
    if nf < 1 || nt < 4 || !(freq_span_ghz.1 >= freq_span_ghz.0) || !(duration_span_ns.1 > duration_span_ns.0) {
        return Err(Error::InvalidConfig("degenerate chevron span or grid".into()));
    }
    if nf > 1 && freq_span_ghz.1 == freq_span_ghz.0 {
        return Err(Error::InvalidConfig("degenerate chevron frequency span".into()));
    }
    if duration_span_ns.0 < 0.0 {
        return Err(Error::InvalidConfig("negative pulse duration".into()));
    }
    let engine = Engine::new(config)?;
    let freqs = crate::transmon::uniform_grid(freq_span_ghz.0, freq_span_ghz.1, nf);
    let durations = crate::transmon::uniform_grid(duration_span_ns.0, duration_span_ns.1, nt);
    let dt = durations[1] - durations[0];
    let q = config.qubit_freq_ghz;

    let columns: Vec<Vec<f64>> = freqs
        .par_iter()
        .map(|&f| -> Result<Vec<f64>> {
            let first = engine.propagator(&PulseSegment::drive(f, rabi_mhz, 0.0, durations[0]), q, f)?;
            let step = engine.propagator(&PulseSegment::drive(f, rabi_mhz, 0.0, dt), q, f)?;
            let mut ev = Evolution::new(&engine);
            ev.apply(&first)?;
            let mut col = Vec::with_capacity(nt);
            col.push(ev.excited_population());
            for _ in 1..nt {
                ev.apply(&step)?;
                col.push(ev.excited_population());
            }
            Ok(col)
        })
        .collect::<Result<_>>()?;
    let dominant = columns
        .iter()
        .map(|c| dominant_frequency(c, dt).map_or(0.0, |f| f * 1e3))
        .collect();
    Ok(ChevronMap {
        drive_freqs_ghz: freqs,
        durations_ns: durations,
        excited: columns,
        dominant_mhz: dominant,
    })
}

/// Decay-type experiment: trace and single-exponential fit (τ in μs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayExperiment {
    pub taus_ns: Vec<f64>,
    pub excited: Vec<f64>,
    pub fit: ExponentialFit,
}

/// π-pulse, delay τ, population readout.
pub fn t1_experiment(config: &LindbladConfig, rabi_mhz: f64, taus_ns: &[f64]) -> Result<DecayExperiment> {
    check_grid(taus_ns)?;
    if !config.t1_us.is_finite() {
        return Err(Error::InvalidConfig("T1 experiment needs a finite T1".into()));
    }
    let engine = Engine::new(config)?;
    let fd = drive_freq(config);
    let pulse = engine.propagator(
        &PulseSegment::drive(fd, rabi_mhz, 0.0, pi_time_ns(rabi_mhz)),
        config.qubit_freq_ghz,
        fd,
    )?;
    let mut ev = Evolution::new(&engine);
    ev.apply(&pulse)?;
    let mut delays = DelayCache::new(&engine, fd);
    let mut last = 0.0;
    let mut excited = Vec::with_capacity(taus_ns.len());
    for &tau in taus_ns {
        if tau > last {
            ev.apply(delays.get(tau - last)?)?;
            last = tau;
        }
        excited.push(ev.excited_population());
    }
    let taus_us: Vec<f64> = taus_ns.iter().map(|t| t * 1e-3).collect();
    let fit = fit_exponential(&taus_us, &excited)?;
    Ok(DecayExperiment {
        taus_ns: taus_ns.to_vec(),
        excited,
        fit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyExperiment {
    pub taus_ns: Vec<f64>,
    pub excited: Vec<f64>,
    /// Strongest spectral components of the fringe, MHz.
    pub peaks: Vec<SpectralPeak>,
    /// Fringe tones from the envelope fit, MHz.
    pub tone_freqs_mhz: Vec<f64>,
    pub t2_us: f64,
    pub fit_rms: f64,
    /// The delay span is too short to resolve the parity splitting.
    pub resolution_warning: bool,
}

/// π/2 – τ – π/2 with the signal averaged over both parity branches.
pub fn ramsey_experiment(config: &LindbladConfig, rabi_mhz: f64, taus_ns: &[f64]) -> Result<RamseyExperiment> {
    check_grid(taus_ns)?;
    let dt = uniform_spacing(taus_ns)
        .ok_or_else(|| Error::InvalidConfig("Ramsey delay grid must be uniform".into()))?;
    let split = config.parity_split_mhz;
    let span_ns = taus_ns[taus_ns.len() - 1] - taus_ns[0];
    let resolution_warning = split > 0.0 && span_ns < 2.0 / (split * 1e-3);
    if resolution_warning {
        warn!(
            "Ramsey span {span_ns} ns cannot resolve a {split} MHz splitting (needs ≥ {} ns)",
            2.0 / (split * 1e-3)
        );
    }

    let fd = drive_freq(config);
    let half_pi = PulseSegment::drive(fd, rabi_mhz, 0.0, 0.5 * pi_time_ns(rabi_mhz));
    let branches = parity_branches(config);
    let mut excited = vec![0.0; taus_ns.len()];
    for branch in &branches {
        let engine = Engine::new(branch)?;
        let pulse = engine.propagator(&half_pi, branch.qubit_freq_ghz, fd)?;
        let mut delays = DelayCache::new(&engine, fd);
        let mut ev = Evolution::new(&engine);
        ev.apply(&pulse)?;
        let mut last = 0.0;
        for (k, &tau) in taus_ns.iter().enumerate() {
            if tau > last {
                ev.apply(delays.get(tau - last)?)?;
                last = tau;
            }
            let mut probe = ev.clone();
            probe.apply(&pulse)?;
            excited[k] += probe.excited_population() / branches.len() as f64;
        }
    }

    let tones = if split > 0.0 { 2 } else { 1 };
    let peaks: Vec<SpectralPeak> = spectral_peaks(&excited, dt, tones, 16)
        .into_iter()
        .map(|p| SpectralPeak {
            frequency: p.frequency * 1e3,
            magnitude: p.magnitude,
        })
        .collect();

    let taus_us: Vec<f64> = taus_ns.iter().map(|t| t * 1e-3).collect();
    let t1 = config.t1_us;
    let basis = |theta: &[f64]| {
        let t2 = theta[0].exp();
        let mut cols = vec![vec![1.0; taus_us.len()]];
        if t1.is_finite() {
            cols.push(taus_us.iter().map(|t| (-t / t1).exp()).collect());
        }
        for &f in &theta[1..] {
            let w = std::f64::consts::TAU * f;
            cols.push(taus_us.iter().map(|t| (-t / t2).exp() * (w * t).cos()).collect());
            cols.push(taus_us.iter().map(|t| (-t / t2).exp() * (w * t).sin()).collect());
        }
        cols
    };
    let mut seed_freqs: Vec<f64> = peaks.iter().map(|p| p.frequency).collect();
    if seed_freqs.len() < tones {
        let centre = config.detuning_mhz.abs();
        seed_freqs = (0..tones).map(|k| centre + (k as f64 - 0.5 * (tones - 1) as f64) * split).collect();
    }
    let span_us = span_ns * 1e-3;
    let rms_at = |t2: f64| {
        let mut theta = vec![t2.ln()];
        theta.extend(&seed_freqs);
        let cols = basis(&theta);
        crate::fit::linear_least_squares(&cols, &excited).map_or(f64::INFINITY, |c| {
            (0..excited.len())
                .map(|i| (excited[i] - cols.iter().zip(&c).map(|(col, ck)| col[i] * ck).sum::<f64>()).powi(2))
                .sum()
        })
    };
    let t2_seed = (0..61)
        .map(|i| span_us / 50.0 * (2500.0f64).powf(i as f64 / 60.0))
        .min_by(|a, b| rms_at(*a).total_cmp(&rms_at(*b)))
        .unwrap_or(span_us);
    let mut theta0 = vec![t2_seed.ln()];
    theta0.extend(&seed_freqs);
    let fit = separable_fit(basis, &excited, &theta0, LmOptions::default())?;
    let mut tone_freqs_mhz: Vec<f64> = fit.nonlinear[1..].iter().map(|f| f.abs()).collect();
    tone_freqs_mhz.sort_by(f64::total_cmp);

    Ok(RamseyExperiment {
        taus_ns: taus_ns.to_vec(),
        excited,
        peaks,
        tone_freqs_mhz,
        t2_us: fit.nonlinear[0].exp(),
        fit_rms: fit.rms,
        resolution_warning,
    })
}

/// π/2 – τ/2 – π – τ/2 – π/2, averaged over parity branches.
///
/// The refocusing pulse is phase-cycled over {0, π} and the final π/2 over
/// {0, π} with the second readout inverted. This removes the first-order
/// pulse-error terms that rectangular pulses of finite Ω would otherwise
/// leave in a detuned echo, so static offsets refocus up to O((δ/Ω)²).
pub fn echo_experiment(config: &LindbladConfig, rabi_mhz: f64, taus_ns: &[f64]) -> Result<DecayExperiment> {
    check_grid(taus_ns)?;
    let fd = drive_freq(config);
    let t_pi = pi_time_ns(rabi_mhz);
    let pi = std::f64::consts::PI;
    let branches = parity_branches(config);
    let weight = 1.0 / (4 * branches.len()) as f64;
    let mut excited = vec![0.0; taus_ns.len()];
    for branch in &branches {
        let engine = Engine::new(branch)?;
        let q = branch.qubit_freq_ghz;
        let pulse = |phase: f64, duration: f64| engine.propagator(&PulseSegment::drive(fd, rabi_mhz, phase, duration), q, fd);
        let first = pulse(0.0, 0.5 * t_pi)?;
        let refocus = [pulse(0.0, t_pi)?, pulse(pi, t_pi)?];
        let last = [pulse(0.0, 0.5 * t_pi)?, pulse(pi, 0.5 * t_pi)?];
        let mut delays = DelayCache::new(&engine, fd);
        for (k, &tau) in taus_ns.iter().enumerate() {
            let wait = delays.get(0.5 * tau)?.clone();
            for r in &refocus {
                let mut ev = Evolution::new(&engine);
                ev.apply(&first)?;
                ev.apply(&wait)?;
                ev.apply(r)?;
                ev.apply(&wait)?;
                for (i, l) in last.iter().enumerate() {
                    let mut probe = ev.clone();
                    probe.apply(l)?;
                    let p = probe.excited_population();
                    excited[k] += weight * if i == 0 { p } else { 1.0 - p };
                }
            }
        }
    }
    let taus_us: Vec<f64> = taus_ns.iter().map(|t| t * 1e-3).collect();
    let fit = fit_exponential(&taus_us, &excited)?;
    Ok(DecayExperiment {
        taus_ns: taus_ns.to_vec(),
        excited,
        fit,
    })
}

/// Inputs of the coherence-versus-frequency sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurcellParams {
    pub f_r_ghz: f64,
    pub g_mhz: f64,
    pub kappa_mhz: f64,
    /// Intrinsic (non-Purcell) relaxation time.
    pub t1_us: f64,
    /// Echo coherence at the intrinsic T1; fixes the pure dephasing rate.
    pub t2_echo_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurcellPoint {
    pub nu01_ghz: f64,
    pub delta0_ghz: f64,
    pub t1_total_us: f64,
    /// 1/T2 = 1/(2·T1_total) + Γφ with Γφ held at its intrinsic value.
    pub t2_echo_bound_us: f64,
    /// Qubit and resonator degenerate: dispersive formula invalid.
    pub resonant: bool,
}

pub fn purcell_sweep(params: &PurcellParams, nu01_grid_ghz: &[f64]) -> Result<Vec<PurcellPoint>> {
    let gamma_phi = (1.0 / params.t2_echo_us - 0.5 / params.t1_us).max(0.0);
    nu01_grid_ghz
        .iter()
        .map(|&nu| {
            let delta0 = nu - params.f_r_ghz;
            let p = purcell_t1(params.kappa_mhz, params.g_mhz, delta0, params.t1_us)?;
            Ok(PurcellPoint {
                nu01_ghz: nu,
                delta0_ghz: delta0,
                t1_total_us: p.t1_total_us,
                t2_echo_bound_us: 1.0 / (0.5 / p.t1_total_us + gamma_phi),
                resonant: p.resonant,
            })
        })
        .collect()
}
