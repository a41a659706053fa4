// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Efficiency of the transmon as a microwave single-photon source.
//!
//! Two protocols: a static one, where the qubit sits detuned and leaks its
//! excitation into the resonator at the Purcell rate, and a dynamic one,
//! where the excited qubit is flux-tuned into resonance for half a vacuum
//! Rabi period and the photon then leaves through the feedline.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::dressed_levels;
use crate::dynamics::{pi_time_ns, Engine, Evolution, Hilbert, LindbladConfig, PulseSegment};
use crate::error::{Error, Result};

/// Reference ceiling for the static source at a Purcell-optimised detuning.
/// Quoted rather than computed; the tuned operating point is not specified.
pub const ETA_STATIC_PURCELL_REFERENCE: f64 = 0.018;

fn positive(op: &'static str, pairs: &[(&str, f64)]) -> Result<()> {
    for (name, v) in pairs {
        if !(*v > 0.0) || v.is_nan() {
            return Err(Error::domain(op, format!("{name} = {v} must be positive")));
        }
    }
    Ok(())
}

/// Excited-state polarisation after a π-pulse of length τπ: ε = 1 − τπ/T1.
pub fn epsilon_after_pi(tau_pi_ns: f64, t1_us: f64) -> Result<f64> {
    positive("epsilon_after_pi", &[("T1", t1_us)])?;
    if !(tau_pi_ns >= 0.0) {
        return Err(Error::domain("epsilon_after_pi", format!("τπ = {tau_pi_ns} ns")));
    }
    let ratio = tau_pi_ns / (t1_us * 1e3);
    if ratio >= 1.0 {
        return Err(Error::domain("epsilon_after_pi", "τπ ≥ T1: linearised decay invalid"));
    }
    Ok(1.0 - ratio)
}

/// Static source efficiency ε·κ(g/Δ₀)²/(1/T1 + 2/T2) with κ = f0/Qc; all
/// rates cyclic.
pub fn eta_static(
    epsilon: f64,
    f0_ghz: f64,
    qc: f64,
    g_mhz: f64,
    delta0_ghz: f64,
    t1_us: f64,
    t2_us: f64,
) -> Result<f64> {
    positive(
        "eta_static",
        &[("f0", f0_ghz), ("Qc", qc), ("Δ₀", delta0_ghz), ("T1", t1_us), ("T2", t2_us)],
    )?;
    if !(0.0..=1.0).contains(&epsilon) || !(g_mhz >= 0.0) {
        return Err(Error::domain("eta_static", "ε must lie in [0, 1] and g ≥ 0"));
    }
    let kappa_hz = f0_ghz * 1e9 / qc;
    let ratio = g_mhz * 1e-3 / delta0_ghz;
    let gamma = 1.0 / (t1_us * 1e-6) + 2.0 / (t2_us * 1e-6);
    Ok(epsilon * kappa_hz * ratio * ratio / gamma)
}

/// Dynamic source efficiency Qi/(Qi+Qc)·exp(−(τπ + τswap)/T1).
pub fn eta_dynamic(qi: f64, qc: f64, tau_pi_ns: f64, tau_swap_ns: f64, t1_us: f64) -> Result<f64> {
    positive("eta_dynamic", &[("Qi", qi), ("Qc", qc), ("T1", t1_us)])?;
    if !(tau_pi_ns >= 0.0 && tau_swap_ns >= 0.0) {
        return Err(Error::domain("eta_dynamic", "durations must be non-negative"));
    }
    Ok(qi / (qi + qc) * (-(tau_pi_ns + tau_swap_ns) / (t1_us * 1e3)).exp())
}

/// Where the excitation goes when it is not emitted into the feedline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// Photon absorbed by internal resonator loss.
    pub internal: f64,
    /// Qubit decay during the π-pulse.
    pub pulse_decay: f64,
    /// Qubit decay during the swap.
    pub swap_decay: f64,
}

impl LossBreakdown {
    pub fn new(qi: f64, qc: f64, tau_pi_ns: f64, tau_swap_ns: f64, t1_us: f64) -> Result<Self> {
        eta_dynamic(qi, qc, tau_pi_ns, tau_swap_ns, t1_us)?;
        let p_pulse = (-tau_pi_ns / (t1_us * 1e3)).exp();
        let p_swap = (-tau_swap_ns / (t1_us * 1e3)).exp();
        Ok(Self {
            internal: p_pulse * p_swap * qc / (qi + qc),
            pulse_decay: 1.0 - p_pulse,
            swap_decay: p_pulse * (1.0 - p_swap),
        })
    }

    pub fn total(&self) -> f64 {
        self.internal + self.pulse_decay + self.swap_decay
    }
}

/// Reading of ω_r in the optimal-Qc formula 2π·ω_r·T1·(g/Δ₀)².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QcConvention {
    /// ω_r taken as the cyclic frequency f_r.
    #[default]
    Cyclic,
    /// ω_r taken as the angular frequency 2π·f_r.
    Angular,
}

impl std::str::FromStr for QcConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cyclic" => Ok(Self::Cyclic),
            "angular" => Ok(Self::Angular),
            other => Err(Error::InvalidConfig(format!("Qc convention '{other}' (cyclic | angular)"))),
        }
    }
}

impl std::fmt::Display for QcConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Cyclic => "cyclic",
            Self::Angular => "angular",
        })
    }
}

/// Coupling quality factor that balances emission against qubit decay.
pub fn qc_optimal(f_r_ghz: f64, t1_us: f64, g_mhz: f64, delta0_ghz: f64, convention: QcConvention) -> Result<f64> {
    positive(
        "qc_optimal",
        &[("f_r", f_r_ghz), ("T1", t1_us), ("g", g_mhz), ("Δ₀", delta0_ghz)],
    )?;
    let omega = match convention {
        QcConvention::Cyclic => f_r_ghz * 1e9,
        QcConvention::Angular => std::f64::consts::TAU * f_r_ghz * 1e9,
    };
    let ratio = g_mhz * 1e-3 / delta0_ghz;
    Ok(std::f64::consts::TAU * omega * t1_us * 1e-6 * ratio * ratio)
}

/// Device and protocol parameters for the source analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonSourceParams {
    pub f_r_ghz: f64,
    pub g_mhz: f64,
    pub delta0_ghz: f64,
    pub qi: f64,
    pub qc: f64,
    /// Coupling Q used for the static estimate (the design value).
    pub qc_static: f64,
    pub t1_us: f64,
    pub t2_us: f64,
    pub tau_pi_ns: f64,
    pub tau_swap_ns: f64,
    pub qc_convention: QcConvention,
}

impl Default for PhotonSourceParams {
    fn default() -> Self {
        Self {
            f_r_ghz: 7.5,
            g_mhz: 54.3,
            delta0_ghz: 0.990,
            qi: 38_600.0,
            qc: 5_500.0,
            qc_static: 5_000.0,
            t1_us: 4.72,
            t2_us: 6.69,
            tau_pi_ns: 80.0,
            tau_swap_ns: 58.0,
            qc_convention: QcConvention::Cyclic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonSourceReport {
    pub epsilon: f64,
    pub eta_static: f64,
    pub eta_static_purcell_reference: f64,
    pub eta_dynamic: f64,
    pub tau_pi_ns: f64,
    pub tau_swap_ns: f64,
    /// Half a vacuum Rabi period, π/(2g) with g angular.
    pub swap_time_from_g_ns: f64,
    pub qc_optimal: f64,
    pub qc_convention: QcConvention,
    pub loss_breakdown: LossBreakdown,
}

impl PhotonSourceReport {
    pub fn compute(p: &PhotonSourceParams) -> Result<Self> {
        let epsilon = epsilon_after_pi(p.tau_pi_ns, p.t1_us)?;
        Ok(Self {
            epsilon,
            eta_static: eta_static(epsilon, p.f_r_ghz, p.qc_static, p.g_mhz, p.delta0_ghz, p.t1_us, p.t2_us)?,
            eta_static_purcell_reference: ETA_STATIC_PURCELL_REFERENCE,
            eta_dynamic: eta_dynamic(p.qi, p.qc, p.tau_pi_ns, p.tau_swap_ns, p.t1_us)?,
            tau_pi_ns: p.tau_pi_ns,
            tau_swap_ns: p.tau_swap_ns,
            swap_time_from_g_ns: swap_time_ns(p.g_mhz),
            qc_optimal: qc_optimal(p.f_r_ghz, p.t1_us, p.g_mhz, p.delta0_ghz, p.qc_convention)?,
            qc_convention: p.qc_convention,
            loss_breakdown: LossBreakdown::new(p.qi, p.qc, p.tau_pi_ns, p.tau_swap_ns, p.t1_us)?,
        })
    }
}

/// Resonant qubit-to-photon swap time π/(2g), g angular, in ns.
pub fn swap_time_ns(g_mhz: f64) -> f64 {
    1e3 / (4.0 * g_mhz)
}

/// Settings of the simulated dynamic protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub source: PhotonSourceParams,
    pub rabi_mhz: f64,
    pub n_max: usize,
    pub step_ns: f64,
    /// Flux ramp duration; 0 tunes instantaneously.
    pub ramp_ns: f64,
    /// Time at resonance; `None` uses [`swap_time_ns`].
    pub hold_ns: Option<f64>,
    /// Free evolution after tuning back, long enough for the photon to leave.
    pub decay_ns: f64,
    pub sample_ns: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            source: PhotonSourceParams::default(),
            rabi_mhz: 6.17,
            n_max: 3,
            step_ns: 0.02,
            ramp_ns: 0.0,
            hold_ns: None,
            decay_ns: 2_000.0,
            sample_ns: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSample {
    pub time_ns: f64,
    pub qubit_excited: f64,
    pub photons: f64,
    pub emitted: f64,
    pub lost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub emission_probability: f64,
    /// Closed-form efficiency at the configured τπ and τswap.
    pub eta_dynamic: f64,
    pub hold_ns: f64,
    pub tau_pi_ns: f64,
    /// Qi/(Qi+Qc): no protocol can emit more.
    pub branching_ceiling: f64,
    pub trace: Vec<ProtocolSample>,
}

fn protocol_config(p: &ProtocolParams) -> LindbladConfig {
    let s = &p.source;
    LindbladConfig {
        hilbert: Hilbert::QubitResonator {
            qubit_levels: 2,
            anharmonicity_mhz: 0.0,
            n_max: p.n_max,
            f_r_ghz: s.f_r_ghz,
            g_mhz: s.g_mhz,
        },
        qubit_freq_ghz: s.f_r_ghz + s.delta0_ghz,
        t1_us: s.t1_us,
        t2_us: s.t2_us,
        kappa_ext_mhz: s.f_r_ghz * 1e3 / s.qc,
        kappa_int_mhz: s.f_r_ghz * 1e3 / s.qi,
        detuning_mhz: 0.0,
        parity_split_mhz: 0.0,
        step_ns: p.step_ns,
        tolerance: 1e-8,
        sample_ns: Some(p.sample_ns),
    }
}

/// Lindblad simulation of π-pulse, tune to resonance, hold, tune back and
/// free decay. The emission probability is the time-integrated photon flux
/// into the feedline.
pub fn simulate_dynamic_protocol(p: &ProtocolParams) -> Result<ProtocolResult> {
    let s = &p.source;
    if p.n_max < 2 {
        return Err(Error::InvalidConfig("dynamic protocol needs n_max ≥ 2".into()));
    }
    if !(p.ramp_ns >= 0.0 && p.decay_ns >= 0.0 && p.sample_ns > 0.0) {
        return Err(Error::InvalidConfig("protocol durations must be non-negative".into()));
    }
    let config = protocol_config(p);
    let engine = Engine::new(&config)?;
    let detuned = config.qubit_freq_ghz;
    let (_, dressed_qubit) = dressed_levels(s.g_mhz, detuned, s.f_r_ghz);
    let tau_pi = pi_time_ns(p.rabi_mhz);
    let hold = p.hold_ns.unwrap_or_else(|| swap_time_ns(s.g_mhz));

    let mut segments = vec![PulseSegment::drive(dressed_qubit, p.rabi_mhz, 0.0, tau_pi)];
    if p.ramp_ns > 0.0 {
        segments.push(PulseSegment::ramp(s.f_r_ghz, p.ramp_ns));
    }
    segments.push(PulseSegment::delay(hold).with_qubit_freq(s.f_r_ghz));
    if p.ramp_ns > 0.0 {
        segments.push(PulseSegment::ramp(detuned, p.ramp_ns));
    }
    segments.push(PulseSegment::delay(p.decay_ns).with_qubit_freq(detuned));

    let sample = |e: &Evolution| ProtocolSample {
        time_ns: e.time_ns(),
        qubit_excited: e.excited_population(),
        photons: e.photon_number(),
        emitted: e.emitted(),
        lost: e.lost(),
    };
    let mut ev = Evolution::new(&engine);
    let mut trace = vec![sample(&ev)];
    for seg in &segments {
        ev.run_segment(seg, Some(p.sample_ns), |e| trace.push(sample(e)))?;
    }
    Ok(ProtocolResult {
        emission_probability: ev.emitted(),
        eta_dynamic: eta_dynamic(s.qi, s.qc, s.tau_pi_ns, s.tau_swap_ns, s.t1_us)?,
        hold_ns: hold,
        tau_pi_ns: tau_pi,
        branching_ceiling: s.qi / (s.qi + s.qc),
        trace,
    })
}

/// Emission probability as a function of the hold time at resonance.
pub fn hold_sweep(p: &ProtocolParams, holds_ns: &[f64]) -> Result<Vec<(f64, f64)>> {
    holds_ns
        .par_iter()
        .map(|&h| {
            let params = ProtocolParams {
                hold_ns: Some(h),
                sample_ns: p.decay_ns.max(1.0),
                ..*p
            };
            simulate_dynamic_protocol(&params).map(|r| (h, r.emission_probability))
        })
        .collect()
}
