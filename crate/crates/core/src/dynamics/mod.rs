// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Open-system time evolution of a driven transmon, optionally coupled to
//! its resonator, under a Lindblad master equation.
//!
//! Units: frequencies in GHz, rates and Rabi frequencies in MHz (cyclic),
//! times in ns, coherence times in μs.

mod engine;
mod experiments;

pub use engine::{evolve, Engine, Evolution, SegmentPropagator, SimulationTrace, TraceDiagnostics};
pub use experiments::{
    echo_experiment, pi_time_ns, purcell_sweep, rabi_chevron, ramsey_experiment, t1_experiment, ChevronMap,
    DecayExperiment, PurcellParams, PurcellPoint, RamseyExperiment,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Drive,
    Delay,
}

/// One rectangular piece of a pulse sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub kind: SegmentKind,
    pub drive_freq_ghz: f64,
    /// On-resonance Rabi frequency Ω in MHz.
    pub rabi_mhz: f64,
    pub phase_rad: f64,
    pub duration_ns: f64,
    /// Qubit frequency during the segment (flux tuning). `None` keeps the
    /// current value.
    pub qubit_freq_ghz: Option<f64>,
    /// Sweep the qubit frequency linearly from its current value to
    /// `qubit_freq_ghz` over the segment instead of jumping.
    pub ramp: bool,
}

impl PulseSegment {
    pub fn drive(drive_freq_ghz: f64, rabi_mhz: f64, phase_rad: f64, duration_ns: f64) -> Self {
        Self {
            kind: SegmentKind::Drive,
            drive_freq_ghz,
            rabi_mhz,
            phase_rad,
            duration_ns,
            qubit_freq_ghz: None,
            ramp: false,
        }
    }

    pub fn delay(duration_ns: f64) -> Self {
        Self {
            kind: SegmentKind::Delay,
            drive_freq_ghz: 0.0,
            rabi_mhz: 0.0,
            phase_rad: 0.0,
            duration_ns,
            qubit_freq_ghz: None,
            ramp: false,
        }
    }

    /// Delay during which the qubit is swept linearly to `qubit_freq_ghz`.
    pub fn ramp(qubit_freq_ghz: f64, duration_ns: f64) -> Self {
        Self {
            qubit_freq_ghz: Some(qubit_freq_ghz),
            ramp: true,
            ..Self::delay(duration_ns)
        }
    }

    pub fn with_qubit_freq(mut self, qubit_freq_ghz: f64) -> Self {
        self.qubit_freq_ghz = Some(qubit_freq_ghz);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_ns.is_finite() && self.duration_ns >= 0.0) {
            return Err(Error::InvalidConfig(format!("segment duration {} ns", self.duration_ns)));
        }
        if !(self.rabi_mhz.is_finite() && self.rabi_mhz >= 0.0) {
            return Err(Error::InvalidConfig(format!("Rabi frequency {} MHz", self.rabi_mhz)));
        }
        if self.kind == SegmentKind::Delay && self.rabi_mhz != 0.0 {
            return Err(Error::InvalidConfig("delay segment carries a drive".into()));
        }
        if self.kind == SegmentKind::Drive && !(self.drive_freq_ghz.is_finite() && self.drive_freq_ghz > 0.0) {
            return Err(Error::InvalidConfig(format!("drive frequency {} GHz", self.drive_freq_ghz)));
        }
        if !self.phase_rad.is_finite() {
            return Err(Error::InvalidConfig("non-finite drive phase".into()));
        }
        if let Some(f) = self.qubit_freq_ghz {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidConfig(format!("qubit frequency {f} GHz")));
            }
        }
        if self.ramp && self.qubit_freq_ghz.is_none() {
            return Err(Error::InvalidConfig("ramp segment without a target frequency".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Population of every qubit level above the ground state.
    QubitExcited,
    PhotonNumber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub segments: Vec<PulseSegment>,
    pub readout: Observable,
}

impl PulseSequence {
    pub fn new(segments: Vec<PulseSegment>, readout: Observable) -> Self {
        Self { segments, readout }
    }

    pub fn total_duration_ns(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_ns).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidConfig("empty pulse sequence".into()));
        }
        for s in &self.segments {
            s.validate()?;
        }
        if !self.total_duration_ns().is_finite() {
            return Err(Error::InvalidConfig("infinite sequence duration".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hilbert {
    /// Bare transmon truncated to 2 or 3 levels. `anharmonicity_mhz` is
    /// ν01 − ν12 (positive for a transmon) and only matters with 3 levels.
    Qubit { levels: usize, anharmonicity_mhz: f64 },
    /// Transmon ⊗ resonator with photon numbers 0..=n_max.
    QubitResonator {
        qubit_levels: usize,
        anharmonicity_mhz: f64,
        n_max: usize,
        f_r_ghz: f64,
        g_mhz: f64,
    },
}

impl Hilbert {
    pub fn two_level() -> Self {
        Hilbert::Qubit {
            levels: 2,
            anharmonicity_mhz: 0.0,
        }
    }

    pub fn qubit_levels(&self) -> usize {
        match *self {
            Hilbert::Qubit { levels, .. } => levels,
            Hilbert::QubitResonator { qubit_levels, .. } => qubit_levels,
        }
    }

    pub fn resonator_levels(&self) -> usize {
        match *self {
            Hilbert::Qubit { .. } => 1,
            Hilbert::QubitResonator { n_max, .. } => n_max + 1,
        }
    }

    pub fn dimension(&self) -> usize {
        self.qubit_levels() * self.resonator_levels()
    }
}

/// Physical and numerical parameters of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindbladConfig {
    pub hilbert: Hilbert,
    pub qubit_freq_ghz: f64,
    /// Energy relaxation time; `f64::INFINITY` switches it off.
    pub t1_us: f64,
    /// Coherence time, T2 ≤ 2·T1.
    pub t2_us: f64,
    pub kappa_ext_mhz: f64,
    pub kappa_int_mhz: f64,
    /// Drive minus qubit frequency used by the experiment helpers.
    pub detuning_mhz: f64,
    /// Offset-charge parity splitting of the qubit line.
    pub parity_split_mhz: f64,
    pub step_ns: f64,
    pub tolerance: f64,
    /// Output spacing; `None` samples every integration step.
    pub sample_ns: Option<f64>,
}

impl LindbladConfig {
    pub const DEFAULT_STEP_NS: f64 = 0.25;
    pub const DEFAULT_TOLERANCE: f64 = 1e-6;

    /// Two-level qubit with the given coherence times and default numerics.
    pub fn qubit(qubit_freq_ghz: f64, t1_us: f64, t2_us: f64) -> Self {
        Self {
            hilbert: Hilbert::two_level(),
            qubit_freq_ghz,
            t1_us,
            t2_us,
            kappa_ext_mhz: 0.0,
            kappa_int_mhz: 0.0,
            detuning_mhz: 0.0,
            parity_split_mhz: 0.0,
            step_ns: Self::DEFAULT_STEP_NS,
            tolerance: Self::DEFAULT_TOLERANCE,
            sample_ns: None,
        }
    }

    /// Decay rate 1/T1 in 1/ns.
    pub fn gamma1_per_ns(&self) -> f64 {
        1.0 / (self.t1_us * 1e3)
    }

    /// Pure dephasing rate 1/Tφ = 1/T2 − 1/(2T1) in 1/ns.
    pub fn gamma_phi_per_ns(&self) -> f64 {
        (1.0 / (self.t2_us * 1e3) - 0.5 * self.gamma1_per_ns()).max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let (levels, anh) = match self.hilbert {
            Hilbert::Qubit {
                levels,
                anharmonicity_mhz,
            } => (levels, anharmonicity_mhz),
            Hilbert::QubitResonator {
                qubit_levels,
                anharmonicity_mhz,
                n_max,
                f_r_ghz,
                g_mhz,
            } => {
                if n_max < 1 {
                    return bad("resonator needs n_max ≥ 1".into());
                }
                if !(f_r_ghz.is_finite() && f_r_ghz > 0.0) || !g_mhz.is_finite() {
                    return bad("resonator frequency and coupling must be finite".into());
                }
                (qubit_levels, anharmonicity_mhz)
            }
        };
        if !(2..=3).contains(&levels) {
            return bad(format!("{levels} qubit levels; 2 or 3 supported"));
        }
        if !anh.is_finite() {
            return bad("non-finite anharmonicity".into());
        }
        if !(self.qubit_freq_ghz.is_finite() && self.qubit_freq_ghz > 0.0) {
            return bad(format!("qubit frequency {} GHz", self.qubit_freq_ghz));
        }
        if !(self.t1_us > 0.0 && self.t2_us > 0.0) || self.t1_us.is_nan() || self.t2_us.is_nan() {
            return bad("T1 and T2 must be positive".into());
        }
        if self.t2_us > 2.0 * self.t1_us * (1.0 + 1e-12) {
            return bad(format!("T2 = {} μs exceeds 2·T1 = {} μs", self.t2_us, 2.0 * self.t1_us));
        }
        for (name, k) in [("kappa_ext", self.kappa_ext_mhz), ("kappa_int", self.kappa_int_mhz)] {
            if !(k.is_finite() && k >= 0.0) {
                return bad(format!("{name} = {k} MHz"));
            }
        }
        if !self.detuning_mhz.is_finite() {
            return bad("non-finite detuning".into());
        }
        if !(self.parity_split_mhz.is_finite() && self.parity_split_mhz >= 0.0) {
            return bad(format!("parity split {} MHz", self.parity_split_mhz));
        }
        if !(self.step_ns.is_finite() && self.step_ns > 0.0) {
            return bad(format!("integrator step {} ns", self.step_ns));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad(format!("tolerance {}", self.tolerance));
        }
        if let Some(s) = self.sample_ns {
            if !(s.is_finite() && s > 0.0) {
                return bad(format!("sample spacing {s} ns"));
            }
        }
        Ok(())
    }
}
