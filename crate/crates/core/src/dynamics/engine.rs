// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Vectorised Lindblad generator and its fixed-step fourth-order propagator.
//!
//! The density matrix is stored column-major as vec(ρ), so that
//! vec(AρB) = (Bᵀ ⊗ A) vec(ρ). Two extra components integrate the
//! excitation flux leaving through the feedline (`emitted`) and through all
//! other channels (`lost`). Every segment is simulated in the frame rotating
//! at its drive frequency; the frame phase is carried across boundaries.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Hilbert, LindbladConfig, Observable, PulseSegment, PulseSequence, SegmentKind};
use crate::error::{Error, Result};

const ACCUMULATORS: usize = 2;

/// Precomputed operators and dissipator for one configuration.
#[derive(Debug, Clone)]
pub struct Engine {
    config: LindbladConfig,
    dim: usize,
    /// Qubit lowering operator, full space.
    b: DMatrix<C64>,
    /// Resonator lowering operator, full space.
    a: DMatrix<C64>,
    /// Total excitation number of each basis state.
    excitations: Vec<f64>,
    qubit_level: Vec<f64>,
    photons: Vec<f64>,
    anharmonicity_ghz: f64,
    resonator: Option<(f64, f64)>,
    dissipator: DMatrix<C64>,
    accumulator_rows: DMatrix<C64>,
}

fn lowering(levels: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(levels, levels);
    for k in 1..levels {
        m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    m
}

fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

/// Row r with r·vec(ρ) = Tr(Aρ).
fn trace_row(a: &DMatrix<C64>) -> Vec<C64> {
    let d = a.nrows();
    let mut row = vec![C64::new(0.0, 0.0); d * d];
    for j in 0..d {
        for i in 0..d {
            row[i + j * d] = a[(j, i)];
        }
    }
    row
}

fn dissipator_of(l: &DMatrix<C64>) -> DMatrix<C64> {
    let d = l.nrows();
    let id = identity(d);
    let ldl = l.adjoint() * l;
    l.map(|z| z.conj()).kronecker(l) - (id.kronecker(&ldl) + ldl.transpose().kronecker(&id)) * C64::new(0.5, 0.0)
}

/// P = I + X + X²/2 + X³/6 + X⁴/24 with X = hM: one classical RK4 step of
/// the linear system y' = My.
fn rk4_matrix(m: &DMatrix<C64>, h: f64) -> DMatrix<C64> {
    let n = m.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let x = m * C64::new(h, 0.0);
    let mut t = &id + &x * C64::new(0.25, 0.0);
    t = &id + (&x * t) * C64::new(1.0 / 3.0, 0.0);
    t = &id + (&x * t) * C64::new(0.5, 0.0);
    id + x * t
}

fn matrix_power(m: &DMatrix<C64>, mut n: usize) -> DMatrix<C64> {
    let size = m.nrows();
    let mut result = DMatrix::<C64>::identity(size, size);
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

fn step_count(duration_ns: f64, step_ns: f64) -> usize {
    if duration_ns <= 0.0 {
        0
    } else {
        ((duration_ns / step_ns) - 1e-9).ceil().max(1.0) as usize
    }
}

impl Engine {
    pub fn new(config: &LindbladConfig) -> Result<Self> {
        config.validate()?;
        let nq = config.hilbert.qubit_levels();
        let nr = config.hilbert.resonator_levels();
        let dim = nq * nr;
        let b = lowering(nq).kronecker(&identity(nr));
        let a = identity(nq).kronecker(&lowering(nr));
        let qubit_level: Vec<f64> = (0..dim).map(|i| (i / nr) as f64).collect();
        let photons: Vec<f64> = (0..dim).map(|i| (i % nr) as f64).collect();
        let excitations = qubit_level.iter().zip(&photons).map(|(q, n)| q + n).collect();
        let (anharmonicity_mhz, resonator) = match config.hilbert {
            Hilbert::Qubit { anharmonicity_mhz, .. } => (anharmonicity_mhz, None),
            Hilbert::QubitResonator {
                anharmonicity_mhz,
                f_r_ghz,
                g_mhz,
                ..
            } => (anharmonicity_mhz, Some((f_r_ghz, g_mhz * 1e-3))),
        };

        let gamma1 = config.gamma1_per_ns();
        let gamma_phi = config.gamma_phi_per_ns();
        let kappa_ext = TAU * config.kappa_ext_mhz * 1e-3;
        let kappa_int = TAU * config.kappa_int_mhz * 1e-3;
        let nb = b.adjoint() * &b;
        let na = a.adjoint() * &a;
        let s = |x: f64| C64::new(x.sqrt(), 0.0);

        let mut dissipator = DMatrix::zeros(dim * dim, dim * dim);
        if gamma1 > 0.0 {
            dissipator += dissipator_of(&(&b * s(gamma1)));
        }
        if gamma_phi > 0.0 {
            dissipator += dissipator_of(&(&nb * s(2.0 * gamma_phi)));
        }
        if resonator.is_some() {
            if kappa_ext > 0.0 {
                dissipator += dissipator_of(&(&a * s(kappa_ext)));
            }
            if kappa_int > 0.0 {
                dissipator += dissipator_of(&(&a * s(kappa_int)));
            }
        }

        let emitted = &na * C64::new(kappa_ext, 0.0);
        let lost = &na * C64::new(kappa_int, 0.0) + &nb * C64::new(gamma1, 0.0);
        let mut accumulator_rows = DMatrix::zeros(ACCUMULATORS, dim * dim);
        for (k, op) in [emitted, lost].iter().enumerate() {
            for (j, v) in trace_row(op).into_iter().enumerate() {
                accumulator_rows[(k, j)] = v;
            }
        }

        Ok(Self {
            config: *config,
            dim,
            b,
            a,
            excitations,
            qubit_level,
            photons,
            anharmonicity_ghz: anharmonicity_mhz * 1e-3,
            resonator,
            dissipator,
            accumulator_rows,
        })
    }

    pub fn config(&self) -> &LindbladConfig {
        &self.config
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Hamiltonian in rad/ns in the frame rotating at `frame_ghz`.
    pub fn hamiltonian(&self, qubit_ghz: f64, frame_ghz: f64, drive: Option<(f64, f64)>) -> DMatrix<C64> {
        let d = self.dim;
        let mut h = DMatrix::<C64>::zeros(d, d);
        for i in 0..d {
            let q = self.qubit_level[i];
            let n = self.photons[i];
            let mut e = (qubit_ghz - frame_ghz) * q - 0.5 * self.anharmonicity_ghz * q * (q - 1.0);
            if let Some((f_r, _)) = self.resonator {
                e += (f_r - frame_ghz) * n;
            }
            h[(i, i)] = C64::new(e, 0.0);
        }
        if let Some((_, g)) = self.resonator {
            let exchange = self.a.adjoint() * &self.b;
            h += (&exchange + exchange.adjoint()) * C64::new(g, 0.0);
        }
        if let Some((rabi_mhz, phase)) = drive {
            let half = 0.5 * rabi_mhz * 1e-3;
            let term = &self.b * C64::from_polar(half, phase);
            h += &term + term.adjoint();
        }
        h * C64::new(TAU, 0.0)
    }

    /// Augmented generator acting on (vec ρ, emitted, lost).
    pub fn generator(&self, qubit_ghz: f64, frame_ghz: f64, drive: Option<(f64, f64)>) -> DMatrix<C64> {
        let d = self.dim;
        let big = d * d;
        let h = self.hamiltonian(qubit_ghz, frame_ghz, drive);
        let id = identity(d);
        let coherent = (id.kronecker(&h) - h.transpose().kronecker(&id)) * C64::new(0.0, -1.0);
        let mut m = DMatrix::zeros(big + ACCUMULATORS, big + ACCUMULATORS);
        m.view_mut((0, 0), (big, big)).copy_from(&(coherent + &self.dissipator));
        m.view_mut((big, 0), (ACCUMULATORS, big)).copy_from(&self.accumulator_rows);
        m
    }

    fn segment_generator(&self, seg: &PulseSegment, qubit_ghz: f64, frame_ghz: f64) -> DMatrix<C64> {
        let drive = match seg.kind {
            SegmentKind::Drive => Some((seg.rabi_mhz, seg.phase_rad)),
            SegmentKind::Delay => None,
        };
        self.generator(qubit_ghz, frame_ghz, drive)
    }

    fn frame_for(seg: &PulseSegment, current: f64) -> f64 {
        match seg.kind {
            SegmentKind::Drive => seg.drive_freq_ghz,
            SegmentKind::Delay => current,
        }
    }

    /// Whole-segment propagator for a segment with constant Hamiltonian,
    /// assembled from RK4 steps by repeated squaring.
    pub fn propagator(&self, seg: &PulseSegment, qubit_ghz: f64, frame_ghz: f64) -> Result<SegmentPropagator> {
        seg.validate()?;
        if seg.ramp {
            return Err(Error::InvalidConfig("ramped segments have no constant propagator".into()));
        }
        let qubit = seg.qubit_freq_ghz.unwrap_or(qubit_ghz);
        let frame = Self::frame_for(seg, frame_ghz);
        let n = step_count(seg.duration_ns, self.config.step_ns);
        let size = self.dim * self.dim + ACCUMULATORS;
        let matrix = if n == 0 {
            DMatrix::identity(size, size)
        } else {
            let m = self.segment_generator(seg, qubit, frame);
            matrix_power(&rk4_matrix(&m, seg.duration_ns / n as f64), n)
        };
        Ok(SegmentPropagator {
            matrix,
            duration_ns: seg.duration_ns,
            frame_ghz: frame,
            qubit_freq_ghz: qubit,
        })
    }
}

/// Propagator of one segment together with the frame it acts in.
#[derive(Debug, Clone)]
pub struct SegmentPropagator {
    matrix: DMatrix<C64>,
    pub duration_ns: f64,
    pub frame_ghz: f64,
    pub qubit_freq_ghz: f64,
}

impl SegmentPropagator {
    /// The propagator of this segment followed by `next` (same frame).
    pub fn then(&self, next: &SegmentPropagator) -> SegmentPropagator {
        SegmentPropagator {
            matrix: &next.matrix * &self.matrix,
            duration_ns: self.duration_ns + next.duration_ns,
            frame_ghz: next.frame_ghz,
            qubit_freq_ghz: next.qubit_freq_ghz,
        }
    }
}

/// A state being evolved through a sequence.
#[derive(Debug, Clone)]
pub struct Evolution<'a> {
    engine: &'a Engine,
    state: DVector<C64>,
    time_ns: f64,
    frame_ghz: f64,
    qubit_ghz: f64,
    step_error: f64,
}

impl<'a> Evolution<'a> {
    /// Starts from the joint ground state at t = 0.
    pub fn new(engine: &'a Engine) -> Self {
        let mut state = DVector::zeros(engine.dim * engine.dim + ACCUMULATORS);
        state[0] = C64::new(1.0, 0.0);
        Self {
            engine,
            state,
            time_ns: 0.0,
            frame_ghz: engine.config.qubit_freq_ghz,
            qubit_ghz: engine.config.qubit_freq_ghz,
            step_error: 0.0,
        }
    }

    pub fn time_ns(&self) -> f64 {
        self.time_ns
    }

    pub fn frame_ghz(&self) -> f64 {
        self.frame_ghz
    }

    pub fn qubit_freq_ghz(&self) -> f64 {
        self.qubit_ghz
    }

    /// Accumulated step-doubling estimate of the global integration error.
    pub fn step_error_estimate(&self) -> f64 {
        self.step_error
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        let d = self.engine.dim;
        DMatrix::from_column_slice(d, d, &self.state.as_slice()[..d * d])
    }

    fn diagonal(&self, i: usize) -> f64 {
        self.state[i * (self.engine.dim + 1)].re
    }

    fn weighted_population(&self, weights: &[f64]) -> f64 {
        weights.iter().enumerate().map(|(i, w)| w * self.diagonal(i)).sum()
    }

    /// Population outside the qubit ground state.
    pub fn excited_population(&self) -> f64 {
        (0..self.engine.dim)
            .filter(|&i| self.engine.qubit_level[i] > 0.0)
            .map(|i| self.diagonal(i))
            .sum()
    }

    pub fn photon_number(&self) -> f64 {
        self.weighted_population(&self.engine.photons)
    }

    pub fn excitation_number(&self) -> f64 {
        self.weighted_population(&self.engine.excitations)
    }

    pub fn expectation(&self, observable: Observable) -> f64 {
        match observable {
            Observable::QubitExcited => self.excited_population(),
            Observable::PhotonNumber => self.photon_number(),
        }
    }

    /// Integrated excitation flux out through the external resonator port.
    pub fn emitted(&self) -> f64 {
        self.state[self.engine.dim * self.engine.dim].re
    }

    /// Integrated excitation flux through internal resonator loss and qubit decay.
    pub fn lost(&self) -> f64 {
        self.state[self.engine.dim * self.engine.dim + 1].re
    }

    pub fn trace_deviation(&self) -> f64 {
        let t: f64 = (0..self.engine.dim).map(|i| self.diagonal(i)).sum();
        (t - 1.0).abs()
    }

    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub fn min_eigenvalue(&self) -> f64 {
        let rho = self.density_matrix();
        let herm = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn check(&self) -> Result<()> {
        if self.state.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Accuracy {
                time_ns: self.time_ns,
                reason: "state became non-finite; reduce the integrator step".into(),
            });
        }
        let dev = self.trace_deviation();
        if dev > 10.0 * self.engine.config.tolerance {
            return Err(Error::Accuracy {
                time_ns: self.time_ns,
                reason: format!("trace deviation {dev:.3e}; reduce the integrator step"),
            });
        }
        Ok(())
    }

    /// Moves the state into the frame rotating at `frame_ghz` at the current time.
    fn switch_frame(&mut self, frame_ghz: f64) {
        if frame_ghz == self.frame_ghz {
            return;
        }
        let theta = TAU * (frame_ghz - self.frame_ghz) * self.time_ns;
        let d = self.engine.dim;
        let exc = &self.engine.excitations;
        for j in 0..d {
            for i in 0..d {
                self.state[i + j * d] *= C64::from_polar(1.0, theta * (exc[i] - exc[j]));
            }
        }
        self.frame_ghz = frame_ghz;
    }

    pub fn apply(&mut self, prop: &SegmentPropagator) -> Result<()> {
        self.switch_frame(prop.frame_ghz);
        self.qubit_ghz = prop.qubit_freq_ghz;
        self.state = &prop.matrix * &self.state;
        self.time_ns += prop.duration_ns;
        self.check()
    }

    /// Integrates one segment, calling `observe` every `sample_ns` (every
    /// step when `None`) and at the end of the segment.
    pub fn run_segment<F>(&mut self, seg: &PulseSegment, sample_ns: Option<f64>, mut observe: F) -> Result<()>
    where
        F: FnMut(&Evolution<'a>),
    {
        seg.validate()?;
        let engine = self.engine;
        self.switch_frame(Engine::frame_for(seg, self.frame_ghz));
        let n = step_count(seg.duration_ns, engine.config.step_ns);
        let start_qubit = self.qubit_ghz;
        let target_qubit = seg.qubit_freq_ghz.unwrap_or(start_qubit);
        if n == 0 {
            self.qubit_ghz = target_qubit;
            return Ok(());
        }
        let h = seg.duration_ns / n as f64;
        let stride = sample_ns.map_or(1, |s| ((s / h).round() as usize).max(1));
        let t0 = self.time_ns;

        if seg.ramp {
            let at = |k: f64| {
                let f = start_qubit + (target_qubit - start_qubit) * (k / n as f64);
                engine.segment_generator(seg, f, self.frame_ghz)
            };
            let half = C64::new(0.5 * h, 0.0);
            let full = C64::new(h, 0.0);
            for k in 0..n {
                let m0 = at(k as f64);
                let mh = at(k as f64 + 0.5);
                let m1 = at(k as f64 + 1.0);
                let y = &self.state;
                let k1 = &m0 * y;
                let k2 = &mh * (y + &k1 * half);
                let k3 = &mh * (y + &k2 * half);
                let k4 = &m1 * (y + &k3 * full);
                self.state = y + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
                self.time_ns = t0 + h * (k + 1) as f64;
                self.qubit_ghz = start_qubit + (target_qubit - start_qubit) * ((k + 1) as f64 / n as f64);
                if (k + 1) % stride == 0 || k + 1 == n {
                    self.check()?;
                    observe(self);
                }
            }
            return Ok(());
        }

        self.qubit_ghz = target_qubit;
        let m = engine.segment_generator(seg, target_qubit, self.frame_ghz);
        let p = rk4_matrix(&m, h);
        if n >= 2 {
            let big = engine.dim * engine.dim;
            let fine = &p * (&p * &self.state);
            let coarse = rk4_matrix(&m, 2.0 * h) * &self.state;
            let local = (0..big).map(|i| (fine[i] - coarse[i]).norm()).fold(0.0, f64::max) / 15.0;
            self.step_error += local * n as f64 / 2.0;
        }
        let p_stride = matrix_power(&p, stride);
        let mut k = 0;
        while k < n {
            let m_steps = stride.min(n - k);
            self.state = if m_steps == stride {
                &p_stride * &self.state
            } else {
                matrix_power(&p, m_steps) * &self.state
            };
            k += m_steps;
            self.time_ns = t0 + h * k as f64;
            self.check()?;
            observe(self);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceDiagnostics {
    pub max_trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub step_error_estimate: f64,
}

/// Observable sampled along one simulated sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub times_ns: Vec<f64>,
    pub values: Vec<f64>,
    pub observable: Observable,
    pub diagnostics: TraceDiagnostics,
    pub config: LindbladConfig,
}

/// Evolves the ground state through `sequence` and samples its readout
/// observable at the configured spacing.
pub fn evolve(config: &LindbladConfig, sequence: &PulseSequence) -> Result<SimulationTrace> {
    sequence.validate()?;
    let engine = Engine::new(config)?;
    for seg in &sequence.segments {
        debug_assert!(seg.kind == SegmentKind::Delay || seg.rabi_mhz * 1e-3 < 0.1 * seg.drive_freq_ghz);
    }
    let mut ev = Evolution::new(&engine);
    let mut times = vec![0.0];
    let mut values = vec![ev.expectation(sequence.readout)];
    let mut diag = TraceDiagnostics {
        max_trace_deviation: ev.trace_deviation(),
        min_eigenvalue: ev.min_eigenvalue(),
        step_error_estimate: 0.0,
    };
    for seg in &sequence.segments {
        ev.run_segment(seg, config.sample_ns, |e| {
            times.push(e.time_ns());
            values.push(e.expectation(sequence.readout));
            diag.max_trace_deviation = diag.max_trace_deviation.max(e.trace_deviation());
            diag.min_eigenvalue = diag.min_eigenvalue.min(e.min_eigenvalue());
        })?;
    }
    diag.step_error_estimate = ev.step_error_estimate();
    if diag.step_error_estimate > config.tolerance {
        log::warn!(
            "step {} ns is too coarse: estimated error {:.2e} exceeds tolerance {:.0e}",
            config.step_ns,
            diag.step_error_estimate,
            config.tolerance
        );
    }
    Ok(SimulationTrace {
        times_ns: times,
        values,
        observable: sequence.readout,
        diagnostics: diag,
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed(freq: f64) -> LindbladConfig {
        LindbladConfig::qubit(freq, f64::INFINITY, f64::INFINITY)
    }

    #[test]
    fn resonant_pi_pulse_inverts() {
        let seq = PulseSequence::new(vec![PulseSegment::drive(8.5, 6.17, 0.0, 1e3 / (2.0 * 6.17))], Observable::QubitExcited);
        let tr = evolve(&closed(8.5), &seq).unwrap();
        assert!((tr.values.last().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_duration_leaves_ground_state() {
        let seq = PulseSequence::new(vec![PulseSegment::drive(8.5, 6.17, 0.0, 0.0)], Observable::QubitExcited);
        let tr = evolve(&closed(8.5), &seq).unwrap();
        assert_eq!(tr.values, vec![0.0]);
    }

    #[test]
    fn detuned_rabi_matches_closed_form() {
        let (omega, delta): (f64, f64) = (6.17e-3, 8e-3);
        let seq = PulseSequence::new(vec![PulseSegment::drive(8.508, 6.17, 0.0, 500.0)], Observable::QubitExcited);
        let tr = evolve(&closed(8.5), &seq).unwrap();
        let w = (omega * omega + delta * delta).sqrt();
        let amp = omega * omega / (w * w);
        let worst = tr
            .times_ns
            .iter()
            .zip(&tr.values)
            .map(|(t, p)| (p - amp * (std::f64::consts::PI * w * t).sin().powi(2)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
        let peak = tr.values.iter().copied().fold(0.0, f64::max);
        assert!((peak - 0.373).abs() < 1e-3, "{peak}");
    }

    #[test]
    fn free_decay_is_exponential() {
        let mut c = LindbladConfig::qubit(8.5, 4.72, 6.69);
        c.step_ns = 1.0;
        let tau_pi = 1e3 / (2.0 * 6.17);
        let engine = Engine::new(&c).unwrap();
        let mut ev = Evolution::new(&engine);
        ev.run_segment(&PulseSegment::drive(8.5, 6.17, 0.0, tau_pi), None, |_| {}).unwrap();
        let p0 = ev.excited_population();
        let lost0 = ev.lost();
        ev.run_segment(&PulseSegment::delay(4720.0), None, |_| {}).unwrap();
        let ratio = ev.excited_population() / p0;
        assert!((ratio - (-1.0f64).exp()).abs() < 1e-9, "{ratio}");
        // Every decay event during the delay is booked as lost.
        assert!((ev.lost() - lost0 + ev.excited_population() - p0).abs() < 1e-9);
    }

    #[test]
    fn frame_phase_survives_interleaved_delay() {
        // Two π/2 pulses separated by a delay, detuned drive: fringe
        // cos(2πΔτ) independent of how the delay is chopped up.
        let c = closed(8.5);
        let half = 1e3 / (4.0 * 6.17);
        let drive = PulseSegment::drive(8.501, 6.17, 0.0, half);
        let one = PulseSequence::new(vec![drive, PulseSegment::delay(300.0), drive], Observable::QubitExcited);
        let split = PulseSequence::new(
            vec![drive, PulseSegment::delay(120.0), PulseSegment::delay(180.0), drive],
            Observable::QubitExcited,
        );
        let a = *evolve(&c, &one).unwrap().values.last().unwrap();
        let b = *evolve(&c, &split).unwrap().values.last().unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn vacuum_rabi_swap() {
        let c = LindbladConfig {
            hilbert: Hilbert::QubitResonator {
                qubit_levels: 2,
                anharmonicity_mhz: 0.0,
                n_max: 2,
                f_r_ghz: 7.5,
                g_mhz: 54.3,
            },
            step_ns: 0.02,
            ..closed(7.5)
        };
        let engine = Engine::new(&c).unwrap();
        let mut ev = Evolution::new(&engine);
        // Prepare |e,0⟩ with a fast resonant π-pulse far from the resonator.
        let prep = PulseSegment::drive(9.5, 200.0, 0.0, 2.5).with_qubit_freq(9.5);
        ev.run_segment(&prep, None, |_| {}).unwrap();
        assert!(ev.excited_population() > 0.99);
        let swap = 1e3 / (4.0 * 54.3);
        ev.run_segment(&PulseSegment::delay(swap).with_qubit_freq(7.5), None, |_| {}).unwrap();
        assert!(ev.photon_number() > 0.98, "{}", ev.photon_number());
        assert!((ev.excitation_number() - 1.0).abs() < 0.01);
    }

    #[test]
    fn propagator_agrees_with_stepping() {
        let c = LindbladConfig::qubit(8.5, 4.72, 6.69);
        let engine = Engine::new(&c).unwrap();
        let seg = PulseSegment::drive(8.502, 6.17, 0.3, 137.0);
        let mut a = Evolution::new(&engine);
        a.run_segment(&seg, None, |_| {}).unwrap();
        let mut b = Evolution::new(&engine);
        b.apply(&engine.propagator(&seg, 8.5, 8.5).unwrap()).unwrap();
        assert!((a.density_matrix() - b.density_matrix()).norm() < 1e-12);
    }
}
