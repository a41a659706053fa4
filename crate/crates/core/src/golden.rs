// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Regression checks against the published device numbers.
//!
//! Inputs are the published values themselves, so the checks do not depend
//! on profile overrides, except `profile_defaults` which verifies the
//! resolved profile still describes the measured device.

use std::fmt::Write as _;

use crate::coupling::{dispersive_shift, dressed_levels, ej_from_spectroscopy, nu_c_from_chi, purcell_t1};
use crate::dynamics::{
    echo_experiment, evolve, pi_time_ns, rabi_chevron, ramsey_experiment, t1_experiment, LindbladConfig, Observable,
    PulseSegment, PulseSequence,
};
use crate::error::Result;
use crate::io::Profile;
use crate::photon::{
    epsilon_after_pi, eta_dynamic, qc_optimal, simulate_dynamic_protocol, PhotonSourceParams, PhotonSourceReport,
    ProtocolParams, QcConvention,
};
use crate::resonator::{
    linewidth, qc_from_coupler_s21, quarter_wave_length, vacuum_fluctuations, CpwGeometry, VacuumMode,
};
use crate::s21::{add_noise, dispersive_pull, fit_notch, notch_model, sweep_grid, QubitState};
use crate::transmon::{uniform_grid, TransmonDesign};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tolerance {
    Absolute,
    Relative,
    /// Passes when value ≥ expected.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub kind: Tolerance,
    pub passed: bool,
}

fn check(name: &'static str, value: f64, expected: f64, tolerance: f64, kind: Tolerance) -> Check {
    let passed = value.is_finite()
        && match kind {
            Tolerance::Absolute => (value - expected).abs() <= tolerance,
            Tolerance::Relative => ((value - expected) / expected).abs() <= tolerance,
            Tolerance::AtLeast => value >= expected,
        };
    Check {
        name,
        value,
        expected,
        tolerance,
        kind,
        passed,
    }
}

fn abs(name: &'static str, value: f64, expected: f64, tol: f64) -> Check {
    check(name, value, expected, tol, Tolerance::Absolute)
}

fn rel(name: &'static str, value: f64, expected: f64, tol: f64) -> Check {
    check(name, value, expected, tol, Tolerance::Relative)
}

fn failed(name: &'static str, expected: f64) -> Check {
    check(name, f64::NAN, expected, 0.0, Tolerance::Absolute)
}

/// Runs `f`; a library error becomes one failed check named `name`.
fn guarded(out: &mut Vec<Check>, name: &'static str, expected: f64, f: impl FnOnce(&mut Vec<Check>) -> Result<()>) {
    let mut local = Vec::new();
    match f(&mut local) {
        Ok(()) => out.extend(local),
        Err(e) => {
            log::error!("{name}: {e}");
            out.push(failed(name, expected));
        }
    }
}

pub fn run_checks(profile: &Profile) -> Vec<Check> {
    let mut out = Vec::new();
    conversions(&mut out);
    design(&mut out);
    spectroscopy(&mut out);
    dynamics(&mut out);
    s21(&mut out);
    photon(&mut out);
    profile_defaults(&mut out, profile);
    out
}

fn conversions(out: &mut Vec<Check>) {
    out.push(rel("nu_c_from_e_c_2.23ueV_ghz", units::energy_uev_to_freq_ghz(2.23), 0.540, 0.01));
    out.push(rel("nu_gap_from_200ueV_ghz", units::energy_uev_to_freq_ghz(200.0), 48.3, 0.01));
    guarded(out, "resonator", 0.0, |o| {
        let geom = CpwGeometry::sapphire_20_10();
        o.push(rel("quarter_wave_length_7ghz_um", quarter_wave_length(7.0, &geom)?, 4220.0, 0.005));
        o.push(rel("qc_from_minus35db", qc_from_coupler_s21(-35.0)?, 5000.0, 0.01));
        o.push(abs("kappa_7ghz_qc5000_mhz", linewidth(7.0, 5000.0)?, 1.40, 1e-12));
        o.push(rel("kappa_measured_mhz", linewidth(7.52, 5500.0)?, 1.4, 0.03));
        let v = vacuum_fluctuations(7.0, &geom, 4220.0, VacuumMode::Calibrated)?;
        o.push(rel("vacuum_v0_uv", v.v0_rms_uv, 2.58, 0.005));
        o.push(rel("vacuum_nu0_mhz", v.nu0_rms_mhz, 623.0, 0.005));
        Ok(())
    });
}

fn design(out: &mut Vec<Check>) {
    guarded(out, "design", 0.0, |o| {
        let d = TransmonDesign::from_targets(35.0, 8.5, 48.3, 1.5, 0.623, 0.00493)?;
        o.push(rel("design_r_n_kohm", d.r_n_kohm, 8.24, 0.01));
        o.push(rel("design_c_sigma_ff", d.c_sigma_ff, 35.8, 0.01));
        o.push(rel("design_e_c_uev", d.e_c_uev, 2.23, 0.01));
        o.push(rel("design_nu_c_mhz", d.nu_c_ghz * 1e3, 540.0, 0.01));
        o.push(rel("design_c_g_ff", d.c_g_ff, 3.2, 0.02));
        o.push(rel("design_c_g_over_c_sigma", d.c_g_ff / d.c_sigma_ff, 0.090, 0.03));
        let levels = d.transmon().levels(0.0, 30, 2)?;
        o.push(rel("design_nu01_ghz", levels[1], 8.5, 0.02));
        Ok(())
    });
}

fn spectroscopy(out: &mut Vec<Check>) {
    guarded(out, "spectroscopy", 0.0, |o| {
        let nu_c = nu_c_from_chi(3.9, 0.990, 54.3)?;
        o.push(abs("nu_c_from_chi_ghz", nu_c, 0.561, 0.001));
        let (e_j, nu_j) = ej_from_spectroscopy(8.501, nu_c)?;
        o.push(abs("nu_j_ghz", nu_j, 18.30, 0.05));
        o.push(abs("e_j_max_uev", e_j, 76.0, 1.0));
        o.push(abs("chi_forward_mhz", dispersive_shift(54.3, 0.990, 0.561)?.chi_over_2pi_mhz, 3.9, 0.02));
        let (lo, hi) = dressed_levels(54.3, 7.5, 7.5);
        o.push(abs("vacuum_rabi_splitting_mhz", (hi - lo) * 1e3, 108.6, 1e-9));
        Ok(())
    });
}

fn dynamics(out: &mut Vec<Check>) {
    out.push(abs("pi_time_ns", pi_time_ns(6.17), 81.0, 1.0));
    guarded(out, "pi_pulse", 1.0, |o| {
        let c = LindbladConfig::qubit(8.5, f64::INFINITY, f64::INFINITY);
        let seq = PulseSequence::new(vec![PulseSegment::drive(8.5, 6.17, 0.0, pi_time_ns(6.17))], Observable::QubitExcited);
        let trace = evolve(&c, &seq)?;
        o.push(abs("pi_pulse_excited", *trace.values.last().unwrap_or(&f64::NAN), 1.0, 1e-3));
        Ok(())
    });
    guarded(out, "chevron_min_frequency_mhz", 6.17, |o| {
        let c = LindbladConfig::qubit(8.512, 4.72, 6.38);
        let m = rabi_chevron(&c, 6.17, (8.502, 8.520), (0.0, 1000.0), (19, 501))?;
        let min = m.dominant_mhz.iter().cloned().fold(f64::INFINITY, f64::min);
        o.push(rel("chevron_min_frequency_mhz", min, 6.17, 0.02));
        Ok(())
    });
    let taus = uniform_grid(0.0, 20_000.0, 1001);
    guarded(out, "t1_fit_us", 4.72, |o| {
        let c = LindbladConfig::qubit(8.501, 4.72, 6.38);
        let r = t1_experiment(&c, 6.17, &taus)?;
        o.push(rel("t1_fit_us", r.fit.tau, 4.72, 0.01));
        o.push(rel("t1_excited_after_pi", r.excited[0], 0.983, 0.015));
        Ok(())
    });
    guarded(out, "ramsey", 6.38, |o| {
        let mut c = LindbladConfig::qubit(8.501, 4.72, 6.38);
        c.parity_split_mhz = 0.554;
        c.detuning_mhz = 2.0;
        let r = ramsey_experiment(&c, 6.17, &taus)?;
        let sep = match r.peaks.as_slice() {
            [a, b, ..] => b.frequency - a.frequency,
            _ => f64::NAN,
        };
        o.push(rel("ramsey_peak_separation_mhz", sep, 0.554, 0.02));
        o.push(rel("ramsey_t2_us", r.t2_us, 6.38, 0.02));
        Ok(())
    });
    guarded(out, "echo_t2_us", 6.69, |o| {
        let mut c = LindbladConfig::qubit(8.501, 4.72, 6.69);
        c.parity_split_mhz = 0.554;
        let r = echo_experiment(&c, 6.17, &taus)?;
        o.push(rel("echo_t2_us", r.fit.tau, 6.69, 0.02));
        Ok(())
    });
    guarded(out, "purcell_t1_at_8.5ghz_us", 4.72, |o| {
        let p = purcell_t1(linewidth(7.5, 5500.0)?, 54.3, 1.0, 4.72)?;
        o.push(rel("purcell_t1_at_8.5ghz_us", p.t1_total_us, 4.72, 0.15));
        Ok(())
    });
}

fn s21(out: &mut Vec<Check>) {
    guarded(out, "s21", 0.0, |o| {
        let (f0, qi, qc) = (7.52, 38600.0, 5500.0);
        let freqs = sweep_grid(f0, 1.0 / (1.0 / qi + 1.0 / qc), 10.0, 2001);
        let clean = notch_model(f0, qi, qc, 0.0, &freqs)?;
        let noisy = add_noise(&clean, 0.01, 1)?;
        let fit = fit_notch(&noisy, None)?;
        o.push(rel("s21_noisy_qi", fit.qi, qi, 0.05));
        o.push(rel("s21_noisy_qc", fit.qc, qc, 0.05));
        o.push(abs("dispersive_pull_ground_ghz", dispersive_pull(7.52, 3.9, QubitState::Ground), 7.5161, 1e-9));
        Ok(())
    });
}

fn photon(out: &mut Vec<Check>) {
    guarded(out, "photon", 0.0, |o| {
        o.push(abs("epsilon_after_pi", epsilon_after_pi(80.0, 4.72)?, 0.983, 0.001));
        let r = PhotonSourceReport::compute(&PhotonSourceParams::default())?;
        o.push(abs("eta_static", r.eta_static, 0.009, 0.001));
        o.push(abs("eta_static_purcell_reference", r.eta_static_purcell_reference, 0.018, 0.0));
        o.push(abs("eta_dynamic", r.eta_dynamic, 0.85, 0.005));
        o.push(check(
            "eta_dynamic_improved",
            eta_dynamic(2e6, 3500.0, 80.0, 58.0, 70.0)?,
            0.995,
            0.0,
            Tolerance::AtLeast,
        ));
        o.push(rel("qc_optimal_improved", qc_optimal(7.5, 70.0, 54.3, 1.5, QcConvention::Cyclic)?, 4300.0, 0.02));
        Ok(())
    });
    guarded(out, "protocol_emission", 0.85, |o| {
        let r = simulate_dynamic_protocol(&ProtocolParams {
            sample_ns: 1000.0,
            ..ProtocolParams::default()
        })?;
        o.push(abs("protocol_emission", r.emission_probability, 0.85, 0.03));
        Ok(())
    });
}

fn profile_defaults(out: &mut Vec<Check>, p: &Profile) {
    let expected = [
        ("g_mhz", 54.3),
        ("t1_us", 4.72),
        ("qi", 38600.0),
        ("qc", 5500.0),
        ("t2_ramsey_us", 6.38),
        ("t2_echo_us", 6.69),
        ("chi_mhz", 3.9),
        ("delta0", 0.990),
    ];
    let mismatches = expected.iter().filter(|(k, v)| p.f64(k) != *v).count();
    out.push(abs("profile_defaults_mismatches", mismatches as f64, 0.0, 0.0));
}

pub fn format_table(checks: &[Check]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<34} {:>14} {:>12} {:>12}  status", "check", "value", "expected", "tolerance");
    for c in checks {
        let tol = match c.kind {
            Tolerance::Absolute if c.tolerance > 0.0 && c.tolerance < 1e-3 => format!("±{:e}", c.tolerance),
            Tolerance::Absolute => format!("±{}", c.tolerance),
            Tolerance::Relative => format!("±{}%", c.tolerance * 100.0),
            Tolerance::AtLeast => "≥".to_string(),
        };
        let _ = writeln!(
            s,
            "{:<34} {:>14.6} {:>12} {:>12}  {}",
            c.name,
            c.value,
            c.expected,
            tol,
            if c.passed { "PASS" } else { "FAIL" }
        );
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(s, "{passed}/{} checks passed", checks.len());
    s
}

