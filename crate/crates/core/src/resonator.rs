// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Coplanar-waveguide quarter-wave resonator design.
//!
//! Line parameters (c_r, l_r, β) are inputs; nothing here solves the
//! electromagnetic problem for the W/S cross-section.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{self, PLANCK_J_S, RESISTANCE_QUANTUM_OHM};

/// Cross-section of a coplanar waveguide and its per-length line constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpwGeometry {
    /// Centre conductor width W in μm.
    pub centre_width_um: f64,
    /// Centre-to-ground spacing S in μm.
    pub gap_um: f64,
    /// Capacitance per unit length in pF/m.
    pub c_per_len_pf_m: f64,
    /// Inductance per unit length in nH/m.
    pub l_per_len_nh_m: f64,
    /// Phase constant in rad/m per GHz.
    pub beta_rad_m_ghz: f64,
    /// Characteristic impedance in Ω.
    pub z0_ohm: f64,
}

/// Relative mismatch between the stored line constants and the values
/// implied by c_r and l_r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConsistency {
    pub impedance: f64,
    pub phase_constant: f64,
}

impl CpwGeometry {
    /// 20/10 μm line on sapphire: c_r = 153 pF/m, l_r = 402 nH/m, β = 53.3.
    ///
    /// Z0 is stored as √(l_r/c_r) (51.3 Ω) rather than the nominal 50 Ω.
    pub fn sapphire_20_10() -> Self {
        let c = 153.0;
        let l = 402.0;
        Self {
            centre_width_um: 20.0,
            gap_um: 10.0,
            c_per_len_pf_m: c,
            l_per_len_nh_m: l,
            beta_rad_m_ghz: 53.3,
            z0_ohm: (l * 1e-9 / (c * 1e-12)).sqrt(),
        }
    }

    pub fn consistency(&self) -> GeometryConsistency {
        let c = self.c_per_len_pf_m * 1e-12;
        let l = self.l_per_len_nh_m * 1e-9;
        let z0 = (l / c).sqrt();
        let beta = 2.0 * PI * (l * c).sqrt() * 1e9;
        GeometryConsistency {
            impedance: ((z0 - self.z0_ohm) / self.z0_ohm).abs(),
            phase_constant: ((beta - self.beta_rad_m_ghz) / self.beta_rad_m_ghz).abs(),
        }
    }

    /// Checks positivity and that Z0 and β agree with c_r, l_r within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let fields = [
            self.centre_width_um,
            self.gap_um,
            self.c_per_len_pf_m,
            self.l_per_len_nh_m,
            self.beta_rad_m_ghz,
            self.z0_ohm,
        ];
        if fields.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidConfig(
                "CPW geometry fields must be finite and positive".into(),
            ));
        }
        let c = self.consistency();
        if c.impedance > tol || c.phase_constant > tol {
            return Err(Error::InvalidConfig(format!(
                "line constants inconsistent: Z0 off by {:.2}%, β off by {:.2}%",
                100.0 * c.impedance,
                100.0 * c.phase_constant
            )));
        }
        Ok(())
    }
}

/// A designed quarter-wave resonator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorDesign {
    pub f0_bare_ghz: f64,
    pub length_um: f64,
    pub qc: f64,
    pub qi: f64,
    pub kappa_over_2pi_mhz: f64,
}

/// Internal quality factor used when none is given.
pub const DEFAULT_QI: f64 = 38_600.0;

impl ResonatorDesign {
    pub fn new(f0_ghz: f64, geom: &CpwGeometry, qc: f64, qi: f64) -> Result<Self> {
        if !(qi > 0.0) {
            return Err(Error::domain("ResonatorDesign::new", "Qi must be positive"));
        }
        Ok(Self {
            f0_bare_ghz: f0_ghz,
            length_um: quarter_wave_length(f0_ghz, geom)?,
            qc,
            qi,
            kappa_over_2pi_mhz: linewidth(f0_ghz, qc)?,
        })
    }

    /// Loaded quality factor, 1/Q = 1/Qc + 1/Qi.
    pub fn q_loaded(&self) -> f64 {
        1.0 / (1.0 / self.qc + 1.0 / self.qi)
    }
}

/// Physical length in μm of a λ/4 line resonant at `f0_ghz`.
pub fn quarter_wave_length(f0_ghz: f64, geom: &CpwGeometry) -> Result<f64> {
    if !(f0_ghz > 0.0 && f0_ghz.is_finite()) {
        return Err(Error::domain(
            "quarter_wave_length",
            format!("frequency must be positive, got {f0_ghz}"),
        ));
    }
    Ok(0.5 * PI / (geom.beta_rad_m_ghz * f0_ghz) * 1e6)
}

/// Coupling quality factor from the coupler transmission |S21(f0)|² in dB,
/// Qc = π / (2|S21|²).
pub fn qc_from_coupler_s21(s21_db: f64) -> Result<f64> {
    if !(s21_db < 0.0) || !s21_db.is_finite() {
        return Err(Error::domain(
            "qc_from_coupler_s21",
            format!("coupler transmission must be attenuating, got {s21_db} dB"),
        ));
    }
    Ok(PI / (2.0 * 10f64.powf(s21_db / 10.0)))
}

/// Linewidth κ/2π in MHz.
pub fn linewidth(f0_ghz: f64, qc: f64) -> Result<f64> {
    if !(f0_ghz > 0.0 && qc > 0.0) || !f0_ghz.is_finite() || !qc.is_finite() {
        return Err(Error::domain(
            "linewidth",
            format!("need f0 > 0 and Q > 0, got f0 = {f0_ghz}, Q = {qc}"),
        ));
    }
    Ok(1000.0 * f0_ghz / qc)
}

/// How the vacuum-fluctuation voltage of the λ/4 line is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VacuumMode {
    /// ν⁰ = √(ν_r / (2 R_Q L c_r)) with L the physical line length.
    Literal,
    /// V⁰ = k·√(h f0 / (c_r L)), the lumped-mode form with C = c_r L / 2,
    /// scaled by a fixed k so that the 7 GHz / 4220 μm / 153 pF/m line gives
    /// 2.58 μV.
    #[default]
    Calibrated,
}

/// Reference line used to pin the calibrated mode.
pub const VACUUM_REFERENCE_F0_GHZ: f64 = 7.0;
pub const VACUUM_REFERENCE_LENGTH_UM: f64 = 4220.0;
pub const VACUUM_REFERENCE_C_PF_M: f64 = 153.0;
pub const VACUUM_REFERENCE_V0_UV: f64 = 2.58;

fn lumped_v0_uv(f0_ghz: f64, c_per_len_pf_m: f64, length_um: f64) -> f64 {
    let capacitance = c_per_len_pf_m * 1e-12 * length_um * 1e-6;
    (PLANCK_J_S * f0_ghz * 1e9 / capacitance).sqrt() * 1e6
}

/// Scale factor k of [`VacuumMode::Calibrated`].
pub fn vacuum_calibration_factor() -> f64 {
    VACUUM_REFERENCE_V0_UV
        / lumped_v0_uv(
            VACUUM_REFERENCE_F0_GHZ,
            VACUUM_REFERENCE_C_PF_M,
            VACUUM_REFERENCE_LENGTH_UM,
        )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumFluctuations {
    pub v0_rms_uv: f64,
    pub nu0_rms_mhz: f64,
    pub mode: VacuumMode,
}

/// Vacuum RMS voltage of the resonator at its open end, and hν⁰ = eV⁰.
pub fn vacuum_fluctuations(
    f0_ghz: f64,
    geom: &CpwGeometry,
    length_um: f64,
    mode: VacuumMode,
) -> Result<VacuumFluctuations> {
    let inputs = [f0_ghz, geom.c_per_len_pf_m, length_um];
    if inputs.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::domain(
            "vacuum_fluctuations",
            "frequency, c_r and length must be positive",
        ));
    }
    let (v0_uv, nu0_ghz) = match mode {
        VacuumMode::Literal => {
            let denom = 2.0
                * RESISTANCE_QUANTUM_OHM
                * length_um
                * 1e-6
                * geom.c_per_len_pf_m
                * 1e-12;
            let nu0_hz = (f0_ghz * 1e9 / denom).sqrt();
            let nu0_ghz = nu0_hz * 1e-9;
            (units::freq_ghz_to_voltage_uv(nu0_ghz), nu0_ghz)
        }
        VacuumMode::Calibrated => {
            let v0 = vacuum_calibration_factor()
                * lumped_v0_uv(f0_ghz, geom.c_per_len_pf_m, length_um);
            (v0, units::voltage_uv_to_freq_ghz(v0))
        }
    };
    Ok(VacuumFluctuations {
        v0_rms_uv: v0_uv,
        nu0_rms_mhz: nu0_ghz * 1e3,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn quarter_wave_at_seven_gigahertz() {
        let g = CpwGeometry::sapphire_20_10();
        let l = quarter_wave_length(7.0, &g).unwrap();
        assert!((l - 4210.0).abs() < 1.0, "{l}");
        assert!(rel(l, 4220.0) < 5e-3);
        let l14 = quarter_wave_length(14.0, &g).unwrap();
        assert!(rel(l14, l / 2.0) < 1e-14);
        // 7.7 GHz: direct evaluation and cross-check by frequency scaling.
        let l77 = quarter_wave_length(7.7, &g).unwrap();
        assert!((l77 - 3827.0).abs() < 0.5, "{l77}");
        assert!(rel(l77, l * 7.0 / 7.7) < 1e-12);
    }

    #[test]
    fn non_positive_frequency_rejected() {
        let g = CpwGeometry::sapphire_20_10();
        assert!(quarter_wave_length(0.0, &g).is_err());
        assert!(quarter_wave_length(-1.0, &g).is_err());
        assert!(linewidth(0.0, 5000.0).is_err());
        assert!(linewidth(7.0, 0.0).is_err());
    }

    #[test]
    fn coupler_transmission_sets_qc() {
        assert!((qc_from_coupler_s21(-35.0).unwrap() - 4967.0).abs() < 1.0);
        assert!((qc_from_coupler_s21(-30.0).unwrap() - 1570.796).abs() < 1e-3);
        let a = qc_from_coupler_s21(-27.0).unwrap();
        let b = qc_from_coupler_s21(-37.0).unwrap();
        assert!(rel(b, 10.0 * a) < 1e-12);
        assert!(qc_from_coupler_s21(0.0).is_err());
        assert!(qc_from_coupler_s21(3.0).is_err());
    }

    #[test]
    fn linewidth_examples() {
        assert!((linewidth(7.0, 5000.0).unwrap() - 1.4).abs() < 1e-12);
        assert!((linewidth(7.52, 5500.0).unwrap() - 1.367).abs() < 1e-3);
        assert!((linewidth(7.3, 7300.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn literal_vacuum_voltage_differs_from_quoted() {
        let g = CpwGeometry::sapphire_20_10();
        let v = vacuum_fluctuations(7.0, &g, 4220.0, VacuumMode::Literal).unwrap();
        assert!((v.nu0_rms_mhz - 916.0).abs() < 1.0, "{}", v.nu0_rms_mhz);
    }

    #[test]
    fn calibrated_vacuum_voltage_reproduces_reference() {
        let g = CpwGeometry::sapphire_20_10();
        let v = vacuum_fluctuations(7.0, &g, 4220.0, VacuumMode::Calibrated).unwrap();
        assert!((v.v0_rms_uv - 2.58).abs() < 1e-12);
        assert!((v.nu0_rms_mhz - 623.0).abs() < 1.5, "{}", v.nu0_rms_mhz);
    }

    #[test]
    fn vacuum_frequency_scales_as_root_frequency() {
        let g = CpwGeometry::sapphire_20_10();
        for mode in [VacuumMode::Literal, VacuumMode::Calibrated] {
            let a = vacuum_fluctuations(2.0, &g, 4000.0, mode).unwrap();
            let b = vacuum_fluctuations(8.0, &g, 4000.0, mode).unwrap();
            assert!(rel(b.nu0_rms_mhz, 2.0 * a.nu0_rms_mhz) < 1e-12);
        }
    }

    #[test]
    fn quoted_line_constants_are_not_self_consistent() {
        let g = CpwGeometry::sapphire_20_10();
        let c = g.consistency();
        assert!(c.impedance < 1e-12);
        // β quoted is ~8% above 2π√(l c); reported, so validation at 2% fails.
        assert!(c.phase_constant > 0.07 && c.phase_constant < 0.09);
        assert!(g.validate(0.02).is_err());
        assert!(g.validate(0.10).is_ok());
    }

    #[test]
    fn design_bundle_is_consistent() {
        let g = CpwGeometry::sapphire_20_10();
        let d = ResonatorDesign::new(7.0, &g, 5000.0, DEFAULT_QI).unwrap();
        assert!((d.kappa_over_2pi_mhz - 1000.0 * d.f0_bare_ghz / d.qc).abs() < 1e-12);
        assert!(d.q_loaded() < d.qc);
    }

    proptest::proptest! {
        #[test]
        fn qc_decreases_with_coupler_transmission(a in -80.0f64..-0.01, b in -80.0f64..-0.01) {
            proptest::prop_assume!(a < b);
            proptest::prop_assert!(qc_from_coupler_s21(a).unwrap() > qc_from_coupler_s21(b).unwrap());
        }

        #[test]
        fn length_times_frequency_is_constant(f in 0.1f64..100.0) {
            let g = CpwGeometry::sapphire_20_10();
            let lf = quarter_wave_length(f, &g).unwrap() * f;
            let l7 = quarter_wave_length(7.0, &g).unwrap() * 7.0;
            proptest::prop_assert!(rel(lf, l7) < 1e-12);
        }

        #[test]
        fn outputs_finite(f in 1e-3f64..1e3, q in 1.0f64..1e8, len in 1.0f64..1e5) {
            let g = CpwGeometry::sapphire_20_10();
            proptest::prop_assert!(quarter_wave_length(f, &g).unwrap().is_finite());
            proptest::prop_assert!(linewidth(f, q).unwrap().is_finite());
            for mode in [VacuumMode::Literal, VacuumMode::Calibrated] {
                let v = vacuum_fluctuations(f, &g, len, mode).unwrap();
                proptest::prop_assert!(v.v0_rms_uv.is_finite() && v.nu0_rms_mhz.is_finite());
            }
        }
    }
}
