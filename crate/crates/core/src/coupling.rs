// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Qubit–resonator coupling: flux tuning, dressed levels, dispersive shift,
//! spectroscopic inversion for E_C and E_J, and Purcell decay.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transmon::nu01_asymptotic;
use crate::units;

/// Josephson energy of a symmetric SQUID at reduced flux Φ/Φ0.
pub fn ej_at_flux(ej_max: f64, flux: f64) -> f64 {
    ej_max * (PI * flux).cos().abs()
}

/// χ/2π together with how close the evaluation sits to a pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveShift {
    pub chi_over_2pi_mhz: f64,
    /// Distance in MHz from Δ₀ to the nearest pole (0 or ν_C).
    pub pole_distance_mhz: f64,
    /// False when the pole distance is below 10·max(κ, |χ|).
    pub approximation_valid: bool,
}

/// χ/2π = (g/2π)² ν_C / (Δ₀(Δ₀ − ν_C)), in MHz.
pub fn dispersive_shift(g_mhz: f64, delta0_ghz: f64, nu_c_ghz: f64) -> Result<DispersiveShift> {
    dispersive_shift_with_linewidth(g_mhz, delta0_ghz, nu_c_ghz, 0.0)
}

/// Same as [`dispersive_shift`], with the pole guard widened by the
/// resonator linewidth κ/2π (MHz).
pub fn dispersive_shift_with_linewidth(
    g_mhz: f64,
    delta0_ghz: f64,
    nu_c_ghz: f64,
    kappa_mhz: f64,
) -> Result<DispersiveShift> {
    const OP: &str = "dispersive_shift";
    if delta0_ghz == 0.0 || delta0_ghz == nu_c_ghz {
        return Err(Error::singular(
            OP,
            format!("Δ₀ = {delta0_ghz} GHz sits on a pole (0 or ν_C = {nu_c_ghz})"),
        ));
    }
    let g = g_mhz * 1e-3;
    let chi_mhz = g * g * nu_c_ghz / (delta0_ghz * (delta0_ghz - nu_c_ghz)) * 1e3;
    if !chi_mhz.is_finite() {
        return Err(Error::singular(OP, "non-finite dispersive shift"));
    }
    let pole_distance_mhz = delta0_ghz.abs().min((delta0_ghz - nu_c_ghz).abs()) * 1e3;
    let guard = 10.0 * kappa_mhz.abs().max(chi_mhz.abs());
    Ok(DispersiveShift {
        chi_over_2pi_mhz: chi_mhz,
        pole_distance_mhz,
        approximation_valid: pole_distance_mhz > guard,
    })
}

/// ν_C = χΔ₀² / ((g/2π)² + χΔ₀) with every quantity a cyclic frequency.
/// Inputs χ/2π and g/2π in MHz, Δ₀ in GHz; result in GHz.
pub fn nu_c_from_chi(chi_mhz: f64, delta0_ghz: f64, g_mhz: f64) -> Result<f64> {
    const OP: &str = "nu_c_from_chi";
    let chi = chi_mhz * 1e-3;
    let g = g_mhz * 1e-3;
    let denom = g * g + chi * delta0_ghz;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::domain(OP, "g² + χΔ₀ vanishes"));
    }
    let nu_c = chi * delta0_ghz * delta0_ghz / denom;
    if !(nu_c >= 0.0) || !nu_c.is_finite() {
        return Err(Error::domain(
            OP,
            format!("inversion gives non-physical ν_C = {nu_c} GHz"),
        ));
    }
    Ok(nu_c)
}

/// Josephson energy from the measured maximum ν01 and ν_C, inverting
/// hν01 = √(8E_J E_C) − E_C: ν_J = (ν01 + ν_C)² / (8ν_C).
///
/// Returns (E_J in μeV, ν_J in GHz).
pub fn ej_from_spectroscopy(nu01_ghz: f64, nu_c_ghz: f64) -> Result<(f64, f64)> {
    if !(nu01_ghz > 0.0 && nu_c_ghz > 0.0) {
        return Err(Error::domain(
            "ej_from_spectroscopy",
            "ν01 and ν_C must be positive",
        ));
    }
    let s = nu01_ghz + nu_c_ghz;
    let nu_j = s * s / (8.0 * nu_c_ghz);
    Ok((units::freq_ghz_to_energy_uev(nu_j), nu_j))
}

/// Eigenfrequencies of the one-excitation Jaynes–Cummings block, (lower, upper).
pub fn dressed_levels(g_mhz: f64, nu01_ghz: f64, f_r_ghz: f64) -> (f64, f64) {
    let g = g_mhz * 1e-3;
    let mean = 0.5 * (nu01_ghz + f_r_ghz);
    let delta = nu01_ghz - f_r_ghz;
    let half = 0.5 * (delta * delta + 4.0 * g * g).sqrt();
    (mean - half, mean + half)
}

/// A flux-tunable transmon (symmetric SQUID).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxTunableTransmon {
    pub nu_j_max_ghz: f64,
    pub nu_c_ghz: f64,
    /// Flux at which the SQUID is actually unbiased, in units of Φ0.
    pub flux_offset: f64,
}

impl FluxTunableTransmon {
    pub fn nu01(&self, flux: f64) -> f64 {
        let nu_j = ej_at_flux(self.nu_j_max_ghz, flux - self.flux_offset);
        nu01_asymptotic(nu_j, self.nu_c_ghz)
    }

    /// Smallest non-negative flux (≤ 0.5 above the offset) where the bare
    /// qubit meets `f_r`, if it is reachable.
    pub fn crossing_flux(&self, f_r_ghz: f64) -> Option<f64> {
        let target = f_r_ghz + self.nu_c_ghz;
        let c = target * target / (8.0 * self.nu_j_max_ghz * self.nu_c_ghz);
        (c <= 1.0 && c >= 0.0).then(|| c.acos() / PI + self.flux_offset)
    }
}

/// Qubit–resonator parameters at one flux bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledSystem {
    pub g_over_2pi_mhz: f64,
    pub f_r_ghz: f64,
    pub nu01_ghz: f64,
    pub delta0_ghz: f64,
    pub chi_over_2pi_mhz: f64,
    pub kappa_over_2pi_mhz: f64,
    pub flux: f64,
}

impl CoupledSystem {
    pub fn at_flux(
        qubit: &FluxTunableTransmon,
        f_r_ghz: f64,
        g_mhz: f64,
        kappa_mhz: f64,
        flux: f64,
    ) -> Result<Self> {
        let nu01 = qubit.nu01(flux);
        let delta0 = nu01 - f_r_ghz;
        let chi = dispersive_shift(g_mhz, delta0, qubit.nu_c_ghz)?;
        Ok(Self {
            g_over_2pi_mhz: g_mhz,
            f_r_ghz,
            nu01_ghz: nu01,
            delta0_ghz: delta0,
            chi_over_2pi_mhz: chi.chi_over_2pi_mhz,
            kappa_over_2pi_mhz: kappa_mhz,
            flux,
        })
    }

    pub fn dressed(&self) -> (f64, f64) {
        dressed_levels(self.g_over_2pi_mhz, self.nu01_ghz, self.f_r_ghz)
    }
}

/// One row of a flux sweep through the anticrossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnticrossingPoint {
    pub flux: f64,
    pub lower_ghz: f64,
    pub upper_ghz: f64,
    pub bare_qubit_ghz: f64,
    pub bare_resonator_ghz: f64,
}

pub fn anticrossing_sweep(
    qubit: &FluxTunableTransmon,
    f_r_ghz: f64,
    g_mhz: f64,
    fluxes: &[f64],
) -> Result<Vec<AnticrossingPoint>> {
    if !(g_mhz > 0.0) {
        return Err(Error::domain("anticrossing_sweep", "g must be positive"));
    }
    Ok(fluxes
        .iter()
        .map(|&flux| {
            let nu01 = qubit.nu01(flux);
            let (lower, upper) = dressed_levels(g_mhz, nu01, f_r_ghz);
            AnticrossingPoint {
                flux,
                lower_ghz: lower,
                upper_ghz: upper,
                bare_qubit_ghz: nu01,
                bare_resonator_ghz: f_r_ghz,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurcellT1 {
    pub t1_total_us: f64,
    pub t1_purcell_us: f64,
    /// Set when Δ₀ = 0; the Purcell time is then the resonant 2/κ.
    pub resonant: bool,
}

/// Qubit lifetime including Purcell decay through the resonator,
/// Γ_P = κ (g/Δ₀)² with κ = 2π·κ/2π.
pub fn purcell_t1(kappa_mhz: f64, g_mhz: f64, delta0_ghz: f64, t1_intrinsic_us: f64) -> Result<PurcellT1> {
    if !(kappa_mhz >= 0.0 && t1_intrinsic_us > 0.0) {
        return Err(Error::domain(
            "purcell_t1",
            "κ must be non-negative and T1 positive",
        ));
    }
    let kappa = 2.0 * PI * kappa_mhz; // 1/μs
    let (rate, resonant) = if delta0_ghz == 0.0 {
        (kappa / 2.0, true)
    } else {
        let ratio = g_mhz / (delta0_ghz * 1e3);
        (kappa * ratio * ratio, false)
    };
    let t1_purcell = 1.0 / rate;
    Ok(PurcellT1 {
        t1_total_us: 1.0 / (1.0 / t1_intrinsic_us + rate),
        t1_purcell_us: t1_purcell,
        resonant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn flux_tuning_examples() {
        assert_eq!(ej_at_flux(76.0, 0.0), 76.0);
        assert!(ej_at_flux(76.0, 0.5).abs() < 1e-12);
        assert!((ej_at_flux(1.0, 0.23) - 0.750).abs() < 1e-3);
    }

    #[test]
    fn dispersive_shift_examples() {
        let a = dispersive_shift(54.3, 0.990, 0.561).unwrap();
        assert!((a.chi_over_2pi_mhz - 3.89).abs() < 0.01, "{}", a.chi_over_2pi_mhz);
        assert!(a.approximation_valid);
        assert_eq!(dispersive_shift(0.0, 0.990, 0.561).unwrap().chi_over_2pi_mhz, 0.0);
        let b = dispersive_shift(54.3, 1.5, 0.540).unwrap();
        assert!((b.chi_over_2pi_mhz - 1.1057).abs() < 1e-3, "{}", b.chi_over_2pi_mhz);
    }

    #[test]
    fn dispersive_shift_poles() {
        assert!(matches!(dispersive_shift(54.3, 0.0, 0.561), Err(Error::Singularity { .. })));
        assert!(matches!(dispersive_shift(54.3, 0.561, 0.561), Err(Error::Singularity { .. })));
        // 1 MHz from the ν_C pole with a 1.4 MHz linewidth: flagged, not fatal.
        let near = dispersive_shift_with_linewidth(54.3, 0.562, 0.561, 1.4).unwrap();
        assert!(!near.approximation_valid);
        let sign = dispersive_shift(54.3, 0.7, 0.561).unwrap().chi_over_2pi_mhz;
        assert!(sign > 0.0);
    }

    #[test]
    fn charging_frequency_from_shift() {
        let nu_c = nu_c_from_chi(3.9, 0.990, 54.3).unwrap();
        assert!((nu_c - 0.561).abs() < 1e-3, "{nu_c}");
        let nu_c = nu_c_from_chi(1.11, 1.5, 54.3).unwrap();
        assert!((nu_c - 0.540).abs() < 2e-3, "{nu_c}");
        assert!(nu_c_from_chi(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn josephson_frequency_from_spectroscopy() {
        let (ej, nu_j) = ej_from_spectroscopy(8.501, 0.561).unwrap();
        assert!((nu_j - 18.30).abs() < 0.01, "{nu_j}");
        assert!((ej - 75.7).abs() < 0.1, "{ej}");
        let (_, nu_j) = ej_from_spectroscopy(8.5, 0.540).unwrap();
        assert!((nu_j - 18.92).abs() < 0.01, "{nu_j}");
        assert!(rel(nu01_asymptotic(nu_j, 0.540), 8.5) < 1e-12);
    }

    #[test]
    fn vacuum_rabi_splitting() {
        let (lo, hi) = dressed_levels(54.3, 7.5, 7.5);
        assert!(((hi - lo) - 0.1086).abs() < 1e-12);
        let (lo, hi) = dressed_levels(0.0, 8.0, 7.5);
        assert_eq!((lo, hi), (7.5, 8.0));
    }

    #[test]
    fn level_repulsion_matches_two_by_two_oracle() {
        let (g, q, r) = (0.0543, 8.49, 7.5);
        let m: Matrix2<f64> = Matrix2::new(q, g, g, r);
        let eig = m.symmetric_eigen().eigenvalues;
        let upper_oracle = eig[0].max(eig[1]);
        let (_, upper) = dressed_levels(54.3, q, r);
        assert!((upper - upper_oracle).abs() < 1e-12);
        let push = (upper - q) * 1e3;
        let second_order: f64 = 54.3 * 54.3 / 990.0;
        assert!((second_order - 2.98).abs() < 0.005);
        assert!(rel(push, second_order) < 5e-3, "{push}");
    }

    #[test]
    fn anticrossing_location() {
        let q = FluxTunableTransmon { nu_j_max_ghz: 18.30, nu_c_ghz: 0.561, flux_offset: 0.0 };
        let phi = q.crossing_flux(7.5).unwrap();
        assert!((phi - 0.21).abs() < 0.005, "{phi}");
        assert!((q.nu01(phi) - 7.5).abs() < 1e-9);
        let shifted = FluxTunableTransmon { flux_offset: 0.02, ..q };
        assert!((shifted.crossing_flux(7.5).unwrap() - phi - 0.02).abs() < 1e-12);
        let sweep = anticrossing_sweep(&q, 7.5, 54.3, &[0.0, phi, 0.3]).unwrap();
        assert!(((sweep[1].upper_ghz - sweep[1].lower_ghz) - 0.1086).abs() < 1e-9);
    }

    #[test]
    fn purcell_examples() {
        let p = purcell_t1(1.37, 54.3, 0.990, 4.72).unwrap();
        assert!((p.t1_total_us - 4.21).abs() < 0.01, "{}", p.t1_total_us);
        assert!((p.t1_purcell_us - 38.8).abs() < 0.5, "{}", p.t1_purcell_us);
        let far = purcell_t1(1.37, 54.3, 1e6, 4.72).unwrap();
        assert!(rel(far.t1_total_us, 4.72) < 1e-9);
        let near = purcell_t1(1.37, 54.3, 0.2, 4.72).unwrap();
        assert!((near.t1_purcell_us - 1.58).abs() < 0.01, "{}", near.t1_purcell_us);
        let res = purcell_t1(1.37, 54.3, 0.0, 4.72).unwrap();
        assert!(res.resonant);
        assert!(rel(res.t1_purcell_us, 2.0 / (2.0 * PI * 1.37)) < 1e-12);
    }

    proptest! {
        #[test]
        fn repulsion_bounded_below(g in 0.1f64..200.0, d in -2.0f64..2.0) {
            let (lo, hi) = dressed_levels(g, 7.5 + d, 7.5);
            prop_assert!(hi - lo >= 2.0 * g * 1e-3 - 1e-15);
            if d != 0.0 {
                prop_assert!(hi - lo > 2.0 * g * 1e-3);
            }
        }

        #[test]
        fn shift_and_inversion_are_inverses(
            g in 5.0f64..200.0,
            nu_c in 0.1f64..1.0,
            extra in 0.05f64..3.0,
        ) {
            let d = nu_c + extra;
            let chi = dispersive_shift(g, d, nu_c).unwrap().chi_over_2pi_mhz;
            let back = nu_c_from_chi(chi, d, g).unwrap();
            prop_assert!(rel(back, nu_c) < 1e-9);
        }

        #[test]
        fn purcell_monotone_and_bounded(a in 0.01f64..3.0, b in 0.01f64..3.0, t1 in 0.1f64..100.0) {
            let pa = purcell_t1(1.4, 54.3, a, t1).unwrap().t1_total_us;
            let pb = purcell_t1(1.4, 54.3, -b, t1).unwrap().t1_total_us;
            prop_assert!(pa <= t1 && pb <= t1);
            if a < b {
                prop_assert!(pa < purcell_t1(1.4, 54.3, b, t1).unwrap().t1_total_us);
            }
        }

        #[test]
        fn flux_tuning_periodic_and_even(phi in -3.0f64..3.0) {
            prop_assert!((ej_at_flux(1.0, phi) - ej_at_flux(1.0, phi + 1.0)).abs() < 1e-12);
            prop_assert!((ej_at_flux(1.0, phi) - ej_at_flux(1.0, -phi)).abs() < 1e-12);
        }
    }
}
