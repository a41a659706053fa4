// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Physical constants and the handful of unit conversions the toolkit needs.
//!
//! Energies are carried internally as cyclic frequencies. Canonical units are
//! GHz (frequency), ns (time), fF (capacitance), kΩ (resistance) and μV
//! (voltage). Constants are the exact SI 2019 values.

/// Planck constant in J·s.
pub const PLANCK_J_S: f64 = 6.626_070_15e-34;
/// Elementary charge in C.
pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;
/// Planck constant in eV·s.
pub const PLANCK_EV_S: f64 = PLANCK_J_S / ELEMENTARY_CHARGE_C;
/// Planck constant in μeV·ns, i.e. the μeV value of 1 GHz.
pub const PLANCK_UEV_NS: f64 = PLANCK_EV_S * 1e15;
/// Resistance quantum h/4e² in Ω.
pub const RESISTANCE_QUANTUM_OHM: f64 =
    PLANCK_J_S / (4.0 * ELEMENTARY_CHARGE_C * ELEMENTARY_CHARGE_C);
/// Magnetic flux quantum h/2e in Wb.
pub const FLUX_QUANTUM_WB: f64 = PLANCK_J_S / (2.0 * ELEMENTARY_CHARGE_C);

/// The constant set as one value, for callers that want to pass it around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub h_j_s: f64,
    pub h_ev_s: f64,
    pub e_c: f64,
    pub r_q_ohm: f64,
    pub phi0_wb: f64,
}

pub const CODATA: Constants = Constants {
    h_j_s: PLANCK_J_S,
    h_ev_s: PLANCK_EV_S,
    e_c: ELEMENTARY_CHARGE_C,
    r_q_ohm: RESISTANCE_QUANTUM_OHM,
    phi0_wb: FLUX_QUANTUM_WB,
};

impl Constants {
    /// R_Q in kΩ.
    pub fn r_q_kohm(&self) -> f64 {
        self.r_q_ohm * 1e-3
    }
}

/// Energy in μeV to cyclic frequency in GHz (E = hν).
pub fn energy_uev_to_freq_ghz(energy_uev: f64) -> f64 {
    energy_uev / PLANCK_UEV_NS
}

/// Cyclic frequency in GHz to energy in μeV.
pub fn freq_ghz_to_energy_uev(freq_ghz: f64) -> f64 {
    freq_ghz * PLANCK_UEV_NS
}

/// Voltage in μV to the frequency hν = eV, in GHz.
pub fn voltage_uv_to_freq_ghz(voltage_uv: f64) -> f64 {
    // eV in μeV is numerically V in μV.
    energy_uev_to_freq_ghz(voltage_uv)
}

/// Frequency in GHz to the voltage V = hν/e, in μV.
pub fn freq_ghz_to_voltage_uv(freq_ghz: f64) -> f64 {
    freq_ghz_to_energy_uev(freq_ghz)
}

/// Charging energy e²/2C in μeV for a capacitance in fF.
pub fn charging_energy_uev(capacitance_ff: f64) -> f64 {
    let joules = ELEMENTARY_CHARGE_C * ELEMENTARY_CHARGE_C / (2.0 * capacitance_ff * 1e-15);
    joules / ELEMENTARY_CHARGE_C * 1e6
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn resistance_quantum_matches_display_value() {
        // h/4e² = 6.4532 kΩ; the rounded 6.46 display value is 0.105% away.
        assert!(rel(CODATA.r_q_kohm(), 6.46) < 1.1e-3);
        assert!((CODATA.r_q_kohm() - 6.4532).abs() < 1e-4);
    }

    #[test]
    fn constants_are_mutually_consistent() {
        let c = CODATA;
        assert!(rel(c.r_q_ohm * 4.0 * c.e_c * c.e_c, c.h_j_s) < 1e-12);
        assert!(rel(c.phi0_wb * 2.0 * c.e_c, c.h_j_s) < 1e-12);
        assert!(rel(c.h_ev_s * c.e_c, c.h_j_s) < 1e-12);
    }

    #[test]
    fn one_gigahertz_in_microvolt_electron() {
        assert!(rel(freq_ghz_to_energy_uev(1.0), 4.1357) < 1e-4);
    }

    #[test]
    fn energy_to_frequency_examples() {
        assert_eq!(energy_uev_to_freq_ghz(0.0), 0.0);
        // 2.23 μeV charging energy is ~540 MHz
        let nu_c = energy_uev_to_freq_ghz(2.23);
        assert!((nu_c - 0.539).abs() < 1e-3, "{nu_c}");
        // 200 μeV gap is ~48.3 GHz
        let nu_gap = energy_uev_to_freq_ghz(200.0);
        assert!((nu_gap - 48.36).abs() < 0.01, "{nu_gap}");
    }

    #[test]
    fn charging_energy_of_design_capacitance() {
        // 35.8 fF -> 2.23-2.24 μeV
        let ec = charging_energy_uev(35.8);
        assert!((ec - 2.2375).abs() < 0.002, "{ec}");
    }

    proptest::proptest! {
        #[test]
        fn round_trip_is_exact(e in 1e-9f64..1e9) {
            let back = freq_ghz_to_energy_uev(energy_uev_to_freq_ghz(e));
            proptest::prop_assert!(rel(back, e) < 1e-12);
        }
    }
}
