// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Transmon design inversions and charge-basis diagonalization.
//!
//! The Hamiltonian H = 4E_C(n̂ − n_g)² − E_J cos φ̂ is tridiagonal in the
//! Cooper-pair number basis |n⟩, n ∈ [−n_cut, n_cut]: the diagonal carries
//! the charging parabola and cos φ̂ couples neighbours with −E_J/2. All
//! energies are handled as cyclic frequencies in GHz.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{self, RESISTANCE_QUANTUM_OHM};

/// Default charge-basis half-width (61 states).
pub const DEFAULT_N_CUT: usize = 30;
/// Number of offset-charge points on [0, 0.5] used for dispersion.
pub const DISPERSION_GRID: usize = 41;

fn check_ratio(op: &'static str, r: f64, nu01: f64) -> Result<f64> {
    if !(r > 0.125) || !r.is_finite() {
        return Err(Error::domain(op, format!("E_J/E_C must exceed 1/8, got {r}")));
    }
    if !(nu01 > 0.0) || !nu01.is_finite() {
        return Err(Error::domain(op, format!("ν01 must be positive, got {nu01}")));
    }
    Ok((8.0 * r).sqrt() - 1.0)
}

/// Junction normal-state resistance in kΩ that yields E_J/E_C = `r` and a
/// maximum ν01 of `nu01_ghz` for a gap frequency `nu_gap_ghz`.
pub fn rn_for_target(r: f64, nu01_ghz: f64, nu_gap_ghz: f64) -> Result<f64> {
    let k = check_ratio("rn_for_target", r, nu01_ghz)?;
    if !(nu_gap_ghz > 0.0) {
        return Err(Error::domain("rn_for_target", "gap frequency must be positive"));
    }
    Ok(RESISTANCE_QUANTUM_OHM / 2.0 * (k / r) * (nu_gap_ghz / nu01_ghz) * 1e-3)
}

/// Total island capacitance C_Σ in fF for E_J/E_C = `r` and maximum ν01.
pub fn csigma_for_target(r: f64, nu01_ghz: f64) -> Result<f64> {
    let k = check_ratio("csigma_for_target", r, nu01_ghz)?;
    Ok(k / 8.0 / (RESISTANCE_QUANTUM_OHM * nu01_ghz * 1e9) * 1e15)
}

/// Gate-to-island capacitance ratio C_g/C_Σ that realises a dispersive
/// shift χ/2π at detuning Δ₀, given the resonator's vacuum frequency ν⁰_rms.
pub fn cg_for_chi(
    r: f64,
    delta0_ghz: f64,
    nu0_rms_ghz: f64,
    chi_over_2pi_ghz: f64,
    nu_c_ghz: f64,
) -> Result<f64> {
    const OP: &str = "cg_for_chi";
    if !(r > 0.0 && delta0_ghz > 0.0 && nu0_rms_ghz > 0.0 && nu_c_ghz > 0.0) {
        return Err(Error::domain(OP, "r, Δ₀, ν⁰_rms and ν_C must be positive"));
    }
    if !(chi_over_2pi_ghz >= 0.0) {
        return Err(Error::domain(OP, "χ must be non-negative"));
    }
    if delta0_ghz <= nu_c_ghz {
        return Err(Error::singular(
            OP,
            format!("Δ₀ = {delta0_ghz} GHz does not exceed ν_C = {nu_c_ghz} GHz"),
        ));
    }
    Ok((2.0 / r).powf(0.25)
        * (delta0_ghz / nu0_rms_ghz)
        * (chi_over_2pi_ghz / nu_c_ghz).sqrt()
        * (1.0 - nu_c_ghz / delta0_ghz).sqrt())
}

/// First-order transmon transition √(8 ν_J ν_C) − ν_C.
pub fn nu01_asymptotic(nu_j_ghz: f64, nu_c_ghz: f64) -> f64 {
    (8.0 * nu_j_ghz * nu_c_ghz).sqrt() - nu_c_ghz
}

/// Fabrication-facing targets for one transmon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonDesign {
    pub ratio: f64,
    pub nu01_max_ghz: f64,
    pub nu_gap_ghz: f64,
    pub r_n_kohm: f64,
    pub c_sigma_ff: f64,
    pub c_g_ff: f64,
    pub e_j_max_uev: f64,
    pub e_c_uev: f64,
    pub nu_c_ghz: f64,
}

impl TransmonDesign {
    /// Inverts the design relations. The gate capacitance targets a
    /// dispersive shift `chi_over_2pi_ghz` at detuning `delta0_ghz`.
    pub fn from_targets(
        r: f64,
        nu01_ghz: f64,
        nu_gap_ghz: f64,
        delta0_ghz: f64,
        nu0_rms_ghz: f64,
        chi_over_2pi_ghz: f64,
    ) -> Result<Self> {
        let r_n_kohm = rn_for_target(r, nu01_ghz, nu_gap_ghz)?;
        let c_sigma_ff = csigma_for_target(r, nu01_ghz)?;
        let e_c_uev = units::charging_energy_uev(c_sigma_ff);
        let nu_c_ghz = units::energy_uev_to_freq_ghz(e_c_uev);
        let ratio_g = cg_for_chi(r, delta0_ghz, nu0_rms_ghz, chi_over_2pi_ghz, nu_c_ghz)?;
        Ok(Self {
            ratio: r,
            nu01_max_ghz: nu01_ghz,
            nu_gap_ghz,
            r_n_kohm,
            c_sigma_ff,
            c_g_ff: ratio_g * c_sigma_ff,
            e_j_max_uev: r * e_c_uev,
            e_c_uev,
            nu_c_ghz,
        })
    }

    pub fn transmon(&self) -> Transmon {
        Transmon::from_energies_uev(self.e_j_max_uev, self.e_c_uev)
    }
}

/// Eigenvalues of a real symmetric tridiagonal matrix by implicit-shift QL,
/// returned in ascending order. `off[i]` couples rows i and i+1.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    assert_eq!(off.len() + 1, n, "off-diagonal must have n - 1 entries");
    let mut d = diag.to_vec();
    let mut e: Vec<f64> = off.iter().copied().chain(std::iter::once(0.0)).collect();

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::Domain {
                    op: "tridiagonal_eigenvalues",
                    reason: "QL iteration did not converge".into(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// A transmon specified by its Josephson and charging frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transmon {
    pub nu_j_ghz: f64,
    pub nu_c_ghz: f64,
}

impl Transmon {
    pub fn from_energies_uev(e_j_uev: f64, e_c_uev: f64) -> Self {
        Self {
            nu_j_ghz: units::energy_uev_to_freq_ghz(e_j_uev),
            nu_c_ghz: units::energy_uev_to_freq_ghz(e_c_uev),
        }
    }

    pub fn ratio(&self) -> f64 {
        self.nu_j_ghz / self.nu_c_ghz
    }

    fn check(&self, n_cut: usize, n_levels: usize) -> Result<()> {
        if !(self.nu_c_ghz > 0.0) || !(self.nu_j_ghz >= 0.0) {
            return Err(Error::domain(
                "diagonalize",
                format!(
                    "need E_C > 0 and E_J >= 0, got ν_C = {}, ν_J = {}",
                    self.nu_c_ghz, self.nu_j_ghz
                ),
            ));
        }
        if n_cut < 5 || n_levels + 2 > 2 * n_cut + 1 {
            return Err(Error::BasisTooSmall {
                n_cut,
                levels: n_levels,
            });
        }
        Ok(())
    }

    /// Lowest `n_levels` eigenfrequencies at offset charge `n_g`, in GHz
    /// relative to the ground level.
    pub fn levels(&self, n_g: f64, n_cut: usize, n_levels: usize) -> Result<Vec<f64>> {
        self.check(n_cut, n_levels)?;
        let n_cut_i = n_cut as i64;
        let diag: Vec<f64> = (-n_cut_i..=n_cut_i)
            .map(|n| {
                let q = n as f64 - n_g;
                4.0 * self.nu_c_ghz * q * q
            })
            .collect();
        let off = vec![-0.5 * self.nu_j_ghz; diag.len() - 1];
        let eig = tridiagonal_eigenvalues(&diag, &off)?;
        let ground = eig[0];
        Ok(eig.iter().take(n_levels).map(|e| e - ground).collect())
    }

    /// Levels on a grid of offset charges.
    pub fn spectrum(&self, n_g_grid: &[f64], n_cut: usize, n_levels: usize) -> Result<TransmonSpectrum> {
        let n_levels = n_levels.max(3);
        let levels = n_g_grid
            .iter()
            .map(|&ng| self.levels(ng, n_cut, n_levels))
            .collect::<Result<Vec<_>>>()?;
        let count = levels.len().max(1) as f64;
        let nu01 = levels.iter().map(|l| l[1] - l[0]).sum::<f64>() / count;
        let nu12 = levels.iter().map(|l| l[2] - l[1]).sum::<f64>() / count;
        let nu01_values = levels.iter().map(|l| l[1] - l[0]);
        let (lo, hi) = nu01_values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        Ok(TransmonSpectrum {
            n_g: n_g_grid.to_vec(),
            levels,
            nu01_ghz: nu01,
            nu12_ghz: nu12,
            anharmonicity_ghz: nu01 - nu12,
            dispersion_01_mhz: (hi - lo) * 1e3,
        })
    }

    /// Peak-to-peak spread in MHz of the transition m → m+1 over offset charge.
    pub fn charge_dispersion(&self, m: usize, n_cut: usize) -> Result<f64> {
        let grid = uniform_grid(0.0, 0.5, DISPERSION_GRID);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for ng in grid {
            let l = self.levels(ng, n_cut, m + 2)?;
            let nu = l[m + 1] - l[m];
            lo = lo.min(nu);
            hi = hi.max(nu);
        }
        Ok((hi - lo) * 1e3)
    }
}

/// Charge-basis spectrum over a grid of offset charges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmonSpectrum {
    pub n_g: Vec<f64>,
    /// `levels[i][m]`: level m at `n_g[i]`, GHz above the ground level.
    pub levels: Vec<Vec<f64>>,
    /// ν01 averaged over the grid.
    pub nu01_ghz: f64,
    /// ν12 averaged over the grid.
    pub nu12_ghz: f64,
    pub anharmonicity_ghz: f64,
    pub dispersion_01_mhz: f64,
}

pub fn uniform_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points)
            .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Diagonalizes at one offset charge; energies in μeV, result in GHz.
pub fn diagonalize(e_j_uev: f64, e_c_uev: f64, n_g: f64, n_cut: usize, n_levels: usize) -> Result<Vec<f64>> {
    Transmon::from_energies_uev(e_j_uev, e_c_uev).levels(n_g, n_cut, n_levels)
}

/// Peak-to-peak dispersion in MHz of transition m → m+1; energies in μeV.
pub fn charge_dispersion(e_j_uev: f64, e_c_uev: f64, m: usize) -> Result<f64> {
    Transmon::from_energies_uev(e_j_uev, e_c_uev).charge_dispersion(m, DEFAULT_N_CUT)
}
