// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::coupling::{anticrossing_sweep, ej_from_spectroscopy, nu_c_from_chi, FluxTunableTransmon};
use crate::dynamics::{
    echo_experiment, purcell_sweep, rabi_chevron, ramsey_experiment, t1_experiment, LindbladConfig, PurcellParams,
};
use crate::error::Error;
use crate::golden;
use crate::io::{flat_fields, CsvTable, JsonRecord, Profile};
use crate::photon::{
    simulate_dynamic_protocol, PhotonSourceParams, PhotonSourceReport, ProtocolParams, QcConvention,
};
use crate::resonator::{
    linewidth, qc_from_coupler_s21, quarter_wave_length, vacuum_fluctuations, CpwGeometry, VacuumMode,
};
use crate::s21::{add_noise, dispersive_pull, fit_notch, notch_model, sweep_grid, QubitState, S21Sweep};
use crate::transmon::{uniform_grid, Transmon, TransmonDesign};

#[derive(Debug, Parser)]
#[command(name = "cqed", version, about = "Transmon / resonator design and simulation toolkit")]
pub struct Cli {
    /// Profile file (key = value or flat JSON) layered over the defaults.
    #[arg(long, global = true)]
    pub profile: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "CQED_OUT_DIR", default_value = ".")]
    pub out: PathBuf,
    /// Seed for synthetic noise.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Also write gnuplot scripts next to the CSV files.
    #[arg(long, global = true)]
    pub gnuplot: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// Parameter overrides: `--key value` or `--key=value`.
#[derive(Debug, Args, Clone, Default)]
pub struct Overrides {
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, num_args = 0.., value_name = "--KEY VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resonator and transmon design from fabrication targets.
    Design(Overrides),
    /// Transmon levels versus offset charge.
    Spectrum(Overrides),
    /// Dressed levels through the qubit-resonator anticrossing.
    Anticross(Overrides),
    /// Time-domain experiments.
    Simulate {
        #[command(subcommand)]
        kind: Simulation,
    },
    /// Static and dynamic single-photon source efficiency.
    PhotonSource(Overrides),
    /// Notch-type S21 resonance fit.
    FitS21(Overrides),
    /// Regression checks against the reference values.
    Golden(Overrides),
}

#[derive(Debug, Subcommand)]
pub enum Simulation {
    Rabi(Overrides),
    T1(Overrides),
    Ramsey(Overrides),
    Echo(Overrides),
    Purcell(Overrides),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(m) => write!(f, "computation error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownParameter(_) | Error::Parse { .. } | Error::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Resolved global options plus the parameter set.
struct Ctx {
    out: PathBuf,
    seed: u64,
    gnuplot: bool,
    profile: Profile,
    command: String,
}

impl Ctx {
    fn params(&self) -> Vec<(String, String)> {
        let mut p = self.profile.entries();
        p.push(("seed".into(), self.seed.to_string()));
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn csv(&self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> CliResult<PathBuf> {
        let table = CsvTable::numeric(self.params(), header, rows);
        let path = self.path(name);
        table.write(&path, &format!("cqed {}", self.command))?;
        info!("wrote {}", path.display());
        Ok(path)
    }

    fn json(&self, name: &str, fields: Map<String, Value>) -> CliResult<PathBuf> {
        let path = self.path(name);
        JsonRecord::new(fields, self.params()).write(&path)?;
        info!("wrote {}", path.display());
        Ok(path)
    }

    fn gnuplot(&self, name: &str, body: &str) -> CliResult<()> {
        if self.gnuplot {
            let path = self.path(name);
            fs::write(&path, format!("# cqed {}\nset datafile separator ','\nset key autotitle columnhead\n{body}", self.command))
                .map_err(Error::from)?;
            info!("wrote {}", path.display());
        }
        Ok(())
    }
}

/// Pulls global flags that ended up among the trailing overrides.
fn extract_globals(cli: &mut Cli, params: &mut Vec<String>) -> CliResult<()> {
    let mut rest = Vec::with_capacity(params.len());
    let mut it = std::mem::take(params).into_iter();
    while let Some(arg) = it.next() {
        let (name, inline) = match arg.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (arg.clone(), None),
        };
        let mut value = |flag: &str| -> CliResult<String> {
            inline
                .clone()
                .or_else(|| it.next())
                .ok_or_else(|| CliError::Usage(format!("{flag} needs a value")))
        };
        match name.as_str() {
            "--out" => cli.out = PathBuf::from(value("--out")?),
            "--profile" => cli.profile = Some(PathBuf::from(value("--profile")?)),
            "--seed" => {
                let v = value("--seed")?;
                cli.seed = v.parse().map_err(|_| CliError::Usage(format!("invalid seed '{v}'")))?;
            }
            "--gnuplot" if inline.is_none() => cli.gnuplot = true,
            _ => rest.push(arg),
        }
    }
    *params = rest;
    Ok(())
}

pub fn run(mut cli: Cli) -> CliResult<()> {
    let (name, mut overrides) = match &cli.command {
        Command::Design(o) => ("design", o.clone()),
        Command::Spectrum(o) => ("spectrum", o.clone()),
        Command::Anticross(o) => ("anticross", o.clone()),
        Command::Simulate { kind } => match kind {
            Simulation::Rabi(o) => ("simulate rabi", o.clone()),
            Simulation::T1(o) => ("simulate t1", o.clone()),
            Simulation::Ramsey(o) => ("simulate ramsey", o.clone()),
            Simulation::Echo(o) => ("simulate echo", o.clone()),
            Simulation::Purcell(o) => ("simulate purcell", o.clone()),
        },
        Command::PhotonSource(o) => ("photon-source", o.clone()),
        Command::FitS21(o) => ("fit-s21", o.clone()),
        Command::Golden(o) => ("golden", o.clone()),
    };
    extract_globals(&mut cli, &mut overrides.params)?;

    let mut profile = match &cli.profile {
        Some(path) => {
            let (p, warnings) = Profile::load(path).map_err(|e| match e {
                Error::Io(io) => CliError::Usage(format!("cannot read profile {}: {io}", path.display())),
                other => other.into(),
            })?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            p
        }
        None => Profile::reference(),
    };
    profile.apply_overrides(&overrides.params)?;
    fs::create_dir_all(&cli.out).map_err(Error::from)?;

    let ctx = Ctx {
        out: cli.out.clone(),
        seed: cli.seed,
        gnuplot: cli.gnuplot,
        profile,
        command: name.to_string(),
    };
    match &cli.command {
        Command::Design(_) => design(&ctx),
        Command::Spectrum(_) => spectrum(&ctx),
        Command::Anticross(_) => anticross(&ctx),
        Command::Simulate { kind } => match kind {
            Simulation::Rabi(_) => rabi(&ctx),
            Simulation::T1(_) => t1(&ctx),
            Simulation::Ramsey(_) => ramsey(&ctx),
            Simulation::Echo(_) => echo(&ctx),
            Simulation::Purcell(_) => purcell(&ctx),
        },
        Command::PhotonSource(_) => photon_source(&ctx),
        Command::FitS21(_) => fit_s21(&ctx),
        Command::Golden(_) => golden_cmd(&ctx),
    }
}

fn geometry(p: &Profile) -> CpwGeometry {
    let (c, l) = (p.f64("c_r"), p.f64("l_r"));
    CpwGeometry {
        c_per_len_pf_m: c,
        l_per_len_nh_m: l,
        beta_rad_m_ghz: p.f64("beta"),
        z0_ohm: (l * 1e-9 / (c * 1e-12)).sqrt(),
        ..CpwGeometry::sapphire_20_10()
    }
}

/// Transmon reconstructed from the measured spectroscopy.
fn measured_transmon(p: &Profile) -> CliResult<(Transmon, f64)> {
    let nu_c = nu_c_from_chi(p.f64("chi_mhz"), p.f64("delta0"), p.f64("g_mhz"))?;
    let (_, nu_j) = ej_from_spectroscopy(p.f64("nu01_measured"), nu_c)?;
    Ok((Transmon { nu_j_ghz: nu_j, nu_c_ghz: nu_c }, nu_c))
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn design(ctx: &Ctx) -> CliResult<()> {
    let p = &ctx.profile;
    let geom = geometry(p);
    let f0 = p.f64("f0_design");
    let length = quarter_wave_length(f0, &geom)?;
    let qc = qc_from_coupler_s21(p.f64("s21_coupler_db"))?;
    let kappa = linewidth(f0, qc)?;
    let mode = match p.get("vacuum_mode") {
        "literal" => VacuumMode::Literal,
        _ => VacuumMode::Calibrated,
    };
    let vac = vacuum_fluctuations(f0, &geom, length, mode)?;
    let d = TransmonDesign::from_targets(
        p.f64("r"),
        p.f64("nu01"),
        p.f64("nu_gap"),
        p.f64("delta0_design"),
        vac.nu0_rms_mhz * 1e-3,
        p.f64("chi_design_mhz") * 1e-3,
    )?;
    let levels = d.transmon().levels(0.0, p.usize("n_cut"), 3)?;

    let mut m = Map::new();
    m.insert("resonator_length_um".into(), num(length));
    m.insert("qc".into(), num(qc));
    m.insert("kappa_mhz".into(), num(kappa));
    m.insert("v0_rms_uv".into(), num(vac.v0_rms_uv));
    m.insert("nu0_rms_mhz".into(), num(vac.nu0_rms_mhz));
    m.insert("r_n_kohm".into(), num(d.r_n_kohm));
    m.insert("c_sigma_ff".into(), num(d.c_sigma_ff));
    m.insert("c_g_ff".into(), num(d.c_g_ff));
    m.insert("c_g_over_c_sigma".into(), num(d.c_g_ff / d.c_sigma_ff));
    m.insert("e_j_max_uev".into(), num(d.e_j_max_uev));
    m.insert("e_c_uev".into(), num(d.e_c_uev));
    m.insert("nu_c_mhz".into(), num(d.nu_c_ghz * 1e3));
    m.insert("nu01_numeric_ghz".into(), num(levels[1]));
    m.insert("anharmonicity_mhz".into(), num((2.0 * levels[1] - levels[2]) * 1e3));
    ctx.json("design.json", m)?;

    println!("resonator length   {length:.1} um");
    println!("Qc                 {qc:.0}   kappa/2pi {kappa:.3} MHz");
    println!("nu0_rms            {:.1} MHz", vac.nu0_rms_mhz);
    println!("R_N                {:.3} kOhm", d.r_n_kohm);
    println!("C_sigma            {:.2} fF", d.c_sigma_ff);
    println!("C_g                {:.2} fF", d.c_g_ff);
    println!("E_C                {:.3} ueV ({:.0} MHz)", d.e_c_uev, d.nu_c_ghz * 1e3);
    println!("E_J max            {:.1} ueV", d.e_j_max_uev);
    println!("nu01 (numeric)     {:.4} GHz", levels[1]);
    Ok(())
}

fn spectrum(ctx: &Ctx) -> CliResult<()> {
    let p = &ctx.profile;
    let (t, _) = measured_transmon(p)?;
    let n_levels = p.usize("levels");
    let grid = uniform_grid(-1.0, 1.0, p.usize("ng_points"));
    let s = t.spectrum(&grid, p.usize("n_cut"), n_levels)?;
    let rows: Vec<Vec<f64>> = s
        .n_g
        .iter()
        .zip(&s.levels)
        .flat_map(|(&ng, lv)| lv.iter().enumerate().map(move |(m, &f)| vec![ng, m as f64, f]))
        .collect();
    ctx.csv("spectrum.csv", &["n_g", "level", "frequency_ghz"], &rows)?;
    ctx.gnuplot(
        "spectrum.gp",
        "set xlabel 'n_g'\nset ylabel 'frequency (GHz)'\nplot for [m=0:9] 'spectrum.csv' using 1:($2==m?$3:1/0) with lines title sprintf('level %d', m)\n",
    )?;
    println!("nu01 {:.4} GHz  anharmonicity {:.1} MHz  01 dispersion {:.3e} MHz", s.nu01_ghz, s.anharmonicity_ghz * 1e3, s.dispersion_01_mhz);
    Ok(())
}

fn anticross(ctx: &Ctx) -> CliResult<()> {
    let p = &ctx.profile;
    let (t, nu_c) = measured_transmon(p)?;
    let q = FluxTunableTransmon {
        nu_j_max_ghz: t.nu_j_ghz,
        nu_c_ghz: nu_c,
        flux_offset: p.f64("flux_offset"),
    };
    let f_r = p.f64("f_r");
    let fluxes = uniform_grid(p.f64("flux_min"), p.f64("flux_max"), p.usize("flux_points"));
    let pts = anticrossing_sweep(&q, f_r, p.f64("g_mhz"), &fluxes)?;
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|a| vec![a.flux, a.lower_ghz, a.upper_ghz, a.bare_qubit_ghz, a.bare_resonator_ghz])
        .collect();
    ctx.csv("anticross.csv", &["flux", "lower_ghz", "upper_ghz", "bare_qubit_ghz", "bare_resonator_ghz"], &rows)?;
    ctx.gnuplot(
        "anticross.gp",
        "set xlabel 'flux (Phi_0)'\nset ylabel 'frequency (GHz)'\nplot for [c=2:5] 'anticross.csv' using 1:c with lines\n",
    )?;
    let min = pts.iter().map(|a| a.upper_ghz - a.lower_ghz).fold(f64::INFINITY, f64::min);
    match q.crossing_flux(f_r) {
        Some(fx) => println!("crossing flux {fx:.4} Phi0  minimum splitting {:.2} MHz", min * 1e3),
        None => println!("qubit does not reach f_r; minimum splitting {:.2} MHz", min * 1e3),
    }
    Ok(())
}

fn qubit_config(p: &Profile, freq: f64, t2_key: &str) -> LindbladConfig {
    let mut c = LindbladConfig::qubit(freq, p.f64("t1_us"), p.f64(t2_key));
    c.step_ns = p.f64("step_ns");
    c.tolerance = p.f64("tolerance");
    c
}

fn delay_grid(p: &Profile) -> CliResult<Vec<f64>> {
    let (max, step) = (p.f64("tau_max_ns"), p.f64("tau_step_ns"));
    if !(step > 0.0 && max > step) {
        return Err(CliError::Usage("need 0 < tau_step_ns < tau_max_ns".into()));
    }
    let n = (max / step).round() as usize;
    Ok((0..=n).map(|i| i as f64 * step).collect())
}

fn rabi(ctx: &Ctx) -> CliResult<()> {
    let p = &ctx.profile;
    let config = qubit_config(p, p.f64("rabi_center"), "t2_ramsey_us");
    let omega = p.f64("omega");
    let span = p.range("span");
    let m = rabi_chevron(&config, omega, span, (0.0, p.f64("tmax")), (p.usize("span_points"), p.usize("t_points")))?;
    let freq_labels: Vec<String> = m.drive_freqs_ghz.iter().map(|f| f.to_string()).collect();
    let mut header = vec!["duration_ns"];
    header.extend(freq_labels.iter().map(String::as_str));
    let rows: Vec<Vec<f64>> = m
        .durations_ns
        .iter()
        .enumerate()
        .map(|(j, &t)| std::iter::once(t).chain(m.excited.iter().map(|col| col[j])).collect())
        .collect();
    ctx.csv("rabi_chevron.csv", &header, &rows)?;
    let dom: Vec<Vec<f64>> = m
        .drive_freqs_ghz
        .iter()
        .zip(&m.dominant_mhz)
        .map(|(&f, &d)| {
            let det = (f - config.qubit_freq_ghz) * 1e3;
            vec![f, d, (omega * omega + det * det).sqrt()]
        })
        .collect();
    ctx.csv("rabi_dominant.csv", &["drive_freq_ghz", "dominant_mhz", "generalized_rabi_mhz"], &dom)?;
    ctx.gnuplot(
        "rabi_chevron.gp",
        "set xlabel 'drive column'\nset ylabel 'duration (ns)'\nset view map\nsplot 'rabi_chevron.csv' matrix skip 1 every 1:1:1:0 with image notitle\n",
    )?;
    let min = m.dominant_mhz.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("minimum chevron frequency {min:.3} MHz (Omega = {omega} MHz)");
    Ok(())
}

fn decay_outputs(ctx: &Ctx, stem: &str, r: &crate::dynamics::DecayExperiment) -> CliResult<()> {
    let rows: Vec<Vec<f64>> = r.taus_ns.iter().zip(&r.excited).map(|(&t, &e)| vec![t, e]).collect();
    ctx.csv(&format!("{stem}.csv"), &["tau_ns", "excited"], &rows)?;
    let mut m = flat_fields(&r.fit)?;
    m.insert("excited_at_zero".into(), num(r.excited[0]));
    ctx.json(&format!("{stem}_fit.json"), m)?;
    ctx.gnuplot(
        &format!("{stem}.gp"),
        &format!(
            "set xlabel 'delay (ns)'\nset ylabel 'P_e'\nA={a}; tau={tau}; c={c}\nplot '{stem}.csv' using 1:2 with points, c + A*exp(-x/(tau*1000)) title 'fit'\n",
            a = r.fit.amplitude,
            tau = r.fit.tau,
            c = r.fit.offset
        ),
    )?;
    println!("{stem}: tau = {:.4} us  (rms {:.2e})", r.fit.tau, r.fit.rms);
    Ok(())
}

fn t1(ctx: &Ctx) -> CliResult<()> {
    let p = &ctx.profile;
    let config = qubit_config(p, p.f64("nu01_measured"), "t2_ramsey_us");
    let r = t1_experiment(&config, p.f64("omega"), &delay_grid(p)?)?;
    decay_outputs(ctx, "t1", &r)
}

fn echo(ctx: &Ctx) -> CliResult<()> {
    let p = &ctx.profile;
    let mut config = qubit_config(p, p.f64("nu01_measured"), "t2_echo_us");
    config.parity_split_mhz = p.f64("parity_split_mhz");
    let r = echo_experiment(&config, p.f64("omega"), &delay_grid(p)?)?;
    decay_outputs(ctx, "echo", &r)
}

fn ramsey(ctx: &Ctx) -> CliResult<()> {
    let p = &ctx.profile;
    let mut config = qubit_config(p, p.f64("nu01_measured"), "t2_ramsey_us");
    config.parity_split_mhz = p.f64("parity_split_mhz");
    config.detuning_mhz = p.f64("ramsey_detuning_mhz");
    let r = ramsey_experiment(&config, p.f64("omega"), &delay_grid(p)?)?;
    if r.resolution_warning {
        warn!("delay span too short to resolve the parity splitting");
    }
    let rows: Vec<Vec<f64>> = r.taus_ns.iter().zip(&r.excited).map(|(&t, &e)| vec![t, e]).collect();
    ctx.csv("ramsey.csv", &["tau_ns", "excited"], &rows)?;
    let mut m = Map::new();
    m.insert("t2_us".into(), num(r.t2_us));
    m.insert("fit_rms".into(), num(r.fit_rms));
    m.insert("resolution_warning".into(), Value::Bool(r.resolution_warning));
    for (i, f) in r.tone_freqs_mhz.iter().enumerate() {
        m.insert(format!("tone{}_mhz", i + 1), num(*f));
    }
    for (i, pk) in r.peaks.iter().enumerate() {
        m.insert(format!("peak{}_mhz", i + 1), num(pk.frequency));
        m.insert(format!("peak{}_magnitude", i + 1), num(pk.magnitude));
    }
    if r.peaks.len() >= 2 {
        m.insert("peak_separation_mhz".into(), num(r.peaks[1].frequency - r.peaks[0].frequency));
    }
    ctx.json("ramsey_fit.json", m)?;
    ctx.gnuplot(
        "ramsey.gp",
        "set xlabel 'delay (ns)'\nset ylabel 'P_e'\nplot 'ramsey.csv' using 1:2 with lines\n",
    )?;
    let peaks: Vec<String> = r.peaks.iter().map(|p| format!("{:.4}", p.frequency)).collect();
    println!("ramsey: T2 = {:.4} us  peaks [{}] MHz", r.t2_us, peaks.join(", "));
    Ok(())
}

fn purcell(ctx: &Ctx) -> CliResult<()> {
    let p = &ctx.profile;
    let f_r = p.f64("f_r");
    let params = PurcellParams {
        f_r_ghz: f_r,
        g_mhz: p.f64("g_mhz"),
        kappa_mhz: linewidth(f_r, p.f64("qc"))?,
        t1_us: p.f64("t1_us"),
        t2_echo_us: p.f64("t2_echo_us"),
    };
    let grid = uniform_grid(p.f64("purcell_min"), p.f64("purcell_max"), p.usize("purcell_points"));
    let pts = purcell_sweep(&params, &grid)?;
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|q| vec![q.nu01_ghz, q.delta0_ghz, q.t1_total_us, q.t2_echo_bound_us, f64::from(u8::from(q.resonant))])
        .collect();
    ctx.csv("purcell.csv", &["nu01_ghz", "delta0_ghz", "t1_total_us", "t2_echo_bound_us", "resonant"], &rows)?;
    ctx.gnuplot(
        "purcell.gp",
        "set xlabel 'nu01 (GHz)'\nset ylabel 'time (us)'\nset logscale y\nplot 'purcell.csv' using 1:3 with lines, '' using 1:4 with lines\n",
    )?;
    if let Some(last) = pts.last() {
        println!("T1 at {:.3} GHz: {:.3} us", last.nu01_ghz, last.t1_total_us);
    }
    Ok(())
}

fn source_params(p: &Profile) -> CliResult<PhotonSourceParams> {
    let qc_convention: QcConvention = p.get("qc_convention").parse().map_err(|e: Error| CliError::Usage(e.to_string()))?;
    Ok(PhotonSourceParams {
        f_r_ghz: p.f64("f_r"),
        g_mhz: p.f64("g_mhz"),
        delta0_ghz: p.f64("delta0"),
        qi: p.f64("qi"),
        qc: p.f64("qc"),
        qc_static: p.f64("qc_static"),
        t1_us: p.f64("t1_us"),
        t2_us: p.f64("t2_echo_us"),
        tau_pi_ns: p.f64("tau_pi_ns"),
        tau_swap_ns: p.f64("tau_swap_ns"),
        qc_convention,
    })
}

fn photon_source(ctx: &Ctx) -> CliResult<()> {
    let p = &ctx.profile;
    let source = source_params(p)?;
    let report = PhotonSourceReport::compute(&source)?;
    let protocol = ProtocolParams {
        source,
        rabi_mhz: p.f64("omega"),
        n_max: p.usize("n_max"),
        step_ns: p.f64("protocol_step_ns"),
        ramp_ns: p.f64("ramp_ns"),
        hold_ns: None,
        decay_ns: p.f64("decay_ns"),
        sample_ns: p.f64("sample_ns"),
    };
    let sim = simulate_dynamic_protocol(&protocol)?;

    let mut m = flat_fields(&report)?;
    m.remove("loss_breakdown");
    m.insert("qc_convention".into(), Value::String(report.qc_convention.to_string()));
    m.insert("loss_internal".into(), num(report.loss_breakdown.internal));
    m.insert("loss_pulse_decay".into(), num(report.loss_breakdown.pulse_decay));
    m.insert("loss_swap_decay".into(), num(report.loss_breakdown.swap_decay));
    m.insert("protocol_emission_probability".into(), num(sim.emission_probability));
    m.insert("protocol_hold_ns".into(), num(sim.hold_ns));
    m.insert("protocol_tau_pi_ns".into(), num(sim.tau_pi_ns));
    m.insert("branching_ceiling".into(), num(sim.branching_ceiling));
    ctx.json("photon_source.json", m)?;

    let rows: Vec<Vec<f64>> = sim
        .trace
        .iter()
        .map(|s| vec![s.time_ns, s.qubit_excited, s.photons, s.emitted, s.lost])
        .collect();
    ctx.csv("photon_protocol.csv", &["time_ns", "qubit_excited", "photons", "emitted", "lost"], &rows)?;
    ctx.gnuplot(
        "photon_protocol.gp",
        "set xlabel 'time (ns)'\nset ylabel 'probability'\nplot for [c=2:5] 'photon_protocol.csv' using 1:c with lines\n",
    )?;

    let mut t = String::new();
    let _ = writeln!(t, "{:<34}{:>12}", "quantity", "value");
    let rows = [
        ("epsilon after pi pulse", format!("{:.4}", report.epsilon)),
        ("eta static", format!("{:.3} %", report.eta_static * 100.0)),
        ("eta static, Purcell-tuned (ref.)", format!("{:.1} %", report.eta_static_purcell_reference * 100.0)),
        ("eta dynamic (closed form)", format!("{:.2} %", report.eta_dynamic * 100.0)),
        ("eta dynamic (simulated)", format!("{:.2} %", sim.emission_probability * 100.0)),
        ("branching ceiling Qi/(Qi+Qc)", format!("{:.2} %", sim.branching_ceiling * 100.0)),
        ("tau_swap used in closed form", format!("{} ns", report.tau_swap_ns)),
        ("swap time pi/(2g)", format!("{:.3} ns", report.swap_time_from_g_ns)),
        ("optimal Qc", format!("{:.0} ({})", report.qc_optimal, report.qc_convention)),
    ];
    for (k, v) in rows {
        let _ = writeln!(t, "{k:<34}{v:>12}");
    }
    print!("{t}");
    Ok(())
}

fn read_sweep(path: &Path) -> CliResult<S21Sweep> {
    let table = CsvTable::read(path).map_err(|e| match e {
        Error::Io(io) => CliError::Usage(format!("cannot read {}: {io}", path.display())),
        other => other.into(),
    })?;
    let f = table.column_f64("freq_ghz")?;
    let re = table.column_f64("re")?;
    let im = table.column_f64("im")?;
    Ok(S21Sweep::new(f, re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect())?)
}

fn fit_s21(ctx: &Ctx) -> CliResult<()> {
    let p = &ctx.profile;
    let input = p.get("input");
    let sweep = if input.is_empty() {
        let (f0, qi, qc) = (p.f64("s21_f0"), p.f64("qi"), p.f64("qc"));
        let ql = 1.0 / (1.0 / qi + 1.0 / qc);
        let freqs = sweep_grid(f0, ql, p.f64("s21_linewidths"), p.usize("s21_points"));
        let clean = notch_model(f0, qi, qc, p.f64("asymmetry"), &freqs)?;
        let sigma = p.f64("noise_sigma");
        if sigma > 0.0 {
            add_noise(&clean, sigma, ctx.seed)?
        } else {
            clean
        }
    } else {
        read_sweep(Path::new(input))?
    };
    let rows: Vec<Vec<f64>> = sweep.freqs_ghz.iter().zip(&sweep.s21).map(|(&f, z)| vec![f, z.re, z.im]).collect();
    ctx.csv("s21_sweep.csv", &["freq_ghz", "re", "im"], &rows)?;
    let fit = fit_notch(&sweep, None)?;
    let chi = p.f64("chi_mhz");
    let mut m = flat_fields(&fit)?;
    m.insert("q_loaded".into(), num(fit.q_loaded()));
    m.insert("kappa_mhz".into(), num(fit.f0_ghz * 1e3 / fit.q_loaded()));
    m.insert("f_ground_ghz".into(), num(dispersive_pull(fit.f0_ghz, chi, QubitState::Ground)));
    m.insert("f_excited_ghz".into(), num(dispersive_pull(fit.f0_ghz, chi, QubitState::Excited)));
    m.insert("f_saturated_ghz".into(), num(dispersive_pull(fit.f0_ghz, chi, QubitState::Saturated)));
    ctx.json("s21_fit.json", m)?;
    ctx.gnuplot(
        "s21.gp",
        "set xlabel 'frequency (GHz)'\nset ylabel '|S21|'\nplot 's21_sweep.csv' using 1:(sqrt($2**2+$3**2)) with lines\n",
    )?;
    println!(
        "f0 {:.6} GHz  Qi {:.0}  Qc {:.0}  phi {:.4} rad  residual {:.2e}",
        fit.f0_ghz, fit.qi, fit.qc, fit.asymmetry_rad, fit.residual
    );
    Ok(())
}

fn golden_cmd(ctx: &Ctx) -> CliResult<()> {
    let checks = golden::run_checks(&ctx.profile);
    print!("{}", golden::format_table(&checks));
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.name.to_string(),
                c.value.to_string(),
                c.expected.to_string(),
                c.tolerance.to_string(),
                if c.passed { "pass" } else { "fail" }.to_string(),
            ]
        })
        .collect();
    let table = CsvTable {
        params: ctx.params(),
        header: ["check", "value", "expected", "tolerance", "status"].map(String::from).to_vec(),
        rows,
    };
    table.write(&ctx.path("golden.csv"), "cqed golden")?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Compute(format!("{failed} of {} golden checks failed", checks.len())));
    }
    Ok(())
}
