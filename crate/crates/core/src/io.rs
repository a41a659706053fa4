// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter profiles and the CSV / JSON artifact formats.
//!
//! A profile is a flat set of named parameters. Resolution is layered:
//! built-in defaults (the measured device), then an optional file, then
//! command-line overrides. Profile files are `key = value` lines with `#`
//! comments, or a flat JSON object.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::warn;
use serde::de::{Deserializer, MapAccess, Visitor};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Number,
    Integer,
    /// `lo:hi` pair of numbers.
    Range,
    /// Free text, or one of the listed choices when non-empty.
    Text(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub key: &'static str,
    pub default: &'static str,
    pub kind: Kind,
    pub help: &'static str,
}

const fn p(key: &'static str, default: &'static str, kind: Kind, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        default,
        kind,
        help,
    }
}

use Kind::{Integer as I, Number as N, Range as R};

pub const REGISTRY: &[ParamSpec] = &[
    // design targets
    p("r", "35", N, "E_J/E_C ratio target"),
    p("nu01", "8.5", N, "design maximum ν01, GHz"),
    p("nu_gap", "48.3", N, "superconducting gap frequency, GHz"),
    p("delta0_design", "1.5", N, "design qubit-resonator detuning, GHz"),
    p("chi_design_mhz", "4.93", N, "design dispersive shift χ/2π, MHz"),
    p("f0_design", "7.0", N, "design resonator frequency, GHz"),
    p("s21_coupler_db", "-35", N, "coupler transmission at f0, dB"),
    p("c_r", "153", N, "line capacitance per length, pF/m"),
    p("l_r", "402", N, "line inductance per length, nH/m"),
    p("beta", "53.3", N, "phase constant, rad/m per GHz"),
    p("vacuum_mode", "calibrated", Kind::Text(&["calibrated", "literal"]), "vacuum fluctuation formula"),
    // measured device
    p("f_r", "7.5", N, "resonator frequency seen by the qubit, GHz"),
    p("nu01_measured", "8.501", N, "sweet-spot qubit frequency, GHz"),
    p("delta0", "0.990", N, "sweet-spot detuning, GHz"),
    p("g_mhz", "54.3", N, "coupling g/2π, MHz"),
    p("chi_mhz", "3.9", N, "measured dispersive shift χ/2π, MHz"),
    p("qi", "38600", N, "internal quality factor"),
    p("qc", "5500", N, "coupling quality factor"),
    p("s21_f0", "7.52", N, "resonance of the measured S21 dip, GHz"),
    p("t1_us", "4.72", N, "qubit T1, μs"),
    p("t2_ramsey_us", "6.38", N, "Ramsey T2, μs"),
    p("t2_echo_us", "6.69", N, "echo T2, μs"),
    p("flux_offset", "0", N, "SQUID flux offset, Φ0"),
    // spectra
    p("n_cut", "30", I, "charge basis cutoff"),
    p("levels", "4", I, "transmon levels reported"),
    p("ng_points", "41", I, "offset-charge grid points"),
    p("flux_min", "0.15", N, "anticrossing sweep start, Φ0"),
    p("flux_max", "0.27", N, "anticrossing sweep stop, Φ0"),
    p("flux_points", "241", I, "anticrossing sweep points"),
    // time domain
    p("omega", "6.17", N, "Rabi frequency Ω, MHz"),
    p("span", "8.502:8.520", R, "chevron drive-frequency span, GHz"),
    p("span_points", "19", I, "chevron frequency points"),
    p("tmax", "1000", N, "chevron maximum pulse length, ns"),
    p("t_points", "501", I, "chevron duration points"),
    p("rabi_center", "8.512", N, "qubit frequency during the chevron, GHz"),
    p("parity_split_mhz", "0.554", N, "offset-charge parity splitting, MHz"),
    p("ramsey_detuning_mhz", "2.0", N, "Ramsey drive detuning, MHz"),
    p("tau_max_ns", "20000", N, "delay sweep maximum, ns"),
    p("tau_step_ns", "20", N, "delay sweep spacing, ns"),
    p("step_ns", "0.25", N, "integrator step, ns"),
    p("tolerance", "1e-6", N, "integrator trace tolerance"),
    p("purcell_min", "7.55", N, "Purcell sweep start, GHz"),
    p("purcell_max", "9.0", N, "Purcell sweep stop, GHz"),
    p("purcell_points", "146", I, "Purcell sweep points"),
    // photon source
    p("tau_pi_ns", "80", N, "π-pulse duration for the closed forms, ns"),
    p("tau_swap_ns", "58", N, "swap duration for the closed form, ns"),
    p("qc_static", "5000", N, "coupling Q for the static source estimate"),
    p("qc_convention", "cyclic", Kind::Text(&["cyclic", "angular"]), "reading of ω_r in the optimal Qc"),
    p("n_max", "3", I, "resonator photon cutoff"),
    p("protocol_step_ns", "0.02", N, "integrator step for the swap protocol, ns"),
    p("ramp_ns", "0", N, "flux ramp duration, ns (0 = instantaneous)"),
    p("decay_ns", "2000", N, "free decay after the swap, ns"),
    p("sample_ns", "1", N, "protocol trace spacing, ns"),
    // S21
    p("asymmetry", "0", N, "S21 asymmetry angle, rad"),
    p("noise_sigma", "0.01", N, "synthetic S21 noise per quadrature"),
    p("s21_points", "2001", I, "synthetic S21 points"),
    p("s21_linewidths", "10", N, "synthetic sweep half-span in linewidths"),
    p("input", "", Kind::Text(&[]), "S21 CSV to fit (empty: synthetic)"),
];

pub fn spec(key: &str) -> Option<&'static ParamSpec> {
    REGISTRY.iter().find(|s| s.key == key)
}

fn check_value(spec: &ParamSpec, value: &str) -> std::result::Result<(), String> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("'{s}' is not a finite number"))
    };
    match spec.kind {
        Kind::Number => num(value).map(|_| ()),
        Kind::Integer => value
            .trim()
            .parse::<usize>()
            .map(|_| ())
            .map_err(|_| format!("'{value}' is not a non-negative integer")),
        Kind::Range => {
            let (a, b) = value.split_once(':').ok_or_else(|| format!("'{value}' is not lo:hi"))?;
            num(a)?;
            num(b)?;
            Ok(())
        }
        Kind::Text(choices) => {
            if choices.is_empty() || choices.contains(&value) {
                Ok(())
            } else {
                Err(format!("'{value}' is not one of {}", choices.join(", ")))
            }
        }
    }
}

/// A fully resolved parameter set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    values: BTreeMap<&'static str, String>,
}

impl Default for Profile {
    fn default() -> Self {
        Self::reference()
    }
}

fn normalise_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Profile {
    /// Built-in defaults: the measured device and its design targets.
    pub fn reference() -> Self {
        Self {
            values: REGISTRY.iter().map(|s| (s.key, s.default.to_string())).collect(),
        }
    }

    /// Sets one parameter after validating its name and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = normalise_key(key);
        let spec = spec(&key).ok_or_else(|| Error::UnknownParameter(vec![key.clone()]))?;
        check_value(spec, value.trim()).map_err(|m| Error::InvalidConfig(format!("{key}: {m}")))?;
        self.values.insert(spec.key, value.trim().to_string());
        Ok(())
    }

    /// Applies `key = value` text or a flat JSON object. Returns warnings
    /// (duplicate keys, resolved last-wins).
    pub fn apply_text(&mut self, text: &str) -> Result<Vec<String>> {
        let entries = if text.trim_start().starts_with('{') {
            parse_json_entries(text)?
        } else {
            parse_key_values(text)?
        };
        let unknown: Vec<String> = entries
            .iter()
            .filter(|e| spec(&normalise_key(&e.key)).is_none())
            .map(|e| normalise_key(&e.key))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownParameter(unknown));
        }
        let mut warnings = Vec::new();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for e in &entries {
            let key = normalise_key(&e.key);
            if let Some(first) = seen.insert(key.clone(), e.line) {
                let w = format!("duplicate key '{key}' (lines {first} and {}); last value wins", e.line);
                warn!("{w}");
                warnings.push(w);
            }
            let spec = spec(&key).expect("checked above");
            check_value(spec, &e.value).map_err(|m| Error::Parse {
                line: e.line,
                column: e.column,
                message: format!("{key}: {m}"),
            })?;
            self.values.insert(spec.key, e.value.clone());
        }
        Ok(warnings)
    }

    /// Defaults overlaid with the file at `path`.
    pub fn load(path: &Path) -> Result<(Self, Vec<String>)> {
        let text = fs::read_to_string(path)?;
        let mut profile = Self::reference();
        let warnings = profile.apply_text(&text)?;
        Ok((profile, warnings))
    }

    /// Applies `--key value` / `--key=value` pairs. All unknown names are
    /// reported together.
    pub fn apply_overrides(&mut self, args: &[String]) -> Result<()> {
        let mut pairs = Vec::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let Some(name) = arg.strip_prefix("--") else {
                return Err(Error::InvalidConfig(format!("expected --key, found '{arg}'")));
            };
            if let Some((k, v)) = name.split_once('=') {
                pairs.push((normalise_key(k), v.to_string()));
                i += 1;
            } else {
                let v = args
                    .get(i + 1)
                    .ok_or_else(|| Error::InvalidConfig(format!("--{name} needs a value")))?;
                pairs.push((normalise_key(name), v.clone()));
                i += 2;
            }
        }
        let unknown: Vec<String> = pairs.iter().filter(|(k, _)| spec(k).is_none()).map(|(k, _)| k.clone()).collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownParameter(unknown));
        }
        for (k, v) in pairs {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("parameter '{key}' is not registered"))
    }

    pub fn f64(&self, key: &str) -> f64 {
        self.get(key).parse().expect("validated on insert")
    }

    pub fn usize(&self, key: &str) -> usize {
        self.get(key).parse().expect("validated on insert")
    }

    pub fn range(&self, key: &str) -> (f64, f64) {
        let (a, b) = self.get(key).split_once(':').expect("validated on insert");
        (a.trim().parse().expect("validated"), b.trim().parse().expect("validated"))
    }

    /// All parameters in key order.
    pub fn entries(&self) -> Vec<(String, String)> {
        self.values.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    column: usize,
}

fn parse_key_values(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(Error::Parse {
                line,
                column: content.trim_end().len() + 1,
                message: "expected 'key = value'".into(),
            });
        };
        let key = content[..eq].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            let column = content.len() - content.trim_start().len() + 1;
            return Err(Error::Parse {
                line,
                column,
                message: format!("invalid key '{key}'"),
            });
        }
        let after = &content[eq + 1..];
        let value = after.trim();
        let column = eq + 2 + (after.len() - after.trim_start().len());
        out.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
            column,
        });
    }
    Ok(out)
}

/// Flat JSON object read entry by entry so duplicates survive.
struct Entries(Vec<(String, Value)>);

impl<'de> serde::Deserialize<'de> for Entries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Entries;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a flat JSON object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Entries, A::Error> {
                let mut v = Vec::new();
                while let Some((k, val)) = map.next_entry::<String, Value>()? {
                    v.push((k, val));
                }
                Ok(Entries(v))
            }
        }
        d.deserialize_map(V)
    }
}

fn position_of(text: &str, needle: &str) -> (usize, usize) {
    let offset = text.find(needle).unwrap_or(0);
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = offset - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn parse_json_entries(text: &str) -> Result<Vec<Entry>> {
    let Entries(pairs) = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    pairs
        .into_iter()
        .map(|(key, v)| {
            let (line, column) = position_of(text, &format!("\"{key}\""));
            let value = match v {
                Value::Number(n) => n.to_string(),
                Value::String(s) => s,
                Value::Bool(b) => b.to_string(),
                _ => {
                    return Err(Error::Parse {
                        line,
                        column,
                        message: format!("'{key}' must be a number, string or boolean"),
                    })
                }
            };
            Ok(Entry {
                key,
                value,
                line,
                column,
            })
        })
        .collect()
}

/// A CSV artifact: parameter comments, one header line, rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub params: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn numeric(params: Vec<(String, String)>, header: &[&str], rows: &[Vec<f64>]) -> Self {
        Self {
            params,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: rows.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parses column `name` as numbers.
    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .column(name)
            .ok_or_else(|| Error::InvalidConfig(format!("CSV has no column '{name}'")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.get(idx).and_then(|s| s.trim().parse().ok()).ok_or_else(|| Error::Parse {
                    line: i + 1,
                    column: idx + 1,
                    message: format!("'{name}' is not numeric"),
                })
            })
            .collect()
    }

    pub fn to_text(&self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {title}");
        for (k, v) in &self.params {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut params = Vec::new();
        let mut header = None;
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if let Some(c) = line.strip_prefix('#') {
                if let Some((k, v)) = c.split_once(" = ") {
                    params.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
            match &header {
                None => header = Some(cells),
                Some(h) => {
                    if cells.len() != h.len() {
                        return Err(Error::Parse {
                            line: idx + 1,
                            column: 1,
                            message: format!("{} cells, header has {}", cells.len(), h.len()),
                        });
                    }
                    rows.push(cells);
                }
            }
        }
        let header = header.ok_or(Error::Parse {
            line: 1,
            column: 1,
            message: "missing header line".into(),
        })?;
        Ok(Self { params, header, rows })
    }

    pub fn write(&self, path: &Path, title: &str) -> Result<()> {
        fs::write(path, self.to_text(title))?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

/// Prefix marking parameter fields inside flat JSON records.
pub const PARAM_PREFIX: &str = "param_";

/// Flat JSON record whose parameters are embedded as `param_<key>` fields.
#[derive(Debug, Clone, PartialEq)]
pub struct JsonRecord {
    pub fields: Map<String, Value>,
    pub params: Vec<(String, String)>,
}

impl JsonRecord {
    pub fn new(fields: Map<String, Value>, params: Vec<(String, String)>) -> Self {
        Self { fields, params }
    }

    pub fn to_text(&self) -> Result<String> {
        let mut all = self.fields.clone();
        for (k, v) in &self.params {
            all.insert(format!("{PARAM_PREFIX}{k}"), Value::String(v.clone()));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(all))?;
        s.push('\n');
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let Value::Object(all) = serde_json::from_str(text)? else {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: "expected a JSON object".into(),
            });
        };
        let mut fields = Map::new();
        let mut params = Vec::new();
        for (k, v) in all {
            match (k.strip_prefix(PARAM_PREFIX), &v) {
                (Some(name), Value::String(s)) => params.push((name.to_string(), s.clone())),
                _ => {
                    fields.insert(k, v);
                }
            }
        }
        Ok(Self { fields, params })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn f64(&self, key: &str) -> Option<f64> {
        self.fields.get(key).and_then(Value::as_f64)
    }
}

/// Builds a JSON object from any serialisable struct with scalar fields.
pub fn flat_fields<T: serde::Serialize>(value: &T) -> Result<Map<String, Value>> {
    match serde_json::to_value(value)? {
        Value::Object(m) => Ok(m),
        _ => Err(Error::InvalidConfig("record is not an object".into())),
    }
}
