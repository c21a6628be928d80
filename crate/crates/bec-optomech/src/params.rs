//! Flat key-value parameter files and the standard parameter preset.
//!
//! The file format is one `key = value` pair per line, `#` comments, and a
//! mandatory `<field>_is_angular = true|false` flag for every frequency
//! field. A `false` flag means the value is an ordinary frequency in Hz and
//! is multiplied by 2 pi on load; `true` means the value is already an
//! angular frequency in rad/s. The flag is required so that the two
//! conventions that coexist in the literature can both be written down
//! without ambiguity.
//!
//! ```text
//! # pump laser
//! kappa = 1.3e6
//! kappa_is_angular = false     # 2 pi x 1.3 MHz
//! omega_m = 1e5
//! omega_m_is_angular = true    # already rad/s
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::model::{PhaseNoiseParams, SystemParams};
use crate::{Error, Result};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Frequency-like fields that require an `_is_angular` flag.
const FREQ_FIELDS: [&str; 13] = [
    "kappa",
    "g0",
    "delta_a",
    "omega_r",
    "omega_sw",
    "gamma_c",
    "omega_m",
    "gamma_m",
    "eta",
    "delta_c",
    "gamma_l",
    "omega_n",
    "gamma_tilde",
];

/// Plain scalar fields (no unit flag).
const PLAIN_FIELDS: [&str; 6] = [
    "n_atoms",
    "cavity_length",
    "pump_wavelength",
    "mirror_mass",
    "temperature",
    "n_ph",
];

/// The experimentally feasible parameter set used throughout the sweeps:
/// 1e5 Rb atoms in a 187 um cavity at 780 nm, kappa = 2 pi x 1.3 MHz,
/// g0 = 2 pi x 14.1 MHz, omega_R = 23.7e3 rad/s, a 1 ng mirror at
/// omega_m = 1e5 rad/s with gamma_m = 2 pi x 100 Hz, gamma_c = 0.001 kappa,
/// omega_sw = 0.2 omega_R, T = 0.1 uK, and phase noise centred at
/// omega_N = 2 pi x 140 kHz with gamma_tilde = omega_N / 2.
///
/// The pump defaults to eta = 100 kappa at delta_c = -15 kappa (the
/// operating point of the strongest mirror-atom entanglement) and a laser
/// linewidth of 2 pi x 1 kHz.
pub fn paper_defaults() -> SystemParams {
    SystemParams {
        n_atoms: 100_000,
        cavity_length: 187e-6,
        pump_wavelength: 780e-9,
        kappa: TWO_PI * 1.3e6,
        g0: TWO_PI * 14.1e6,
        // cavity (2.41494e15 rad/s) minus atomic D2 (2.41419e15 rad/s)
        delta_a: 7.5e11,
        omega_r: 23.7e3,
        omega_sw: 4.74e3,         // 0.2 omega_r
        gamma_c: TWO_PI * 1.3e3,  // 0.001 kappa
        mirror_mass: 1e-12,
        omega_m: 1e5,
        gamma_m: TWO_PI * 100.0,
        eta: TWO_PI * 1.3e8,      // 100 kappa
        delta_c: -TWO_PI * 19.5e6, // -15 kappa
        temperature: 0.1e-6,
        n_ph: 0.0,
        phase_noise: PhaseNoiseParams {
            gamma_l: TWO_PI * 1e3,
            omega_n: TWO_PI * 140e3,
            gamma_tilde: TWO_PI * 70e3, // omega_n / 2
        },
    }
}

fn parse_err(path: &str, reason: impl Into<String>) -> Error {
    Error::ParamFile {
        path: path.to_string(),
        reason: reason.into(),
    }
}

/// Parse a parameter file into a fully resolved [`SystemParams`] (all
/// frequencies in rad/s). Unknown keys, missing keys, and missing unit
/// flags are reported by name.
pub fn parse_params(path: impl AsRef<Path>) -> Result<SystemParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_params_str(&text, &path.display().to_string())
}

/// Parse parameter text; `origin` is used in error messages.
pub fn parse_params_str(text: &str, origin: &str) -> Result<SystemParams> {
    let mut values: BTreeMap<String, f64> = BTreeMap::new();
    let mut flags: BTreeMap<String, bool> = BTreeMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            parse_err(origin, format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        if let Some(field) = key.strip_suffix("_is_angular") {
            if !FREQ_FIELDS.contains(&field) {
                return Err(parse_err(origin, format!("line {}: unknown key `{key}`", lineno + 1)));
            }
            let flag = match value {
                "true" => true,
                "false" => false,
                other => {
                    return Err(parse_err(
                        origin,
                        format!("line {}: `{key}` must be true or false, got `{other}`", lineno + 1),
                    ))
                }
            };
            if flags.insert(field.to_string(), flag).is_some() {
                return Err(parse_err(origin, format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        } else {
            if !FREQ_FIELDS.contains(&key) && !PLAIN_FIELDS.contains(&key) {
                return Err(parse_err(origin, format!("line {}: unknown key `{key}`", lineno + 1)));
            }
            let v: f64 = value.parse().map_err(|_| {
                parse_err(origin, format!("line {}: `{key}`: not a number: `{value}`", lineno + 1))
            })?;
            if values.insert(key.to_string(), v).is_some() {
                return Err(parse_err(origin, format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
    }

    let mut missing: Vec<&str> = Vec::new();
    for f in PLAIN_FIELDS.iter().chain(FREQ_FIELDS.iter()) {
        if !values.contains_key(*f) {
            missing.push(f);
        }
    }
    for f in FREQ_FIELDS {
        if values.contains_key(f) && !flags.contains_key(f) {
            return Err(parse_err(origin, format!("missing unit flag `{f}_is_angular` for `{f}`")));
        }
    }
    if !missing.is_empty() {
        return Err(parse_err(origin, format!("missing required keys: {}", missing.join(", "))));
    }

    let freq = |name: &str| -> f64 {
        let v = values[name];
        if flags[name] {
            v
        } else {
            TWO_PI * v
        }
    };

    let n_atoms_f = values["n_atoms"];
    if n_atoms_f < 1.0 || n_atoms_f.fract() != 0.0 || n_atoms_f > u64::MAX as f64 {
        return Err(parse_err(origin, format!("`n_atoms` must be a positive integer, got {n_atoms_f}")));
    }

    let params = SystemParams {
        n_atoms: n_atoms_f as u64,
        cavity_length: values["cavity_length"],
        pump_wavelength: values["pump_wavelength"],
        kappa: freq("kappa"),
        g0: freq("g0"),
        delta_a: freq("delta_a"),
        omega_r: freq("omega_r"),
        omega_sw: freq("omega_sw"),
        gamma_c: freq("gamma_c"),
        mirror_mass: values["mirror_mass"],
        omega_m: freq("omega_m"),
        gamma_m: freq("gamma_m"),
        eta: freq("eta"),
        delta_c: freq("delta_c"),
        temperature: values["temperature"],
        n_ph: values["n_ph"],
        phase_noise: PhaseNoiseParams {
            gamma_l: freq("gamma_l"),
            omega_n: freq("omega_n"),
            gamma_tilde: freq("gamma_tilde"),
        },
    };
    params.validate()?;
    Ok(params)
}

/// Serialize to the canonical file form: keys in declaration order, all
/// frequencies written in rad/s with `_is_angular = true`. Parsing the
/// output reproduces the input exactly.
pub fn serialize_params(p: &SystemParams) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# bec-optomech parameter file (canonical form, all frequencies rad/s)");
    let _ = writeln!(s, "n_atoms = {}", p.n_atoms);
    let _ = writeln!(s, "cavity_length = {:e}", p.cavity_length);
    let _ = writeln!(s, "pump_wavelength = {:e}", p.pump_wavelength);
    let _ = writeln!(s, "mirror_mass = {:e}", p.mirror_mass);
    let _ = writeln!(s, "temperature = {:e}", p.temperature);
    let _ = writeln!(s, "n_ph = {:e}", p.n_ph);
    let freq_values = [
        ("kappa", p.kappa),
        ("g0", p.g0),
        ("delta_a", p.delta_a),
        ("omega_r", p.omega_r),
        ("omega_sw", p.omega_sw),
        ("gamma_c", p.gamma_c),
        ("omega_m", p.omega_m),
        ("gamma_m", p.gamma_m),
        ("eta", p.eta),
        ("delta_c", p.delta_c),
        ("gamma_l", p.phase_noise.gamma_l),
        ("omega_n", p.phase_noise.omega_n),
        ("gamma_tilde", p.phase_noise.gamma_tilde),
    ];
    for (name, v) in freq_values {
        let _ = writeln!(s, "{name} = {v:e}");
        let _ = writeln!(s, "{name}_is_angular = true");
    }
    s
}

/// Apply a `key=value` override (CLI `--override`). Frequency values are
/// taken as rad/s. `n_atoms` accepts integer values only.
pub fn apply_override(p: &mut SystemParams, key: &str, value: &str) -> Result<()> {
    let bad = |reason: String| Error::InvalidSpec(format!("override `{key}={value}`: {reason}"));
    let v: f64 = value
        .parse()
        .map_err(|_| bad("not a number".to_string()))?;
    match key {
        "n_atoms" => {
            if v < 1.0 || v.fract() != 0.0 {
                return Err(bad("must be a positive integer".into()));
            }
            p.n_atoms = v as u64;
        }
        "cavity_length" => p.cavity_length = v,
        "pump_wavelength" => p.pump_wavelength = v,
        "kappa" => p.kappa = v,
        "g0" => p.g0 = v,
        "delta_a" => p.delta_a = v,
        "omega_r" => p.omega_r = v,
        "omega_sw" => p.omega_sw = v,
        "gamma_c" => p.gamma_c = v,
        "mirror_mass" => p.mirror_mass = v,
        "omega_m" => p.omega_m = v,
        "gamma_m" => p.gamma_m = v,
        "eta" => p.eta = v,
        "delta_c" => p.delta_c = v,
        "temperature" => p.temperature = v,
        "n_ph" => p.n_ph = v,
        "gamma_l" => p.phase_noise.gamma_l = v,
        "omega_n" => p.phase_noise.omega_n = v,
        "gamma_tilde" => p.phase_noise.gamma_tilde = v,
        other => return Err(Error::InvalidSpec(format!("unknown override key `{other}`"))),
    }
    Ok(())
}
