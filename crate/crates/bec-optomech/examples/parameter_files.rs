//! The parameter-file format: explicit `_is_angular` unit flags, parsing
//! with field-level diagnostics, canonical serialization, and overrides.
//!
//! ```bash
//! cargo run --example parameter_files
//! ```

use bec_optomech::model::derive;
use bec_optomech::params::{apply_override, parse_params_str, paper_defaults, serialize_params};

fn main() -> bec_optomech::Result<()> {
    // the shipped preset, in mixed conventions (Hz values flagged false)
    let preset = include_str!("../assets/paper_defaults.params");
    let parsed = parse_params_str(preset, "assets/paper_defaults.params")?;
    assert_eq!(parsed, paper_defaults());
    println!("preset: kappa = {:.4e} rad/s (file said 1.3e6 Hz, flag false)", parsed.kappa);

    // derived constants
    let m = derive(&parsed)?;
    println!(
        "derived: U0 = {:.1} rad/s, omega_c = {:.1} rad/s, xi_m = {:.4} kappa, xi_c = {:.4} kappa",
        m.u0,
        m.omega_c,
        m.xi_m / parsed.kappa,
        m.xi_c / parsed.kappa
    );

    // canonical form is all rad/s and round-trips exactly
    let canonical = serialize_params(&parsed);
    let reparsed = parse_params_str(&canonical, "canonical")?;
    assert_eq!(parsed, reparsed);
    println!("canonical serialization round-trips exactly ({} lines)", canonical.lines().count());

    // unknown keys and missing unit flags are named in errors
    let err = parse_params_str("speed = 9000\n", "demo").unwrap_err();
    println!("unknown key -> {err}");
    let err = parse_params_str("kappa = 1.3e6\n", "demo").unwrap_err();
    println!("missing keys -> {err}");

    // overrides take values in rad/s
    let mut p = parsed.clone();
    apply_override(&mut p, "eta", "2.45e8")?;
    println!("override eta -> {:.3e} rad/s ({:.0} kappa)", p.eta, p.eta / p.kappa);
    Ok(())
}
