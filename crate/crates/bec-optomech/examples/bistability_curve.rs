//! Intracavity photon number versus cavity-pump detuning at strong pump,
//! showing the fold into optical bistability on the positive-detuning side
//! (the standard-parameter version of the photon-number figure).
//!
//! ```bash
//! cargo run --release --example bistability_curve
//! ```

use bec_optomech::experiment::{run, ExperimentKind, ExperimentSpec, GridSpec};
use bec_optomech::model::derive;
use bec_optomech::params::paper_defaults;
use bec_optomech::steadystate::solve_at_delta_c;

fn main() -> bec_optomech::Result<()> {
    let params = paper_defaults(); // eta = 100 kappa
    let model = derive(&params)?;

    // where does the cubic fold into three roots?
    let mut fold_at = None;
    for i in 0..=3000 {
        let dc = params.kappa * (-150.0 + 0.1 * i as f64);
        if solve_at_delta_c(&model, &params, dc).len() > 1 {
            fold_at = Some(dc / params.kappa);
            break;
        }
    }
    match fold_at {
        Some(x) => println!("bistability onset near delta_c = {x:.1} kappa"),
        None => println!("single-valued over the scanned range"),
    }

    // a few sample points along the curve
    println!("{:>10} {:>12} {:>14} {:>8}", "dc/kappa", "|alpha|^2", "Delta_d/w_m", "roots");
    for x in [-150.0, -60.0, -15.0, 0.0, 30.0, 80.0, 150.0] {
        let states = solve_at_delta_c(&model, &params, x * params.kappa);
        for s in &states {
            println!(
                "{x:>10.1} {:>12.4} {:>14.1} {:>8}",
                s.photon_number,
                s.delta_d / params.omega_m,
                states.len()
            );
        }
    }

    // full curve with stability flags and the selected branch
    let mut spec = ExperimentSpec::new(ExperimentKind::PhotonSweep, params);
    spec.grid = GridSpec::new(-150.0, 150.0, 601)?;
    let summary = run(&spec, "out/bistability_curve")?;
    println!("curve written to {}", summary.csv_paths[0].display());
    Ok(())
}
