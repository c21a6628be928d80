//! Cross-validate the Lyapunov covariance against a seeded Euler-Maruyama
//! ensemble at the main operating point, the same comparison the
//! `becsim oracle-check` subcommand runs.
//!
//! The stochastic estimate carries componentwise standard errors from
//! trajectory batching; the table below prints the worst deviations in
//! units of those errors.
//!
//! ```bash
//! cargo run --release --example covariance_oracle
//! ```

use bec_optomech::experiment::oracle_sde_config;
use bec_optomech::gaussian::solve_lyapunov;
use bec_optomech::linsys::{build_linear_system, debug_dump};
use bec_optomech::model::derive;
use bec_optomech::params::paper_defaults;
use bec_optomech::phasenoise::simulate_sde;
use bec_optomech::steadystate::solve_steady_state;

fn main() -> bec_optomech::Result<()> {
    let params = paper_defaults();
    let model = derive(&params)?;
    let ss = solve_steady_state(&model, &params)[0];
    let sys = build_linear_system(&model, &params, &ss);
    println!("{}", debug_dump(&sys));

    let cm = solve_lyapunov(&sys)?;
    println!("Lyapunov residual: {:.2e}", cm.residual);

    let cfg = oracle_sde_config(&sys, 23)?;
    println!(
        "integrating {} trajectories x {} steps at dt = {:.2e} s ...",
        cfg.n_trajectories, cfg.n_steps, cfg.dt
    );
    let est = simulate_sde(&sys, &cfg)?;

    let mut rows: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..8 {
        for j in i..8 {
            let z = (est.v_est[(i, j)] - cm.v[(i, j)]).abs() / est.stderr[(i, j)];
            rows.push((z, i, j));
        }
    }
    rows.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    println!("{:>5} {:>14} {:>14} {:>12} {:>6}", "(i,j)", "lyapunov", "monte carlo", "stderr", "z");
    for &(z, i, j) in rows.iter().take(8) {
        println!(
            "({i},{j}) {:>14.6e} {:>14.6e} {:>12.3e} {z:>6.2}",
            cm.v[(i, j)],
            est.v_est[(i, j)],
            est.stderr[(i, j)]
        );
    }
    let worst = rows[0].0;
    println!(
        "worst deviation: {worst:.2} sigma -> {}",
        if worst <= 3.0 { "agreement within 3 sigma" } else { "DISAGREEMENT" }
    );
    Ok(())
}
