//! Semiclassical steady state of the driven cavity.
//!
//! The intracavity amplitude obeys `alpha = -eta / (kappa + i Delta_d)`
//! with the effective detuning `Delta_d = delta_c - beta |alpha|^2`,
//! `beta = xi_m^2/omega_m + xi_c^2/omega_c`. Substituting `n = |alpha|^2`
//! gives the real cubic
//!
//! ```text
//! n (kappa^2 + (delta_c - beta n)^2) = eta^2
//! ```
//!
//! whose nonnegative real roots are the steady-state branches (one or
//! three; optical bistability). The cubic is solved in closed form and the
//! roots are polished by Newton iteration on the original residual.

use num_complex::Complex64;

use crate::model::{DerivedModel, SystemParams};

/// Branch label for a steady-state root, assigned by photon-number order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Unique root (monostable region).
    Single,
    Lower,
    Middle,
    Upper,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Branch::Single => "single",
            Branch::Lower => "lower",
            Branch::Middle => "middle",
            Branch::Upper => "upper",
        };
        f.write_str(s)
    }
}

/// One steady-state solution of the cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// Complex intracavity amplitude (dimensionless).
    pub alpha: Complex64,
    /// Intracavity photon number |alpha|^2 (the cubic root n).
    pub photon_number: f64,
    /// Effective detuning Delta_d = delta_c - beta n [rad/s].
    pub delta_d: f64,
    /// The detuning this state was solved at [rad/s].
    pub delta_c: f64,
    pub branch: Branch,
    /// True when this root came out of merging a near-degenerate pair
    /// (saddle-node fold within tolerance).
    pub fold_point: bool,
    /// Dynamical stability, filled in by the linearized analysis; `None`
    /// until checked.
    pub dynamically_stable: Option<bool>,
}

impl SteadyState {
    pub fn alpha_re(&self) -> f64 {
        self.alpha.re
    }

    pub fn alpha_im(&self) -> f64 {
        self.alpha.im
    }
}

/// Radiation-pressure back-action coefficient
/// `beta = xi_m^2/omega_m + xi_c^2/omega_c` [rad/s].
pub fn backaction_coefficient(model: &DerivedModel, params: &SystemParams) -> f64 {
    model.xi_m * model.xi_m / params.omega_m + model.xi_c * model.xi_c / model.omega_c
}

/// Two roots closer than this merge into one fold-flagged root.
const FOLD_MERGE_REL: f64 = 1e-6;

/// Solve the steady-state cubic for the detuning stored in `params`.
///
/// Returns all real nonnegative roots converted to [`SteadyState`], sorted
/// ascending by photon number. Degenerate pairs within the fold tolerance
/// are merged and flagged.
pub fn solve_steady_state(model: &DerivedModel, params: &SystemParams) -> Vec<SteadyState> {
    solve_at_delta_c(model, params, params.delta_c)
}

/// Same as [`solve_steady_state`] but for an explicit detuning value,
/// which is what grid sweeps use.
pub fn solve_at_delta_c(
    model: &DerivedModel,
    params: &SystemParams,
    delta_c: f64,
) -> Vec<SteadyState> {
    let beta = backaction_coefficient(model, params);
    let roots = photon_number_roots(beta, delta_c, params.kappa, params.eta);
    let mut out: Vec<SteadyState> = roots
        .iter()
        .map(|&(n, fold)| state_from_root(n, fold, beta, delta_c, params))
        .collect();
    let labels: &[Branch] = match out.len() {
        1 => &[Branch::Single],
        2 => &[Branch::Lower, Branch::Upper],
        _ => &[Branch::Lower, Branch::Middle, Branch::Upper],
    };
    for (s, &b) in out.iter_mut().zip(labels) {
        s.branch = b;
    }
    out
}

fn state_from_root(
    n: f64,
    fold: bool,
    beta: f64,
    delta_c: f64,
    params: &SystemParams,
) -> SteadyState {
    let delta_d = delta_c - beta * n;
    let alpha = -Complex64::new(params.eta, 0.0) / Complex64::new(params.kappa, delta_d);
    SteadyState {
        alpha,
        photon_number: n,
        delta_d,
        delta_c,
        branch: Branch::Single,
        fold_point: fold,
        dynamically_stable: None,
    }
}

/// Residual of the self-consistency cubic at photon number `n`.
pub fn cubic_residual(beta: f64, delta_c: f64, kappa: f64, eta: f64, n: f64) -> f64 {
    let x = delta_c - beta * n;
    n * (kappa * kappa + x * x) - eta * eta
}

fn cubic_residual_deriv(beta: f64, delta_c: f64, kappa: f64, n: f64) -> f64 {
    let x = delta_c - beta * n;
    kappa * kappa + x * x - 2.0 * beta * n * x
}

/// Real nonnegative roots of the steady-state cubic, sorted ascending,
/// with fold-merge flags. Closed form (trigonometric/Cardano) plus a
/// Newton polish on the unnormalized residual.
pub fn photon_number_roots(beta: f64, delta_c: f64, kappa: f64, eta: f64) -> Vec<(f64, bool)> {
    if eta == 0.0 {
        // undriven cavity: alpha = 0 is the only root
        return vec![(0.0, false)];
    }
    if beta == 0.0 {
        // linear cavity Lorentzian
        return vec![(eta * eta / (kappa * kappa + delta_c * delta_c), false)];
    }

    // monic cubic n^3 + c2 n^2 + c1 n + c0 = 0
    let c2 = -2.0 * delta_c / beta;
    let c1 = (kappa * kappa + delta_c * delta_c) / (beta * beta);
    let c0 = -eta * eta / (beta * beta);

    let mut roots = real_cubic_roots(c2, c1, c0);
    for r in roots.iter_mut() {
        *r = polish_root(beta, delta_c, kappa, eta, *r);
    }
    roots.retain(|&n| n.is_finite() && n >= 0.0);
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // fold merge
    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(roots.len());
    for n in roots {
        match merged.last_mut() {
            Some((prev, fold)) if (n - *prev).abs() < FOLD_MERGE_REL * n.max(1.0) => {
                *prev = 0.5 * (*prev + n);
                *fold = true;
            }
            _ => merged.push((n, false)),
        }
    }
    merged
}

/// All real roots of the monic cubic x^3 + a x^2 + b x + c.
fn real_cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    // depressed form t^3 + p t + q, x = t - a/3
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = 0.5 * q;
    let disc = half_q * half_q + p * p * p / 27.0;

    if disc > 0.0 {
        // one real root; stable Cardano
        let sq = disc.sqrt();
        let u = (-half_q + sq).cbrt();
        let v = (-half_q - sq).cbrt();
        vec![u + v - shift]
    } else if disc == 0.0 {
        if p == 0.0 {
            vec![-shift]
        } else {
            let double = -3.0 * half_q / p;
            let simple = 3.0 * q / p;
            vec![simple - shift, double - shift, double - shift]
        }
    } else {
        // three distinct real roots; trigonometric form
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .collect()
    }
}

fn polish_root(beta: f64, delta_c: f64, kappa: f64, eta: f64, mut n: f64) -> f64 {
    let mut best = n;
    let mut best_res = cubic_residual(beta, delta_c, kappa, eta, n).abs();
    for _ in 0..60 {
        let f = cubic_residual(beta, delta_c, kappa, eta, n);
        let df = cubic_residual_deriv(beta, delta_c, kappa, n);
        if df == 0.0 {
            break;
        }
        let step = f / df;
        n -= step;
        let res = cubic_residual(beta, delta_c, kappa, eta, n).abs();
        if res < best_res {
            best = n;
            best_res = res;
        }
        if step.abs() <= 1e-17 * n.abs().max(1e-300) {
            break;
        }
    }
    best
}

/// One grid point of a photon-number sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub delta_c: f64,
    pub states: Vec<SteadyState>,
}

/// Per-branch photon-number curves over a detuning grid.
///
/// Branch identity is carried by photon-number order, which is continuous
/// across adjacent grid points away from fold points.
pub fn sweep_photon_number(
    model: &DerivedModel,
    params: &SystemParams,
    delta_c_grid: &[f64],
) -> Vec<SweepPoint> {
    delta_c_grid
        .iter()
        .map(|&dc| SweepPoint {
            delta_c: dc,
            states: solve_at_delta_c(model, params, dc),
        })
        .collect()
}

/// Operating-branch selection policy for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchPolicy {
    /// Follow the branch by root proximity from the previous grid point,
    /// starting from the single-root region. This is the default used by
    /// all figure sweeps.
    #[default]
    Continuation,
    /// Always take the smallest photon-number root.
    MinPhoton,
    /// Always take the largest photon-number root.
    MaxPhoton,
}

/// Pick the operating root at one sweep point. `prev_n` is the photon
/// number selected at the previous grid point (continuation state).
pub fn select_branch(policy: BranchPolicy, states: &[SteadyState], prev_n: Option<f64>) -> usize {
    debug_assert!(!states.is_empty());
    match policy {
        BranchPolicy::MinPhoton => 0,
        BranchPolicy::MaxPhoton => states.len() - 1,
        BranchPolicy::Continuation => match prev_n {
            None => 0,
            Some(prev) => {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, s) in states.iter().enumerate() {
                    let d = (s.photon_number - prev).abs();
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                best
            }
        },
    }
}
