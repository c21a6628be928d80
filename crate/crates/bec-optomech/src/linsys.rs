//! Linearized fluctuation dynamics: drift matrix A, diffusion matrix D,
//! and dynamical stability.
//!
//! The fluctuation vector is ordered `[q, p, X, Y, Q, P, psi, theta]`:
//! mirror quadratures, optical field quadratures, Bogoliubov quadratures,
//! then the classical laser-phase-noise pair. The classical block drives
//! the quantum modes but is never driven back by them.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::{DerivedModel, SystemParams};
use crate::steadystate::SteadyState;
use crate::{Error, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Positions of the mode quadrature pairs inside the state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeLayout {
    pub dim: usize,
    pub mirror: (usize, usize),
    /// `None` for the adiabatically reduced system.
    pub field: Option<(usize, usize)>,
    pub atom: (usize, usize),
    pub phase: (usize, usize),
}

impl ModeLayout {
    pub const FULL: ModeLayout = ModeLayout {
        dim: 8,
        mirror: (0, 1),
        field: Some((2, 3)),
        atom: (4, 5),
        phase: (6, 7),
    };

    pub const REDUCED: ModeLayout = ModeLayout {
        dim: 6,
        mirror: (0, 1),
        field: None,
        atom: (2, 3),
        phase: (4, 5),
    };

    pub fn axis_labels(&self) -> Vec<&'static str> {
        if self.field.is_some() {
            vec!["q", "p", "X", "Y", "Q", "P", "psi", "theta"]
        } else {
            vec!["q", "p", "Q", "P", "psi", "theta"]
        }
    }
}

/// Effective optomechanical couplings built from the steady-state
/// amplitude: `G_Rm = sqrt(2) alpha_R xi_m` and so on.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Couplings {
    pub g_rm: f64,
    pub g_im: f64,
    pub g_rc: f64,
    pub g_ic: f64,
}

/// Drift matrix A, diffusion matrix D, and bookkeeping for one linearized
/// operating point. Entries of A are rad/s; D holds the symmetrized noise
/// strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub layout: ModeLayout,
    pub couplings: Couplings,
    /// Strict-stability margin: stable iff every Re(eigenvalue) < -epsilon.
    pub stability_epsilon: f64,
}

/// Assemble the full 8x8 system at a steady-state operating point.
pub fn build_linear_system(
    model: &DerivedModel,
    params: &SystemParams,
    ss: &SteadyState,
) -> LinearSystem {
    let (ar, ai) = (ss.alpha.re, ss.alpha.im);
    let couplings = Couplings {
        g_rm: SQRT2 * ar * model.xi_m,
        g_im: SQRT2 * ai * model.xi_m,
        g_rc: SQRT2 * ar * model.xi_c,
        g_ic: SQRT2 * ai * model.xi_c,
    };
    let (omega_m, omega_c) = (params.omega_m, model.omega_c);
    let (kappa, delta_d) = (params.kappa, ss.delta_d);
    let pn = &params.phase_noise;

    let mut a = DMatrix::<f64>::zeros(8, 8);
    // mirror
    a[(0, 1)] = omega_m;
    a[(1, 0)] = -omega_m;
    a[(1, 1)] = -params.gamma_m;
    a[(1, 2)] = couplings.g_rm;
    a[(1, 3)] = couplings.g_im;
    // field
    a[(2, 0)] = -couplings.g_im;
    a[(2, 2)] = -kappa;
    a[(2, 3)] = delta_d;
    a[(2, 4)] = couplings.g_ic;
    a[(2, 6)] = -SQRT2 * ai;
    a[(3, 0)] = couplings.g_rm;
    a[(3, 2)] = -delta_d;
    a[(3, 3)] = -kappa;
    a[(3, 4)] = -couplings.g_rc;
    a[(3, 6)] = SQRT2 * ar;
    // Bogoliubov
    a[(4, 5)] = omega_c;
    a[(5, 2)] = -couplings.g_rc;
    a[(5, 3)] = -couplings.g_ic;
    a[(5, 4)] = -omega_c;
    a[(5, 5)] = -params.gamma_c;
    // classical phase noise
    a[(6, 7)] = pn.omega_n;
    a[(7, 6)] = -pn.omega_n;
    a[(7, 7)] = -pn.gamma_tilde;

    let mut d = DMatrix::<f64>::zeros(8, 8);
    d[(1, 1)] = params.gamma_m * (2.0 * model.n_m + 1.0);
    d[(2, 2)] = kappa * (2.0 * params.n_ph + 1.0);
    d[(3, 3)] = kappa * (2.0 * params.n_ph + 1.0);
    d[(5, 5)] = params.gamma_c * (2.0 * model.n_c + 1.0);
    d[(7, 7)] = 2.0 * pn.gamma_l * pn.omega_n * pn.omega_n;

    LinearSystem {
        a,
        d,
        layout: ModeLayout::FULL,
        couplings,
        stability_epsilon: 1e-9 * kappa,
    }
}

/// Spectrum-based stability verdict.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub stable: bool,
    pub max_real_eig: f64,
    pub eigenvalues: Vec<Complex64>,
}

/// Stable iff every eigenvalue of A satisfies Re(lambda) < -epsilon.
/// Marginal spectra (for example an undamped classical block) are
/// therefore reported unstable.
pub fn check_stability(sys: &LinearSystem) -> Result<StabilityReport> {
    let eigenvalues = eigenvalues_of(&sys.a)?;
    let max_real_eig = eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        stable: max_real_eig < -sys.stability_epsilon,
        max_real_eig,
        eigenvalues,
    })
}

pub(crate) fn eigenvalues_of(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::EigenFailure)?;
    let eig = schur.complex_eigenvalues();
    Ok(eig.iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

/// Rebuild A from the quadratic-form Hamiltonian route (symplectic
/// gradient of the linearized Hamiltonian, plus damping diagonals and the
/// classical phase-noise equations) and return the maximum entrywise
/// deviation from [`build_linear_system`], relative to the largest entry
/// of A. A structural self-test: the two routes must agree to rounding.
pub fn hamiltonian_consistency_residual(
    model: &DerivedModel,
    params: &SystemParams,
    ss: &SteadyState,
    sys: &LinearSystem,
) -> f64 {
    let (ar, ai) = (ss.alpha.re, ss.alpha.im);
    let (xi_m, xi_c) = (model.xi_m, model.xi_c);
    let pn = &params.phase_noise;

    // Hessian of deltaH/hbar in (q, p, X, Y, Q, P, psi, theta); the
    // classical pair enters the quantum rows only through the
    // -sqrt(2)(aR X + aI Y) psi cross terms.
    let mut h = DMatrix::<f64>::zeros(8, 8);
    h[(0, 0)] = params.omega_m;
    h[(1, 1)] = params.omega_m;
    h[(2, 2)] = ss.delta_d;
    h[(3, 3)] = ss.delta_d;
    h[(4, 4)] = model.omega_c;
    h[(5, 5)] = model.omega_c;
    h[(6, 6)] = pn.omega_n;
    h[(7, 7)] = pn.omega_n;
    let sym_set = |h: &mut DMatrix<f64>, i: usize, j: usize, v: f64| {
        h[(i, j)] = v;
        h[(j, i)] = v;
    };
    sym_set(&mut h, 0, 2, -SQRT2 * ar * xi_m);
    sym_set(&mut h, 0, 3, -SQRT2 * ai * xi_m);
    sym_set(&mut h, 4, 2, SQRT2 * ar * xi_c);
    sym_set(&mut h, 4, 3, SQRT2 * ai * xi_c);
    sym_set(&mut h, 6, 2, -SQRT2 * ar);
    sym_set(&mut h, 6, 3, -SQRT2 * ai);

    let mut a = DMatrix::<f64>::zeros(8, 8);
    // canonical pairs: position row = +dH/dp, momentum row = -dH/dq
    for &(iq, ip) in &[(0usize, 1usize), (2, 3), (4, 5)] {
        for j in 0..8 {
            a[(iq, j)] = h[(ip, j)];
            a[(ip, j)] = -h[(iq, j)];
        }
    }
    // the classical pair is not canonical: its rows come straight from the
    // phase-noise equations and ignore the quantum modes
    a[(6, 7)] = pn.omega_n;
    a[(7, 6)] = -pn.omega_n;
    a[(7, 7)] = -pn.gamma_tilde;
    // damping diagonals
    a[(1, 1)] -= params.gamma_m;
    a[(2, 2)] -= params.kappa;
    a[(3, 3)] -= params.kappa;
    a[(5, 5)] -= params.gamma_c;

    let scale = sys.a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut max_dev = 0.0f64;
    for i in 0..8 {
        for j in 0..8 {
            max_dev = max_dev.max((a[(i, j)] - sys.a[(i, j)]).abs());
        }
    }
    max_dev / scale
}

/// Plain-text dump of A and D with the axis ordering in the header.
pub fn debug_dump(sys: &LinearSystem) -> String {
    use std::fmt::Write;
    let labels = sys.layout.axis_labels();
    let mut s = String::new();
    let _ = writeln!(s, "# ordering: [{}]", labels.join(", "));
    let _ = writeln!(s, "# drift matrix A [rad/s]");
    for i in 0..sys.layout.dim {
        let row: Vec<String> = (0..sys.layout.dim)
            .map(|j| format!("{:>14.6e}", sys.a[(i, j)]))
            .collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    let _ = writeln!(s, "# diffusion matrix D");
    for i in 0..sys.layout.dim {
        let row: Vec<String> = (0..sys.layout.dim)
            .map(|j| format!("{:>14.6e}", sys.d[(i, j)]))
            .collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derive;
    use crate::params::paper_defaults;
    use crate::steadystate::solve_steady_state;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn paper_point() -> (crate::DerivedModel, crate::SystemParams, SteadyState) {
        let p = paper_defaults();
        let m = derive(&p).unwrap();
        let ss = solve_steady_state(&m, &p)[0];
        (m, p, ss)
    }

    fn synthetic_state(alpha: Complex64, delta_d: f64) -> SteadyState {
        SteadyState {
            alpha,
            photon_number: alpha.norm_sqr(),
            delta_d,
            delta_c: 0.0,
            branch: crate::steadystate::Branch::Single,
            fold_point: false,
            dynamically_stable: None,
        }
    }

    #[test]
    fn matches_printed_matrix_entries() {
        let (m, p, ss) = paper_point();
        let sys = build_linear_system(&m, &p, &ss);
        let (ar, ai) = (ss.alpha.re, ss.alpha.im);
        assert_eq!(sys.a[(0, 1)], p.omega_m);
        assert_eq!(sys.a[(1, 2)], SQRT2 * ar * m.xi_m);
        assert_eq!(sys.a[(2, 3)], ss.delta_d);
        assert_eq!(sys.a[(2, 6)], -SQRT2 * ai);
        assert_eq!(sys.a[(3, 6)], SQRT2 * ar);
        assert_eq!(sys.a[(5, 2)], -SQRT2 * ar * m.xi_c);
        assert_eq!(sys.a[(5, 3)], -SQRT2 * ai * m.xi_c);
        assert_eq!(sys.a[(7, 7)], -p.phase_noise.gamma_tilde);
        // no direct mirror-atom coupling
        assert_eq!(sys.a[(1, 4)], 0.0);
        assert_eq!(sys.a[(1, 5)], 0.0);
        assert_eq!(sys.a[(5, 0)], 0.0);
        assert_eq!(sys.a[(5, 1)], 0.0);
        // classical block is uninfluenced by quantum modes
        for i in 6..8 {
            for j in 0..6 {
                assert_eq!(sys.a[(i, j)], 0.0);
            }
        }
        // diffusion entries
        assert_eq!(sys.d[(0, 0)], 0.0);
        assert_eq!(sys.d[(1, 1)], p.gamma_m * (2.0 * m.n_m + 1.0));
        assert_eq!(sys.d[(2, 2)], p.kappa);
        assert_eq!(
            sys.d[(7, 7)],
            2.0 * p.phase_noise.gamma_l * p.phase_noise.omega_n * p.phase_noise.omega_n
        );
        assert!(sys.d.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn undriven_system_decouples() {
        let mut p = paper_defaults();
        p.eta = 0.0;
        let m = derive(&p).unwrap();
        let ss = solve_steady_state(&m, &p)[0];
        let sys = build_linear_system(&m, &p, &ss);
        assert_eq!(sys.couplings.g_rm, 0.0);
        assert_eq!(sys.couplings.g_ic, 0.0);
        // block diagonal: three oscillators plus the classical block
        for i in 0..8 {
            for j in 0..8 {
                if (i / 2) != (j / 2) {
                    assert_eq!(sys.a[(i, j)], 0.0, "A[{i},{j}] nonzero");
                }
            }
        }
        let rep = check_stability(&sys).unwrap();
        assert!(rep.stable, "decoupled damped oscillators must be stable");
    }

    #[test]
    fn zero_linewidth_kills_phase_drive() {
        let mut p = paper_defaults();
        p.phase_noise.gamma_l = 0.0;
        let m = derive(&p).unwrap();
        let ss = solve_steady_state(&m, &p)[0];
        let sys = build_linear_system(&m, &p, &ss);
        assert_eq!(sys.d[(7, 7)], 0.0);
    }

    #[test]
    fn real_alpha_drives_only_y_row() {
        let (m, p, _) = paper_point();
        let ss = synthetic_state(Complex64::new(2.5, 0.0), -40.0 * p.kappa);
        let sys = build_linear_system(&m, &p, &ss);
        assert_eq!(sys.couplings.g_im, 0.0);
        assert_eq!(sys.couplings.g_ic, 0.0);
        assert_eq!(sys.a[(2, 6)], 0.0);
        assert_relative_eq!(sys.a[(3, 6)], SQRT2 * 2.5, max_relative = 1e-15);
        // cross-checked against the independent Hamiltonian expansion
        let res = hamiltonian_consistency_residual(&m, &p, &ss, &sys);
        assert!(res < 1e-12, "residual {res:e}");
    }

    #[test]
    fn consistency_residual_fuzz() {
        let (m, p, _) = paper_point();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let alpha = Complex64::new(
                rng.random_range(-100.0..100.0),
                rng.random_range(-100.0..100.0),
            );
            let delta_d = rng.random_range(-1e9..1e9);
            let ss = synthetic_state(alpha, delta_d);
            let sys = build_linear_system(&m, &p, &ss);
            let res = hamiltonian_consistency_residual(&m, &p, &ss, &sys);
            assert!(res < 1e-12, "residual {res:e} for alpha {alpha}, delta_d {delta_d:e}");
        }
    }

    #[test]
    fn zero_coupling_residual_exactly_zero() {
        let (m, p, _) = paper_point();
        let ss = synthetic_state(Complex64::new(0.0, 0.0), p.delta_c);
        let sys = build_linear_system(&m, &p, &ss);
        assert_eq!(hamiltonian_consistency_residual(&m, &p, &ss, &sys), 0.0);
    }

    #[test]
    fn marginal_classical_block_reported_unstable() {
        let mut p = paper_defaults();
        p.phase_noise.gamma_tilde = 0.0;
        let m = derive(&p).unwrap();
        let ss = solve_steady_state(&m, &p)[0];
        let sys = build_linear_system(&m, &p, &ss);
        let rep = check_stability(&sys).unwrap();
        assert!(!rep.stable, "undamped classical oscillator is marginal, not stable");
        assert!(rep.max_real_eig.abs() < 1e-3 * p.kappa);
    }

    /// Deterministic RK4 integration of du/dt = A u; oracle for the
    /// stability verdict.
    fn integrate_norm_growth(a: &DMatrix<f64>, t_final: f64, dt: f64) -> f64 {
        let n = a.nrows();
        let mut u = nalgebra::DVector::<f64>::from_element(n, 1.0 / (n as f64).sqrt());
        let u0 = u.norm();
        let steps = (t_final / dt).ceil() as usize;
        for _ in 0..steps {
            let k1 = a * &u;
            let k2 = a * (&u + &k1 * (dt / 2.0));
            let k3 = a * (&u + &k2 * (dt / 2.0));
            let k4 = a * (&u + &k3 * dt);
            u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        u.norm() / u0
    }

    #[test]
    fn parametric_instability_flagged_and_diverges() {
        // strong drive with the field tuned near -omega_m: two-mode
        // squeezing overwhelms the damping
        let (m, p, _) = paper_point();
        let ss = synthetic_state(Complex64::new(30.0, 0.0), -p.omega_m);
        let sys = build_linear_system(&m, &p, &ss);
        let rep = check_stability(&sys).unwrap();
        assert!(!rep.stable, "expected instability, max Re = {:e}", rep.max_real_eig);
        assert!(rep.max_real_eig > 0.0);
        // time-domain oracle: the norm must grow
        let growth = integrate_norm_growth(&sys.a, 20.0 / rep.max_real_eig, 0.02 / p.kappa);
        assert!(growth > 1e3, "expected divergence, growth = {growth:e}");
    }

    #[test]
    fn paper_operating_point_is_stable_and_decays() {
        let (m, p, ss) = paper_point();
        let sys = build_linear_system(&m, &p, &ss);
        let rep = check_stability(&sys).unwrap();
        assert!(rep.stable, "max Re = {:e}", rep.max_real_eig);
        assert_eq!(rep.eigenvalues.len(), 8);
    }

    #[test]
    fn debug_dump_names_ordering() {
        let (m, p, ss) = paper_point();
        let sys = build_linear_system(&m, &p, &ss);
        let dump = debug_dump(&sys);
        assert!(dump.contains("[q, p, X, Y, Q, P, psi, theta]"));
        assert!(dump.contains("drift matrix A"));
        assert!(dump.contains("diffusion matrix D"));
    }
}
