//! Adiabatic elimination of the cavity field.
//!
//! When the cavity decay dominates every other rate, the field follows
//! the slow modes quasi-statically and the three-mode system reduces to
//! two oscillators (mirror and Bogoliubov mode) coupled by an optical
//! spring. The radiation pressure shifts each frequency by
//! `nu_i = g_i^2 Delta_d / (kappa^2 + Delta_d^2)` with
//! `g_i = sqrt(2) xi_i |alpha|`; rescaled quadratures turn the result into
//! two oscillators at `omega_i_eff = sqrt(omega_i (omega_i - nu_i))` with
//! mutual coupling `G_mc = sqrt(nu_m nu_c) / (chi_m chi_c)` and classical
//! phase-noise drives `r_m, r_c` on the amplitude quadratures.
//!
//! On the `Delta_d > 0` side `nu_i` can exceed `omega_i`; the effective
//! frequencies are then undefined and reported as explicit `None` values,
//! never as NaN.

use nalgebra::DMatrix;

use crate::linsys::{Couplings, LinearSystem, ModeLayout};
use crate::model::{DerivedModel, SystemParams};
use crate::steadystate::SteadyState;
use crate::{Error, Result};

/// Effective two-mode model at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveModel {
    /// Operating point: effective detuning [rad/s] and photon number.
    pub delta_d: f64,
    pub photon_number: f64,
    /// Enhanced couplings g_i = sqrt(2) xi_i |alpha| [rad/s].
    pub g_m: f64,
    pub g_c: f64,
    /// Radiation-pressure frequency shifts [rad/s]; sgn(nu) = sgn(Delta_d).
    pub nu_m: f64,
    pub nu_c: f64,
    /// Quadrature rescalings ((omega - nu)/omega)^(1/4); `None` when
    /// nu > omega.
    pub chi_m: Option<f64>,
    pub chi_c: Option<f64>,
    /// Effective frequencies sqrt(omega (omega - nu)) [rad/s]; `None` when
    /// nu > omega.
    pub omega_m_eff: Option<f64>,
    pub omega_c_eff: Option<f64>,
    /// Effective mirror-Bogoliubov coupling [rad/s]; `None` when either
    /// rescaling is undefined.
    pub g_mc: Option<f64>,
    /// Dimensionless phase-noise coupling parameters; `None` when the
    /// rescaling is undefined.
    pub r_m: Option<f64>,
    pub r_c: Option<f64>,
    /// True when omega_i = nu_i exactly for either mode (singular
    /// rescaling).
    pub degenerate: bool,
    /// kappa / max(gamma_m, gamma_c, xi_m, xi_c); the adiabatic picture
    /// assumes this is large.
    pub regime_ratio: f64,
    /// regime_ratio >= threshold (default 10). A warning flag, not an
    /// error.
    pub regime_ok: bool,
}

/// Threshold for the kappa-dominance warning flag.
pub const DEFAULT_REGIME_THRESHOLD: f64 = 10.0;

/// Effective model at a solved steady state.
pub fn effective_model(
    model: &DerivedModel,
    params: &SystemParams,
    ss: &SteadyState,
) -> EffectiveModel {
    from_point(model, params, ss.delta_d, ss.photon_number)
}

/// Effective model with `Delta_d` as the independent variable, using
/// `|alpha|^2 = eta^2 / (kappa^2 + Delta_d^2)` directly instead of the
/// cubic solve. This is how the detuning-parametrized sweeps are defined.
pub fn effective_model_at_detuning(
    model: &DerivedModel,
    params: &SystemParams,
    delta_d: f64,
) -> EffectiveModel {
    let n = params.eta * params.eta / (params.kappa * params.kappa + delta_d * delta_d);
    from_point(model, params, delta_d, n)
}

fn from_point(
    model: &DerivedModel,
    params: &SystemParams,
    delta_d: f64,
    photon_number: f64,
) -> EffectiveModel {
    let kappa = params.kappa;
    let s = delta_d / (kappa * kappa + delta_d * delta_d);
    let amp = photon_number.max(0.0).sqrt();
    let g_m = std::f64::consts::SQRT_2 * model.xi_m * amp;
    let g_c = std::f64::consts::SQRT_2 * model.xi_c * amp;
    let nu_m = g_m * g_m * s;
    let nu_c = g_c * g_c * s;

    let rescaling = |omega: f64, nu: f64| -> (Option<f64>, Option<f64>, bool) {
        let rem = omega - nu;
        if rem > 0.0 {
            let chi = (rem / omega).powf(0.25);
            (Some(chi), Some((omega * rem).sqrt()), false)
        } else {
            (None, None, rem == 0.0)
        }
    };
    let (chi_m, omega_m_eff, deg_m) = rescaling(params.omega_m, nu_m);
    let (chi_c, omega_c_eff, deg_c) = rescaling(model.omega_c, nu_c);

    let g_mc = match (chi_m, chi_c) {
        (Some(cm), Some(cc)) => Some((nu_m * nu_c).sqrt() / (cm * cc)),
        _ => None,
    };
    // nu_i / xi_i written division-free so xi = 0 stays finite
    let r_m = chi_m.map(|cm| 2.0 * model.xi_m * photon_number * s / cm);
    let r_c = chi_c.map(|cc| 2.0 * model.xi_c * photon_number * s / cc);

    let slow_max = params
        .gamma_m
        .max(params.gamma_c)
        .max(model.xi_m.abs())
        .max(model.xi_c.abs());
    let regime_ratio = if slow_max > 0.0 { kappa / slow_max } else { f64::INFINITY };

    EffectiveModel {
        delta_d,
        photon_number,
        g_m,
        g_c,
        nu_m,
        nu_c,
        chi_m,
        chi_c,
        omega_m_eff,
        omega_c_eff,
        g_mc,
        r_m,
        r_c,
        degenerate: deg_m || deg_c,
        regime_ratio,
        regime_ok: regime_ratio >= DEFAULT_REGIME_THRESHOLD,
    }
}

/// Detuning-parametrized sweep of the effective model (the natural way to
/// draw the shift/effective-frequency/coupling curves).
pub fn effective_sweep(
    model: &DerivedModel,
    params: &SystemParams,
    delta_d_grid: &[f64],
) -> Vec<EffectiveModel> {
    delta_d_grid
        .iter()
        .map(|&dd| effective_model_at_detuning(model, params, dd))
        .collect()
}

/// Symmetrized white-noise strength transferred from the field vacuum to
/// the slow modes: the coefficient of delta(t - t') in `<dZ dZ>` is
/// `4 kappa |alpha|^2 / (kappa^2 + Delta_d^2) * (n_ph + 1/2)`.
pub fn delta_z_transfer(kappa: f64, delta_d: f64, photon_number: f64) -> f64 {
    4.0 * kappa * photon_number / (kappa * kappa + delta_d * delta_d)
}

/// Build the reduced 6x6 linear system (q, p, Q, P, psi, theta) implied by
/// the adiabatic equations of motion, including the correlated diffusion
/// the shared field noise dZ induces between the two momentum rows.
///
/// Refuses a degenerate effective model (singular rescaling); points with
/// `nu > omega` produce a valid but dynamically unstable system, which the
/// stability check downstream rejects.
pub fn effective_two_mode_system(
    eff: &EffectiveModel,
    model: &DerivedModel,
    params: &SystemParams,
) -> Result<LinearSystem> {
    if eff.degenerate {
        return Err(Error::Degenerate(format!(
            "omega = nu at Delta_d = {:e} rad/s",
            eff.delta_d
        )));
    }
    let kappa = params.kappa;
    let s = eff.delta_d / (kappa * kappa + eff.delta_d * eff.delta_d);
    // signed mirror-atom spring constant; equals sgn(Delta_d) sqrt(nu_m nu_c)
    let cpl = 2.0 * model.xi_m * model.xi_c * eff.photon_number * s;
    // phase-noise drives nu_i / xi_i, division-free
    let drive_m = 2.0 * model.xi_m * eff.photon_number * s;
    let drive_c = 2.0 * model.xi_c * eff.photon_number * s;
    let pn = &params.phase_noise;

    let mut a = DMatrix::<f64>::zeros(6, 6);
    a[(0, 1)] = params.omega_m;
    a[(1, 0)] = -(params.omega_m - eff.nu_m);
    a[(1, 1)] = -params.gamma_m;
    a[(1, 2)] = -cpl;
    a[(1, 4)] = drive_m;
    a[(2, 3)] = model.omega_c;
    a[(3, 0)] = -cpl;
    a[(3, 2)] = -(model.omega_c - eff.nu_c);
    a[(3, 3)] = -params.gamma_c;
    a[(3, 4)] = drive_c;
    a[(4, 5)] = pn.omega_n;
    a[(5, 4)] = -pn.omega_n;
    a[(5, 5)] = -pn.gamma_tilde;

    let z = delta_z_transfer(kappa, eff.delta_d, eff.photon_number) * (params.n_ph + 0.5);
    let mut d = DMatrix::<f64>::zeros(6, 6);
    d[(1, 1)] = params.gamma_m * (2.0 * model.n_m + 1.0) + model.xi_m * model.xi_m * z;
    d[(3, 3)] = params.gamma_c * (2.0 * model.n_c + 1.0) + model.xi_c * model.xi_c * z;
    // dn_2 = dp_in + xi_m dZ and dn_4 = dP_in - xi_c dZ share dZ with
    // opposite signs, hence the negative cross term
    d[(1, 3)] = -model.xi_m * model.xi_c * z;
    d[(3, 1)] = d[(1, 3)];
    d[(5, 5)] = 2.0 * pn.gamma_l * pn.omega_n * pn.omega_n;

    Ok(LinearSystem {
        a,
        d,
        layout: ModeLayout::REDUCED,
        couplings: Couplings {
            g_rm: 0.0,
            g_im: 0.0,
            g_rc: 0.0,
            g_ic: 0.0,
        },
        stability_epsilon: 1e-9 * kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{log_negativity, solve_lyapunov, ModePair};
    use crate::model::derive;
    use crate::params::paper_defaults;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn fig2_setup() -> (DerivedModel, SystemParams) {
        // eta = 30 kappa; derived couplings land on xi_c ~ 0.2 kappa,
        // xi_m ~ 0.05 kappa
        let mut p = paper_defaults();
        p.eta = 30.0 * p.kappa;
        let m = derive(&p).unwrap();
        (m, p)
    }

    #[test]
    fn zero_detuning_kills_all_shifts() {
        let (m, p) = fig2_setup();
        let eff = effective_model_at_detuning(&m, &p, 0.0);
        assert_eq!(eff.nu_m, 0.0);
        assert_eq!(eff.nu_c, 0.0);
        assert_eq!(eff.omega_m_eff, Some(p.omega_m));
        assert_eq!(eff.omega_c_eff, Some(m.omega_c));
        assert_eq!(eff.g_mc, Some(0.0));
        assert_eq!(eff.r_m, Some(0.0));
        assert_eq!(eff.r_c, Some(0.0));
    }

    #[test]
    fn shift_is_odd_in_detuning() {
        let (m, p) = fig2_setup();
        for x in [0.3, 1.0, 7.5, 40.0] {
            let plus = effective_model_at_detuning(&m, &p, x * p.kappa);
            let minus = effective_model_at_detuning(&m, &p, -x * p.kappa);
            assert_relative_eq!(plus.nu_m, -minus.nu_m, max_relative = 1e-12);
            assert_relative_eq!(plus.nu_c, -minus.nu_c, max_relative = 1e-12);
            assert_eq!(plus.nu_m.signum(), x.signum());
        }
    }

    #[test]
    fn shift_maximum_at_kappa_over_sqrt3() {
        // dense-grid argmax of |nu(Delta_d)| with |alpha|^2 substituted;
        // the analytic optimum of |x| / (kappa^2 + x^2)^2 is kappa/sqrt(3)
        let (m, p) = fig2_setup();
        let mut best_x = 0.0;
        let mut best = 0.0;
        let n = 400_001;
        for i in 0..n {
            let x = p.kappa * (-3.0 + 6.0 * i as f64 / (n - 1) as f64);
            let nu = effective_model_at_detuning(&m, &p, x).nu_m.abs();
            if nu > best {
                best = nu;
                best_x = x;
            }
        }
        let expected = p.kappa / 3.0f64.sqrt();
        assert!(
            (best_x.abs() - expected).abs() < 2.0 * 6.0 * p.kappa / (n - 1) as f64,
            "argmax |nu| at {:.6} kappa, expected 1/sqrt(3) = {:.6} kappa",
            best_x.abs() / p.kappa,
            expected / p.kappa
        );
    }

    #[test]
    fn coupling_vanishes_far_detuned() {
        let (m, p) = fig2_setup();
        let near = effective_model_at_detuning(&m, &p, -2.0 * p.kappa).g_mc.unwrap();
        let far = effective_model_at_detuning(&m, &p, -3000.0 * p.kappa).g_mc.unwrap();
        assert!(far < 1e-6 * near, "G_mc must decay: near {near:e}, far {far:e}");
    }

    #[test]
    fn coupling_identities() {
        let (m, p) = fig2_setup();
        for x in [-120.0, -35.0, -2.0, -0.4] {
            let eff = effective_model_at_detuning(&m, &p, x * p.kappa);
            let (cm, cc) = (eff.chi_m.unwrap(), eff.chi_c.unwrap());
            // the two printed forms of G_mc agree
            let g1 = eff.g_mc.unwrap();
            let g2 = (eff.nu_m * eff.nu_c).sqrt()
                * (p.omega_m * m.omega_c
                    / ((p.omega_m - eff.nu_m) * (m.omega_c - eff.nu_c)))
                    .powf(0.25);
            assert_relative_eq!(g1, g2, max_relative = 1e-12);
            // r xi chi = nu exactly
            assert_relative_eq!(eff.r_m.unwrap() * m.xi_m * cm, eff.nu_m, max_relative = 1e-12);
            assert_relative_eq!(eff.r_c.unwrap() * m.xi_c * cc, eff.nu_c, max_relative = 1e-12);
            // red side: nu < 0, effective frequencies above the bare ones
            assert!(eff.nu_m < 0.0 && eff.omega_m_eff.unwrap() > p.omega_m);
            assert!(eff.nu_c < 0.0 && eff.omega_c_eff.unwrap() > m.omega_c);
        }
    }

    #[test]
    fn undefined_segment_on_positive_side() {
        let (m, p) = fig2_setup();
        let eff = effective_model_at_detuning(&m, &p, p.kappa / 3.0f64.sqrt());
        assert!(eff.omega_m_eff.is_none());
        assert!(eff.omega_c_eff.is_none());
        assert!(eff.g_mc.is_none());
        assert!(!eff.degenerate);
    }

    #[test]
    fn steady_state_route_matches_detuning_route() {
        let p = paper_defaults();
        let m = derive(&p).unwrap();
        let ss = crate::steadystate::solve_steady_state(&m, &p)[0];
        let a = effective_model(&m, &p, &ss);
        let b = effective_model_at_detuning(&m, &p, ss.delta_d);
        // the cubic solution satisfies |alpha|^2 = eta^2/(kappa^2+Dd^2)
        assert_relative_eq!(a.photon_number, b.photon_number, max_relative = 1e-8);
        assert_relative_eq!(a.nu_c, b.nu_c, max_relative = 1e-8);
    }

    #[test]
    fn delta_z_transfer_from_symbolic_expansion() {
        // expand dZ = (2 sqrt(kappa)/(kappa^2+Dd^2)) [kappa(aR Xin + aI Yin)
        // + Dd (aR Yin - aI Xin)] and sum the squared coefficients
        let p = paper_defaults();
        let m = derive(&p).unwrap();
        let ss = crate::steadystate::solve_steady_state(&m, &p)[0];
        let (ar, ai) = (ss.alpha.re, ss.alpha.im);
        let denom = p.kappa * p.kappa + ss.delta_d * ss.delta_d;
        let pref = 2.0 * p.kappa.sqrt() / denom;
        let c_x = pref * (p.kappa * ar - ss.delta_d * ai);
        let c_y = pref * (p.kappa * ai + ss.delta_d * ar);
        let expanded = c_x * c_x + c_y * c_y;
        assert_relative_eq!(
            expanded,
            delta_z_transfer(p.kappa, ss.delta_d, ss.photon_number),
            max_relative = 1e-8
        );
    }

    #[test]
    fn decoupled_reduced_system_is_thermal() {
        let mut p = paper_defaults();
        p.eta = 0.0;
        p.delta_c = 0.0;
        let m = derive(&p).unwrap();
        let eff = effective_model_at_detuning(&m, &p, 0.0);
        assert_eq!(eff.nu_m, 0.0);
        let sys = effective_two_mode_system(&eff, &m, &p).unwrap();
        let cm = solve_lyapunov(&sys).unwrap();
        let vm = 0.5 * (2.0 * m.n_m + 1.0);
        let vc = 0.5 * (2.0 * m.n_c + 1.0);
        assert_relative_eq!(cm.v[(0, 0)], vm, max_relative = 1e-8);
        assert_relative_eq!(cm.v[(1, 1)], vm, max_relative = 1e-8);
        assert_relative_eq!(cm.v[(2, 2)], vc, max_relative = 1e-8);
        assert_relative_eq!(cm.v[(3, 3)], vc, max_relative = 1e-8);
        // off-diagonal mirror-atom block vanishes
        for i in 0..2 {
            for j in 2..4 {
                assert_abs_diff_eq!(cm.v[(i, j)], 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn reduced_mirror_atom_entanglement_tracks_full_model() {
        // deep-dispersive stable point: the adiabatic picture must
        // reproduce the full 8x8 result to within a modest tolerance
        let p = paper_defaults();
        let m = derive(&p).unwrap();
        let ss = crate::steadystate::solve_steady_state(&m, &p)[0];
        assert!(
            ss.delta_d.abs() >= 20.0 * p.kappa,
            "test point not deep-dispersive: Delta_d = {} kappa",
            ss.delta_d / p.kappa
        );
        let full_sys = crate::linsys::build_linear_system(&m, &p, &ss);
        let full_cm = solve_lyapunov(&full_sys).unwrap();
        let full_en = log_negativity(&full_cm, &full_sys.layout, ModePair::MirrorAtom).unwrap();

        let eff = effective_model(&m, &p, &ss);
        let red_sys = effective_two_mode_system(&eff, &m, &p).unwrap();
        let red_cm = solve_lyapunov(&red_sys).unwrap();
        let red_en = log_negativity(&red_cm, &red_sys.layout, ModePair::MirrorAtom).unwrap();

        assert!(full_en > 0.0);
        assert!(
            (red_en - full_en).abs() / full_en < 0.25,
            "reduced E_N = {red_en}, full E_N = {full_en}"
        );
    }

    #[test]
    fn degenerate_point_refused() {
        let (m, p) = fig2_setup();
        let mut eff = effective_model_at_detuning(&m, &p, -2.0 * p.kappa);
        eff.degenerate = true;
        assert!(matches!(
            effective_two_mode_system(&eff, &m, &p),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn regime_warning_reported() {
        let (m, p) = fig2_setup();
        let eff = effective_model_at_detuning(&m, &p, -10.0 * p.kappa);
        // xi_c ~ 0.2 kappa puts the ratio near 5, below the 10x threshold
        assert!(eff.regime_ratio > 4.0 && eff.regime_ratio < 6.0);
        assert!(!eff.regime_ok);
    }
}
