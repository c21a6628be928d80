//! Classical laser-phase-noise model: analytic power spectrum and a
//! stochastic time-domain integrator.
//!
//! The integrator serves as the covariance oracle for the whole linear
//! system: the quantum input noises are emulated as classical Gaussian
//! white noises with the same symmetrized second moments, which reproduces
//! the symmetrized stationary covariance of a linear system exactly in
//! expectation. That is an oracle technique for checking the Lyapunov
//! solution, not a physics claim.
//!
//! The optional trajectory dump writes little-endian binary: the magic
//! bytes `BOTJ`, a u32 format version (1), a u32 state dimension, a u64
//! row count, one f64 sample spacing in seconds, then rows of `dim` f64
//! state samples.

use std::io::Write;
use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::linsys::{check_stability, LinearSystem};
use crate::model::PhaseNoiseParams;
use crate::{Error, Result};

/// One point of the analytic phase-noise power spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpectrumPoint {
    pub omega: f64,
    pub s: f64,
}

/// Analytic spectrum of the phase rate delta-psi:
/// `S(omega) = 2 Gamma_l omega_N^4 / ((omega^2 - omega_N^2)^2
///             + gamma_tilde^2 omega^2)`.
pub fn spectrum_at(pn: &PhaseNoiseParams, omega: f64) -> f64 {
    let wn2 = pn.omega_n * pn.omega_n;
    let w2 = omega * omega;
    let diff = w2 - wn2;
    2.0 * pn.gamma_l * wn2 * wn2 / (diff * diff + pn.gamma_tilde * pn.gamma_tilde * w2)
}

/// Evaluate the analytic spectrum on a grid.
pub fn spectrum(pn: &PhaseNoiseParams, omega_grid: &[f64]) -> Vec<NoiseSpectrumPoint> {
    omega_grid
        .iter()
        .map(|&omega| NoiseSpectrumPoint {
            omega,
            s: spectrum_at(pn, omega),
        })
        .collect()
}

/// Location of the spectral maximum: `sqrt(omega_N^2 - gamma_tilde^2/2)`
/// in the underdamped regime, zero otherwise.
pub fn spectrum_peak_frequency(pn: &PhaseNoiseParams) -> f64 {
    let arg = pn.omega_n * pn.omega_n - 0.5 * pn.gamma_tilde * pn.gamma_tilde;
    if arg > 0.0 {
        arg.sqrt()
    } else {
        0.0
    }
}

/// The classical phase-noise pair as a standalone 2x2 linear system. Its
/// dynamics inside the full 8x8 system are exactly autonomous, so spectrum
/// estimation can run on this block alone.
pub fn classical_block_system(pn: &PhaseNoiseParams) -> LinearSystem {
    let mut a = DMatrix::<f64>::zeros(2, 2);
    a[(0, 1)] = pn.omega_n;
    a[(1, 0)] = -pn.omega_n;
    a[(1, 1)] = -pn.gamma_tilde;
    let mut d = DMatrix::<f64>::zeros(2, 2);
    d[(1, 1)] = 2.0 * pn.gamma_l * pn.omega_n * pn.omega_n;
    LinearSystem {
        a,
        d,
        layout: crate::linsys::ModeLayout {
            dim: 2,
            mirror: (0, 1),
            field: None,
            atom: (0, 1),
            phase: (0, 1),
        },
        couplings: crate::linsys::Couplings {
            g_rm: 0.0,
            g_im: 0.0,
            g_rc: 0.0,
            g_ic: 0.0,
        },
        stability_epsilon: 1e-9 * pn.omega_n,
    }
}

/// Initial state distribution for SDE trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitState {
    Zero,
    /// Draw each quadrature pair from its own decoupled stationary
    /// distribution (variance `(D_ii + D_jj) / (2 |A_ii + A_jj|)` per
    /// block). Shortens the burn-in transient; the couplings still have
    /// to equilibrate during burn-in.
    #[default]
    DecoupledThermal,
}

/// Euler-Maruyama run configuration.
#[derive(Debug, Clone)]
pub struct SdeRunConfig {
    /// Integration step [s].
    pub dt: f64,
    /// Steps per trajectory, including burn-in.
    pub n_steps: usize,
    pub n_trajectories: usize,
    /// Fraction of each trajectory discarded before sampling, in [0, 1).
    pub burn_in_fraction: f64,
    pub seed: u64,
    /// Covariance samples are taken every this many steps.
    pub sample_stride: usize,
    pub init: InitState,
    /// When set, the sampled states of trajectory 0 are written here.
    pub dump_path: Option<PathBuf>,
}

impl SdeRunConfig {
    /// Default configuration for a system: `dt = 0.01 / rate` with the
    /// fastest diagonal damping as the rate (the cavity decay for the full
    /// system), clamped so that `dt |A| < 0.1` and so that the
    /// per-eigenmode variance inflation of the explicit scheme stays below
    /// five percent.
    pub fn default_for(sys: &LinearSystem) -> Result<Self> {
        Self::for_system(sys, 0.05)
    }

    /// Like [`SdeRunConfig::default_for`] with an explicit bound on the
    /// relative stationary-variance bias of the fastest eigenmode.
    pub fn for_system(sys: &LinearSystem, max_rel_bias: f64) -> Result<Self> {
        let base_rate = match sys.layout.field {
            Some((ix, _)) => -sys.a[(ix, ix)],
            None => (0..sys.layout.dim)
                .map(|i| sys.a[(i, i)].abs())
                .fold(0.0f64, f64::max),
        };
        if base_rate <= 0.0 {
            return Err(Error::InvalidSdeConfig(
                "no damping found on the diagonal of A".into(),
            ));
        }
        let dt_euler = euler_bias_step(sys)?;
        let dt = (0.01 / base_rate)
            .min(0.1 / infinity_norm(&sys.a) * 0.99)
            .min(max_rel_bias * dt_euler);
        Ok(SdeRunConfig {
            dt,
            n_steps: 200_000,
            n_trajectories: 200,
            burn_in_fraction: 0.2,
            seed: 23,
            sample_stride: 16,
            init: InitState::DecoupledThermal,
            dump_path: None,
        })
    }

    pub fn validate(&self, sys: &LinearSystem) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidSdeConfig("dt must be positive".into()));
        }
        if self.n_steps == 0 || self.n_trajectories == 0 || self.sample_stride == 0 {
            return Err(Error::InvalidSdeConfig(
                "n_steps, n_trajectories, sample_stride must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::InvalidSdeConfig(
                "burn_in_fraction must be in [0, 1)".into(),
            ));
        }
        let norm = infinity_norm(&sys.a);
        if self.dt * norm >= 0.1 {
            return Err(Error::InvalidSdeConfig(format!(
                "dt |A| = {:.3} violates the explicit-scheme bound dt |A| < 0.1",
                self.dt * norm
            )));
        }
        Ok(())
    }
}

fn infinity_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
}

/// Step at which the explicit scheme would inflate the stationary variance
/// of the stiffest eigenmode by 100 percent: `min_i 2|Re l_i| / |l_i|^2`.
fn euler_bias_step(sys: &LinearSystem) -> Result<f64> {
    let eig = check_stability(sys)?.eigenvalues;
    let mut h = f64::INFINITY;
    for l in eig {
        let n2 = l.norm_sqr();
        if n2 > 0.0 && l.re < 0.0 {
            h = h.min(2.0 * (-l.re) / n2);
        }
    }
    if h.is_finite() {
        Ok(h)
    } else {
        Err(Error::InvalidSdeConfig("no damped eigenmodes".into()))
    }
}

/// Monte Carlo covariance estimate with componentwise standard errors
/// from trajectory batching.
#[derive(Debug, Clone)]
pub struct SdeEstimate {
    pub v_est: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
    pub n_trajectories: usize,
    pub samples_per_trajectory: usize,
}

struct TrajectoryPlan {
    n: usize,
    /// h * A, row major.
    a_h: Vec<f64>,
    /// sqrt(h) * noise columns, each of length n.
    noise_cols: Vec<Vec<f64>>,
    init_std: Vec<f64>,
    burn_steps: usize,
    n_steps: usize,
    stride: usize,
    bound: f64,
    seed: u64,
}

impl TrajectoryPlan {
    fn new(sys: &LinearSystem, cfg: &SdeRunConfig) -> Result<Self> {
        cfg.validate(sys)?;
        let n = sys.layout.dim;
        let h = cfg.dt;
        let mut a_h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a_h[i * n + j] = h * sys.a[(i, j)];
            }
        }

        // noise matrix B with B B^T = D via symmetric eigendecomposition;
        // D is diagonal for the full system but carries a momentum-momentum
        // cross block for the reduced one
        let eig = sys.d.clone().symmetric_eigen();
        let d_scale = sys.d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut noise_cols = Vec::new();
        for k in 0..n {
            let lam = eig.eigenvalues[k];
            if lam < -1e-9 * d_scale.max(1e-300) {
                return Err(Error::InvalidSdeConfig(format!(
                    "diffusion matrix not positive semidefinite (eigenvalue {lam:e})"
                )));
            }
            if lam <= 0.0 {
                continue;
            }
            let scale = (lam * h).sqrt();
            let col: Vec<f64> = (0..n).map(|i| scale * eig.eigenvectors[(i, k)]).collect();
            noise_cols.push(col);
        }

        let init_std = match cfg.init {
            InitState::Zero => vec![0.0; n],
            InitState::DecoupledThermal => {
                let mut v = vec![0.0; n];
                for b in 0..n / 2 {
                    let (i, j) = (2 * b, 2 * b + 1);
                    let damping = -(sys.a[(i, i)] + sys.a[(j, j)]);
                    let drive = sys.d[(i, i)] + sys.d[(j, j)];
                    let var = if damping > 0.0 { drive / (2.0 * damping) } else { 0.0 };
                    v[i] = var.sqrt();
                    v[j] = var.sqrt();
                }
                v
            }
        };
        let init_scale = init_std.iter().cloned().fold(0.0f64, f64::max);

        Ok(TrajectoryPlan {
            n,
            a_h,
            noise_cols,
            init_std,
            burn_steps: (cfg.burn_in_fraction * cfg.n_steps as f64).round() as usize,
            n_steps: cfg.n_steps,
            stride: cfg.sample_stride,
            bound: 1e9 * (1.0 + init_scale),
            seed: cfg.seed,
        })
    }

    fn rng_for(&self, traj: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(traj + 1);
        rng
    }

    /// Integrate one trajectory, invoking `on_sample` for every retained
    /// post-burn-in sample.
    fn run(&self, traj: u64, on_sample: impl FnMut(&[f64])) -> Result<()> {
        // monomorphized paths keep the hot loop fully unrolled
        match self.n {
            2 => self.run_fixed::<2>(traj, on_sample),
            6 => self.run_fixed::<6>(traj, on_sample),
            8 => self.run_fixed::<8>(traj, on_sample),
            _ => self.run_fixed_generic(traj, on_sample),
        }
    }

    fn run_fixed<const N: usize>(
        &self,
        traj: u64,
        mut on_sample: impl FnMut(&[f64]),
    ) -> Result<()> {
        debug_assert_eq!(self.n, N);
        let mut a = [[0.0f64; N]; N];
        for i in 0..N {
            for j in 0..N {
                a[i][j] = self.a_h[i * N + j];
            }
        }
        let cols: Vec<[f64; N]> = self
            .noise_cols
            .iter()
            .map(|c| {
                let mut col = [0.0f64; N];
                col.copy_from_slice(c);
                col
            })
            .collect();

        let mut rng = self.rng_for(traj);
        let mut u = [0.0f64; N];
        for i in 0..N {
            if self.init_std[i] > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                u[i] = self.init_std[i] * z;
            }
        }

        let mut next_sample = self.burn_steps;
        let mut next_check = 0usize;
        for step in 0..self.n_steps {
            let mut du = [0.0f64; N];
            for i in 0..N {
                let mut acc = 0.0;
                for j in 0..N {
                    acc += a[i][j] * u[j];
                }
                du[i] = acc;
            }
            for col in &cols {
                let z: f64 = rng.sample(StandardNormal);
                for i in 0..N {
                    du[i] += col[i] * z;
                }
            }
            for i in 0..N {
                u[i] += du[i];
            }
            if step == next_check {
                next_check += 4096;
                let norm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if !norm.is_finite() || norm > self.bound {
                    return Err(Error::SdeDiverged { step, norm });
                }
            }
            if step == next_sample {
                next_sample += self.stride;
                on_sample(&u);
            }
        }
        Ok(())
    }

    fn run_fixed_generic(&self, traj: u64, mut on_sample: impl FnMut(&[f64])) -> Result<()> {
        let n = self.n;
        let mut rng = self.rng_for(traj);
        let mut u = vec![0.0f64; n];
        for i in 0..n {
            if self.init_std[i] > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                u[i] = self.init_std[i] * z;
            }
        }
        let mut du = vec![0.0f64; n];
        let mut next_sample = self.burn_steps;
        for step in 0..self.n_steps {
            for i in 0..n {
                let row = &self.a_h[i * n..(i + 1) * n];
                let mut acc = 0.0;
                for j in 0..n {
                    acc += row[j] * u[j];
                }
                du[i] = acc;
            }
            for col in &self.noise_cols {
                let z: f64 = rng.sample(StandardNormal);
                for i in 0..n {
                    du[i] += col[i] * z;
                }
            }
            for i in 0..n {
                u[i] += du[i];
            }
            if step % 4096 == 0 {
                let norm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if !norm.is_finite() || norm > self.bound {
                    return Err(Error::SdeDiverged { step, norm });
                }
            }
            if step == next_sample {
                next_sample += self.stride;
                on_sample(&u);
            }
        }
        Ok(())
    }

    fn samples_per_trajectory(&self) -> usize {
        (self.n_steps - self.burn_steps).div_ceil(self.stride)
    }
}

/// Integrate `du = A u dt + B dW` (with `B B^T = D`) and return the
/// time-and-ensemble-averaged symmetrized covariance after burn-in, with
/// standard errors from trajectory batching. Seeded runs are
/// bit-reproducible: each trajectory owns a counter-derived RNG stream and
/// the reduction is an in-order compensated sum.
pub fn simulate_sde(sys: &LinearSystem, cfg: &SdeRunConfig) -> Result<SdeEstimate> {
    let plan = TrajectoryPlan::new(sys, cfg)?;
    let n = plan.n;

    if let Some(path) = &cfg.dump_path {
        dump_trajectory(&plan, cfg, path)?;
    }

    let per_traj: Vec<Result<Vec<f64>>> = (0..cfg.n_trajectories as u64)
        .into_par_iter()
        .map(|traj| {
            let mut acc = vec![0.0f64; n * n];
            let mut count = 0usize;
            plan.run(traj, |u| {
                let mut idx = 0;
                for i in 0..n {
                    for j in 0..n {
                        acc[idx] += u[i] * u[j];
                        idx += 1;
                    }
                }
                count += 1;
            })?;
            for x in acc.iter_mut() {
                *x /= count as f64;
            }
            Ok(acc)
        })
        .collect();

    let mut estimates = Vec::with_capacity(cfg.n_trajectories);
    for r in per_traj {
        estimates.push(r?);
    }

    // compensated in-order reduction over trajectories
    let mean = kahan_mean(&estimates, n * n);
    let mut var = vec![0.0f64; n * n];
    for e in &estimates {
        for (k, &x) in e.iter().enumerate() {
            let d = x - mean[k];
            var[k] += d * d;
        }
    }
    let m = estimates.len() as f64;
    let mut v_est = DMatrix::<f64>::zeros(n, n);
    let mut stderr = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            v_est[(i, j)] = mean[i * n + j];
            stderr[(i, j)] = if estimates.len() > 1 {
                (var[i * n + j] / (m - 1.0)).sqrt() / m.sqrt()
            } else {
                f64::INFINITY
            };
        }
    }
    let v_est = (&v_est + v_est.transpose()) * 0.5;

    Ok(SdeEstimate {
        v_est,
        stderr,
        n_trajectories: estimates.len(),
        samples_per_trajectory: plan.samples_per_trajectory(),
    })
}

fn kahan_mean(rows: &[Vec<f64>], len: usize) -> Vec<f64> {
    let mut sum = vec![0.0f64; len];
    let mut comp = vec![0.0f64; len];
    for row in rows {
        for k in 0..len {
            let y = row[k] - comp[k];
            let t = sum[k] + y;
            comp[k] = (t - sum[k]) - y;
            sum[k] = t;
        }
    }
    let m = rows.len() as f64;
    sum.iter().map(|s| s / m).collect()
}

fn dump_trajectory(plan: &TrajectoryPlan, cfg: &SdeRunConfig, path: &PathBuf) -> Result<()> {
    let mut rows: Vec<f64> = Vec::new();
    plan.run(0, |u| rows.extend_from_slice(u))?;
    let n_rows = rows.len() / plan.n;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(b"BOTJ")?;
    w.write_all(&1u32.to_le_bytes())?;
    w.write_all(&(plan.n as u32).to_le_bytes())?;
    w.write_all(&(n_rows as u64).to_le_bytes())?;
    w.write_all(&(cfg.dt * cfg.sample_stride as f64).to_le_bytes())?;
    for x in rows {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// Periodogram-averaged empirical spectrum of the phase-rate variable,
/// with the analytic curve evaluated on the same frequency bins.
#[derive(Debug, Clone)]
pub struct EmpiricalSpectrum {
    pub omega: Vec<f64>,
    pub s_empirical: Vec<f64>,
    pub s_analytic: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_records: usize,
}

impl EmpiricalSpectrum {
    /// (omega, S) at the empirical maximum.
    pub fn peak(&self) -> (f64, f64) {
        let mut best = 0;
        for (k, &s) in self.s_empirical.iter().enumerate() {
            if s > self.s_empirical[best] {
                best = k;
            }
        }
        (self.omega[best], self.s_empirical[best])
    }

    /// Empirical and analytic values at the bin nearest `omega`. Comparing
    /// at a fixed bin avoids the upward selection bias of comparing at the
    /// empirical argmax.
    pub fn at_bin_nearest(&self, omega: f64) -> (f64, f64, f64) {
        let best = self.nearest_bin(omega);
        (self.s_empirical[best], self.s_analytic[best], self.stderr[best])
    }

    /// Empirical and analytic means over the `2k+1` bins centred on the
    /// bin nearest `omega`. At resolutions far below the linewidth this is
    /// the peak value with a sqrt(2k+1) variance reduction.
    pub fn band_mean_near(&self, omega: f64, k: usize) -> (f64, f64) {
        let c = self.nearest_bin(omega);
        let lo = c.saturating_sub(k);
        let hi = (c + k).min(self.omega.len() - 1);
        let m = (hi - lo + 1) as f64;
        let emp = self.s_empirical[lo..=hi].iter().sum::<f64>() / m;
        let ana = self.s_analytic[lo..=hi].iter().sum::<f64>() / m;
        (emp, ana)
    }

    fn nearest_bin(&self, omega: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, &w) in self.omega.iter().enumerate() {
            let d = (w - omega).abs();
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }
}

/// Estimate the spectrum of delta-psi from simulated trajectories: one
/// rectangular-window periodogram per trajectory record, averaged over
/// records. The record length is the largest power of two that fits in the
/// post-burn-in samples.
pub fn spectrum_from_trajectories(
    sys: &LinearSystem,
    cfg: &SdeRunConfig,
) -> Result<EmpiricalSpectrum> {
    let plan = TrajectoryPlan::new(sys, cfg)?;
    if let Some(path) = &cfg.dump_path {
        dump_trajectory(&plan, cfg, path)?;
    }
    let psi_index = sys.layout.phase.0;
    let avail = plan.samples_per_trajectory();
    let n_fft = (1usize << (usize::BITS - 1 - avail.leading_zeros())).max(2);
    if n_fft < 64 {
        return Err(Error::InvalidSdeConfig(format!(
            "record too short for a periodogram ({avail} samples)"
        )));
    }
    let sample_dt = cfg.dt * cfg.sample_stride as f64;

    let records: Vec<Result<Vec<f64>>> = (0..cfg.n_trajectories as u64)
        .into_par_iter()
        .map(|traj| {
            let mut psi = Vec::with_capacity(n_fft);
            plan.run(traj, |u| {
                if psi.len() < n_fft {
                    psi.push(u[psi_index]);
                }
            })?;
            let mut buf: Vec<Complex<f64>> =
                psi.iter().map(|&x| Complex::new(x, 0.0)).collect();
            let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);
            fft.process(&mut buf);
            // S(omega_k) = |X_k|^2 dt / N
            Ok(buf
                .iter()
                .take(n_fft / 2)
                .map(|z| z.norm_sqr() * sample_dt / n_fft as f64)
                .collect())
        })
        .collect();

    let mut periodograms = Vec::with_capacity(cfg.n_trajectories);
    for r in records {
        periodograms.push(r?);
    }
    let half = n_fft / 2;
    let mean = kahan_mean(&periodograms, half);
    let mut stderr = vec![0.0f64; half];
    if periodograms.len() > 1 {
        for p in &periodograms {
            for k in 0..half {
                let d = p[k] - mean[k];
                stderr[k] += d * d;
            }
        }
        let m = periodograms.len() as f64;
        for e in stderr.iter_mut() {
            *e = (*e / (m - 1.0)).sqrt() / m.sqrt();
        }
    } else {
        stderr.fill(f64::INFINITY);
    }

    // the classical block determines the analytic curve
    let (ipsi, itheta) = (sys.layout.phase.0, sys.layout.phase.1);
    let omega_n = sys.a[(ipsi, itheta)];
    let gamma_tilde = -sys.a[(itheta, itheta)];
    let gamma_l = if omega_n != 0.0 {
        sys.d[(itheta, itheta)] / (2.0 * omega_n * omega_n)
    } else {
        0.0
    };
    let pn = PhaseNoiseParams {
        gamma_l,
        omega_n,
        gamma_tilde,
    };

    let omega: Vec<f64> = (0..half)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / (n_fft as f64 * sample_dt))
        .collect();
    let s_analytic = omega.iter().map(|&w| spectrum_at(&pn, w)).collect();

    Ok(EmpiricalSpectrum {
        omega,
        s_empirical: mean,
        s_analytic,
        stderr,
        n_records: periodograms.len(),
    })
}
