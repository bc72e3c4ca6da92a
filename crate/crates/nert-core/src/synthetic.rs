//! Closed-form and ODE-integrated benchmark signals, with the train/test
//! splits used throughout the experiments.

use serde::{Deserialize, Serialize};

use crate::coords::{CoordinateConfig, CoordinateSet, TimeAxis};
use crate::dataset::{Role, SignalDataset};
use crate::error::{Error, Result};
use crate::rng::Rng;

// ── Closed forms ────────────────────────────────────────────────────

/// The introductory regression target sin(50x).
pub fn sine_target(x: f64) -> f64 {
    (50.0 * x).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub mass: f64,
    pub damping: f64,
    pub omega: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl OscillatorParams {
    pub fn undamped() -> Self {
        OscillatorParams { mass: 1.0, damping: 0.0, omega: 50.0, amplitude: 10.0, phase: 0.0 }
    }

    pub fn damped() -> Self {
        OscillatorParams { damping: 4.0, ..Self::undamped() }
    }
}

/// Damped harmonic oscillator: A e^{-(b/2m) t} cos(w t + phi).
pub fn oscillator(t: f64, p: &OscillatorParams) -> f64 {
    p.amplitude * (-(p.damping / (2.0 * p.mass)) * t).exp() * (p.omega * t + p.phase).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelmholtzParams {
    pub a1: f64,
    pub a2: f64,
    pub k: f64,
}

impl Default for HelmholtzParams {
    fn default() -> Self {
        HelmholtzParams { a1: 1.0, a2: 4.0, k: 1.0 }
    }
}

/// Analytic solution u(x,y) = sin(a1 pi x) sin(a2 pi y).
pub fn helmholtz_solution(x: f64, y: f64, p: &HelmholtzParams) -> f64 {
    (p.a1 * std::f64::consts::PI * x).sin() * (p.a2 * std::f64::consts::PI * y).sin()
}

/// Source term q(x,y) of the Helmholtz equation for the same solution.
pub fn helmholtz_source(x: f64, y: f64, p: &HelmholtzParams) -> f64 {
    let pi = std::f64::consts::PI;
    (-(p.a1 * pi).powi(2) - (p.a2 * pi).powi(2) + p.k * p.k) * helmholtz_solution(x, y, p)
}

// ── ODE integration ─────────────────────────────────────────────────

/// Classical 4th-order Runge-Kutta; returns `steps + 1` states including the
/// initial one.
pub fn rk4_trajectory(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    h0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<Vec<Vec<f64>>> {
    if dt <= 0.0 {
        return Err(Error::config("rk4 requires dt > 0"));
    }
    if steps == 0 {
        return Err(Error::config("rk4 requires at least one step"));
    }
    let dim = h0.len();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(h0.to_vec());
    let mut state = h0.to_vec();
    let mut stage = vec![0.0; dim];
    for _ in 0..steps {
        let k1 = f(&state);
        for i in 0..dim {
            stage[i] = state[i] + 0.5 * dt * k1[i];
        }
        let k2 = f(&stage);
        for i in 0..dim {
            stage[i] = state[i] + 0.5 * dt * k2[i];
        }
        let k3 = f(&stage);
        for i in 0..dim {
            stage[i] = state[i] + dt * k3[i];
        }
        let k4 = f(&stage);
        for i in 0..dim {
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if !state[i].is_finite() {
                return Err(Error::numeric("rk4 state became non-finite"));
            }
        }
        out.push(state.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledSpringParams {
    pub m1: f64,
    pub m2: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub c1: f64,
    pub c2: f64,
    pub x1_0: f64,
    pub x2_0: f64,
    pub v1_0: f64,
    pub v2_0: f64,
}

impl Default for CoupledSpringParams {
    fn default() -> Self {
        CoupledSpringParams {
            m1: 1.0,
            m2: 1.0,
            k1: 10.0,
            k2: 15.0,
            k3: 10.0,
            c1: 0.5,
            c2: 0.5,
            x1_0: 1.0,
            x2_0: -1.0,
            v1_0: 0.0,
            v2_0: 0.0,
        }
    }
}

impl CoupledSpringParams {
    /// State layout: (x1, v1, x2, v2).
    pub fn derivative(&self, s: &[f64]) -> Vec<f64> {
        let (x1, v1, x2, v2) = (s[0], s[1], s[2], s[3]);
        let a1 = (-self.k1 * x1 - self.k2 * (x1 - x2) - self.c1 * v1) / self.m1;
        let a2 = (-self.k2 * (x2 - x1) - self.k3 * x2 - self.c2 * v2) / self.m2;
        vec![v1, a1, v2, a2]
    }

    pub fn initial_state(&self) -> Vec<f64> {
        vec![self.x1_0, self.v1_0, self.x2_0, self.v2_0]
    }

    /// Total mechanical energy; decays under damping.
    pub fn energy(&self, s: &[f64]) -> f64 {
        let (x1, v1, x2, v2) = (s[0], s[1], s[2], s[3]);
        0.5 * self.m1 * v1 * v1
            + 0.5 * self.m2 * v2 * v2
            + 0.5 * self.k1 * x1 * x1
            + 0.5 * self.k2 * (x1 - x2) * (x1 - x2)
            + 0.5 * self.k3 * x2 * x2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub h0: [f64; 3],
    pub dt: f64,
    pub horizon: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        LorenzParams {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            h0: [1.0, 1.0, 1.0],
            dt: 0.01,
            horizon: 5.0,
        }
    }
}

impl LorenzParams {
    pub fn derivative(&self, s: &[f64]) -> Vec<f64> {
        vec![
            self.sigma * (s[1] - s[0]),
            s[0] * (self.rho - s[2]) - s[1],
            s[0] * s[1] - self.beta * s[2],
        ]
    }
}

// ── Benchmark datasets ──────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OscillatorTask {
    Interp,
    #[default]
    Extrap,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub seed: u64,
    /// Fraction of train cells carved out (seeded) as validation; 0 keeps
    /// the bare splits.
    pub validation_fraction: f64,
    pub smin: f64,
    pub smax: f64,
    pub sine_points: usize,
    pub sine_max: f64,
    pub sine_boundary: f64,
    pub osc_points: usize,
    pub osc_task: OscillatorTask,
    pub helm_grid: usize,
    pub helm: HelmholtzParams,
    pub spring: CoupledSpringParams,
    pub spring_points: usize,
    pub spring_horizon: f64,
    pub spring_train_end: f64,
    pub lorenz: LorenzParams,
    pub lorenz_train_fraction: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            seed: 0,
            validation_fraction: 0.0,
            smin: 0.0,
            smax: 1.0,
            sine_points: 400,
            sine_max: 3.0,
            sine_boundary: 2.2,
            osc_points: 1000,
            osc_task: OscillatorTask::Extrap,
            helm_grid: 100,
            helm: HelmholtzParams::default(),
            spring: CoupledSpringParams::default(),
            spring_points: 1000,
            spring_horizon: 10.0,
            spring_train_end: 3.0,
            lorenz: LorenzParams::default(),
            lorenz_train_fraction: 0.8,
        }
    }
}

pub const BENCHMARK_NAMES: &[&str] = &[
    "sine50",
    "oscillator-undamped",
    "oscillator-damped",
    "helmholtz2d",
    "coupled-spring",
    "lorenz",
];

pub fn make_benchmark(name: &str, cfg: &BenchmarkConfig) -> Result<SignalDataset> {
    let mut ds = match name {
        "sine50" => sine50_dataset(cfg),
        "oscillator-undamped" => oscillator_dataset(&OscillatorParams::undamped(), cfg),
        "oscillator-damped" => oscillator_dataset(&OscillatorParams::damped(), cfg),
        "helmholtz2d" => helmholtz_dataset(cfg),
        "coupled-spring" => coupled_spring_dataset(&cfg.spring, cfg),
        "lorenz" => lorenz_dataset(cfg),
        other => {
            return Err(Error::config(format!(
                "unknown benchmark '{other}' (expected one of {BENCHMARK_NAMES:?})"
            )))
        }
    }?;
    ds.name = name.to_string();
    if cfg.validation_fraction > 0.0 {
        carve_validation(&mut ds, cfg.validation_fraction, cfg.seed);
    }
    ds.validate()?;
    Ok(ds)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn assemble_univariate(
    ts: Vec<f64>,
    targets: Vec<f64>,
    roles: Vec<Role>,
    feature_names: Vec<String>,
    cfg: &BenchmarkConfig,
) -> Result<SignalDataset> {
    let m = feature_names.len();
    let n = ts.len();
    let train_rows: Vec<bool> = (0..n)
        .map(|i| (0..m).any(|j| roles[i * m + j] == Role::Train))
        .collect();
    let axis = TimeAxis::Index(ts);
    let coord_cfg = CoordinateConfig { smin: cfg.smin, smax: cfg.smax, ..Default::default() };
    let coords = CoordinateSet::build(&axis, m, &coord_cfg, Some(&train_rows))?;
    Ok(SignalDataset {
        name: String::new(),
        coords,
        axis,
        observed: vec![true; n * m],
        targets,
        roles,
        feature_names,
    })
}

fn sine50_dataset(cfg: &BenchmarkConfig) -> Result<SignalDataset> {
    let xs = linspace(0.0, cfg.sine_max, cfg.sine_points);
    let targets: Vec<f64> = xs.iter().map(|&x| sine_target(x)).collect();
    let roles: Vec<Role> = xs
        .iter()
        .map(|&x| if x <= cfg.sine_boundary { Role::Train } else { Role::TestExtrap })
        .collect();
    assemble_univariate(xs, targets, roles, vec!["y".into()], cfg)
}

fn oscillator_dataset(p: &OscillatorParams, cfg: &BenchmarkConfig) -> Result<SignalDataset> {
    let ts = linspace(1.0, 2.0, cfg.osc_points);
    let targets: Vec<f64> = ts.iter().map(|&t| oscillator(t, p)).collect();
    let roles: Vec<Role> = ts
        .iter()
        .map(|&t| match cfg.osc_task {
            OscillatorTask::Interp => {
                if t <= 1.2 || t >= 1.8 {
                    Role::Train
                } else {
                    Role::TestInterp
                }
            }
            OscillatorTask::Extrap => {
                if t <= 1.4 {
                    Role::Train
                } else {
                    Role::TestExtrap
                }
            }
            OscillatorTask::Mixed => {
                if t <= 1.2 || (1.5 <= t && t <= 1.8) {
                    Role::Train
                } else if t < 1.5 {
                    Role::TestInterp
                } else {
                    Role::TestExtrap
                }
            }
        })
        .collect();
    assemble_univariate(ts, targets, roles, vec!["x".into()], cfg)
}

fn helmholtz_dataset(cfg: &BenchmarkConfig) -> Result<SignalDataset> {
    let g = cfg.helm_grid;
    let xs = linspace(1.0, 2.0, g);
    let mut data = Vec::with_capacity(g * g * 2);
    let mut targets = Vec::with_capacity(g * g);
    let mut roles = Vec::with_capacity(g * g);
    for &x in &xs {
        for &y in &xs {
            data.push(x);
            data.push(y);
            targets.push(helmholtz_solution(x, y, &cfg.helm));
            roles.push(if x <= 1.5 && y <= 1.5 { Role::Train } else { Role::TestExtrap });
        }
    }
    let n = g * g;
    let train_rows: Vec<bool> = roles.iter().map(|&r| r == Role::Train).collect();
    let axis = TimeAxis::Spatial { data, dim: 2 };
    let coord_cfg = CoordinateConfig { smin: cfg.smin, smax: cfg.smax, ..Default::default() };
    let coords = CoordinateSet::build(&axis, 1, &coord_cfg, Some(&train_rows))?;
    Ok(SignalDataset {
        name: String::new(),
        coords,
        axis,
        observed: vec![true; n],
        targets,
        roles,
        feature_names: vec!["u".into()],
    })
}

/// Integrate the coupled mass-spring system and resample onto a uniform
/// grid over `[0, horizon]`.
pub fn coupled_spring_dataset(p: &CoupledSpringParams, cfg: &BenchmarkConfig) -> Result<SignalDataset> {
    let n = cfg.spring_points;
    let horizon = cfg.spring_horizon;
    // Integrate at a finer step than the sampling grid, then take every
    // `refine`-th state so grid points are exact RK4 states.
    let refine = 10usize;
    let steps = (n - 1) * refine;
    let dt = horizon / steps as f64;
    let traj = rk4_trajectory(&|s| p.derivative(s), &p.initial_state(), dt, steps)?;
    let ts = linspace(0.0, horizon, n);
    let mut targets = Vec::with_capacity(n * 2);
    let mut roles = Vec::with_capacity(n * 2);
    for (i, &t) in ts.iter().enumerate() {
        let state = &traj[i * refine];
        targets.push(state[0]);
        targets.push(state[2]);
        let role = if t <= cfg.spring_train_end { Role::Train } else { Role::TestExtrap };
        roles.push(role);
        roles.push(role);
    }
    assemble_univariate(ts, targets, roles, vec!["x1".into(), "x2".into()], cfg)
}

fn lorenz_dataset(cfg: &BenchmarkConfig) -> Result<SignalDataset> {
    let p = &cfg.lorenz;
    let steps = (p.horizon / p.dt).round() as usize;
    let traj = rk4_trajectory(&|s| p.derivative(s), &p.h0, p.dt, steps)?;
    let n = steps + 1;
    let ts: Vec<f64> = (0..n).map(|i| i as f64 * p.dt).collect();
    let boundary = p.horizon * cfg.lorenz_train_fraction;
    let mut targets = Vec::with_capacity(n * 3);
    let mut roles = Vec::with_capacity(n * 3);
    for (i, &t) in ts.iter().enumerate() {
        for c in 0..3 {
            targets.push(traj[i][c]);
            roles.push(if t <= boundary { Role::Train } else { Role::TestExtrap });
        }
    }
    assemble_univariate(
        ts,
        targets,
        roles,
        vec!["h1".into(), "h2".into(), "h3".into()],
        cfg,
    )
}

/// Hourly sum-of-sinusoids-plus-trend series with known ground truth, the
/// desk-scale stand-in for the periodic time-series protocol. Daily,
/// half-daily and weekly harmonics ride on a slow linear trend.
pub fn make_periodic_series(n: usize, seed: u64) -> crate::ingest::RawSeries {
    use chrono::NaiveDate;
    let mut rng = Rng::new(seed).derive("periodic-series");
    let phase_day = rng.uniform_in(0.0, std::f64::consts::TAU);
    let phase_week = rng.uniform_in(0.0, std::f64::consts::TAU);
    let start = NaiveDate::from_ymd_opt(2012, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap();
    let stamps: Vec<chrono::NaiveDateTime> = (0..n)
        .map(|i| start + chrono::Duration::hours(i as i64))
        .collect();
    let tau = std::f64::consts::TAU;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64;
            (tau * t / 24.0 + phase_day).sin()
                + 0.5 * (tau * t / 168.0 + phase_week).sin()
                + 0.25 * (tau * t / 12.0).sin()
                + 5e-5 * t
        })
        .collect();
    crate::ingest::RawSeries {
        axis: TimeAxis::Stamps(stamps),
        values,
        feature_names: vec!["y".into()],
    }
}

/// A family of sequences sharing one waveform shape with a per-sample
/// amplitude, for the modulation experiments: sample s is
/// `A_s (sin(2 pi 3 t) + 0.4 sin(2 pi 7 t))` on a uniform grid with an
/// interpolation gap in the middle and an extrapolation suffix.
pub fn make_family(count: usize, points: usize, seed: u64) -> Result<Vec<SignalDataset>> {
    if count == 0 || points < 10 {
        return Err(Error::config("family needs at least one sample and ten points"));
    }
    let mut rng = Rng::new(seed).derive("family-amplitudes");
    let mut out = Vec::with_capacity(count);
    for s in 0..count {
        let amplitude = rng.uniform_in(0.5, 1.5);
        let ts = linspace(0.0, 1.0, points);
        let targets: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let tau = 2.0 * std::f64::consts::PI;
                amplitude * ((tau * 3.0 * t).sin() + 0.4 * (tau * 7.0 * t).sin())
            })
            .collect();
        let roles: Vec<Role> = ts
            .iter()
            .map(|&t| {
                if t > 0.9 {
                    Role::TestExtrap
                } else if (0.30..0.45).contains(&t) {
                    Role::TestInterp
                } else {
                    Role::Train
                }
            })
            .collect();
        let cfg = BenchmarkConfig::default();
        let mut ds = assemble_univariate(ts, targets, roles, vec!["y".into()], &cfg)?;
        ds.name = format!("family-{s}");
        out.push(ds);
    }
    Ok(out)
}

fn carve_validation(ds: &mut SignalDataset, fraction: f64, seed: u64) {
    let train_cells: Vec<usize> = ds
        .roles
        .iter()
        .enumerate()
        .filter_map(|(k, &r)| (r == Role::Train && ds.observed[k]).then_some(k))
        .collect();
    let k = ((train_cells.len() as f64) * fraction).round() as usize;
    if k == 0 || k >= train_cells.len() {
        return;
    }
    let mut rng = Rng::new(seed).derive("benchmark-validation");
    for pick in rng.sample_indices(train_cells.len(), k) {
        ds.roles[train_cells[pick]] = Role::Validation;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    #[test]
    fn sine_target_known_points() {
        assert_eq!(sine_target(0.0), 0.0);
        assert!((sine_target(std::f64::consts::PI / 100.0) - 1.0).abs() < 1e-12);
        assert!(sine_target(std::f64::consts::PI / 50.0).abs() < 1e-12);
    }

    #[test]
    fn oscillator_initial_and_bounds() {
        let p = OscillatorParams::undamped();
        assert_eq!(oscillator(0.0, &p), 10.0);
        for i in 0..500 {
            let t = i as f64 * 0.01;
            assert!(oscillator(t, &p).abs() <= 10.0 + 1e-12);
        }
        // Damped envelope at t=1 is 10 e^{-2}.
        let d = OscillatorParams::damped();
        let envelope = 10.0 * (-2.0f64).exp();
        assert!(oscillator(1.0, &d).abs() <= envelope + 1e-12);
        assert!((envelope - 1.35335).abs() < 1e-4);
    }

    #[test]
    fn helmholtz_known_points() {
        let p = HelmholtzParams { a1: 1.0, a2: 1.0, k: 1.0 };
        assert!(helmholtz_solution(1.0, 1.0, &p).abs() < 1e-12);
        assert!((helmholtz_solution(0.5, 0.5, &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn helmholtz_pde_residual_by_finite_differences() {
        // Substituting the closed form into the PDE leaves |residual| small
        // when the Laplacian is approximated with h = 1e-4.
        let p = HelmholtzParams::default();
        let h = 1e-4;
        let u = |x: f64, y: f64| helmholtz_solution(x, y, &p);
        let mut worst: f64 = 0.0;
        for xi in 0..10 {
            for yi in 0..10 {
                let x = 1.05 + 0.09 * xi as f64;
                let y = 1.05 + 0.09 * yi as f64;
                let uxx = (u(x + h, y) - 2.0 * u(x, y) + u(x - h, y)) / (h * h);
                let uyy = (u(x, y + h) - 2.0 * u(x, y) + u(x, y - h)) / (h * h);
                let residual = uxx + uyy + p.k * p.k * u(x, y) - helmholtz_source(x, y, &p);
                worst = worst.max(residual.abs());
            }
        }
        // The FD Laplacian itself carries O(h^2 f'''' ) ~ 1e-8 * (4pi)^4
        // error, so the tolerance is scaled to the probe accuracy.
        assert!(worst < 5e-3, "residual {worst}");
    }

    #[test]
    fn rk4_constant_and_exponential() {
        let zero = rk4_trajectory(&|_s| vec![0.0, 0.0], &[1.0, -2.0], 0.1, 5).unwrap();
        for s in &zero {
            assert_eq!(s, &vec![1.0, -2.0]);
        }

        let traj = rk4_trajectory(&|s| vec![s[0]], &[1.0], 0.01, 100).unwrap();
        let e = traj.last().unwrap()[0];
        assert!((e - std::f64::consts::E).abs() < 1e-7, "got {e}");
    }

    #[test]
    fn rk4_error_scales_as_dt4() {
        let eval = |steps: usize| {
            let traj = rk4_trajectory(&|s| vec![s[0]], &[1.0], 1.0 / steps as f64, steps).unwrap();
            (traj.last().unwrap()[0] - std::f64::consts::E).abs()
        };
        let mut prev = eval(8);
        for steps in [16, 32, 64] {
            let err = eval(steps);
            let ratio = prev / err;
            assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
            prev = err;
        }
    }

    #[test]
    fn lorenz_fixed_point_at_origin() {
        let p = LorenzParams { h0: [0.0, 0.0, 0.0], ..Default::default() };
        let traj = rk4_trajectory(&|s| p.derivative(s), &p.h0, 0.01, 10).unwrap();
        for s in &traj {
            assert_eq!(s, &vec![0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn spring_uncoupled_matches_analytic_oscillator() {
        let p = CoupledSpringParams {
            k2: 0.0,
            c1: 0.0,
            c2: 0.0,
            ..Default::default()
        };
        let cfg = BenchmarkConfig {
            spring: p,
            spring_points: 101,
            spring_horizon: 1.0,
            spring_train_end: 0.5,
            ..Default::default()
        };
        let ds = coupled_spring_dataset(&p, &cfg).unwrap();
        let analytic = OscillatorParams {
            mass: 1.0,
            damping: 0.0,
            omega: p.k1.sqrt(),
            amplitude: 1.0,
            phase: 0.0,
        };
        for i in 0..101 {
            let t = i as f64 * 0.01;
            let x1 = ds.target(i, 0);
            assert!((x1 - oscillator(t, &analytic)).abs() < 1e-5, "t={t}");
        }
    }

    #[test]
    fn spring_energy_non_increasing_under_damping() {
        let p = CoupledSpringParams::default();
        let traj = rk4_trajectory(&|s| p.derivative(s), &p.initial_state(), 0.001, 10_000).unwrap();
        let mut prev = p.energy(&traj[0]);
        for s in traj.iter().skip(1) {
            let e = p.energy(s);
            assert!(e <= prev + 1e-9, "energy increased: {prev} -> {e}");
            prev = e;
        }
    }

    #[test]
    fn spring_initial_point_matches_setup() {
        let cfg = BenchmarkConfig::default();
        let ds = make_benchmark("coupled-spring", &cfg).unwrap();
        assert_eq!(ds.target(0, 0), 1.0);
        assert_eq!(ds.target(0, 1), -1.0);
    }

    #[test]
    fn helmholtz_split_counts() {
        let ds = make_benchmark("helmholtz2d", &BenchmarkConfig::default()).unwrap();
        assert_eq!(ds.n(), 10_000);
        assert_eq!(ds.count_role(Role::Train), 2500);
        assert_eq!(ds.count_role(Role::TestExtrap), 7500);
    }

    #[test]
    fn oscillator_extrap_split_boundary() {
        let cfg = BenchmarkConfig { osc_task: OscillatorTask::Extrap, ..Default::default() };
        let ds = make_benchmark("oscillator-damped", &cfg).unwrap();
        let axis = ds.axis.scalar_axis();
        for (i, &t) in axis.iter().enumerate() {
            if ds.role(i, 0) == Role::TestExtrap {
                assert!(t > 1.4);
            }
        }
    }

    #[test]
    fn sine50_split_boundary() {
        let ds = make_benchmark("sine50", &BenchmarkConfig::default()).unwrap();
        assert_eq!(ds.n(), 400);
        let axis = ds.axis.scalar_axis();
        for (i, &x) in axis.iter().enumerate() {
            match ds.role(i, 0) {
                Role::Train => assert!(x <= 2.2),
                Role::TestExtrap => assert!(x > 2.2),
                other => panic!("unexpected role {other:?}"),
            }
        }
    }

    #[test]
    fn roles_partition_every_benchmark() {
        for name in synthetic::BENCHMARK_NAMES {
            let cfg = BenchmarkConfig {
                helm_grid: 20,
                osc_points: 100,
                sine_points: 100,
                spring_points: 100,
                lorenz: LorenzParams { horizon: 1.0, ..Default::default() },
                ..Default::default()
            };
            let ds = make_benchmark(name, &cfg).unwrap();
            ds.validate().unwrap();
            let total = ds.n() * ds.m();
            let sum = ds.count_role(Role::Train)
                + ds.count_role(Role::Validation)
                + ds.count_role(Role::TestInterp)
                + ds.count_role(Role::TestExtrap);
            assert_eq!(sum, total, "{name}");
        }
    }

    #[test]
    fn benchmarks_reproduce_bit_exactly() {
        let cfg = BenchmarkConfig { validation_fraction: 0.1, ..Default::default() };
        let a = make_benchmark("oscillator-damped", &cfg).unwrap();
        let b = make_benchmark("oscillator-damped", &cfg).unwrap();
        assert_eq!(a.targets, b.targets);
        assert_eq!(a.roles, b.roles);
    }

    #[test]
    fn unknown_benchmark_is_config_error() {
        assert!(matches!(
            make_benchmark("nope", &BenchmarkConfig::default()),
            Err(Error::Config(_))
        ));
    }
}
