//! Per-benchmark default configurations: model dimensions, frequency
//! bounds, coordinate scaling, training lengths, and baseline sizing. The
//! CLI and the acceptance suite share these so a benchmark name alone
//! reproduces a run.
//!
//! The coordinate scale and Fourier bank size are chosen together: the
//! scaled training window should span many signal cycles while the bank
//! stays small, so that fitting the training data forces the learnable
//! frequencies onto the signal's true frequencies instead of aliasing
//! inside the window. Extrapolation quality hinges on that locking.

use crate::error::{Error, Result};
use crate::models::{
    baseline_input_dim, match_ffn_width, match_siren_width, FfnSpec, Model, ModelKind, ModelSpec,
    NertSpec, SirenSpec,
};
use crate::synthetic::{BenchmarkConfig, OscillatorTask};
use crate::train::TrainConfig;

#[derive(Debug, Clone)]
pub struct Preset {
    pub benchmark: String,
    pub nert: NertSpec,
    pub train: TrainConfig,
    pub bench: BenchmarkConfig,
    /// Z-score targets for training and report raw-unit MSE.
    pub normalize: bool,
    pub siren_omega0: f64,
    pub ffn_sigma: f64,
    /// FC count of both baselines.
    pub baseline_layers: usize,
}

impl Preset {
    pub fn for_benchmark(name: &str) -> Result<Preset> {
        let base = Preset {
            benchmark: name.to_string(),
            nert: NertSpec::default(),
            train: TrainConfig::default(),
            bench: BenchmarkConfig::default(),
            normalize: false,
            siren_omega0: 30.0,
            ffn_sigma: 10.0,
            baseline_layers: 5,
        };
        let preset = match name {
            "sine50" => Preset {
                nert: NertSpec {
                    d_ct: 1,
                    m: 1,
                    dim_psi_t: 8,
                    dim_psi_f: 8,
                    dim_psi_fourier: 8,
                    dim_hidden_period: 10,
                    dim_hidden_scale: 8,
                    omega_init: 1.3,
                    omega_inner: 1.0,
                    learn_frequencies: true,
                    period_init_gain: 8.0,
                    ..NertSpec::default()
                },
                train: TrainConfig {
                    epochs: 2000,
                    penalty_weight: 1.0,
                    fd_step: 0.05,
                    ..Default::default()
                },
                bench: BenchmarkConfig { smax: 100.0, ..Default::default() },
                ..base
            },
            "oscillator-undamped" | "oscillator-damped" => Preset {
                nert: NertSpec {
                    d_ct: 1,
                    m: 1,
                    dim_psi_t: 8,
                    dim_psi_f: 8,
                    dim_psi_fourier: 2,
                    dim_hidden_period: 10,
                    dim_hidden_scale: 8,
                    omega_init: 0.65,
                    omega_inner: 1.0,
                    learn_frequencies: true,
                    period_init_gain: 8.0,
                    ..NertSpec::default()
                },
                train: TrainConfig {
                    epochs: 2000,
                    penalty_weight: 0.1,
                    penalty_order: 3,
                    fd_step: 0.05,
                    ..Default::default()
                },
                bench: BenchmarkConfig {
                    smax: 100.0,
                    osc_task: OscillatorTask::Interp,
                    ..Default::default()
                },
                normalize: true,
                ..base
            },
            "helmholtz2d" => Preset {
                nert: NertSpec {
                    d_ct: 2,
                    m: 1,
                    dim_psi_t: 16,
                    dim_psi_f: 8,
                    dim_psi_fourier: 24,
                    dim_hidden_period: 16,
                    dim_hidden_scale: 8,
                    omega_init: 8.0,
                    omega_inner: 1.0,
                    learn_frequencies: true,
                    period_init_gain: 8.0,
                    ..NertSpec::default()
                },
                train: TrainConfig { epochs: 1000, ..Default::default() },
                ..base
            },
            "coupled-spring" => Preset {
                nert: NertSpec {
                    d_ct: 1,
                    m: 2,
                    dim_psi_t: 8,
                    dim_psi_f: 8,
                    dim_psi_fourier: 2,
                    dim_hidden_period: 10,
                    dim_hidden_scale: 8,
                    omega_init: 0.35,
                    omega_inner: 1.0,
                    learn_frequencies: true,
                    period_init_gain: 8.0,
                    ..NertSpec::default()
                },
                train: TrainConfig {
                    epochs: 1500,
                    penalty_weight: 0.1,
                    fd_step: 0.05,
                    ..Default::default()
                },
                bench: BenchmarkConfig { smax: 100.0, ..Default::default() },
                normalize: true,
                ..base
            },
            "lorenz" => Preset {
                nert: NertSpec {
                    d_ct: 1,
                    m: 3,
                    dim_psi_t: 16,
                    dim_psi_f: 8,
                    dim_psi_fourier: 32,
                    dim_hidden_period: 16,
                    dim_hidden_scale: 16,
                    omega_init: 8.0,
                    omega_inner: 1.0,
                    learn_frequencies: true,
                    ..NertSpec::default()
                },
                train: TrainConfig { epochs: 1500, ..Default::default() },
                bench: BenchmarkConfig { smax: 10.0, ..Default::default() },
                normalize: true,
                ..base
            },
            other => {
                return Err(Error::config(format!("no preset for benchmark '{other}'")));
            }
        };
        Ok(preset)
    }

    /// Hyperparameters for the periodic time-series protocol (calendar
    /// coordinates, block masking); mirrors the best-known configuration
    /// for hourly data.
    pub fn periodic_series(m: usize) -> Preset {
        Preset {
            benchmark: "periodic-series".into(),
            nert: NertSpec {
                d_ct: 4,
                m,
                dim_psi_t: 30,
                dim_psi_f: 8,
                dim_psi_fourier: 30,
                dim_hidden_period: 10,
                dim_hidden_scale: 30,
                omega_init: 5.0,
                omega_inner: 1.0,
                ..NertSpec::default()
            },
            train: TrainConfig { epochs: 600, ..Default::default() },
            bench: BenchmarkConfig::default(),
            normalize: true,
            siren_omega0: 30.0,
            ffn_sigma: 10.0,
            baseline_layers: 5,
        }
    }

    /// Model spec for a given kind, with baselines sized to match the
    /// factored model's trainable parameter count.
    pub fn model_spec(&self, kind: ModelKind, seed: u64) -> Result<ModelSpec> {
        let nert = NertSpec { seed, ..self.nert.clone() };
        match kind {
            ModelKind::Nert => Ok(ModelSpec::Nert(nert)),
            ModelKind::Siren | ModelKind::Ffn => {
                let target = ModelSpec::Nert(nert.clone()).build()?.param_count();
                let input_dim = baseline_input_dim(self.nert.d_ct, self.nert.m);
                match kind {
                    ModelKind::Siren => {
                        let template = SirenSpec {
                            input_dim,
                            hidden: 32,
                            layers: self.baseline_layers,
                            omega0: self.siren_omega0,
                            seed,
                        };
                        Ok(ModelSpec::Siren(match_siren_width(&template, target)))
                    }
                    ModelKind::Ffn => {
                        let template = FfnSpec {
                            input_dim,
                            n_freq: 32,
                            sigma: self.ffn_sigma,
                            hidden: 32,
                            layers: self.baseline_layers,
                            seed,
                        };
                        Ok(ModelSpec::Ffn(match_ffn_width(&template, target)))
                    }
                    ModelKind::Nert => unreachable!(),
                }
            }
        }
    }

    pub fn build_model(&self, kind: ModelKind, seed: u64) -> Result<Model> {
        self.model_spec(kind, seed)?.build()
    }
}
