//! Latent modulation: shared model weights plus a per-sample latent vector
//! mapped to additive decoder-layer biases, trained with an inner/outer
//! meta-learning loop so the shared model adapts to unseen samples.

use serde::{Deserialize, Serialize};

use crate::adam::{AdamState, BoundParams, ParamId};
use crate::dataset::{CoordBatch, Role, SignalDataset};
use crate::error::{Error, Result};
use crate::eval::{metrics_from_predictions, EvalResult};
use crate::models::{NertModel, NertSpec};
use crate::rng::Rng;
use crate::tensor::{Tape, Tensor, Var};
use crate::train::mse_values;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulationMode {
    ScaleOnly,
    ScaleAndPeriod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationSpec {
    pub latent_dim: usize,
    pub mode: ModulationMode,
    /// Gradient steps on the latent per episode.
    pub inner_steps: usize,
    pub inner_lr: f64,
    pub outer_lr: f64,
    /// Outer epochs (full passes over the sample set).
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ModulationSpec {
    fn default() -> Self {
        ModulationSpec {
            latent_dim: 256,
            mode: ModulationMode::ScaleOnly,
            inner_steps: 3,
            inner_lr: 0.01,
            outer_lr: 0.001,
            epochs: 100,
            seed: 0,
        }
    }
}

/// Shared model plus linear maps from the latent to each targeted decoder
/// layer's bias. The maps start small but nonzero: a latent of zero still
/// reproduces the shared model exactly (the shift is W_z * 0 = 0), while
/// the inner loop's gradient on the latent stays alive. With exactly-zero
/// maps, both d(loss)/dz at z = 0 and d(loss)/dW_z at the adapted z = 0
/// vanish identically and the modulation never trains.
pub struct ModulatedNert {
    pub model: NertModel,
    pub spec: ModulationSpec,
    period_maps: Vec<ParamId>,
    scale_maps: Vec<ParamId>,
}

impl ModulatedNert {
    pub fn new(nert_spec: NertSpec, spec: ModulationSpec) -> Result<Self> {
        if spec.latent_dim == 0 {
            return Err(Error::config("latent_dim must be at least 1"));
        }
        let mut model = NertModel::new(nert_spec)?;
        let scale_widths = model.scale_layer_widths();
        let period_widths = model.period_layer_widths();
        let mut scale_maps = Vec::new();
        let mut period_maps = Vec::new();
        {
            let limit = 0.5 / (spec.latent_dim as f64).sqrt();
            let mut rng = Rng::new(spec.seed).derive("latent-maps");
            let map_tensor = |w: usize, rng: &mut Rng| {
                let data: Vec<f64> = (0..spec.latent_dim * w)
                    .map(|_| rng.uniform_in(-limit, limit))
                    .collect();
                Tensor::from_vec(vec![spec.latent_dim, w], data).expect("finite init")
            };
            let params = model.params_mut();
            for (l, w) in scale_widths.iter().enumerate() {
                let t = map_tensor(*w, &mut rng);
                scale_maps.push(params.add(format!("mod.scale.{l}"), t, true));
            }
            if spec.mode == ModulationMode::ScaleAndPeriod {
                for (l, w) in period_widths.iter().enumerate() {
                    let t = map_tensor(*w, &mut rng);
                    period_maps.push(params.add(format!("mod.period.{l}"), t, true));
                }
            }
        }
        Ok(ModulatedNert { model, spec, period_maps, scale_maps })
    }

    /// Bias shifts for one latent value already on the tape.
    fn shifts(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        z: Var,
    ) -> Result<(Option<Vec<Var>>, Option<Vec<Var>>)> {
        let scale: Vec<Var> = self
            .scale_maps
            .iter()
            .map(|&m| tape.matmul(z, bound.var(m)))
            .collect::<Result<_>>()?;
        let period = if self.period_maps.is_empty() {
            None
        } else {
            Some(
                self.period_maps
                    .iter()
                    .map(|&m| tape.matmul(z, bound.var(m)))
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        Ok((period, Some(scale)))
    }

    /// Forward pass under a latent vector; gradients flow to neither the
    /// shared weights nor the latent (evaluation path).
    pub fn predict_with_latent(&self, batch: &CoordBatch, z: &[f64]) -> Result<ModulatedPrediction> {
        let mut tape = Tape::new();
        let bound = self.model.params().bind_frozen(&mut tape);
        let z_var = tape.constant_from(vec![1, self.spec.latent_dim], z.to_vec());
        let (period_shifts, scale_shifts) = self.shifts(&mut tape, &bound, z_var)?;
        let out = self.model.forward_modulated(
            &mut tape,
            &bound,
            batch,
            period_shifts.as_deref(),
            scale_shifts.as_deref(),
        )?;
        Ok(ModulatedPrediction {
            pred: tape.value(out.pred).to_vec(),
            period: out.period.map(|v| tape.value(v).to_vec()),
            scale: out.scale.map(|v| tape.value(v).to_vec()),
        })
    }

    /// Inner loop: adapt a fresh latent on the sample's train cells with
    /// plain gradient steps; shared weights stay bit-identical. Returns the
    /// best-of-trajectory latent by train MSE (so more steps never hurt).
    pub fn adapt_latent(&self, sample: &SignalDataset, steps: usize) -> Result<AdaptedLatent> {
        let train = sample.batch_for_roles(&[Role::Train]);
        if train.is_empty() {
            return Err(Error::degenerate("sample has no training cells"));
        }
        let mut z = vec![0.0; self.spec.latent_dim];
        let mut best_z = z.clone();
        let mut best_mse = {
            let p = self.predict_with_latent(&train, &z)?;
            mse_values(&p.pred, &train.targets)
        };
        let mut trajectory = vec![best_mse];
        for _ in 0..steps {
            let mut tape = Tape::new();
            let bound = self.model.params().bind_frozen(&mut tape);
            let z_tensor = Tensor::from_vec(vec![1, self.spec.latent_dim], z.clone())?.with_grad();
            let z_var = tape.leaf(&z_tensor);
            let (period_shifts, scale_shifts) = self.shifts(&mut tape, &bound, z_var)?;
            let out = self.model.forward_modulated(
                &mut tape,
                &bound,
                &train,
                period_shifts.as_deref(),
                scale_shifts.as_deref(),
            )?;
            let target = tape.constant_from(vec![train.len(), 1], train.targets.clone());
            let loss = tape.mse(out.pred, target)?;
            if !tape.value(loss)[0].is_finite() {
                return Err(Error::numeric("inner adaptation diverged"));
            }
            tape.backward(loss)?;
            let grad = tape.grad(z_var);
            for (zi, gi) in z.iter_mut().zip(grad) {
                *zi -= self.spec.inner_lr * gi;
            }
            let p = self.predict_with_latent(&train, &z)?;
            let m = mse_values(&p.pred, &train.targets);
            if !m.is_finite() {
                return Err(Error::numeric("inner adaptation diverged"));
            }
            trajectory.push(m);
            if m < best_mse {
                best_mse = m;
                best_z = z.clone();
            }
        }
        Ok(AdaptedLatent { z: best_z, train_mse: best_mse, trajectory })
    }
}

pub struct ModulatedPrediction {
    pub pred: Vec<f64>,
    pub period: Option<Vec<f64>>,
    pub scale: Option<Vec<f64>>,
}

pub struct AdaptedLatent {
    pub z: Vec<f64>,
    pub train_mse: f64,
    /// Train MSE after 0, 1, ..., `steps` inner updates.
    pub trajectory: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MetaReport {
    /// Mean post-adaptation train loss per outer epoch.
    pub episode_loss: Vec<f64>,
    /// Final adapted latent per training sample.
    pub registry: Vec<Vec<f64>>,
}

/// Episodic meta-training: per sample, adapt a fresh latent from zero with
/// the inner loop, then take one Adam step on the shared weights (and the
/// latent maps) at the adapted latent. First-order: the outer step treats
/// the adapted latent as a constant.
pub fn meta_train(
    mm: &mut ModulatedNert,
    samples: &[SignalDataset],
    ) -> Result<MetaReport> {
    if samples.len() < 2 {
        return Err(Error::degenerate("meta-training needs at least two samples"));
    }
    let spec = mm.spec.clone();
    let mut adam = AdamState::new(spec.outer_lr, mm.model.params());
    let mut episode_loss = Vec::with_capacity(spec.epochs);
    for _epoch in 0..spec.epochs {
        let mut epoch_acc = 0.0;
        for sample in samples {
            let adapted = mm.adapt_latent(sample, spec.inner_steps)?;
            let train = sample.batch_for_roles(&[Role::Train]);
            let mut tape = Tape::new();
            let bound = mm.model.params().bind(&mut tape);
            let z_var = tape.constant_from(vec![1, spec.latent_dim], adapted.z.clone());
            let (period_shifts, scale_shifts) = mm.shifts(&mut tape, &bound, z_var)?;
            let out = mm.model.forward_modulated(
                &mut tape,
                &bound,
                &train,
                period_shifts.as_deref(),
                scale_shifts.as_deref(),
            )?;
            let target = tape.constant_from(vec![train.len(), 1], train.targets.clone());
            let loss = tape.mse(out.pred, target)?;
            let loss_value = tape.value(loss)[0];
            if !loss_value.is_finite() {
                return Err(Error::numeric("outer loss became non-finite"));
            }
            epoch_acc += loss_value;
            tape.backward(loss)?;
            mm.model.params_mut().harvest(&tape, &bound);
            adam.step(mm.model.params_mut())?;
        }
        episode_loss.push(epoch_acc / samples.len() as f64);
    }
    let registry = samples
        .iter()
        .map(|s| mm.adapt_latent(s, spec.inner_steps).map(|a| a.z))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetaReport { episode_loss, registry })
}

/// Adapt to an unseen sample and report metrics at the adapted latent and
/// at zero latent, over every role of the sample simultaneously.
pub struct AdaptOutcome {
    pub latent: AdaptedLatent,
    pub adapted: EvalResult,
    pub zero_latent: EvalResult,
}

pub fn adapt(mm: &ModulatedNert, sample: &SignalDataset, steps: usize) -> Result<AdaptOutcome> {
    let latent = mm.adapt_latent(sample, steps)?;
    let all = sample.batch_all();
    let adapted_pred = mm.predict_with_latent(&all, &latent.z)?;
    let zero = vec![0.0; mm.spec.latent_dim];
    let zero_pred = mm.predict_with_latent(&all, &zero)?;
    Ok(AdaptOutcome {
        adapted: metrics_from_predictions(sample, &all.cells, &adapted_pred.pred, None),
        zero_latent: metrics_from_predictions(sample, &all.cells, &zero_pred.pred, None),
        latent,
    })
}

// ── Checkpointing ───────────────────────────────────────────────────

#[derive(Debug, Serialize, Deserialize)]
pub struct ModulatedCheckpoint {
    pub version: u32,
    pub nert_spec: NertSpec,
    pub mod_spec: ModulationSpec,
    entries: Vec<(String, Vec<usize>, Vec<f64>)>,
    pub registry: Vec<Vec<f64>>,
}

impl ModulatedNert {
    pub fn to_checkpoint(&self, registry: &[Vec<f64>]) -> ModulatedCheckpoint {
        let entries = self
            .model
            .params()
            .iter()
            .map(|(n, t, _)| (n.to_string(), t.shape().to_vec(), t.data().to_vec()))
            .collect();
        ModulatedCheckpoint {
            version: 1,
            nert_spec: self.model.spec.clone(),
            mod_spec: self.spec.clone(),
            entries,
            registry: registry.to_vec(),
        }
    }

    pub fn from_checkpoint(ck: &ModulatedCheckpoint) -> Result<ModulatedNert> {
        let mut mm = ModulatedNert::new(ck.nert_spec.clone(), ck.mod_spec.clone())?;
        let params = mm.model.params_mut();
        if params.len() != ck.entries.len() {
            return Err(Error::config("modulated checkpoint layout mismatch"));
        }
        for (idx, (name, shape, data)) in ck.entries.iter().enumerate() {
            if params.name(ParamId(idx)) != name || params.tensor(idx).shape() != shape.as_slice() {
                return Err(Error::config(format!(
                    "modulated checkpoint entry '{name}' does not match"
                )));
            }
            params.tensor_mut(idx).data_mut().copy_from_slice(data);
        }
        Ok(mm)
    }
}

/// Deterministic helper: amplitude family plus a held-out split, the desk
/// setup for the modulation experiments.
pub fn family_split(
    total: usize,
    train_count: usize,
    points: usize,
    seed: u64,
) -> Result<(Vec<SignalDataset>, Vec<SignalDataset>)> {
    if train_count == 0 || train_count >= total {
        return Err(Error::config("family split needs 0 < train_count < total"));
    }
    let mut all = crate::synthetic::make_family(total, points, seed)?;
    let held: Vec<SignalDataset> = all.split_off(train_count);
    Ok((all, held))
}

/// Seeded latent draw, for tests that need a nonzero z.
pub fn random_latent(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng::new(seed).derive("latent");
    (0..dim).map(|_| rng.normal() * 0.1).collect()
}
