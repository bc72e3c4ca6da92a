//! Full-batch MSE training with validation-based checkpointing and an
//! optional finite-difference penalty on the derivative of the scale factor.

use serde::{Deserialize, Serialize};

use crate::adam::AdamState;
use crate::dataset::{CoordBatch, Role, SignalDataset};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::rng::Rng;
use crate::tensor::{Tape, Var};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Weight of the derivative penalty; 0 trains plain MSE.
    pub penalty_weight: f64,
    /// Derivative order n in {1, 2, 3}.
    pub penalty_order: usize,
    /// Finite-difference step, in scaled-coordinate units.
    pub fd_step: f64,
    /// At most this many sample points feed the penalty each epoch
    /// (seeded subsample of the training cells).
    pub penalty_max_points: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 2000,
            learning_rate: 0.001,
            penalty_weight: 0.0,
            penalty_order: 3,
            fd_step: 1e-3,
            penalty_max_points: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub train_loss: Vec<f64>,
    /// Validation MSE per epoch; empty when the dataset has no validation
    /// cells (then the last epoch is the checkpoint).
    pub val_mse: Vec<f64>,
    pub best_epoch: usize,
    pub best_val_mse: Option<f64>,
    pub wall_secs: f64,
    pub best_params: Vec<Vec<f64>>,
    pub final_params: Vec<Vec<f64>>,
}

/// Plain mean squared error between two equal-length slices.
pub fn mse_values(pred: &[f64], target: &[f64]) -> f64 {
    debug_assert_eq!(pred.len(), target.len());
    if pred.is_empty() {
        return f64::NAN;
    }
    let mut acc = 0.0;
    for (p, t) in pred.iter().zip(target) {
        let d = p - t;
        acc += d * d;
    }
    acc / pred.len() as f64
}

/// Central-difference stencils: (offset in units of h, coefficient).
/// The h^-n factor is applied separately.
fn stencil(order: usize) -> Result<&'static [(i32, f64)]> {
    match order {
        1 => Ok(&[(-1, -0.5), (1, 0.5)]),
        2 => Ok(&[(-1, 1.0), (0, -2.0), (1, 1.0)]),
        3 => Ok(&[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)]),
        other => Err(Error::config(format!(
            "derivative penalty supports orders 1-3, got {other}"
        ))),
    }
}

/// Mean of (d^n f / dt^n)^2 over the batch rows, where `f` is evaluated by
/// `eval` on copies of the batch whose first temporal component is shifted by
/// the stencil offsets. Everything stays on the tape, so the penalty
/// participates in the loss gradient through the stencil's forward passes.
pub fn derivative_penalty_on_tape(
    tape: &mut Tape,
    order: usize,
    fd_step: f64,
    batch: &CoordBatch,
    mut eval: impl FnMut(&mut Tape, &CoordBatch) -> Result<Var>,
) -> Result<Var> {
    if fd_step <= 0.0 {
        return Err(Error::config("fd_step must be positive"));
    }
    if batch.is_empty() {
        return Err(Error::degenerate("derivative penalty over an empty batch"));
    }
    let taps = stencil(order)?;
    let inv_hn = fd_step.powi(-(order as i32));
    let mut acc: Option<Var> = None;
    for &(offset, coeff) in taps {
        let shifted = batch.shifted_first_component(offset as f64 * fd_step);
        let value = eval(tape, &shifted)?;
        let term = tape.scale(value, coeff * inv_hn);
        acc = Some(match acc {
            None => term,
            Some(prev) => tape.add(prev, term)?,
        });
    }
    let derivative = acc.expect("stencil is non-empty");
    let squared = tape.square(derivative);
    let penalty = tape.mean(squared)?;
    if !tape.value(penalty)[0].is_finite() {
        return Err(Error::numeric(
            "derivative penalty is non-finite; fd_step may be too small",
        ));
    }
    Ok(penalty)
}

/// Masked MSE plus lambda times an optional penalty term, on the tape.
pub fn compose_loss(
    tape: &mut Tape,
    pred: Var,
    target: Var,
    mask: Option<&[f64]>,
    penalty: Option<Var>,
    lambda: f64,
) -> Result<Var> {
    let mse = tape.mse_masked(pred, target, mask)?;
    match penalty {
        Some(p) if lambda != 0.0 => {
            let scaled = tape.scale(p, lambda);
            tape.add(mse, scaled)
        }
        _ => Ok(mse),
    }
}

/// Full-batch gradient descent with Adam over the train-role cells of
/// `dataset`. Validation MSE is computed every epoch on validation-role
/// cells; the reported parameters are the best-validation snapshot (or the
/// final epoch when there is no validation split).
pub fn train(model: &mut Model, dataset: &SignalDataset, cfg: &TrainConfig) -> Result<TrainReport> {
    let started = std::time::Instant::now();
    let train_batch = dataset.batch_for_roles(&[Role::Train]);
    if train_batch.is_empty() {
        return Err(Error::degenerate("dataset has no training cells"));
    }
    let val_batch = dataset.batch_for_roles(&[Role::Validation]);

    let penalty_batch = if cfg.penalty_weight > 0.0 {
        if !matches!(model, Model::Nert(_)) {
            return Err(Error::contract(
                "the derivative penalty needs a model with a scale factor",
            ));
        }
        Some(subsample_batch(&train_batch, cfg.penalty_max_points, cfg.seed))
    } else {
        None
    };

    let mut adam = AdamState::new(cfg.learning_rate, model.params());
    let mut train_loss = Vec::with_capacity(cfg.epochs);
    let mut val_mse = Vec::new();
    let mut best_epoch = 0usize;
    let mut best_val = f64::INFINITY;
    let mut best_params: Option<Vec<Vec<f64>>> = None;

    for epoch in 0..cfg.epochs {
        let mut tape = Tape::new();
        let bound = model.params().bind(&mut tape);
        let out = model.forward(&mut tape, &bound, &train_batch)?;
        let target = tape.constant_from(vec![train_batch.len(), 1], train_batch.targets.clone());
        let penalty = match &penalty_batch {
            Some(pb) => Some(derivative_penalty_on_tape(
                &mut tape,
                cfg.penalty_order,
                cfg.fd_step,
                pb,
                |tape, shifted| model.forward_scale_detached(tape, &bound, shifted),
            )?),
            None => None,
        };
        let loss = compose_loss(&mut tape, out.pred, target, None, penalty, cfg.penalty_weight)?;
        let loss_value = tape.value(loss)[0];
        if !loss_value.is_finite() {
            return Err(Error::numeric(format!(
                "loss became non-finite at epoch {epoch}"
            )));
        }
        train_loss.push(loss_value);
        tape.backward(loss)?;
        model.params_mut().harvest(&tape, &bound);
        adam.step(model.params_mut())?;

        if !val_batch.is_empty() {
            let pred = model.predict(&val_batch)?;
            let v = mse_values(&pred.pred, &val_batch.targets);
            if !v.is_finite() {
                return Err(Error::numeric(format!(
                    "validation error became non-finite at epoch {epoch}"
                )));
            }
            val_mse.push(v);
            if v < best_val {
                best_val = v;
                best_epoch = epoch;
                best_params = Some(model.params().snapshot());
            }
        }
    }

    let final_params = model.params().snapshot();
    let (best_params, best_val_mse, best_epoch) = match best_params {
        Some(p) => (p, Some(best_val), best_epoch),
        None => (final_params.clone(), None, cfg.epochs.saturating_sub(1)),
    };
    Ok(TrainReport {
        train_loss,
        val_mse,
        best_epoch,
        best_val_mse,
        wall_secs: started.elapsed().as_secs_f64(),
        best_params,
        final_params,
    })
}

fn subsample_batch(batch: &CoordBatch, max_points: usize, seed: u64) -> CoordBatch {
    if batch.len() <= max_points || max_points == 0 {
        return batch.clone();
    }
    let mut rng = Rng::new(seed).derive("penalty-subsample");
    let picks = rng.sample_indices(batch.len(), max_points);
    let d = batch.d_ct;
    let m = batch.m;
    let mut out = CoordBatch {
        ct: Vec::with_capacity(max_points * d),
        cf: Vec::with_capacity(max_points * m),
        d_ct: d,
        m,
        cells: Vec::with_capacity(max_points),
        targets: Vec::with_capacity(max_points),
    };
    for &r in &picks {
        out.ct.extend_from_slice(&batch.ct[r * d..(r + 1) * d]);
        out.cf.extend_from_slice(&batch.cf[r * m..(r + 1) * m]);
        out.cells.push(batch.cells[r]);
        out.targets.push(batch.targets[r]);
    }
    out
}
