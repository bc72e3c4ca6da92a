//! Adam with bias correction, plus the named parameter collection models
//! register their weights in.

use crate::error::{Error, Result};
use crate::tensor::{Tape, Tensor, Var};

#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step_count: u64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
}

impl AdamState {
    /// Moment buffers are laid out to match the trainable entries of `params`,
    /// in registration order.
    pub fn new(learning_rate: f64, params: &ParamSet) -> Self {
        let shapes: Vec<usize> = params
            .trainable_indices()
            .map(|i| params.tensor(i).numel())
            .collect();
        AdamState {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            first_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// One Adam update over every trainable parameter. Requires populated
    /// gradients; zeroes them afterwards.
    pub fn step(&mut self, params: &mut ParamSet) -> Result<()> {
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let trainable: Vec<usize> = params.trainable_indices().collect();
        if trainable.len() != self.first_moment.len() {
            return Err(Error::contract("optimizer state does not match parameter set"));
        }
        for (slot, &idx) in trainable.iter().enumerate() {
            let tensor = params.tensor_mut(idx);
            let numel = tensor.numel();
            if tensor.grad().is_none() {
                return Err(Error::contract(format!(
                    "parameter {} has no gradient buffer",
                    idx
                )));
            }
            let m = &mut self.first_moment[slot];
            let v = &mut self.second_moment[slot];
            debug_assert_eq!(m.len(), numel);
            {
                let grad = tensor.grad().unwrap().to_vec();
                let data = tensor.data_mut();
                for i in 0..numel {
                    let g = grad[i];
                    if !g.is_finite() {
                        return Err(Error::numeric("non-finite gradient in adam step"));
                    }
                    m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                    v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
                    let m_hat = m[i] / bc1;
                    let v_hat = v[i] / bc2;
                    data[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                }
            }
            tensor.zero_grad();
        }
        Ok(())
    }
}

// ── ParamSet ────────────────────────────────────────────────────────

/// Stable handle into a `ParamSet`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(pub(crate) usize);

/// Named parameter collection. Registration order is the canonical order for
/// the optimizer, checkpoints, and tape binding, so runs are reproducible.
#[derive(Debug, Clone, Default)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Tensor>,
    trainable: Vec<bool>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, tensor: Tensor, trainable: bool) -> ParamId {
        let tensor = if trainable { tensor.with_grad() } else { tensor };
        self.names.push(name.into());
        self.tensors.push(tensor);
        self.trainable.push(trainable);
        ParamId(self.tensors.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn tensor(&self, idx: usize) -> &Tensor {
        &self.tensors[idx]
    }

    pub fn tensor_mut(&mut self, idx: usize) -> &mut Tensor {
        &mut self.tensors[idx]
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    /// Change whether a parameter participates in optimization. Rebuild the
    /// optimizer state afterwards; moment buffers track trainable entries.
    pub fn set_trainable(&mut self, idx: usize, trainable: bool) {
        self.trainable[idx] = trainable;
        if trainable && self.tensors[idx].grad().is_none() {
            let t = std::mem::replace(&mut self.tensors[idx], Tensor::scalar(0.0));
            self.tensors[idx] = t.with_grad();
        }
    }

    pub fn trainable_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.trainable
            .iter()
            .enumerate()
            .filter_map(|(i, &t)| t.then_some(i))
    }

    /// Total number of scalar parameters (trainable only).
    pub fn trainable_count(&self) -> usize {
        self.trainable_indices().map(|i| self.tensors[i].numel()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor, bool)> {
        self.names
            .iter()
            .zip(&self.tensors)
            .zip(&self.trainable)
            .map(|((n, t), &tr)| (n.as_str(), t, tr))
    }

    /// Record every parameter on the tape. Trainable entries become
    /// differentiable leaves; frozen entries become constants.
    pub fn bind(&self, tape: &mut Tape) -> BoundParams {
        let vars = self
            .tensors
            .iter()
            .zip(&self.trainable)
            .map(|(t, &tr)| if tr { tape.leaf(t) } else { tape.constant(t) })
            .collect();
        BoundParams { vars }
    }

    /// Record every parameter as a constant (evaluation / inner-loop passes
    /// that must not touch shared weights).
    pub fn bind_frozen(&self, tape: &mut Tape) -> BoundParams {
        let vars = self.tensors.iter().map(|t| tape.constant(t)).collect();
        BoundParams { vars }
    }

    /// Pull gradients off the tape into the persistent parameter buffers.
    pub fn harvest(&mut self, tape: &Tape, bound: &BoundParams) {
        for (i, tensor) in self.tensors.iter_mut().enumerate() {
            if self.trainable[i] {
                tensor.accumulate_grad(tape.grad(bound.vars[i]));
            }
        }
    }

    pub fn zero_grads(&mut self) {
        for t in self.tensors.iter_mut() {
            t.zero_grad();
        }
    }

    /// Clone of all raw values, for checkpoint snapshots.
    pub fn snapshot(&self) -> Vec<Vec<f64>> {
        self.tensors.iter().map(|t| t.data().to_vec()).collect()
    }

    pub fn restore(&mut self, snapshot: &[Vec<f64>]) {
        assert_eq!(snapshot.len(), self.tensors.len(), "snapshot layout mismatch");
        for (t, s) in self.tensors.iter_mut().zip(snapshot) {
            t.data_mut().copy_from_slice(s);
        }
    }
}

/// Tape handles for one bound parameter set, in registration order.
pub struct BoundParams {
    vars: Vec<Var>,
}

impl BoundParams {
    pub fn var(&self, id: ParamId) -> Var {
        self.vars[id.0]
    }
}
