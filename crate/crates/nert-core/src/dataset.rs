//! Masked signal datasets shared by the synthetic generators and the CSV
//! ingestion pipeline.

use serde::{Deserialize, Serialize};

use crate::coords::{CoordinateSet, TimeAxis};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Train,
    Validation,
    TestInterp,
    TestExtrap,
}

impl Role {
    /// Stable numeric codes for the mask CSV: 0 train, 1 validation,
    /// 2 interp-test, 3 extrap-test; 4 marks an unobserved cell.
    pub fn code(self) -> u8 {
        match self {
            Role::Train => 0,
            Role::Validation => 1,
            Role::TestInterp => 2,
            Role::TestExtrap => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Role> {
        match code {
            0 => Some(Role::Train),
            1 => Some(Role::Validation),
            2 => Some(Role::TestInterp),
            3 => Some(Role::TestExtrap),
            _ => None,
        }
    }
}

pub const UNOBSERVED_CODE: u8 = 4;

/// Coordinates, targets, and per-cell role plus observation masks for an
/// N x M signal. Cells are indexed row-major as (timestamp, feature).
#[derive(Debug, Clone)]
pub struct SignalDataset {
    pub name: String,
    pub coords: CoordinateSet,
    pub axis: TimeAxis,
    pub targets: Vec<f64>,
    pub roles: Vec<Role>,
    pub observed: Vec<bool>,
    pub feature_names: Vec<String>,
}

impl SignalDataset {
    pub fn n(&self) -> usize {
        self.coords.n
    }

    pub fn m(&self) -> usize {
        self.coords.m
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.m() + j
    }

    pub fn role(&self, i: usize, j: usize) -> Role {
        self.roles[self.idx(i, j)]
    }

    pub fn target(&self, i: usize, j: usize) -> f64 {
        self.targets[self.idx(i, j)]
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.observed[self.idx(i, j)]
    }

    pub fn count_role(&self, role: Role) -> usize {
        self.roles
            .iter()
            .zip(&self.observed)
            .filter(|(r, o)| **r == role && **o)
            .count()
    }

    /// Observed cells carrying any of the given roles, in row-major order.
    pub fn cells_with_roles(&self, roles: &[Role]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            for j in 0..self.m() {
                let k = self.idx(i, j);
                if self.observed[k] && roles.contains(&self.roles[k]) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Every cell, observed or not (trace export predicts everywhere).
    pub fn all_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n() * self.m());
        for i in 0..self.n() {
            for j in 0..self.m() {
                out.push((i, j));
            }
        }
        out
    }

    pub fn batch_for_roles(&self, roles: &[Role]) -> CoordBatch {
        self.batch_for_cells(&self.cells_with_roles(roles))
    }

    pub fn batch_all(&self) -> CoordBatch {
        self.batch_for_cells(&self.all_cells())
    }

    pub fn batch_for_cells(&self, cells: &[(usize, usize)]) -> CoordBatch {
        let d = self.coords.d_ct;
        let m = self.m();
        let mut ct = Vec::with_capacity(cells.len() * d);
        let mut cf = Vec::with_capacity(cells.len() * m);
        let mut targets = Vec::with_capacity(cells.len());
        for &(i, j) in cells {
            ct.extend_from_slice(self.coords.temporal_row(i));
            cf.extend_from_slice(self.coords.onehot_row(j));
            targets.push(self.target(i, j));
        }
        CoordBatch {
            ct,
            cf,
            d_ct: d,
            m,
            cells: cells.to_vec(),
            targets,
        }
    }

    /// Invariant: observed cells carry exactly one role (asserted by the
    /// Role representation) and every cell is addressed.
    pub fn validate(&self) -> Result<()> {
        let expect = self.n() * self.m();
        if self.targets.len() != expect
            || self.roles.len() != expect
            || self.observed.len() != expect
        {
            return Err(Error::dim("dataset buffers disagree with N x M"));
        }
        for (k, (&obs, &t)) in self.observed.iter().zip(&self.targets).enumerate() {
            if obs && !t.is_finite() {
                return Err(Error::numeric(format!(
                    "observed cell {k} holds a non-finite target"
                )));
            }
        }
        Ok(())
    }
}

/// A flattened batch of (temporal, one-hot) coordinate rows for the models.
#[derive(Debug, Clone)]
pub struct CoordBatch {
    pub ct: Vec<f64>, // B x D_ct
    pub cf: Vec<f64>, // B x M
    pub d_ct: usize,
    pub m: usize,
    pub cells: Vec<(usize, usize)>,
    pub targets: Vec<f64>, // B, NaN where unobserved
}

impl CoordBatch {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Copy with the first temporal component shifted by `delta` (finite
    /// difference probes for the derivative penalty).
    pub fn shifted_first_component(&self, delta: f64) -> CoordBatch {
        let mut out = self.clone();
        for row in 0..out.len() {
            out.ct[row * out.d_ct] += delta;
        }
        out
    }
}
