//! Dense f64 tensors and a reverse-mode autodiff tape.
//!
//! The tape is define-by-run: every training epoch builds a fresh `Tape`,
//! records the forward pass, and walks it once in reverse. Leaves keep a
//! persistent gradient buffer so repeated `backward` calls accumulate, which
//! mirrors the usual deep-learning convention.

use crate::error::{Error, Result};

// ── Tensor ──────────────────────────────────────────────────────────

/// Dense N-dimensional array of f64 in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
    requires_grad: bool,
    grad: Option<Vec<f64>>,
}

impl Tensor {
    pub fn from_vec(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::dim(format!(
                "shape {:?} implies {} elements, got {}",
                shape,
                numel,
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::numeric("tensor contains non-finite values"));
        }
        Ok(Tensor {
            shape,
            data,
            requires_grad: false,
            grad: None,
        })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let numel = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; numel],
            requires_grad: false,
            grad: None,
        }
    }

    pub fn full(shape: Vec<usize>, value: f64) -> Self {
        let numel = shape.iter().product();
        Tensor {
            shape,
            data: vec![value; numel],
            requires_grad: false,
            grad: None,
        }
    }

    pub fn scalar(value: f64) -> Self {
        Tensor {
            shape: vec![1],
            data: vec![value],
            requires_grad: false,
            grad: None,
        }
    }

    /// Mark as a differentiable leaf; allocates the gradient buffer.
    pub fn with_grad(mut self) -> Self {
        self.requires_grad = true;
        self.grad = Some(vec![0.0; self.data.len()]);
        self
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn requires_grad(&self) -> bool {
        self.requires_grad
    }

    pub fn grad(&self) -> Option<&[f64]> {
        self.grad.as_deref()
    }

    pub fn grad_mut(&mut self) -> Option<&mut [f64]> {
        self.grad.as_deref_mut()
    }

    pub fn zero_grad(&mut self) {
        if let Some(g) = self.grad.as_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    pub fn accumulate_grad(&mut self, delta: &[f64]) {
        if let Some(g) = self.grad.as_mut() {
            debug_assert_eq!(g.len(), delta.len());
            for (gi, di) in g.iter_mut().zip(delta) {
                *gi += di;
            }
        }
    }
}

// ── Matmul kernels ──────────────────────────────────────────────────

/// C[m,n] = A[m,k] · B[k,n]; ikj loop order so the inner loop streams rows.
pub(crate) fn matmul_nn(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        let c_row = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            let a_ip = a[i * k + p];
            if a_ip == 0.0 {
                continue;
            }
            let b_row = &b[p * n..(p + 1) * n];
            for j in 0..n {
                c_row[j] += a_ip * b_row[j];
            }
        }
    }
    c
}

/// C[m,k] = A[m,n] · B[k,n]ᵀ (row-by-row dot products).
pub(crate) fn matmul_nt(a: &[f64], b: &[f64], m: usize, n: usize, k: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * k];
    for i in 0..m {
        let a_row = &a[i * n..(i + 1) * n];
        for p in 0..k {
            let b_row = &b[p * n..(p + 1) * n];
            let mut s = 0.0;
            for j in 0..n {
                s += a_row[j] * b_row[j];
            }
            c[i * k + p] = s;
        }
    }
    c
}

/// C[k,n] = A[m,k]ᵀ · B[m,n].
pub(crate) fn matmul_tn(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; k * n];
    for i in 0..m {
        let b_row = &b[i * n..(i + 1) * n];
        for p in 0..k {
            let a_ip = a[i * k + p];
            if a_ip == 0.0 {
                continue;
            }
            let c_row = &mut c[p * n..(p + 1) * n];
            for j in 0..n {
                c_row[j] += a_ip * b_row[j];
            }
        }
    }
    c
}

// ── Broadcasting ────────────────────────────────────────────────────

/// NumPy-style trailing broadcast: shapes align from the right, axes must
/// match or have extent 1.
pub fn broadcast_shape(a: &[usize], b: &[usize]) -> Result<Vec<usize>> {
    let rank = a.len().max(b.len());
    let mut out = vec![0usize; rank];
    for i in 0..rank {
        let da = if i < rank - a.len() { 1 } else { a[i - (rank - a.len())] };
        let db = if i < rank - b.len() { 1 } else { b[i - (rank - b.len())] };
        if da != db && da != 1 && db != 1 {
            return Err(Error::dim(format!(
                "shapes {a:?} and {b:?} are not broadcast-compatible"
            )));
        }
        out[i] = da.max(db);
    }
    Ok(out)
}

/// Strides into `shape` when read under `out_shape`; broadcast axes get
/// stride 0 so the same element is revisited.
fn broadcast_strides(shape: &[usize], out_shape: &[usize]) -> Vec<usize> {
    let rank = out_shape.len();
    let offset = rank - shape.len();
    let mut real = vec![0usize; shape.len()];
    let mut acc = 1;
    for i in (0..shape.len()).rev() {
        real[i] = acc;
        acc *= shape[i];
    }
    let mut strides = vec![0usize; rank];
    for i in 0..rank {
        if i >= offset && shape[i - offset] != 1 {
            strides[i] = real[i - offset];
        }
    }
    strides
}

/// Visit every output index of a broadcast binary op, yielding the linear
/// offsets (out, a, b). Uses an odometer rather than per-element div/mod.
fn for_each_broadcast3(
    out_shape: &[usize],
    a_shape: &[usize],
    b_shape: &[usize],
    mut f: impl FnMut(usize, usize, usize),
) {
    let numel: usize = out_shape.iter().product();
    if numel == 0 {
        return;
    }
    let sa = broadcast_strides(a_shape, out_shape);
    let sb = broadcast_strides(b_shape, out_shape);
    let rank = out_shape.len();
    let mut idx = vec![0usize; rank];
    let (mut oa, mut ob) = (0usize, 0usize);
    for out_i in 0..numel {
        f(out_i, oa, ob);
        for ax in (0..rank).rev() {
            idx[ax] += 1;
            oa += sa[ax];
            ob += sb[ax];
            if idx[ax] < out_shape[ax] {
                break;
            }
            idx[ax] = 0;
            oa -= sa[ax] * out_shape[ax];
            ob -= sb[ax] * out_shape[ax];
        }
    }
}

// ── Tape ────────────────────────────────────────────────────────────

/// Handle to a value recorded on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryKind {
    Add,
    Sub,
    Mul,
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul { a: usize, b: usize },
    Binary { kind: BinaryKind, a: usize, b: usize },
    Relu { a: usize },
    Sin { a: usize },
    Square { a: usize },
    Scale { a: usize, c: f64 },
    AddConst { a: usize },
    Concat { inputs: Vec<usize>, axis: usize },
    Sum { a: usize },
    Mean { a: usize },
    Mse { pred: usize, target: usize, mask: Option<Vec<f64>>, count: f64 },
}

struct Node {
    shape: Vec<usize>,
    data: Vec<f64>,
    /// Persistent gradient, accumulated across backward calls.
    grad: Vec<f64>,
    requires: bool,
    op: Op,
}

/// Reverse-mode tape. Operations are recorded in topological order by
/// construction; `backward` walks them exactly once in reverse.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, shape: Vec<usize>, data: Vec<f64>, requires: bool, op: Op) -> Var {
        let numel = data.len();
        self.nodes.push(Node {
            shape,
            data,
            grad: vec![0.0; numel],
            requires,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    /// Record a differentiable leaf from a tensor's current values.
    pub fn leaf(&mut self, t: &Tensor) -> Var {
        self.push(t.shape().to_vec(), t.data().to_vec(), t.requires_grad(), Op::Leaf)
    }

    /// Record a non-differentiable constant.
    pub fn constant(&mut self, t: &Tensor) -> Var {
        self.push(t.shape().to_vec(), t.data().to_vec(), false, Op::Leaf)
    }

    pub fn constant_from(&mut self, shape: Vec<usize>, data: Vec<f64>) -> Var {
        self.push(shape, data, false, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].data
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    /// Accumulated gradient of a node (meaningful after `backward`).
    pub fn grad(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].grad
    }

    // ── Forward ops ──

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (&self.nodes[a.0].shape, &self.nodes[b.0].shape);
        if sa.len() != 2 || sb.len() != 2 {
            return Err(Error::dim(format!("matmul expects 2-D operands, got {sa:?} x {sb:?}")));
        }
        let (m, k, k2, n) = (sa[0], sa[1], sb[0], sb[1]);
        if k != k2 {
            return Err(Error::dim(format!("matmul inner dims differ: {sa:?} x {sb:?}")));
        }
        let data = matmul_nn(&self.nodes[a.0].data, &self.nodes[b.0].data, m, k, n);
        let req = self.nodes[a.0].requires || self.nodes[b.0].requires;
        Ok(self.push(vec![m, n], data, req, Op::MatMul { a: a.0, b: b.0 }))
    }

    fn binary(&mut self, kind: BinaryKind, a: Var, b: Var) -> Result<Var> {
        let out_shape = broadcast_shape(&self.nodes[a.0].shape, &self.nodes[b.0].shape)?;
        let numel: usize = out_shape.iter().product();
        let mut data = vec![0.0; numel];
        {
            let (da, db) = (&self.nodes[a.0].data, &self.nodes[b.0].data);
            if self.nodes[a.0].shape == self.nodes[b.0].shape {
                match kind {
                    BinaryKind::Add => {
                        for i in 0..numel {
                            data[i] = da[i] + db[i];
                        }
                    }
                    BinaryKind::Sub => {
                        for i in 0..numel {
                            data[i] = da[i] - db[i];
                        }
                    }
                    BinaryKind::Mul => {
                        for i in 0..numel {
                            data[i] = da[i] * db[i];
                        }
                    }
                }
            } else {
                for_each_broadcast3(&out_shape, &self.nodes[a.0].shape, &self.nodes[b.0].shape, |o, ia, ib| {
                    data[o] = match kind {
                        BinaryKind::Add => da[ia] + db[ib],
                        BinaryKind::Sub => da[ia] - db[ib],
                        BinaryKind::Mul => da[ia] * db[ib],
                    };
                });
            }
        }
        let req = self.nodes[a.0].requires || self.nodes[b.0].requires;
        Ok(self.push(out_shape, data, req, Op::Binary { kind, a: a.0, b: b.0 }))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(BinaryKind::Add, a, b)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(BinaryKind::Sub, a, b)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(BinaryKind::Mul, a, b)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let data: Vec<f64> = self.nodes[a.0].data.iter().map(|&x| x.max(0.0)).collect();
        let shape = self.nodes[a.0].shape.clone();
        let req = self.nodes[a.0].requires;
        self.push(shape, data, req, Op::Relu { a: a.0 })
    }

    pub fn sin(&mut self, a: Var) -> Var {
        let data: Vec<f64> = self.nodes[a.0].data.iter().map(|&x| x.sin()).collect();
        let shape = self.nodes[a.0].shape.clone();
        let req = self.nodes[a.0].requires;
        self.push(shape, data, req, Op::Sin { a: a.0 })
    }

    pub fn square(&mut self, a: Var) -> Var {
        let data: Vec<f64> = self.nodes[a.0].data.iter().map(|&x| x * x).collect();
        let shape = self.nodes[a.0].shape.clone();
        let req = self.nodes[a.0].requires;
        self.push(shape, data, req, Op::Square { a: a.0 })
    }

    /// Multiply every element by a compile-time constant.
    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let data: Vec<f64> = self.nodes[a.0].data.iter().map(|&x| x * c).collect();
        let shape = self.nodes[a.0].shape.clone();
        let req = self.nodes[a.0].requires;
        self.push(shape, data, req, Op::Scale { a: a.0, c })
    }

    /// Add a constant to every element.
    pub fn add_const(&mut self, a: Var, c: f64) -> Var {
        let data: Vec<f64> = self.nodes[a.0].data.iter().map(|&x| x + c).collect();
        let shape = self.nodes[a.0].shape.clone();
        let req = self.nodes[a.0].requires;
        self.push(shape, data, req, Op::AddConst { a: a.0 })
    }

    pub fn concat(&mut self, inputs: &[Var], axis: usize) -> Result<Var> {
        if inputs.is_empty() {
            return Err(Error::degenerate("concat of zero tensors"));
        }
        let first = &self.nodes[inputs[0].0].shape;
        let rank = first.len();
        if axis >= rank {
            return Err(Error::dim(format!("concat axis {axis} out of rank {rank}")));
        }
        let mut out_shape = first.clone();
        out_shape[axis] = 0;
        for &v in inputs {
            let s = &self.nodes[v.0].shape;
            if s.len() != rank {
                return Err(Error::dim("concat rank mismatch"));
            }
            for (ax, (&da, &db)) in first.iter().zip(s.iter()).enumerate() {
                if ax != axis && da != db {
                    return Err(Error::dim(format!(
                        "concat extents differ on non-axis dim {ax}: {first:?} vs {s:?}"
                    )));
                }
            }
            out_shape[axis] += s[axis];
        }
        // Row-major copy: outer = product of dims before axis, inner = after.
        let outer: usize = out_shape[..axis].iter().product();
        let inner: usize = out_shape[axis + 1..].iter().product();
        let total_axis = out_shape[axis];
        let mut data = vec![0.0; outer * total_axis * inner];
        let mut offset = 0;
        for &v in inputs {
            let s_axis = self.nodes[v.0].shape[axis];
            let src = &self.nodes[v.0].data;
            for o in 0..outer {
                let src_start = o * s_axis * inner;
                let dst_start = (o * total_axis + offset) * inner;
                data[dst_start..dst_start + s_axis * inner]
                    .copy_from_slice(&src[src_start..src_start + s_axis * inner]);
            }
            offset += s_axis;
        }
        let req = inputs.iter().any(|v| self.nodes[v.0].requires);
        Ok(self.push(
            out_shape,
            data,
            req,
            Op::Concat { inputs: inputs.iter().map(|v| v.0).collect(), axis },
        ))
    }

    /// Copy a value as a fresh constant leaf: forward values pass through,
    /// gradients stop here.
    pub fn detach(&mut self, a: Var) -> Var {
        let shape = self.nodes[a.0].shape.clone();
        let data = self.nodes[a.0].data.clone();
        self.push(shape, data, false, Op::Leaf)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s: f64 = self.nodes[a.0].data.iter().sum();
        let req = self.nodes[a.0].requires;
        self.push(vec![1], vec![s], req, Op::Sum { a: a.0 })
    }

    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let n = self.nodes[a.0].data.len();
        if n == 0 {
            return Err(Error::degenerate("mean of empty tensor"));
        }
        let s: f64 = self.nodes[a.0].data.iter().sum::<f64>() / n as f64;
        let req = self.nodes[a.0].requires;
        Ok(self.push(vec![1], vec![s], req, Op::Mean { a: a.0 }))
    }

    /// Mean squared error, optionally masked. The mask is 0/1 per element;
    /// the divisor is the count of unmasked entries.
    pub fn mse(&mut self, pred: Var, target: Var) -> Result<Var> {
        self.mse_masked(pred, target, None)
    }

    pub fn mse_masked(&mut self, pred: Var, target: Var, mask: Option<&[f64]>) -> Result<Var> {
        if self.nodes[pred.0].shape != self.nodes[target.0].shape {
            return Err(Error::dim(format!(
                "mse shapes differ: {:?} vs {:?}",
                self.nodes[pred.0].shape, self.nodes[target.0].shape
            )));
        }
        if self.nodes[target.0].requires {
            return Err(Error::contract("mse target must not require grad"));
        }
        let n = self.nodes[pred.0].data.len();
        let count = match mask {
            Some(m) => {
                if m.len() != n {
                    return Err(Error::dim("mse mask length mismatch"));
                }
                m.iter().sum::<f64>()
            }
            None => n as f64,
        };
        if count == 0.0 {
            return Err(Error::degenerate("mse over an empty mask"));
        }
        let (p, t) = (&self.nodes[pred.0].data, &self.nodes[target.0].data);
        let mut acc = 0.0;
        match mask {
            Some(m) => {
                for i in 0..n {
                    let d = p[i] - t[i];
                    acc += m[i] * d * d;
                }
            }
            None => {
                for i in 0..n {
                    let d = p[i] - t[i];
                    acc += d * d;
                }
            }
        }
        let value = acc / count;
        if !value.is_finite() {
            return Err(Error::numeric("mse produced a non-finite value"));
        }
        let req = self.nodes[pred.0].requires;
        Ok(self.push(
            vec![1],
            vec![value],
            req,
            Op::Mse { pred: pred.0, target: target.0, mask: mask.map(|m| m.to_vec()), count },
        ))
    }

    // ── Backward ──

    /// Reverse pass from a scalar loss. Gradients are computed in a scratch
    /// buffer and then added into each node's persistent gradient, so calling
    /// twice doubles leaf gradients.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.nodes[loss.0].data.len() != 1 {
            return Err(Error::contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.nodes[loss.0].shape
            )));
        }
        let n = self.nodes.len();
        let mut scratch: Vec<Vec<f64>> = self
            .nodes
            .iter()
            .map(|node| vec![0.0; node.data.len()])
            .collect();
        scratch[loss.0][0] = 1.0;

        for i in (0..=loss.0).rev() {
            if !self.nodes[i].requires || scratch[i].iter().all(|&g| g == 0.0) {
                continue;
            }
            // Take the node's gradient out of scratch so input gradients
            // can be written while it is read.
            let g_out = std::mem::take(&mut scratch[i]);
            match &self.nodes[i].op {
                Op::Leaf => {}
                Op::MatMul { a, b } => {
                    let (m, k) = (self.nodes[*a].shape[0], self.nodes[*a].shape[1]);
                    let n_cols = self.nodes[*b].shape[1];
                    if self.nodes[*a].requires {
                        let da = matmul_nt(&g_out, &self.nodes[*b].data, m, n_cols, k);
                        add_into(&mut scratch[*a], &da);
                    }
                    if self.nodes[*b].requires {
                        let db = matmul_tn(&self.nodes[*a].data, &g_out, m, k, n_cols);
                        add_into(&mut scratch[*b], &db);
                    }
                }
                Op::Binary { kind, a, b } => {
                    let kind = *kind;
                    let (a, b) = (*a, *b);
                    let out_shape = self.nodes[i].shape.clone();
                    let a_shape = self.nodes[a].shape.clone();
                    let b_shape = self.nodes[b].shape.clone();
                    let (need_a, need_b) = (self.nodes[a].requires, self.nodes[b].requires);
                    if a_shape == b_shape {
                        let len = g_out.len();
                        match kind {
                            BinaryKind::Add => {
                                if need_a {
                                    add_into(&mut scratch[a], &g_out);
                                }
                                if need_b {
                                    add_into(&mut scratch[b], &g_out);
                                }
                            }
                            BinaryKind::Sub => {
                                if need_a {
                                    add_into(&mut scratch[a], &g_out);
                                }
                                if need_b {
                                    for idx in 0..len {
                                        scratch[b][idx] -= g_out[idx];
                                    }
                                }
                            }
                            BinaryKind::Mul => {
                                if need_a {
                                    let db = &self.nodes[b].data;
                                    for idx in 0..len {
                                        scratch[a][idx] += g_out[idx] * db[idx];
                                    }
                                }
                                if need_b {
                                    let da = &self.nodes[a].data;
                                    for idx in 0..len {
                                        scratch[b][idx] += g_out[idx] * da[idx];
                                    }
                                }
                            }
                        }
                    } else {
                        // Gradient of a broadcast operand sums over the
                        // broadcast axes; the shared iteration does that
                        // for free because offsets repeat.
                        let mut ga = std::mem::take(&mut scratch[a]);
                        let mut gb = std::mem::take(&mut scratch[b]);
                        {
                            let da = &self.nodes[a].data;
                            let db = &self.nodes[b].data;
                            for_each_broadcast3(&out_shape, &a_shape, &b_shape, |o, ia, ib| {
                                match kind {
                                    BinaryKind::Add => {
                                        if need_a {
                                            ga[ia] += g_out[o];
                                        }
                                        if need_b {
                                            gb[ib] += g_out[o];
                                        }
                                    }
                                    BinaryKind::Sub => {
                                        if need_a {
                                            ga[ia] += g_out[o];
                                        }
                                        if need_b {
                                            gb[ib] -= g_out[o];
                                        }
                                    }
                                    BinaryKind::Mul => {
                                        if need_a {
                                            ga[ia] += g_out[o] * db[ib];
                                        }
                                        if need_b {
                                            gb[ib] += g_out[o] * da[ia];
                                        }
                                    }
                                }
                            });
                        }
                        scratch[a] = ga;
                        scratch[b] = gb;
                    }
                }
                Op::Relu { a } => {
                    if self.nodes[*a].requires {
                        let a = *a;
                        let mut ga = std::mem::take(&mut scratch[a]);
                        let xs = &self.nodes[a].data;
                        // Subgradient at 0 is 0.
                        for idx in 0..g_out.len() {
                            if xs[idx] > 0.0 {
                                ga[idx] += g_out[idx];
                            }
                        }
                        scratch[a] = ga;
                    }
                }
                Op::Sin { a } => {
                    if self.nodes[*a].requires {
                        let a = *a;
                        let mut ga = std::mem::take(&mut scratch[a]);
                        let xs = &self.nodes[a].data;
                        for idx in 0..g_out.len() {
                            ga[idx] += g_out[idx] * xs[idx].cos();
                        }
                        scratch[a] = ga;
                    }
                }
                Op::Square { a } => {
                    if self.nodes[*a].requires {
                        let a = *a;
                        let mut ga = std::mem::take(&mut scratch[a]);
                        let xs = &self.nodes[a].data;
                        for idx in 0..g_out.len() {
                            ga[idx] += g_out[idx] * 2.0 * xs[idx];
                        }
                        scratch[a] = ga;
                    }
                }
                Op::Scale { a, c } => {
                    if self.nodes[*a].requires {
                        let (a, c) = (*a, *c);
                        let mut ga = std::mem::take(&mut scratch[a]);
                        for idx in 0..g_out.len() {
                            ga[idx] += g_out[idx] * c;
                        }
                        scratch[a] = ga;
                    }
                }
                Op::AddConst { a } => {
                    if self.nodes[*a].requires {
                        add_into(&mut scratch[*a], &g_out);
                    }
                }
                Op::Concat { inputs, axis } => {
                    let inputs = inputs.clone();
                    let axis = *axis;
                    let out_shape = self.nodes[i].shape.clone();
                    let outer: usize = out_shape[..axis].iter().product();
                    let inner: usize = out_shape[axis + 1..].iter().product();
                    let total_axis = out_shape[axis];
                    let mut offset = 0;
                    for inp in inputs {
                        let s_axis = self.nodes[inp].shape[axis];
                        if self.nodes[inp].requires {
                            let mut gi = std::mem::take(&mut scratch[inp]);
                            for o in 0..outer {
                                let dst_start = o * s_axis * inner;
                                let src_start = (o * total_axis + offset) * inner;
                                for idx in 0..s_axis * inner {
                                    gi[dst_start + idx] += g_out[src_start + idx];
                                }
                            }
                            scratch[inp] = gi;
                        }
                        offset += s_axis;
                    }
                }
                Op::Sum { a } => {
                    if self.nodes[*a].requires {
                        let a = *a;
                        let g = g_out[0];
                        let mut ga = std::mem::take(&mut scratch[a]);
                        for v in ga.iter_mut() {
                            *v += g;
                        }
                        scratch[a] = ga;
                    }
                }
                Op::Mean { a } => {
                    if self.nodes[*a].requires {
                        let a = *a;
                        let g = g_out[0] / self.nodes[a].data.len() as f64;
                        let mut ga = std::mem::take(&mut scratch[a]);
                        for v in ga.iter_mut() {
                            *v += g;
                        }
                        scratch[a] = ga;
                    }
                }
                Op::Mse { pred, target, mask, count } => {
                    if self.nodes[*pred].requires {
                        let (pred, target, count) = (*pred, *target, *count);
                        let mask = mask.clone();
                        let g = g_out[0];
                        let mut gp = std::mem::take(&mut scratch[pred]);
                        let p = &self.nodes[pred].data;
                        let t = &self.nodes[target].data;
                        match mask {
                            Some(m) => {
                                for idx in 0..p.len() {
                                    gp[idx] += g * 2.0 * m[idx] * (p[idx] - t[idx]) / count;
                                }
                            }
                            None => {
                                for idx in 0..p.len() {
                                    gp[idx] += g * 2.0 * (p[idx] - t[idx]) / count;
                                }
                            }
                        }
                        scratch[pred] = gp;
                    }
                }
            }
            scratch[i] = g_out;
        }

        for i in 0..n {
            if self.nodes[i].requires {
                for (g, s) in self.nodes[i].grad.iter_mut().zip(&scratch[i]) {
                    *g += s;
                }
            }
        }
        Ok(())
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    debug_assert_eq!(dst.len(), src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}
