//! Tape-based reverse-mode differentiation over [`Tensor`] values.
//!
//! Operations are recorded in execution order, so the record order is already a
//! topological order and the backward pass is a single reverse sweep.

use std::borrow::Cow;

use super::params::{ParamId, ParamStore};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Param,
    MatMul(Var, Var),
    MatMulT(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    MulRow(Var, Var),
    Affine(Var, f64),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    SliceCols(Var, usize),
    SliceRows(Var, usize),
    GatherRows(Var, Vec<usize>),
    Sum(Var),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    LeakyRelu(Var, f64),
    Exp(Var),
    Log(Var),
    SoftmaxRows(Var),
    LayerNormRows(Var, f64),
    BceWithLogits(Var, Vec<f64>),
    Transpose(Var),
    Reshape(Var),
}

struct Node<'p> {
    value: Cow<'p, Tensor>,
    op: Op,
}

pub struct Tape<'p> {
    store: &'p ParamStore,
    nodes: Vec<Node<'p>>,
    param_vars: Vec<Option<Var>>,
}

/// Gradients of one scalar with respect to the leaves (constants and parameters) that
/// influence it. Intermediate gradients are dropped during the sweep.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn wrt(&self, v: Var) -> Option<&Tensor> {
        self.grads[v.0].as_ref()
    }
}

impl<'p> Tape<'p> {
    pub fn new(store: &'p ParamStore) -> Self {
        Tape {
            store,
            nodes: Vec::with_capacity(256),
            param_vars: vec![None; store.len()],
        }
    }

    pub fn store(&self) -> &'p ParamStore {
        self.store
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node {
            value: Cow::Owned(value),
            op,
        });
        Var(self.nodes.len() - 1)
    }

    #[inline]
    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> [usize; 2] {
        self.value(v).shape()
    }

    /// A constant input; it receives gradients but belongs to no parameter.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf)
    }

    /// The parameter's value, borrowed from the store. Repeated calls return the same handle.
    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(v) = self.param_vars[id.index()] {
            return v;
        }
        self.nodes.push(Node {
            value: Cow::Borrowed(self.store.value(id)),
            op: Op::Param,
        });
        let v = Var(self.nodes.len() - 1);
        self.param_vars[id.index()] = Some(v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).matmul(self.value(b));
        self.push(out, Op::MatMul(a, b))
    }

    /// `a · bᵀ`.
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).matmul_t(self.value(b));
        self.push(out, Op::MatMulT(a, b))
    }

    fn zip_with(&self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: &str) -> Tensor {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.shape(), y.shape(), "{op}: shape mismatch");
        Tensor::from_vec(
            x.rows(),
            x.cols(),
            x.data().iter().zip(y.data()).map(|(&p, &q)| f(p, q)).collect(),
        )
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let out = self.zip_with(a, b, |p, q| p + q, "add");
        self.push(out, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let out = self.zip_with(a, b, |p, q| p - q, "sub");
        self.push(out, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let out = self.zip_with(a, b, |p, q| p * q, "mul");
        self.push(out, Op::Mul(a, b))
    }

    fn broadcast_row(&self, a: Var, row: Var, f: impl Fn(f64, f64) -> f64) -> Tensor {
        let (x, r) = (self.value(a), self.value(row));
        assert!(
            r.rows() == 1 && r.cols() == x.cols(),
            "row broadcast: {:?} against {:?}",
            r.shape(),
            x.shape()
        );
        let mut out = x.clone();
        let c = x.cols();
        for chunk in out.data_mut().chunks_mut(c.max(1)) {
            for (o, &b) in chunk.iter_mut().zip(r.data()) {
                *o = f(*o, b);
            }
        }
        out
    }

    /// Adds a `1 x c` row to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        let out = self.broadcast_row(a, row, |p, q| p + q);
        self.push(out, Op::AddRow(a, row))
    }

    /// Multiplies every row of `a` elementwise by a `1 x c` row.
    pub fn mul_row(&mut self, a: Var, row: Var) -> Var {
        let out = self.broadcast_row(a, row, |p, q| p * q);
        self.push(out, Op::MulRow(a, row))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        self.affine(a, s, 0.0)
    }

    /// `s * a + shift`.
    pub fn affine(&mut self, a: Var, s: f64, shift: f64) -> Var {
        let out = self.value(a).map(|x| s * x + shift);
        self.push(out, Op::Affine(a, s))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty(), "concat_cols of nothing");
        let rows = self.value(parts[0]).rows();
        let cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for &p in parts {
                let t = self.value(p);
                assert_eq!(t.rows(), rows, "concat_cols: row mismatch");
                out.extend_from_slice(t.row(r));
            }
        }
        self.push(Tensor::from_vec(rows, cols, out), Op::ConcatCols(parts.to_vec()))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty(), "concat_rows of nothing");
        let cols = self.value(parts[0]).cols();
        let mut out = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let t = self.value(p);
            assert_eq!(t.cols(), cols, "concat_rows: column mismatch");
            out.extend_from_slice(t.data());
            rows += t.rows();
        }
        self.push(Tensor::from_vec(rows, cols, out), Op::ConcatRows(parts.to_vec()))
    }

    /// Columns `start..start + len`.
    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Var {
        let t = self.value(a);
        assert!(start + len <= t.cols(), "slice_cols out of range");
        let mut out = Vec::with_capacity(t.rows() * len);
        for r in 0..t.rows() {
            out.extend_from_slice(&t.row(r)[start..start + len]);
        }
        let rows = t.rows();
        self.push(Tensor::from_vec(rows, len, out), Op::SliceCols(a, start))
    }

    /// Rows `start..start + len`.
    pub fn slice_rows(&mut self, a: Var, start: usize, len: usize) -> Var {
        let t = self.value(a);
        assert!(start + len <= t.rows(), "slice_rows out of range");
        let c = t.cols();
        let out = t.data()[start * c..(start + len) * c].to_vec();
        self.push(Tensor::from_vec(len, c, out), Op::SliceRows(a, start))
    }

    /// Rows picked by index; indices may repeat.
    pub fn gather_rows(&mut self, a: Var, idx: &[usize]) -> Var {
        let t = self.value(a);
        let c = t.cols();
        let mut out = Vec::with_capacity(idx.len() * c);
        for &i in idx {
            out.extend_from_slice(t.row(i));
        }
        self.push(
            Tensor::from_vec(idx.len(), c, out),
            Op::GatherRows(a, idx.to_vec()),
        )
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).sum();
        self.push(Tensor::scalar(s), Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let n = self.value(a).len() as f64;
        let s = self.sum(a);
        self.scale(s, 1.0 / n)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).map(sigmoid);
        self.push(out, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::tanh);
        self.push(out, Op::Tanh(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|x| x.max(0.0));
        self.push(out, Op::Relu(a))
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        let out = self.value(a).map(|x| if x > 0.0 { x } else { slope * x });
        self.push(out, Op::LeakyRelu(a, slope))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::exp);
        self.push(out, Op::Exp(a))
    }

    pub fn log(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::ln);
        self.push(out, Op::Log(a))
    }

    /// Row-wise softmax. `-inf` entries act as a mask and get probability zero; every row must
    /// keep at least one finite entry.
    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let t = self.value(a);
        let c = t.cols();
        let mut out = t.clone();
        for row in out.data_mut().chunks_mut(c.max(1)) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(max.is_finite(), "softmax row with no finite entry");
            let mut z = 0.0;
            for x in row.iter_mut() {
                *x = (*x - max).exp();
                z += *x;
            }
            for x in row.iter_mut() {
                *x /= z;
            }
        }
        self.push(out, Op::SoftmaxRows(a))
    }

    /// Softmax of `a + mask`, where `mask` holds `0` or `-inf`.
    pub fn masked_softmax_rows(&mut self, a: Var, mask: &Tensor) -> Var {
        let m = self.constant(mask.clone());
        let shifted = self.add(a, m);
        self.softmax_rows(shifted)
    }

    /// Per-row standardization `(x - mean) / sqrt(var + eps)`, without affine terms.
    pub fn layer_norm_rows(&mut self, a: Var, eps: f64) -> Var {
        let t = self.value(a);
        let c = t.cols();
        let mut out = t.clone();
        for row in out.data_mut().chunks_mut(c.max(1)) {
            let mean = row.iter().sum::<f64>() / c as f64;
            let var = row.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / c as f64;
            let inv = 1.0 / (var + eps).sqrt();
            for x in row.iter_mut() {
                *x = (*x - mean) * inv;
            }
        }
        self.push(out, Op::LayerNormRows(a, eps))
    }

    /// `Σ softplus(z) - y z`: the summed negative Bernoulli log-likelihood of 0/1 targets
    /// under logits `z`.
    pub fn bce_with_logits(&mut self, logits: Var, targets: &[f64]) -> Var {
        let z = self.value(logits);
        assert_eq!(z.len(), targets.len(), "bce_with_logits: target count");
        let loss: f64 = z
            .data()
            .iter()
            .zip(targets)
            .map(|(&z, &y)| softplus(z) - y * z)
            .sum();
        self.push(
            Tensor::scalar(loss),
            Op::BceWithLogits(logits, targets.to_vec()),
        )
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let out = self.value(a).transpose();
        self.push(out, Op::Transpose(a))
    }

    /// Same data in row-major order under a new shape.
    pub fn reshape(&mut self, a: Var, rows: usize, cols: usize) -> Var {
        let v = self.value(a);
        assert_eq!(v.len(), rows * cols, "reshape must preserve the element count");
        let out = Tensor::from_vec(rows, cols, v.data().to_vec());
        self.push(out, Op::Reshape(a))
    }

    /// Reverse sweep from a scalar.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let shape = self.shape(loss);
        if shape != [1, 1] {
            return Err(Error::shape(
                "backward",
                format!("loss must be a 1x1 scalar, got {shape:?}"),
            ));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if matches!(node.op, Op::Leaf | Op::Param) {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            let y = &*node.value;
            match &node.op {
                Op::Leaf | Op::Param => unreachable!(),
                Op::MatMul(a, b) => {
                    let ga = g.matmul_t(self.value(*b));
                    let gb = self.value(*a).t_matmul(&g);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::MatMulT(a, b) => {
                    let ga = g.matmul(self.value(*b));
                    let gb = g.t_matmul(self.value(*a));
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *b, g.clone());
                    accumulate(&mut grads, *a, g);
                }
                Op::Sub(a, b) => {
                    accumulate(&mut grads, *b, g.map(|x| -x));
                    accumulate(&mut grads, *a, g);
                }
                Op::Mul(a, b) => {
                    let ga = elementwise(&g, self.value(*b), |p, q| p * q);
                    let gb = elementwise(&g, self.value(*a), |p, q| p * q);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::AddRow(a, r) => {
                    accumulate(&mut grads, *r, column_sums(&g));
                    accumulate(&mut grads, *a, g);
                }
                Op::MulRow(a, r) => {
                    let x = self.value(*a);
                    let row = self.value(*r);
                    let c = g.cols();
                    let mut ga = g.clone();
                    let mut gr = vec![0.0; c];
                    for (k, (gv, xv)) in ga.data_mut().iter_mut().zip(x.data()).enumerate() {
                        let j = k % c;
                        gr[j] += *gv * xv;
                        *gv *= row.data()[j];
                    }
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *r, Tensor::row_vector(gr));
                }
                Op::Affine(a, s) => {
                    let s = *s;
                    accumulate(&mut grads, *a, g.map(|x| s * x));
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let pc = self.value(p).cols();
                        let mut part = Vec::with_capacity(g.rows() * pc);
                        for r in 0..g.rows() {
                            part.extend_from_slice(&g.row(r)[offset..offset + pc]);
                        }
                        accumulate(&mut grads, p, Tensor::from_vec(g.rows(), pc, part));
                        offset += pc;
                    }
                }
                Op::ConcatRows(parts) => {
                    let c = g.cols();
                    let mut offset = 0;
                    for &p in parts {
                        let pr = self.value(p).rows();
                        let part = g.data()[offset * c..(offset + pr) * c].to_vec();
                        accumulate(&mut grads, p, Tensor::from_vec(pr, c, part));
                        offset += pr;
                    }
                }
                Op::SliceCols(a, start) => {
                    let x = self.value(*a);
                    let mut ga = Tensor::zeros(x.rows(), x.cols());
                    let len = g.cols();
                    for r in 0..g.rows() {
                        let dst = &mut ga.data_mut()[r * x.cols() + start..][..len];
                        dst.copy_from_slice(g.row(r));
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::SliceRows(a, start) => {
                    let x = self.value(*a);
                    let mut ga = Tensor::zeros(x.rows(), x.cols());
                    let c = x.cols();
                    ga.data_mut()[start * c..start * c + g.len()].copy_from_slice(g.data());
                    accumulate(&mut grads, *a, ga);
                }
                Op::GatherRows(a, idx) => {
                    let x = self.value(*a);
                    let c = x.cols();
                    let mut ga = Tensor::zeros(x.rows(), c);
                    for (k, &i) in idx.iter().enumerate() {
                        let src = g.row(k);
                        for (d, s) in ga.data_mut()[i * c..(i + 1) * c].iter_mut().zip(src) {
                            *d += s;
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::Sum(a) => {
                    let x = self.value(*a);
                    accumulate(&mut grads, *a, Tensor::filled(x.rows(), x.cols(), g.item()));
                }
                Op::Sigmoid(a) => {
                    let ga = elementwise(&g, y, |gv, s| gv * s * (1.0 - s));
                    accumulate(&mut grads, *a, ga);
                }
                Op::Tanh(a) => {
                    let ga = elementwise(&g, y, |gv, t| gv * (1.0 - t * t));
                    accumulate(&mut grads, *a, ga);
                }
                Op::Relu(a) => {
                    let ga = elementwise(&g, self.value(*a), |gv, x| if x > 0.0 { gv } else { 0.0 });
                    accumulate(&mut grads, *a, ga);
                }
                Op::LeakyRelu(a, slope) => {
                    let slope = *slope;
                    let ga = elementwise(&g, self.value(*a), |gv, x| {
                        if x > 0.0 {
                            gv
                        } else {
                            slope * gv
                        }
                    });
                    accumulate(&mut grads, *a, ga);
                }
                Op::Exp(a) => {
                    let ga = elementwise(&g, y, |gv, e| gv * e);
                    accumulate(&mut grads, *a, ga);
                }
                Op::Log(a) => {
                    let ga = elementwise(&g, self.value(*a), |gv, x| gv / x);
                    accumulate(&mut grads, *a, ga);
                }
                Op::SoftmaxRows(a) => {
                    let c = g.cols();
                    let mut ga = g.clone();
                    for (grow, yrow) in ga.data_mut().chunks_mut(c).zip(y.data().chunks(c)) {
                        let dot: f64 = grow.iter().zip(yrow).map(|(p, q)| p * q).sum();
                        for (gv, &yv) in grow.iter_mut().zip(yrow) {
                            *gv = yv * (*gv - dot);
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::LayerNormRows(a, eps) => {
                    let x = self.value(*a);
                    let c = g.cols();
                    let mut ga = g.clone();
                    for ((grow, yrow), xrow) in ga
                        .data_mut()
                        .chunks_mut(c)
                        .zip(y.data().chunks(c))
                        .zip(x.data().chunks(c))
                    {
                        let mean = xrow.iter().sum::<f64>() / c as f64;
                        let var = xrow.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / c as f64;
                        let inv = 1.0 / (var + eps).sqrt();
                        let g_mean = grow.iter().sum::<f64>() / c as f64;
                        let gy_mean =
                            grow.iter().zip(yrow).map(|(p, q)| p * q).sum::<f64>() / c as f64;
                        for (gv, &yv) in grow.iter_mut().zip(yrow) {
                            *gv = inv * (*gv - g_mean - yv * gy_mean);
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::BceWithLogits(a, targets) => {
                    let z = self.value(*a);
                    let gs = g.item();
                    let data = z
                        .data()
                        .iter()
                        .zip(targets)
                        .map(|(&zv, &t)| gs * (sigmoid(zv) - t))
                        .collect();
                    accumulate(&mut grads, *a, Tensor::from_vec(z.rows(), z.cols(), data));
                }
                Op::Reshape(a) => {
                    let [r, c] = self.shape(*a);
                    accumulate(&mut grads, *a, Tensor::from_vec(r, c, g.into_data()));
                }
                Op::Transpose(a) => {
                    accumulate(&mut grads, *a, g.transpose());
                }
            }
        }
        Ok(Gradients { grads })
    }

    /// Gradient for every parameter of the store, zero where the parameter was not used.
    pub fn param_grads(&self, grads: &Gradients) -> Vec<Tensor> {
        (0..self.store.len())
            .map(|i| {
                let id = ParamId::new(i);
                self.param_vars[i]
                    .and_then(|v| grads.wrt(v).cloned())
                    .unwrap_or_else(|| {
                        let [r, c] = self.store.value(id).shape();
                        Tensor::zeros(r, c)
                    })
            })
            .collect()
    }
}

/// ∂loss/∂p for every parameter in the store. Parameters off the path get zeros.
pub fn differentiate(tape: &Tape<'_>, loss: Var) -> Result<Vec<Tensor>> {
    let grads = tape.backward(loss)?;
    Ok(tape.param_grads(&grads))
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => *slot = Some(g),
    }
}

fn elementwise(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    Tensor::from_vec(
        a.rows(),
        a.cols(),
        a.data().iter().zip(b.data()).map(|(&p, &q)| f(p, q)).collect(),
    )
}

fn column_sums(g: &Tensor) -> Tensor {
    let c = g.cols();
    let mut out = vec![0.0; c];
    for row in g.data().chunks(c.max(1)) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    Tensor::row_vector(out)
}
