use super::linear::{check_cols, Linear};
use crate::autodiff::{ParamId, ParamStore, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::rng::Rng64;

pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Clone, Debug)]
struct Head {
    proj: Linear,
    a_src: ParamId,
    a_dst: ParamId,
}

/// Single graph attention layer. Heads are concatenated; scores are
/// `LeakyReLU(a_src·z_i + a_dst·z_j)` normalized over each node's neighbourhood and the
/// aggregate goes through `tanh`.
#[derive(Clone, Debug)]
pub struct GatLayer {
    heads: Vec<Head>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl GatLayer {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        heads: usize,
        rng: &mut Rng64,
    ) -> Result<Self> {
        if heads == 0 || out_dim % heads != 0 {
            return Err(Error::param(format!(
                "GAT output width {out_dim} is not divisible into {heads} heads"
            )));
        }
        let d = out_dim / heads;
        let heads = (0..heads)
            .map(|k| Head {
                proj: Linear::new(store, &format!("{name}.head{k}.w"), in_dim, d, false, rng),
                a_src: store.add_uniform(format!("{name}.head{k}.a_src"), d, 1, d, rng),
                a_dst: store.add_uniform(format!("{name}.head{k}.a_dst"), d, 1, d, rng),
            })
            .collect();
        Ok(GatLayer {
            heads,
            in_dim,
            out_dim,
        })
    }

    /// `x` is `n x in_dim`; `mask` is the additive `n x n` attention mask, `0` on allowed
    /// pairs and `-inf` elsewhere (see [`attention_mask`]).
    pub fn forward(&self, t: &mut Tape<'_>, x: Var, mask: &Tensor) -> Result<Var> {
        check_cols("gat", t, x, self.in_dim)?;
        let [n, _] = t.shape(x);
        if mask.shape() != [n, n] {
            return Err(Error::shape(
                "gat",
                format!("mask is {:?} for {n} nodes", mask.shape()),
            ));
        }
        let ones_row = t.constant(Tensor::filled(1, n, 1.0));
        let ones_col = t.constant(Tensor::filled(n, 1, 1.0));
        let mut outs = Vec::with_capacity(self.heads.len());
        for head in &self.heads {
            let z = head.proj.forward(t, x)?;
            let a_src = t.param(head.a_src);
            let a_dst = t.param(head.a_dst);
            let s = t.matmul(z, a_src);
            let d = t.matmul(z, a_dst);
            let d = t.transpose(d);
            let e_src = t.matmul(s, ones_row);
            let e_dst = t.matmul(ones_col, d);
            let e = t.add(e_src, e_dst);
            let e = t.leaky_relu(e, LEAKY_SLOPE);
            let alpha = t.masked_softmax_rows(e, mask);
            let agg = t.matmul(alpha, z);
            outs.push(t.tanh(agg));
        }
        Ok(if outs.len() == 1 {
            outs[0]
        } else {
            t.concat_cols(&outs)
        })
    }
}

/// Additive mask over `adjacency + I`.
pub fn attention_mask(adjacency: &[Vec<bool>]) -> Tensor {
    let n = adjacency.len();
    let mut m = Tensor::filled(n, n, f64::NEG_INFINITY);
    for (i, row) in adjacency.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            if a || i == j {
                m.set(i, j, 0.0);
            }
        }
    }
    m
}

/// A stack of GAT layers; the first maps `in_dim -> dim`, the rest `dim -> dim`.
#[derive(Clone, Debug)]
pub struct Gat {
    layers: Vec<GatLayer>,
}

impl Gat {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        dim: usize,
        layers: usize,
        heads: usize,
        rng: &mut Rng64,
    ) -> Result<Self> {
        let layers = (0..layers.max(1))
            .map(|l| {
                let i = if l == 0 { in_dim } else { dim };
                GatLayer::new(store, &format!("{name}.{l}"), i, dim, heads, rng)
            })
            .collect::<Result<_>>()?;
        Ok(Gat { layers })
    }

    pub fn forward(&self, t: &mut Tape<'_>, x: Var, mask: &Tensor) -> Result<Var> {
        let mut h = x;
        for layer in &self.layers {
            h = layer.forward(t, h, mask)?;
        }
        Ok(h)
    }
}
