use super::linear::{check_cols, Linear};
use crate::autodiff::{ParamId, ParamStore, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::rng::Rng64;

const LN_EPS: f64 = 1e-5;

/// Sinusoidal position code: entry `2i` is `sin(pos / 10000^(2i/dim))`, entry `2i+1` the
/// matching cosine.
pub fn sinusoidal_pe(pos: usize, dim: usize) -> Result<Vec<f64>> {
    if dim % 2 != 0 {
        return Err(Error::param(format!(
            "positional encoding width must be even, got {dim}"
        )));
    }
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim / 2 {
        let angle = pos as f64 / 10000f64.powf(2.0 * i as f64 / dim as f64);
        out.push(angle.sin());
        out.push(angle.cos());
    }
    Ok(out)
}

/// Rows `0..len` of the position table.
pub fn pe_table(len: usize, dim: usize) -> Result<Tensor> {
    let mut data = Vec::with_capacity(len * dim);
    for pos in 0..len {
        data.extend(sinusoidal_pe(pos, dim)?);
    }
    Ok(Tensor::from_vec(len, dim, data))
}

/// Additive causal mask: position `i` sees `0..=i`.
pub fn causal_mask(len: usize) -> Tensor {
    let mut m = Tensor::zeros(len, len);
    for i in 0..len {
        for j in i + 1..len {
            m.set(i, j, f64::NEG_INFINITY);
        }
    }
    m
}

#[derive(Clone, Debug)]
pub struct LayerNorm {
    gain: ParamId,
    bias: ParamId,
    dim: usize,
}

impl LayerNorm {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize) -> Self {
        LayerNorm {
            gain: store.add(format!("{name}.gain"), Tensor::filled(1, dim, 1.0)),
            bias: store.add_zeros(format!("{name}.bias"), 1, dim),
            dim,
        }
    }

    pub fn forward(&self, t: &mut Tape<'_>, x: Var) -> Result<Var> {
        check_cols("layer_norm", t, x, self.dim)?;
        let y = t.layer_norm_rows(x, LN_EPS);
        let g = t.param(self.gain);
        let b = t.param(self.bias);
        let y = t.mul_row(y, g);
        Ok(t.add_row(y, b))
    }
}

/// Multi-head scaled dot-product attention. Keys and values may come from another
/// sequence (cross-attention).
#[derive(Clone, Debug)]
pub struct Attention {
    q: Linear,
    k: Linear,
    v: Linear,
    o: Linear,
    heads: usize,
}

impl Attention {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        dim: usize,
        heads: usize,
        rng: &mut Rng64,
    ) -> Result<Self> {
        if heads == 0 || dim % heads != 0 {
            return Err(Error::param(format!(
                "attention width {dim} is not divisible into {heads} heads"
            )));
        }
        Ok(Attention {
            q: Linear::new(store, &format!("{name}.q"), dim, dim, true, rng),
            k: Linear::new(store, &format!("{name}.k"), dim, dim, true, rng),
            v: Linear::new(store, &format!("{name}.v"), dim, dim, true, rng),
            o: Linear::new(store, &format!("{name}.o"), dim, dim, true, rng),
            heads,
        })
    }

    /// `mask` is additive with shape `queries x keys`, or `None` for full attention.
    pub fn forward(
        &self,
        t: &mut Tape<'_>,
        x: Var,
        memory: Var,
        mask: Option<&Tensor>,
    ) -> Result<Var> {
        let q = self.q.forward(t, x)?;
        let k = self.k.forward(t, memory)?;
        let v = self.v.forward(t, memory)?;
        let dim = self.q.out_dim;
        let dh = dim / self.heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let mut outs = Vec::with_capacity(self.heads);
        for h in 0..self.heads {
            let qh = t.slice_cols(q, h * dh, dh);
            let kh = t.slice_cols(k, h * dh, dh);
            let vh = t.slice_cols(v, h * dh, dh);
            let s = t.matmul_t(qh, kh);
            let s = t.scale(s, scale);
            let a = match mask {
                Some(m) => t.masked_softmax_rows(s, m),
                None => t.softmax_rows(s),
            };
            outs.push(t.matmul(a, vh));
        }
        let cat = if outs.len() == 1 {
            outs[0]
        } else {
            t.concat_cols(&outs)
        };
        self.o.forward(t, cat)
    }
}

#[derive(Clone, Debug)]
pub struct FeedForward {
    up: Linear,
    down: Linear,
}

impl FeedForward {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize, rng: &mut Rng64) -> Self {
        FeedForward {
            up: Linear::new(store, &format!("{name}.up"), dim, 4 * dim, true, rng),
            down: Linear::new(store, &format!("{name}.down"), 4 * dim, dim, true, rng),
        }
    }

    pub fn forward(&self, t: &mut Tape<'_>, x: Var) -> Result<Var> {
        let h = self.up.forward(t, x)?;
        let h = t.relu(h);
        self.down.forward(t, h)
    }
}

/// Pre-norm self-attention block: `x + attn(LN(x))`, then `x + ffn(LN(x))`.
#[derive(Clone, Debug)]
pub struct TfBlock {
    ln1: LayerNorm,
    attn: Attention,
    ln2: LayerNorm,
    ffn: FeedForward,
}

impl TfBlock {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        dim: usize,
        heads: usize,
        rng: &mut Rng64,
    ) -> Result<Self> {
        Ok(TfBlock {
            ln1: LayerNorm::new(store, &format!("{name}.ln1"), dim),
            attn: Attention::new(store, &format!("{name}.attn"), dim, heads, rng)?,
            ln2: LayerNorm::new(store, &format!("{name}.ln2"), dim),
            ffn: FeedForward::new(store, &format!("{name}.ffn"), dim, rng),
        })
    }

    pub fn forward(&self, t: &mut Tape<'_>, x: Var, mask: Option<&Tensor>) -> Result<Var> {
        let n = self.ln1.forward(t, x)?;
        let a = self.attn.forward(t, n, n, mask)?;
        let x = t.add(x, a);
        let n = self.ln2.forward(t, x)?;
        let f = self.ffn.forward(t, n)?;
        Ok(t.add(x, f))
    }
}

/// Causal transformer encoder with sinusoidal positions and a final layer norm.
#[derive(Clone, Debug)]
pub struct TfEncoder {
    blocks: Vec<TfBlock>,
    ln_out: LayerNorm,
    pub dim: usize,
}

impl TfEncoder {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        dim: usize,
        layers: usize,
        heads: usize,
        rng: &mut Rng64,
    ) -> Result<Self> {
        if dim % 2 != 0 {
            return Err(Error::param(format!("encoder width must be even, got {dim}")));
        }
        let blocks = (0..layers)
            .map(|l| TfBlock::new(store, &format!("{name}.{l}"), dim, heads, rng))
            .collect::<Result<_>>()?;
        Ok(TfEncoder {
            blocks,
            ln_out: LayerNorm::new(store, &format!("{name}.ln_out"), dim),
            dim,
        })
    }

    /// `seq` is `k x dim`; row `i` of the output depends on rows `0..=i` only.
    pub fn forward(&self, t: &mut Tape<'_>, seq: Var) -> Result<Var> {
        check_cols("tf_encoder", t, seq, self.dim)?;
        let [len, _] = t.shape(seq);
        if len == 0 {
            return Err(Error::Empty("transformer input sequence".into()));
        }
        let pe = t.constant(pe_table(len, self.dim)?);
        let mut x = t.add(seq, pe);
        let mask = causal_mask(len);
        for block in &self.blocks {
            x = block.forward(t, x, Some(&mask))?;
        }
        self.ln_out.forward(t, x)
    }
}
