use crate::autodiff::{ParamStore, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::graph::{check_delta, DeltaMatrix, Graph, Sign};
use crate::nn::{causal_mask, Attention, FeedForward, LayerNorm, Linear, TfBlock};
use crate::rng::{rng_from_seed, Rng64};
use rand::Rng;

use super::{adjacency, ModelConfig, ModelKind, TransitionModel, TransitionScore};

/// XOR of `prev` with the symmetric closure of the lower triangle of `absdelta`.
pub fn mod2_apply(prev: &Graph, absdelta: &[Vec<bool>]) -> Result<Graph> {
    let n = prev.n();
    if absdelta.len() != n || absdelta.iter().any(|r| r.len() != n) {
        return Err(Error::shape(
            "mod2_apply",
            format!("flip matrix is not {n} x {n}"),
        ));
    }
    let mut g = prev.clone();
    for (u, row) in absdelta.iter().enumerate() {
        for (v, &flip) in row[..u].iter().enumerate() {
            if flip && !g.remove_edge(u, v) {
                g.add_edge(u, v)?;
            }
        }
    }
    Ok(g)
}

#[derive(Clone, Debug)]
struct DecoderBlock {
    ln_self: LayerNorm,
    self_attn: Attention,
    ln_cross: LayerNorm,
    cross_attn: Attention,
    ln_ffn: LayerNorm,
    ffn: FeedForward,
}

/// Sequence-to-sequence transformer baseline: rows of the previous adjacency matrix in,
/// rows of `|delta|` out, each entry an independent Bernoulli given the decoder state.
/// There are no positional encodings.
#[derive(Clone, Debug)]
pub struct AgeD {
    config: ModelConfig,
    n: usize,
    width: usize,
    store: ParamStore,
    enc_in: Linear,
    encoder: Vec<TfBlock>,
    enc_ln: LayerNorm,
    dec_prev: Linear,
    dec_src: Linear,
    decoder: Vec<DecoderBlock>,
    dec_ln: LayerNorm,
    out: Linear,
}

impl AgeD {
    pub fn new(n: usize, config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        if n == 0 {
            return Err(Error::param("models need at least one node"));
        }
        let heads = config.age_heads;
        let width = n.min(128).div_ceil(heads) * heads;
        let mut rng = rng_from_seed(config.seed);
        let mut store = ParamStore::new();
        let s = &mut store;
        let r = &mut rng;
        let enc_in = Linear::new(s, "age.enc_in", n, width, true, r);
        let encoder = (0..config.age_layers)
            .map(|l| TfBlock::new(s, &format!("age.enc.{l}"), width, heads, r))
            .collect::<Result<_>>()?;
        let enc_ln = LayerNorm::new(s, "age.enc_ln", width);
        let dec_prev = Linear::new(s, "age.dec_prev", n, width, true, r);
        let dec_src = Linear::new(s, "age.dec_src", n, width, false, r);
        let decoder = (0..config.age_layers)
            .map(|l| {
                let p = format!("age.dec.{l}");
                Ok(DecoderBlock {
                    ln_self: LayerNorm::new(s, &format!("{p}.ln_self"), width),
                    self_attn: Attention::new(s, &format!("{p}.self"), width, heads, r)?,
                    ln_cross: LayerNorm::new(s, &format!("{p}.ln_cross"), width),
                    cross_attn: Attention::new(s, &format!("{p}.cross"), width, heads, r)?,
                    ln_ffn: LayerNorm::new(s, &format!("{p}.ln_ffn"), width),
                    ffn: FeedForward::new(s, &format!("{p}.ffn"), width, r),
                })
            })
            .collect::<Result<_>>()?;
        let dec_ln = LayerNorm::new(s, "age.dec_ln", width);
        let out = Linear::new(s, "age.out", width, n, true, r);
        Ok(AgeD {
            config: config.clone(),
            n,
            width,
            store,
            enc_in,
            encoder,
            enc_ln,
            dec_prev,
            dec_src,
            decoder,
            dec_ln,
            out,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    fn check_n(&self, g: &Graph) -> Result<()> {
        if g.n() != self.n {
            return Err(Error::NodeCountMismatch {
                expected: self.n,
                found: g.n(),
            });
        }
        Ok(())
    }

    fn adjacency_tensor(&self, prev: &Graph) -> Tensor {
        let adj = adjacency(prev);
        let data = adj
            .iter()
            .flat_map(|r| r.iter().map(|&b| f64::from(u8::from(b))))
            .collect();
        Tensor::from_vec(self.n, self.n, data)
    }

    fn encode(&self, t: &mut Tape<'_>, src: Var) -> Result<Var> {
        let mut x = self.enc_in.forward(t, src)?;
        for block in &self.encoder {
            x = block.forward(t, x, None)?;
        }
        self.enc_ln.forward(t, x)
    }

    /// Logits for rows `0..k` given the source rows `0..k` and the emitted rows shifted by
    /// one (`k x n` each).
    fn decode(&self, t: &mut Tape<'_>, shifted: Var, src_rows: Var, memory: Var) -> Result<Var> {
        let a = self.dec_prev.forward(t, shifted)?;
        let b = self.dec_src.forward(t, src_rows)?;
        let mut x = t.add(a, b);
        let mask = causal_mask(t.shape(x)[0]);
        for block in &self.decoder {
            let h = block.ln_self.forward(t, x)?;
            let h = block.self_attn.forward(t, h, h, Some(&mask))?;
            x = t.add(x, h);
            let h = block.ln_cross.forward(t, x)?;
            let h = block.cross_attn.forward(t, h, memory, None)?;
            x = t.add(x, h);
            let h = block.ln_ffn.forward(t, x)?;
            let h = block.ffn.forward(t, h)?;
            x = t.add(x, h);
        }
        let x = self.dec_ln.forward(t, x)?;
        self.out.forward(t, x)
    }

    /// Lower-triangular flip matrix of one sampled transition.
    pub fn sample_flips(&self, prev: &Graph, rng: &mut Rng64) -> Result<Vec<Vec<bool>>> {
        self.check_n(prev)?;
        let n = self.n;
        let src = self.adjacency_tensor(prev);
        let memory = {
            let mut t = Tape::new(&self.store);
            let s = t.constant(src.clone());
            let m = self.encode(&mut t, s)?;
            t.value(m).clone()
        };
        let mut flips = vec![vec![false; n]; n];
        let mut shifted = Tensor::zeros(n, n);
        for u in 0..n {
            if u > 0 {
                for v in 0..u - 1 {
                    if flips[u - 1][v] {
                        shifted.set(u, v, 1.0);
                    }
                }
            }
            if u == 0 {
                continue;
            }
            let k = u + 1;
            let mut t = Tape::new(&self.store);
            let sh = t.constant(Tensor::from_vec(k, n, shifted.data()[..k * n].to_vec()));
            let sr = t.constant(Tensor::from_vec(k, n, src.data()[..k * n].to_vec()));
            let mem = t.constant(memory.clone());
            let logits = self.decode(&mut t, sh, sr, mem)?;
            let row = t.value(logits).row(u);
            for v in 0..u {
                flips[u][v] = rng.gen::<f64>() < crate::autodiff::sigmoid(row[v]);
            }
        }
        Ok(flips)
    }
}

impl TransitionModel for AgeD {
    fn kind(&self) -> ModelKind {
        ModelKind::AgeD
    }

    fn n(&self) -> usize {
        self.n
    }

    fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn score_transition(
        &self,
        t: &mut Tape<'_>,
        prev: &Graph,
        delta: &DeltaMatrix,
    ) -> Result<TransitionScore> {
        self.check_n(prev)?;
        check_delta(prev, delta)?;
        let n = self.n;
        let mut shifted = Tensor::zeros(n, n);
        let mut target = Tensor::zeros(n, n);
        for ((u, v), _) in delta.entries() {
            target.set(u, v, 1.0);
            if u + 1 < n {
                shifted.set(u + 1, v, 1.0);
            }
        }
        let src = t.constant(self.adjacency_tensor(prev));
        let memory = self.encode(t, src)?;
        let sh = t.constant(shifted);
        let logits = self.decode(t, sh, src, memory)?;
        // only the strict lower triangle is modelled
        let mut idx = Vec::with_capacity(n * (n - 1) / 2);
        let mut ys = Vec::with_capacity(n * (n - 1) / 2);
        let mut owners = Vec::with_capacity(n * (n - 1) / 2);
        for u in 1..n {
            for v in 0..u {
                idx.push(u * n + v);
                ys.push(target.get(u, v));
                owners.push(u);
            }
        }
        let mut row_nll = vec![0.0; n];
        if idx.is_empty() {
            let nll = t.constant(Tensor::scalar(0.0));
            return Ok(TransitionScore {
                nll,
                decisions: 0,
                row_nll,
            });
        }
        let flat = t.reshape(logits, n * n, 1);
        let z = t.gather_rows(flat, &idx);
        for ((&zv, &y), &u) in t.value(z).data().iter().zip(&ys).zip(&owners) {
            row_nll[u] += crate::autodiff::softplus(if y > 0.5 { -zv } else { zv });
        }
        let nll = t.bce_with_logits(z, &ys);
        Ok(TransitionScore {
            nll,
            decisions: idx.len(),
            row_nll,
        })
    }

    fn sample_delta(&self, prev: &Graph, rng: &mut Rng64) -> Result<DeltaMatrix> {
        let flips = self.sample_flips(prev, rng)?;
        let mut delta = DeltaMatrix::empty(self.n);
        for (u, row) in flips.iter().enumerate() {
            for (v, &f) in row[..u].iter().enumerate() {
                if f {
                    delta.insert(u, v, Sign::for_existing(prev.has_edge(u, v)))?;
                }
            }
        }
        Ok(delta)
    }

    fn sample_transition(&self, prev: &Graph, rng: &mut Rng64) -> Result<Graph> {
        let flips = self.sample_flips(prev, rng)?;
        mod2_apply(prev, &flips)
    }
}
