use crate::autodiff::{ParamStore, Tape, Tensor, Var};
use crate::decoder::{Decoder, RowInput};
use crate::error::{Error, Result};
use crate::graph::{check_delta, DeltaMatrix, Graph};
use crate::nn::{attention_mask, Gat, Mlp, RowAutoregressor};
use crate::rng::{rng_from_seed, Rng64};

use super::{adjacency, ModelConfig, ModelKind, TransitionModel, TransitionScore};

/// GAT encoder of the previous snapshot, a causal row model over row embeddings, and the
/// tree decoder for each delta row.
#[derive(Clone, Debug)]
pub struct Damnets {
    config: ModelConfig,
    n: usize,
    store: ParamStore,
    gat: Gat,
    mlp_cat: Mlp,
    rows: RowAutoregressor,
    decoder: Decoder,
}

impl Damnets {
    pub fn new(n: usize, config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        if n == 0 {
            return Err(Error::param("models need at least one node"));
        }
        let f = config.hidden;
        let mut rng = rng_from_seed(config.seed);
        let mut store = ParamStore::new();
        let gat = Gat::new(&mut store, "gat", n, f, config.gat_layers, config.gat_heads, &mut rng)?;
        let mlp_cat = Mlp::new(&mut store, "mlp_cat", 2 * f, f, f, &mut rng);
        let rows = RowAutoregressor::new(
            &mut store,
            "rows",
            config.row_model,
            f,
            config.row_layers,
            config.row_heads,
            &mut rng,
        )?;
        let decoder = Decoder::new(&mut store, "decoder", f, &mut rng);
        Ok(Damnets {
            config: config.clone(),
            n,
            store,
            gat,
            mlp_cat,
            rows,
            decoder,
        })
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

    /// `n x F` node embeddings of `prev` from identity features and `A + I` attention.
    pub fn encode(&self, t: &mut Tape<'_>, prev: &Graph) -> Result<Var> {
        self.check_n(prev)?;
        let x = t.constant(Tensor::identity(self.n));
        let mask = attention_mask(&adjacency(prev));
        self.gat.forward(t, x, &mask)
    }

    /// Root top-down state of each row from the previous row summaries and node embeddings.
    pub fn row_context(&self, t: &mut Tape<'_>, h_row_prev: Var, h_nodes: Var) -> Result<Var> {
        let x = t.concat_cols(&[h_row_prev, h_nodes]);
        self.mlp_cat.forward(t, x)
    }

    fn row_inputs(&self, prev: &Graph, delta: &DeltaMatrix) -> Result<Vec<RowInput>> {
        let adj = adjacency(prev);
        (0..self.n)
            .map(|u| RowInput::new(&delta.row_support(u), adj[u][..u].to_vec()))
            .collect()
    }

    fn row_summary_shifted(&self, t: &mut Tape<'_>, g: Var) -> Result<Var> {
        let f = self.config.hidden;
        let zero = t.constant(Tensor::zeros(1, f));
        if self.n == 1 {
            return Ok(zero);
        }
        let seq = t.slice_rows(g, 0, self.n - 1);
        let out = self.rows.forward(t, seq)?;
        Ok(t.concat_rows(&[zero, out]))
    }
}

impl TransitionModel for Damnets {
    fn kind(&self) -> ModelKind {
        ModelKind::Damnets
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
        check_delta(prev, delta)?;
        let h_nodes = self.encode(t, prev)?;
        let rows = self.row_inputs(prev, delta)?;
        let bottom = self.decoder.bottom_up(t, &rows)?;
        let h_rows = self.row_summary_shifted(t, bottom.g)?;
        let ctx = self.row_context(t, h_rows, h_nodes)?;
        let scores = self.decoder.score(t, &rows, &bottom, ctx)?;
        Ok(TransitionScore {
            nll: scores.nll,
            decisions: scores.decisions(),
            row_nll: scores.row_nll,
        })
    }

    fn sample_delta(&self, prev: &Graph, rng: &mut Rng64) -> Result<DeltaMatrix> {
        let f = self.config.hidden;
        let h_nodes = {
            let mut t = Tape::new(&self.store);
            let h = self.encode(&mut t, prev)?;
            t.value(h).clone()
        };
        let adj = adjacency(prev);
        let mut g_rows: Vec<f64> = Vec::with_capacity(self.n * f);
        let mut delta = DeltaMatrix::empty(self.n);
        for u in 0..self.n {
            // values only: a fresh tape per row keeps memory flat
            let mut t = Tape::new(&self.store);
            let h_row = if u == 0 {
                t.constant(Tensor::zeros(1, f))
            } else {
                let seq = t.constant(Tensor::from_vec(u, f, g_rows.clone()));
                let out = self.rows.forward(&mut t, seq)?;
                t.slice_rows(out, u - 1, 1)
            };
            let h_u = t.constant(Tensor::row_vector(h_nodes.row(u).to_vec()));
            let ctx = self.row_context(&mut t, h_row, h_u)?;
            let row = self.decoder.sample_row(&mut t, ctx, &adj[u][..u], rng)?;
            for (v, s) in row.signed(&adj[u][..u]) {
                delta.insert(u, v, s)?;
            }
            g_rows.extend_from_slice(t.value(row.g).data());
        }
        Ok(delta)
    }
}
