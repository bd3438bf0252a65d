//! Parameterized layers built on the tape.

mod gat;
mod linear;
mod lstm;
mod mlp;
mod transformer;
mod tree_cell;


pub use gat::{attention_mask, Gat, GatLayer, LEAKY_SLOPE};
pub use linear::Linear;
pub use lstm::{CellState, LstmCell, StackedLstm};
pub use mlp::Mlp;
pub use transformer::{
    causal_mask, pe_table, sinusoidal_pe, Attention, FeedForward, LayerNorm, TfBlock, TfEncoder,
};
pub use tree_cell::BinaryTreeCell;

use crate::autodiff::{ParamStore, Tape, Var};
use crate::error::Result;
use crate::rng::Rng64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowModelKind {
    Transformer,
    Lstm,
}

/// Causal sequence model over row embeddings.
#[derive(Clone, Debug)]
pub enum RowAutoregressor {
    Transformer(TfEncoder),
    Lstm(StackedLstm),
}

impl RowAutoregressor {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        kind: RowModelKind,
        dim: usize,
        layers: usize,
        heads: usize,
        rng: &mut Rng64,
    ) -> Result<Self> {
        Ok(match kind {
            RowModelKind::Transformer => {
                RowAutoregressor::Transformer(TfEncoder::new(store, name, dim, layers, heads, rng)?)
            }
            RowModelKind::Lstm => {
                RowAutoregressor::Lstm(StackedLstm::new(store, name, dim, layers, rng))
            }
        })
    }

    /// `seq` is `k x dim` with `k >= 1`; output row `i` summarizes inputs `0..=i`.
    pub fn forward(&self, t: &mut Tape<'_>, seq: Var) -> Result<Var> {
        match self {
            RowAutoregressor::Transformer(tf) => tf.forward(t, seq),
            RowAutoregressor::Lstm(lstm) => lstm.forward(t, seq),
        }
    }
}
