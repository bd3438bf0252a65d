use super::linear::Linear;
use crate::autodiff::{ParamStore, Tape, Var};
use crate::error::Result;
use crate::rng::Rng64;

/// One hidden ReLU layer: `W2 · relu(W1 · x + b1) + b2`.
#[derive(Clone, Debug)]
pub struct Mlp {
    pub hidden: Linear,
    pub output: Linear,
}

impl Mlp {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        hidden_dim: usize,
        out_dim: usize,
        rng: &mut Rng64,
    ) -> Self {
        Mlp {
            hidden: Linear::new(store, &format!("{name}.0"), in_dim, hidden_dim, true, rng),
            output: Linear::new(store, &format!("{name}.1"), hidden_dim, out_dim, true, rng),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.hidden.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.output.out_dim
    }

    pub fn forward(&self, t: &mut Tape<'_>, x: Var) -> Result<Var> {
        let h = self.hidden.forward(t, x)?;
        let h = t.relu(h);
        self.output.forward(t, h)
    }
}
