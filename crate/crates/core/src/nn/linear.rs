use crate::autodiff::{ParamId, ParamStore, Tape, Var};
use crate::error::{Error, Result};
use crate::rng::Rng64;

/// `y = x W + b` applied to each row of `x`.
#[derive(Clone, Debug)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: Option<ParamId>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Linear {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        bias: bool,
        rng: &mut Rng64,
    ) -> Self {
        let weight = store.add_uniform(format!("{name}.weight"), in_dim, out_dim, in_dim, rng);
        let bias = bias.then(|| store.add_zeros(format!("{name}.bias"), 1, out_dim));
        Linear {
            weight,
            bias,
            in_dim,
            out_dim,
        }
    }

    pub fn forward(&self, t: &mut Tape<'_>, x: Var) -> Result<Var> {
        check_cols("linear", t, x, self.in_dim)?;
        let w = t.param(self.weight);
        let y = t.matmul(x, w);
        Ok(match self.bias {
            Some(b) => {
                let b = t.param(b);
                t.add_row(y, b)
            }
            None => y,
        })
    }
}

pub(crate) fn check_cols(op: &'static str, t: &Tape<'_>, x: Var, expected: usize) -> Result<()> {
    let [_, c] = t.shape(x);
    if c == expected {
        Ok(())
    } else {
        Err(Error::shape(op, format!("expected {expected} input columns, got {c}")))
    }
}
