use super::linear::{check_cols, Linear};
use super::lstm::CellState;
use crate::autodiff::{ParamStore, Tape};
use crate::error::Result;
use crate::rng::Rng64;

/// Binary TreeLSTM combine: two child states in, one state out, with a forget gate per
/// child.
#[derive(Clone, Debug)]
pub struct BinaryTreeCell {
    gates: Linear,
    pub hidden: usize,
}

impl BinaryTreeCell {
    pub fn new(store: &mut ParamStore, name: &str, hidden: usize, rng: &mut Rng64) -> Self {
        BinaryTreeCell {
            gates: Linear::new(store, &format!("{name}.gates"), 2 * hidden, 5 * hidden, true, rng),
            hidden,
        }
    }

    pub fn forward(
        &self,
        t: &mut Tape<'_>,
        left: CellState,
        right: CellState,
    ) -> Result<CellState> {
        for v in [left.h, left.c, right.h, right.c] {
            check_cols("tree_cell", t, v, self.hidden)?;
        }
        let x = t.concat_cols(&[left.h, right.h]);
        let g = self.gates.forward(t, x)?;
        let f = self.hidden;
        let i = t.slice_cols(g, 0, f);
        let i = t.sigmoid(i);
        let fl = t.slice_cols(g, f, f);
        let fl = t.sigmoid(fl);
        let fr = t.slice_cols(g, 2 * f, f);
        let fr = t.sigmoid(fr);
        let o = t.slice_cols(g, 3 * f, f);
        let o = t.sigmoid(o);
        let u = t.slice_cols(g, 4 * f, f);
        let u = t.tanh(u);
        let write = t.mul(i, u);
        let keep_l = t.mul(fl, left.c);
        let keep_r = t.mul(fr, right.c);
        let c = t.add(write, keep_l);
        let c = t.add(c, keep_r);
        let tc = t.tanh(c);
        let h = t.mul(o, tc);
        Ok(CellState { h, c })
    }
}
