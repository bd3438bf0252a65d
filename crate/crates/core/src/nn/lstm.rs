use super::linear::{check_cols, Linear};
use crate::autodiff::{ParamStore, Tape, Tensor, Var};
use crate::error::Result;
use crate::rng::Rng64;

/// Hidden and cell state of an LSTM-style unit; each is `batch x hidden`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellState {
    pub h: Var,
    pub c: Var,
}

impl CellState {
    pub fn zeros(t: &mut Tape<'_>, batch: usize, dim: usize) -> Self {
        let h = t.constant(Tensor::zeros(batch, dim));
        let c = t.constant(Tensor::zeros(batch, dim));
        CellState { h, c }
    }

    pub fn filled(t: &mut Tape<'_>, batch: usize, dim: usize, value: f64) -> Self {
        let h = t.constant(Tensor::filled(batch, dim, value));
        let c = t.constant(Tensor::filled(batch, dim, value));
        CellState { h, c }
    }

    pub fn gather(&self, t: &mut Tape<'_>, idx: &[usize]) -> Self {
        CellState {
            h: t.gather_rows(self.h, idx),
            c: t.gather_rows(self.c, idx),
        }
    }

    pub fn concat_rows(t: &mut Tape<'_>, parts: &[CellState]) -> Self {
        let hs: Vec<Var> = parts.iter().map(|s| s.h).collect();
        let cs: Vec<Var> = parts.iter().map(|s| s.c).collect();
        CellState {
            h: t.concat_rows(&hs),
            c: t.concat_rows(&cs),
        }
    }
}

/// Standard LSTM cell with input, forget, output and candidate gates.
#[derive(Clone, Debug)]
pub struct LstmCell {
    input: Linear,
    recurrent: Linear,
    pub hidden: usize,
}

impl LstmCell {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        hidden: usize,
        rng: &mut Rng64,
    ) -> Self {
        LstmCell {
            input: Linear::new(store, &format!("{name}.ih"), in_dim, 4 * hidden, true, rng),
            recurrent: Linear::new(store, &format!("{name}.hh"), hidden, 4 * hidden, false, rng),
            hidden,
        }
    }

    pub fn forward(&self, t: &mut Tape<'_>, x: Var, state: CellState) -> Result<CellState> {
        check_cols("lstm_cell", t, state.h, self.hidden)?;
        check_cols("lstm_cell", t, state.c, self.hidden)?;
        let gx = self.input.forward(t, x)?;
        let gh = self.recurrent.forward(t, state.h)?;
        let gates = t.add(gx, gh);
        let f = self.hidden;
        let i = t.slice_cols(gates, 0, f);
        let i = t.sigmoid(i);
        let fg = t.slice_cols(gates, f, f);
        let fg = t.sigmoid(fg);
        let o = t.slice_cols(gates, 2 * f, f);
        let o = t.sigmoid(o);
        let u = t.slice_cols(gates, 3 * f, f);
        let u = t.tanh(u);
        let keep = t.mul(fg, state.c);
        let write = t.mul(i, u);
        let c = t.add(keep, write);
        let tc = t.tanh(c);
        let h = t.mul(o, tc);
        Ok(CellState { h, c })
    }
}

/// A stack of LSTM cells unrolled over a sequence of rows; returns the top layer's hidden
/// state at every position.
#[derive(Clone, Debug)]
pub struct StackedLstm {
    cells: Vec<LstmCell>,
}

impl StackedLstm {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        dim: usize,
        layers: usize,
        rng: &mut Rng64,
    ) -> Self {
        let cells = (0..layers)
            .map(|l| LstmCell::new(store, &format!("{name}.{l}"), dim, dim, rng))
            .collect();
        StackedLstm { cells }
    }

    pub fn forward(&self, t: &mut Tape<'_>, seq: Var) -> Result<Var> {
        let [len, dim] = t.shape(seq);
        let mut states: Vec<CellState> = self
            .cells
            .iter()
            .map(|c| CellState::zeros(t, 1, c.hidden))
            .collect();
        let mut outputs = Vec::with_capacity(len);
        for pos in 0..len {
            let mut x = t.slice_rows(seq, pos, 1);
            for (cell, state) in self.cells.iter().zip(states.iter_mut()) {
                *state = cell.forward(t, x, *state)?;
                x = state.h;
            }
            outputs.push(x);
        }
        if outputs.is_empty() {
            return Ok(t.constant(Tensor::zeros(0, dim)));
        }
        Ok(t.concat_rows(&outputs))
    }
}
