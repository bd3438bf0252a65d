//! Binary-tree model of one lower-triangular delta row.
//!
//! Row `u` covers columns `0..u`. The tree splits `lo..=hi` at `(lo + hi) / 2`; each
//! internal node decides whether its left and right children exist, and a child that is a
//! single column is an entry of the delta. Leaf decisions use the addition head when the
//! edge is absent in the previous graph and the deletion head when it is present, so every
//! sampled row is a valid delta. An internal node below the root always has at least one
//! child, so its right child is implied when the left one is absent.

mod tree;

pub use tree::{build_training_tree, split_point, tree_size_bound, RowTree, TreeNode};

use rand::Rng;

use crate::autodiff::{softplus, ParamId, ParamStore, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::graph::Sign;
use crate::nn::{BinaryTreeCell, CellState, LstmCell, Mlp};
use crate::rng::Rng64;

/// One row to be scored: its tree and the previous adjacency entries `A[u][0..width]`.
#[derive(Clone, Debug)]
pub struct RowInput {
    pub tree: RowTree,
    pub prev: Vec<bool>,
}

impl RowInput {
    pub fn new(support: &[usize], prev: Vec<bool>) -> Result<Self> {
        let tree = build_training_tree(support, prev.len())?;
        Ok(RowInput { tree, prev })
    }

    /// Checks each sign against the previous adjacency row before building the tree.
    pub fn from_signed(row: usize, entries: &[(usize, Sign)], prev: Vec<bool>) -> Result<Self> {
        for &(v, s) in entries {
            if v < prev.len() && s != Sign::for_existing(prev[v]) {
                return Err(Error::InconsistentDelta {
                    u: row,
                    v,
                    reason: match s {
                        Sign::Add => "addition of an existing edge",
                        Sign::Remove => "removal of an absent edge",
                    },
                });
            }
        }
        let support: Vec<usize> = entries.iter().map(|&(v, _)| v).collect();
        RowInput::new(&support, prev)
    }

    pub fn width(&self) -> usize {
        self.prev.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Head {
    Left,
    Right,
    Add,
    Del,
}

impl Head {
    const ALL: [Head; 4] = [Head::Left, Head::Right, Head::Add, Head::Del];

    fn leaf(edge_present: bool) -> Self {
        if edge_present {
            Head::Del
        } else {
            Head::Add
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Decision {
    block: usize,
    row: usize,
    head: Head,
    target: bool,
    owner: usize,
}

/// Bottom states of every node of a batch of rows.
pub struct BottomPass {
    /// `rows x dim`: hidden part of each root's bottom state; zero for width-0 rows.
    pub g: Var,
    pool: CellState,
    refs: Vec<Vec<usize>>,
}

/// Negative log-likelihood of a batch of rows.
pub struct RowScores {
    pub nll: Var,
    pub row_nll: Vec<f64>,
    pub row_decisions: Vec<usize>,
}

impl RowScores {
    pub fn decisions(&self) -> usize {
        self.row_decisions.iter().sum()
    }
}

/// A row drawn by ancestral sampling.
#[derive(Clone, Debug)]
pub struct SampledRow {
    pub support: Vec<usize>,
    pub g: Var,
    pub log_prob: f64,
    pub decisions: usize,
}

impl SampledRow {
    pub fn signed(&self, prev: &[bool]) -> Vec<(usize, Sign)> {
        self.support
            .iter()
            .map(|&v| (v, Sign::for_existing(prev[v])))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Decoder {
    pub dim: usize,
    mlp_left: Mlp,
    mlp_right: Mlp,
    mlp_add: Mlp,
    mlp_del: Mlp,
    tree_top: BinaryTreeCell,
    tree_bot: BinaryTreeCell,
    lstm_top: LstmCell,
    embed_left: ParamId,
    embed_right: ParamId,
}

const ZERO_REF: usize = 0;
const ONES_REF: usize = 1;

impl Decoder {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize, rng: &mut Rng64) -> Self {
        Decoder {
            dim,
            mlp_left: Mlp::new(store, &format!("{name}.mlp_left"), dim, dim, 1, rng),
            mlp_right: Mlp::new(store, &format!("{name}.mlp_right"), dim, dim, 1, rng),
            mlp_add: Mlp::new(store, &format!("{name}.mlp_add"), dim, dim, 1, rng),
            mlp_del: Mlp::new(store, &format!("{name}.mlp_del"), dim, dim, 1, rng),
            tree_top: BinaryTreeCell::new(store, &format!("{name}.tree_top"), dim, rng),
            tree_bot: BinaryTreeCell::new(store, &format!("{name}.tree_bot"), dim, rng),
            lstm_top: LstmCell::new(store, &format!("{name}.lstm_top"), dim, dim, rng),
            embed_left: store.add_uniform(format!("{name}.embed_left"), 1, dim, dim, rng),
            embed_right: store.add_uniform(format!("{name}.embed_right"), 1, dim, dim, rng),
        }
    }

    fn mlp(&self, head: Head) -> &Mlp {
        match head {
            Head::Left => &self.mlp_left,
            Head::Right => &self.mlp_right,
            Head::Add => &self.mlp_add,
            Head::Del => &self.mlp_del,
        }
    }

    fn base_pool(&self, t: &mut Tape<'_>) -> CellState {
        let mut base = Tensor::zeros(2, self.dim);
        for c in 0..self.dim {
            base.set(ONES_REF, c, 1.0);
        }
        let h = t.constant(base.clone());
        let c = t.constant(base);
        CellState { h, c }
    }

    fn embed(&self, t: &mut Tape<'_>, id: ParamId, count: usize) -> Var {
        let e = t.param(id);
        t.gather_rows(e, &vec![0; count])
    }

    /// Bottom-up states of all rows, batched by node height.
    pub fn bottom_up(&self, t: &mut Tape<'_>, rows: &[RowInput]) -> Result<BottomPass> {
        let mut refs: Vec<Vec<usize>> = rows.iter().map(|r| vec![ZERO_REF; r.tree.len()]).collect();
        let mut by_height: Vec<Vec<(usize, usize)>> = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            let nodes = &row.tree.nodes;
            let mut height = vec![0usize; nodes.len()];
            // children always follow their parent in the node list
            for k in (0..nodes.len()).rev() {
                let node = &nodes[k];
                if node.is_leaf() {
                    let present = k != 0 || !row.tree.support().is_empty();
                    refs[r][k] = if present { ONES_REF } else { ZERO_REF };
                    continue;
                }
                let h = 1 + [node.left, node.right]
                    .into_iter()
                    .flatten()
                    .map(|c| height[c])
                    .max()
                    .unwrap_or(0);
                height[k] = h;
                if by_height.len() <= h {
                    by_height.resize(h + 1, Vec::new());
                }
                by_height[h].push((r, k));
            }
        }

        let mut blocks = vec![self.base_pool(t)];
        let mut pool_len = 2;
        let mut pool = blocks[0];
        for items in by_height.iter().skip(1) {
            if items.is_empty() {
                continue;
            }
            pool = CellState::concat_rows(t, &blocks);
            let child_ref = |r: usize, c: Option<usize>| c.map_or(ZERO_REF, |c| refs[r][c]);
            let li: Vec<usize> = items
                .iter()
                .map(|&(r, k)| child_ref(r, rows[r].tree.nodes[k].left))
                .collect();
            let ri: Vec<usize> = items
                .iter()
                .map(|&(r, k)| child_ref(r, rows[r].tree.nodes[k].right))
                .collect();
            let left = pool.gather(t, &li);
            let right = pool.gather(t, &ri);
            let out = self.tree_bot.forward(t, left, right)?;
            for (i, &(r, k)) in items.iter().enumerate() {
                refs[r][k] = pool_len + i;
            }
            pool_len += items.len();
            blocks.push(out);
        }
        if blocks.len() > 1 {
            pool = CellState::concat_rows(t, &blocks);
        }
        let roots: Vec<usize> = refs
            .iter()
            .map(|r| r.first().copied().unwrap_or(ZERO_REF))
            .collect();
        let g = t.gather_rows(pool.h, &roots);
        Ok(BottomPass { g, pool, refs })
    }

    /// Scores every row given the hidden part of its root context (`rows x dim`).
    pub fn score(
        &self,
        t: &mut Tape<'_>,
        rows: &[RowInput],
        bottom: &BottomPass,
        contexts: Var,
    ) -> Result<RowScores> {
        if t.shape(contexts) != [rows.len(), self.dim] {
            return Err(Error::shape(
                "row contexts",
                format!("{:?} for {} rows of width {}", t.shape(contexts), rows.len(), self.dim),
            ));
        }
        let mut decisions = Vec::new();
        let mut blocks = vec![contexts];
        let mut level: Vec<(usize, usize, usize)> = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            match row.width() {
                0 => {}
                1 => decisions.push(Decision {
                    block: 0,
                    row: r,
                    head: Head::leaf(row.prev[0]),
                    target: !row.tree.support().is_empty(),
                    owner: r,
                }),
                _ => level.push((r, 0, r)),
            }
        }
        let zero_c = t.constant(Tensor::zeros(rows.len(), self.dim));
        let mut top_pool = CellState {
            h: contexts,
            c: zero_c,
        };
        while !level.is_empty() {
            let b = level.len();
            let idx: Vec<usize> = level.iter().map(|e| e.2).collect();
            let top = top_pool.gather(t, &idx);
            let emb = self.embed(t, self.embed_left, b);
            let top_l = self.lstm_top.forward(t, emb, top)?;
            let li: Vec<usize> = level
                .iter()
                .map(|&(r, k, _)| {
                    rows[r].tree.nodes[k]
                        .left
                        .map_or(ZERO_REF, |c| bottom.refs[r][c])
                })
                .collect();
            let bot_l = bottom.pool.gather(t, &li);
            let hat = self.tree_top.forward(t, bot_l, top_l)?;
            let emb = self.embed(t, self.embed_right, b);
            let top_r = self.lstm_top.forward(t, emb, hat)?;
            let bt = blocks.len();
            blocks.push(top.h);
            let bh = blocks.len();
            blocks.push(hat.h);

            let mut next = Vec::new();
            for (i, &(r, k, _)) in level.iter().enumerate() {
                let node = &rows[r].tree.nodes[k];
                let prev = &rows[r].prev;
                let mid = node.mid();
                let left_leaf = node.lo == mid;
                let right_leaf = mid + 1 == node.hi;
                decisions.push(Decision {
                    block: bt,
                    row: i,
                    head: if left_leaf {
                        Head::leaf(prev[node.lo])
                    } else {
                        Head::Left
                    },
                    target: node.left.is_some(),
                    owner: r,
                });
                if k == 0 || node.left.is_some() {
                    decisions.push(Decision {
                        block: bh,
                        row: i,
                        head: if right_leaf {
                            Head::leaf(prev[node.hi])
                        } else {
                            Head::Right
                        },
                        target: node.right.is_some(),
                        owner: r,
                    });
                }
                if let (Some(c), false) = (node.left, left_leaf) {
                    next.push((r, c, i));
                }
                if let (Some(c), false) = (node.right, right_leaf) {
                    next.push((r, c, b + i));
                }
            }
            top_pool = CellState::concat_rows(t, &[top_l, top_r]);
            level = next;
        }
        self.score_decisions(t, &blocks, &decisions, rows.len())
    }

    fn score_decisions(
        &self,
        t: &mut Tape<'_>,
        blocks: &[Var],
        decisions: &[Decision],
        num_rows: usize,
    ) -> Result<RowScores> {
        let mut row_nll = vec![0.0; num_rows];
        let mut row_decisions = vec![0; num_rows];
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut total = 0;
        for &b in blocks {
            offsets.push(total);
            total += t.shape(b)[0];
        }
        let all = if blocks.len() == 1 {
            blocks[0]
        } else {
            t.concat_rows(blocks)
        };
        let mut terms = Vec::new();
        for head in Head::ALL {
            let chosen: Vec<&Decision> = decisions.iter().filter(|d| d.head == head).collect();
            if chosen.is_empty() {
                continue;
            }
            let idx: Vec<usize> = chosen.iter().map(|d| offsets[d.block] + d.row).collect();
            let targets: Vec<f64> = chosen.iter().map(|d| f64::from(u8::from(d.target))).collect();
            let x = t.gather_rows(all, &idx);
            let z = self.mlp(head).forward(t, x)?;
            for (d, &zv) in chosen.iter().zip(t.value(z).data()) {
                row_nll[d.owner] += if d.target { softplus(-zv) } else { softplus(zv) };
                row_decisions[d.owner] += 1;
            }
            terms.push(t.bce_with_logits(z, &targets));
        }
        let nll = match terms.len() {
            0 => t.constant(Tensor::scalar(0.0)),
            _ => {
                let mut acc = terms[0];
                for &term in &terms[1..] {
                    acc = t.add(acc, term);
                }
                acc
            }
        };
        Ok(RowScores {
            nll,
            row_nll,
            row_decisions,
        })
    }

    /// `(log p(row), g)` for a single row whose root context hidden state is `context`.
    pub fn row_log_likelihood(
        &self,
        t: &mut Tape<'_>,
        context: Var,
        row: &RowInput,
    ) -> Result<(Var, Var)> {
        let rows = std::slice::from_ref(row);
        let bottom = self.bottom_up(t, rows)?;
        let scores = self.score(t, rows, &bottom, context)?;
        let logp = t.scale(scores.nll, -1.0);
        Ok((logp, bottom.g))
    }

    /// Draws one row top-down, exactly following the process scored by [`Decoder::score`].
    pub fn sample_row(
        &self,
        t: &mut Tape<'_>,
        context: Var,
        prev: &[bool],
        rng: &mut impl Rng,
    ) -> Result<SampledRow> {
        if t.shape(context) != [1, self.dim] {
            return Err(Error::shape(
                "row context",
                format!("{:?}, expected [1, {}]", t.shape(context), self.dim),
            ));
        }
        let mut out = SampledRow {
            support: Vec::new(),
            g: context,
            log_prob: 0.0,
            decisions: 0,
        };
        let width = prev.len();
        if width == 0 {
            out.g = t.constant(Tensor::zeros(1, self.dim));
            return Ok(out);
        }
        let c = t.constant(Tensor::zeros(1, self.dim));
        let top = CellState { h: context, c };
        let bot = if width == 1 {
            if self.decide(t, context, Head::leaf(prev[0]), rng, &mut out)? {
                out.support.push(0);
                CellState::filled(t, 1, self.dim, 1.0)
            } else {
                CellState::zeros(t, 1, self.dim)
            }
        } else {
            self.sample_node(t, 0, width - 1, top, true, prev, rng, &mut out)?
        };
        out.g = bot.h;
        Ok(out)
    }

    fn decide(
        &self,
        t: &mut Tape<'_>,
        x: Var,
        head: Head,
        rng: &mut impl Rng,
        out: &mut SampledRow,
    ) -> Result<bool> {
        let z = self.mlp(head).forward(t, x)?;
        let z = t.value(z).item();
        let present = rng.gen::<f64>() < crate::autodiff::sigmoid(z);
        out.log_prob -= if present { softplus(-z) } else { softplus(z) };
        out.decisions += 1;
        Ok(present)
    }

    #[allow(clippy::too_many_arguments)]
    fn sample_node(
        &self,
        t: &mut Tape<'_>,
        lo: usize,
        hi: usize,
        top: CellState,
        is_root: bool,
        prev: &[bool],
        rng: &mut impl Rng,
        out: &mut SampledRow,
    ) -> Result<CellState> {
        let mid = split_point(lo, hi);
        let left_leaf = lo == mid;
        let right_leaf = mid + 1 == hi;

        let emb = self.embed(t, self.embed_left, 1);
        let top_l = self.lstm_top.forward(t, emb, top)?;
        let head = if left_leaf { Head::leaf(prev[lo]) } else { Head::Left };
        let has_left = self.decide(t, top.h, head, rng, out)?;
        let bot_l = if !has_left {
            CellState::zeros(t, 1, self.dim)
        } else if left_leaf {
            out.support.push(lo);
            CellState::filled(t, 1, self.dim, 1.0)
        } else {
            self.sample_node(t, lo, mid, top_l, false, prev, rng, out)?
        };

        let hat = self.tree_top.forward(t, bot_l, top_l)?;
        let has_right = if !is_root && !has_left {
            true
        } else {
            let head = if right_leaf { Head::leaf(prev[hi]) } else { Head::Right };
            self.decide(t, hat.h, head, rng, out)?
        };
        let bot_r = if !has_right {
            CellState::zeros(t, 1, self.dim)
        } else if right_leaf {
            out.support.push(hi);
            CellState::filled(t, 1, self.dim, 1.0)
        } else {
            let emb = self.embed(t, self.embed_right, 1);
            let top_r = self.lstm_top.forward(t, emb, hat)?;
            self.sample_node(t, mid + 1, hi, top_r, false, prev, rng, out)?
        };
        self.tree_bot.forward(t, bot_l, bot_r)
    }
}

#[cfg(test)]
mod tests;
