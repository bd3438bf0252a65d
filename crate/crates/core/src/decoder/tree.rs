use crate::error::{Error, Result};

/// A node of a row tree covering columns `lo..=hi`. Child links are present only for
/// children whose interval meets the support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub lo: usize,
    pub hi: usize,
    pub left: Option<usize>,
    pub right: Option<usize>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.lo == self.hi
    }

    pub fn mid(&self) -> usize {
        split_point(self.lo, self.hi)
    }
}

pub fn split_point(lo: usize, hi: usize) -> usize {
    (lo + hi) / 2
}

/// Binary interval tree of one delta row, rooted at `0..=width-1`. Node 0 is the root; it
/// exists for every positive width even when the support is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowTree {
    pub width: usize,
    pub nodes: Vec<TreeNode>,
    support: Vec<usize>,
}

impl RowTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Columns of the leaf nodes, left to right.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.nodes.is_empty() {
            self.collect_leaves(0, &mut out);
        }
        out
    }

    fn collect_leaves(&self, k: usize, out: &mut Vec<usize>) {
        let node = &self.nodes[k];
        if node.is_leaf() {
            if k != 0 || !self.support.is_empty() {
                out.push(node.lo);
            }
            return;
        }
        for c in [node.left, node.right].into_iter().flatten() {
            self.collect_leaves(c, out);
        }
    }
}

/// The deterministic tree whose leaves are exactly `support` (sorted, distinct, `< width`).
pub fn build_training_tree(support: &[usize], width: usize) -> Result<RowTree> {
    if let Some(&v) = support.iter().find(|&&v| v >= width) {
        return Err(Error::NodeOutOfRange { node: v, n: width });
    }
    if support.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("row support must be strictly increasing"));
    }
    let mut tree = RowTree {
        width,
        nodes: Vec::new(),
        support: support.to_vec(),
    };
    if width > 0 {
        grow(&mut tree.nodes, 0, width - 1, support);
    }
    Ok(tree)
}

fn grow(nodes: &mut Vec<TreeNode>, lo: usize, hi: usize, support: &[usize]) -> usize {
    let k = nodes.len();
    nodes.push(TreeNode {
        lo,
        hi,
        left: None,
        right: None,
    });
    if lo < hi {
        let mid = split_point(lo, hi);
        let cut = support.partition_point(|&v| v <= mid);
        let (ls, rs) = support.split_at(cut);
        if !ls.is_empty() {
            let c = grow(nodes, lo, mid, ls);
            nodes[k].left = Some(c);
        }
        if !rs.is_empty() {
            let c = grow(nodes, mid + 1, hi, rs);
            nodes[k].right = Some(c);
        }
    }
    k
}

/// Upper bound `2 z (ceil(log2 w) + 1) + 1` on the size of a tree with `z` leaves.
pub fn tree_size_bound(nonzeros: usize, width: usize) -> usize {
    if nonzeros == 0 {
        return 1;
    }
    let depth = (usize::BITS - (width.max(1) - 1).leading_zeros()) as usize;
    2 * nonzeros * (depth + 1) + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column_root_is_leaf() {
        let t = build_training_tree(&[0], 1).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.nodes[0].is_leaf());
        assert_eq!(t.leaves(), vec![0]);
        assert_eq!(build_training_tree(&[], 1).unwrap().leaves(), Vec::<usize>::new());
    }

    #[test]
    fn empty_support_is_bare_root() {
        let t = build_training_tree(&[], 4).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.nodes[0].left, None);
        assert_eq!(t.nodes[0].right, None);
        assert!(build_training_tree(&[], 0).unwrap().is_empty());
    }

    #[test]
    fn five_columns_two_leaves() {
        // columns 1 and 4 in 0-based labels
        let t = build_training_tree(&[1, 4], 5).unwrap();
        let spans: Vec<(usize, usize)> = t.nodes.iter().map(|n| (n.lo, n.hi)).collect();
        assert_eq!(spans, vec![(0, 4), (0, 2), (0, 1), (1, 1), (3, 4), (4, 4)]);
        assert_eq!(t.leaves(), vec![1, 4]);
    }

    #[test]
    fn leaves_round_trip_exhaustively() {
        for w in 1..=9usize {
            for mask in 0u32..(1 << w) {
                let support: Vec<usize> = (0..w).filter(|&v| mask >> v & 1 == 1).collect();
                let t = build_training_tree(&support, w).unwrap();
                assert_eq!(t.leaves(), support);
                assert!(t.len() <= tree_size_bound(support.len(), w));
            }
        }
    }

    #[test]
    fn bad_support_is_rejected() {
        assert!(build_training_tree(&[5], 5).is_err());
        assert!(build_training_tree(&[2, 1], 5).is_err());
    }

    #[test]
    fn bound_values() {
        assert_eq!(tree_size_bound(0, 100), 1);
        assert_eq!(tree_size_bound(1, 1), 3);
        assert_eq!(tree_size_bound(1, 4), 7);
        assert_eq!(tree_size_bound(2, 5), 17);
    }
}
