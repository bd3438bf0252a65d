//! Simple undirected graphs on a fixed labelled node set, network time series,
//! and the sparse signed delta between consecutive snapshots.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// A simple undirected graph on nodes `0..n`. Edges are stored as `(i, j)` with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: BTreeSet::new(),
        }
    }

    /// Builds a graph from pairs in any orientation. Duplicates collapse; self-loops and
    /// out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonical `(lo, hi)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&canonical(i, j))
    }

    /// Inserts an edge; returns `true` if it was not already present.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<bool> {
        self.check_pair(i, j)?;
        Ok(self.edges.insert(canonical(i, j)))
    }

    /// Removes an edge; returns `true` if it was present.
    pub fn remove_edge(&mut self, i: usize, j: usize) -> bool {
        self.edges.remove(&canonical(i, j))
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        for node in [i, j] {
            if node >= self.n {
                return Err(Error::NodeOutOfRange { node, n: self.n });
            }
        }
        Ok(())
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Sorted neighbour lists.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Dense 0/1 adjacency in row-major order.
    pub fn dense_adjacency(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for &(i, j) in &self.edges {
            a[i * n + j] = 1.0;
            a[j * n + i] = 1.0;
        }
        a
    }

    pub fn density(&self) -> f64 {
        let pairs = self.n * self.n.saturating_sub(1) / 2;
        if pairs == 0 {
            0.0
        } else {
            self.edges.len() as f64 / pairs as f64
        }
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, |E|={})", self.n, self.edges.len())
    }
}

#[inline]
fn canonical(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// An ordered sequence of graphs `G_0..G_T` on the same node set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkTimeSeries {
    pub id: String,
    pub n: usize,
    pub graphs: Vec<Graph>,
}

impl NetworkTimeSeries {
    pub fn new(id: impl Into<String>, n: usize, graphs: Vec<Graph>) -> Self {
        NetworkTimeSeries {
            id: id.into(),
            n,
            graphs,
        }
    }

    /// Number of transitions, `T`.
    pub fn num_transitions(&self) -> usize {
        self.graphs.len().saturating_sub(1)
    }

    /// Consecutive `(G_{t-1}, G_t)` pairs.
    pub fn transitions(&self) -> impl Iterator<Item = (&Graph, &Graph)> {
        self.graphs.windows(2).map(|w| (&w[0], &w[1]))
    }
}

/// A problem found by [`validate_nts`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    NodeCount {
        index: usize,
        expected: usize,
        found: usize,
    },
    SelfLoop {
        timestep: usize,
        node: usize,
    },
    OutOfRange {
        timestep: usize,
        node: usize,
    },
    NonCanonical {
        timestep: usize,
        edge: (usize, usize),
    },
    TooShort {
        len: usize,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NodeCount {
                index,
                expected,
                found,
            } => write!(f, "graph {index}: node count {found}, expected {expected}"),
            Diagnostic::SelfLoop { timestep, node } => {
                write!(f, "timestep {timestep}: self-loop on node {node}")
            }
            Diagnostic::OutOfRange { timestep, node } => {
                write!(f, "timestep {timestep}: node {node} out of range")
            }
            Diagnostic::NonCanonical { timestep, edge } => {
                write!(f, "timestep {timestep}: edge {edge:?} not stored as i < j")
            }
            Diagnostic::TooShort { len } => {
                write!(f, "series has {len} snapshot(s); at least 2 are needed")
            }
        }
    }
}

/// Reports simplicity and labelling violations per timestep. An empty result means valid.
pub fn validate_nts(series: &NetworkTimeSeries) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if series.graphs.len() < 2 {
        out.push(Diagnostic::TooShort {
            len: series.graphs.len(),
        });
    }
    for (t, g) in series.graphs.iter().enumerate() {
        if g.n != series.n {
            out.push(Diagnostic::NodeCount {
                index: t,
                expected: series.n,
                found: g.n,
            });
        }
        // Graphs built through the public constructors are always clean; these checks
        // guard values assembled field-by-field inside the crate.
        for &(i, j) in &g.edges {
            if i == j {
                out.push(Diagnostic::SelfLoop {
                    timestep: t,
                    node: i,
                });
            } else if i > j {
                out.push(Diagnostic::NonCanonical {
                    timestep: t,
                    edge: (i, j),
                });
            }
            for node in [i, j] {
                if node >= series.n {
                    out.push(Diagnostic::OutOfRange { timestep: t, node });
                }
            }
        }
    }
    out
}

/// Builds a graph without validation. Only for [`validate_nts`] tests and the dataset reader's
/// diagnostics path.
#[doc(hidden)]
pub fn graph_unchecked(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Graph {
    Graph {
        n,
        edges: edges.into_iter().collect(),
    }
}

/// Sign of a nonzero delta entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Remove,
    Add,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Add => 1,
            Sign::Remove => -1,
        }
    }

    /// The only admissible sign for a changed entry given whether the edge existed.
    pub fn for_existing(edge_present: bool) -> Self {
        if edge_present {
            Sign::Remove
        } else {
            Sign::Add
        }
    }
}

/// Sparse lower-triangular `A^(t) - A^(t-1)`: keys are `(u, v)` with `v < u`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DeltaMatrix {
    n: usize,
    entries: BTreeMap<(usize, usize), Sign>,
}

impl DeltaMatrix {
    pub fn empty(n: usize) -> Self {
        DeltaMatrix {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sets entry `{i, j}` (any orientation) to `sign`, stored at `(max, min)`.
    pub fn insert(&mut self, i: usize, j: usize, sign: Sign) -> Result<()> {
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        let (v, u) = canonical(i, j);
        if u >= self.n {
            return Err(Error::NodeOutOfRange { node: u, n: self.n });
        }
        self.entries.insert((u, v), sign);
        Ok(())
    }

    pub fn get(&self, u: usize, v: usize) -> Option<Sign> {
        let (lo, hi) = canonical(u, v);
        self.entries.get(&(hi, lo)).copied()
    }

    /// Entries in row-major order of the lower triangle.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), Sign)> + '_ {
        self.entries.iter().map(|(&k, &s)| (k, s))
    }

    /// Sorted nonzero columns of row `u`.
    pub fn row_support(&self, u: usize) -> Vec<usize> {
        self.entries
            .range((u, 0)..(u + 1, 0))
            .map(|(&(_, v), _)| v)
            .collect()
    }
}

/// Signed difference between two snapshots on the same node set.
pub fn compute_delta(prev: &Graph, next: &Graph) -> Result<DeltaMatrix> {
    if prev.n != next.n {
        return Err(Error::NodeCountMismatch {
            expected: prev.n,
            found: next.n,
        });
    }
    let mut delta = DeltaMatrix::empty(prev.n);
    for &(i, j) in next.edges.difference(&prev.edges) {
        delta.entries.insert((j, i), Sign::Add);
    }
    for &(i, j) in prev.edges.difference(&next.edges) {
        delta.entries.insert((j, i), Sign::Remove);
    }
    Ok(delta)
}

/// Checks that every `+1` is a missing edge and every `-1` an existing one.
pub fn check_delta(prev: &Graph, delta: &DeltaMatrix) -> Result<()> {
    if prev.n != delta.n {
        return Err(Error::NodeCountMismatch {
            expected: prev.n,
            found: delta.n,
        });
    }
    for (&(u, v), &sign) in &delta.entries {
        match (sign, prev.has_edge(u, v)) {
            (Sign::Add, true) => {
                return Err(Error::InconsistentDelta {
                    u,
                    v,
                    reason: "adding an existing edge",
                })
            }
            (Sign::Remove, false) => {
                return Err(Error::InconsistentDelta {
                    u,
                    v,
                    reason: "removing a missing edge",
                })
            }
            _ => {}
        }
    }
    Ok(())
}

pub fn apply_delta(prev: &Graph, delta: &DeltaMatrix) -> Result<Graph> {
    check_delta(prev, delta)?;
    let mut g = prev.clone();
    for (&(u, v), &sign) in &delta.entries {
        match sign {
            Sign::Add => g.edges.insert((v, u)),
            Sign::Remove => g.edges.remove(&(v, u)),
        };
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_graphs(n: usize) -> Vec<Graph> {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|j| (0..j).map(move |i| (i, j)))
            .collect();
        (0u32..(1 << pairs.len()))
            .map(|mask| {
                Graph::from_edges(
                    n,
                    pairs
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| mask >> b & 1 == 1)
                        .map(|(_, &p)| p),
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn identical_graphs_give_empty_delta() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3), (1, 3)]).unwrap();
        assert!(compute_delta(&g, &g).unwrap().is_empty());
    }

    #[test]
    fn removal_is_recorded_in_lower_triangle() {
        let prev = Graph::from_edges(3, [(0, 1)]).unwrap();
        let next = Graph::empty(3);
        let d = compute_delta(&prev, &next).unwrap();
        assert_eq!(d.entries().collect::<Vec<_>>(), vec![((1, 0), Sign::Remove)]);
    }

    #[test]
    fn single_addition() {
        let mut d = DeltaMatrix::empty(2);
        d.insert(1, 0, Sign::Add).unwrap();
        let g = apply_delta(&Graph::empty(2), &d).unwrap();
        assert_eq!(g, Graph::from_edges(2, [(0, 1)]).unwrap());
        assert_eq!(apply_delta(&g, &DeltaMatrix::empty(2)).unwrap(), g);
    }

    #[test]
    fn mismatched_node_counts_are_rejected() {
        let err = compute_delta(&Graph::empty(3), &Graph::empty(4)).unwrap_err();
        assert!(matches!(err, Error::NodeCountMismatch { .. }));
    }

    #[test]
    fn inconsistent_delta_is_rejected() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let mut d = DeltaMatrix::empty(3);
        d.insert(0, 1, Sign::Add).unwrap();
        assert!(matches!(
            apply_delta(&g, &d),
            Err(Error::InconsistentDelta { .. })
        ));
        let mut d = DeltaMatrix::empty(3);
        d.insert(2, 1, Sign::Remove).unwrap();
        assert!(apply_delta(&g, &d).is_err());
    }

    #[test]
    fn exhaustive_round_trip_small_graphs() {
        for n in 1..=4 {
            let graphs = all_graphs(n);
            for a in &graphs {
                for b in &graphs {
                    let d = compute_delta(a, b).unwrap();
                    assert!(d.entries().all(|((u, v), _)| v < u));
                    assert_eq!(&apply_delta(a, &d).unwrap(), b);
                }
            }
        }
    }

    #[test]
    fn edges_are_canonicalized() {
        let g = Graph::from_edges(3, [(2, 0), (0, 2), (1, 0)]).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
        assert!(matches!(
            Graph::from_edges(3, [(1, 1)]),
            Err(Error::SelfLoop(1))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 3)]),
            Err(Error::NodeOutOfRange { node: 3, n: 3 })
        ));
    }

    #[test]
    fn validate_reports_timestep_and_index() {
        let good = NetworkTimeSeries::new(
            "ok",
            3,
            vec![Graph::empty(3), Graph::from_edges(3, [(0, 1)]).unwrap()],
        );
        assert!(validate_nts(&good).is_empty());

        let looped = NetworkTimeSeries::new(
            "loop",
            3,
            vec![
                Graph::empty(3),
                Graph::empty(3),
                graph_unchecked(3, [(1, 1)]),
            ],
        );
        assert_eq!(
            validate_nts(&looped),
            vec![Diagnostic::SelfLoop {
                timestep: 2,
                node: 1
            }]
        );

        let mismatched =
            NetworkTimeSeries::new("n", 3, vec![Graph::empty(3), Graph::empty(4)]);
        assert_eq!(
            validate_nts(&mismatched),
            vec![Diagnostic::NodeCount {
                index: 1,
                expected: 3,
                found: 4
            }]
        );
    }

    fn arb_graph(n: usize) -> impl Strategy<Value = Graph> {
        proptest::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |pairs| {
            Graph::from_edges(n, pairs.into_iter().filter(|(i, j)| i != j)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn compute_then_apply_is_identity((a, b) in (2usize..12).prop_flat_map(|n| (arb_graph(n), arb_graph(n)))) {
            let d = compute_delta(&a, &b).unwrap();
            prop_assert_eq!(apply_delta(&a, &d).unwrap(), b.clone());
            prop_assert!(d.entries().all(|((u, v), _)| v < u));
        }

        #[test]
        fn apply_then_compute_is_identity((g, flips) in (2usize..12).prop_flat_map(|n| (arb_graph(n), proptest::collection::vec((0..n, 0..n), 0..20)))) {
            let mut d = DeltaMatrix::empty(g.n());
            for (i, j) in flips.into_iter().filter(|(i, j)| i != j) {
                d.insert(i, j, Sign::for_existing(g.has_edge(i, j))).unwrap();
            }
            let next = apply_delta(&g, &d).unwrap();
            prop_assert_eq!(compute_delta(&g, &next).unwrap(), d);
        }
    }
}
