use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const CLUSTERING_BINS: usize = 100;
pub const SPECTRAL_BINS: usize = 200;
const BIN_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticId {
    Degree,
    Clustering,
    Spectral,
    Transitivity,
    Assortativity,
    Closeness,
    SpectralBipartivity,
}

impl StatisticId {
    pub const ALL: [StatisticId; 7] = [
        StatisticId::Degree,
        StatisticId::Clustering,
        StatisticId::Spectral,
        StatisticId::Transitivity,
        StatisticId::Assortativity,
        StatisticId::Closeness,
        StatisticId::SpectralBipartivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StatisticId::Degree => "degree",
            StatisticId::Clustering => "clustering",
            StatisticId::Spectral => "spectral",
            StatisticId::Transitivity => "transitivity",
            StatisticId::Assortativity => "assortativity",
            StatisticId::Closeness => "closeness",
            StatisticId::SpectralBipartivity => "spectral_bipartivity",
        }
    }

    /// Node-level statistics compared as histograms.
    pub fn is_histogram(self) -> bool {
        matches!(
            self,
            StatisticId::Degree | StatisticId::Clustering | StatisticId::Spectral
        )
    }

    /// Parses a comma-separated list; `all` selects every statistic.
    pub fn parse_list(s: &str) -> Result<Vec<StatisticId>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                return Ok(StatisticId::ALL.to_vec());
            }
            let id: StatisticId = part.parse()?;
            if !out.contains(&id) {
                out.push(id);
            }
        }
        if out.is_empty() {
            return Err(Error::param("no statistics selected"));
        }
        Ok(out)
    }
}

impl fmt::Display for StatisticId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "degree" | "degree_hist" => StatisticId::Degree,
            "clustering" | "clustering_hist" => StatisticId::Clustering,
            "spectral" | "spectral_hist" => StatisticId::Spectral,
            "transitivity" => StatisticId::Transitivity,
            "assortativity" => StatisticId::Assortativity,
            "closeness" => StatisticId::Closeness,
            "spectral_bipartivity" | "sb" => StatisticId::SpectralBipartivity,
            _ => return Err(Error::param(format!("unknown statistic `{s}`"))),
        })
    }
}

/// A statistic of one graph.
#[derive(Clone, Debug, PartialEq)]
pub enum StatValue {
    /// Normalized histogram.
    Hist(Vec<f64>),
    Scalar(f64),
}

pub fn local_clustering(g: &Graph) -> Vec<f64> {
    let adj = g.adjacency_lists();
    let n = g.n();
    let mut mark = vec![false; n];
    (0..n)
        .map(|i| {
            let d = adj[i].len();
            if d < 2 {
                return 0.0;
            }
            for &j in &adj[i] {
                mark[j] = true;
            }
            let mut links = 0usize;
            for &j in &adj[i] {
                links += adj[j].iter().filter(|&&k| mark[k]).count();
            }
            for &j in &adj[i] {
                mark[j] = false;
            }
            // each neighbour link was seen from both ends
            (links / 2) as f64 / (d * (d - 1) / 2) as f64
        })
        .collect()
}

fn symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn adjacency_eigenvalues(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let mut a = DMatrix::zeros(n, n);
    for (i, j) in g.edges() {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    symmetric_eigenvalues(a)
}

/// Spectrum of `I - D^-1/2 A D^-1/2`; isolated nodes get a zero diagonal.
pub fn normalized_laplacian_eigenvalues(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let deg = g.degrees();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        if deg[i] > 0 {
            l[(i, i)] = 1.0;
        }
    }
    for (i, j) in g.edges() {
        let w = -1.0 / ((deg[i] * deg[j]) as f64).sqrt();
        l[(i, j)] = w;
        l[(j, i)] = w;
    }
    symmetric_eigenvalues(l)
}

/// The per-node values behind a histogram statistic.
pub fn node_values(g: &Graph, id: StatisticId) -> Result<Vec<f64>> {
    Ok(match id {
        StatisticId::Degree => g.degrees().into_iter().map(|d| d as f64).collect(),
        StatisticId::Clustering => local_clustering(g),
        StatisticId::Spectral => normalized_laplacian_eigenvalues(g),
        _ => return Err(Error::param(format!("{id} is not a node-level statistic"))),
    })
}

fn normalized(mut counts: Vec<f64>) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        counts.iter_mut().for_each(|c| *c /= total);
    }
    counts
}

fn bin_of(x: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let pos = (x - lo) / (hi - lo) * bins as f64 + BIN_EPS;
    (pos.max(0.0).floor() as usize).min(bins - 1)
}

pub fn node_histogram_stat(g: &Graph, id: StatisticId) -> Result<Vec<f64>> {
    let values = node_values(g, id)?;
    let (bins, lo, hi) = match id {
        StatisticId::Degree => (g.n().max(1), 0.0, g.n().max(1) as f64),
        StatisticId::Clustering => (CLUSTERING_BINS, 0.0, 1.0),
        _ => (SPECTRAL_BINS, 0.0, 2.0),
    };
    let mut counts = vec![0.0; bins];
    for x in values {
        counts[bin_of(x, lo, hi, bins)] += 1.0;
    }
    Ok(normalized(counts))
}

pub fn transitivity(g: &Graph) -> f64 {
    let triangles_x3: f64 = local_clustering(g)
        .iter()
        .zip(g.degrees())
        .map(|(c, d)| c * (d * d.saturating_sub(1) / 2) as f64)
        .sum();
    let triples: usize = g.degrees().iter().map(|d| d * d.saturating_sub(1) / 2).sum();
    if triples == 0 {
        0.0
    } else {
        triangles_x3 / triples as f64
    }
}

/// Pearson correlation of endpoint degrees over both orientations of every edge; zero
/// when either side has no variance.
pub fn assortativity(g: &Graph) -> f64 {
    let deg = g.degrees();
    let mut xs = Vec::with_capacity(2 * g.num_edges());
    let mut ys = Vec::with_capacity(2 * g.num_edges());
    for (i, j) in g.edges() {
        xs.extend([deg[i] as f64, deg[j] as f64]);
        ys.extend([deg[j] as f64, deg[i] as f64]);
    }
    if xs.is_empty() {
        return 0.0;
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 1e-12 || syy <= 1e-12 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Mean closeness centrality with per-component scaling: for a node reaching `r - 1`
/// others at total distance `s`, `((r-1)/s) * ((r-1)/(n-1))`; isolated nodes score 0.
pub fn closeness(g: &Graph) -> f64 {
    let n = g.n();
    if n < 2 {
        return 0.0;
    }
    let adj = g.adjacency_lists();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut total = 0.0;
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        queue.push_back(s);
        let (mut reached, mut sum) = (0usize, 0usize);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    reached += 1;
                    sum += dist[v];
                    queue.push_back(v);
                }
            }
        }
        if sum > 0 {
            let r = reached as f64;
            total += (r / sum as f64) * (r / (n - 1) as f64);
        }
    }
    total / n as f64
}

/// `sum cosh(l) / sum exp(l)` over the adjacency spectrum; 1 exactly when bipartite.
pub fn spectral_bipartivity(g: &Graph) -> f64 {
    let ev = adjacency_eigenvalues(g);
    if ev.is_empty() {
        return 1.0;
    }
    let num: f64 = ev.iter().map(|l| l.cosh()).sum();
    let den: f64 = ev.iter().map(|l| l.exp()).sum();
    num / den
}

pub fn global_scalar_stat(g: &Graph, id: StatisticId) -> Result<f64> {
    Ok(match id {
        StatisticId::Transitivity => transitivity(g),
        StatisticId::Assortativity => assortativity(g),
        StatisticId::Closeness => closeness(g),
        StatisticId::SpectralBipartivity => spectral_bipartivity(g),
        _ => return Err(Error::param(format!("{id} is not a graph-level statistic"))),
    })
}

pub fn statistic(g: &Graph, id: StatisticId) -> StatValue {
    if id.is_histogram() {
        StatValue::Hist(node_histogram_stat(g, id).expect("histogram statistic"))
    } else {
        StatValue::Scalar(global_scalar_stat(g, id).expect("scalar statistic"))
    }
}

/// A one-number summary used for the statistic-versus-time curves: the node mean for
/// histogram statistics, the value itself otherwise.
pub fn curve_value(g: &Graph, id: StatisticId) -> f64 {
    if id.is_histogram() {
        let v = node_values(g, id).expect("histogram statistic");
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    } else {
        global_scalar_stat(g, id).expect("scalar statistic")
    }
}

/// Density of the subgraph induced by the nodes labelled `community`.
pub fn community_density(g: &Graph, labels: &[usize], community: usize) -> f64 {
    let size = labels.iter().filter(|&&c| c == community).count();
    if size < 2 {
        return 0.0;
    }
    let internal = g
        .edges()
        .filter(|&(i, j)| labels[i] == community && labels[j] == community)
        .count();
    internal as f64 / (size * (size - 1) / 2) as f64
}
