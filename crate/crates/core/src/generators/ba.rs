use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NetworkTimeSeries};
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BAParams {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

/// Preferential attachment growth on a fixed node set of size `n`.
///
/// `G_0` holds the `m` initial nodes with no edges. Node `m + t - 1` arrives at step `t` and
/// attaches to `m` distinct earlier nodes; the first arrival takes all initial nodes, later
/// arrivals draw targets with probability proportional to degree, without replacement.
/// Nodes that have not arrived yet are present but isolated, so the series has `n - m`
/// transitions.
pub fn gen_ba(params: BAParams) -> Result<NetworkTimeSeries> {
    let BAParams { n, m, seed } = params;
    if m == 0 || m >= n {
        return Err(Error::param(format!("need 1 <= m < n, got m={m}, n={n}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut g = Graph::empty(n);
    let mut degree = vec![0usize; n];
    let mut graphs = Vec::with_capacity(n - m + 1);
    graphs.push(g.clone());

    for arriving in m..n {
        let targets: Vec<usize> = if arriving == m {
            (0..m).collect()
        } else {
            let mut weights: Vec<usize> = degree[..arriving].to_vec();
            let mut total: usize = weights.iter().sum();
            let mut chosen = Vec::with_capacity(m);
            while chosen.len() < m {
                let mut r = rng.gen_range(0..total);
                let pick = weights
                    .iter()
                    .position(|&w| {
                        if r < w {
                            true
                        } else {
                            r -= w;
                            false
                        }
                    })
                    .expect("draw lands inside the total weight");
                total -= weights[pick];
                weights[pick] = 0;
                chosen.push(pick);
            }
            chosen
        };
        for v in targets {
            g.add_edge(arriving, v)?;
            degree[arriving] += 1;
            degree[v] += 1;
        }
        graphs.push(g.clone());
    }

    Ok(NetworkTimeSeries::new(
        format!("ba:n={n},m={m},seed={seed}"),
        n,
        graphs,
    ))
}
