use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::check_prob;
use crate::error::{Error, Result};
use crate::graph::{Graph, NetworkTimeSeries};
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BipartiteParams {
    pub per_side: usize,
    pub p: f64,
    pub p_con: f64,
    pub steps: usize,
    pub seed: u64,
}

/// Bipartite concentration: left nodes `[0, per_side)`, right nodes `[per_side, 2 per_side)`.
///
/// Each step picks the right node of maximum degree (uniform among ties) as the hub. Of the
/// edges whose right endpoint is not the hub, `floor(p_con * count)` are drawn without
/// replacement and moved onto the hub, keeping their left endpoint. A move whose target edge
/// already exists is skipped, so the edge count never changes.
pub fn gen_bipartite(params: BipartiteParams) -> Result<NetworkTimeSeries> {
    let BipartiteParams {
        per_side,
        p,
        p_con,
        steps,
        seed,
    } = params;
    if per_side == 0 {
        return Err(Error::param("per_side must be at least 1"));
    }
    check_prob("p", p)?;
    check_prob("p_con", p_con)?;

    let n = 2 * per_side;
    let mut rng = rng_from_seed(seed);
    let mut g = Graph::empty(n);
    for l in 0..per_side {
        for r in per_side..n {
            if rng.gen_bool(p) {
                g.add_edge(l, r)?;
            }
        }
    }
    let mut graphs = vec![g.clone()];

    for _ in 0..steps {
        let deg = g.degrees();
        let max_deg = (per_side..n).map(|r| deg[r]).max().unwrap_or(0);
        let tied: Vec<usize> = (per_side..n).filter(|&r| deg[r] == max_deg).collect();
        let hub = *tied.choose(&mut rng).expect("right partition is nonempty");

        let candidates: Vec<(usize, usize)> = g.edges().filter(|&(_, r)| r != hub).collect();
        let k = (p_con * candidates.len() as f64).floor() as usize;
        for idx in index::sample(&mut rng, candidates.len(), k) {
            let (l, r) = candidates[idx];
            if !g.has_edge(l, hub) {
                g.remove_edge(l, r);
                g.add_edge(l, hub)?;
            }
        }
        graphs.push(g.clone());
    }

    Ok(NetworkTimeSeries::new(
        format!("bipartite:per_side={per_side},p={p},p_con={p_con},T={steps},seed={seed}"),
        n,
        graphs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(seed: u64) -> BipartiteParams {
        BipartiteParams {
            per_side: 10,
            p: 0.2,
            p_con: 0.3,
            steps: 8,
            seed,
        }
    }

    #[test]
    fn stays_bipartite_with_constant_edges() {
        for seed in 0..20 {
            let s = gen_bipartite(params(seed)).unwrap();
            assert_eq!(s.graphs.len(), 9);
            let e0 = s.graphs[0].num_edges();
            for g in &s.graphs {
                assert_eq!(g.num_edges(), e0);
                assert!(g.edges().all(|(l, r)| l < 10 && r >= 10));
            }
        }
    }

    #[test]
    fn hub_degree_never_drops() {
        for seed in 0..100 {
            let s = gen_bipartite(params(seed)).unwrap();
            let maxes: Vec<usize> = s
                .graphs
                .iter()
                .map(|g| g.degrees()[10..].iter().copied().max().unwrap())
                .collect();
            assert!(maxes.windows(2).all(|w| w[0] <= w[1]), "{maxes:?}");
        }
    }

    #[test]
    fn rejects_bad_probability() {
        let mut p = params(0);
        p.p_con = 1.5;
        assert!(gen_bipartite(p).is_err());
    }
}
