use rand::seq::SliceRandom;
use rand::Rng;

use super::check_prob;
use crate::error::{Error, Result};
use crate::graph::{Graph, NetworkTimeSeries};
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, PartialEq)]
pub struct CommunityDecayParams {
    pub community_sizes: Vec<usize>,
    /// Within-community edge probability.
    pub p_int: f64,
    /// Across-community edge probability.
    pub p_ext: f64,
    /// Index of the decaying community.
    pub decay: usize,
    pub f_dec: f64,
    pub steps: usize,
    pub seed: u64,
}

/// Community label of every node; communities occupy contiguous label blocks.
pub fn community_of(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat(c).take(s))
        .collect()
}

/// Stochastic block model whose decay community loses `floor(f_dec * |internal edges|)`
/// internal edges per step, each replaced by an edge from one of its endpoints to a
/// non-adjacent node outside the community.
pub fn gen_community_decay(params: &CommunityDecayParams) -> Result<NetworkTimeSeries> {
    let sizes = &params.community_sizes;
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::param("community sizes must be positive"));
    }
    if params.decay >= sizes.len() {
        return Err(Error::param(format!(
            "decay community {} out of range for {} communities",
            params.decay,
            sizes.len()
        )));
    }
    check_prob("p_int", params.p_int)?;
    check_prob("p_ext", params.p_ext)?;
    check_prob("f_dec", params.f_dec)?;

    let comm = community_of(sizes);
    let n = comm.len();
    let d = params.decay;
    let mut rng = rng_from_seed(params.seed);

    let mut g = Graph::empty(n);
    for j in 0..n {
        for i in 0..j {
            let p = if comm[i] == comm[j] {
                params.p_int
            } else {
                params.p_ext
            };
            if rng.gen_bool(p) {
                g.add_edge(i, j)?;
            }
        }
    }
    let outside: Vec<usize> = (0..n).filter(|&v| comm[v] != d).collect();
    let mut graphs = vec![g.clone()];

    for _ in 0..params.steps {
        let mut internal: Vec<(usize, usize)> = g
            .edges()
            .filter(|&(i, j)| comm[i] == d && comm[j] == d)
            .collect();
        let k = (params.f_dec * internal.len() as f64).floor() as usize;
        for _ in 0..k {
            let (i, j) = internal.swap_remove(rng.gen_range(0..internal.len()));
            g.remove_edge(i, j);
            let u = if rng.gen_bool(0.5) { i } else { j };
            let targets: Vec<usize> = outside
                .iter()
                .copied()
                .filter(|&v| !g.has_edge(u, v))
                .collect();
            let &target = targets.choose(&mut rng).ok_or_else(|| {
                Error::Degenerate(format!(
                    "node {u} is already linked to every node outside the decay community"
                ))
            })?;
            g.add_edge(u, target)?;
        }
        graphs.push(g.clone());
    }

    Ok(NetworkTimeSeries::new(
        format!(
            "community:sizes={},p_int={},p_ext={},decay={},f_dec={},T={},seed={}",
            sizes
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join("/"),
            params.p_int,
            params.p_ext,
            d,
            params.f_dec,
            params.steps,
            params.seed
        ),
        n,
        graphs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig6(seed: u64) -> CommunityDecayParams {
        CommunityDecayParams {
            community_sizes: vec![15, 15, 15],
            p_int: 0.7,
            p_ext: 0.005,
            decay: 2,
            f_dec: 0.2,
            steps: 5,
            seed,
        }
    }

    fn internal_counts(s: &NetworkTimeSeries, sizes: &[usize], c: usize) -> Vec<usize> {
        let comm = community_of(sizes);
        s.graphs
            .iter()
            .map(|g| {
                g.edges()
                    .filter(|&(i, j)| comm[i] == c && comm[j] == c)
                    .count()
            })
            .collect()
    }

    #[test]
    fn floor_recurrence_and_constant_edge_count() {
        for seed in 0..20 {
            let p = fig6(seed);
            let s = gen_community_decay(&p).unwrap();
            assert_eq!(s.graphs.len(), 6);
            let e0 = s.graphs[0].num_edges();
            assert!(s.graphs.iter().all(|g| g.num_edges() == e0));
            let dec = internal_counts(&s, &p.community_sizes, 2);
            for w in dec.windows(2) {
                assert_eq!(w[1], w[0] - (0.2 * w[0] as f64).floor() as usize);
            }
            for c in 0..2 {
                let kept = internal_counts(&s, &p.community_sizes, c);
                assert!(kept.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn non_decay_internal_edges_survive() {
        let p = fig6(4);
        let s = gen_community_decay(&p).unwrap();
        let comm = community_of(&p.community_sizes);
        for w in s.graphs.windows(2) {
            for (i, j) in w[0].edges() {
                if comm[i] == comm[j] && comm[i] != 2 {
                    assert!(w[1].has_edge(i, j));
                }
            }
        }
    }

    #[test]
    fn degenerate_targets_are_reported() {
        let p = CommunityDecayParams {
            community_sizes: vec![1, 3],
            p_int: 1.0,
            p_ext: 1.0,
            decay: 1,
            f_dec: 1.0,
            steps: 1,
            seed: 0,
        };
        assert!(matches!(
            gen_community_decay(&p),
            Err(Error::Degenerate(_))
        ));
    }
}
