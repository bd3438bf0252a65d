use super::*;
use crate::generators::{gen_bipartite, BipartiteParams};
use crate::graph::{Graph, NetworkTimeSeries};

fn k3() -> Graph {
    Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
}

fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).unwrap()
}

fn cycle(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
}

#[test]
fn histograms_of_small_graphs() {
    let e = node_histogram_stat(&Graph::empty(5), StatisticId::Degree).unwrap();
    assert_eq!(e, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    let c = node_histogram_stat(&k3(), StatisticId::Clustering).unwrap();
    assert_eq!(c.len(), CLUSTERING_BINS);
    assert_eq!(c[99], 1.0);
    let ev = normalized_laplacian_eigenvalues(&k3());
    for (a, b) in ev.iter().zip([0.0, 1.5, 1.5]) {
        assert!((a - b).abs() < 1e-12);
    }
    let s = node_histogram_stat(&k3(), StatisticId::Spectral).unwrap();
    assert_eq!(s.len(), SPECTRAL_BINS);
    assert!((s[0] - 1.0 / 3.0).abs() < 1e-12);
    assert!((s[150] - 2.0 / 3.0).abs() < 1e-12);
    for g in [k3(), star(4), cycle(6), Graph::empty(3)] {
        for id in [StatisticId::Degree, StatisticId::Clustering, StatisticId::Spectral] {
            let sum: f64 = node_histogram_stat(&g, id).unwrap().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }
    assert!(node_histogram_stat(&k3(), StatisticId::Closeness).is_err());
}

#[test]
fn scalar_statistics() {
    assert_eq!(transitivity(&k3()), 1.0);
    assert_eq!(transitivity(&star(4)), 0.0);
    assert!((assortativity(&star(4)) + 1.0).abs() < 1e-12);
    assert_eq!(assortativity(&cycle(5)), 0.0);
    assert_eq!(assortativity(&Graph::empty(4)), 0.0);
    let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
    assert!((closeness(&path) - 7.0 / 9.0).abs() < 1e-12);
    let path_plus = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
    let expected = (4.0 / 9.0 + 2.0 / 3.0 + 4.0 / 9.0) / 4.0;
    assert!((closeness(&path_plus) - expected).abs() < 1e-12);
    assert_eq!(closeness(&Graph::empty(3)), 0.0);
}

#[test]
fn spectral_bipartivity_cases() {
    let e = std::f64::consts::E;
    let expected = (2f64.cosh() + 2.0 * 1f64.cosh()) / (e * e + 2.0 / e);
    assert!((spectral_bipartivity(&k3()) - expected).abs() < 1e-10);
    assert!((spectral_bipartivity(&cycle(6)) - 1.0).abs() < 1e-10);
    assert!((spectral_bipartivity(&star(5)) - 1.0).abs() < 1e-10);
    assert_eq!(spectral_bipartivity(&Graph::empty(4)), 1.0);
    let sb = spectral_bipartivity(&cycle(5));
    assert!(sb > 0.0 && sb < 1.0);
}

#[test]
fn mmd_hand_cases() {
    let a = StatValue::Hist(vec![1.0, 0.0]);
    let b = StatValue::Hist(vec![0.0, 1.0]);
    let v = mmd2(&[a.clone()], &[b.clone()], 1.0).unwrap();
    assert!((v - (2.0 - 2.0 * (-0.5f64).exp())).abs() < 1e-12);
    let x = vec![a.clone(), b.clone(), a.clone()];
    assert_eq!(mmd2(&x, &x, 1.0).unwrap(), 0.0);
    let y = vec![b.clone(), StatValue::Hist(vec![0.5, 0.5])];
    assert_eq!(mmd2(&x, &y, 1.0).unwrap(), mmd2(&y, &x, 1.0).unwrap());
    assert!(mmd2(&[a], &[StatValue::Scalar(1.0)], 1.0).is_err());
    assert!(mmd2(&[], &[b], 1.0).is_err());
    let s = mmd2(&[StatValue::Scalar(0.0)], &[StatValue::Scalar(2.0)], 1.0).unwrap();
    assert!((s - (2.0 - 2.0 * (-2f64).exp())).abs() < 1e-12);
    assert_eq!(total_variation(&[1.0], &[0.0, 1.0]), 1.0);
}

fn bipartite_set(seeds: std::ops::Range<u64>) -> Vec<NetworkTimeSeries> {
    seeds
        .map(|seed| {
            gen_bipartite(BipartiteParams {
                per_side: 6,
                p: 0.4,
                p_con: 0.2,
                steps: 4,
                seed,
            })
            .unwrap()
        })
        .collect()
}

#[test]
fn identical_sets_score_zero() {
    let test = bipartite_set(0..4);
    for id in StatisticId::ALL {
        assert_eq!(mmd_bar(&test, &test, id).unwrap(), 0.0);
    }
    let report = build_report(&test, &test, &StatisticId::ALL, Some(3)).unwrap();
    assert!(report.per_stat.values().all(|s| s.mmd_bar == 0.0));
    let sb = &report.per_stat[&StatisticId::SpectralBipartivity];
    assert!(sb.test_curve.mean.iter().all(|&m| (m - 1.0).abs() < 1e-10));
}

#[test]
fn mmd_bar_sums_timesteps_and_grows() {
    let test = bipartite_set(0..4);
    let other = bipartite_set(10..14);
    let per = mmd_per_timestep(&test, &other, StatisticId::Degree, DEFAULT_SIGMA).unwrap();
    assert_eq!(per.len(), 5);
    let total = mmd_bar(&test, &other, StatisticId::Degree).unwrap();
    assert!((total - per.iter().sum::<f64>()).abs() < 1e-15);
    let short: Vec<NetworkTimeSeries> = other
        .iter()
        .map(|s| NetworkTimeSeries::new(s.id.clone(), s.n, s.graphs[..4].to_vec()))
        .collect();
    let shorter = mmd_bar(&test, &short, StatisticId::Degree).unwrap();
    if per[4] > 0.0 {
        assert!(total > shorter);
    }
}

#[test]
fn report_round_trips_and_plots() {
    let test = bipartite_set(0..3);
    let other = bipartite_set(5..8);
    let stats = StatisticId::parse_list("degree,transitivity").unwrap();
    let report = build_report(&test, &other, &stats, None).unwrap();
    assert_eq!(report.per_stat.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    report.save(&path).unwrap();
    assert_eq!(EvalReport::load(&path).unwrap(), report);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(json["per_stat"]["degree"]["mmd_t"].is_array());
    assert!(json["per_stat"]["transitivity"]["test_curve"]["std"].is_array());
    let plots = write_plots(&report, dir.path().join("plots")).unwrap();
    let names: Vec<String> = plots
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["degree.svg", "transitivity.svg", "degree_distribution.svg"]);
    assert!(std::fs::read_to_string(&plots[0]).unwrap().starts_with("<svg"));
}

#[test]
fn statistic_lists() {
    assert_eq!(StatisticId::parse_list("all").unwrap().len(), 7);
    assert_eq!(
        StatisticId::parse_list("sb,degree,sb").unwrap(),
        vec![StatisticId::SpectralBipartivity, StatisticId::Degree]
    );
    assert!(StatisticId::parse_list("nope").is_err());
    assert!(StatisticId::parse_list("").is_err());
}

#[test]
fn community_density_counts_internal_pairs() {
    let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    let labels = [0, 0, 0, 1, 1];
    assert!((community_density(&g, &labels, 0) - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(community_density(&g, &labels, 1), 1.0);
}
