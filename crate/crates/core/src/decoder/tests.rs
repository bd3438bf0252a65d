use super::*;
use crate::autodiff::grad_check;
use crate::rng::rng_from_seed;
use rand::Rng;

const F: usize = 8;

fn random_decoder(seed: u64) -> (ParamStore, Decoder) {
    let mut rng = rng_from_seed(seed);
    let mut store = ParamStore::new();
    let dec = Decoder::new(&mut store, "dec", F, &mut rng);
    for v in store.values_mut() {
        for x in v.data_mut() {
            *x += rng.gen_range(-0.3..0.3);
        }
    }
    (store, dec)
}

fn random_context(seed: u64) -> Tensor {
    let mut rng = rng_from_seed(seed);
    Tensor::from_vec(1, F, (0..F).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn random_prev(width: usize, seed: u64) -> Vec<bool> {
    let mut rng = rng_from_seed(seed);
    (0..width).map(|_| rng.gen_bool(0.5)).collect()
}

fn support_of(mask: u32, width: usize) -> Vec<usize> {
    (0..width).filter(|&v| mask >> v & 1 == 1).collect()
}

fn log_prob(store: &ParamStore, dec: &Decoder, ctx: &Tensor, row: &RowInput) -> f64 {
    let mut t = Tape::new(store);
    let c = t.constant(ctx.clone());
    let (lp, _) = dec.row_log_likelihood(&mut t, c, row).unwrap();
    t.value(lp).item()
}

#[test]
fn row_probabilities_sum_to_one() {
    let (store, dec) = random_decoder(1);
    for w in 1..=8usize {
        let ctx = random_context(w as u64);
        let prev = random_prev(w, 100 + w as u64);
        let total: f64 = (0..1u32 << w)
            .map(|m| {
                let row = RowInput::new(&support_of(m, w), prev.clone()).unwrap();
                log_prob(&store, &dec, &ctx, &row).exp()
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-8, "w={w}: {total}");
    }
}

#[test]
fn even_odds_give_quarter_for_empty_row() {
    let (mut store, dec) = random_decoder(2);
    for v in store.values_mut() {
        v.data_mut().fill(0.0);
    }
    let ctx = random_context(3);
    for w in 2..=7 {
        let row = RowInput::new(&[], vec![false; w]).unwrap();
        let p = log_prob(&store, &dec, &ctx, &row).exp();
        assert!((p - 0.25).abs() < 1e-12);
    }
}

#[test]
fn empty_first_row() {
    let (store, dec) = random_decoder(4);
    let mut t = Tape::new(&store);
    let c = t.constant(random_context(5));
    let row = RowInput::new(&[], vec![]).unwrap();
    let (lp, g) = dec.row_log_likelihood(&mut t, c, &row).unwrap();
    assert_eq!(t.value(lp).item(), 0.0);
    assert_eq!(*t.value(g), Tensor::zeros(1, F));
    let s = dec.sample_row(&mut t, c, &[], &mut rng_from_seed(0)).unwrap();
    assert!(s.support.is_empty());
    assert_eq!(s.decisions, 0);
}

#[test]
fn sampled_log_prob_matches_score() {
    let (store, dec) = random_decoder(6);
    let mut rng = rng_from_seed(7);
    for trial in 0..200u64 {
        let w = 1 + (trial as usize % 13);
        let ctx = random_context(trial);
        let prev = random_prev(w, trial + 500);
        let mut t = Tape::new(&store);
        let c = t.constant(ctx.clone());
        let s = dec.sample_row(&mut t, c, &prev, &mut rng).unwrap();
        assert!(s.support.iter().all(|&v| v < w));
        let row = RowInput::new(&s.support, prev.clone()).unwrap();
        let scored = log_prob(&store, &dec, &ctx, &row);
        assert!((scored - s.log_prob).abs() < 1e-10);
        if s.support.is_empty() && w >= 2 {
            assert_eq!(s.decisions, 2);
        }
        // the sampler's g is the scorer's g
        let mut t2 = Tape::new(&store);
        let c2 = t2.constant(ctx);
        let (_, g) = dec.row_log_likelihood(&mut t2, c2, &row).unwrap();
        assert_eq!(t.value(s.g), t2.value(g));
    }
}

#[test]
fn sampler_frequencies_match_probabilities() {
    let (store, dec) = random_decoder(8);
    let w = 4;
    let ctx = random_context(9);
    let prev = random_prev(w, 10);
    let exact: Vec<f64> = (0..1u32 << w)
        .map(|m| {
            let row = RowInput::new(&support_of(m, w), prev.clone()).unwrap();
            log_prob(&store, &dec, &ctx, &row).exp()
        })
        .collect();
    let draws = 20_000;
    let mut counts = vec![0usize; 1 << w];
    let mut rng = rng_from_seed(11);
    for _ in 0..draws {
        let mut t = Tape::new(&store);
        let c = t.constant(ctx.clone());
        let s = dec.sample_row(&mut t, c, &prev, &mut rng).unwrap();
        counts[s.support.iter().map(|&v| 1usize << v).sum::<usize>()] += 1;
    }
    let tv: f64 = 0.5
        * exact
            .iter()
            .zip(&counts)
            .map(|(p, &c)| (p - c as f64 / draws as f64).abs())
            .sum::<f64>();
    assert!(tv < 0.03, "{tv}");
}

#[test]
fn batched_scores_equal_single_rows() {
    let (store, dec) = random_decoder(12);
    let mut rng = rng_from_seed(13);
    let rows: Vec<RowInput> = (0..9)
        .map(|u| {
            let prev = random_prev(u, 40 + u as u64);
            let support: Vec<usize> = (0..u).filter(|_| rng.gen_bool(0.3)).collect();
            RowInput::new(&support, prev).unwrap()
        })
        .collect();
    let ctxs: Vec<Tensor> = (0..rows.len() as u64).map(|s| random_context(60 + s)).collect();
    let mut t = Tape::new(&store);
    let stacked: Vec<f64> = ctxs.iter().flat_map(|c| c.data().to_vec()).collect();
    let c = t.constant(Tensor::from_vec(rows.len(), F, stacked));
    let bottom = dec.bottom_up(&mut t, &rows).unwrap();
    let scores = dec.score(&mut t, &rows, &bottom, c).unwrap();
    let mut sum = 0.0;
    for (u, row) in rows.iter().enumerate() {
        let single = -log_prob(&store, &dec, &ctxs[u], row);
        assert!((single - scores.row_nll[u]).abs() < 1e-10);
        sum += single;
    }
    assert!((t.value(scores.nll).item() - sum).abs() < 1e-10);
}

#[test]
fn row_embedding_sees_every_entry() {
    let (store, dec) = random_decoder(14);
    let w = 7;
    let base = vec![1usize, 4];
    let g_of = |support: &[usize]| {
        let mut t = Tape::new(&store);
        let row = RowInput::new(support, vec![false; w]).unwrap();
        let b = dec.bottom_up(&mut t, std::slice::from_ref(&row)).unwrap();
        t.value(b.g).clone()
    };
    let g0 = g_of(&base);
    for v in 0..w {
        let mut s: Vec<usize> = base.iter().copied().filter(|&x| x != v).collect();
        if !base.contains(&v) {
            s.push(v);
            s.sort();
        }
        assert_ne!(g_of(&s), g0, "flipping column {v}");
    }
}

#[test]
fn inconsistent_signs_are_rejected() {
    let prev = vec![true, false, false];
    assert!(RowInput::from_signed(3, &[(0, Sign::Add)], prev.clone()).is_err());
    assert!(RowInput::from_signed(3, &[(1, Sign::Remove)], prev.clone()).is_err());
    assert!(RowInput::from_signed(3, &[(0, Sign::Remove), (2, Sign::Add)], prev).is_ok());
}

#[test]
fn row_likelihood_gradients() {
    let mut rng = rng_from_seed(15);
    let mut store = ParamStore::new();
    let dec = Decoder::new(&mut store, "dec", 4, &mut rng);
    let ctx = store.add("ctx", Tensor::from_vec(2, 4, vec![0.3, -0.2, 0.5, 0.1, -0.4, 0.2, 0.0, 0.6]));
    let rows = vec![
        RowInput::new(&[0, 3, 4], vec![false, true, false, true, false]).unwrap(),
        RowInput::new(&[1], vec![true, true, false]).unwrap(),
    ];
    let err = grad_check(&mut store, 1e-5, |t| {
        let c = t.param(ctx);
        let bottom = dec.bottom_up(t, &rows).unwrap();
        let s = dec.score(t, &rows, &bottom, c).unwrap();
        let g = t.sum(bottom.g);
        t.add(s.nll, g)
    })
    .unwrap();
    assert!(err < 1e-4, "{err}");
}
