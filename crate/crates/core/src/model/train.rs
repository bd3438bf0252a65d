use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::autodiff::{clip_global_norm, differentiate, AdamState, Tape, Tensor};
use crate::error::{Error, Result};
use crate::graph::{compute_delta, DeltaMatrix, Graph, NetworkTimeSeries};
use crate::rng::{child_seeds, rng_from_seed};

use super::TransitionModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean negative log-likelihood per transition.
    pub train_nll: f64,
    pub val_nll: f64,
    /// Mean negative log-likelihood per Bernoulli decision.
    pub train_nll_per_decision: f64,
    pub val_nll_per_decision: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub history: Vec<EpochLog>,
    pub best_epoch: usize,
    pub best_val_nll: f64,
    pub num_train: usize,
    pub val_indices: Vec<usize>,
}

/// Seeded split of `count` transitions into `(train, validation)` index lists.
pub fn split_transitions(count: usize, val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..count).collect();
    idx.shuffle(&mut rng_from_seed(seed));
    let mut n_val = (val_fraction * count as f64).round() as usize;
    if count >= 2 {
        n_val = n_val.clamp(1, count - 1);
    } else {
        n_val = 0;
    }
    let mut val = idx.split_off(count - n_val);
    idx.sort_unstable();
    val.sort_unstable();
    (idx, val)
}

fn collect_transitions(series: &[NetworkTimeSeries], n: usize) -> Result<Vec<(Graph, DeltaMatrix)>> {
    let mut out = Vec::new();
    for s in series {
        if s.n != n {
            return Err(Error::NodeCountMismatch {
                expected: n,
                found: s.n,
            });
        }
        for (prev, next) in s.transitions() {
            out.push((prev.clone(), compute_delta(prev, next)?));
        }
    }
    if out.is_empty() {
        return Err(Error::Empty("training data has no transitions".into()));
    }
    Ok(out)
}

fn evaluate<M: TransitionModel + ?Sized>(model: &M, data: &[(Graph, DeltaMatrix)], idx: &[usize]) -> Result<(f64, usize)> {
    let mut total = 0.0;
    let mut decisions = 0;
    for &i in idx {
        let (prev, delta) = &data[i];
        let mut t = Tape::new(model.store());
        let s = model.score_transition(&mut t, prev, delta)?;
        total += t.value(s.nll).item();
        decisions += s.decisions;
    }
    Ok((total, decisions))
}

fn ratio(a: f64, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a / b as f64
    }
}

/// Maximum-likelihood training with Adam, global-norm clipping and early stopping on the
/// validation NLL. On return the model holds the parameters of the best validation epoch.
pub fn train<M: TransitionModel + ?Sized>(
    model: &mut M,
    series: &[NetworkTimeSeries],
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainReport> {
    let cfg = model.config().clone();
    cfg.validate()?;
    let data = collect_transitions(series, model.n())?;
    let seeds = child_seeds(cfg.seed, 2);
    let (train_idx, val_idx) = split_transitions(data.len(), cfg.val_fraction, seeds[0]);
    let mut shuffle_rng = rng_from_seed(seeds[1]);
    let mut adam = AdamState::new(cfg.adam(), model.store());

    let mut history = Vec::new();
    let mut best: Option<(f64, usize, Vec<Tensor>)> = None;
    let mut since_best = 0;
    let mut order = train_idx.clone();
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_nll = 0.0;
        let mut epoch_decisions = 0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let mut acc: Option<Vec<Tensor>> = None;
            for &i in batch {
                let (prev, delta) = &data[i];
                let mut t = Tape::new(model.store());
                let s = model.score_transition(&mut t, prev, delta)?;
                let loss = t.value(s.nll).item();
                if !loss.is_finite() {
                    return Err(Error::Diverged(format!(
                        "non-finite loss {loss} at epoch {epoch}, batch {b}, transition {i}"
                    )));
                }
                epoch_nll += loss;
                epoch_decisions += s.decisions;
                let g = differentiate(&t, s.nll)?;
                match acc.as_mut() {
                    None => acc = Some(g),
                    Some(a) => a.iter_mut().zip(&g).for_each(|(a, g)| a.add_assign(g)),
                }
            }
            let mut grads = acc.expect("batches are never empty");
            let scale = 1.0 / batch.len() as f64;
            grads.iter_mut().for_each(|g| g.scale_assign(scale));
            clip_global_norm(&mut grads, cfg.clip_norm);
            adam.step(model.store_mut(), &grads).map_err(|e| {
                Error::Diverged(format!("epoch {epoch}, batch {b}: {e}"))
            })?;
        }

        let (val_total, val_decisions) = if val_idx.is_empty() {
            evaluate(model, &data, &train_idx)?
        } else {
            evaluate(model, &data, &val_idx)?
        };
        let n_val = if val_idx.is_empty() { train_idx.len() } else { val_idx.len() };
        let log = EpochLog {
            epoch,
            train_nll: epoch_nll / train_idx.len() as f64,
            val_nll: val_total / n_val as f64,
            train_nll_per_decision: ratio(epoch_nll, epoch_decisions),
            val_nll_per_decision: ratio(val_total, val_decisions),
        };
        log::info!(
            "epoch {epoch}: train {:.4} val {:.4} (per decision {:.5} / {:.5})",
            log.train_nll,
            log.val_nll,
            log.train_nll_per_decision,
            log.val_nll_per_decision
        );
        on_epoch(&log);
        let improved = best.as_ref().map_or(true, |(v, _, _)| log.val_nll < *v);
        history.push(log);
        if improved {
            let val = history.last().unwrap().val_nll;
            best = Some((val, epoch, model.store().values().to_vec()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                log::info!("no improvement for {since_best} epochs, stopping");
                break;
            }
        }
    }

    let (best_val_nll, best_epoch, values) = best.expect("at least one epoch runs");
    model.store_mut().values_mut().clone_from_slice(&values);
    Ok(TrainReport {
        history,
        best_epoch,
        best_val_nll,
        num_train: train_idx.len(),
        val_indices: val_idx,
    })
}
