use serde::{Deserialize, Serialize};

use super::stats::{curve_value, statistic, StatValue, StatisticId};
use crate::error::{Error, Result};
use crate::graph::NetworkTimeSeries;

pub const DEFAULT_SIGMA: f64 = 1.0;

/// Total variation `0.5 * sum |p - q|`, padding the shorter histogram with zeros.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    let at = |h: &[f64], i: usize| h.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (at(p, i) - at(q, i)).abs()).sum::<f64>()
}

fn distance(a: &StatValue, b: &StatValue) -> Result<f64> {
    match (a, b) {
        (StatValue::Hist(p), StatValue::Hist(q)) => Ok(total_variation(p, q)),
        (StatValue::Scalar(x), StatValue::Scalar(y)) => Ok((x - y).abs()),
        _ => Err(Error::param("cannot compare a histogram with a scalar")),
    }
}

fn mean_kernel(x: &[StatValue], y: &[StatValue], sigma: f64) -> Result<f64> {
    let mut total = 0.0;
    for a in x {
        for b in y {
            let d = distance(a, b)?;
            total += (-d * d / (2.0 * sigma * sigma)).exp();
        }
    }
    Ok(total / (x.len() * y.len()) as f64)
}

/// Biased squared MMD with the Gaussian kernel `exp(-d^2 / 2 sigma^2)`, clipped at zero.
pub fn mmd2(x: &[StatValue], y: &[StatValue], sigma: f64) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty("MMD sample set".into()));
    }
    let kxx = mean_kernel(x, x, sigma)?;
    let kyy = mean_kernel(y, y, sigma)?;
    let kxy = mean_kernel(x, y, sigma)?;
    Ok((kxx + kyy - 2.0 * kxy).max(0.0))
}

/// Number of snapshots shared by every series of both sets.
pub fn common_length(test: &[NetworkTimeSeries], samples: &[NetworkTimeSeries]) -> Result<usize> {
    if test.is_empty() || samples.is_empty() {
        return Err(Error::Empty("series set".into()));
    }
    let lens = test.iter().chain(samples).map(|s| s.graphs.len());
    let (lo, hi) = lens.fold((usize::MAX, 0), |(lo, hi), l| (lo.min(l), hi.max(l)));
    if lo == 0 {
        return Err(Error::Empty("series without snapshots".into()));
    }
    if lo != hi {
        log::warn!("series lengths differ ({lo}..{hi}); truncating to {lo} snapshots");
    }
    Ok(lo)
}

/// MMD² of the statistic's populations at each shared timestep.
pub fn mmd_per_timestep(
    test: &[NetworkTimeSeries],
    samples: &[NetworkTimeSeries],
    id: StatisticId,
    sigma: f64,
) -> Result<Vec<f64>> {
    let len = common_length(test, samples)?;
    (0..len)
        .map(|t| {
            let x: Vec<StatValue> = test.iter().map(|s| statistic(&s.graphs[t], id)).collect();
            let y: Vec<StatValue> = samples.iter().map(|s| statistic(&s.graphs[t], id)).collect();
            mmd2(&x, &y, sigma)
        })
        .collect()
}

/// Sum over time of the per-timestep MMD².
pub fn mmd_bar(
    test: &[NetworkTimeSeries],
    samples: &[NetworkTimeSeries],
    id: StatisticId,
) -> Result<f64> {
    Ok(mmd_per_timestep(test, samples, id, DEFAULT_SIGMA)?.iter().sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Mean and population standard deviation over series of a per-graph value at each
/// timestep.
pub fn curve(series: &[NetworkTimeSeries], len: usize, value: impl Fn(&crate::graph::Graph) -> f64) -> Curve {
    let mut mean = Vec::with_capacity(len);
    let mut std = Vec::with_capacity(len);
    for t in 0..len {
        let v: Vec<f64> = series.iter().map(|s| value(&s.graphs[t])).collect();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64;
        mean.push(m);
        std.push(var.sqrt());
    }
    Curve { mean, std }
}

pub fn stat_curve(series: &[NetworkTimeSeries], len: usize, id: StatisticId) -> Curve {
    curve(series, len, |g| curve_value(g, id))
}
