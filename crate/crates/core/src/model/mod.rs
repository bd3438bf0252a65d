//! Transition models, their training loop and checkpoint files.

mod age;
mod checkpoint;
mod config;
mod damnets;
mod train;


pub use age::{mod2_apply, AgeD};
pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, AnyModel,
    CheckpointMeta, FORMAT_VERSION, MAGIC,
};
pub use config::ModelConfig;
pub use damnets::Damnets;
pub use train::{split_transitions, train, EpochLog, TrainReport};

use serde::{Deserialize, Serialize};

use crate::autodiff::{ParamStore, Tape, Var};
use crate::error::{Error, Result};
use crate::graph::{apply_delta, DeltaMatrix, Graph, NetworkTimeSeries};
use crate::rng::Rng64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "damnets")]
    Damnets,
    #[serde(rename = "age-d")]
    AgeD,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Damnets => "damnets",
            ModelKind::AgeD => "age-d",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "damnets" => Ok(ModelKind::Damnets),
            "age-d" => Ok(ModelKind::AgeD),
            _ => Err(Error::param(format!("unknown model kind `{s}`"))),
        }
    }
}

/// Negative log-likelihood of one observed transition, recorded on a tape.
pub struct TransitionScore {
    pub nll: Var,
    /// Number of Bernoulli terms in `nll`.
    pub decisions: usize,
    pub row_nll: Vec<f64>,
}

/// A Markov model of `G_t` given `G_{t-1}` on a fixed node set.
pub trait TransitionModel {
    fn kind(&self) -> ModelKind;
    fn n(&self) -> usize;
    fn config(&self) -> &ModelConfig;
    fn store(&self) -> &ParamStore;
    fn store_mut(&mut self) -> &mut ParamStore;

    fn score_transition(
        &self,
        t: &mut Tape<'_>,
        prev: &Graph,
        delta: &DeltaMatrix,
    ) -> Result<TransitionScore>;

    fn sample_delta(&self, prev: &Graph, rng: &mut Rng64) -> Result<DeltaMatrix>;

    fn transition_nll(&self, prev: &Graph, delta: &DeltaMatrix) -> Result<f64> {
        let mut t = Tape::new(self.store());
        let s = self.score_transition(&mut t, prev, delta)?;
        Ok(t.value(s.nll).item())
    }

    fn sample_transition(&self, prev: &Graph, rng: &mut Rng64) -> Result<Graph> {
        if prev.n() != self.n() {
            return Err(Error::NodeCountMismatch {
                expected: self.n(),
                found: prev.n(),
            });
        }
        let delta = self.sample_delta(prev, rng)?;
        apply_delta(prev, &delta)
    }

    /// `steps` chained transitions starting at `g0`.
    fn sample_series(
        &self,
        id: &str,
        g0: &Graph,
        steps: usize,
        rng: &mut Rng64,
    ) -> Result<NetworkTimeSeries> {
        let mut graphs = Vec::with_capacity(steps + 1);
        graphs.push(g0.clone());
        for _ in 0..steps {
            let next = self.sample_transition(graphs.last().unwrap(), rng)?;
            graphs.push(next);
        }
        Ok(NetworkTimeSeries::new(id, g0.n(), graphs))
    }
}

/// Dense boolean adjacency.
pub(crate) fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; g.n()]; g.n()];
    for (i, j) in g.edges() {
        a[i][j] = true;
        a[j][i] = true;
    }
    a
}
