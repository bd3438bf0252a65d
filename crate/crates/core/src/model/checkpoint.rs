use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

use super::{AgeD, Damnets, ModelConfig, ModelKind, TransitionModel};

pub const MAGIC: &[u8; 4] = b"DMNT";
pub const FORMAT_VERSION: u8 = 1;

/// Training provenance stored next to the parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub best_val_nll: Option<f64>,
    pub best_epoch: Option<usize>,
    pub epochs_run: usize,
    pub val_indices: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    name: String,
    shape: [usize; 2],
    /// Offset in f32 elements from the start of the parameter data.
    offset: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    model_kind: ModelKind,
    config: ModelConfig,
    n: usize,
    params: Vec<ManifestEntry>,
    meta: CheckpointMeta,
}

/// Either trained model, as read back from a checkpoint.
#[derive(Clone, Debug)]
pub enum AnyModel {
    Damnets(Damnets),
    AgeD(AgeD),
}

impl AnyModel {
    pub fn new(kind: ModelKind, n: usize, config: &ModelConfig) -> Result<Self> {
        Ok(match kind {
            ModelKind::Damnets => AnyModel::Damnets(Damnets::new(n, config)?),
            ModelKind::AgeD => AnyModel::AgeD(AgeD::new(n, config)?),
        })
    }

    pub fn model(&self) -> &dyn TransitionModel {
        match self {
            AnyModel::Damnets(m) => m,
            AnyModel::AgeD(m) => m,
        }
    }

    pub fn model_mut(&mut self) -> &mut dyn TransitionModel {
        match self {
            AnyModel::Damnets(m) => m,
            AnyModel::AgeD(m) => m,
        }
    }
}

pub fn encode_checkpoint(model: &dyn TransitionModel, meta: &CheckpointMeta) -> Result<Vec<u8>> {
    let store = model.store();
    let mut params = Vec::with_capacity(store.len());
    let mut offset = 0;
    for id in store.ids() {
        let v = store.value(id);
        params.push(ManifestEntry {
            name: store.name(id).to_string(),
            shape: v.shape(),
            offset,
        });
        offset += v.len();
    }
    let header = Header {
        model_kind: model.kind(),
        config: model.config().clone(),
        n: model.n(),
        params,
        meta: meta.clone(),
    };
    let json = serde_json::to_vec(&header)?;
    let header_len = u32::try_from(json.len())
        .map_err(|_| Error::Checkpoint("header exceeds 4 GiB".into()))?;
    let mut out = Vec::with_capacity(9 + json.len() + 4 * offset);
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&json);
    for v in store.values() {
        for &x in v.data() {
            out.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(AnyModel, CheckpointMeta)> {
    let corrupt = |m: &str| Error::Checkpoint(m.to_string());
    if bytes.len() < 9 {
        return Err(corrupt("file too short for the fixed header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(corrupt("bad magic bytes"));
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {} (expected {FORMAT_VERSION})",
            bytes[4]
        )));
    }
    let header_len = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let body = &bytes[9..];
    if body.len() < header_len {
        return Err(corrupt("truncated header"));
    }
    let header: Header = serde_json::from_slice(&body[..header_len])
        .map_err(|e| Error::Checkpoint(format!("unreadable header: {e}")))?;
    let data = &body[header_len..];

    let mut model = AnyModel::new(header.model_kind, header.n, &header.config)?;
    let store = model.model_mut().store_mut();
    if store.len() != header.params.len() {
        return Err(Error::Checkpoint(format!(
            "manifest lists {} parameters, the model has {}",
            header.params.len(),
            store.len()
        )));
    }
    for (i, entry) in header.params.iter().enumerate() {
        let id = store.ids().nth(i).unwrap();
        let [r, c] = store.value(id).shape();
        if store.name(id) != entry.name || [r, c] != entry.shape {
            return Err(Error::Checkpoint(format!(
                "parameter {i} is `{}` {:?} in the file but `{}` {:?} in the model",
                entry.name,
                entry.shape,
                store.name(id),
                [r, c]
            )));
        }
        let start = entry.offset * 4;
        let end = start + r * c * 4;
        let raw = data
            .get(start..end)
            .ok_or_else(|| corrupt("truncated parameter data"))?;
        let values = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect();
        *store.value_mut(id) = Tensor::from_vec(r, c, values);
    }
    Ok((model, header.meta))
}

pub fn save_checkpoint(
    model: &dyn TransitionModel,
    meta: &CheckpointMeta,
    path: impl AsRef<Path>,
) -> Result<()> {
    let bytes = encode_checkpoint(model, meta)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    f.sync_all()?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(AnyModel, CheckpointMeta)> {
    decode_checkpoint(&fs::read(path)?)
}
