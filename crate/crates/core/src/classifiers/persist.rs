use std::path::Path;

use super::TrainedModel;
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 8] = b"NFSCANMD";
pub const MODEL_VERSION: u32 = 1;

/// Magic, little-endian version, then the bincode-encoded model.
pub fn model_to_bytes(model: &TrainedModel) -> Vec<u8> {
    let mut out = MODEL_MAGIC.to_vec();
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend(bincode::serialize(model).expect("models are always serializable"));
    out
}

pub fn model_from_bytes(bytes: &[u8], path: &Path) -> Result<TrainedModel> {
    if bytes.len() < 12 || &bytes[..8] != MODEL_MAGIC {
        return Err(Error::format(path, "bad magic bytes (not an nfscan model)"));
    }
    let version = u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]);
    if version != MODEL_VERSION {
        return Err(Error::format(path, format!("unsupported model version {version}")));
    }
    bincode::deserialize(&bytes[12..]).map_err(|e| Error::format(path, e.to_string()))
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    model_from_bytes(&std::fs::read(path)?, path)
}
