//! Weight checkpoint files: manifest header plus a little-endian f64 array.

use std::io::{Read, Write};
use std::path::Path;

use crate::model::{FlatWeights, WeightManifest};
use crate::{ModelError, Result};

const MAGIC: &[u8; 4] = b"WCK1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub seed: u64,
    pub round: u32,
    pub weights: FlatWeights,
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&ckpt.seed.to_le_bytes());
    out.extend_from_slice(&ckpt.round.to_le_bytes());
    let entries = &ckpt.weights.manifest.entries;
    out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
    for (name, shape) in entries {
        let name_bytes = name.as_bytes();
        out.extend_from_slice(&(name_bytes.len() as u16).to_le_bytes());
        out.extend_from_slice(name_bytes);
        out.push(shape.len() as u8);
        for &d in shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
    }
    out.extend_from_slice(&(ckpt.weights.values.len() as u64).to_le_bytes());
    for v in &ckpt.weights.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut off = 0usize;
    let take = |off: &mut usize, len: usize| -> Result<Vec<u8>> {
        if *off + len > bytes.len() {
            return Err(ModelError::Parse("checkpoint truncated".into()));
        }
        let v = bytes[*off..*off + len].to_vec();
        *off += len;
        Ok(v)
    };
    if take(&mut off, 4)? != MAGIC {
        return Err(ModelError::Parse("bad checkpoint magic".into()));
    }
    let seed = u64::from_le_bytes(take(&mut off, 8)?.try_into().expect("8 bytes"));
    let round = u32::from_le_bytes(take(&mut off, 4)?.try_into().expect("4 bytes"));
    let entry_count = u32::from_le_bytes(take(&mut off, 4)?.try_into().expect("4 bytes")) as usize;
    let mut entries = Vec::with_capacity(entry_count);
    for _ in 0..entry_count {
        let name_len = u16::from_le_bytes(take(&mut off, 2)?.try_into().expect("2 bytes")) as usize;
        let name = String::from_utf8(take(&mut off, name_len)?)
            .map_err(|_| ModelError::Parse("manifest name not utf-8".into()))?;
        let ndims = take(&mut off, 1)?[0] as usize;
        let mut shape = Vec::with_capacity(ndims);
        for _ in 0..ndims {
            shape.push(u32::from_le_bytes(take(&mut off, 4)?.try_into().expect("4 bytes")) as usize);
        }
        entries.push((name, shape));
    }
    let value_count = u64::from_le_bytes(take(&mut off, 8)?.try_into().expect("8 bytes")) as usize;
    let manifest = WeightManifest { entries };
    if manifest.total_len() != value_count {
        return Err(ModelError::Parse(format!(
            "manifest declares {} weights, file has {value_count}",
            manifest.total_len()
        )));
    }
    let mut values = Vec::with_capacity(value_count);
    for _ in 0..value_count {
        values.push(f64::from_le_bytes(take(&mut off, 8)?.try_into().expect("8 bytes")));
    }
    if off != bytes.len() {
        return Err(ModelError::Parse("trailing checkpoint bytes".into()));
    }
    Ok(Checkpoint {
        seed,
        round,
        weights: FlatWeights { values, manifest },
    })
}
