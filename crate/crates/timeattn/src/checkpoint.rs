//! Little-endian checkpoint: `"UNFI"`, format version, the model config
//! (nine `u32` dimensions and a flag byte), then every tensor in declaration
//! order as a `u32` element count followed by `f32` values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::config::ModelConfig;
use crate::error::{ModelError, Result};
use crate::params::{ModelParams, TENSOR_NAMES};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"UNFI";
const VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(mut w: W, params: &ModelParams) -> Result<()> {
    let c = &params.cfg;
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let dims = [c.d_r, c.d_h, c.d_k, c.d_v, c.q_refs, c.n_heads, c.gru_hidden, c.n_classes, c.grid_size];
    for d in dims {
        let d = u32::try_from(d).map_err(|_| ModelError::Checkpoint(format!("dimension {d} too large")))?;
        w.write_all(&d.to_le_bytes())?;
    }
    let flags = u8::from(c.use_mask_features) | (u8::from(c.content_aware_keys) << 1);
    w.write_all(&[flags])?;
    for t in params.tensors() {
        w.write_all(&(t.len() as u32).to_le_bytes())?;
        for &x in t.iter() {
            w.write_all(&(x as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_checkpoint(path: &Path, params: &ModelParams) -> Result<()> {
    write_checkpoint(BufWriter::new(File::create(path)?), params)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<ModelParams> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(ModelError::Checkpoint("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(ModelError::Checkpoint(format!("unsupported version {version}")));
    }
    let mut d = [0usize; 9];
    for x in &mut d {
        *x = read_u32(&mut r)? as usize;
    }
    let mut flags = [0u8; 1];
    r.read_exact(&mut flags)?;
    let cfg = ModelConfig {
        d_r: d[0],
        d_h: d[1],
        d_k: d[2],
        d_v: d[3],
        q_refs: d[4],
        n_heads: d[5],
        gru_hidden: d[6],
        n_classes: d[7],
        grid_size: d[8],
        use_mask_features: flags[0] & 1 != 0,
        content_aware_keys: flags[0] & 2 != 0,
    };
    let mut params = ModelParams::zeros(&cfg)?;
    for (name, mut t) in TENSOR_NAMES.iter().zip(params.tensors_mut()) {
        let n = read_u32(&mut r)? as usize;
        if n != t.len() {
            return Err(ModelError::Checkpoint(format!("{name}: {n} values, expected {}", t.len())));
        }
        let mut b = [0u8; 4];
        for x in t.iter_mut() {
            r.read_exact(&mut b)?;
            *x = f32::from_le_bytes(b) as f64;
        }
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(ModelError::Checkpoint("trailing bytes".into()));
    }
    Ok(params)
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
    read_checkpoint(BufReader::new(File::open(path)?))
}
