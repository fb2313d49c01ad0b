//! Model checkpoints.
//!
//! ```text
//! b"CKPT" | u32 version = 1 | u32 n_tensors
//! n_tensors × ( u16 name_len | name | u8 is_bias | u32 ndim | ndim × u32 | f32 payload )
//! u32 n_tokens | n_tokens × ( u16 len | token )
//! ```
//!
//! Values are stored as f32, so a loaded model is the saved one rounded to
//! single precision.

use std::fs;
use std::path::Path;

use ndarray::{ArrayD, IxDyn};

use super::model::{ToyModel, ToyParams, PARAM_NAMES};
use crate::binio::{put_f32s, put_string, put_u32, Reader};
use crate::decode::Vocabulary;
use crate::trainkit::ParamGroup;
use crate::{Error, Result};

pub const CKPT_MAGIC: &[u8; 4] = b"CKPT";
pub const CKPT_VERSION: u32 = 1;

pub fn checkpoint_to_bytes(model: &ToyModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CKPT_MAGIC);
    put_u32(&mut out, CKPT_VERSION);
    let groups = model.params.to_groups();
    put_u32(&mut out, groups.len() as u32);
    for g in &groups {
        put_string(&mut out, &g.name);
        out.push(u8::from(g.is_bias));
        put_u32(&mut out, g.values.ndim() as u32);
        for &d in g.values.shape() {
            put_u32(&mut out, d as u32);
        }
        put_f32s(&mut out, g.values.iter().map(|&v| v as f32));
    }
    let tokens = model.vocab.tokens();
    put_u32(&mut out, tokens.len() as u32);
    for t in tokens {
        put_string(&mut out, t);
    }
    out
}

pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<ToyModel> {
    let mut r = Reader::new(bytes, "checkpoint");
    r.magic(CKPT_MAGIC)?;
    r.version(CKPT_VERSION)?;
    let n = r.u32()? as usize;
    let mut groups = Vec::with_capacity(n);
    for _ in 0..n {
        let name = r.string()?;
        let is_bias = r.u8()? != 0;
        let ndim = r.u32()? as usize;
        if ndim > 8 {
            return Err(r.error(format!("tensor {name} has {ndim} dimensions")));
        }
        let shape = (0..ndim)
            .map(|_| r.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let len = shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        let len = len.ok_or_else(|| r.error("tensor size overflow"))?;
        let values: Vec<f64> = r.f32s(len)?.into_iter().map(f64::from).collect();
        groups.push(ParamGroup::new(
            name,
            ArrayD::from_shape_vec(IxDyn(&shape), values).expect("length checked"),
            is_bias,
        ));
    }
    let n_tokens = r.u32()? as usize;
    let tokens = (0..n_tokens)
        .map(|_| r.string())
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;

    let shape_of = |name: &str| -> Result<Vec<usize>> {
        groups
            .iter()
            .find(|g| g.name == name)
            .map(|g| g.values.shape().to_vec())
            .ok_or_else(|| Error::Format {
                format: "checkpoint",
                msg: format!("missing tensor {name}"),
            })
    };
    for name in PARAM_NAMES {
        shape_of(name)?;
    }
    let w_a = shape_of("w_a")?;
    let b_o = shape_of("b_o")?;
    if w_a.len() != 2 || b_o.len() != 1 {
        return Err(Error::Format {
            format: "checkpoint",
            msg: "unexpected tensor ranks".into(),
        });
    }
    let mut params = ToyParams::zeros(w_a[0], w_a[1], b_o[0]);
    params.copy_from_groups(&groups)?;
    ToyModel::new(params, Vocabulary::from_tokens(tokens)?)
}

pub fn save_checkpoint(path: impl AsRef<Path>, model: &ToyModel) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, checkpoint_to_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ToyModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_bytes(&bytes)
}
