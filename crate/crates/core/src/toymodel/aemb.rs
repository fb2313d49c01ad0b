//! The AEMB audio-feature format.
//!
//! ```text
//! b"AEMB" | u32 version = 1 | u32 T | u32 d_a | T × d_a f32, row-major
//! ```

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::binio::{put_f32s, put_u32, Reader};
use crate::{Error, Result};

pub const AEMB_MAGIC: &[u8; 4] = b"AEMB";
pub const AEMB_VERSION: u32 = 1;

pub fn aemb_to_bytes(features: &Array2<f64>) -> Vec<u8> {
    let (t, d) = features.dim();
    let mut out = Vec::with_capacity(16 + 4 * t * d);
    out.extend_from_slice(AEMB_MAGIC);
    put_u32(&mut out, AEMB_VERSION);
    put_u32(&mut out, t as u32);
    put_u32(&mut out, d as u32);
    put_f32s(&mut out, features.iter().map(|&v| v as f32));
    out
}

pub fn aemb_from_bytes(bytes: &[u8]) -> Result<Array2<f64>> {
    let mut r = Reader::new(bytes, "AEMB");
    r.magic(AEMB_MAGIC)?;
    r.version(AEMB_VERSION)?;
    let t = r.u32()? as usize;
    let d = r.u32()? as usize;
    if t == 0 || d == 0 {
        return Err(r.error(format!("empty feature matrix {t}x{d}")));
    }
    let values = r.f32s(t * d)?;
    r.finish()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(r.error("non-finite feature value"));
    }
    Ok(
        Array2::from_shape_vec((t, d), values.into_iter().map(f64::from).collect())
            .expect("length checked"),
    )
}

pub fn write_aemb(path: impl AsRef<Path>, features: &Array2<f64>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, aemb_to_bytes(features)).map_err(|e| Error::io(path, e))
}

pub fn read_aemb(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    aemb_from_bytes(&bytes)
}
