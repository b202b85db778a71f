//! Binary checkpoint format, all integers and floats little-endian:
//!
//! ```text
//! magic        8 bytes   "EXPRNNCK"
//! version      u32       1
//! hidden p     u64
//! input d      u64
//! classes c    u64
//! activation   u8        0 modrelu, 1 identity
//! readout      u8        0 every step, 1 final step
//! skew         f64 × p(p−1)/2
//! input map    f64 × p·d      (row-major)
//! bias         f64 × p
//! readout      f64 × c·p      (row-major)
//! readout bias f64 × c
//! ```
//!
//! The kernel cache is not stored; a loaded model is stale until refreshed.

use std::fs;
use std::path::Path;

use super::model::{Activation, Readout, RnnModel};
use crate::error::{Error, Result};
use crate::liegroup::{skew_len, SkewParam};
use crate::matcore::Matrix;

pub const MAGIC: &[u8; 8] = b"EXPRNNCK";
pub const VERSION: u32 = 1;

pub fn encode(model: &RnnModel) -> Vec<u8> {
    let (p, d, c) = (model.hidden(), model.input_dim(), model.classes());
    let mut out = Vec::with_capacity(38 + 8 * (skew_len(p) + p * d + p + c * p + c));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [p, d, c] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out.push(match model.activation {
        Activation::ModRelu => 0,
        Activation::Identity => 1,
    });
    out.push(match model.readout_mode {
        Readout::EveryStep => 0,
        Readout::FinalStep => 1,
    });
    for slice in [
        model.kernel.param().values(),
        model.input_map.as_slice(),
        &model.bias,
        model.readout.as_slice(),
        &model.readout_bias,
    ] {
        for x in slice {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                Error::Checkpoint(format!(
                    "truncated: need {n} bytes at offset {}, file has {}",
                    self.pos,
                    self.buf.len()
                ))
            })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn size(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"));
        usize::try_from(v)
            .ok()
            .filter(|&v| v <= 1 << 20)
            .ok_or_else(|| Error::Checkpoint(format!("implausible dimension {v}")))
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::Checkpoint("size overflow".into()))?,
        )?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn decode(buf: &[u8]) -> Result<RnnModel> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8).map_err(|_| bad_magic(buf))? != MAGIC {
        return Err(bad_magic(buf));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let (p, d, c) = (r.size()?, r.size()?, r.size()?);
    if p == 0 || d == 0 || c == 0 {
        return Err(Error::Checkpoint(format!(
            "zero dimension in ({p}, {d}, {c})"
        )));
    }
    let activation = match r.u8()? {
        0 => Activation::ModRelu,
        1 => Activation::Identity,
        other => return Err(Error::Checkpoint(format!("unknown activation tag {other}"))),
    };
    let readout_mode = match r.u8()? {
        0 => Readout::EveryStep,
        1 => Readout::FinalStep,
        other => return Err(Error::Checkpoint(format!("unknown readout tag {other}"))),
    };
    let param = SkewParam::new(p, r.floats(skew_len(p))?)?;
    let input_map = Matrix::from_vec(p, d, r.floats(p * d)?)?;
    let bias = r.floats(p)?;
    let readout = Matrix::from_vec(c, p, r.floats(c * p)?)?;
    let readout_bias = r.floats(c)?;
    if r.pos != buf.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes",
            buf.len() - r.pos
        )));
    }
    RnnModel::from_parts(
        param,
        input_map,
        bias,
        readout,
        readout_bias,
        activation,
        readout_mode,
    )
}

fn bad_magic(buf: &[u8]) -> Error {
    Error::Checkpoint(format!(
        "not a checkpoint (magic {:?})",
        String::from_utf8_lossy(&buf[..buf.len().min(8)])
    ))
}

pub fn save(model: &RnnModel, path: &Path) -> Result<()> {
    fs::write(path, encode(model))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<RnnModel> {
    decode(&fs::read(path)?)
}
