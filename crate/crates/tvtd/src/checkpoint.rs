//! Self-describing checkpoint container.
//!
//! Byte layout (integers little-endian):
//!
//! | field | encoding |
//! |---|---|
//! | magic | 8 bytes `VTTVTDCK` |
//! | version | `u32`, currently 1 |
//! | config | `u32` length + UTF-8 `key=value` lines (see [`TvtdConfig`]) |
//! | metadata | `u32` length + UTF-8 `key=value` lines |
//! | element size | `u8`, 4 (`f32`) or 8 (`f64`) |
//! | blob count | `u32` |
//! | each blob | `u16` name length, name, `u8` rank, rank x `u64` dims, data |
//! | digest | 32-byte SHA-256 of every preceding byte |
//!
//! Blobs appear in the model's parameter order. Serialization is a pure
//! function of the parameters, config and metadata, so saving the same model
//! twice gives identical bytes.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::TvtdConfig;
use crate::error::TvtdError;
use crate::linalg::Scalar;
use crate::model::TvtdModel;

const MAGIC: &[u8; 8] = b"VTTVTDCK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingMeta {
    pub epoch: usize,
    pub loss: f64,
    pub seed: u64,
    /// Free-form provenance, e.g. code residue and training task.
    pub extra: Vec<(String, String)>,
}

impl TrainingMeta {
    fn to_text(&self) -> String {
        let mut s = format!("epoch={}\nloss={}\nseed={}\n", self.epoch, self.loss, self.seed);
        for (k, v) in &self.extra {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }

    fn parse(text: &str) -> Result<Self, TvtdError> {
        let bad = |what: &str| TvtdError::Corrupt(format!("metadata field {what}"));
        let mut meta = Self::default();
        for line in text.lines().filter(|l| !l.is_empty()) {
            let (k, v) = line.split_once('=').ok_or_else(|| bad(line))?;
            match k {
                "epoch" => meta.epoch = v.parse().map_err(|_| bad(k))?,
                "loss" => meta.loss = v.parse().map_err(|_| bad(k))?,
                "seed" => meta.seed = v.parse().map_err(|_| bad(k))?,
                _ => meta.extra.push((k.to_string(), v.to_string())),
            }
        }
        Ok(meta)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.extra.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<u8>,
}

/// Decoded container, not yet bound to a scalar type.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub version: u32,
    pub config: TvtdConfig,
    pub meta: TrainingMeta,
    pub element_size: u8,
    pub blobs: Vec<Blob>,
}

fn put_text(out: &mut Vec<u8>, text: &str) {
    out.extend_from_slice(&(text.len() as u32).to_le_bytes());
    out.extend_from_slice(text.as_bytes());
}

pub fn to_bytes<T: Scalar>(model: &TvtdModel<T>, meta: &TrainingMeta) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    put_text(&mut out, &model.config().to_string());
    put_text(&mut out, &meta.to_text());
    out.push(std::mem::size_of::<T>() as u8);
    let store = model.params();
    out.extend_from_slice(&(store.infos().len() as u32).to_le_bytes());
    for id in store.ids() {
        let info = store.info(id);
        out.extend_from_slice(&(info.name.len() as u16).to_le_bytes());
        out.extend_from_slice(info.name.as_bytes());
        out.push(info.shape.len() as u8);
        for &d in &info.shape {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        T::write_le(store.get(id), &mut out);
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], TvtdError> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| TvtdError::Corrupt("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, TvtdError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, TvtdError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, TvtdError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, TvtdError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn text(&mut self) -> Result<&'a str, TvtdError> {
        let len = self.u32()? as usize;
        std::str::from_utf8(self.take(len)?).map_err(|_| TvtdError::Corrupt("non-UTF-8 text".into()))
    }
}

impl Checkpoint {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TvtdError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(TvtdError::BadMagic);
        }
        let mut r = Reader { bytes, pos: 8 };
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(TvtdError::Version {
                expected: FORMAT_VERSION,
                found: version,
            });
        }
        if bytes.len() < 32 + 12 {
            return Err(TvtdError::Corrupt("truncated".into()));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(TvtdError::Corrupt("digest mismatch".into()));
        }
        let mut r = Reader { bytes: body, pos: 12 };
        let config = TvtdConfig::parse(r.text()?)?;
        let meta = TrainingMeta::parse(r.text()?)?;
        let element_size = r.u8()?;
        if element_size != 4 && element_size != 8 {
            return Err(TvtdError::Corrupt(format!("element size {element_size}")));
        }
        let count = r.u32()?;
        let mut blobs = Vec::new();
        for _ in 0..count {
            let name_len = r.u16()? as usize;
            let name = std::str::from_utf8(r.take(name_len)?)
                .map_err(|_| TvtdError::Corrupt("blob name".into()))?
                .to_string();
            let rank = r.u8()?;
            let shape = (0..rank).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
            let len = shape
                .iter()
                .try_fold(element_size as usize, |acc, &d| acc.checked_mul(d))
                .ok_or_else(|| TvtdError::Corrupt(format!("blob {name} too large")))?;
            let data = r.take(len)?.to_vec();
            blobs.push(Blob { name, shape, data });
        }
        if r.pos != body.len() {
            return Err(TvtdError::Corrupt("trailing bytes".into()));
        }
        Ok(Self {
            version,
            config,
            meta,
            element_size,
            blobs,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, TvtdError> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Builds the model. `expected_n` rejects checkpoints for another code
    /// length.
    pub fn into_model<T: Scalar>(self, expected_n: Option<usize>) -> Result<(TvtdModel<T>, TrainingMeta), TvtdError> {
        if let Some(n) = expected_n {
            if self.config.n != n {
                return Err(TvtdError::CodeLength {
                    expected: n,
                    found: self.config.n,
                });
            }
        }
        if self.element_size as usize != std::mem::size_of::<T>() {
            return Err(TvtdError::Dtype {
                expected: T::DTYPE,
                found: format!("{}-byte", self.element_size),
            });
        }
        let mut model = TvtdModel::<T>::zeroed(self.config)?;
        let store = model.params_mut();
        if self.blobs.len() != store.infos().len() {
            return Err(TvtdError::Corrupt(format!(
                "{} blobs for {} parameters",
                self.blobs.len(),
                store.infos().len()
            )));
        }
        for (id, blob) in store.ids().collect::<Vec<_>>().into_iter().zip(&self.blobs) {
            let info = store.info(id);
            if info.name != blob.name || info.shape != blob.shape {
                return Err(TvtdError::Corrupt(format!(
                    "blob {} {:?} does not match parameter {} {:?}",
                    blob.name, blob.shape, info.name, info.shape
                )));
            }
            let values = T::read_le(&blob.data);
            if values.iter().any(|v| !v.is_finite()) {
                return Err(TvtdError::Corrupt(format!("non-finite values in {}", blob.name)));
            }
            store.get_mut(id).copy_from_slice(&values);
        }
        Ok((model, self.meta))
    }
}

pub fn save<T: Scalar>(model: &TvtdModel<T>, meta: &TrainingMeta, path: impl AsRef<Path>) -> Result<(), TvtdError> {
    fs::write(path, to_bytes(model, meta))?;
    Ok(())
}

pub fn load<T: Scalar>(
    path: impl AsRef<Path>,
    expected_n: Option<usize>,
) -> Result<(TvtdModel<T>, TrainingMeta), TvtdError> {
    Checkpoint::read(path)?.into_model(expected_n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> TvtdModel<f32> {
        let cfg = TvtdConfig {
            d_model: 8,
            n_heads: 2,
            n_layers: 1,
            ..TvtdConfig::desk(6)
        };
        TvtdModel::new(cfg, 11).unwrap()
    }

    fn meta() -> TrainingMeta {
        TrainingMeta {
            epoch: 3,
            loss: 0.125,
            seed: 9,
            extra: vec![("a".into(), "0".into())],
        }
    }

    #[test]
    fn bytes_round_trip() {
        let m = model();
        let bytes = to_bytes(&m, &meta());
        let (back, meta_back) = Checkpoint::from_bytes(&bytes).unwrap().into_model::<f32>(Some(6)).unwrap();
        assert_eq!(back.params(), m.params());
        assert_eq!(meta_back, meta());
        assert_eq!(to_bytes(&back, &meta_back), bytes);
    }

    #[test]
    fn rejects_damage() {
        let bytes = to_bytes(&model(), &meta());
        let mut flipped = bytes.clone();
        let mid = flipped.len() / 2;
        flipped[mid] ^= 1;
        assert!(matches!(Checkpoint::from_bytes(&flipped), Err(TvtdError::Corrupt(_))));
        let mut versioned = bytes.clone();
        versioned[8] = 2;
        assert!(matches!(
            Checkpoint::from_bytes(&versioned),
            Err(TvtdError::Version { found: 2, .. })
        ));
        assert!(matches!(Checkpoint::from_bytes(b"nope"), Err(TvtdError::BadMagic)));
        assert!(matches!(
            Checkpoint::from_bytes(&bytes[..bytes.len() - 1]),
            Err(TvtdError::Corrupt(_))
        ));
    }

    #[test]
    fn rejects_mismatched_n_and_dtype() {
        let ck = Checkpoint::from_bytes(&to_bytes(&model(), &meta())).unwrap();
        assert!(matches!(
            ck.clone().into_model::<f32>(Some(7)),
            Err(TvtdError::CodeLength { expected: 7, found: 6 })
        ));
        assert!(matches!(ck.into_model::<f64>(None), Err(TvtdError::Dtype { .. })));
    }
}
