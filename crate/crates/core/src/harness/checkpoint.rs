//! Binary checkpoint files.
//!
//! Layout: the magic `PTNC`, a version byte `0x01`, the header length as a
//! little-endian `u32`, a UTF-8 JSON header (model kind, config,
//! hyperparameters, generator state and a manifest of named matrix shapes),
//! then every matrix in manifest order as row-major little-endian `f32`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngState};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"PTNC";
pub const CHECKPOINT_VERSION: u8 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model_kind: String,
    pub config: Value,
    pub hyperparams: Value,
    pub rng: Option<RngState>,
    pub matrices: Vec<(String, Matrix)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    model_kind: String,
    config: Value,
    hyperparams: Value,
    rng: Option<RngState>,
    manifest: Vec<ManifestEntry>,
}

impl Checkpoint {
    pub fn matrix(&self, name: &str) -> Result<&Matrix> {
        self.matrices
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::Checkpoint(format!("matrix `{name}` missing from checkpoint")))
    }

    /// Copies `name` into `dst`, checking the stored shape against it.
    pub fn fill(&self, name: &str, dst: &mut Matrix) -> Result<()> {
        let src = self.matrix(name)?;
        if src.shape() != dst.shape() {
            return Err(Error::Checkpoint(format!(
                "shape mismatch for `{name}`: checkpoint has {:?}, model expects {:?}",
                src.shape(),
                dst.shape()
            )));
        }
        dst.as_mut_slice().copy_from_slice(src.as_slice());
        Ok(())
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.model_kind != kind {
            return Err(Error::Checkpoint(format!(
                "checkpoint holds a `{}` model, expected `{kind}`",
                self.model_kind
            )));
        }
        Ok(())
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let header = Header {
            model_kind: self.model_kind.clone(),
            config: self.config.clone(),
            hyperparams: self.hyperparams.clone(),
            rng: self.rng.clone(),
            manifest: self
                .matrices
                .iter()
                .map(|(name, m)| ManifestEntry {
                    name: name.clone(),
                    rows: m.rows(),
                    cols: m.cols(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let payload: usize = self.matrices.iter().map(|(_, m)| m.len() * 4).sum();
        let mut out = Vec::with_capacity(9 + json.len() + payload);
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.push(CHECKPOINT_VERSION);
        let len = u32::try_from(json.len()).map_err(|_| Error::Checkpoint("header too large".into()))?;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&json);
        for (_, m) in &self.matrices {
            for &v in m.as_slice() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
        if bytes.len() < 9 {
            return Err(Error::Checkpoint(format!("truncated: {} bytes", bytes.len())));
        }
        if &bytes[..4] != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic, not a checkpoint file".into()));
        }
        if bytes[4] != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {} (this build reads {CHECKPOINT_VERSION})",
                bytes[4]
            )));
        }
        let len = u32::from_le_bytes([bytes[5], bytes[6], bytes[7], bytes[8]]) as usize;
        let body = &bytes[9..];
        if body.len() < len {
            return Err(Error::Checkpoint("truncated header".into()));
        }
        let header: Header = serde_json::from_slice(&body[..len])
            .map_err(|e| Error::Checkpoint(format!("corrupt header: {e}")))?;
        let mut data = &body[len..];
        let mut matrices = Vec::with_capacity(header.manifest.len());
        for entry in header.manifest {
            let n = entry.rows * entry.cols;
            if data.len() < 4 * n {
                return Err(Error::Checkpoint(format!("truncated payload in `{}`", entry.name)));
            }
            let values = data[..4 * n]
                .chunks_exact(4)
                .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
                .collect();
            data = &data[4 * n..];
            matrices.push((entry.name, Matrix::from_vec(entry.rows, entry.cols, values)?));
        }
        if !data.is_empty() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", data.len())));
        }
        Ok(Checkpoint {
            model_kind: header.model_kind,
            config: header.config,
            hyperparams: header.hyperparams,
            rng: header.rng,
            matrices,
        })
    }
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, ckpt.encode()?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn sample() -> Checkpoint {
        let mut rng = Rng::new(3);
        let _ = rng.next_u64();
        Checkpoint {
            model_kind: "test".into(),
            config: serde_json::json!({"a": 1, "b": [1.5, 2.0]}),
            hyperparams: serde_json::json!({"eta": 0.035}),
            rng: Some(rng.state()),
            matrices: vec![
                ("w".into(), Matrix::from_rows(&[&[0.1, 0.2], &[0.3, 1.0 / 3.0]])),
                ("b".into(), Matrix::column(&[-1.0, 2.5])),
            ],
        }
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let bytes = sample().encode().unwrap();
        let back = Checkpoint::decode(&bytes).unwrap();
        assert_eq!(back.encode().unwrap(), bytes);
        assert_eq!(back.rng, sample().rng);
        let w = back.matrix("w").unwrap();
        assert_eq!(w.get(1, 1), f64::from((1.0f64 / 3.0) as f32));
    }

    #[test]
    fn starts_with_magic_and_version() {
        let bytes = sample().encode().unwrap();
        assert_eq!(&bytes[..5], b"PTNC\x01");
    }

    #[test]
    fn every_truncation_is_rejected() {
        let bytes = sample().encode().unwrap();
        for cut in 0..bytes.len() {
            assert!(Checkpoint::decode(&bytes[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn version_and_magic_errors() {
        let mut bytes = sample().encode().unwrap();
        bytes[4] = 2;
        let e = Checkpoint::decode(&bytes).unwrap_err().to_string();
        assert!(e.contains("version"), "{e}");
        bytes[0] = b'X';
        assert!(Checkpoint::decode(&bytes).is_err());
    }

    #[test]
    fn fill_checks_shape() {
        let c = sample();
        let mut ok = Matrix::zeros(2, 2);
        c.fill("w", &mut ok).unwrap();
        let mut bad = Matrix::zeros(2, 3);
        assert!(matches!(c.fill("w", &mut bad), Err(Error::Checkpoint(m)) if m.contains("shape")));
        assert!(c.fill("missing", &mut ok).is_err());
    }
}
