//! Binary model format.
//!
//! ```text
//! "MCNN"  magic
//! u16     format version
//! config  u32 channels, u32 height, u32 width,
//!         u32 block count, then per block u32 out_channels, u32 kernel_size,
//!         u8 same_padding, u8 has_hidden, u32 hidden width (0 if none),
//!         u32 num_classes, u64 seed
//! tensors per parameter: u8 rank, rank x u32 dims, f32 data
//! ```
//!
//! All integers and floats are little-endian. Trailing bytes are rejected.

use std::path::Path;

use super::{ConvBlock, Model, ModelConfig, ModelError};
use crate::tensor::Tensor;

const MAGIC: &[u8; 4] = b"MCNN";
pub const FORMAT_VERSION: u16 = 1;

impl Model {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + 4 * self.param_count());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        let c = &self.config;
        for dim in c.input_dims() {
            put_u32(&mut out, dim);
        }
        put_u32(&mut out, c.conv_blocks.len());
        for b in &c.conv_blocks {
            put_u32(&mut out, b.out_channels);
            put_u32(&mut out, b.kernel_size);
        }
        out.push(c.same_padding as u8);
        out.push(c.hidden_dense.is_some() as u8);
        put_u32(&mut out, c.hidden_dense.unwrap_or(0));
        put_u32(&mut out, c.num_classes);
        out.extend_from_slice(&c.seed.to_le_bytes());
        for p in &self.params {
            out.push(p.rank() as u8);
            for &d in p.shape() {
                put_u32(&mut out, d);
            }
            for v in p.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Model, ModelError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(ModelError::BadMagic);
        }
        let version = u16::from_le_bytes(r.array()?);
        if version != FORMAT_VERSION {
            return Err(ModelError::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let input_shape = (r.usize()?, r.usize()?, r.usize()?);
        let n_blocks = r.usize()?;
        let mut conv_blocks = Vec::new();
        for _ in 0..n_blocks {
            conv_blocks.push(ConvBlock {
                out_channels: r.usize()?,
                kernel_size: r.usize()?,
            });
        }
        let same_padding = r.flag("same_padding")?;
        let has_hidden = r.flag("has_hidden")?;
        let hidden = r.usize()?;
        let num_classes = r.usize()?;
        let seed = u64::from_le_bytes(r.array()?);
        let config = ModelConfig {
            input_shape,
            conv_blocks,
            same_padding,
            hidden_dense: has_hidden.then_some(hidden),
            num_classes,
            seed,
        };
        let shapes = config
            .param_shapes()
            .map_err(|e| ModelError::Corrupt(format!("stored config is invalid: {e}")))?;
        let mut params = Vec::with_capacity(shapes.len());
        for expected in &shapes {
            let rank = r.take(1)?[0] as usize;
            let dims = (0..rank).map(|_| r.usize()).collect::<Result<Vec<_>, _>>()?;
            if &dims != expected {
                return Err(ModelError::Corrupt(format!(
                    "tensor {} has dims {dims:?}, config implies {expected:?}",
                    params.len()
                )));
            }
            let n: usize = dims.iter().product();
            let raw = r.take(4 * n)?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")))
                .collect();
            params.push(Tensor::new(dims, data)?);
        }
        if r.pos != bytes.len() {
            return Err(ModelError::Corrupt(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Model::from_parts(config, params)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model, ModelError> {
        Model::from_bytes(&std::fs::read(path)?)
    }
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    let v = u32::try_from(v).expect("dimension fits in u32");
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let end = self.pos.checked_add(n).ok_or(ModelError::Truncated)?;
        let slice = self.bytes.get(self.pos..end).ok_or(ModelError::Truncated)?;
        self.pos = end;
        Ok(slice)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], ModelError> {
        Ok(self.take(N)?.try_into().expect("exact length"))
    }

    fn usize(&mut self) -> Result<usize, ModelError> {
        Ok(u32::from_le_bytes(self.array()?) as usize)
    }

    fn flag(&mut self, what: &str) -> Result<bool, ModelError> {
        match self.take(1)?[0] {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(ModelError::Corrupt(format!("{what} flag is {v}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> Model {
        Model::build(&ModelConfig {
            hidden_dense: Some(5),
            ..ModelConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn roundtrip_is_bitwise() {
        let m = model();
        let back = Model::from_bytes(&m.to_bytes()).unwrap();
        assert!(back.same_parameters(&m));
        assert_eq!(back.to_bytes(), m.to_bytes());
    }

    #[test]
    fn bad_magic() {
        let mut bytes = model().to_bytes();
        bytes[0] = b'X';
        assert!(matches!(Model::from_bytes(&bytes), Err(ModelError::BadMagic)));
    }

    #[test]
    fn version_mismatch() {
        let mut bytes = model().to_bytes();
        bytes[4] = 9;
        assert!(matches!(
            Model::from_bytes(&bytes),
            Err(ModelError::VersionMismatch { found: 9, .. })
        ));
    }

    #[test]
    fn truncated_mid_tensor() {
        let bytes = model().to_bytes();
        let cut = bytes.len() - 10;
        assert!(matches!(Model::from_bytes(&bytes[..cut]), Err(ModelError::Truncated)));
        assert!(matches!(Model::from_bytes(&bytes[..3]), Err(ModelError::Truncated)));
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut bytes = model().to_bytes();
        bytes.push(0);
        assert!(matches!(Model::from_bytes(&bytes), Err(ModelError::Corrupt(_))));
    }
}
