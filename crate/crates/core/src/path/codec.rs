//! Binary column format for paths.
//!
//! Layout, all little-endian: `b"VGPT"`, version `u32`, `n: u32`, `dim: u32`,
//! then `n * dim` `f64` coefficients, cell-major.

use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lie::algebra::LieAlgebra;
use crate::path::discrete::{check_grid, DiscretePath};

pub const MAGIC: &[u8; 4] = b"VGPT";
pub const VERSION: u32 = 1;
const HEADER: usize = 16;
/// Upper bound on decoded coefficients, to keep hostile headers from allocating.
pub const MAX_VALUES: usize = 1 << 26;

/// Decoded contents of a VGPT buffer, before it is attached to an algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPath {
    pub n: usize,
    pub dim: usize,
    pub values: Vec<f64>,
}

pub fn encode(path: &DiscretePath) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + 8 * path.values().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(path.n() as u32).to_le_bytes());
    out.extend_from_slice(&(path.dim() as u32).to_le_bytes());
    for v in path.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("four bytes"))
}

pub fn decode_raw(bytes: &[u8]) -> Result<RawPath> {
    if bytes.len() < HEADER {
        return Err(Error::Decode(format!("buffer of {} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Decode("bad magic".into()));
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(Error::Decode(format!("unsupported version {version}")));
    }
    let n = read_u32(bytes, 8) as usize;
    let dim = read_u32(bytes, 12) as usize;
    check_grid(n).map_err(|e| Error::Decode(e.to_string()))?;
    if dim == 0 {
        return Err(Error::Decode("dimension must be positive".into()));
    }
    let count = n
        .checked_mul(dim)
        .filter(|c| *c <= MAX_VALUES)
        .ok_or_else(|| Error::Decode("path too large".into()))?;
    let expected = HEADER + 8 * count;
    if bytes.len() != expected {
        return Err(Error::Decode(format!(
            "expected {expected} bytes for n = {n}, dim = {dim}, got {}",
            bytes.len()
        )));
    }
    let mut values = Vec::with_capacity(count);
    for chunk in bytes[HEADER..].chunks_exact(8) {
        let v = f64::from_le_bytes(chunk.try_into().expect("eight bytes"));
        if !v.is_finite() {
            return Err(Error::Decode("non-finite coefficient".into()));
        }
        values.push(v);
    }
    Ok(RawPath { n, dim, values })
}

pub fn decode(bytes: &[u8], algebra: Arc<LieAlgebra>) -> Result<DiscretePath> {
    let raw = decode_raw(bytes)?;
    if raw.dim != algebra.dim() {
        return Err(Error::Decode(format!(
            "path has dimension {}, algebra {} has {}",
            raw.dim,
            algebra.name(),
            algebra.dim()
        )));
    }
    DiscretePath::new(algebra, raw.n, raw.values)
}

/// Hex SHA-256 of the encoded path.
pub fn content_hash(path: &DiscretePath) -> String {
    hex::encode(Sha256::digest(encode(path)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::algebra::InnerForm;
    use crate::lie::builders;
    use nalgebra::DVector;

    fn sample() -> DiscretePath {
        let g = builders::so(3, InnerForm::default()).unwrap();
        DiscretePath::from_fn(g.algebra().clone(), 8, |t| DVector::from_vec(vec![t, -t, 1.0])).unwrap()
    }

    #[test]
    fn round_trip() {
        let p = sample();
        let bytes = encode(&p);
        assert_eq!(bytes.len(), 16 + 8 * 24);
        assert_eq!(&bytes[..4], b"VGPT");
        let back = decode(&bytes, p.algebra().clone()).unwrap();
        assert_eq!(back, p);
        assert_eq!(content_hash(&back), content_hash(&p));
        assert_eq!(content_hash(&p).len(), 64);
    }

    #[test]
    fn rejects_malformed_buffers() {
        let p = sample();
        let good = encode(&p);
        assert!(decode_raw(&good[..10]).is_err());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(decode_raw(&bad).is_err());
        let mut bad = good.clone();
        bad[4] = 2;
        assert!(decode_raw(&bad).is_err());
        let mut bad = good.clone();
        bad[8] = 7;
        assert!(decode_raw(&bad).is_err());
        assert!(decode_raw(&good[..good.len() - 1]).is_err());
        let mut bad = good.clone();
        bad[16..24].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(decode_raw(&bad).is_err());
        let mut huge = good[..16].to_vec();
        huge[8..12].copy_from_slice(&(1u32 << 31).to_le_bytes());
        huge[12..16].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode_raw(&huge).is_err());
        let t = builders::torus(2, InnerForm::default()).unwrap();
        assert!(decode(&good, t.algebra().clone()).is_err());
    }
}
