//! Binary forest archive.
//!
//! All integers little-endian, reals as raw IEEE-754 binary64 bits:
//!
//! ```text
//! magic        8 bytes   "OPFFRST\0"
//! version      u32
//! payload_len  u64
//! payload      payload_len bytes
//! checksum     32 bytes  SHA-256 of payload
//! ```
//!
//! Payload, with `n` samples of dimension `dim`:
//!
//! ```text
//! distance      u8        catalogue number 1..=47
//! n, dim        u64, u64
//! norm_mode     u8        0 = none, 1 = min_max_01 (then dim f64 min, dim f64 max)
//! has_names     u8        0/1; if 1: u32 count, then per name u32 byte length + UTF-8
//! samples       n x (u64 id, u32 label, dim f64)
//! costs         n f64
//! predecessors  n u64     u64::MAX marks a root
//! root_labels   n u32
//! ordered       n u64
//! prototypes    u64 count, then ids as u64
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::distances::{DistanceId, FeatureVector};
use crate::forest::{Sample, TrainedForest};

use super::{DataError, NormalizationMode, NormalizationSpec};

pub const MAGIC: &[u8; 8] = b"OPFFRST\0";
pub const FORMAT_VERSION: u32 = 1;
const NO_PREDECESSOR: u64 = u64::MAX;

/// A trained forest with everything needed to classify raw input.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestArchive {
    pub forest: TrainedForest,
    pub normalization: NormalizationSpec,
    /// Text of each label, as mapped at training time.
    pub class_names: Option<Vec<String>>,
}

pub fn write_forest<W: Write>(out: &mut W, archive: &ForestArchive) -> std::io::Result<()> {
    let payload = encode(archive);
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&(payload.len() as u64).to_le_bytes())?;
    out.write_all(&payload)?;
    out.write_all(&Sha256::digest(&payload))?;
    Ok(())
}

pub fn read_forest<R: Read>(input: &mut R) -> Result<ForestArchive, DataError> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| DataError::io("<archive>", e))?;
    decode_container(&bytes)
}

pub fn save_forest(path: &Path, archive: &ForestArchive) -> Result<(), DataError> {
    let mut buf = Vec::new();
    write_forest(&mut buf, archive).expect("writing to memory");
    fs::write(path, buf).map_err(|e| DataError::io(path, e))
}

pub fn load_forest(path: &Path) -> Result<ForestArchive, DataError> {
    let bytes = fs::read(path).map_err(|e| DataError::io(path, e))?;
    decode_container(&bytes)
}

fn encode(a: &ForestArchive) -> Vec<u8> {
    let f = &a.forest;
    let mut b = Vec::new();
    b.push(f.distance().number());
    put_u64(&mut b, f.len() as u64);
    put_u64(&mut b, f.dim() as u64);
    match a.normalization.mode {
        NormalizationMode::None => b.push(0),
        NormalizationMode::MinMax01 => {
            b.push(1);
            a.normalization.min.iter().for_each(|&v| put_f64(&mut b, v));
            a.normalization.max.iter().for_each(|&v| put_f64(&mut b, v));
        }
    }
    match &a.class_names {
        None => b.push(0),
        Some(names) => {
            b.push(1);
            b.extend_from_slice(&(names.len() as u32).to_le_bytes());
            for name in names {
                b.extend_from_slice(&(name.len() as u32).to_le_bytes());
                b.extend_from_slice(name.as_bytes());
            }
        }
    }
    for s in f.samples() {
        put_u64(&mut b, s.id as u64);
        b.extend_from_slice(&s.label.to_le_bytes());
        s.features.values().iter().for_each(|&v| put_f64(&mut b, v));
    }
    f.costs().iter().for_each(|&c| put_f64(&mut b, c));
    for p in f.predecessors() {
        put_u64(&mut b, p.map_or(NO_PREDECESSOR, |p| p as u64));
    }
    for l in f.root_labels() {
        b.extend_from_slice(&l.to_le_bytes());
    }
    f.ordered_nodes().iter().for_each(|&v| put_u64(&mut b, v as u64));
    put_u64(&mut b, f.prototypes().len() as u64);
    f.prototypes().iter().for_each(|&v| put_u64(&mut b, v as u64));
    b
}

fn put_u64(b: &mut Vec<u8>, v: u64) {
    b.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(b: &mut Vec<u8>, v: f64) {
    b.extend_from_slice(&v.to_bits().to_le_bytes());
}

fn corrupt(msg: impl Into<String>) -> DataError {
    DataError::CorruptArchive(msg.into())
}

fn decode_container(bytes: &[u8]) -> Result<ForestArchive, DataError> {
    let mut r = Cursor { bytes, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(corrupt("bad magic bytes"));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(DataError::VersionMismatch {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let len = usize::try_from(r.u64()?).map_err(|_| corrupt("payload length overflow"))?;
    let payload = r.take(len)?;
    let checksum = r.take(32)?;
    if r.pos != bytes.len() {
        return Err(corrupt("trailing bytes after checksum"));
    }
    if Sha256::digest(payload).as_slice() != checksum {
        return Err(corrupt("checksum mismatch"));
    }
    decode_payload(payload)
}

fn decode_payload(payload: &[u8]) -> Result<ForestArchive, DataError> {
    let mut r = Cursor { bytes: payload, pos: 0 };
    let distance = DistanceId::from_number(r.u8()?).ok_or_else(|| corrupt("unknown distance"))?;
    let n = r.len()?;
    let dim = r.len()?;
    if n == 0 || dim == 0 {
        return Err(corrupt("empty forest"));
    }
    let normalization = match r.u8()? {
        0 => NormalizationSpec::identity(),
        1 => NormalizationSpec {
            mode: NormalizationMode::MinMax01,
            min: r.f64s(dim)?,
            max: r.f64s(dim)?,
        },
        m => return Err(corrupt(format!("unknown normalization mode {m}"))),
    };
    let class_names = match r.u8()? {
        0 => None,
        1 => {
            let count = r.u32()? as usize;
            let mut names = Vec::with_capacity(count.min(1 << 16));
            for _ in 0..count {
                let len = r.u32()? as usize;
                let raw = r.take(len)?;
                names.push(String::from_utf8(raw.to_vec()).map_err(|_| corrupt("class name is not UTF-8"))?);
            }
            Some(names)
        }
        _ => return Err(corrupt("bad class-name flag")),
    };
    let mut samples = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let id = r.len()?;
        let label = r.u32()?;
        let features = FeatureVector::new(r.f64s(dim)?).map_err(|e| corrupt(e.to_string()))?;
        samples.push(Sample::new(features, label, id));
    }
    let cost = r.f64s(n)?;
    let predecessor = (0..n)
        .map(|_| {
            r.u64()
                .map(|p| (p != NO_PREDECESSOR).then(|| usize::try_from(p).unwrap_or(usize::MAX)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let root_label = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
    let ordered = (0..n).map(|_| r.len()).collect::<Result<Vec<_>, _>>()?;
    let n_proto = r.len()?;
    if n_proto > n {
        return Err(corrupt("more prototypes than samples"));
    }
    let prototypes = (0..n_proto).map(|_| r.len()).collect::<Result<Vec<_>, _>>()?;
    if r.pos != payload.len() {
        return Err(corrupt("trailing payload bytes"));
    }
    let forest = TrainedForest::from_parts(samples, distance, prototypes, cost, predecessor, root_label, ordered)
        .map_err(|e| corrupt(e.to_string()))?;
    Ok(ForestArchive {
        forest,
        normalization,
        class_names,
    })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], DataError> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| corrupt("truncated archive"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, DataError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, DataError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, DataError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn len(&mut self) -> Result<usize, DataError> {
        usize::try_from(self.u64()?).map_err(|_| corrupt("length overflow"))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>, DataError> {
        let raw = self.take(count.checked_mul(8).ok_or_else(|| corrupt("length overflow"))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect())
    }
}
