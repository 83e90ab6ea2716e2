//! EEGB v1 container.
//!
//! ```text
//! "EEGB"  u32 version  u32 channels  u32 samples  u32 trial_count
//! f32 fs_hz  f32 cue_offset_s
//! u32 len + UTF-8 class name 1, u32 len + UTF-8 class name 2
//! u32 len + UTF-8 subject id
//! u32 CRC-32 of every header byte before it
//! trial_count × (u8 label, channels × samples f32, channel-major)
//! ```
//!
//! All integers and floats are little-endian. Samples are stored as `f32`;
//! values not representable in `f32` are rounded on save.

use std::path::Path;

use super::Dataset;
use crate::csp::EegEpoch;
use crate::error::{Error, FormatError, Result};
use crate::numerics::Matrix;

pub const EEGB_MAGIC: [u8; 4] = *b"EEGB";
pub const EEGB_VERSION: u32 = 1;

pub fn encode_dataset(d: &Dataset) -> Result<Vec<u8>> {
    d.validate()?;
    let (channels, samples) = (d.channels(), d.samples());
    let field = |v: usize, name: &str| {
        u32::try_from(v).map_err(|_| Error::Parameter(format!("{name} {v} does not fit in u32")))
    };
    let mut out = Vec::with_capacity(64 + d.trials.len() * (1 + 4 * channels * samples));
    out.extend_from_slice(&EEGB_MAGIC);
    out.extend_from_slice(&EEGB_VERSION.to_le_bytes());
    out.extend_from_slice(&field(channels, "channels")?.to_le_bytes());
    out.extend_from_slice(&field(samples, "samples")?.to_le_bytes());
    out.extend_from_slice(&field(d.trials.len(), "trial count")?.to_le_bytes());
    out.extend_from_slice(&(d.fs_hz as f32).to_le_bytes());
    out.extend_from_slice(&(d.cue_offset_s as f32).to_le_bytes());
    for s in [&d.class_names[0], &d.class_names[1], &d.subject_id] {
        out.extend_from_slice(&field(s.len(), "string length")?.to_le_bytes());
        out.extend_from_slice(s.as_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    for t in &d.trials {
        out.push(t.label);
        for &v in t.data.as_slice() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(Error::Format {
            offset: self.pos,
            kind: FormatError::Truncated { expected: self.pos.saturating_add(n), actual: self.bytes.len() },
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn string(&mut self, what: &'static str) -> Result<String> {
        let len = self.u32()? as usize;
        let at = self.pos;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Format { offset: at, kind: FormatError::Utf8(what) })
    }
}

fn header_error(offset: usize, field: &'static str, message: String) -> Error {
    Error::Format { offset, kind: FormatError::Header { field, message } }
}

/// Parses and validates an EEGB byte stream.
pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader { bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
    if magic != EEGB_MAGIC {
        return Err(Error::Format { offset: 0, kind: FormatError::BadMagic(magic) });
    }
    let version = r.u32()?;
    if version != EEGB_VERSION {
        return Err(Error::Format { offset: 4, kind: FormatError::UnsupportedVersion(version) });
    }
    let channels = r.u32()? as usize;
    let samples = r.u32()? as usize;
    let trial_count = r.u32()? as usize;
    let fs = r.f32()?;
    let cue = r.f32()?;
    let class1 = r.string("class name 1")?;
    let class2 = r.string("class name 2")?;
    let subject = r.string("subject id")?;
    let header_end = r.pos;
    let stored = r.u32()?;
    let computed = crc32fast::hash(&bytes[..header_end]);
    if stored != computed {
        return Err(Error::Format { offset: header_end, kind: FormatError::Checksum { stored, computed } });
    }

    if channels < 2 {
        return Err(header_error(8, "channels", format!("{channels} < 2")));
    }
    if samples < 2 {
        return Err(header_error(12, "samples", format!("{samples} < 2")));
    }
    if trial_count < 2 {
        return Err(header_error(16, "trial_count", format!("{trial_count} < 2")));
    }
    if !(fs.is_finite() && fs > 0.0) {
        return Err(header_error(20, "fs_hz", format!("{fs} is not a positive rate")));
    }
    let duration = samples as f64 / fs as f64;
    if !(cue.is_finite() && cue >= 0.0 && (cue as f64) < duration) {
        return Err(header_error(24, "cue_offset_s", format!("{cue} outside trial duration {duration}")));
    }

    let values = channels
        .checked_mul(samples)
        .filter(|v| v.checked_mul(4).is_some())
        .ok_or_else(|| header_error(8, "channels", "channels × samples overflows".into()))?;
    let trial_bytes = 1 + 4 * values;
    let expected = trial_bytes
        .checked_mul(trial_count)
        .and_then(|t| t.checked_add(r.pos))
        .ok_or_else(|| header_error(16, "trial_count", "payload size overflows".into()))?;
    if bytes.len() < expected {
        return Err(Error::Format { offset: bytes.len(), kind: FormatError::Truncated { expected, actual: bytes.len() } });
    }
    if bytes.len() > expected {
        return Err(Error::Format { offset: expected, kind: FormatError::TrailingBytes(bytes.len() - expected) });
    }

    let fs_hz = fs as f64;
    let mut trials = Vec::with_capacity(trial_count);
    for trial in 0..trial_count {
        let at = r.pos;
        let label = r.take(1)?[0];
        if label != 1 && label != 2 {
            return Err(Error::Format { offset: at, kind: FormatError::LabelOutOfRange { trial, label } });
        }
        let raw = r.take(4 * values)?;
        let mut data = Vec::with_capacity(values);
        for (k, chunk) in raw.chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
            if !v.is_finite() {
                return Err(Error::Format {
                    offset: at + 1 + 4 * k,
                    kind: FormatError::NonFiniteSample { trial, channel: k / samples, sample: k % samples },
                });
            }
            data.push(v as f64);
        }
        let m = Matrix::from_vec(channels, samples, data)?;
        trials.push(EegEpoch::new(m, fs_hz, label)?);
    }
    for class in [1u8, 2] {
        if !trials.iter().any(|t| t.label == class) {
            return Err(Error::Format { offset: header_end, kind: FormatError::MissingClass(class) });
        }
    }
    Dataset::new(subject, fs_hz, [class1, class2], cue as f64, trials)
}

pub fn save_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_dataset(d)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dataset(&bytes)
}
