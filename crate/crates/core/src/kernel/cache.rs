//! On-disk kernel files.
//!
//! Layout, all little-endian:
//!
//! | bytes   | field                                                   |
//! |---------|---------------------------------------------------------|
//! | 8       | magic `FINROT1\0`                                       |
//! | 4       | `u32` 2j                                                |
//! | 4       | `u32` flattening flag, 0 = `ix` major                   |
//! | 8       | `f64` θ                                                 |
//! | 8 N⁴    | `f64` kernel entries, row by row                        |
//! | 8       | `u64` checksum: first 8 bytes of SHA-256 of the entries  |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use sha2::{Digest, Sha256};

use super::{build_kernel_cartesian, KernelSource, RotationKernel};
use crate::error::{Error, Result};
use crate::oscillator::{OscillatorRep, WavefunctionTable};

pub const CACHE_MAGIC: &[u8; 8] = b"FINROT1\0";
const FLAG_X_MAJOR: u32 = 0;
const HEADER_LEN: usize = 8 + 4 + 4 + 8;

fn format_err(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}: {msg}", path.display()))
}

/// Checksum stored in the trailer.
pub fn payload_checksum(payload: &[u8]) -> u64 {
    let digest = Sha256::digest(payload);
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn encode(kernel: &RotationKernel) -> Vec<u8> {
    let entries = kernel.matrix().len();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * entries + 8);
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&kernel.rep().two_j().to_le_bytes());
    buf.extend_from_slice(&FLAG_X_MAJOR.to_le_bytes());
    buf.extend_from_slice(&kernel.theta().to_le_bytes());
    for v in kernel.matrix().iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let sum = payload_checksum(&buf[HEADER_LEN..]);
    buf.extend_from_slice(&sum.to_le_bytes());
    buf
}

/// Writes the kernel file, via a temporary sibling renamed into place so a
/// crash never leaves a half-written file under the final name. Returns the
/// payload checksum.
pub fn save_kernel(kernel: &RotationKernel, path: &Path) -> Result<u64> {
    let buf = encode(kernel);
    let sum = u64::from_le_bytes(buf[buf.len() - 8..].try_into().expect("trailer"));
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(sum)
}

fn decode(path: &Path, bytes: &[u8]) -> Result<(RotationKernel, u64)> {
    if bytes.len() < HEADER_LEN + 8 {
        return Err(format_err(path, "file too short for a kernel header"));
    }
    if &bytes[..8] != CACHE_MAGIC {
        return Err(format_err(path, "not a kernel file (bad magic or version)"));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
    let two_j = word(8);
    let flag = word(12);
    if flag != FLAG_X_MAJOR {
        return Err(format_err(path, format!("unknown flattening flag {flag}")));
    }
    let theta = f64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let side = two_j as u64 + 1;
    let entries = side
        .checked_pow(4)
        .filter(|e| *e <= (usize::MAX / 16) as u64)
        .ok_or_else(|| format_err(path, format!("header side {side} is implausible")))?
        as usize;
    let expected = HEADER_LEN + 8 * entries + 8;
    if bytes.len() != expected {
        return Err(format_err(
            path,
            format!(
                "size {} does not match N = {side} from the header (expected {expected})",
                bytes.len()
            ),
        ));
    }
    let payload = &bytes[HEADER_LEN..expected - 8];
    let stored = u64::from_le_bytes(bytes[expected - 8..].try_into().expect("8 bytes"));
    let sum = payload_checksum(payload);
    if sum != stored {
        return Err(format_err(
            path,
            format!("checksum mismatch (stored {stored:016x}, computed {sum:016x})"),
        ));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let dim = (side * side) as usize;
    let matrix = Array2::from_shape_vec((dim, dim), values).expect("size checked above");
    let kernel = RotationKernel::from_matrix(OscillatorRep::from_two_j(two_j), theta, matrix)?;
    Ok((kernel, sum))
}

/// Reads a kernel file. Any defect is a format error; nothing partial is
/// returned.
pub fn load_kernel(path: &Path) -> Result<RotationKernel> {
    load_kernel_with_checksum(path).map(|(k, _)| k)
}

pub fn load_kernel_with_checksum(path: &Path) -> Result<(RotationKernel, u64)> {
    let bytes = fs::read(path)?;
    decode(path, &bytes)
}

/// How a [`DiskCache`] request was served.
#[derive(Debug, Clone, PartialEq)]
pub enum CacheOutcome {
    Hit,
    Built,
    /// The file existed but was unusable and has been replaced.
    Rebuilt { reason: String },
}

/// Directory of kernel files keyed by screen size and the exact bits of θ.
#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, rep: OscillatorRep, theta: f64) -> PathBuf {
        self.dir
            .join(format!("finrot-n{}-{:016x}.bin", rep.side(), theta.to_bits()))
    }

    /// Loads the kernel if a valid file exists, else builds and stores it.
    pub fn fetch(&self, rep: OscillatorRep, theta: f64) -> Result<(RotationKernel, CacheOutcome)> {
        let path = self.path_for(rep, theta);
        let reason = match load_kernel(&path) {
            Ok(k) if k.rep() == rep && k.theta().to_bits() == theta.to_bits() => {
                return Ok((k, CacheOutcome::Hit))
            }
            Ok(_) => Some("header does not match the requested screen and angle".to_string()),
            Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => Some(e.to_string()),
        };
        let kernel = build_kernel_cartesian(rep, theta, &WavefunctionTable::new(rep))?;
        fs::create_dir_all(&self.dir)?;
        save_kernel(&kernel, &path)?;
        let outcome = match reason {
            None => CacheOutcome::Built,
            Some(reason) => CacheOutcome::Rebuilt { reason },
        };
        Ok((kernel, outcome))
    }
}

impl KernelSource for DiskCache {
    fn kernel(
        &self,
        rep: OscillatorRep,
        theta: f64,
    ) -> Result<std::borrow::Cow<'_, RotationKernel>> {
        self.fetch(rep, theta).map(|(k, _)| std::borrow::Cow::Owned(k))
    }
}
