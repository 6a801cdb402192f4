//! LFB1 light-field file format.
//!
//! Little-endian layout:
//!
//! | bytes | content                                            |
//! |-------|----------------------------------------------------|
//! | 0..4  | magic `LFB1`                                       |
//! | 4..8  | u32 version (currently 1)                          |
//! | 8..28 | five u32 dims: Ns, Nt, Nu, Nv, Nc                  |
//! | 28..68| five f64: D, pitch_st, pitch_uv, offset_st, offset_uv |
//! | 68..  | Ns*Nt*Nu*Nv*Nc f32 samples, row-major, channel fastest |
//!
//! Reading validates magic, version, dimension/payload consistency, intrinsic
//! positivity, and sample finiteness, so a successful `read_lf` always yields
//! a well-formed [`LightField`]. Writing then reading any light field
//! reproduces it bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lightfield::{Dims, Intrinsics, LightField};

const MAGIC: &[u8; 4] = b"LFB1";
const VERSION: u32 = 1;

/// Serialize to the LFB1 format.
pub fn write_lf(lf: &LightField, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let d = lf.dims();
    for n in [d.ns, d.nt, d.nu, d.nv, d.nc] {
        let n = u32::try_from(n).map_err(|_| Error::config("dimension exceeds u32 range"))?;
        w.write_all(&n.to_le_bytes())?;
    }
    let intr = lf.intrinsics();
    for x in [
        intr.plane_sep,
        intr.pitch_st,
        intr.pitch_uv,
        intr.offset_st,
        intr.offset_uv,
    ] {
        w.write_all(&x.to_le_bytes())?;
    }
    // Payload in one pass; chunked to keep the buffer bounded.
    let mut buf = Vec::with_capacity(4 * 16384);
    for chunk in lf.data().chunks(16384) {
        buf.clear();
        for x in chunk {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

/// Deserialize from the LFB1 format.
pub fn read_lf(path: &Path) -> Result<LightField> {
    let file = File::open(path)?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(Error::format(format!(
            "bad magic {:?}, expected {:?}",
            magic, MAGIC
        )));
    }
    let version = read_u32(&mut r, "version")?;
    if version != VERSION {
        return Err(Error::format(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let mut dims_raw = [0u32; 5];
    for (i, slot) in dims_raw.iter_mut().enumerate() {
        *slot = read_u32(&mut r, &format!("dimension {i}"))?;
    }
    if dims_raw.contains(&0) {
        return Err(Error::format("zero dimension in header"));
    }
    let dims = Dims::new(
        dims_raw[0] as usize,
        dims_raw[1] as usize,
        dims_raw[2] as usize,
        dims_raw[3] as usize,
        dims_raw[4] as usize,
    );

    let mut intr_raw = [0f64; 5];
    for (i, slot) in intr_raw.iter_mut().enumerate() {
        *slot = read_f64(&mut r, &format!("intrinsic {i}"))?;
    }
    let intrinsics = Intrinsics {
        plane_sep: intr_raw[0],
        pitch_st: intr_raw[1],
        pitch_uv: intr_raw[2],
        offset_st: intr_raw[3],
        offset_uv: intr_raw[4],
    };
    intrinsics
        .validate()
        .map_err(|e| Error::format(format!("invalid intrinsics in header: {e}")))?;

    let expected = dims.len();
    let mut data = vec![0f32; expected];
    let mut bytes = vec![0u8; 4 * 16384.min(expected.max(1))];
    let mut filled = 0usize;
    while filled < expected {
        let want = (expected - filled).min(16384);
        let buf = &mut bytes[..4 * want];
        read_exact(&mut r, buf, "payload")?;
        for (i, b) in buf.chunks_exact(4).enumerate() {
            data[filled + i] = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
        }
        filled += want;
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::format(format!(
            "trailing bytes after {expected}-sample payload"
        )));
    }
    if let Some(bad) = data.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::format(format!(
            "payload contains non-finite or negative intensity {bad}"
        )));
    }

    LightField::new(dims, intrinsics, data)
        .map_err(|e| Error::format(format!("inconsistent header: {e}")))
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::format(format!("truncated file while reading {what}")))
}

fn read_u32(r: &mut impl Read, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read, what: &str) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, what)?;
    Ok(f64::from_le_bytes(b))
}
