//! Binary snapshot and extension dump files.
//!
//! Layout: the magic line, one ASCII header line of `key=value` tokens, then the
//! payload as little-endian `f64`, row-major.

use std::path::Path;

use super::text::{fmt_f64, HeaderTokens};
use crate::error::{Error, Result};
use crate::extension::{ExtensionConfig, ExtensionField};
use crate::solver::{SimConfig, SimState};
use crate::spectral::{Grid, PhysicalField};

pub const MAGIC: &[u8; 8] = b"SQGLAB1\n";
/// Longest header line accepted by the readers.
const MAX_HEADER: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotHeader {
    pub n: usize,
    pub length: f64,
    pub time: f64,
    pub alpha: f64,
    pub kappa: f64,
}

impl SnapshotHeader {
    pub fn for_state(state: &SimState, cfg: &SimConfig) -> Self {
        Self {
            n: cfg.grid.n(),
            length: cfg.grid.length(),
            time: state.time,
            alpha: cfg.alpha,
            kappa: cfg.kappa,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.length)
    }

    fn line(&self) -> String {
        format!(
            "N={} L={} t={} alpha={} kappa={}",
            self.n,
            fmt_f64(self.length),
            fmt_f64(self.time),
            fmt_f64(self.alpha),
            fmt_f64(self.kappa)
        )
    }

    fn from_tokens(t: &mut HeaderTokens<'_>) -> Result<Self> {
        let n = t.usize("N")?;
        let h = Self {
            n,
            length: t.f64("L")?,
            time: t.f64("t")?,
            alpha: t.f64("alpha")?,
            kappa: t.f64("kappa")?,
        };
        if !(h.length.is_finite() && h.time.is_finite() && h.alpha.is_finite() && h.kappa.is_finite()) {
            return Err(Error::Format("non-finite header value".into()));
        }
        h.grid()?;
        Ok(h)
    }
}

fn split_header(bytes: &[u8]) -> Result<(&str, &[u8])> {
    let rest = bytes
        .strip_prefix(MAGIC.as_slice())
        .ok_or_else(|| Error::Format("bad magic".into()))?;
    let end = rest
        .iter()
        .take(MAX_HEADER)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("header line missing or too long".into()))?;
    let line = std::str::from_utf8(&rest[..end]).map_err(|_| Error::Format("header is not ASCII".into()))?;
    Ok((line, &rest[end + 1..]))
}

fn payload(data: &[u8], grid: Grid, fields: usize) -> Result<Vec<PhysicalField>> {
    let per = grid.len();
    let want = per
        .checked_mul(fields)
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| Error::Format("payload size overflows".into()))?;
    if data.len() != want {
        return Err(Error::Format(format!(
            "payload is {} bytes, header implies {want}",
            data.len()
        )));
    }
    data.chunks_exact(per * 8)
        .map(|chunk| {
            let v = chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect();
            PhysicalField::new(grid, v)
        })
        .collect()
}

fn push_values(out: &mut Vec<u8>, f: &PhysicalField) {
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_snapshot(header: &SnapshotHeader, theta: &PhysicalField) -> Result<Vec<u8>> {
    if theta.grid().n() != header.n || theta.grid().length() != header.length {
        return Err(Error::GridMismatch);
    }
    let mut out = Vec::with_capacity(64 + theta.values().len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(header.line().as_bytes());
    out.push(b'\n');
    push_values(&mut out, theta);
    Ok(out)
}

/// Parses a whole snapshot file; nothing is returned unless header and payload agree.
pub fn decode_snapshot(bytes: &[u8]) -> Result<(SnapshotHeader, PhysicalField)> {
    let (line, data) = split_header(bytes)?;
    let mut tok = HeaderTokens::new(line);
    let h = SnapshotHeader::from_tokens(&mut tok)?;
    tok.finish()?;
    let mut f = payload(data, h.grid()?, 1)?;
    Ok((h, f.pop().unwrap()))
}

pub fn snapshot_write(path: &Path, state: &SimState, cfg: &SimConfig) -> Result<()> {
    let bytes = encode_snapshot(&SnapshotHeader::for_state(state, cfg), &state.theta())?;
    super::bundle::write_atomic(path, &bytes)
}

pub fn snapshot_read(path: &Path) -> Result<(SnapshotHeader, PhysicalField)> {
    decode_snapshot(&std::fs::read(path)?)
}

/// Extension rows `z = 0, z_min, z_min ρ, …, z_min ρ^{J-1}`: `J + 1` layers.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionDump {
    pub header: SnapshotHeader,
    pub j: usize,
    pub z_min: f64,
    pub rho: f64,
    pub layers: Vec<PhysicalField>,
}

impl ExtensionDump {
    /// Requires the rows of `ext` to be the ladder of `cfg`.
    pub fn from_field(ext: &ExtensionField, cfg: &ExtensionConfig, time: f64, kappa: f64) -> Result<Self> {
        let z = cfg.z_grid();
        if z.len() != ext.rows() || z.iter().zip(ext.z()).any(|(a, b)| a != b) {
            return Err(Error::Invalid("extension rows are not the configured ladder".into()));
        }
        let g = ext.grid();
        Ok(Self {
            header: SnapshotHeader {
                n: g.n(),
                length: g.length(),
                time,
                alpha: ext.alpha(),
                kappa,
            },
            j: z.len() - 1,
            z_min: cfg.z_min,
            rho: cfg.rho,
            layers: ext.layers().to_vec(),
        })
    }

    pub fn z(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain((0..self.j).map(|i| self.z_min * self.rho.powi(i as i32)))
            .collect()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(128 + self.layers.len() * self.header.n * self.header.n * 8);
        out.extend_from_slice(MAGIC);
        let line = format!(
            "{} J={} zmin={} rho={}\n",
            self.header.line(),
            self.j,
            fmt_f64(self.z_min),
            fmt_f64(self.rho)
        );
        out.extend_from_slice(line.as_bytes());
        for f in &self.layers {
            push_values(&mut out, f);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let (line, data) = split_header(bytes)?;
        let mut tok = HeaderTokens::new(line);
        let header = SnapshotHeader::from_tokens(&mut tok)?;
        let j = tok.usize("J")?;
        let z_min = tok.f64("zmin")?;
        let rho = tok.f64("rho")?;
        tok.finish()?;
        if j == 0 || !(z_min > 0.0 && z_min.is_finite()) || !(rho > 1.0 && rho.is_finite()) {
            return Err(Error::Format(format!("bad ladder J={j} zmin={z_min} rho={rho}")));
        }
        let layers = payload(data, header.grid()?, j + 1)?;
        Ok(Self {
            header,
            j,
            z_min,
            rho,
            layers,
        })
    }
}
