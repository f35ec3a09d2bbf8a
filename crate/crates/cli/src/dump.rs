//! Binary grid dumps.
//!
//! Layout, all little-endian:
//!
//! ```text
//! b"DIRACSIM"            magic
//! u32                    format version
//! u32                    rank
//! u32                    payload type (0 real, 1 complex)
//! u32                    components
//! u64 × rank             dims
//! (f64, f64) × rank      axis min, max
//! f64 ...                payload
//! ```
//!
//! The payload stores each component in turn, row-major over `dims`; complex
//! values are `(re, im)` pairs.

use std::fs;
use std::path::Path;

use diracsim_core::C64;

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 8] = b"DIRACSIM";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

impl Payload {
    pub fn len(&self) -> usize {
        match self {
            Payload::Real(v) => v.len(),
            Payload::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn tag(&self) -> u32 {
        match self {
            Payload::Real(_) => 0,
            Payload::Complex(_) => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridDump {
    pub dims: Vec<usize>,
    pub axes: Vec<(f64, f64)>,
    pub components: usize,
    pub payload: Payload,
}

impl GridDump {
    pub fn new(dims: Vec<usize>, axes: Vec<(f64, f64)>, components: usize, payload: Payload) -> Result<Self> {
        let d = GridDump { dims, axes, components, payload };
        d.check()?;
        Ok(d)
    }

    pub fn real(dims: Vec<usize>, axes: Vec<(f64, f64)>, values: Vec<f64>) -> Result<Self> {
        Self::new(dims, axes, 1, Payload::Real(values))
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    /// Values per component.
    pub fn points(&self) -> usize {
        self.dims.iter().product()
    }

    fn check(&self) -> Result<()> {
        if self.dims.is_empty() || self.axes.len() != self.dims.len() {
            return Err(CliError::Format(format!("rank {} with {} axes", self.dims.len(), self.axes.len())));
        }
        if self.components == 0 {
            return Err(CliError::Format("zero components".into()));
        }
        let want = self.points() * self.components;
        if self.payload.len() != want {
            return Err(CliError::Format(format!("payload has {} values, dims need {want}", self.payload.len())));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let per = if matches!(self.payload, Payload::Complex(_)) { 16 } else { 8 };
        let mut out = Vec::with_capacity(24 + 24 * self.rank() + per * self.payload.len());
        out.extend_from_slice(MAGIC);
        for v in [VERSION, self.rank() as u32, self.payload.tag(), self.components as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for &d in &self.dims {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for &(lo, hi) in &self.axes {
            out.extend_from_slice(&lo.to_le_bytes());
            out.extend_from_slice(&hi.to_le_bytes());
        }
        match &self.payload {
            Payload::Real(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            Payload::Complex(v) => v.iter().for_each(|z| {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(CliError::Format("not a grid dump (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(CliError::Format(format!("unsupported dump version {version}")));
        }
        let rank = r.u32()? as usize;
        let tag = r.u32()?;
        let components = r.u32()? as usize;
        if rank == 0 || rank > 8 {
            return Err(CliError::Format(format!("implausible rank {rank}")));
        }
        let dims = (0..rank).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let axes = (0..rank).map(|_| Ok((r.f64()?, r.f64()?))).collect::<Result<Vec<_>>>()?;
        let count = dims
            .iter()
            .try_fold(components, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| CliError::Format("dims overflow".into()))?;
        let payload = match tag {
            0 => {
                r.expect_remaining(count, 8)?;
                Payload::Real((0..count).map(|_| r.f64()).collect::<Result<_>>()?)
            }
            1 => {
                r.expect_remaining(count, 16)?;
                Payload::Complex((0..count).map(|_| Ok(C64::new(r.f64()?, r.f64()?))).collect::<Result<_>>()?)
            }
            t => return Err(CliError::Format(format!("unknown payload type {t}"))),
        };
        GridDump::new(dims, axes, components, payload)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| CliError::io(path, e))
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(CliError::Format("truncated dump header".into()));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn expect_remaining(&self, count: usize, size: usize) -> Result<()> {
        let have = self.bytes.len() - self.pos;
        let want = count.checked_mul(size).ok_or_else(|| CliError::Format("dims overflow".into()))?;
        match have.cmp(&want) {
            std::cmp::Ordering::Less => Err(CliError::Format(format!("truncated payload: {have} of {want} bytes"))),
            std::cmp::Ordering::Greater => Err(CliError::Format(format!("{} trailing bytes", have - want))),
            std::cmp::Ordering::Equal => Ok(()),
        }
    }
}

pub fn load_field(path: &Path) -> Result<GridDump> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    GridDump::from_bytes(&bytes)
}

pub fn dump_field(field: &GridDump, path: &Path) -> Result<()> {
    field.write(path)
}
