//! Little-endian state dumps.
//!
//! Layout: magic `CSST`, `u16` version, `u8` dimension, `u8` precision
//! (bytes per complex sample, 8 or 16), `u8` side (0 position, 1 momentum),
//! three zero bytes, `u64` points, `f64` position spacing, then `points`
//! complex samples as (re, im) pairs.

use std::io::{Read, Write};

use super::{Side, SpectralState};
use crate::error::{Error, Result};
use crate::model::GridSpec;
use crate::Complex64;

const MAGIC: &[u8; 4] = b"CSST";
const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Complex64,
    Complex128,
}

impl Precision {
    fn bytes(self) -> u8 {
        match self {
            Precision::Complex64 => 8,
            Precision::Complex128 => 16,
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Dump(e.to_string())
}

pub fn write_state<W: Write>(mut w: W, state: &SpectralState, precision: Precision) -> Result<()> {
    let grid = state.grid();
    let mut head = Vec::with_capacity(HEADER_LEN);
    head.extend_from_slice(MAGIC);
    head.extend_from_slice(&VERSION.to_le_bytes());
    head.push(grid.dimension() as u8);
    head.push(precision.bytes());
    head.push(match state.side() {
        Side::Position => 0,
        Side::Momentum => 1,
    });
    head.extend_from_slice(&[0; 3]);
    head.extend_from_slice(&(grid.points() as u64).to_le_bytes());
    head.extend_from_slice(&grid.spacing().to_le_bytes());
    w.write_all(&head).map_err(io)?;

    let mut body = Vec::with_capacity(state.values().len() * precision.bytes() as usize);
    for v in state.values() {
        match precision {
            Precision::Complex64 => {
                body.extend_from_slice(&(v.re as f32).to_le_bytes());
                body.extend_from_slice(&(v.im as f32).to_le_bytes());
            }
            Precision::Complex128 => {
                body.extend_from_slice(&v.re.to_le_bytes());
                body.extend_from_slice(&v.im.to_le_bytes());
            }
        }
    }
    w.write_all(&body).map_err(io)
}

pub fn read_state<R: Read>(mut r: R) -> Result<SpectralState> {
    let mut head = [0u8; HEADER_LEN];
    r.read_exact(&mut head).map_err(io)?;
    if &head[0..4] != MAGIC {
        return Err(Error::Dump("bad magic".into()));
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != VERSION {
        return Err(Error::Dump(format!("unsupported version {version}")));
    }
    let dimension = head[6] as usize;
    let precision = match head[7] {
        8 => Precision::Complex64,
        16 => Precision::Complex128,
        p => return Err(Error::Dump(format!("unsupported precision {p}"))),
    };
    let side = match head[8] {
        0 => Side::Position,
        1 => Side::Momentum,
        s => return Err(Error::Dump(format!("unknown side tag {s}"))),
    };
    let points = u64::from_le_bytes(head[12..20].try_into().expect("8 bytes")) as usize;
    let spacing = f64::from_le_bytes(head[20..28].try_into().expect("8 bytes"));
    let grid = GridSpec::with_dimension(dimension, 0.5 * points as f64 * spacing, points)
        .map_err(|e| Error::Dump(format!("bad grid header: {e}")))?;

    let mut body = vec![0u8; points * precision.bytes() as usize];
    r.read_exact(&mut body).map_err(io)?;
    let values = match precision {
        Precision::Complex64 => body
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes(c[0..4].try_into().expect("4 bytes"));
                let im = f32::from_le_bytes(c[4..8].try_into().expect("4 bytes"));
                Complex64::new(re.into(), im.into())
            })
            .collect(),
        Precision::Complex128 => body
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[0..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..16].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect(),
    };
    SpectralState::new(grid, values, side)
}
