//! Trajectory snapshots as CSV rows or little-endian binary frames.
//!
//! Binary layout: `b"CHAIN1"`, two zero bytes, `n: u32`, `frames: u32`, then per frame
//! `t, p[0..n], r[0..n]` as `f64`.

use std::io::{Read, Seek, SeekFrom, Write};

use crate::error::{Error, Result};

use super::run::Observer;
use super::state::ChainState;

pub const MAGIC: &[u8; 6] = b"CHAIN1";
pub const HEADER_LEN: usize = 16;

/// Writes `t,i,p,r` rows.
pub struct CsvWriter<W: Write> {
    out: W,
    header: bool,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(out: W) -> Self {
        CsvWriter { out, header: false }
    }

    pub fn write(&mut self, state: &ChainState) -> Result<()> {
        if !self.header {
            writeln!(self.out, "t,i,p,r")?;
            self.header = true;
        }
        for (i, (p, r)) in state.p.iter().zip(&state.r).enumerate() {
            writeln!(self.out, "{:.16e},{i},{p:.16e},{r:.16e}", state.t)?;
        }
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> Observer for CsvWriter<W> {
    fn observe(&mut self, state: &ChainState) -> Result<()> {
        self.write(state)
    }
}

/// Binary frame writer; the frame count in the header is patched by [`FrameWriter::finish`].
pub struct FrameWriter<W: Write + Seek> {
    out: W,
    n: u32,
    frames: u32,
}

impl<W: Write + Seek> FrameWriter<W> {
    pub fn new(mut out: W, n: usize) -> Result<Self> {
        let n32 = u32::try_from(n).map_err(|_| Error::Precondition(format!("{n} sites exceed the frame format")))?;
        out.write_all(MAGIC)?;
        out.write_all(&[0, 0])?;
        out.write_all(&n32.to_le_bytes())?;
        out.write_all(&0u32.to_le_bytes())?;
        Ok(FrameWriter { out, n: n32, frames: 0 })
    }

    pub fn write(&mut self, state: &ChainState) -> Result<()> {
        if state.n() != self.n as usize {
            return Err(Error::Precondition(format!("frame has {} sites, file has {}", state.n(), self.n)));
        }
        let mut buf = Vec::with_capacity(8 * (1 + 2 * state.n()));
        buf.extend_from_slice(&state.t.to_le_bytes());
        for x in state.p.iter().chain(&state.r) {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        self.out.write_all(&buf)?;
        self.frames += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.seek(SeekFrom::Start(12))?;
        self.out.write_all(&self.frames.to_le_bytes())?;
        self.out.seek(SeekFrom::End(0))?;
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write + Seek> Observer for FrameWriter<W> {
    fn observe(&mut self, state: &ChainState) -> Result<()> {
        self.write(state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub p: Vec<f64>,
    pub r: Vec<f64>,
}

/// Reads every frame of a binary trajectory.
pub fn read_frames<R: Read>(mut input: R) -> Result<Vec<Frame>> {
    let mut head = [0u8; HEADER_LEN];
    input.read_exact(&mut head)?;
    if &head[..6] != MAGIC {
        return Err(Error::Precondition("not a CHAIN1 trajectory".into()));
    }
    let n = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let frames = u32::from_le_bytes(head[12..16].try_into().unwrap()) as usize;
    let mut word = [0u8; 8];
    let mut next = |input: &mut R| -> Result<f64> {
        input.read_exact(&mut word)?;
        Ok(f64::from_le_bytes(word))
    };
    let mut out = Vec::with_capacity(frames);
    for _ in 0..frames {
        let t = next(&mut input)?;
        let p = (0..n).map(|_| next(&mut input)).collect::<Result<_>>()?;
        let r = (0..n).map(|_| next(&mut input)).collect::<Result<_>>()?;
        out.push(Frame { t, p, r });
    }
    Ok(out)
}
