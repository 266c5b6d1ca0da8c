use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DUMP_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"KDSW";

/// Amplitudes over the canonical vertex order.
#[derive(Clone, Debug, PartialEq)]
pub struct FullState {
    amplitudes: Vec<Complex64>,
}

impl FullState {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    /// `1/sqrt(len)` on every vertex.
    pub fn uniform(len: usize) -> Self {
        let a = Complex64::new(1.0 / (len as f64).sqrt(), 0.0);
        Self {
            amplitudes: vec![a; len],
        }
    }

    pub fn basis(len: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_deviation(&self, other: &FullState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Binary dump: `"KDSW"`, then little-endian `u32` version, N, k, r,
    /// `u64` amplitude count, and `(re, im)` as `f64` pairs.
    pub fn write_binary<W: Write>(&self, header: DumpHeader, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Dump(e.to_string());
        out.write_all(MAGIC).map_err(io)?;
        for field in [header.format_version, header.n, header.k, header.r] {
            out.write_all(&field.to_le_bytes()).map_err(io)?;
        }
        out.write_all(&(self.len() as u64).to_le_bytes()).map_err(io)?;
        for a in &self.amplitudes {
            out.write_all(&a.re.to_le_bytes()).map_err(io)?;
            out.write_all(&a.im.to_le_bytes()).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<(DumpHeader, FullState)> {
        let io = |e: std::io::Error| Error::Dump(e.to_string());
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::Dump("bad magic".into()));
        }
        let mut word = [0u8; 4];
        let mut fields = [0u32; 4];
        for f in fields.iter_mut() {
            input.read_exact(&mut word).map_err(io)?;
            *f = u32::from_le_bytes(word);
        }
        let header = DumpHeader {
            format_version: fields[0],
            n: fields[1],
            k: fields[2],
            r: fields[3],
        };
        if header.format_version != DUMP_FORMAT_VERSION {
            return Err(Error::Dump(format!(
                "unsupported version {}",
                header.format_version
            )));
        }
        let mut long = [0u8; 8];
        input.read_exact(&mut long).map_err(io)?;
        let len = u64::from_le_bytes(long) as usize;
        let mut amplitudes = Vec::with_capacity(len);
        for _ in 0..len {
            input.read_exact(&mut long).map_err(io)?;
            let re = f64::from_le_bytes(long);
            input.read_exact(&mut long).map_err(io)?;
            let im = f64::from_le_bytes(long);
            amplitudes.push(Complex64::new(re, im));
        }
        Ok((header, FullState { amplitudes }))
    }

    pub fn to_json(&self, header: DumpHeader) -> serde_json::Value {
        let amps: Vec<[f64; 2]> = self.amplitudes.iter().map(|a| [a.re, a.im]).collect();
        serde_json::json!({
            "format_version": header.format_version,
            "n": header.n,
            "k": header.k,
            "r": header.r,
            "amplitudes": amps,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<(DumpHeader, FullState)> {
        #[derive(Deserialize)]
        struct Dump {
            format_version: u32,
            n: u32,
            k: u32,
            r: u32,
            amplitudes: Vec<[f64; 2]>,
        }
        let dump: Dump = serde_json::from_value(value.clone()).map_err(|e| Error::Dump(e.to_string()))?;
        let header = DumpHeader {
            format_version: dump.format_version,
            n: dump.n,
            k: dump.k,
            r: dump.r,
        };
        let amplitudes = dump
            .amplitudes
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        Ok((header, FullState { amplitudes }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub format_version: u32,
    pub n: u32,
    pub k: u32,
    pub r: u32,
}

impl DumpHeader {
    pub fn new(n: usize, k: usize, r: usize) -> Self {
        Self {
            format_version: DUMP_FORMAT_VERSION,
            n: n as u32,
            k: k as u32,
            r: r as u32,
        }
    }
}
