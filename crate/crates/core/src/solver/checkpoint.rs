//! Binary checkpoints. Layout, all little-endian:
//! magic `NSPNP1`, `u64` n, `f64` L, six `f64` parameters
//! (μ, ε, D₁, D₂, ν₁, ν₂), `f64` time, `u64` step, then the spectra of
//! u₀, u₁, u₂, v, w in storage order as `(re, im)` pairs of `f64`.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{FluidState, PhysicalParams};
use crate::error::{Error, Result};
use crate::spectral::{GridSpec, SpectrumField, VectorSpectrum};

pub const CHECKPOINT_MAGIC: &[u8; 6] = b"NSPNP1";

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub state: FluidState,
    pub params: PhysicalParams,
    pub step: u64,
}

fn io_err(e: std::io::Error) -> Error {
    Error::Checkpoint(e.to_string())
}

pub fn encode_checkpoint(
    out: &mut impl Write,
    state: &FluidState,
    params: &PhysicalParams,
    step: u64,
) -> Result<()> {
    let g = state.grid();
    let mut put = |bytes: &[u8]| out.write_all(bytes).map_err(io_err);
    put(CHECKPOINT_MAGIC)?;
    put(&(g.n() as u64).to_le_bytes())?;
    put(&g.box_length().to_le_bytes())?;
    for x in params.as_array() {
        put(&x.to_le_bytes())?;
    }
    put(&state.time.to_le_bytes())?;
    put(&step.to_le_bytes())?;
    for f in state.fields() {
        let mut buf = Vec::with_capacity(16 * f.coeffs().len());
        for c in f.coeffs() {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
        put(&buf)?;
    }
    Ok(())
}

fn take<const N: usize>(input: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    input
        .read_exact(&mut b)
        .map_err(|e| Error::Checkpoint(format!("truncated: {e}")))?;
    Ok(b)
}

fn take_f64(input: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(take(input)?))
}

pub fn decode_checkpoint(input: &mut impl Read) -> Result<Checkpoint> {
    let magic: [u8; 6] = take(input)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let n = u64::from_le_bytes(take(input)?) as usize;
    let l = take_f64(input)?;
    let grid = GridSpec::new(n, l).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let mut p = [0.0; 6];
    for x in &mut p {
        *x = take_f64(input)?;
    }
    let time = take_f64(input)?;
    let step = u64::from_le_bytes(take(input)?);
    let mut fields = Vec::with_capacity(5);
    let mut buf = vec![0u8; 16 * grid.len()];
    for _ in 0..5 {
        input
            .read_exact(&mut buf)
            .map_err(|e| Error::Checkpoint(format!("truncated: {e}")))?;
        let coeffs = buf
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        fields.push(SpectrumField::from_coeffs(grid, coeffs)?);
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest).map_err(io_err)? != 0 {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    let [a, b, c, v, w]: [SpectrumField; 5] = fields.try_into().expect("five fields");
    Ok(Checkpoint {
        state: FluidState {
            u: VectorSpectrum::new([a, b, c])?,
            v,
            w,
            time,
        },
        params: PhysicalParams::from_array(p),
        step,
    })
}

pub fn write_checkpoint(
    path: &Path,
    state: &FluidState,
    params: &PhysicalParams,
    step: u64,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    encode_checkpoint(&mut w, state, params, step)?;
    w.flush().map_err(io_err)
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let file = std::fs::File::open(path).map_err(io_err)?;
    decode_checkpoint(&mut BufReader::new(file))
}
