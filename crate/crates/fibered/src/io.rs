//! Little-endian binary layout for dense operator dumps.
//!
//! ```text
//! offset  size  field
//! 0       4     magic  b"FBOP"
//! 4       4     u32    layout version (1)
//! 8       8     u64    target Nx
//! 16      8     u64    target Ny
//! 24      8     u64    source Nx
//! 32      8     u64    source Ny
//! 40      8     u64    rank
//! 48      8     u64    rows
//! 56      8     u64    cols
//! 64      16·rows·cols  row-major entries, each (re: f64, im: f64)
//! ```
//!
//! Sample counts are not stored: a loaded operator lives on minimal-sampling grids.

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::operator::QuantizedOperator;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"FBOP";
const VERSION: u32 = 1;

pub fn write_operator(op: &QuantizedOperator, mut w: impl Write) -> Result<()> {
    let d = op.to_dense();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let header = [
        op.dst.n_base_modes,
        op.dst.n_fiber_modes,
        op.src.n_base_modes,
        op.src.n_fiber_modes,
        op.src.rank,
        d.nrows(),
        d.ncols(),
    ];
    for h in header {
        w.write_all(&(h as u64).to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(16 * d.nrows() * d.ncols());
    for i in 0..d.nrows() {
        for j in 0..d.ncols() {
            buf.extend_from_slice(&d[(i, j)].re.to_le_bytes());
            buf.extend_from_slice(&d[(i, j)].im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_operator(mut r: impl Read) -> Result<QuantizedOperator> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("not an operator dump (bad magic)".into()));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v)?;
    if u32::from_le_bytes(v) != VERSION {
        return Err(Error::Parse("unsupported layout version".into()));
    }
    let mut h = [0usize; 7];
    for x in h.iter_mut() {
        *x = read_u64(&mut r)? as usize;
    }
    let [dnx, dny, snx, sny, rank, rows, cols] = h;
    let dst = FrequencyGrid::new(dnx, dny, rank);
    let src = FrequencyGrid::new(snx, sny, rank);
    if dst.dim() != rows || src.dim() != cols {
        return Err(Error::Dimension("header dimensions disagree with windows".into()));
    }
    let mut raw = vec![0u8; 16 * rows * cols];
    r.read_exact(&mut raw)?;
    let f = |k: usize| f64::from_le_bytes(raw[8 * k..8 * k + 8].try_into().unwrap());
    let d = DMatrix::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        Complex64::new(f(k), f(k + 1))
    });
    QuantizedOperator::from_dense(&src, &dst, &d, "loaded")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = FrequencyGrid::new(2, 1, 2);
        let op = QuantizedOperator::multiplier(&g, |a, b| Complex64::new(a as f64, b as f64 * 0.5));
        let mut bytes = Vec::new();
        write_operator(&op, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 64 + 16 * g.dim() * g.dim());
        let back = read_operator(bytes.as_slice()).unwrap();
        assert_eq!(back.matrix, op.matrix);
        assert!(read_operator(&b"nope"[..]).is_err());
    }
}
