use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{Grid, GridWavefunction};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"TWGW";
const VERSION: u32 = 1;

/// Little-endian layout: magic, `u32` version, `u32` axis count, `u64` sizes,
/// `f64` half-widths, then interleaved real/imaginary `f64` values.
pub fn write_wavefunction(path: impl AsRef<Path>, psi: &GridWavefunction) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + 16 * psi.values.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(psi.grid.ndim() as u32).to_le_bytes());
    for &n in psi.grid.sizes() {
        buf.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for &l in psi.grid.half_widths() {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    for v in &psi.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub fn read_wavefunction(path: impl AsRef<Path>) -> Result<GridWavefunction> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(cur.array()?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let ndim = u32::from_le_bytes(cur.array()?) as usize;
    let sizes = (0..ndim).map(|_| Ok(u64::from_le_bytes(cur.array()?) as usize)).collect::<Result<Vec<_>>>()?;
    let widths = (0..ndim).map(|_| Ok(f64::from_le_bytes(cur.array()?))).collect::<Result<Vec<_>>>()?;
    let grid = Grid::new(sizes, widths)?;
    let values = (0..grid.len())
        .map(|_| Ok(Complex64::new(f64::from_le_bytes(cur.array()?), f64::from_le_bytes(cur.array()?))))
        .collect::<Result<Vec<_>>>()?;
    if cur.pos != bytes.len() {
        return Err(Error::Format("trailing bytes".into()));
    }
    GridWavefunction::new(grid, values)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let s = self.bytes.get(self.pos..self.pos + n).ok_or_else(|| Error::Format("truncated file".into()))?;
        self.pos += n;
        Ok(s)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = Grid::new(vec![4, 3], vec![1.0, 2.5]).unwrap();
        let psi = GridWavefunction::from_fn(g, |z| Complex64::new(z[0], -z[1]));
        let path = std::env::temp_dir().join(format!("twgw-{}.bin", std::process::id()));
        write_wavefunction(&path, &psi).unwrap();
        assert_eq!(read_wavefunction(&path).unwrap(), psi);
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(read_wavefunction(&path).is_err());
        let _ = std::fs::remove_file(&path);
    }
}
