//! Self-describing binary container for complex arrays.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic   b"CTNS"
//! version u32 (= 1)
//! rank    u32
//! dims    rank x u64
//! data    prod(dims) x (re: f64, im: f64), row-major
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{CMat, Real};

const MAGIC: &[u8; 4] = b"CTNS";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    pub dims: Vec<usize>,
    pub data: Vec<Complex<f64>>,
}

impl ComplexTensor {
    pub fn new(dims: Vec<usize>, data: Vec<Complex<f64>>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if expected != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "tensor dims {dims:?} need {expected} elements, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn from_matrix<T: Real>(m: &CMat<T>) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                data.push(Complex::new(z.re.as_f64(), z.im.as_f64()));
            }
        }
        Self { dims: vec![m.nrows(), m.ncols()], data }
    }

    pub fn to_matrix<T: Real>(&self) -> Result<CMat<T>> {
        if self.dims.len() != 2 {
            return Err(Error::Format(format!("expected rank-2 tensor, found rank {}", self.dims.len())));
        }
        let cols = self.dims[1];
        Ok(CMat::from_fn(self.dims[0], cols, |r, c| {
            let z = self.data[r * cols + c];
            Complex::new(T::lit(z.re), T::lit(z.im))
        }))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(self.dims.len() as u32)?;
        for &d in &self.dims {
            w.write_u64::<LittleEndian>(d as u64)?;
        }
        for z in &self.data {
            w.write_f64::<LittleEndian>(z.re)?;
            w.write_f64::<LittleEndian>(z.im)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic, not a complex tensor file".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported tensor version {version}")));
        }
        let rank = r.read_u32::<LittleEndian>()? as usize;
        let dims = (0..rank)
            .map(|_| r.read_u64::<LittleEndian>().map(|d| d as usize))
            .collect::<std::io::Result<Vec<_>>>()?;
        let len: usize = dims.iter().product();
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            let re = r.read_f64::<LittleEndian>()?;
            let im = r.read_f64::<LittleEndian>()?;
            data.push(Complex::new(re, im));
        }
        Ok(Self { dims, data })
    }
}
