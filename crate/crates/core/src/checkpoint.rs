//! Binary field checkpoints.
//!
//! Record layout, all integers little-endian:
//!
//! | bytes | content                                      |
//! |-------|----------------------------------------------|
//! | 4     | magic `"OLDB"`                               |
//! | 2     | format version, currently 1 (u16)            |
//! | 1     | dimension n ∈ {2, 3} (u8)                    |
//! | 4·n   | grid size per axis (u32 each, all equal)     |
//! | 1     | representation: 0 physical, 1 spectral (u8)  |
//! | 2     | component count (u16)                        |
//! | ...   | payload, one component after another         |
//!
//! The payload is little-endian f64 in row-major grid order per component;
//! spectral components store (re, im) pairs. Floats are moved as raw bit
//! patterns, so a round trip is bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write as IoWrite};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FieldLike, Repr, ScalarField, SymTensorField, TensorField, VectorField};
use crate::grid::Grid;

const MAGIC: &[u8; 4] = b"OLDB";
const VERSION: u16 = 1;

/// Serialize one field as a checkpoint record.
pub fn write_field<F: FieldLike, W: IoWrite>(mut w: W, f: &F) -> Result<()> {
    let grid = f.grid();
    let mut buf = Vec::with_capacity(16 + payload_len(grid, f.repr(), f.ncomp()));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(grid.dim() as u8);
    for _ in 0..grid.dim() {
        buf.extend_from_slice(&(grid.size() as u32).to_le_bytes());
    }
    buf.push(match f.repr() {
        Repr::Physical => 0,
        Repr::Spectral => 1,
    });
    buf.extend_from_slice(&(f.ncomp() as u16).to_le_bytes());
    for c in 0..f.ncomp() {
        match f.repr() {
            Repr::Physical => {
                for v in f.phys(c)? {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
            Repr::Spectral => {
                for z in f.spec(c)? {
                    buf.extend_from_slice(&z.re.to_le_bytes());
                    buf.extend_from_slice(&z.im.to_le_bytes());
                }
            }
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn payload_len(grid: Grid, repr: Repr, ncomp: usize) -> usize {
    let per = match repr {
        Repr::Physical => 8,
        Repr::Spectral => 16,
    };
    grid.len() * per * ncomp
}

struct Header {
    grid: Grid,
    repr: Repr,
    ncomp: usize,
}

fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let version = u16::from_le_bytes(read_array(r)?);
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {version}"
        )));
    }
    let dim = u8::from_le_bytes(read_array(r)?) as usize;
    if !(2..=3).contains(&dim) {
        return Err(Error::Checkpoint(format!("bad dimension {dim}")));
    }
    let mut sizes = Vec::with_capacity(dim);
    for _ in 0..dim {
        sizes.push(u32::from_le_bytes(read_array(r)?) as usize);
    }
    if sizes.iter().any(|&s| s != sizes[0]) {
        return Err(Error::Checkpoint(format!(
            "anisotropic grid sizes {sizes:?} unsupported"
        )));
    }
    let grid = Grid::new(dim, sizes[0])
        .map_err(|e| Error::Checkpoint(format!("bad grid in header: {e}")))?;
    let repr = match u8::from_le_bytes(read_array(r)?) {
        0 => Repr::Physical,
        1 => Repr::Spectral,
        t => return Err(Error::Checkpoint(format!("bad representation tag {t}"))),
    };
    let ncomp = u16::from_le_bytes(read_array(r)?) as usize;
    if ncomp == 0 {
        return Err(Error::Checkpoint("zero components".into()));
    }
    Ok(Header { grid, repr, ncomp })
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut a = [0u8; N];
    r.read_exact(&mut a)?;
    Ok(a)
}

fn read_components<R: Read>(r: &mut R, h: &Header) -> Result<Vec<ScalarField>> {
    let mut payload = vec![0u8; payload_len(h.grid, h.repr, h.ncomp)];
    r.read_exact(&mut payload)?;
    let len = h.grid.len();
    let mut comps = Vec::with_capacity(h.ncomp);
    let f64_at = |bytes: &[u8], i: usize| {
        f64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().expect("sized above"))
    };
    for c in 0..h.ncomp {
        match h.repr {
            Repr::Physical => {
                let base = &payload[c * len * 8..(c + 1) * len * 8];
                let vals = (0..len).map(|i| f64_at(base, i)).collect();
                comps.push(ScalarField::from_physical(h.grid, vals)?);
            }
            Repr::Spectral => {
                let base = &payload[c * len * 16..(c + 1) * len * 16];
                let vals = (0..len)
                    .map(|i| Complex64::new(f64_at(base, 2 * i), f64_at(base, 2 * i + 1)))
                    .collect();
                comps.push(ScalarField::from_spectral(h.grid, vals)?);
            }
        }
    }
    Ok(comps)
}

/// Deserialize a record whose kind is known at the call site.
pub fn read_field<F: FieldLike, R: Read>(mut r: R) -> Result<F> {
    let h = read_header(&mut r)?;
    let expected = F::comp_count(h.grid.dim());
    if h.ncomp != expected {
        return Err(Error::Checkpoint(format!(
            "component count {} does not match requested field kind (wants {expected})",
            h.ncomp
        )));
    }
    let comps = read_components(&mut r, &h)?;
    F::from_scalar_components(comps)
}

/// A record of any field kind, for readers that dispatch on the header.
pub enum AnyField {
    Scalar(ScalarField),
    Vector(VectorField),
    SymTensor(SymTensorField),
    Tensor(TensorField),
}

impl AnyField {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyField::Scalar(_) => "scalar",
            AnyField::Vector(_) => "vector",
            AnyField::SymTensor(_) => "symtensor",
            AnyField::Tensor(_) => "tensor",
        }
    }
}

/// Deserialize a record, inferring the field kind from (dimension, component
/// count). The counts 1, n, n(n+1)/2, n² are distinct for n ∈ {2, 3}.
pub fn read_any<R: Read>(mut r: R) -> Result<AnyField> {
    let h = read_header(&mut r)?;
    let dim = h.grid.dim();
    let comps = read_components(&mut r, &h)?;
    if h.ncomp == 1 {
        Ok(AnyField::Scalar(comps.into_iter().next().expect("ncomp 1")))
    } else if h.ncomp == dim {
        Ok(AnyField::Vector(VectorField::from_scalar_components(
            comps,
        )?))
    } else if h.ncomp == dim * (dim + 1) / 2 {
        Ok(AnyField::SymTensor(SymTensorField::from_scalar_components(
            comps,
        )?))
    } else if h.ncomp == dim * dim {
        Ok(AnyField::Tensor(TensorField::from_scalar_components(
            comps,
        )?))
    } else {
        Err(Error::Checkpoint(format!(
            "component count {} matches no field kind in dimension {dim}",
            h.ncomp
        )))
    }
}

pub fn save_field<F: FieldLike>(path: &Path, f: &F) -> Result<()> {
    let file = File::create(path)?;
    write_field(BufWriter::new(file), f)
}

pub fn load_field<F: FieldLike>(path: &Path) -> Result<F> {
    let file = File::open(path)?;
    read_field(BufReader::new(file))
}

pub fn load_any(path: &Path) -> Result<AnyField> {
    let file = File::open(path)?;
    read_any(BufReader::new(file))
}
