//! Isotropic periodic grids on the torus [0, 2π)^n, n ∈ {2, 3}.
//!
//! Wavenumbers along each axis are the signed integers in [−size/2, size/2),
//! stored in the usual FFT layout (0, 1, …, size/2−1, −size/2, …, −1).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    size: usize,
    dealias_fraction: f64,
}

impl Grid {
    pub fn new(dim: usize, size: usize) -> Result<Self> {
        Self::with_dealias(dim, size, DEFAULT_DEALIAS_FRACTION)
    }

    pub fn with_dealias(dim: usize, size: usize, dealias_fraction: f64) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if size < 16 || !size.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "size must be a power of two ≥ 16, got {size}"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        Ok(Grid {
            dim,
            size,
            dealias_fraction,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    /// Total number of lattice points, size^dim.
    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing 2π/size.
    pub fn dx(&self) -> f64 {
        std::f64::consts::TAU / self.size as f64
    }

    /// Quadrature weight of one cell, dx^dim.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Volume of the torus, (2π)^dim.
    pub fn volume(&self) -> f64 {
        std::f64::consts::TAU.powi(self.dim as i32)
    }

    /// Signed wavenumber for a per-axis index.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.size / 2 {
            i as i64
        } else {
            i as i64 - self.size as i64
        }
    }

    /// Modes with |k_axis| strictly above this are removed by dealiasing.
    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_fraction * (self.size as f64 / 2.0)
    }

    /// Largest band index whose annulus intersects the resolved modes,
    /// ⌈log₂(size/2)⌉.
    pub fn max_band(&self) -> i32 {
        (self.size as f64 / 2.0).log2().ceil() as i32
    }

    /// Flat index of the zero mode (always 0 in this layout).
    pub fn zero_mode(&self) -> usize {
        0
    }

    /// Visit every mode: flat index, signed wavevector (unused axes are 0)
    /// and |k|². Iteration order is the flat row-major order, which all
    /// reductions in this crate rely on for determinism.
    #[inline]
    pub fn for_each_mode<F: FnMut(usize, [i64; 3], f64)>(&self, mut f: F) {
        let s = self.size;
        match self.dim {
            2 => {
                let mut idx = 0;
                for i0 in 0..s {
                    let k0 = self.wavenumber(i0);
                    for i1 in 0..s {
                        let k1 = self.wavenumber(i1);
                        let k2 = (k0 * k0 + k1 * k1) as f64;
                        f(idx, [k0, k1, 0], k2);
                        idx += 1;
                    }
                }
            }
            3 => {
                let mut idx = 0;
                for i0 in 0..s {
                    let k0 = self.wavenumber(i0);
                    for i1 in 0..s {
                        let k1 = self.wavenumber(i1);
                        for i2 in 0..s {
                            let k2v = self.wavenumber(i2);
                            let k2 = (k0 * k0 + k1 * k1 + k2v * k2v) as f64;
                            f(idx, [k0, k1, k2v], k2);
                            idx += 1;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    /// Flat index of the mode with the given signed wavevector.
    pub fn mode_index(&self, k: [i64; 3]) -> usize {
        let s = self.size as i64;
        let wrap = |c: i64| -> usize { (c.rem_euclid(s)) as usize };
        match self.dim {
            2 => wrap(k[0]) * self.size + wrap(k[1]),
            3 => (wrap(k[0]) * self.size + wrap(k[1])) * self.size + wrap(k[2]),
            _ => unreachable!(),
        }
    }
}
