//! Seeded band-limited random fields.
//!
//! Fields are built by enumerating integer modes inside a spectral annulus in
//! a fixed lexicographic order that does not depend on the grid resolution.
//! The same (seed, slope, band) therefore describes the same physical
//! function on every grid that resolves the band, which is what makes
//! refinement comparisons meaningful.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::{FieldLike, ScalarField, SymTensorField, VectorField};
use crate::grid::Grid;
use crate::ops::leray_project;

/// Closed spectral annulus lo ≤ |k| ≤ hi. The lower edge must be positive:
/// the zero mode carries the mean and is never populated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    lo: f64,
    hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Band> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter("band edges must be finite".into()));
        }
        if lo <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "band lower edge must be positive (zero mode carries the mean), got {lo}"
            )));
        }
        if hi < lo {
            return Err(Error::InvalidParameter(format!(
                "band is empty: lo = {lo} > hi = {hi}"
            )));
        }
        Ok(Band { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    fn contains(&self, k: [i64; 3]) -> bool {
        let r2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        let r = r2.sqrt();
        self.lo <= r && r <= self.hi
    }
}

/// Canonical representatives of ± mode pairs inside the band, in lexicographic
/// order over (k₀, k₁, k₂). A representative is the member of {k, −k} whose
/// first nonzero component is positive. The enumeration depends only on the
/// band and the dimension, never on the grid.
fn canonical_band_modes(dim: usize, band: Band) -> Vec<[i64; 3]> {
    let h = band.hi.floor() as i64;
    let range = |active: bool| if active { -h..=h } else { 0..=0 };
    let mut modes = Vec::new();
    for k0 in range(true) {
        for k1 in range(true) {
            for k2 in range(dim == 3) {
                let k = [k0, k1, k2];
                if !band.contains(k) {
                    continue;
                }
                let first = *k.iter().find(|&&c| c != 0).expect("band excludes 0");
                if first > 0 {
                    modes.push(k);
                }
            }
        }
    }
    modes
}

/// Shared builder: draws one complex standard normal per (mode, component) in
/// enumeration order and writes N·z·|k|^slope at k, the conjugate at −k.
fn fill_band_components(
    grid: Grid,
    seed: u64,
    slope: f64,
    band: Band,
    ncomp: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let nyquist = (grid.size() / 2) as f64;
    if band.hi >= nyquist {
        return Err(Error::InvalidParameter(format!(
            "band upper edge {} not resolvable on grid of size {} (needs hi < {})",
            band.hi,
            grid.size(),
            nyquist
        )));
    }
    let modes = canonical_band_modes(grid.dim(), band);
    if modes.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "band [{}, {}] contains no integer modes",
            band.lo, band.hi
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.len() as f64;
    let mut comps = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; ncomp];
    for k in modes {
        let r = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        let amp = n * r.powf(slope);
        let idx = grid.mode_index(k);
        let neg = grid.mode_index([-k[0], -k[1], -k[2]]);
        for comp in comps.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(re, im) * amp;
            comp[idx] = z;
            comp[neg] = z.conj();
        }
    }
    Ok(comps)
}

fn assemble<F: FieldLike>(grid: Grid, comps: Vec<Vec<Complex64>>) -> Result<F> {
    let scalars = comps
        .into_iter()
        .map(|c| ScalarField::from_spectral(grid, c))
        .collect::<Result<Vec<_>>>()?;
    F::from_scalar_components(scalars)
}

/// Mean-zero real scalar field with spectral support in the band, spectral
/// amplitude ∝ |k|^slope, reproducible from the seed.
pub fn random_scalar_field(grid: Grid, seed: u64, slope: f64, band: Band) -> Result<ScalarField> {
    let comps = fill_band_components(grid, seed, slope, band, 1)?;
    assemble(grid, comps)
}

/// Divergence-free mean-zero vector field: band-limited components, Leray
/// projected. Projection acts mode by mode, so band support is preserved.
pub fn random_divfree_field(grid: Grid, seed: u64, slope: f64, band: Band) -> Result<VectorField> {
    let comps = fill_band_components(grid, seed, slope, band, grid.dim())?;
    let raw: VectorField = assemble(grid, comps)?;
    leray_project(&raw)
}

/// Symmetric mean-zero tensor field: the upper triangle is drawn, the rest
/// follows from the storage layout.
pub fn random_symtensor_field(
    grid: Grid,
    seed: u64,
    slope: f64,
    band: Band,
) -> Result<SymTensorField> {
    let ncomp = SymTensorField::comp_count(grid.dim());
    let comps = fill_band_components(grid, seed, slope, band, ncomp)?;
    assemble(grid, comps)
}
