//! Field containers over a [`Grid`]: scalars, vectors, symmetric tensors and
//! full rank-2 tensors, each carrying a representation tag (physical lattice
//! values or Fourier coefficients).
//!
//! Fields are immutable values: every operation returns a new field. The
//! spectral layout matches the FFT convention in [`crate::fft`]: coefficients
//! are unnormalized forward-transform outputs, so a physical function
//! f(x) = Σ_k a_k e^{ik·x} is stored spectrally as f̂(k) = N·a_k with
//! N = size^dim.
//!
//! Symmetric tensors store the upper triangle; their L² pairing weights the
//! off-diagonal components twice so that inner products agree with the full
//! Frobenius contraction Σ_{ij} A_ij B_ij.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid;
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Repr {
    Physical,
    Spectral,
}

impl Repr {
    pub fn name(self) -> &'static str {
        match self {
            Repr::Physical => "physical",
            Repr::Spectral => "spectral",
        }
    }
}

#[derive(Clone, Debug)]
enum FieldData {
    Physical(Vec<Vec<f64>>),
    Spectral(Vec<Vec<Complex64>>),
}

/// Shared storage behind every field kind.
#[derive(Clone, Debug)]
pub struct FieldCore {
    grid: Grid,
    data: FieldData,
}

impl FieldCore {
    fn zeros(grid: Grid, ncomp: usize, repr: Repr) -> Self {
        let data = match repr {
            Repr::Physical => FieldData::Physical(vec![vec![0.0; grid.len()]; ncomp]),
            Repr::Spectral => {
                FieldData::Spectral(vec![vec![Complex64::default(); grid.len()]; ncomp])
            }
        };
        FieldCore { grid, data }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn repr(&self) -> Repr {
        match self.data {
            FieldData::Physical(_) => Repr::Physical,
            FieldData::Spectral(_) => Repr::Spectral,
        }
    }

    pub fn ncomp(&self) -> usize {
        match &self.data {
            FieldData::Physical(c) => c.len(),
            FieldData::Spectral(c) => c.len(),
        }
    }

    fn to_spectral(&self) -> FieldCore {
        match &self.data {
            FieldData::Spectral(_) => self.clone(),
            FieldData::Physical(comps) => {
                let spec = comps
                    .iter()
                    .map(|c| {
                        let mut buf: Vec<Complex64> =
                            c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                        fft::forward(&self.grid, &mut buf);
                        buf
                    })
                    .collect();
                FieldCore {
                    grid: self.grid,
                    data: FieldData::Spectral(spec),
                }
            }
        }
    }

    fn to_physical(&self) -> FieldCore {
        match &self.data {
            FieldData::Physical(_) => self.clone(),
            FieldData::Spectral(comps) => {
                let phys = comps
                    .iter()
                    .map(|c| {
                        let mut buf = c.clone();
                        fft::inverse(&self.grid, &mut buf);
                        // Hermitian inputs land on the real axis; imaginary
                        // residue is FFT roundoff and is dropped.
                        buf.iter().map(|v| v.re).collect::<Vec<f64>>()
                    })
                    .collect();
                FieldCore {
                    grid: self.grid,
                    data: FieldData::Physical(phys),
                }
            }
        }
    }

    pub(crate) fn phys(&self, c: usize) -> Result<&[f64]> {
        match &self.data {
            FieldData::Physical(comps) => Ok(&comps[c]),
            FieldData::Spectral(_) => Err(Error::WrongRepresentation {
                expected: "physical",
                got: "spectral",
            }),
        }
    }

    pub(crate) fn spec(&self, c: usize) -> Result<&[Complex64]> {
        match &self.data {
            FieldData::Spectral(comps) => Ok(&comps[c]),
            FieldData::Physical(_) => Err(Error::WrongRepresentation {
                expected: "spectral",
                got: "physical",
            }),
        }
    }

    pub(crate) fn spec_mut(&mut self, c: usize) -> Result<&mut [Complex64]> {
        match &mut self.data {
            FieldData::Spectral(comps) => Ok(&mut comps[c]),
            FieldData::Physical(_) => Err(Error::WrongRepresentation {
                expected: "spectral",
                got: "physical",
            }),
        }
    }

    /// Mean (zero mode) of one component, available in either representation.
    fn mean(&self, c: usize) -> f64 {
        match &self.data {
            FieldData::Physical(comps) => comps[c].iter().sum::<f64>() / self.grid.len() as f64,
            FieldData::Spectral(comps) => {
                comps[c][self.grid.zero_mode()].re / self.grid.len() as f64
            }
        }
    }

    fn is_finite(&self) -> bool {
        match &self.data {
            FieldData::Physical(comps) => comps.iter().flatten().all(|v| v.is_finite()),
            FieldData::Spectral(comps) => comps
                .iter()
                .flatten()
                .all(|v| v.re.is_finite() && v.im.is_finite()),
        }
    }

    fn lin(&self, a: f64, rhs: &FieldCore, b: f64) -> Result<FieldCore> {
        if self.grid != rhs.grid {
            return Err(Error::GridMismatch);
        }
        match (&self.data, &rhs.data) {
            (FieldData::Physical(x), FieldData::Physical(y)) => {
                let comps = x
                    .iter()
                    .zip(y)
                    .map(|(xc, yc)| xc.iter().zip(yc).map(|(p, q)| a * p + b * q).collect())
                    .collect();
                Ok(FieldCore {
                    grid: self.grid,
                    data: FieldData::Physical(comps),
                })
            }
            (FieldData::Spectral(x), FieldData::Spectral(y)) => {
                let comps = x
                    .iter()
                    .zip(y)
                    .map(|(xc, yc)| xc.iter().zip(yc).map(|(p, q)| a * p + b * q).collect())
                    .collect();
                Ok(FieldCore {
                    grid: self.grid,
                    data: FieldData::Spectral(comps),
                })
            }
            _ => Err(Error::ReprMismatch),
        }
    }

    fn scale(&self, a: f64) -> FieldCore {
        match &self.data {
            FieldData::Physical(x) => FieldCore {
                grid: self.grid,
                data: FieldData::Physical(
                    x.iter()
                        .map(|c| c.iter().map(|v| a * v).collect())
                        .collect(),
                ),
            },
            FieldData::Spectral(x) => FieldCore {
                grid: self.grid,
                data: FieldData::Spectral(
                    x.iter()
                        .map(|c| c.iter().map(|v| a * v).collect())
                        .collect(),
                ),
            },
        }
    }
}

mod sealed {
    pub trait Sealed {}
}

/// Common surface of all field kinds. The multiplier, norm and transform
/// machinery in this crate is generic over this trait.
pub trait FieldLike: Clone + sealed::Sealed {
    const KIND: &'static str;
    fn comp_count(dim: usize) -> usize;
    /// Weight of component `c` in the L² pairing (2 for off-diagonal
    /// symmetric-tensor entries, 1 otherwise).
    fn comp_weight(dim: usize, c: usize) -> f64;

    #[doc(hidden)]
    fn core(&self) -> &FieldCore;
    #[doc(hidden)]
    fn core_mut(&mut self) -> &mut FieldCore;
    #[doc(hidden)]
    fn from_core(core: FieldCore) -> Self;

    fn grid(&self) -> Grid {
        self.core().grid()
    }

    fn repr(&self) -> Repr {
        self.core().repr()
    }

    fn ncomp(&self) -> usize {
        self.core().ncomp()
    }

    fn zeros(grid: Grid, repr: Repr) -> Self {
        Self::from_core(FieldCore::zeros(grid, Self::comp_count(grid.dim()), repr))
    }

    fn to_spectral(&self) -> Self {
        Self::from_core(self.core().to_spectral())
    }

    fn to_physical(&self) -> Self {
        Self::from_core(self.core().to_physical())
    }

    /// Read-only view of one physical component.
    fn phys(&self, c: usize) -> Result<&[f64]> {
        self.core().phys(c)
    }

    /// Read-only view of one spectral component.
    fn spec(&self, c: usize) -> Result<&[Complex64]> {
        self.core().spec(c)
    }

    fn component(&self, c: usize) -> ScalarField {
        let core = self.core();
        let data = match core.repr() {
            Repr::Physical => FieldData::Physical(vec![core.phys(c).unwrap().to_vec()]),
            Repr::Spectral => FieldData::Spectral(vec![core.spec(c).unwrap().to_vec()]),
        };
        ScalarField(FieldCore {
            grid: core.grid(),
            data,
        })
    }

    /// Assemble from per-component scalars (same grid and representation).
    fn from_scalar_components(comps: Vec<ScalarField>) -> Result<Self> {
        check_component_list(&comps, Self::comp_count(comps[0].grid().dim()))?;
        Ok(Self::from_core(assemble(comps)))
    }

    fn add(&self, rhs: &Self) -> Result<Self> {
        Ok(Self::from_core(self.core().lin(1.0, rhs.core(), 1.0)?))
    }

    fn sub(&self, rhs: &Self) -> Result<Self> {
        Ok(Self::from_core(self.core().lin(1.0, rhs.core(), -1.0)?))
    }

    /// a·self + b·rhs.
    fn lin(&self, a: f64, rhs: &Self, b: f64) -> Result<Self> {
        Ok(Self::from_core(self.core().lin(a, rhs.core(), b)?))
    }

    fn scale(&self, a: f64) -> Self {
        Self::from_core(self.core().scale(a))
    }

    /// Largest |mean| over components.
    fn mean_abs_max(&self) -> f64 {
        (0..self.ncomp())
            .map(|c| self.core().mean(c).abs())
            .fold(0.0, f64::max)
    }

    fn is_finite(&self) -> bool {
        self.core().is_finite()
    }
}

fn check_component_list(comps: &[ScalarField], expected: usize) -> Result<(Grid, Repr)> {
    if comps.is_empty() {
        return Err(Error::InvalidParameter("empty component list".into()));
    }
    let grid = comps[0].grid();
    let repr = comps[0].repr();
    if comps.len() != expected {
        return Err(Error::InvalidParameter(format!(
            "expected {expected} components, got {}",
            comps.len()
        )));
    }
    for c in comps {
        if c.grid() != grid {
            return Err(Error::GridMismatch);
        }
        if c.repr() != repr {
            return Err(Error::ReprMismatch);
        }
    }
    Ok((grid, repr))
}

fn assemble(comps: Vec<ScalarField>) -> FieldCore {
    let grid = comps[0].grid();
    let repr = comps[0].repr();
    let data = match repr {
        Repr::Physical => FieldData::Physical(
            comps
                .into_iter()
                .map(|c| match c.0.data {
                    FieldData::Physical(mut v) => v.pop().unwrap(),
                    _ => unreachable!(),
                })
                .collect(),
        ),
        Repr::Spectral => FieldData::Spectral(
            comps
                .into_iter()
                .map(|c| match c.0.data {
                    FieldData::Spectral(mut v) => v.pop().unwrap(),
                    _ => unreachable!(),
                })
                .collect(),
        ),
    };
    FieldCore { grid, data }
}

/// Index of the (i, j) entry, i ≤ j, in upper-triangle storage.
pub fn sym_index(dim: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < dim);
    i * dim - i * (i + 1) / 2 + j
}

#[derive(Clone, Debug)]
pub struct ScalarField(FieldCore);

#[derive(Clone, Debug)]
pub struct VectorField(FieldCore);

#[derive(Clone, Debug)]
pub struct SymTensorField(FieldCore);

#[derive(Clone, Debug)]
pub struct TensorField(FieldCore);

impl sealed::Sealed for ScalarField {}
impl sealed::Sealed for VectorField {}
impl sealed::Sealed for SymTensorField {}
impl sealed::Sealed for TensorField {}

impl FieldLike for ScalarField {
    const KIND: &'static str = "scalar";
    fn comp_count(_dim: usize) -> usize {
        1
    }
    fn comp_weight(_dim: usize, _c: usize) -> f64 {
        1.0
    }
    fn core(&self) -> &FieldCore {
        &self.0
    }
    fn core_mut(&mut self) -> &mut FieldCore {
        &mut self.0
    }
    fn from_core(core: FieldCore) -> Self {
        debug_assert_eq!(core.ncomp(), 1);
        ScalarField(core)
    }
}

impl FieldLike for VectorField {
    const KIND: &'static str = "vector";
    fn comp_count(dim: usize) -> usize {
        dim
    }
    fn comp_weight(_dim: usize, _c: usize) -> f64 {
        1.0
    }
    fn core(&self) -> &FieldCore {
        &self.0
    }
    fn core_mut(&mut self) -> &mut FieldCore {
        &mut self.0
    }
    fn from_core(core: FieldCore) -> Self {
        debug_assert_eq!(core.ncomp(), core.grid().dim());
        VectorField(core)
    }
}

impl FieldLike for SymTensorField {
    const KIND: &'static str = "symmetric tensor";
    fn comp_count(dim: usize) -> usize {
        dim * (dim + 1) / 2
    }
    fn comp_weight(dim: usize, c: usize) -> f64 {
        // diagonal entries appear once in the Frobenius sum, off-diagonal twice
        for i in 0..dim {
            for j in i..dim {
                if sym_index(dim, i, j) == c {
                    return if i == j { 1.0 } else { 2.0 };
                }
            }
        }
        unreachable!()
    }
    fn core(&self) -> &FieldCore {
        &self.0
    }
    fn core_mut(&mut self) -> &mut FieldCore {
        &mut self.0
    }
    fn from_core(core: FieldCore) -> Self {
        debug_assert_eq!(core.ncomp(), Self::comp_count(core.grid().dim()));
        SymTensorField(core)
    }
}

impl FieldLike for TensorField {
    const KIND: &'static str = "tensor";
    fn comp_count(dim: usize) -> usize {
        dim * dim
    }
    fn comp_weight(_dim: usize, _c: usize) -> f64 {
        1.0
    }
    fn core(&self) -> &FieldCore {
        &self.0
    }
    fn core_mut(&mut self) -> &mut FieldCore {
        &mut self.0
    }
    fn from_core(core: FieldCore) -> Self {
        debug_assert_eq!(core.ncomp(), Self::comp_count(core.grid().dim()));
        TensorField(core)
    }
}

impl ScalarField {
    pub fn from_physical(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} lattice values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(ScalarField(FieldCore {
            grid,
            data: FieldData::Physical(vec![values]),
        }))
    }

    pub fn from_spectral(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} Fourier coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(ScalarField(FieldCore {
            grid,
            data: FieldData::Spectral(vec![coeffs]),
        }))
    }
}

impl VectorField {
    pub fn from_components(comps: Vec<ScalarField>) -> Result<Self> {
        let (grid, _) = check_component_list(&comps, comps[0].grid().dim())?;
        let _ = grid;
        Ok(VectorField(assemble(comps)))
    }
}

impl SymTensorField {
    pub fn from_components(comps: Vec<ScalarField>) -> Result<Self> {
        let dim = comps[0].grid().dim();
        check_component_list(&comps, dim * (dim + 1) / 2)?;
        Ok(SymTensorField(assemble(comps)))
    }

    /// Component (i, j) with i ≤ j.
    pub fn entry(&self, i: usize, j: usize) -> ScalarField {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.component(sym_index(self.grid().dim(), i, j))
    }
}

impl TensorField {
    pub fn from_components(comps: Vec<ScalarField>) -> Result<Self> {
        let dim = comps[0].grid().dim();
        check_component_list(&comps, dim * dim)?;
        Ok(TensorField(assemble(comps)))
    }

    pub fn entry(&self, i: usize, j: usize) -> ScalarField {
        self.component(i * self.grid().dim() + j)
    }
}

/// L² inner product on the torus. Physical form uses the lattice rectangle
/// rule (exact for band-limited fields); spectral form uses Parseval. Both
/// representations of the same pair agree to roundoff. Symmetric tensors are
/// paired with the full Frobenius contraction.
pub fn inner_l2<F: FieldLike>(a: &F, b: &F) -> Result<f64> {
    let grid = a.grid();
    if grid != b.grid() {
        return Err(Error::GridMismatch);
    }
    if a.repr() != b.repr() {
        return Err(Error::ReprMismatch);
    }
    let dim = grid.dim();
    let mut total = 0.0f64;
    match a.repr() {
        Repr::Physical => {
            let w0 = grid.cell_volume();
            for c in 0..a.ncomp() {
                let (x, y) = (a.phys(c)?, b.phys(c)?);
                let mut acc = 0.0f64;
                for (p, q) in x.iter().zip(y) {
                    acc += p * q;
                }
                total += F::comp_weight(dim, c) * w0 * acc;
            }
        }
        Repr::Spectral => {
            let w0 = grid.volume() / (grid.len() as f64 * grid.len() as f64);
            for c in 0..a.ncomp() {
                let (x, y) = (a.spec(c)?, b.spec(c)?);
                let mut acc = 0.0f64;
                for (p, q) in x.iter().zip(y) {
                    acc += p.re * q.re + p.im * q.im;
                }
                total += F::comp_weight(dim, c) * w0 * acc;
            }
        }
    }
    Ok(total)
}

pub fn norm_l2<F: FieldLike>(f: &F) -> f64 {
    inner_l2(f, f)
        .expect("self pairing cannot mismatch")
        .max(0.0)
        .sqrt()
}

/// Errors unless the field mean is negligible relative to its overall size.
pub(crate) fn require_mean_zero<F: FieldLike>(f: &F, op: &'static str) -> Result<()> {
    let scale = norm_l2(f) / f.grid().volume().sqrt() + f64::MIN_POSITIVE;
    let mean = f.mean_abs_max();
    if mean > 1e-10 * scale {
        return Err(Error::NonZeroMean { op, mean });
    }
    Ok(())
}

/// Largest pointwise magnitude of a physical field: the Euclidean norm over
/// stored components (full Frobenius for [`TensorField`]).
pub fn max_pointwise_norm<F: FieldLike>(v: &F) -> Result<f64> {
    let n = v.grid().len();
    let mut best = 0.0f64;
    for idx in 0..n {
        let mut s = 0.0;
        for c in 0..v.ncomp() {
            let x = v.phys(c)?[idx];
            s += x * x;
        }
        best = best.max(s);
    }
    Ok(best.sqrt())
}
