//! Spectral and pointwise operators: Fourier multipliers (fractional
//! Laplacian, derivatives, Leray projection, dealiasing), the velocity-
//! gradient decomposition D(u) + Ω(u) = ∇u, the objective-derivative bilinear
//! form Q, and dealiased advection.
//!
//! Derivatives act in spectral space; products act pointwise in physical
//! space and are followed by the 2/3-rule spectral cutoff.

use crate::error::{Error, Result};
use crate::field::{sym_index, FieldLike, ScalarField, SymTensorField, TensorField, VectorField};
use num_complex::Complex64;

fn require_spectral<F: FieldLike>(f: &F) -> Result<()> {
    match f.repr() {
        crate::field::Repr::Spectral => Ok(()),
        crate::field::Repr::Physical => Err(Error::WrongRepresentation {
            expected: "spectral",
            got: "physical",
        }),
    }
}

fn require_physical<F: FieldLike>(f: &F) -> Result<()> {
    match f.repr() {
        crate::field::Repr::Physical => Ok(()),
        crate::field::Repr::Spectral => Err(Error::WrongRepresentation {
            expected: "physical",
            got: "spectral",
        }),
    }
}

/// Apply a real radial-ish multiplier m(k, |k|²) to every component.
pub(crate) fn map_modes<F: FieldLike>(f: &F, m: impl Fn([i64; 3], f64) -> f64) -> Result<F> {
    require_spectral(f)?;
    let grid = f.grid();
    let mut comps = Vec::with_capacity(f.ncomp());
    for c in 0..f.ncomp() {
        let src = f.spec(c)?;
        let mut out = vec![Complex64::default(); grid.len()];
        grid.for_each_mode(|idx, k, k2| {
            out[idx] = src[idx] * m(k, k2);
        });
        comps.push(ScalarField::from_spectral(grid, out)?);
    }
    F::from_scalar_components(comps)
}

/// Λ^s = (−Δ)^{s/2}, the multiplier |k|^s. Λ⁰ is the identity. For s < 0 the
/// input must be mean-zero (Λ^{−1} is undefined on constants); the zero mode
/// of the output is zero for every s ≠ 0.
pub fn fractional_laplacian<F: FieldLike>(f: &F, s: f64) -> Result<F> {
    require_spectral(f)?;
    if s == 0.0 {
        return Ok(f.clone());
    }
    if s < 0.0 {
        let scale = crate::field::norm_l2(f) / f.grid().volume().sqrt();
        let mean = f.mean_abs_max();
        if mean > 1e-10 * (scale + f64::MIN_POSITIVE) {
            return Err(Error::NonZeroMean {
                op: "fractional_laplacian with s < 0",
                mean,
            });
        }
    }
    map_modes(f, |_, k2| if k2 == 0.0 { 0.0 } else { k2.powf(0.5 * s) })
}

/// Zero every mode with any |k_axis| above dealias_fraction · size/2.
pub fn dealias<F: FieldLike>(f: &F) -> Result<F> {
    let cutoff = f.grid().dealias_cutoff();
    map_modes(f, |k, _| {
        if k.iter().any(|&c| (c.abs() as f64) > cutoff) {
            0.0
        } else {
            1.0
        }
    })
}

/// ∂_axis in spectral space (multiplier i·k_axis).
pub fn derivative(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    require_spectral(f)?;
    let grid = f.grid();
    if axis >= grid.dim() {
        return Err(Error::InvalidParameter(format!(
            "axis {axis} out of range for dim {}",
            grid.dim()
        )));
    }
    let src = f.spec(0)?;
    let mut out = vec![Complex64::default(); grid.len()];
    grid.for_each_mode(|idx, k, _| {
        out[idx] = src[idx] * Complex64::new(0.0, k[axis] as f64);
    });
    ScalarField::from_spectral(grid, out)
}

/// Full velocity gradient ∇u as a tensor with entries (i, j) = ∂_j u_i.
pub fn gradient(u: &VectorField) -> Result<TensorField> {
    require_spectral(u)?;
    let dim = u.grid().dim();
    let mut comps = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        let ui = u.component(i);
        for j in 0..dim {
            comps.push(derivative(&ui, j)?);
        }
    }
    TensorField::from_scalar_components(comps)
}

/// div v = Σ_j ∂_j v_j.
pub fn divergence(v: &VectorField) -> Result<ScalarField> {
    require_spectral(v)?;
    let grid = v.grid();
    let dim = grid.dim();
    let mut out = vec![Complex64::default(); grid.len()];
    let mut specs = Vec::with_capacity(dim);
    for j in 0..dim {
        specs.push(v.spec(j)?);
    }
    grid.for_each_mode(|idx, k, _| {
        let mut acc = Complex64::default();
        for (j, s) in specs.iter().enumerate() {
            acc += s[idx] * Complex64::new(0.0, k[j] as f64);
        }
        out[idx] = acc;
    });
    ScalarField::from_spectral(grid, out)
}

/// Row divergence of a symmetric tensor: (div τ)_i = Σ_j ∂_j τ_ij.
pub fn divergence_sym(tau: &SymTensorField) -> Result<VectorField> {
    require_spectral(tau)?;
    let grid = tau.grid();
    let dim = grid.dim();
    let mut specs = Vec::with_capacity(tau.ncomp());
    for c in 0..tau.ncomp() {
        specs.push(tau.spec(c)?);
    }
    let mut comps = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut out = vec![Complex64::default(); grid.len()];
        grid.for_each_mode(|idx, k, _| {
            let mut acc = Complex64::default();
            // k is padded to three entries; only the first dim are live
            #[allow(clippy::needless_range_loop)]
            for j in 0..dim {
                let c = sym_index(dim, i.min(j), i.max(j));
                acc += specs[c][idx] * Complex64::new(0.0, k[j] as f64);
            }
            out[idx] = acc;
        });
        comps.push(ScalarField::from_spectral(grid, out)?);
    }
    VectorField::from_scalar_components(comps)
}

/// Leray projection ℙ = I − ∇Δ^{−1}div, per mode v̂ − k(k·v̂)/|k|². The zero
/// mode is left untouched (mean-zero fields keep it zero).
pub fn leray_project(v: &VectorField) -> Result<VectorField> {
    require_spectral(v)?;
    let grid = v.grid();
    let dim = grid.dim();
    let mut specs = Vec::with_capacity(dim);
    for j in 0..dim {
        specs.push(v.spec(j)?.to_vec());
    }
    let mut out = vec![vec![Complex64::default(); grid.len()]; dim];
    grid.for_each_mode(|idx, k, k2| {
        if k2 == 0.0 {
            for i in 0..dim {
                out[i][idx] = specs[i][idx];
            }
            return;
        }
        let mut kdotv = Complex64::default();
        for j in 0..dim {
            kdotv += specs[j][idx] * k[j] as f64;
        }
        let factor = kdotv / k2;
        for i in 0..dim {
            out[i][idx] = specs[i][idx] - factor * k[i] as f64;
        }
    });
    let comps = out
        .into_iter()
        .map(|o| ScalarField::from_spectral(grid, o))
        .collect::<Result<Vec<_>>>()?;
    VectorField::from_scalar_components(comps)
}

/// Deformation tensor D(u) = ½(∇u + ∇uᵀ).
pub fn deformation(u: &VectorField) -> Result<SymTensorField> {
    let g = gradient(u)?;
    let dim = u.grid().dim();
    let mut comps = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            let gij = g.entry(i, j);
            let gji = g.entry(j, i);
            comps.push(gij.lin(0.5, &gji, 0.5)?);
        }
    }
    SymTensorField::from_scalar_components(comps)
}

/// Vorticity tensor Ω(u) = ½(∇u − ∇uᵀ), returned as a full tensor whose
/// values are antisymmetric. The lower triangle is the negated upper
/// triangle, so Ω + Ωᵀ = 0 holds bit-exactly; D(u) + Ω(u) reconstructs ∇u to
/// roundoff.
pub fn vorticity(u: &VectorField) -> Result<TensorField> {
    let g = gradient(u)?;
    let dim = u.grid().dim();
    let grid = u.grid();
    let mut comps: Vec<Option<ScalarField>> = vec![None; dim * dim];
    for i in 0..dim {
        comps[i * dim + i] = Some(ScalarField::zeros(grid, crate::field::Repr::Spectral));
        for j in (i + 1)..dim {
            let w = g.entry(i, j).lin(0.5, &g.entry(j, i), -0.5)?;
            comps[j * dim + i] = Some(w.scale(-1.0));
            comps[i * dim + j] = Some(w);
        }
    }
    TensorField::from_scalar_components(comps.into_iter().map(Option::unwrap).collect())
}

/// Q(τ, ∇u) = τΩ − Ωτ + b(Dτ + τD), evaluated pointwise in physical space.
/// D and Ω are extracted from the gradient tensor at each lattice point; the
/// result is symmetric whenever τ is (upper triangle stored directly).
pub fn q_bilinear(tau: &SymTensorField, grad_u: &TensorField, b: f64) -> Result<SymTensorField> {
    require_physical(tau)?;
    require_physical(grad_u)?;
    let grid = tau.grid();
    if grid != grad_u.grid() {
        return Err(Error::GridMismatch);
    }
    let dim = grid.dim();
    let n = grid.len();

    let mut tau_comps = Vec::with_capacity(tau.ncomp());
    for c in 0..tau.ncomp() {
        tau_comps.push(tau.phys(c)?);
    }
    let mut g_comps = Vec::with_capacity(grad_u.ncomp());
    for c in 0..grad_u.ncomp() {
        g_comps.push(grad_u.phys(c)?);
    }

    let nsym = SymTensorField::comp_count(dim);
    let mut out = vec![vec![0.0f64; n]; nsym];
    let mut t = [0.0f64; 9];
    let mut dm = [0.0f64; 9];
    let mut om = [0.0f64; 9];
    for idx in 0..n {
        for i in 0..dim {
            for j in 0..dim {
                t[i * dim + j] = tau_comps[sym_index(dim, i.min(j), i.max(j))][idx];
                let gij = g_comps[i * dim + j][idx];
                let gji = g_comps[j * dim + i][idx];
                let d = 0.5 * (gij + gji);
                dm[i * dim + j] = d;
                om[i * dim + j] = gij - d;
            }
        }
        let mut c = 0;
        for i in 0..dim {
            for j in i..dim {
                let mut acc = 0.0;
                for m in 0..dim {
                    acc += t[i * dim + m] * om[m * dim + j] - om[i * dim + m] * t[m * dim + j];
                    if b != 0.0 {
                        acc += b
                            * (dm[i * dim + m] * t[m * dim + j] + t[i * dim + m] * dm[m * dim + j]);
                    }
                }
                out[c][idx] = acc;
                c += 1;
            }
        }
    }
    let comps = out
        .into_iter()
        .map(|o| ScalarField::from_physical(grid, o))
        .collect::<Result<Vec<_>>>()?;
    SymTensorField::from_scalar_components(comps)
}

/// Dealiased advection (u·∇)f: spectral derivatives, pointwise contraction
/// with the physical velocity, then the 2/3-rule cutoff. Works for any field
/// kind; u must be physical and f spectral.
pub fn advect<F: FieldLike>(u: &VectorField, f: &F) -> Result<F> {
    require_physical(u)?;
    require_spectral(f)?;
    let grid = f.grid();
    if grid != u.grid() {
        return Err(Error::GridMismatch);
    }
    let dim = grid.dim();
    let n = grid.len();
    let mut comps = Vec::with_capacity(f.ncomp());
    for c in 0..f.ncomp() {
        let fc = f.component(c);
        let mut acc = vec![0.0f64; n];
        for m in 0..dim {
            let dphys = derivative(&fc, m)?.to_physical();
            let d = dphys.phys(0)?;
            let um = u.phys(m)?;
            for i in 0..n {
                acc[i] += um[i] * d[i];
            }
        }
        let spec = ScalarField::from_physical(grid, acc)?.to_spectral();
        comps.push(dealias(&spec)?);
    }
    F::from_scalar_components(comps)
}

/// ‖div u‖_{L²} / ‖∇u‖_{L²}; 0 for the zero field.
pub fn divergence_residual(u: &VectorField) -> Result<f64> {
    let div_norm = crate::field::norm_l2(&divergence(u)?);
    let grad_norm = crate::field::norm_l2(&gradient(u)?);
    Ok(div_norm / (grad_norm + f64::MIN_POSITIVE))
}

pub(crate) fn require_divergence_free(u: &VectorField, op: &'static str) -> Result<()> {
    let residual = divergence_residual(u)?;
    if residual > 1e-10 {
        return Err(Error::NotDivergenceFree { op, residual });
    }
    Ok(())
}

/// Zero the k = 0 coefficient of every component (spectral form).
pub fn clear_zero_mode<F: FieldLike>(f: &F) -> Result<F> {
    require_spectral(f)?;
    let mut out = f.clone();
    let zm = f.grid().zero_mode();
    for c in 0..f.ncomp() {
        out.core_mut().spec_mut(c)?[zm] = Complex64::default();
    }
    Ok(out)
}
