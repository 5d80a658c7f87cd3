//! Littlewood–Paley decomposition and the norms built on it.
//!
//! All block operators are Fourier multipliers by a fixed smooth radial
//! profile, so everything here commutes exactly with the operators in
//! [`crate::ops`] up to floating-point rounding. The dyadic ladder is
//! truncated to the band indices a grid can resolve; partition of unity holds
//! on the safe annulus (4/3)·2^{j_min} ≤ |k| ≤ (3/4)·2^{j_max} and degrades
//! on the edge bands outside it, which is inherent to any finite grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{norm_l2, require_mean_zero, FieldLike};
use crate::grid::Grid;
use crate::ops::map_modes;

/// Smooth step: 0 for t ≤ 0, 1 for t ≥ 1, e^{−1/t}/(e^{−1/t} + e^{−1/(1−t)})
/// between. Infinitely smooth at both ends.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// The dyadic ladder a grid resolves: radial profiles χ and φ plus the band
/// index range [j_min, j_max].
#[derive(Clone, Copy, Debug)]
pub struct DyadicCutoff {
    j_min: i32,
    j_max: i32,
}

impl DyadicCutoff {
    pub fn new(grid: Grid) -> DyadicCutoff {
        DyadicCutoff {
            j_min: -2,
            j_max: grid.max_band(),
        }
    }

    /// Non-increasing radial bump: 1 on |ξ| ≤ 3/4, 0 on |ξ| ≥ 4/3.
    pub fn chi(&self, r: f64) -> f64 {
        smooth_step((4.0 / 3.0 - r) / (4.0 / 3.0 - 3.0 / 4.0))
    }

    /// Annular profile φ(ξ) = χ(ξ/2) − χ(ξ), supported in 3/4 ≤ |ξ| ≤ 8/3.
    pub fn phi(&self, r: f64) -> f64 {
        self.chi(r / 2.0) - self.chi(r)
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn in_range(&self, j: i32) -> bool {
        self.j_range().contains(&j)
    }

    /// Radii where the truncated ladder still sums to one.
    pub fn safe_annulus(&self) -> (f64, f64) {
        (
            4.0 / 3.0 * 2f64.powi(self.j_min),
            3.0 / 4.0 * 2f64.powi(self.j_max),
        )
    }

    /// Multiplier value of Δ̇_j at radius r, for any integer j (not clamped
    /// to the resolved range).
    pub fn block_multiplier(&self, j: i32, r: f64) -> f64 {
        self.phi(r * 2f64.powi(-j))
    }
}

/// Δ̇_j f. Out-of-range j yields the zero field; callers that care should
/// consult [`DyadicCutoff::in_range`] first.
pub fn dyadic_block<F: FieldLike>(cut: &DyadicCutoff, f: &F, j: i32) -> Result<F> {
    if !cut.in_range(j) {
        return Ok(F::zeros(f.grid(), f.repr()));
    }
    map_modes(f, |_, k2| cut.block_multiplier(j, k2.sqrt()))
}

/// Ṡ_j f = χ(2^{−j}D) f. On mean-zero grid fields this equals
/// Σ_{j' < j} Δ̇_{j'} f because the dyadic sum telescopes to χ and the
/// truncation tail χ(4|k|) vanishes on integer modes.
pub fn low_pass<F: FieldLike>(cut: &DyadicCutoff, f: &F, j: i32) -> Result<F> {
    map_modes(f, |_, k2| cut.chi(k2.sqrt() * 2f64.powi(-j)))
}

/// Splits f into blocks j ≤ n0 and the remainder: f^ℓ = Ṡ_{n0+1} f,
/// f^h = f − f^ℓ, so the two parts recombine to f by construction.
pub fn high_low_split<F: FieldLike>(cut: &DyadicCutoff, f: &F, n0: i32) -> Result<(F, F)> {
    let low = low_pass(cut, f, n0 + 1)?;
    let high = f.lin(1.0, &low, -1.0)?;
    Ok((low, high))
}

/// Which norm a [`BesovSpec`] measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// Homogeneous Ḃ^s_{2,1}.
    HomogeneousBesov,
    /// Inhomogeneous H^s via the multiplier (1 + |k|²)^{s/2}.
    Sobolev,
}

/// Regularity exponent plus norm family; the integrability indices are fixed
/// at p = 2, r = 1, the only ones used anywhere in the toolkit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub kind: NormKind,
}

impl BesovSpec {
    pub fn homogeneous(s: f64) -> BesovSpec {
        BesovSpec {
            s,
            kind: NormKind::HomogeneousBesov,
        }
    }

    pub fn sobolev(s: f64) -> BesovSpec {
        BesovSpec {
            s,
            kind: NormKind::Sobolev,
        }
    }

    pub fn eval<F: FieldLike>(&self, cut: &DyadicCutoff, f: &F) -> Result<f64> {
        match self.kind {
            NormKind::HomogeneousBesov => besov_norm(cut, f, self.s),
            NormKind::Sobolev => sobolev_norm(f, self.s),
        }
    }
}

/// Per-band ledger rows (j, 2^{js}‖Δ̇_j f‖_{L²}) in ascending j.
pub fn besov_block_ledger<F: FieldLike>(
    cut: &DyadicCutoff,
    f: &F,
    s: f64,
) -> Result<Vec<(i32, f64)>> {
    require_mean_zero(f, "besov_norm")?;
    let spectral = f.to_spectral();
    cut.j_range()
        .map(|j| {
            let block = dyadic_block(cut, &spectral, j)?;
            Ok((j, 2f64.powi(j).powf(s) * norm_l2(&block)))
        })
        .collect()
}

/// ‖f‖_{Ḃ^s_{2,1}} = Σ_j 2^{js}‖Δ̇_j f‖_{L²} over the resolved bands,
/// summed in ascending j. Requires mean-zero f: the homogeneous norm does not
/// see the mean, so a nonzero mean would be silently dropped.
pub fn besov_norm<F: FieldLike>(cut: &DyadicCutoff, f: &F, s: f64) -> Result<f64> {
    Ok(besov_block_ledger(cut, f, s)?.iter().map(|(_, w)| w).sum())
}

/// ‖f‖_{H^s} via the multiplier (1 + |k|²)^{s/2}. Defined for any f.
pub fn sobolev_norm<F: FieldLike>(f: &F, s: f64) -> Result<f64> {
    let spectral = f.to_spectral();
    let weighted = map_modes(&spectral, |_, k2| (1.0 + k2).powf(s / 2.0))?;
    Ok(norm_l2(&weighted))
}

/// Time exponent of a Chemin–Lerner norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeNorm {
    L1,
    LInf,
}

/// Trapezoid-rule integral of uniformly sampled values.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    assert_eq!(times.len(), values.len());
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
    }
    acc
}

fn require_uniform_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Ok(());
    }
    let dt = times[1] - times[0];
    if dt <= 0.0 {
        return Err(Error::NonUniformTimes);
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
            return Err(Error::NonUniformTimes);
        }
    }
    Ok(())
}

/// Chemin–Lerner norm L̃^q_T Ḃ^s_{2,1}: the time norm is taken per band
/// (trapezoid rule for q = 1, max for q = ∞) before the weighted sum over
/// bands. By Minkowski this dominates the corresponding L^q_T of the Besov
/// norm.
pub fn chemin_lerner_norm<F: FieldLike>(
    cut: &DyadicCutoff,
    times: &[f64],
    fields: &[F],
    s: f64,
    q: TimeNorm,
) -> Result<f64> {
    if times.len() != fields.len() || fields.is_empty() {
        return Err(Error::InvalidParameter(
            "trajectory needs matching, nonempty times and fields".into(),
        ));
    }
    require_uniform_times(times)?;
    let mut per_band: Vec<Vec<f64>> = Vec::with_capacity(fields.len());
    for f in fields {
        require_mean_zero(f, "chemin_lerner_norm")?;
        let spectral = f.to_spectral();
        let norms = cut
            .j_range()
            .map(|j| Ok(norm_l2(&dyadic_block(cut, &spectral, j)?)))
            .collect::<Result<Vec<f64>>>()?;
        per_band.push(norms);
    }
    let mut total = 0.0;
    for (bi, j) in cut.j_range().enumerate() {
        let series: Vec<f64> = per_band.iter().map(|row| row[bi]).collect();
        let time_norm = match q {
            TimeNorm::L1 => trapezoid(times, &series),
            TimeNorm::LInf => series.iter().fold(0.0f64, |m, &v| m.max(v)),
        };
        total += 2f64.powi(j).powf(s) * time_norm;
    }
    Ok(total)
}

/// sup_{|α| = k} ‖∂^α f‖_{L²} / (2^{jk}‖f‖_{L²}) for a field carried by band
/// j. Bernstein's lemma says this sits in [1/C, C] with C independent of j;
/// the constant is empirical and reported, never asserted. Returns 0 for the
/// zero field.
pub fn bernstein_ratio<F: FieldLike>(f: &F, j: i32, k: u32) -> Result<f64> {
    let base = norm_l2(f);
    if base == 0.0 {
        return Ok(0.0);
    }
    let spectral = f.to_spectral();
    let dim = f.grid().dim();
    let mut sup = 0.0f64;
    for alpha in multi_indices(dim, k) {
        let deriv = map_modes(&spectral, |kvec, _| {
            let mut m = 1.0;
            for (a, &ki) in alpha.iter().enumerate() {
                m *= (kvec[a].abs() as f64).powi(ki as i32);
            }
            m
        })?;
        sup = sup.max(norm_l2(&deriv));
    }
    Ok(sup / (2f64.powi(j).powi(k as i32) * base))
}

/// Multi-indices of total order k in the given dimension, lexicographic.
fn multi_indices(dim: usize, k: u32) -> Vec<Vec<u32>> {
    match dim {
        2 => (0..=k).map(|a| vec![a, k - a]).collect(),
        3 => {
            let mut out = Vec::new();
            for a in 0..=k {
                for b in 0..=(k - a) {
                    out.push(vec![a, b, k - a - b]);
                }
            }
            out
        }
        _ => unreachable!("grid validates dim"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{inner_l2, ScalarField};
    use crate::random::{random_scalar_field, Band};
    use num_complex::Complex64;

    fn grid() -> Grid {
        Grid::new(2, 32).unwrap()
    }

    fn band(lo: f64, hi: f64) -> Band {
        Band::new(lo, hi).unwrap()
    }

    /// Real field carried by the ± pair at integer mode k.
    fn pure_mode(g: Grid, k: [i64; 3]) -> ScalarField {
        let mut spec = vec![Complex64::new(0.0, 0.0); g.len()];
        let n = g.len() as f64;
        spec[g.mode_index(k)] = Complex64::new(0.5 * n, 0.0);
        spec[g.mode_index([-k[0], -k[1], -k[2]])] = Complex64::new(0.5 * n, 0.0);
        ScalarField::from_spectral(g, spec).unwrap()
    }

    #[test]
    fn profile_shape() {
        let cut = DyadicCutoff::new(grid());
        assert_eq!(cut.chi(0.0), 1.0);
        assert_eq!(cut.chi(0.75), 1.0);
        assert_eq!(cut.chi(4.0 / 3.0), 0.0);
        assert_eq!(cut.chi(5.0), 0.0);
        assert!(cut.chi(0.9) > cut.chi(1.0) && cut.chi(1.0) > cut.chi(1.2));

        assert_eq!(cut.phi(0.5), 0.0);
        assert_eq!(cut.phi(0.74), 0.0);
        assert!(cut.phi(1.0) > 0.0 && cut.phi(1.0) < 1.0);
        assert_eq!(cut.phi(1.4), 1.0 - cut.chi(1.4));
        assert_eq!(cut.phi(8.0 / 3.0), 0.0);
        assert_eq!(cut.phi(3.0), 0.0);
    }

    #[test]
    fn partition_of_unity_on_safe_annulus() {
        let g = grid();
        let cut = DyadicCutoff::new(g);
        assert_eq!(cut.j_min(), -2);
        assert_eq!(cut.j_max(), 4);
        let (lo, hi) = cut.safe_annulus();
        assert!(lo < 1.0 && hi == 12.0);
        g.for_each_mode(|_, _, k2| {
            let r = k2.sqrt();
            if r >= 1.0 && r <= hi {
                let sum: f64 = cut.j_range().map(|j| cut.block_multiplier(j, r)).sum();
                assert!((sum - 1.0).abs() <= 1e-12, "deficit at r = {r}: {sum}");
            }
        });
    }

    #[test]
    fn unit_mode_block_support() {
        let g = grid();
        let cut = DyadicCutoff::new(g);
        let f = pure_mode(g, [1, 0, 0]).to_spectral();
        for j in cut.j_range() {
            let norm = norm_l2(&dyadic_block(&cut, &f, j).unwrap());
            if j == -1 || j == 0 {
                assert!(norm > 0.0, "band {j} should carry |k| = 1");
            } else {
                assert_eq!(norm, 0.0, "band {j} should not see |k| = 1");
            }
        }
        // out of range: zero field, flagged by in_range
        assert!(!cut.in_range(99));
        assert_eq!(norm_l2(&dyadic_block(&cut, &f, 99).unwrap()), 0.0);
    }

    #[test]
    fn blocks_reconstruct_band_limited_field() {
        let g = grid();
        let cut = DyadicCutoff::new(g);
        let f = random_scalar_field(g, 17, -1.0, band(1.0, 8.0)).unwrap();
        let mut sum = ScalarField::zeros(g, crate::field::Repr::Spectral);
        for j in cut.j_range() {
            sum = sum.add(&dyadic_block(&cut, &f, j).unwrap()).unwrap();
        }
        let err = norm_l2(&sum.lin(1.0, &f, -1.0).unwrap()) / norm_l2(&f);
        assert!(err <= 1e-12, "reconstruction error {err}");
    }

    #[test]
    fn blocks_two_apart_are_orthogonal() {
        let g = grid();
        let cut = DyadicCutoff::new(g);
        let f = random_scalar_field(g, 4, 0.0, band(1.0, 10.0)).unwrap();
        for j in cut.j_range() {
            for jp in cut.j_range() {
                if (j - jp).abs() >= 2 {
                    let a = dyadic_block(&cut, &f, j).unwrap();
                    let b = dyadic_block(&cut, &f, jp).unwrap();
                    assert_eq!(inner_l2(&a, &b).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn low_pass_equals_block_sum() {
        let g = grid();
        let cut = DyadicCutoff::new(g);
        let f = random_scalar_field(g, 8, -0.5, band(1.0, 9.0)).unwrap();
        for j in [0, 1, 3] {
            let s = low_pass(&cut, &f, j).unwrap();
            let mut acc = ScalarField::zeros(g, crate::field::Repr::Spectral);
            for jp in cut.j_min()..j {
                acc = acc.add(&dyadic_block(&cut, &f, jp).unwrap()).unwrap();
            }
            let err = norm_l2(&s.lin(1.0, &acc, -1.0).unwrap()) / norm_l2(&f);
            assert!(err <= 1e-12, "S_{j} mismatch {err}");
        }
    }

    #[test]
    fn besov_single_block_closed_form() {
        // |k| = 3 sits where phi(2^{-1}|k|) = 1: block j = 1 alone carries it
        let g = grid();
        let cut = DyadicCutoff::new(g);
        let f = pure_mode(g, [3, 0, 0])
            .add(&pure_mode(g, [0, 3, 0]))
            .unwrap();
        let l2 = norm_l2(&f);
        for s in [0.0, 0.7, -1.3, 2.0] {
            let b = besov_norm(&cut, &f, s).unwrap();
            let expected = 2f64.powf(s) * l2;
            assert!((b - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn besov_scaling_triangle_and_l2_bound() {
        let g = grid();
        let cut = DyadicCutoff::new(g);
        let f = random_scalar_field(g, 21, -1.0, band(1.0, 10.0)).unwrap();
        let h = random_scalar_field(g, 22, 0.0, band(2.0, 6.0)).unwrap();

        let bf = besov_norm(&cut, &f, 0.5).unwrap();
        let scaled = besov_norm(&cut, &f.scale(-3.7), 0.5).unwrap();
        assert!((scaled - 3.7 * bf).abs() <= 1e-12 * scaled);

        let bh = besov_norm(&cut, &h, 0.5).unwrap();
        let bsum = besov_norm(&cut, &f.add(&h).unwrap(), 0.5).unwrap();
        assert!(bsum <= bf + bh + 1e-12);

        assert!(besov_norm(&cut, &f, 0.0).unwrap() >= norm_l2(&f) - 1e-12);
    }

    #[test]
    fn besov_rejects_nonzero_mean() {
        let g = grid();
        let cut = DyadicCutoff::new(g);
        let mut spec = vec![Complex64::new(0.0, 0.0); g.len()];
        spec[g.zero_mode()] = Complex64::new(g.len() as f64, 0.0);
        spec[g.mode_index([1, 0, 0])] = Complex64::new(0.5, 0.0);
        spec[g.mode_index([-1, 0, 0])] = Complex64::new(0.5, 0.0);
        let f = ScalarField::from_spectral(g, spec).unwrap();
        assert!(matches!(
            besov_norm(&cut, &f, 1.0),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn blocks_commute_with_fractional_laplacian() {
        let g = grid();
        let cut = DyadicCutoff::new(g);
        let f = random_scalar_field(g, 30, 0.0, band(1.0, 10.0)).unwrap();
        let s = 0.8;
        for j in [-1, 0, 2, 4] {
            let a =
                crate::ops::fractional_laplacian(&dyadic_block(&cut, &f, j).unwrap(), s).unwrap();
            let b =
                dyadic_block(&cut, &crate::ops::fractional_laplacian(&f, s).unwrap(), j).unwrap();
            let scale = norm_l2(&a).max(f64::MIN_POSITIVE);
            assert!(norm_l2(&a.lin(1.0, &b, -1.0).unwrap()) <= 1e-12 * scale);
        }
    }

    #[test]
    fn sobolev_closed_forms() {
        let g = grid();
        let f = pure_mode(g, [1, 0, 0]);
        let l2 = norm_l2(&f);
        let h1 = sobolev_norm(&f, 1.0).unwrap();
        assert!((h1 * h1 - 2.0 * l2 * l2).abs() <= 1e-12 * l2 * l2);
        let h0 = sobolev_norm(&f, 0.0).unwrap();
        assert!((h0 - l2).abs() <= 1e-12 * l2);

        let r = random_scalar_field(g, 2, -1.0, band(1.0, 8.0)).unwrap();
        assert!(sobolev_norm(&r, 0.5).unwrap() <= sobolev_norm(&r, 1.5).unwrap());
    }

    #[test]
    fn split_recombines_and_handles_extremes() {
        let g = grid();
        let cut = DyadicCutoff::new(g);
        let f = random_scalar_field(g, 13, -0.7, band(1.0, 10.0)).unwrap();

        let (lo, hi) = high_low_split(&cut, &f, 1).unwrap();
        let recomb = lo.add(&hi).unwrap();
        let err = norm_l2(&recomb.lin(1.0, &f, -1.0).unwrap()) / norm_l2(&f);
        assert!(err <= 1e-12);
        assert!(norm_l2(&lo) > 0.0 && norm_l2(&hi) > 0.0);

        let (all, none) = high_low_split(&cut, &f, cut.j_max() + 1).unwrap();
        assert_eq!(norm_l2(&none), 0.0);
        assert_eq!(all.spec(0).unwrap(), f.spec(0).unwrap());

        let (none, all) = high_low_split(&cut, &f, -3).unwrap();
        assert_eq!(norm_l2(&none), 0.0);
        let err = norm_l2(&all.lin(1.0, &f, -1.0).unwrap()) / norm_l2(&f);
        assert!(err <= 1e-12);
    }

    #[test]
    fn chemin_lerner_closed_forms_and_minkowski() {
        let g = grid();
        let cut = DyadicCutoff::new(g);
        let f = random_scalar_field(g, 40, -1.0, band(1.0, 6.0)).unwrap();
        let times = [0.0, 0.5, 1.0];

        // constant trajectory: tilde-L^inf equals the static norm,
        // tilde-L^1 equals T times it
        let traj = vec![f.clone(), f.clone(), f.clone()];
        let stat = besov_norm(&cut, &f, 0.5).unwrap();
        let linf = chemin_lerner_norm(&cut, &times, &traj, 0.5, TimeNorm::LInf).unwrap();
        let l1 = chemin_lerner_norm(&cut, &times, &traj, 0.5, TimeNorm::L1).unwrap();
        assert!((linf - stat).abs() <= 1e-12 * stat);
        assert!((l1 - stat).abs() <= 1e-12 * stat);

        // Minkowski: plain time norms of the Besov norm are dominated
        let traj: Vec<ScalarField> = (0..3)
            .map(|i| random_scalar_field(g, 50 + i, -1.0, band(1.0, 6.0)).unwrap())
            .collect();
        let besovs: Vec<f64> = traj
            .iter()
            .map(|f| besov_norm(&cut, f, 0.5).unwrap())
            .collect();
        let plain_l1 = trapezoid(&times, &besovs);
        let plain_linf = besovs.iter().fold(0.0f64, |m, &v| m.max(v));
        let tilde_l1 = chemin_lerner_norm(&cut, &times, &traj, 0.5, TimeNorm::L1).unwrap();
        let tilde_linf = chemin_lerner_norm(&cut, &times, &traj, 0.5, TimeNorm::LInf).unwrap();
        assert!(plain_l1 <= tilde_l1 + 1e-12);
        assert!(plain_linf <= tilde_linf + 1e-12);

        // non-uniform sampling is rejected
        assert!(matches!(
            chemin_lerner_norm(&cut, &[0.0, 0.1, 1.0], &traj, 0.5, TimeNorm::L1),
            Err(Error::NonUniformTimes)
        ));
    }

    #[test]
    fn bernstein_pure_mode_and_homogeneity() {
        let g = grid();
        for (j, k) in [(1, [2i64, 0, 0]), (2, [4, 0, 0]), (3, [8, 0, 0])] {
            let f = pure_mode(g, k);
            for ord in [1u32, 2] {
                let r = bernstein_ratio(&f, j, ord).unwrap();
                assert!((r - 1.0).abs() <= 1e-12, "j={j} ord={ord}: {r}");
                let r2 = bernstein_ratio(&f.scale(2.0), j, ord).unwrap();
                assert!((r2 - r).abs() <= 1e-12);
            }
        }
        let z = ScalarField::zeros(g, crate::field::Repr::Spectral);
        assert_eq!(bernstein_ratio(&z, 0, 1).unwrap(), 0.0);
    }
}
