//! Exact spectral operators on the unit torus.
//!
//! Multipliers use `2πk` for integer wavevectors `k`. Odd-order derivatives
//! vanish at the Nyquist index of the differentiated axis so that real
//! fields stay real.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{self, ScalarField, VectorField};
use crate::grid::{GridSpec, MAX_DIM};

/// Relative size of the k = 0 coefficient tolerated by inversions.
pub const MEAN_TOLERANCE: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Wavevector used by first derivatives: the true wavevector with Nyquist
/// components zeroed.
#[inline]
fn derivative_wavevector(grid: &GridSpec, idx: usize) -> [f64; MAX_DIM] {
    let multi = grid.unravel(idx);
    let half = grid.n() / 2;
    let mut k = [0.0; MAX_DIM];
    for axis in 0..grid.dim() {
        if multi[axis] != half {
            k[axis] = grid.wavenumber(multi[axis]) as f64;
        }
    }
    k
}

#[inline]
fn wavevector_norm2(grid: &GridSpec, idx: usize) -> f64 {
    let k = grid.wavevector(idx);
    k[..grid.dim()].iter().map(|&x| (x * x) as f64).sum()
}

/// Spectral gradient: component `j` has coefficients `2πi k_j f̂(k)`.
pub fn gradient(f: &ScalarField) -> VectorField {
    let grid = *f.grid();
    let c = f.coefficients();
    let comps = (0..grid.dim())
        .map(|axis| {
            let coeffs = c
                .iter()
                .enumerate()
                .map(|(idx, &z)| {
                    let k = derivative_wavevector(&grid, idx)[axis];
                    z * I * (2.0 * PI * k)
                })
                .collect();
            ScalarField::from_coefficients(grid, coeffs).expect("grid length")
        })
        .collect();
    VectorField::new(comps).expect("dim components")
}

/// Spectral divergence `Σ_j 2πi k_j v̂_j(k)`.
pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = *v.grid();
    let comps: Vec<_> = v.components().iter().map(|c| c.coefficients()).collect();
    let coeffs = (0..grid.len())
        .map(|idx| {
            let k = derivative_wavevector(&grid, idx);
            let mut s = Complex64::new(0.0, 0.0);
            for (axis, c) in comps.iter().enumerate() {
                s += c[idx] * k[axis];
            }
            s * I * (2.0 * PI)
        })
        .collect();
    ScalarField::from_coefficients(grid, coeffs).expect("grid length")
}

/// Spectral Laplacian, multiplier `-4π²|k|²`.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let coeffs = f
        .coefficients()
        .iter()
        .enumerate()
        .map(|(idx, &z)| z * (-4.0 * PI * PI * wavevector_norm2(&grid, idx)))
        .collect();
    ScalarField::from_coefficients(grid, coeffs).expect("grid length")
}

/// Fails with [`Error::NonZeroMean`] when the k = 0 coefficient exceeds
/// [`MEAN_TOLERANCE`] times the L² size of the field.
pub fn check_mean_zero(coeffs: &[Complex64]) -> Result<()> {
    let scale = libm::sqrt(coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>());
    let mean = coeffs[0].norm();
    if mean > MEAN_TOLERANCE * scale {
        Err(Error::NonZeroMean { mean, scale })
    } else {
        Ok(())
    }
}

/// `Δ⁻¹f` on mean-zero fields: `f̂(k) / (-4π²|k|²)`, zero at k = 0.
pub fn inverse_laplacian(f: &ScalarField) -> Result<ScalarField> {
    let grid = *f.grid();
    let c = f.coefficients();
    check_mean_zero(&c)?;
    Ok(inverse_laplacian_unchecked(&grid, &c))
}

/// `Δ⁻¹` that silently drops the k = 0 mode.
pub(crate) fn inverse_laplacian_unchecked(grid: &GridSpec, c: &[Complex64]) -> ScalarField {
    let coeffs = c
        .iter()
        .enumerate()
        .map(|(idx, &z)| {
            if idx == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                z / (-4.0 * PI * PI * wavevector_norm2(grid, idx))
            }
        })
        .collect();
    ScalarField::from_coefficients(*grid, coeffs).expect("grid length")
}

/// `∇Δ⁻¹f`, the inverse gradient of a mean-zero field.
pub fn inverse_gradient(f: &ScalarField) -> Result<VectorField> {
    Ok(gradient(&inverse_laplacian(f)?))
}

/// Leray–Hodge projection onto divergence-free fields, mode by mode
/// `v̂ - k(k·v̂)/|k|²`.
///
/// The projector uses the derivative wavevector (Nyquist components zeroed),
/// so the result is divergence-free under [`divergence`] exactly. The k = 0
/// mode (a constant, hence solenoidal, field) passes through.
pub fn leray_project(v: &VectorField) -> VectorField {
    let grid = *v.grid();
    let d = grid.dim();
    let src: Vec<_> = v.components().iter().map(|c| c.coefficients()).collect();
    let mut out: Vec<Vec<Complex64>> = src.iter().map(|c| c.to_vec()).collect();
    for idx in 1..grid.len() {
        let k = derivative_wavevector(&grid, idx);
        let k2: f64 = k[..d].iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for axis in 0..d {
            dot += src[axis][idx] * k[axis];
        }
        let dot = dot / k2;
        for axis in 0..d {
            out[axis][idx] -= dot * k[axis];
        }
    }
    VectorField::new(
        out.into_iter()
            .map(|c| ScalarField::from_coefficients(grid, c).expect("grid length"))
            .collect(),
    )
    .expect("dim components")
}

/// True if a wavevector survives the 2/3 truncation rule.
#[inline]
pub fn is_retained(grid: &GridSpec, idx: usize) -> bool {
    let cutoff = grid.dealias_cutoff();
    let k = grid.wavevector(idx);
    k[..grid.dim()].iter().all(|x| x.abs() <= cutoff)
}

/// Zeroes every coefficient with `max_i |k_i| > n/3`.
pub fn dealias(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let coeffs = f
        .coefficients()
        .iter()
        .enumerate()
        .map(|(idx, &z)| {
            if is_retained(&grid, idx) {
                z
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    ScalarField::from_coefficients(grid, coeffs).expect("grid length")
}

/// Pointwise product, evaluated in real space.
pub fn product(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    a.check_same_grid(b)?;
    let va = a.values();
    let vb = b.values();
    ScalarField::from_values(*a.grid(), va.iter().zip(vb.iter()).map(|(x, y)| x * y).collect())
}

/// Discrete L² inner product (grid mean of the product).
pub fn inner(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.check_same_grid(b)?;
    let va = a.values();
    let vb = b.values();
    Ok(va.iter().zip(vb.iter()).map(|(x, y)| x * y).sum::<f64>() / va.len() as f64)
}

/// Discrete L² inner product of vector fields.
pub fn inner_vector(a: &VectorField, b: &VectorField) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    a.components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| inner(x, y))
        .sum()
}

/// Converts all components to real space, pairing transforms.
pub(crate) fn to_real_fields(fields: &[ScalarField]) -> Vec<ScalarField> {
    field::real_components(fields)
}

/// Converts all components to spectral space, pairing transforms.
pub(crate) fn to_spectral_fields(fields: &[ScalarField]) -> Vec<ScalarField> {
    field::spectral_components(fields)
}

/// Fraction of spectral energy in the top octave of the resolved band:
/// `kmax/2 < max_i |k_i| <= kmax`, with `kmax = n/3` under dealiasing and
/// `n/2` otherwise.
pub fn top_octave_fraction(f: &ScalarField, dealiased: bool) -> f64 {
    let grid = *f.grid();
    let kmax = if dealiased {
        grid.dealias_cutoff()
    } else {
        (grid.n() / 2) as i64
    };
    let c = f.coefficients();
    let mut total = 0.0;
    let mut top = 0.0;
    for (idx, z) in c.iter().enumerate().skip(1) {
        let k = grid.wavevector(idx);
        let m = k[..grid.dim()].iter().map(|x| x.abs()).max().unwrap_or(0);
        let e = z.norm_sqr();
        total += e;
        if 2 * m > kmax && m <= kmax {
            top += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        top / total
    }
}

fn check_delta(grid: &GridSpec, delta: f64) -> Result<()> {
    let min = grid.spacing();
    let max = 0.5;
    let slack = 1e-12;
    if !(delta >= min * (1.0 - slack) && delta <= max * (1.0 + slack)) {
        return Err(Error::DeltaOutOfRange { delta, min, max });
    }
    Ok(())
}

/// Grid offsets (in index units, each in `(-n/2, n/2]`) of the closed
/// periodic ball of radius `delta` about the origin. Points at exactly
/// distance `delta` count as inside.
pub fn ball_offsets(grid: &GridSpec, delta: f64) -> Result<Vec<[i64; MAX_DIM]>> {
    check_delta(grid, delta)?;
    let n = grid.n() as i64;
    let r = delta * n as f64;
    let r2 = r * r * (1.0 + 1e-12);
    let mut out = Vec::new();
    for idx in 0..grid.len() {
        let m = grid.unravel(idx);
        let mut o = [0i64; MAX_DIM];
        let mut d2 = 0i64;
        for axis in 0..grid.dim() {
            let mut x = m[axis] as i64;
            if x > n / 2 {
                x -= n;
            }
            o[axis] = x;
            d2 += x * x;
        }
        if (d2 as f64) <= r2 {
            out.push(o);
        }
    }
    Ok(out)
}

/// Number of grid points in a closed ball of radius `delta`.
pub fn ball_point_count(grid: &GridSpec, delta: f64) -> Result<usize> {
    Ok(ball_offsets(grid, delta)?.len())
}

/// Local ball averages `x ↦ mean of mask over grid points in B(x, δ)`,
/// computed as a circular convolution with the unit-sum ball indicator.
/// Values are clamped to `[0, 1]`.
pub fn ball_mean_field(mask: &ScalarField, delta: f64) -> Result<ScalarField> {
    let grid = *mask.grid();
    let offsets = ball_offsets(&grid, delta)?;
    let weight = 1.0 / offsets.len() as f64;
    let mut kernel = vec![0.0; grid.len()];
    let n = grid.n() as i64;
    let mut multi = [0usize; MAX_DIM];
    for o in &offsets {
        for axis in 0..grid.dim() {
            multi[axis] = o[axis].rem_euclid(n) as usize;
        }
        kernel[grid.ravel(&multi[..grid.dim()])] = weight;
    }
    let kernel = ScalarField::from_values(grid, kernel)?;
    let (km, mm) = if mask.is_spectral() {
        (kernel.to_spectral(), mask.clone())
    } else {
        let fields = to_spectral_fields(&[kernel, mask.clone()]);
        let mut it = fields.into_iter();
        (it.next().unwrap(), it.next().unwrap())
    };
    let scale = grid.len() as f64;
    let coeffs = km
        .coefficients()
        .iter()
        .zip(mm.coefficients().iter())
        .map(|(a, b)| a * b * scale)
        .collect();
    let avg = ScalarField::from_coefficients(grid, coeffs)?.into_real();
    Ok(avg.map(|x| x.clamp(0.0, 1.0)))
}
