//! Scalar and vector fields on a [`GridSpec`], in real or spectral form.

use alloc::borrow::Cow;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::{GridSpec, Point};

/// Storage of a scalar field.
#[derive(Debug, Clone, PartialEq)]
pub enum Repr {
    /// Point values, row-major over the grid.
    Real(Vec<f64>),
    /// Fourier coefficients, in FFT index order (see [`GridSpec::wavevector`]).
    Spectral(Vec<Complex64>),
}

/// A real periodic scalar field.
///
/// Spectral coefficients follow `f(x) = Σ_k f̂(k) e^{2πi k·x}`; a field is
/// real exactly when its coefficients are Hermitian. Conversions to real
/// space keep the real part.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    repr: Repr,
}

impl ScalarField {
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            repr: Repr::Real(values),
        })
    }

    pub fn from_coefficients(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            grid,
            repr: Repr::Spectral(coeffs),
        })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&Point) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self {
            grid,
            repr: Repr::Real(values),
        }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self {
            grid,
            repr: Repr::Real(vec![c; grid.len()]),
        }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.repr, Repr::Spectral(_))
    }

    /// Real-space representation of this field.
    pub fn to_real(&self) -> ScalarField {
        match &self.repr {
            Repr::Real(_) => self.clone(),
            Repr::Spectral(c) => Self {
                grid: self.grid,
                repr: Repr::Real(inverse(&self.grid, c.clone())),
            },
        }
    }

    /// Spectral representation of this field.
    pub fn to_spectral(&self) -> ScalarField {
        match &self.repr {
            Repr::Spectral(_) => self.clone(),
            Repr::Real(v) => Self {
                grid: self.grid,
                repr: Repr::Spectral(forward(&self.grid, v)),
            },
        }
    }

    pub fn into_real(self) -> ScalarField {
        match self.repr {
            Repr::Real(_) => self,
            Repr::Spectral(c) => Self {
                grid: self.grid,
                repr: Repr::Real(inverse(&self.grid, c)),
            },
        }
    }

    pub fn into_spectral(self) -> ScalarField {
        match self.repr {
            Repr::Spectral(_) => self,
            Repr::Real(ref v) => Self {
                grid: self.grid,
                repr: Repr::Spectral(forward(&self.grid, v)),
            },
        }
    }

    /// Point values, transforming if necessary.
    pub fn values(&self) -> Cow<'_, [f64]> {
        match &self.repr {
            Repr::Real(v) => Cow::Borrowed(v),
            Repr::Spectral(c) => Cow::Owned(inverse(&self.grid, c.clone())),
        }
    }

    /// Fourier coefficients, transforming if necessary.
    pub fn coefficients(&self) -> Cow<'_, [Complex64]> {
        match &self.repr {
            Repr::Spectral(c) => Cow::Borrowed(c),
            Repr::Real(v) => Cow::Owned(forward(&self.grid, v)),
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        match self.repr {
            Repr::Real(v) => v,
            Repr::Spectral(c) => inverse(&self.grid, c),
        }
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        match self.repr {
            Repr::Spectral(c) => c,
            Repr::Real(v) => forward(&self.grid, &v),
        }
    }

    /// Grid mean, i.e. the k = 0 coefficient.
    pub fn mean(&self) -> f64 {
        match &self.repr {
            Repr::Real(v) => v.iter().sum::<f64>() / v.len() as f64,
            Repr::Spectral(c) => c[0].re,
        }
    }

    /// Copy with the k = 0 mode removed.
    pub fn without_mean(&self) -> ScalarField {
        match &self.repr {
            Repr::Real(v) => {
                let m = self.mean();
                Self {
                    grid: self.grid,
                    repr: Repr::Real(v.iter().map(|x| x - m).collect()),
                }
            }
            Repr::Spectral(c) => {
                let mut c = c.clone();
                c[0] = Complex64::new(0.0, 0.0);
                Self {
                    grid: self.grid,
                    repr: Repr::Spectral(c),
                }
            }
        }
    }

    /// `self * c`, keeping the representation.
    pub fn scaled(&self, c: f64) -> ScalarField {
        let repr = match &self.repr {
            Repr::Real(v) => Repr::Real(v.iter().map(|x| x * c).collect()),
            Repr::Spectral(s) => Repr::Spectral(s.iter().map(|x| x * c).collect()),
        };
        Self {
            grid: self.grid,
            repr,
        }
    }

    /// Pointwise map in real space.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        let values = self.values().iter().map(|&x| f(x)).collect();
        Self {
            grid: self.grid,
            repr: Repr::Real(values),
        }
    }

    /// Largest absolute grid value.
    pub fn max_abs(&self) -> f64 {
        self.values().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub(crate) fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// A `dim`-component vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let grid = *components.first().ok_or(Error::InvalidArgument("no components"))?.grid();
        if components.len() != grid.dim() {
            return Err(Error::InvalidArgument("component count must equal the dimension"));
        }
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    /// Samples a vector-valued function; `f` writes `dim` components.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&Point, &mut [f64])) -> Self {
        let d = grid.dim();
        let mut comps = vec![vec![0.0; grid.len()]; d];
        let mut buf = [0.0; crate::grid::MAX_DIM];
        for i in 0..grid.len() {
            f(&grid.point(i), &mut buf[..d]);
            for (c, &v) in comps.iter_mut().zip(&buf[..d]) {
                c[i] = v;
            }
        }
        Self {
            grid,
            components: comps
                .into_iter()
                .map(|v| ScalarField {
                    grid,
                    repr: Repr::Real(v),
                })
                .collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn to_real(&self) -> VectorField {
        Self {
            grid: self.grid,
            components: real_components(&self.components),
        }
    }

    pub fn to_spectral(&self) -> VectorField {
        Self {
            grid: self.grid,
            components: spectral_components(&self.components),
        }
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        Self {
            grid: self.grid,
            components: self.components.iter().map(|f| f.scaled(c)).collect(),
        }
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn max_magnitude(&self) -> f64 {
        let vals: Vec<Cow<'_, [f64]>> = self.components.iter().map(|c| c.values()).collect();
        let max_sq = (0..self.grid.len())
            .map(|i| vals.iter().map(|v| v[i] * v[i]).sum::<f64>())
            .fold(0.0f64, f64::max);
        libm::sqrt(max_sq)
    }
}

/// Converts fields to real space, pairing them into shared complex transforms.
pub(crate) fn real_components(fields: &[ScalarField]) -> Vec<ScalarField> {
    let mut out = Vec::with_capacity(fields.len());
    let mut i = 0;
    while i < fields.len() {
        if i + 1 < fields.len() && fields[i].is_spectral() && fields[i + 1].is_spectral() {
            let (a, b) = to_real_pair(&fields[i], &fields[i + 1]);
            out.push(a);
            out.push(b);
            i += 2;
        } else {
            out.push(fields[i].to_real());
            i += 1;
        }
    }
    out
}

/// Converts fields to spectral space, pairing them into shared complex transforms.
pub(crate) fn spectral_components(fields: &[ScalarField]) -> Vec<ScalarField> {
    let mut out = Vec::with_capacity(fields.len());
    let mut i = 0;
    while i < fields.len() {
        if i + 1 < fields.len() && !fields[i].is_spectral() && !fields[i + 1].is_spectral() {
            let (a, b) = to_spectral_pair(&fields[i], &fields[i + 1]);
            out.push(a);
            out.push(b);
            i += 2;
        } else {
            out.push(fields[i].to_spectral());
            i += 1;
        }
    }
    out
}

/// Inverse-transforms two Hermitian spectra with one complex FFT.
pub(crate) fn to_real_pair(a: &ScalarField, b: &ScalarField) -> (ScalarField, ScalarField) {
    let grid = a.grid;
    let ca = a.coefficients();
    let cb = b.coefficients();
    let i = Complex64::new(0.0, 1.0);
    let mut z: Vec<Complex64> = ca.iter().zip(cb.iter()).map(|(x, y)| x + i * y).collect();
    fft::transform(&grid, &mut z, Direction::Inverse);
    let re = z.iter().map(|c| c.re).collect();
    let im = z.iter().map(|c| c.im).collect();
    (
        ScalarField {
            grid,
            repr: Repr::Real(re),
        },
        ScalarField {
            grid,
            repr: Repr::Real(im),
        },
    )
}

/// Forward-transforms two real fields with one complex FFT.
pub(crate) fn to_spectral_pair(a: &ScalarField, b: &ScalarField) -> (ScalarField, ScalarField) {
    let grid = a.grid;
    let va = a.values();
    let vb = b.values();
    let mut z: Vec<Complex64> = va
        .iter()
        .zip(vb.iter())
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    fft::transform(&grid, &mut z, Direction::Forward);
    let mut ca = Vec::with_capacity(z.len());
    let mut cb = Vec::with_capacity(z.len());
    for idx in 0..z.len() {
        let zk = z[idx];
        let zm = z[negated_index(&grid, idx)].conj();
        ca.push((zk + zm) * 0.5);
        // (zk - zm) / 2i
        let d = (zk - zm) * 0.5;
        cb.push(Complex64::new(d.im, -d.re));
    }
    (
        ScalarField {
            grid,
            repr: Repr::Spectral(ca),
        },
        ScalarField {
            grid,
            repr: Repr::Spectral(cb),
        },
    )
}

/// Flat index of the wavevector `-k`.
pub(crate) fn negated_index(grid: &GridSpec, idx: usize) -> usize {
    let n = grid.n();
    let multi = grid.unravel(idx);
    let mut out = 0;
    for &m in multi.iter().take(grid.dim()) {
        out = out * n + (n - m) % n;
    }
    out
}

fn forward(grid: &GridSpec, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::transform(grid, &mut data, Direction::Forward);
    data
}

fn inverse(grid: &GridSpec, mut coeffs: Vec<Complex64>) -> Vec<f64> {
    fft::transform(grid, &mut coeffs, Direction::Inverse);
    coeffs.into_iter().map(|c| c.re).collect()
}
