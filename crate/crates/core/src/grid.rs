//! Uniform grids on the unit torus `T^d`.

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// A point of the torus, only the first `dim` entries are meaningful.
pub type Point = [f64; MAX_DIM];

/// Integer wavevector, only the first `dim` entries are meaningful.
pub type WaveVector = [i64; MAX_DIM];

/// Periodic grid of `n` points per axis on the torus of side length 1.
///
/// Data on the grid is stored row-major: the last axis is contiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    dim: usize,
    n: usize,
}

impl GridSpec {
    /// `n` must be a power of two and at least 4; `dim` must lie in `1..=3`.
    ///
    /// Production runs use `n >= 16`; smaller sizes are accepted for
    /// brute-force comparisons in tests.
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid("dimension must be 1, 2 or 3"));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid("points per axis must be a power of two >= 4"));
        }
        if n.checked_pow(dim as u32).is_none() {
            return Err(Error::InvalidGrid("grid too large"));
        }
        Ok(Self { dim, n })
    }

    /// Two-dimensional grid, the default setting.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(2, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `h = 1/n`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Distance between consecutive entries along `axis` in the flat layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    /// Multi-index of a flat index.
    pub fn unravel(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            out[axis] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    /// Flat index of a multi-index; entries are reduced modulo `n`.
    pub fn ravel(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for &m in multi.iter().take(self.dim) {
            idx = idx * self.n + m % self.n;
        }
        idx
    }

    /// Coordinates of the grid point with flat index `idx`.
    pub fn point(&self, idx: usize) -> Point {
        let multi = self.unravel(idx);
        let h = self.spacing();
        let mut p = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            p[axis] = multi[axis] as f64 * h;
        }
        p
    }

    /// Signed wavenumber of FFT index `i` along one axis, in `(-n/2, n/2]`
    /// except that the Nyquist index maps to `-n/2`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Wavevector of the spectral coefficient stored at flat index `idx`.
    pub fn wavevector(&self, idx: usize) -> WaveVector {
        let multi = self.unravel(idx);
        let mut k = [0; MAX_DIM];
        for axis in 0..self.dim {
            k[axis] = self.wavenumber(multi[axis]);
        }
        k
    }

    /// True if any component of the wavevector sits at the Nyquist index.
    pub fn is_nyquist(&self, idx: usize, axis: usize) -> bool {
        let multi = self.unravel(idx);
        multi[axis] == self.n / 2
    }

    /// Largest retained |k_i| under the 2/3 truncation rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Squared periodic distance between two points.
    pub fn periodic_dist2(&self, a: &Point, b: &Point) -> f64 {
        let mut s = 0.0;
        for axis in 0..self.dim {
            let mut d = a[axis] - b[axis];
            d -= libm::round(d);
            s += d * d;
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(GridSpec::new(2, 48).is_err());
        assert!(GridSpec::new(0, 16).is_err());
        assert!(GridSpec::new(4, 16).is_err());
        assert!(GridSpec::new(2, 64).is_ok());
    }

    #[test]
    fn ravel_unravel_roundtrip() {
        let g = GridSpec::new(3, 8).unwrap();
        for idx in 0..g.len() {
            let m = g.unravel(idx);
            assert_eq!(g.ravel(&m[..3]), idx);
        }
    }

    #[test]
    fn wavenumbers_are_signed() {
        let g = GridSpec::new(1, 8).unwrap();
        let ks: [i64; 8] = core::array::from_fn(|i| g.wavenumber(i));
        assert_eq!(ks, [0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn periodic_distance_wraps() {
        let g = GridSpec::square(16).unwrap();
        let d2 = g.periodic_dist2(&[0.05, 0.95, 0.0], &[0.95, 0.05, 0.0]);
        assert!((d2 - 0.02).abs() < 1e-14);
    }
}
