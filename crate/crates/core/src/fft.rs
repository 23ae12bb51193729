//! In-place radix-2 FFT and its tensor-product extension to `d` dimensions.
//!
//! Forward transforms are scaled by `1/N` so the output holds Fourier
//! coefficients: a constant field maps to a single k = 0 coefficient equal
//! to the constant.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::grid::GridSpec;

/// Lines transformed together when walking a strided axis.
const BLOCK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Radix-2 plan for one line length.
pub(crate) struct Radix2 {
    n: usize,
    // e^{-2πij/n}, j < n/2
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl Radix2 {
    pub(crate) fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2)
            .map(|j| {
                let ang = -2.0 * PI * j as f64 / n as f64;
                Complex64::new(libm::cos(ang), libm::sin(ang))
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Self {
            n,
            twiddles,
            bitrev,
        }
    }

    /// Unscaled transform of one contiguous line.
    pub(crate) fn process(&self, buf: &mut [Complex64], dir: Direction) {
        let n = self.n;
        debug_assert_eq!(buf.len(), n);
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let inverse = dir == Direction::Inverse;
        let mut half = 1;
        while half < n {
            let step = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                let (lo, hi) = buf[start..start + 2 * half].split_at_mut(half);
                for j in 0..half {
                    let mut w = self.twiddles[j * step];
                    if inverse {
                        w.im = -w.im;
                    }
                    let t = hi[j] * w;
                    let u = lo[j];
                    lo[j] = u + t;
                    hi[j] = u - t;
                }
            }
            half *= 2;
        }
    }
}

/// Transforms a full grid array in place along every axis.
pub fn transform(grid: &GridSpec, data: &mut [Complex64], dir: Direction) {
    let n = grid.n();
    let len = grid.len();
    assert_eq!(data.len(), len, "data length must match the grid");
    let plan = Radix2::new(n);

    // contiguous last axis
    for line in data.chunks_exact_mut(n) {
        plan.process(line, dir);
    }

    // strided axes, BLOCK neighbouring lines at a time
    let mut scratch = vec![Complex64::new(0.0, 0.0); BLOCK * n];
    for axis in 0..grid.dim() - 1 {
        let stride = grid.stride(axis);
        let outer_count = len / (n * stride);
        for outer in 0..outer_count {
            let base = outer * n * stride;
            let mut inner = 0;
            while inner < stride {
                let width = BLOCK.min(stride - inner);
                for j in 0..n {
                    let row = base + j * stride + inner;
                    for b in 0..width {
                        scratch[b * n + j] = data[row + b];
                    }
                }
                for b in 0..width {
                    plan.process(&mut scratch[b * n..(b + 1) * n], dir);
                }
                for j in 0..n {
                    let row = base + j * stride + inner;
                    for b in 0..width {
                        data[row + b] = scratch[b * n + j];
                    }
                }
                inner += width;
            }
        }
    }

    if dir == Direction::Forward {
        let scale = 1.0 / len as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                    let ang = -2.0 * PI * (j * k) as f64 / n as f64;
                    acc + v * Complex64::new(libm::cos(ang), libm::sin(ang))
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1usize, 2, 4, 8, 32] {
            let x: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new(libm::sin(j as f64 * 0.7), libm::cos(j as f64 * 1.3)))
                .collect();
            let expect = naive_dft(&x);
            let mut got = x.clone();
            Radix2::new(n).process(&mut got, Direction::Forward);
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-12, "n = {n}");
            }
        }
    }

    #[test]
    fn three_dimensional_roundtrip() {
        let g = GridSpec::new(3, 8).unwrap();
        let orig: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new(libm::sin(i as f64), 0.0))
            .collect();
        let mut data = orig.clone();
        transform(&g, &mut data, Direction::Forward);
        transform(&g, &mut data, Direction::Inverse);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
