//! Reference fields used by tests, the certificate scaling study and the CLI.

use crate::field::ScalarField;
use crate::grid::{GridSpec, Point};

/// `±1` checkerboard with `cells` squares per side (`cells` even).
pub fn checkerboard(grid: &GridSpec, cells: usize) -> ScalarField {
    let d = grid.dim();
    ScalarField::from_fn(*grid, |p| {
        let parity: usize = (0..d).map(|i| (p[i] * cells as f64 + 1e-9) as usize).sum();
        if parity.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    })
}

/// `+1` on the slab `lo <= x < hi`, `-1` elsewhere.
pub fn stripe(grid: &GridSpec, lo: f64, hi: f64) -> ScalarField {
    ScalarField::from_fn(*grid, |p| if p[0] >= lo && p[0] < hi { 1.0 } else { -1.0 })
}

/// Unmixed pair of disks: `+1` on `B(center, radius)` and `-1` on the ball
/// of the same radius about the antipodal point `center + (1/2, ..., 1/2)`.
pub fn disk_pair(grid: &GridSpec, center: &Point, radius: f64) -> ScalarField {
    let mut anti = *center;
    for c in anti.iter_mut().take(grid.dim()) {
        *c += 0.5;
        if *c >= 1.0 {
            *c -= 1.0;
        }
    }
    let r2 = radius * radius;
    ScalarField::from_fn(*grid, |p| {
        if grid.periodic_dist2(p, center) <= r2 {
            1.0
        } else if grid.periodic_dist2(p, &anti) <= r2 {
            -1.0
        } else {
            0.0
        }
    })
}
