//! Super level sets, δ-(semi-)mixedness verdicts and H⁻¹ duality certificates.
//!
//! A set `A` is δ-semi-mixed with accuracy `κ` when every closed ball of
//! radius δ holds at most a fraction `1 - κ` of `A`; it is δ-mixed when its
//! complement is δ-semi-mixed too. Ball fractions are grid point counts,
//! so verdicts are exact integer comparisons.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{GridSpec, Point, MAX_DIM};
use crate::norms::sobolev_norm;
use crate::spectral;

/// Default accuracy parameter for reports.
pub const DEFAULT_KAPPA: f64 = 0.25;
/// Default relative annulus width of the certificate test function.
pub const DEFAULT_EPS: f64 = 0.5;

/// Indicator of a subset of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetMask {
    grid: GridSpec,
    indicator: Vec<bool>,
    lambda: Option<f64>,
}

impl LevelSetMask {
    pub fn from_indicator(grid: GridSpec, indicator: Vec<bool>) -> Result<Self> {
        if indicator.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: indicator.len(),
            });
        }
        Ok(Self {
            grid,
            indicator,
            lambda: None,
        })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&Point) -> bool) -> Self {
        Self {
            grid,
            indicator: (0..grid.len()).map(|i| f(&grid.point(i))).collect(),
            lambda: None,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn indicator(&self) -> &[bool] {
        &self.indicator
    }

    /// Level parameter if the mask came from [`super_level_set`].
    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    /// Grid fraction occupied by the set.
    pub fn measure(&self) -> f64 {
        self.indicator.iter().filter(|&&b| b).count() as f64 / self.indicator.len() as f64
    }

    pub fn complement(&self) -> LevelSetMask {
        Self {
            grid: self.grid,
            indicator: self.indicator.iter().map(|b| !b).collect(),
            lambda: None,
        }
    }

    /// The mask shifted by a grid vector (in index units).
    pub fn translated(&self, shift: &[usize]) -> LevelSetMask {
        let mut out = alloc::vec![false; self.indicator.len()];
        let mut m = [0usize; MAX_DIM];
        for (idx, &b) in self.indicator.iter().enumerate() {
            let src = self.grid.unravel(idx);
            for axis in 0..self.grid.dim() {
                m[axis] = src[axis] + shift[axis];
            }
            out[self.grid.ravel(&m[..self.grid.dim()])] = b;
        }
        Self {
            grid: self.grid,
            indicator: out,
            lambda: self.lambda,
        }
    }

    /// 0/1 field of the indicator.
    pub fn to_field(&self) -> ScalarField {
        ScalarField::from_values(
            self.grid,
            self.indicator.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
        .expect("grid length")
    }
}

/// `{f > λ‖f‖_{L∞}}` on the grid.
pub fn super_level_set(f: &ScalarField, lambda: f64) -> Result<LevelSetMask> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidArgument("lambda must lie in (0, 1]"));
    }
    let values = f.values();
    let sup = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if sup == 0.0 {
        return Err(Error::ZeroField);
    }
    let level = lambda * sup;
    Ok(LevelSetMask {
        grid: *f.grid(),
        indicator: values.iter().map(|&x| x > level).collect(),
        lambda: Some(lambda),
    })
}

/// Verdict for one `(δ, κ)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MixednessReport {
    pub delta: f64,
    pub kappa: f64,
    /// Every δ-ball holds at most `1 - κ` of the set.
    pub semi_mixed: bool,
    /// Set and complement both semi-mixed; `None` unless requested through [`is_mixed`].
    pub mixed: Option<bool>,
    /// Flat grid index of a ball center attaining the largest fraction.
    pub worst_index: usize,
    pub worst_center: Point,
    pub worst_fraction: f64,
    /// Largest fraction of the complement, when evaluated.
    pub complement_worst_fraction: Option<f64>,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidArgument("kappa must lie in (0, 1/2)"))
    }
}

/// Number of set points inside `B(x, δ)` for every center `x`, and the ball size.
pub fn ball_counts(mask: &LevelSetMask, delta: f64) -> Result<(Vec<u64>, u64)> {
    let total = spectral::ball_point_count(&mask.grid, delta)? as u64;
    let avg = spectral::ball_mean_field(&mask.to_field(), delta)?;
    let counts = avg
        .values()
        .iter()
        .map(|&x| libm::round(x * total as f64) as u64)
        .collect();
    Ok((counts, total))
}

fn worst_ball(mask: &LevelSetMask, delta: f64) -> Result<(usize, f64)> {
    let (counts, total) = ball_counts(mask, delta)?;
    let mut best = 0usize;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    Ok((best, counts[best] as f64 / total as f64))
}

/// Is the set δ-semi-mixed with accuracy κ?
pub fn is_semi_mixed(mask: &LevelSetMask, delta: f64, kappa: f64) -> Result<MixednessReport> {
    check_kappa(kappa)?;
    let (worst_index, worst_fraction) = worst_ball(mask, delta)?;
    Ok(MixednessReport {
        delta,
        kappa,
        semi_mixed: worst_fraction <= 1.0 - kappa,
        mixed: None,
        worst_index,
        worst_center: mask.grid.point(worst_index),
        worst_fraction,
        complement_worst_fraction: None,
    })
}

/// Is the set δ-mixed: both it and its complement δ-semi-mixed?
pub fn is_mixed(mask: &LevelSetMask, delta: f64, kappa: f64) -> Result<MixednessReport> {
    let mut report = is_semi_mixed(mask, delta, kappa)?;
    let comp = is_semi_mixed(&mask.complement(), delta, kappa)?;
    report.mixed = Some(report.semi_mixed && comp.semi_mixed);
    report.complement_worst_fraction = Some(comp.worst_fraction);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub delta: f64,
    pub semi_mixed: bool,
    pub mixed: bool,
    pub worst_fraction: f64,
}

/// Verdicts over a range of scales.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleScan {
    pub kappa: f64,
    pub entries: Vec<ScanEntry>,
    /// Smallest scanned δ at which the set is semi-mixed.
    pub semi_mixing_scale: Option<f64>,
    /// Smallest scanned δ at which the set is mixed.
    pub mixing_scale: Option<f64>,
    /// False if a semi-mixed δ is followed by a larger non-semi-mixed δ.
    pub monotone: bool,
    /// Largest scanned δ at which the set is not semi-mixed; a proxy for
    /// the unmixed length scale of the set.
    pub r0_proxy: Option<f64>,
}

/// `count` geometrically spaced radii from `1/n` to `1/2`.
pub fn geometric_deltas(grid: &GridSpec, count: usize) -> Vec<f64> {
    let lo = grid.spacing();
    let hi = 0.5;
    if count <= 1 {
        return alloc::vec![hi];
    }
    let ratio = libm::pow(hi / lo, 1.0 / (count - 1) as f64);
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                lo * libm::pow(ratio, i as f64)
            }
        })
        .collect()
}

/// Semi-mixed and mixed verdicts for each δ, sorted ascending.
pub fn mixing_scale_scan(mask: &LevelSetMask, kappa: f64, deltas: &[f64]) -> Result<ScaleScan> {
    check_kappa(kappa)?;
    let mut deltas = deltas.to_vec();
    deltas.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let comp = mask.complement();
    let mut entries = Vec::with_capacity(deltas.len());
    for &delta in &deltas {
        let (_, wf) = worst_ball(mask, delta)?;
        let (_, cf) = worst_ball(&comp, delta)?;
        let semi = wf <= 1.0 - kappa;
        entries.push(ScanEntry {
            delta,
            semi_mixed: semi,
            mixed: semi && cf <= 1.0 - kappa,
            worst_fraction: wf,
        });
    }
    let semi_mixing_scale = entries.iter().find(|e| e.semi_mixed).map(|e| e.delta);
    let mixing_scale = entries.iter().find(|e| e.mixed).map(|e| e.delta);
    let r0_proxy = entries.iter().rev().find(|e| !e.semi_mixed).map(|e| e.delta);
    let monotone = match (semi_mixing_scale, r0_proxy) {
        (Some(s), Some(r)) => r < s,
        _ => true,
    };
    Ok(ScaleScan {
        kappa,
        entries,
        semi_mixing_scale,
        mixing_scale,
        monotone,
        r0_proxy,
    })
}

/// Radial test function: 1 on `B(center, δ)`, 0 outside `B(center, (1+ε)δ)`,
/// with the C¹ cubic ramp `1 - 3s² + 2s³` in between.
pub fn bump_test_function(grid: &GridSpec, center: &Point, delta: f64, eps: f64) -> Result<ScalarField> {
    if !(eps > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta and eps must be positive"));
    }
    let outer = delta * (1.0 + eps);
    if outer > 0.5 {
        return Err(Error::GeometryError { outer_radius: outer });
    }
    Ok(ScalarField::from_fn(*grid, |p| {
        let r = libm::sqrt(grid.periodic_dist2(p, center));
        if r <= delta {
            1.0
        } else if r >= outer {
            0.0
        } else {
            let s = (r - delta) / (eps * delta);
            1.0 - 3.0 * s * s + 2.0 * s * s * s
        }
    }))
}

/// Lower bound `|∫ f g| / ‖g‖_{H¹}` for `‖f‖_{H⁻¹}`, with `g` the
/// [`bump_test_function`]. The mean of `f` is removed before pairing.
pub fn h_neg1_certificate(f: &ScalarField, center: &Point, delta: f64, eps: f64) -> Result<f64> {
    let g = bump_test_function(f.grid(), center, delta, eps)?;
    let f0 = f.without_mean();
    let pairing = spectral::inner(&f0, &g)?.abs();
    if pairing == 0.0 {
        return Ok(0.0);
    }
    let g_norm = sobolev_norm(&g, 1.0)?;
    Ok(pairing / g_norm)
}
