//! Sobolev and Lebesgue norms, the stirring cost integral and the
//! log-gradient diagnostic.
//!
//! Homogeneous Sobolev norms use the multiplier `(2π|k|)^s`:
//! `‖f‖_{H^s}² = Σ_{k≠0} (2π|k|)^{2s} |f̂(k)|²`. With this convention
//! `‖sin(2πx)‖_{H⁻¹} = 1/(2√2π)` and `‖f‖_{H⁰} = ‖f‖_{L²}` for mean-zero `f`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::spectral::{self, check_mean_zero};

/// Homogeneous Sobolev norm `‖f‖_{H^s}`. Negative `s` requires mean-zero input.
pub fn sobolev_norm(f: &ScalarField, s: f64) -> Result<f64> {
    let grid = *f.grid();
    let c = f.coefficients();
    if s < 0.0 {
        check_mean_zero(&c)?;
    }
    let mut sum = 0.0;
    for (idx, z) in c.iter().enumerate().skip(1) {
        let k = grid.wavevector(idx);
        let k2: f64 = k[..grid.dim()].iter().map(|&x| (x * x) as f64).sum();
        let w = libm::pow(4.0 * PI * PI * k2, s);
        sum += w * z.norm_sqr();
    }
    Ok(libm::sqrt(sum))
}

/// Mix-norm `‖f‖_{H⁻¹}`.
pub fn h_neg1_norm(f: &ScalarField) -> Result<f64> {
    sobolev_norm(f, -1.0)
}

fn lp_of_values(values: impl Iterator<Item = f64>, count: usize, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0f64, |m, x| m.max(x.abs()))
    } else if p == 2.0 {
        libm::sqrt(values.map(|x| x * x).sum::<f64>() / count as f64)
    } else if p == 1.0 {
        values.map(f64::abs).sum::<f64>() / count as f64
    } else {
        libm::pow(
            values.map(|x| libm::pow(x.abs(), p)).sum::<f64>() / count as f64,
            1.0 / p,
        )
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument("Lp exponent must satisfy p >= 1"))
    }
}

/// `(mean |f|^p)^{1/p}` over the grid; `p = ∞` gives the maximum.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    check_p(p)?;
    let v = f.values();
    Ok(lp_of_values(v.iter().copied(), v.len(), p))
}

/// Pointwise Frobenius magnitude `|∇v|` of a vector field's Jacobian.
pub fn gradient_magnitude(v: &VectorField) -> Vec<f64> {
    let grid = *v.grid();
    let mut parts = Vec::new();
    for c in v.components() {
        parts.extend(spectral::gradient(c).into_components());
    }
    let parts = spectral::to_real_fields(&parts);
    let vals: Vec<_> = parts.iter().map(|p| p.values()).collect();
    (0..grid.len())
        .map(|i| libm::sqrt(vals.iter().map(|v| v[i] * v[i]).sum::<f64>()))
        .collect()
}

/// `‖∇v‖_{L^p}` with the Frobenius magnitude pointwise.
pub fn grad_lp_norm(v: &VectorField, p: f64) -> Result<f64> {
    check_p(p)?;
    let mag = gradient_magnitude(v);
    Ok(lp_of_values(mag.iter().copied(), mag.len(), p))
}

/// `‖∇v‖_{L^p}` for several exponents from one Jacobian evaluation.
pub fn grad_lp_norms(v: &VectorField, ps: &[f64]) -> Result<Vec<f64>> {
    for &p in ps {
        check_p(p)?;
    }
    let mag = gradient_magnitude(v);
    Ok(ps
        .iter()
        .map(|&p| lp_of_values(mag.iter().copied(), mag.len(), p))
        .collect())
}

/// Grid mean of `log₊|∇f|`, with `log₊ z = max(log z, 0)`.
pub fn log_plus_gradient(f: &ScalarField) -> f64 {
    let grad = spectral::to_real_fields(spectral::gradient(f).components());
    let vals: Vec<_> = grad.iter().map(|g| g.values()).collect();
    let len = f.grid().len();
    let total: f64 = (0..len)
        .map(|i| {
            let m2: f64 = vals.iter().map(|v| v[i] * v[i]).sum();
            if m2 > 1.0 {
                0.5 * libm::log(m2)
            } else {
                0.0
            }
        })
        .sum();
    total / len as f64
}

/// Running trapezoid integral of `‖∇u(t)‖_{L^p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostAccumulator {
    p: f64,
    samples: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
}

impl CostAccumulator {
    pub fn new(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self {
            p,
            samples: Vec::new(),
            cumulative: Vec::new(),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Appends a sample of the integrand; times must strictly increase.
    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        let integral = match self.samples.last() {
            Some(&(t0, v0)) => {
                if t <= t0 {
                    return Err(Error::NonMonotoneTime { last: t0, t });
                }
                self.total() + 0.5 * (t - t0) * (v0 + value)
            }
            None => 0.0,
        };
        self.samples.push((t, value));
        self.cumulative.push(integral);
        Ok(())
    }

    /// Appends `‖∇v‖_{L^p}` at time `t`.
    pub fn accumulate(&mut self, t: f64, v: &VectorField) -> Result<()> {
        let value = grad_lp_norm(v, self.p)?;
        self.push(t, value)
    }

    /// `(time, integrand)` pairs.
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Integral from the first sample up to each sample time.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// One accepted time step of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MixRecord {
    pub time: f64,
    pub h_neg1: f64,
    pub l2: f64,
    /// `‖∇u‖_{L^p}` for each configured `p`.
    pub grad_lp: Vec<f64>,
    /// `∫₀ᵗ ‖∇u‖_{L^p}` for each configured `p`.
    pub cost: Vec<f64>,
    pub log_grad: f64,
    /// The designed velocity was degenerate (held at zero) at this step.
    pub degenerate: bool,
}

/// Diagnostics recorded along a run, one record per accepted step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MixTimeSeries {
    pub p_list: Vec<f64>,
    pub records: Vec<MixRecord>,
}

impl MixTimeSeries {
    pub fn new(p_list: Vec<f64>) -> Self {
        Self {
            p_list,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, rec: MixRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if rec.time <= last.time {
                return Err(Error::NonMonotoneTime {
                    last: last.time,
                    t: rec.time,
                });
            }
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn h_neg1(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.h_neg1).collect()
    }

    /// Column index of exponent `p` in `grad_lp` / `cost`.
    pub fn p_index(&self, p: f64) -> Option<usize> {
        self.p_list.iter().position(|&q| q == p)
    }

    /// Cumulative cost column for exponent `p`.
    pub fn cost(&self, p: f64) -> Option<Vec<f64>> {
        let j = self.p_index(p)?;
        Some(self.records.iter().map(|r| r.cost[j]).collect())
    }
}
