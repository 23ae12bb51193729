//! Exponential lower bounds, decay-rate fits and rescaling identities.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{GridSpec, MAX_DIM};
use crate::norms::{self, CostAccumulator, MixTimeSeries};

/// Constants of the exponential lower bounds
///
/// ```text
/// ‖θ(t)‖_{H⁻¹} ≥ ε₀ r₀^{d/2+1} ‖θ₀‖_{L∞} exp(-c / m(A_λ)^{1/p} ∫₀ᵗ ‖∇u‖_{L^p})
/// ‖θ(t)‖_{H⁻¹} ≥ ε₀ r₁^{d/2+1} ‖θ₀‖_{L∞} exp(-c / (N r₁^d)^{1/p} ∫₀ᵗ ‖∇u‖_{L^p})
/// ```
///
/// `ε₀` and `c` have no published values; they are supplied by the caller
/// or fitted with [`fit_envelope`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub dim: usize,
    pub eps0: f64,
    pub c: f64,
    pub r0: f64,
    pub r1: f64,
    pub n_balls: usize,
    pub p: f64,
    pub lambda: f64,
    pub kappa: f64,
    /// `m(A_λ)`, measure of the super level set of θ₀.
    pub measure_a: f64,
    /// `‖θ₀‖_{L∞}`.
    pub linf_norm: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.eps0, self.c, self.r0, self.r1, self.measure_a, self.linf_norm];
        if positive.iter().any(|&x| !(x > 0.0)) || self.n_balls == 0 {
            return Err(Error::InvalidArgument("bound constants must be positive"));
        }
        if !(self.p > 1.0) {
            return Err(Error::InvalidArgument("bound exponent must satisfy p > 1"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidArgument("lambda must lie in (0, 1]"));
        }
        if !(self.kappa > 0.0 && self.kappa < self.lambda / (1.0 + self.lambda)) {
            return Err(Error::InvalidArgument("kappa must lie in (0, lambda/(1+lambda))"));
        }
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::InvalidArgument("dimension must be 1, 2 or 3"));
        }
        Ok(())
    }

    fn scale_exponent(&self) -> f64 {
        self.dim as f64 / 2.0 + 1.0
    }

    /// `ε₀ r₀^{d/2+1} ‖θ₀‖_{L∞}`.
    pub fn prefactor(&self) -> f64 {
        self.eps0 * libm::pow(self.r0, self.scale_exponent()) * self.linf_norm
    }

    /// `c / m(A_λ)^{1/p}`.
    pub fn rate(&self) -> f64 {
        self.c / libm::pow(self.measure_a, 1.0 / self.p)
    }

    /// `ε₀ r₁^{d/2+1} ‖θ₀‖_{L∞}`.
    pub fn prefactor_prime(&self) -> f64 {
        self.eps0 * libm::pow(self.r1, self.scale_exponent()) * self.linf_norm
    }

    /// `c / (N r₁^d)^{1/p}`.
    pub fn rate_prime(&self) -> f64 {
        let vol = self.n_balls as f64 * libm::pow(self.r1, self.dim as f64);
        self.c / libm::pow(vol, 1.0 / self.p)
    }

    /// Bound at cost integral `cost`.
    pub fn bound(&self, cost: f64) -> f64 {
        self.prefactor() * libm::exp(-self.rate() * cost)
    }

    /// Ball-count variant of the bound at cost integral `cost`.
    pub fn bound_prime(&self, cost: f64) -> f64 {
        self.prefactor_prime() * libm::exp(-self.rate_prime() * cost)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub time: f64,
    pub cost: f64,
    pub bound: f64,
    pub bound_prime: f64,
}

/// Both bound variants along the recorded cost integral.
pub fn lower_bound_curve(params: &BoundParams, acc: &CostAccumulator) -> Result<Vec<BoundPoint>> {
    params.validate()?;
    if acc.p() != params.p {
        return Err(Error::ParamMismatch {
            expected: params.p,
            got: acc.p(),
        });
    }
    Ok(acc
        .samples()
        .iter()
        .zip(acc.cumulative())
        .map(|(&(time, _), &cost)| BoundPoint {
            time,
            cost,
            bound: params.bound(cost),
            bound_prime: params.bound_prime(cost),
        })
        .collect())
}

/// Rebuilds the cost accumulator for exponent `p` from a recorded series.
pub fn cost_accumulator(series: &MixTimeSeries, p: f64) -> Result<CostAccumulator> {
    let j = series.p_index(p).ok_or(Error::ParamMismatch {
        expected: p,
        got: f64::NAN,
    })?;
    let mut acc = CostAccumulator::new(p)?;
    for r in &series.records {
        acc.push(r.time, r.grad_lp[j])?;
    }
    Ok(acc)
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `ys` against `xs`; `None` with fewer than two
/// points or constant `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = (0..n)
        .map(|i| {
            let r = ys[i] - (intercept + slope * xs[i]);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Straight-line fit of `ln ‖θ‖_{H⁻¹}` against time over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `-1/slope`, the e-folding time of the mix-norm.
    pub rate_reciprocal: f64,
}

/// Minimum number of samples accepted by [`fit_decay_rate`].
pub const MIN_FIT_SAMPLES: usize = 10;

/// Fits `ln values` against `times` over `t0 <= t <= t1`.
pub fn fit_log_linear(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    let (t0, t1) = window;
    if !(t1 > t0) {
        return Err(Error::InvalidArgument("fit window must satisfy t1 > t0"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t >= t0 - 1e-12 && t <= t1 + 1e-12 {
            if !(v > 0.0) {
                return Err(Error::NonPositiveValue { time: t, value: v });
            }
            xs.push(t);
            ys.push(libm::log(v));
        }
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_SAMPLES,
            got: xs.len(),
        });
    }
    let fit = linear_fit(&xs, &ys).ok_or(Error::InsufficientData {
        needed: MIN_FIT_SAMPLES,
        got: xs.len(),
    })?;
    Ok(RateFit {
        t0,
        t1,
        samples: xs.len(),
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        rate_reciprocal: -1.0 / fit.slope,
    })
}

/// Fits the mix-norm decay of a run over `window`.
pub fn fit_decay_rate(series: &MixTimeSeries, window: (f64, f64)) -> Result<RateFit> {
    fit_log_linear(&series.times(), &series.h_neg1(), window)
}

/// Default fit window `[1, min(5, fill time)]`.
pub fn default_fit_window(spectral_fill_time: Option<f64>) -> (f64, f64) {
    let end = spectral_fill_time.map_or(5.0, |t| t.min(5.0));
    (1.0, end)
}

/// Negative reciprocal decay rates against the data parameter `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub rows: Vec<(f64, f64)>,
    /// Linear fit of the reciprocal rate in `a`; `None` for fewer than two rows.
    pub fit: Option<LinearFit>,
    pub strictly_increasing: bool,
}

/// Tabulates `(a, -1/slope)` sorted by `a` and fits a line through it.
pub fn rate_vs_parameter(fits: &[(f64, RateFit)]) -> RateTable {
    let mut rows: Vec<(f64, f64)> = fits.iter().map(|(a, f)| (*a, f.rate_reciprocal)).collect();
    rows.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(core::cmp::Ordering::Equal));
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    RateTable {
        fit: linear_fit(&xs, &ys),
        strictly_increasing: rows.windows(2).all(|w| w[1].1 > w[0].1),
        rows,
    }
}

/// Exponential envelope `prefactor · exp(-rate · cost(t))` lying below the
/// measured mix-norm over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    pub p: f64,
    pub t0: f64,
    pub t1: f64,
    pub prefactor: f64,
    pub rate: f64,
    /// Smallest `measured / bound` over the window; `>= 1` means the
    /// envelope holds.
    pub min_ratio: f64,
    pub holds: bool,
}

/// Fit-then-verify envelope: regress `ln ‖θ‖_{H⁻¹}` on the cost integral
/// over the window, lower the intercept to the smallest residual, then
/// check the curve against every sample in the window.
pub fn fit_envelope(series: &MixTimeSeries, p: f64, window: (f64, f64)) -> Result<EnvelopeFit> {
    let costs = series.cost(p).ok_or(Error::ParamMismatch {
        expected: p,
        got: f64::NAN,
    })?;
    let (t0, t1) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut hs = Vec::new();
    for (r, &c) in series.records.iter().zip(&costs) {
        if r.time >= t0 - 1e-12 && r.time <= t1 + 1e-12 {
            if !(r.h_neg1 > 0.0) {
                return Err(Error::NonPositiveValue {
                    time: r.time,
                    value: r.h_neg1,
                });
            }
            xs.push(c);
            ys.push(libm::log(r.h_neg1));
            hs.push(r.h_neg1);
        }
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_SAMPLES,
            got: xs.len(),
        });
    }
    let fit = linear_fit(&xs, &ys).ok_or(Error::InsufficientData {
        needed: MIN_FIT_SAMPLES,
        got: xs.len(),
    })?;
    let shift = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (fit.intercept + fit.slope * x))
        .fold(f64::INFINITY, f64::min);
    // small safety margin against rounding in exp/log
    let log_prefactor = fit.intercept + shift - 1e-12;
    let rate = -fit.slope;
    let prefactor = libm::exp(log_prefactor);
    let min_ratio = xs
        .iter()
        .zip(&hs)
        .map(|(&c, &h)| h / (prefactor * libm::exp(-rate * c)))
        .fold(f64::INFINITY, f64::min);
    Ok(EnvelopeFit {
        p,
        t0,
        t1,
        prefactor,
        rate,
        min_ratio,
        holds: min_ratio >= 1.0,
    })
}

impl BoundParams {
    /// Parameters reproducing a fitted envelope, given the geometric data
    /// `r₀`, `m(A_λ)` and `‖θ₀‖_{L∞}` of the initial datum.
    #[allow(clippy::too_many_arguments)]
    pub fn from_envelope(
        env: &EnvelopeFit,
        dim: usize,
        r0: f64,
        measure_a: f64,
        linf_norm: f64,
        lambda: f64,
        kappa: f64,
    ) -> BoundParams {
        let scale = libm::pow(r0, dim as f64 / 2.0 + 1.0) * linf_norm;
        BoundParams {
            dim,
            eps0: env.prefactor / scale,
            c: env.rate * libm::pow(measure_a, 1.0 / env.p),
            r0,
            r1: r0,
            n_balls: 1,
            p: env.p,
            lambda,
            kappa,
            measure_a,
            linf_norm,
        }
    }
}

/// Algebraic floor `C (N / cost)^{-pN/d}` with `N = d/2 + 1 + γ`.
pub fn algebraic_floor(constant: f64, gamma: f64, p: f64, dim: usize, cost: f64) -> Result<f64> {
    if !(cost > 0.0) {
        return Err(Error::ZeroCost);
    }
    let d = dim as f64;
    let big_n = d / 2.0 + 1.0 + gamma;
    Ok(constant * libm::pow(big_n / cost, -p * big_n / d))
}

/// Radius `‖θ₀‖_{L∞} / (C ‖∇θ₀‖_{L∞})` for the ball-count bound with `N = 1`.
pub fn r1_estimate(theta0: &ScalarField, constant: f64) -> Result<f64> {
    if !(constant > 0.0) {
        return Err(Error::InvalidArgument("constant must be positive"));
    }
    let sup = theta0.max_abs();
    let grad_sup = crate::spectral::gradient(theta0).max_magnitude();
    if sup == 0.0 || grad_sup == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(sup / (constant * grad_sup))
}

/// Largest excess of `log₊|∇θ(t)| - log₊|∇θ₀|` over `∫₀ᵗ ‖∇u‖_{L¹} + slack · t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGradientCheck {
    pub slack: f64,
    /// Last time included in the check.
    pub until: f64,
    pub samples: usize,
    /// `max_t (lhs - rhs)`; non-positive when the inequality holds.
    pub max_excess: f64,
    pub holds: bool,
}

/// Checks the log-gradient growth inequality along a run up to `until`.
/// Needs `p = 1` in the cost exponents.
pub fn log_gradient_check(series: &MixTimeSeries, slack: f64, until: f64) -> Result<LogGradientCheck> {
    let cost = series.cost(1.0).ok_or(Error::ParamMismatch {
        expected: 1.0,
        got: f64::NAN,
    })?;
    let first = series.records.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let base = first.log_grad;
    let mut max_excess = f64::NEG_INFINITY;
    let mut samples = 0;
    for (r, c) in series.records.iter().zip(&cost) {
        if r.time > until + 1e-12 {
            break;
        }
        let excess = (r.log_grad - base) - (c + slack * r.time);
        max_excess = max_excess.max(excess);
        samples += 1;
    }
    Ok(LogGradientCheck {
        slack,
        until,
        samples,
        max_excess,
        holds: max_excess <= 0.0,
    })
}

/// Outcome of the rescaling identities for one `(θ, u, a, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingReport {
    pub a: f64,
    pub p: f64,
    pub dim: usize,
    pub h_neg1_theta: f64,
    pub h_neg1_eta: f64,
    /// `|‖η‖_{H⁻¹} - a^{d/2+1} ‖θ‖_{H⁻¹}| / (a^{d/2+1} ‖θ‖_{H⁻¹})`.
    pub h_neg1_mismatch: f64,
    pub grad_u: f64,
    pub grad_v: f64,
    /// `|‖∇v‖_{L^p} - a^{d/p-1} ‖∇u‖_{L^p}| / (a^{d/p-1} ‖∇u‖_{L^p})`.
    pub grad_mismatch: f64,
}

/// Support `(lo, hi)` per axis of the default scaling-check fields.
pub const DEFAULT_SCALING_SUPPORT: (f64, f64) = (0.375, 0.625);

/// Tolerance of the compact-support check, relative to the field maximum.
pub const SUPPORT_TOLERANCE: f64 = 1e-10;

fn check_support(f: &ScalarField) -> Result<()> {
    let grid = *f.grid();
    let vals = f.values();
    let scale = vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (idx, &v) in vals.iter().enumerate() {
        let m = grid.unravel(idx);
        if m[..grid.dim()].contains(&0) && v.abs() > SUPPORT_TOLERANCE * scale {
            return Err(Error::SupportViolation { value: v });
        }
    }
    Ok(())
}

/// `η(x) = f(x/a)` on `(0, a)^d` and zero elsewhere, evaluating the
/// Fourier series of `f` at the rescaled points.
pub fn rescale_into_subcube(f: &ScalarField, a: f64) -> Result<ScalarField> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidArgument("scale factor must lie in (0, 1]"));
    }
    let grid = *f.grid();
    let n = grid.n();
    let h = grid.spacing();
    // indices j with 0 < x_j < a map to s_j = x_j / a
    let inside: Vec<usize> = (0..n).filter(|&j| j as f64 * h > 0.0 && (j as f64 * h) < a - 1e-14).collect();
    // table[j][m] = basis value of FFT index m at s_j
    let table: Vec<Vec<Complex64>> = inside
        .iter()
        .map(|&j| {
            let s = j as f64 * h / a;
            (0..n)
                .map(|m| {
                    if m == n / 2 {
                        Complex64::new(libm::cos(PI * n as f64 * s), 0.0)
                    } else {
                        let k = grid.wavenumber(m) as f64;
                        let ang = 2.0 * PI * k * s;
                        Complex64::new(libm::cos(ang), libm::sin(ang))
                    }
                })
                .collect()
        })
        .collect();

    let mut data: Vec<Complex64> = f.coefficients().into_owned();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..grid.dim() {
        let stride = grid.stride(axis);
        let outer_count = grid.len() / (n * stride);
        for outer in 0..outer_count {
            let base = outer * n * stride;
            for inner in 0..stride {
                for (m, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + m * stride + inner];
                }
                for j in 0..n {
                    data[base + j * stride + inner] = Complex64::new(0.0, 0.0);
                }
                for (row, &j) in table.iter().zip(&inside) {
                    let v = row
                        .iter()
                        .zip(&line)
                        .fold(Complex64::new(0.0, 0.0), |acc, (b, c)| acc + b * c);
                    data[base + j * stride + inner] = v;
                }
            }
        }
    }
    ScalarField::from_values(grid, data.into_iter().map(|z| z.re).collect())
}

/// Compares both sides of the rescaling identities
/// `‖η‖_{H⁻¹} = a^{d/2+1} ‖θ‖_{H⁻¹}` and `‖∇v‖_{L^p} = a^{d/p-1} ‖∇u‖_{L^p}`
/// with `η = θ(·/a)`, `v = u(·/a)` restricted to `(0, a)^d`.
///
/// `θ` and `u` must vanish on the faces of the unit cell. Mix-norms are
/// taken of the mean-free parts.
pub fn scaling_check(theta: &ScalarField, u: &VectorField, a: f64, p: f64) -> Result<ScalingReport> {
    if theta.grid() != u.grid() {
        return Err(Error::GridMismatch);
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidArgument("scale factor must lie in (0, 1]"));
    }
    check_support(theta)?;
    for c in u.components() {
        check_support(c)?;
    }
    let d = theta.grid().dim() as f64;

    let eta = rescale_into_subcube(theta, a)?;
    let h_theta = norms::h_neg1_norm(&theta.without_mean())?;
    let h_eta = norms::h_neg1_norm(&eta.without_mean())?;
    let h_expect = libm::pow(a, d / 2.0 + 1.0) * h_theta;

    let v = VectorField::new(
        u.components()
            .iter()
            .map(|c| rescale_into_subcube(c, a))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let g_u = norms::grad_lp_norm(u, p)?;
    let g_v = norms::grad_lp_norm(&v, p)?;
    let g_expect = libm::pow(a, d / p - 1.0) * g_u;

    Ok(ScalingReport {
        a,
        p,
        dim: theta.grid().dim(),
        h_neg1_theta: h_theta,
        h_neg1_eta: h_eta,
        h_neg1_mismatch: (h_eta - h_expect).abs() / h_expect,
        grad_u: g_u,
        grad_v: g_v,
        grad_mismatch: (g_v - g_expect).abs() / g_expect,
    })
}

/// `sin⁸` envelope on `(lo, hi)`, zero outside; C⁷ at the ends.
fn envelope(s: f64, lo: f64, hi: f64) -> f64 {
    if s <= lo || s >= hi {
        0.0
    } else {
        let v = libm::sin(PI * (s - lo) / (hi - lo));
        let v2 = v * v;
        let v4 = v2 * v2;
        v4 * v4
    }
}

/// One-dimensional profile on `(lo, hi)`: the envelope times an even
/// quadratic in `z = ((s - c)/w)²` chosen so that the profile has zero
/// integral and zero second moment about its center.
#[derive(Debug, Clone, Copy)]
struct BalancedProfile {
    lo: f64,
    hi: f64,
    alpha: f64,
    beta: f64,
}

impl BalancedProfile {
    fn new(lo: f64, hi: f64) -> Self {
        // moments M_m = ∫ B z^m over the unit reference interval
        let steps = 20_000;
        let mut m = [0.0; 4];
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let w = if i == 0 || i == steps {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let b = envelope(t, 0.0, 1.0);
            let z = (2.0 * t - 1.0) * (2.0 * t - 1.0);
            let mut zp = 1.0;
            for mm in m.iter_mut() {
                *mm += w * b * zp;
                zp *= z;
            }
        }
        // M0 + α M1 + β M2 = 0, M1 + α M2 + β M3 = 0
        let det = m[1] * m[3] - m[2] * m[2];
        let alpha = (-m[0] * m[3] + m[1] * m[2]) / det;
        let beta = (-m[1] * m[1] + m[0] * m[2]) / det;
        Self { lo, hi, alpha, beta }
    }

    fn eval(&self, s: f64) -> f64 {
        let c = 0.5 * (self.lo + self.hi);
        let w = 0.5 * (self.hi - self.lo);
        let z = ((s - c) / w) * ((s - c) / w);
        envelope(s, self.lo, self.hi) * (1.0 + self.alpha * z + self.beta * z * z)
    }
}

/// Smooth mean-zero scalar supported in `(lo, hi)^d`, a product of
/// one-dimensional profiles whose zeroth and second moments vanish.
pub fn scaling_test_scalar(grid: &GridSpec, lo: f64, hi: f64) -> ScalarField {
    let prof = BalancedProfile::new(lo, hi);
    let d = grid.dim();
    ScalarField::from_fn(*grid, |p| (0..d).map(|i| prof.eval(p[i])).product())
}

fn envelope_derivative(s: f64, lo: f64, hi: f64) -> f64 {
    if s <= lo || s >= hi {
        0.0
    } else {
        let w = PI / (hi - lo);
        let v = libm::sin(w * (s - lo));
        let v7 = v * v * v * v * v * v * v;
        8.0 * w * v7 * libm::cos(w * (s - lo))
    }
}

/// Smooth incompressible velocity supported in `(lo, hi)^d`: the rotated
/// gradient of a `sin⁸` bump in the first two axes (zero for `d = 1`).
pub fn scaling_test_velocity(grid: &GridSpec, lo: f64, hi: f64) -> VectorField {
    let d = grid.dim();
    if d < 2 {
        return VectorField::zeros(*grid);
    }
    VectorField::from_fn(*grid, |p, out| {
        let e: Vec<f64> = (0..d).map(|i| envelope(p[i], lo, hi)).collect();
        let rest: f64 = e[2..].iter().product();
        out.iter_mut().for_each(|x| *x = 0.0);
        out[0] = -e[0] * envelope_derivative(p[1], lo, hi) * rest;
        out[1] = envelope_derivative(p[0], lo, hi) * e[1] * rest;
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_from(times: &[f64], h: impl Fn(f64) -> f64) -> MixTimeSeries {
        let mut s = MixTimeSeries::new(vec![2.0]);
        for &t in times {
            s.push(norms::MixRecord {
                time: t,
                h_neg1: h(t),
                l2: 1.0,
                grad_lp: vec![1.0],
                cost: vec![t],
                log_grad: 0.0,
                degenerate: false,
            })
            .unwrap();
        }
        s
    }

    fn params() -> BoundParams {
        BoundParams {
            dim: 2,
            eps0: 0.1,
            c: 2.0,
            r0: 0.25,
            r1: 0.2,
            n_balls: 3,
            p: 2.0,
            lambda: 0.5,
            kappa: 0.2,
            measure_a: 0.16,
            linf_norm: 3.0,
        }
    }

    #[test]
    fn zero_cost_gives_prefactor() {
        let p = params();
        let mut acc = CostAccumulator::new(2.0).unwrap();
        for i in 0..5 {
            acc.push(i as f64, 0.0).unwrap();
        }
        let curve = lower_bound_curve(&p, &acc).unwrap();
        let pre = 0.1 * 0.25f64.powi(2) * 3.0;
        for pt in curve {
            assert!((pt.bound - pre).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_integrand_gives_exponential() {
        let p = params();
        let mut acc = CostAccumulator::new(2.0).unwrap();
        let f = 1.7;
        for i in 0..20 {
            acc.push(0.25 * i as f64, f).unwrap();
        }
        let curve = lower_bound_curve(&p, &acc).unwrap();
        for pt in &curve {
            let expect = p.prefactor() * (-2.0 * f * pt.time / 0.4).exp();
            assert!((pt.bound - expect).abs() < 1e-14 * expect.max(1e-300));
            let rate_prime = 2.0 / (3.0 * 0.04f64).sqrt();
            let expect_prime = 0.1 * 0.04 * 3.0 * (-rate_prime * f * pt.time).exp();
            assert!((pt.bound_prime - expect_prime).abs() < 1e-14);
        }
        assert!(curve.windows(2).all(|w| w[1].bound <= w[0].bound));
    }

    #[test]
    fn mismatched_exponent() {
        let acc = CostAccumulator::new(1.5).unwrap();
        assert!(matches!(lower_bound_curve(&params(), &acc), Err(Error::ParamMismatch { .. })));
    }

    #[test]
    fn invalid_kappa() {
        let mut p = params();
        p.kappa = 0.4;
        assert!(p.validate().is_err());
    }

    #[test]
    fn exact_exponentials_are_recovered() {
        let times: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let s = series_from(&times, |t| (-2.0 * t).exp());
        let fit = fit_decay_rate(&s, (0.0, 5.0)).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!(fit.r_squared > 1.0 - 1e-12);
        assert!((fit.rate_reciprocal - 0.5).abs() < 1e-12);

        let s = series_from(&times, |t| 5.0 * (-0.3 * t).exp());
        let fit = fit_decay_rate(&s, (0.0, 5.0)).unwrap();
        assert!((fit.slope + 0.3).abs() < 1e-12);
        assert!((fit.intercept - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples() {
        let times: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let s = series_from(&times, |t| (-t).exp());
        assert!(matches!(
            fit_decay_rate(&s, (0.0, 10.0)),
            Err(Error::InsufficientData { needed: 10, got: 9 })
        ));
    }

    #[test]
    fn single_row_rate_table() {
        let fit = RateFit {
            t0: 1.0,
            t1: 5.0,
            samples: 10,
            slope: -0.5,
            intercept: 0.0,
            r_squared: 1.0,
            rate_reciprocal: 2.0,
        };
        let table = rate_vs_parameter(&[(0.5, fit)]);
        assert_eq!(table.rows, vec![(0.5, 2.0)]);
        assert!(table.fit.is_none());
    }

    #[test]
    fn floor_formula() {
        // cost = N gives the constant back
        assert!((algebraic_floor(3.0, 0.0, 2.0, 2, 2.0).unwrap() - 3.0).abs() < 1e-15);
        // d = 2, p = 2, γ = 0: exponent pN/d = 2
        let f1 = algebraic_floor(1.0, 0.0, 2.0, 2, 1.0).unwrap();
        let f2 = algebraic_floor(1.0, 0.0, 2.0, 2, 2.0).unwrap();
        assert!((f1 - 0.25).abs() < 1e-15);
        assert!((f2 / f1 - 4.0).abs() < 1e-13);
        assert_eq!(algebraic_floor(1.0, 0.0, 2.0, 2, 0.0), Err(Error::ZeroCost));
    }

    #[test]
    fn envelope_lies_below_series() {
        let times: Vec<f64> = (0..60).map(|i| 0.1 * i as f64).collect();
        let s = series_from(&times, |t| (-0.4 * t).exp() * (1.0 + 0.05 * (3.0 * t).sin()));
        let env = fit_envelope(&s, 2.0, (1.0, 5.0)).unwrap();
        assert!(env.holds);
        assert!(env.min_ratio >= 1.0 && env.min_ratio < 1.0 + 1e-9);
    }

    #[test]
    fn balanced_profile_moments_vanish() {
        let prof = BalancedProfile::new(0.1, 0.4);
        let steps = 40_000;
        let (mut m0, mut m2) = (0.0, 0.0);
        for i in 0..steps {
            let s = 0.1 + 0.3 * (i as f64 + 0.5) / steps as f64;
            let v = prof.eval(s);
            m0 += v;
            m2 += v * (s - 0.25) * (s - 0.25);
        }
        assert!(m0.abs() / (steps as f64) < 1e-10);
        assert!(m2.abs() / (steps as f64) < 1e-12);
    }

    #[test]
    fn unit_scale_is_identity() {
        let g = GridSpec::square(64).unwrap();
        let th = scaling_test_scalar(&g, 0.1, 0.6);
        let u = scaling_test_velocity(&g, 0.2, 0.7);
        let rep = scaling_check(&th, &u, 1.0, 2.0).unwrap();
        assert!(rep.h_neg1_mismatch < 1e-12);
        assert!(rep.grad_mismatch < 1e-12);
    }

    #[test]
    fn support_violation_detected() {
        let g = GridSpec::square(32).unwrap();
        let th = ScalarField::from_fn(g, |p| (2.0 * PI * p[0]).cos() * (2.0 * PI * p[1]).sin());
        let u = VectorField::zeros(g);
        assert!(matches!(scaling_check(&th, &u, 0.5, 2.0), Err(Error::SupportViolation { .. })));
    }
}
