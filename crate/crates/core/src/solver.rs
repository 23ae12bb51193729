//! Pseudo-spectral integration of the transport equation `∂tθ + u·∇θ = 0`.
//!
//! The state is kept in spectral form. Each right-hand side evaluation
//! forms `u·∇θ` in real space and truncates it with the 2/3 rule; time
//! stepping is classical RK4 with a CFL-limited step, and the velocity is
//! re-evaluated from the current scalar at every stage.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::GridSpec;
use crate::norms::{self, CostAccumulator, MixRecord, MixTimeSeries};
use crate::spectral;
use crate::velocity::{self, DEFAULT_DEGENERACY_FLOOR};

/// Snapshot times matching the reference solution plots.
pub const DEFAULT_SNAPSHOT_TIMES: [f64; 6] = [0.0, 1.0, 2.05, 3.1, 4.15, 5.19];

/// Velocity acting on the scalar at one integrator stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageVelocity {
    /// Real-space velocity.
    pub u: VectorField,
    /// The designed direction vanished and `u` was held at zero.
    pub degenerate: bool,
}

/// Supplies the advecting velocity for a given scalar and time.
pub trait VelocitySource {
    fn velocity(&mut self, theta: &ScalarField, t: f64) -> Result<StageVelocity>;
}

/// Built-in velocity choices.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityMode {
    /// Steepest-descent velocity scaled to `‖∇u‖_{L²} = enstrophy`.
    SteepestDescent { degeneracy_floor: f64, enstrophy: f64 },
    /// A fixed field, independent of θ and t.
    Prescribed(VectorField),
}

impl Default for VelocityMode {
    fn default() -> Self {
        VelocityMode::SteepestDescent {
            degeneracy_floor: DEFAULT_DEGENERACY_FLOOR,
            enstrophy: 1.0,
        }
    }
}

impl VelocitySource for VelocityMode {
    fn velocity(&mut self, theta: &ScalarField, _t: f64) -> Result<StageVelocity> {
        match self {
            VelocityMode::SteepestDescent {
                degeneracy_floor,
                enstrophy,
            } => {
                let res = velocity::steepest_descent_velocity(theta, *degeneracy_floor)?;
                let u = if *enstrophy == 1.0 {
                    res.u
                } else {
                    res.u.scaled(*enstrophy)
                };
                Ok(StageVelocity {
                    u,
                    degenerate: res.degenerate,
                })
            }
            VelocityMode::Prescribed(u) => Ok(StageVelocity {
                u: u.to_real(),
                degenerate: false,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub t_final: f64,
    /// Courant number; `dt <= cfl · h / ‖u‖_{L∞}`.
    pub cfl: f64,
    /// Upper bound on the step, also used while the velocity vanishes.
    pub dt_max: f64,
    pub snapshot_times: Vec<f64>,
    /// Exponents `p` for which `‖∇u‖_{L^p}` and its time integral are tracked.
    pub p_list: Vec<f64>,
    pub dealias: bool,
    /// Stop once the top octave of the resolved band holds more than
    /// `fill_threshold` of the spectral energy.
    pub stop_on_spectral_fill: bool,
    pub fill_threshold: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            t_final: 5.2,
            cfl: 0.5,
            dt_max: 0.05,
            snapshot_times: DEFAULT_SNAPSHOT_TIMES.to_vec(),
            p_list: alloc::vec![1.0, 2.0],
            dealias: true,
            stop_on_spectral_fill: true,
            fill_threshold: 0.01,
            max_steps: 1_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidArgument("final time must be a finite non-negative number"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidArgument("CFL number must lie in (0, 1]"));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::InvalidArgument("dt_max must be positive"));
        }
        if self.p_list.iter().any(|&p| !(p >= 1.0)) {
            return Err(Error::InvalidArgument("cost exponents must satisfy p >= 1"));
        }
        if !(self.fill_threshold > 0.0 && self.fill_threshold < 1.0) {
            return Err(Error::InvalidArgument("fill threshold must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// The two-bump initial datum of width parameter `a`, normalised to unit L².
///
/// A positive bump `sin(2πx/a) sin(2π(y + a/8)/a)` on
/// `0 < x < a/2, -a/8 < y < 3a/8` and its negative counterpart
/// `sin(2πx/a) sin(2π(y - a/8)/a)` on `a/2 < x < a, a/8 < y < 5a/8`.
/// On the grid the negative lobe is rescaled by the ratio of the two grid
/// sums so the sampled field has zero mean while keeping its support.
pub fn initial_data(a: f64, grid: &GridSpec) -> Result<ScalarField> {
    if grid.dim() != 2 {
        return Err(Error::InvalidGrid("initial data family is two-dimensional"));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidArgument("a must lie in (0, 1]"));
    }
    let lobes = |p: &[f64; 3]| -> (f64, f64) {
        let (x, y) = (p[0], p[1]);
        let sx = libm::sin(2.0 * PI * x / a);
        let mut pos = 0.0;
        let mut neg = 0.0;
        if x > 0.0 && x < a / 2.0 {
            let ys = if y < 3.0 * a / 8.0 { y } else { y - 1.0 };
            if ys > -a / 8.0 && ys < 3.0 * a / 8.0 {
                pos = sx * libm::sin(2.0 * PI * (ys + a / 8.0) / a);
            }
        }
        if x > a / 2.0 && x < a && y > a / 8.0 && y < 5.0 * a / 8.0 {
            neg = sx * libm::sin(2.0 * PI * (y - a / 8.0) / a);
        }
        (pos, neg)
    };
    let (mut sp, mut sn) = (0.0, 0.0);
    for i in 0..grid.len() {
        let (p, n) = lobes(&grid.point(i));
        sp += p;
        sn += n;
    }
    if sp <= 0.0 || sn >= 0.0 {
        return Err(Error::InvalidArgument("a is too small for the grid to resolve the data"));
    }
    let balance = -sp / sn;
    let raw = ScalarField::from_fn(*grid, |p| {
        let (pos, neg) = lobes(p);
        pos + balance * neg
    });
    let l2 = norms::lp_norm(&raw, 2.0)?;
    Ok(raw.scaled(1.0 / l2))
}

/// `-(u·∇θ)` in spectral form.
fn transport_rhs(theta: &ScalarField, u: &VectorField, dealias: bool) -> ScalarField {
    let grid = *theta.grid();
    let grad = spectral::to_real_fields(spectral::gradient(theta).components());
    let uv: Vec<_> = u.components().iter().map(|c| c.values()).collect();
    let gv: Vec<_> = grad.iter().map(|g| g.values()).collect();
    let adv: Vec<f64> = (0..grid.len())
        .map(|i| -(0..grid.dim()).map(|j| uv[j][i] * gv[j][i]).sum::<f64>())
        .collect();
    let rhs = ScalarField::from_values(grid, adv)
        .expect("grid length")
        .into_spectral();
    if dealias {
        spectral::dealias(&rhs)
    } else {
        rhs
    }
}

fn axpy(base: &ScalarField, k: &ScalarField, h: f64) -> ScalarField {
    let b = base.coefficients();
    let kc = k.coefficients();
    let out = b.iter().zip(kc.iter()).map(|(x, y)| x + y * h).collect();
    ScalarField::from_coefficients(*base.grid(), out).expect("grid length")
}

/// CFL step limit `cfl · h / ‖u‖_{L∞}`; infinite for `u = 0`.
pub fn cfl_limit(grid: &GridSpec, u: &VectorField, cfl: f64) -> f64 {
    let umax = u.max_magnitude();
    if umax == 0.0 {
        f64::INFINITY
    } else {
        cfl * grid.spacing() / umax
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    /// Updated scalar, spectral form.
    pub theta: ScalarField,
    /// A stage velocity was degenerate.
    pub degenerate: bool,
}

/// One RK4 step of `θ̇ = -u·∇θ` from time `t`.
///
/// `first_stage` may carry the velocity already evaluated at `(θ, t)`.
pub fn step(
    theta: &ScalarField,
    t: f64,
    dt: f64,
    cfg: &SolverConfig,
    source: &mut dyn VelocitySource,
    first_stage: Option<StageVelocity>,
) -> Result<StepResult> {
    let grid = *theta.grid();
    let theta = theta.to_spectral();
    let v1 = match first_stage {
        Some(v) => v,
        None => source.velocity(&theta, t)?,
    };
    let limit = cfl_limit(&grid, &v1.u, cfg.cfl);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    let mut degenerate = v1.degenerate;

    let k1 = transport_rhs(&theta, &v1.u, cfg.dealias);
    let th2 = axpy(&theta, &k1, 0.5 * dt);
    let v2 = source.velocity(&th2, t + 0.5 * dt)?;
    degenerate |= v2.degenerate;
    let k2 = transport_rhs(&th2, &v2.u, cfg.dealias);
    let th3 = axpy(&theta, &k2, 0.5 * dt);
    let v3 = source.velocity(&th3, t + 0.5 * dt)?;
    degenerate |= v3.degenerate;
    let k3 = transport_rhs(&th3, &v3.u, cfg.dealias);
    let th4 = axpy(&theta, &k3, dt);
    let v4 = source.velocity(&th4, t + dt)?;
    degenerate |= v4.degenerate;
    let k4 = transport_rhs(&th4, &v4.u, cfg.dealias);

    let c0 = theta.coefficients();
    let (c1, c2, c3, c4) = (k1.coefficients(), k2.coefficients(), k3.coefficients(), k4.coefficients());
    let h6 = dt / 6.0;
    let out = (0..grid.len())
        .map(|i| c0[i] + (c1[i] + (c2[i] + c3[i]) * 2.0 + c4[i]) * h6)
        .collect();
    Ok(StepResult {
        theta: ScalarField::from_coefficients(grid, out)?,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    FinalTime,
    SpectralFill,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    /// Real-space field.
    pub field: ScalarField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub series: MixTimeSeries,
    pub snapshots: Vec<Snapshot>,
    /// Record times at which a degenerate velocity was held at zero.
    pub degenerate_times: Vec<f64>,
    /// First record time at which the spectral-fill detector tripped.
    pub spectral_fill_time: Option<f64>,
    pub stop: StopReason,
    pub steps: usize,
    /// Scalar at the last recorded time, spectral form.
    pub final_theta: ScalarField,
    /// Scalar at t = 0 after truncation, spectral form.
    pub initial_theta: ScalarField,
}

/// Integrates from `theta0` up to `cfg.t_final`, recording diagnostics at
/// every accepted step.
pub fn run(cfg: &SolverConfig, theta0: &ScalarField, source: &mut dyn VelocitySource) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = *theta0.grid();
    let mut theta = theta0.to_spectral();
    if cfg.dealias {
        theta = spectral::dealias(&theta);
    }
    let initial_theta = theta.clone();

    let mut snap_times: Vec<f64> = cfg
        .snapshot_times
        .iter()
        .copied()
        .filter(|&s| s >= 0.0 && s <= cfg.t_final)
        .collect();
    snap_times.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    snap_times.dedup();
    let mut next_snap = 0;

    let mut accs = cfg
        .p_list
        .iter()
        .map(|&p| CostAccumulator::new(p))
        .collect::<Result<Vec<_>>>()?;
    let mut series = MixTimeSeries::new(cfg.p_list.clone());
    let mut snapshots = Vec::new();
    let mut degenerate_times = Vec::new();
    let mut spectral_fill_time = None;
    let mut steps = 0;
    let stop;

    let mut t = 0.0;
    let mut vel = source.velocity(&theta, t)?;
    loop {
        let grad_lp = norms::grad_lp_norms(&vel.u, &cfg.p_list)?;
        for (acc, &g) in accs.iter_mut().zip(&grad_lp) {
            acc.push(t, g)?;
        }
        let coeffs = theta.coefficients();
        let l2 = libm::sqrt(velocity::l2_sq(&coeffs));
        let h_neg1 = norms::h_neg1_norm(&theta.without_mean())?;
        series.push(MixRecord {
            time: t,
            h_neg1,
            l2,
            grad_lp,
            cost: accs.iter().map(|a| a.total()).collect(),
            log_grad: norms::log_plus_gradient(&theta),
            degenerate: vel.degenerate,
        })?;
        if vel.degenerate {
            degenerate_times.push(t);
        }
        while next_snap < snap_times.len() && snap_times[next_snap] <= t + 1e-12 {
            snapshots.push(Snapshot {
                time: snap_times[next_snap],
                field: theta.to_real(),
            });
            next_snap += 1;
        }
        if spectral_fill_time.is_none()
            && spectral::top_octave_fraction(&theta, cfg.dealias) > cfg.fill_threshold
        {
            spectral_fill_time = Some(t);
            if cfg.stop_on_spectral_fill {
                stop = StopReason::SpectralFill;
                break;
            }
        }
        if t >= cfg.t_final - 1e-12 {
            stop = StopReason::FinalTime;
            break;
        }
        if steps >= cfg.max_steps {
            stop = StopReason::MaxSteps;
            break;
        }

        let target = if next_snap < snap_times.len() {
            snap_times[next_snap].min(cfg.t_final)
        } else {
            cfg.t_final
        };
        let mut dt = cfl_limit(&grid, &vel.u, cfg.cfl).min(cfg.dt_max);
        let mut t_next = t + dt;
        if t_next >= target - 1e-12 {
            dt = target - t;
            t_next = target;
        }
        let res = step(&theta, t, dt, cfg, source, Some(vel))?;
        theta = res.theta;
        t = t_next;
        steps += 1;
        vel = source.velocity(&theta, t)?;
    }

    Ok(RunOutput {
        series,
        snapshots,
        degenerate_times,
        spectral_fill_time,
        stop,
        steps,
        final_theta: theta,
        initial_theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_data_is_normalised_and_mean_free() {
        let g = GridSpec::square(64).unwrap();
        for a in [0.5, 7.0 / 12.0, 11.0 / 12.0, 1.0] {
            let th = initial_data(a, &g).unwrap();
            assert!((norms::lp_norm(&th, 2.0).unwrap() - 1.0).abs() < 1e-12);
            assert!(th.mean().abs() < 1e-15);
        }
    }

    #[test]
    fn initial_data_validates_a() {
        let g = GridSpec::square(32).unwrap();
        assert!(initial_data(1.5, &g).is_err());
        assert!(initial_data(0.0, &g).is_err());
        assert!(initial_data(0.5, &GridSpec::new(1, 32).unwrap()).is_err());
    }

    #[test]
    fn zero_velocity_leaves_theta_unchanged() {
        let g = GridSpec::square(32).unwrap();
        let th = initial_data(0.75, &g).unwrap();
        let mut src = VelocityMode::Prescribed(VectorField::zeros(g));
        let cfg = SolverConfig::default();
        let out = step(&th, 0.0, 0.01, &cfg, &mut src, None).unwrap();
        let a = out.theta.to_real();
        let diff = a
            .values()
            .iter()
            .zip(th.values().iter())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(diff < 1e-14);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = GridSpec::square(32).unwrap();
        let th = initial_data(0.75, &g).unwrap();
        let u = VectorField::from_fn(g, |_, out| {
            out[0] = 1.0;
            out[1] = 0.0;
        });
        let mut src = VelocityMode::Prescribed(u);
        let cfg = SolverConfig::default();
        let err = step(&th, 0.0, 0.1, &cfg, &mut src, None).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
    }

    #[test]
    fn zero_final_time_records_initial_row_only() {
        let g = GridSpec::square(32).unwrap();
        let th = initial_data(0.75, &g).unwrap();
        let cfg = SolverConfig {
            t_final: 0.0,
            ..SolverConfig::default()
        };
        let out = run(&cfg, &th, &mut VelocityMode::default()).unwrap();
        assert_eq!(out.series.len(), 1);
        assert_eq!(out.snapshots.len(), 1);
        assert_eq!(out.snapshots[0].time, 0.0);
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn rejects_bad_config() {
        let bad = SolverConfig {
            cfl: 1.5,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
