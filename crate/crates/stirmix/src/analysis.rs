//! Per-run and per-sweep analysis shared by `simulate`, `sweep` and `analyze`.

use serde::Serialize;
use stirmix_core::bounds::{self, BoundParams, EnvelopeFit, LinearFit, RateFit};
use stirmix_core::mixedness;
use stirmix_core::norms::MixTimeSeries;
use stirmix_core::ScalarField;

use crate::config::ExperimentConfig;
use crate::render::{LinePlot, Series};

/// Radii scanned when estimating the unmixed scale of the initial level set.
pub const R0_SCAN_POINTS: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub window: [f64; 2],
    pub samples: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rate_reciprocal: f64,
}

impl From<&RateFit> for FitReport {
    fn from(f: &RateFit) -> Self {
        Self {
            window: [f.t0, f.t1],
            samples: f.samples,
            slope: f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
            rate_reciprocal: f.rate_reciprocal,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LineFitReport {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl From<&LinearFit> for LineFitReport {
    fn from(f: &LinearFit) -> Self {
        Self {
            slope: f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Geometry {
    pub lambda: f64,
    pub kappa: f64,
    pub measure_a: f64,
    pub linf_norm: f64,
    pub r0_proxy: Option<f64>,
    /// `‖θ₀‖_{L∞} / ‖∇θ₀‖_{L∞}`.
    pub r1_estimate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeReport {
    pub p: f64,
    pub window: [f64; 2],
    pub prefactor: f64,
    pub rate: f64,
    pub min_ratio: f64,
    pub holds: bool,
    /// `ε₀` and `c` reproducing the envelope through the bound formula.
    pub eps0: Option<f64>,
    pub c: Option<f64>,
    /// The bound curve built from `eps0, c` lies below the data in the window.
    pub bound_curve_holds: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LogGradientReport {
    pub slack: f64,
    pub until: f64,
    pub samples: usize,
    pub max_excess: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunAnalysis {
    pub fit_window: [f64; 2],
    pub fit: Option<FitReport>,
    pub fit_error: Option<String>,
    pub envelope: Option<EnvelopeReport>,
    pub envelope_error: Option<String>,
    pub log_gradient: Option<LogGradientReport>,
    pub log_gradient_error: Option<String>,
    pub geometry: Option<Geometry>,
}

pub fn initial_geometry(theta0: &ScalarField, lambda: f64, kappa: f64) -> Option<Geometry> {
    let mask = mixedness::super_level_set(theta0, lambda).ok()?;
    let deltas = mixedness::geometric_deltas(theta0.grid(), R0_SCAN_POINTS);
    let scan = mixedness::mixing_scale_scan(&mask, kappa, &deltas).ok()?;
    Some(Geometry {
        lambda,
        kappa,
        measure_a: mask.measure(),
        linf_norm: theta0.max_abs(),
        r0_proxy: scan.r0_proxy,
        r1_estimate: bounds::r1_estimate(theta0, 1.0).ok(),
    })
}

fn envelope_report(
    series: &MixTimeSeries,
    env: &EnvelopeFit,
    geometry: Option<&Geometry>,
    dim: usize,
) -> EnvelopeReport {
    let mut rep = EnvelopeReport {
        p: env.p,
        window: [env.t0, env.t1],
        prefactor: env.prefactor,
        rate: env.rate,
        min_ratio: env.min_ratio,
        holds: env.holds,
        eps0: None,
        c: None,
        bound_curve_holds: None,
    };
    let Some(geo) = geometry else { return rep };
    let Some(r0) = geo.r0_proxy else { return rep };
    // a kappa valid for the bound statement
    let kappa = geo.kappa.min(0.5 * geo.lambda / (1.0 + geo.lambda));
    let params = BoundParams::from_envelope(env, dim, r0, geo.measure_a, geo.linf_norm, geo.lambda, kappa);
    rep.eps0 = Some(params.eps0);
    rep.c = Some(params.c);
    if let Ok(acc) = bounds::cost_accumulator(series, env.p) {
        if let Ok(curve) = bounds::lower_bound_curve(&params, &acc) {
            let ok = curve
                .iter()
                .zip(&series.records)
                .filter(|(pt, _)| pt.time >= env.t0 - 1e-12 && pt.time <= env.t1 + 1e-12)
                .all(|(pt, r)| pt.bound <= r.h_neg1);
            rep.bound_curve_holds = Some(ok);
        }
    }
    rep
}

pub fn analyze_run(
    series: &MixTimeSeries,
    spectral_fill_time: Option<f64>,
    theta0: Option<&ScalarField>,
    cfg: &ExperimentConfig,
) -> RunAnalysis {
    let last = series.records.last().map_or(0.0, |r| r.time);
    let window = match cfg.fit_window {
        Some(w) => (w[0], w[1]),
        None => bounds::default_fit_window(spectral_fill_time),
    };
    let window = (window.0, window.1.min(last));
    let (fit, fit_error) = match bounds::fit_decay_rate(series, window) {
        Ok(f) => (Some(FitReport::from(&f)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let geometry = theta0.and_then(|t| initial_geometry(t, cfg.lambda, cfg.kappa));
    let dim = theta0.map_or(2, |t| t.grid().dim());
    let (envelope, envelope_error) = match bounds::fit_envelope(series, 2.0, window) {
        Ok(env) => (Some(envelope_report(series, &env, geometry.as_ref(), dim)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let until = spectral_fill_time.unwrap_or(last);
    let (log_gradient, log_gradient_error) = match bounds::log_gradient_check(series, cfg.log_grad_slack, until) {
        Ok(c) => (
            Some(LogGradientReport {
                slack: c.slack,
                until: c.until,
                samples: c.samples,
                max_excess: c.max_excess,
                holds: c.holds,
            }),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    RunAnalysis {
        fit_window: [window.0, window.1],
        fit,
        fit_error,
        envelope,
        envelope_error,
        log_gradient,
        log_gradient_error,
        geometry,
    }
}

/// One row of the rate table.
#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub a: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub rate_reciprocal: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateSummary {
    pub rows: Vec<RateRow>,
    pub fit: Option<LineFitReport>,
    /// Set when fewer than two members could be fitted.
    pub fit_undefined: bool,
    pub strictly_increasing: bool,
}

pub fn rate_summary(members: &[(f64, Option<FitReport>)]) -> RateSummary {
    let fits: Vec<(f64, RateFit)> = members
        .iter()
        .filter_map(|(a, f)| {
            f.as_ref().map(|f| {
                (
                    *a,
                    RateFit {
                        t0: f.window[0],
                        t1: f.window[1],
                        samples: f.samples,
                        slope: f.slope,
                        intercept: f.intercept,
                        r_squared: f.r_squared,
                        rate_reciprocal: f.rate_reciprocal,
                    },
                )
            })
        })
        .collect();
    let table = bounds::rate_vs_parameter(&fits);
    let mut rows: Vec<RateRow> = fits
        .iter()
        .map(|(a, f)| RateRow {
            a: *a,
            slope: f.slope,
            r_squared: f.r_squared,
            rate_reciprocal: f.rate_reciprocal,
        })
        .collect();
    rows.sort_by(|x, y| x.a.total_cmp(&y.a));
    RateSummary {
        rows,
        fit: table.fit.as_ref().map(LineFitReport::from),
        fit_undefined: table.fit.is_none(),
        strictly_increasing: table.strictly_increasing,
    }
}

pub fn rate_csv(summary: &RateSummary) -> String {
    let mut out = String::from("a,slope,r_squared,rate_reciprocal\n");
    for r in &summary.rows {
        out.push_str(&format!("{:e},{:e},{:e},{:e}\n", r.a, r.slope, r.r_squared, r.rate_reciprocal));
    }
    out
}

fn a_label(a: f64) -> String {
    let twelfths = a * 12.0;
    if (twelfths - twelfths.round()).abs() < 1e-9 {
        format!("a = {}/12", twelfths.round() as i64)
    } else {
        format!("a = {a:.4}")
    }
}

/// Mix-norm, its logarithm, and the reciprocal rate against `a`.
pub fn sweep_plots(members: &[(f64, &MixTimeSeries)], rates: &RateSummary) -> (LinePlot, LinePlot, Option<LinePlot>) {
    let series_of = |log: bool| -> Vec<Series> {
        members
            .iter()
            .map(|(a, s)| Series {
                label: a_label(*a),
                points: s
                    .records
                    .iter()
                    .map(|r| (r.time, if log { r.h_neg1.ln() } else { r.h_neg1 }))
                    .collect(),
                markers: false,
            })
            .collect()
    };
    let fig_a = LinePlot {
        title: "mix-norm".into(),
        x_label: "t".into(),
        y_label: "||theta||_{H^-1}".into(),
        series: series_of(false),
    };
    let fig_b = LinePlot {
        title: "log mix-norm".into(),
        x_label: "t".into(),
        y_label: "ln ||theta||_{H^-1}".into(),
        series: series_of(true),
    };
    let fig_c = rates.fit.as_ref().map(|fit| {
        let (lo, hi) = (rates.rows[0].a, rates.rows[rates.rows.len() - 1].a);
        LinePlot {
            title: "negative reciprocal slope".into(),
            x_label: "a".into(),
            y_label: "-1/slope".into(),
            series: vec![
                Series {
                    label: "fits".into(),
                    points: rates.rows.iter().map(|r| (r.a, r.rate_reciprocal)).collect(),
                    markers: true,
                },
                Series {
                    label: format!("line, R2 = {:.3}", fit.r_squared),
                    points: vec![(lo, fit.intercept + fit.slope * lo), (hi, fit.intercept + fit.slope * hi)],
                    markers: false,
                },
            ],
        }
    });
    (fig_a, fig_b, fig_c)
}

/// Measured mix-norm against the fitted envelope.
pub fn envelope_plot(series: &MixTimeSeries, env: &EnvelopeReport) -> LinePlot {
    let costs = series.cost(env.p).unwrap_or_default();
    LinePlot {
        title: "mix-norm and exponential envelope".into(),
        x_label: "t".into(),
        y_label: "ln ||theta||_{H^-1}".into(),
        series: vec![
            Series {
                label: "measured".into(),
                points: series.records.iter().map(|r| (r.time, r.h_neg1.ln())).collect(),
                markers: false,
            },
            Series {
                label: "envelope".into(),
                points: series
                    .records
                    .iter()
                    .zip(&costs)
                    .filter(|(r, _)| r.time >= env.window[0] - 1e-12 && r.time <= env.window[1] + 1e-12)
                    .map(|(r, c)| (r.time, env.prefactor.ln() - env.rate * c))
                    .collect(),
                markers: false,
            },
        ],
    }
}
