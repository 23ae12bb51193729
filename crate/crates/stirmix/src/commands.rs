//! The `simulate`, `sweep`, `analyze`, `certify`, `scalecheck` and
//! `fixture` commands.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use stirmix_core::bounds::{self, ScalingReport};
use stirmix_core::mixedness::{self, DEFAULT_EPS};
use stirmix_core::norms::{self, MixTimeSeries};
use stirmix_core::solver::{self, RunOutput, StopReason};
use stirmix_core::{fixtures, GridSpec, ScalarField};

use crate::analysis::{self, RunAnalysis};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::formats::{self, write_json, write_text};
use crate::manifest::write_manifest;
use crate::render;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const INITIAL_FIELD_FILE: &str = "initial.field.json";

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotInfo {
    pub time: f64,
    pub image: Option<String>,
    pub field: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub a: f64,
    pub n: usize,
    pub t_final: f64,
    pub steps: usize,
    pub stop_reason: &'static str,
    pub final_time: f64,
    pub spectral_fill_time: Option<f64>,
    pub degenerate_events: usize,
    pub first_degenerate_time: Option<f64>,
    pub h_neg1_initial: f64,
    pub h_neg1_final: f64,
    pub l2_initial: f64,
    /// `max_t |‖θ(t)‖_{L²} - ‖θ(0)‖_{L²}| / ‖θ(0)‖_{L²}`.
    pub max_l2_drift: f64,
    pub final_mean: f64,
    /// Largest step-to-step increase of the mix-norm (negative if it always fell).
    pub max_h_neg1_increase: f64,
    /// Largest `|‖∇u‖_{L²} - F|` over non-degenerate records.
    pub max_enstrophy_error: f64,
    /// Largest `|∫‖∇u‖_{L²} - F t| / t` over records with `t > 0`.
    pub max_cost_error: f64,
    pub color_scale: f64,
    pub snapshots: Vec<SnapshotInfo>,
    pub analysis: RunAnalysis,
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::FinalTime => "final_time",
        StopReason::SpectralFill => "spectral_fill",
        StopReason::MaxSteps => "max_steps",
    }
}

pub fn summarize(a: f64, cfg: &ExperimentConfig, out: &RunOutput, analysis: RunAnalysis) -> RunSummary {
    let recs = &out.series.records;
    let j2 = out.series.p_index(2.0);
    let l2_0 = recs[0].l2;
    let mut max_enstrophy_error = 0.0f64;
    let mut max_cost_error = 0.0f64;
    if let Some(j) = j2 {
        for r in recs {
            if !r.degenerate {
                max_enstrophy_error = max_enstrophy_error.max((r.grad_lp[j] - cfg.enstrophy).abs());
            }
            if r.time > 0.0 {
                max_cost_error = max_cost_error.max((r.cost[j] - cfg.enstrophy * r.time).abs() / r.time);
            }
        }
    }
    RunSummary {
        a,
        n: cfg.n,
        t_final: cfg.t_final,
        steps: out.steps,
        stop_reason: stop_name(out.stop),
        final_time: recs.last().map_or(0.0, |r| r.time),
        spectral_fill_time: out.spectral_fill_time,
        degenerate_events: out.degenerate_times.len(),
        first_degenerate_time: out.degenerate_times.first().copied(),
        h_neg1_initial: recs[0].h_neg1,
        h_neg1_final: recs.last().map_or(f64::NAN, |r| r.h_neg1),
        l2_initial: l2_0,
        max_l2_drift: recs.iter().map(|r| (r.l2 - l2_0).abs() / l2_0).fold(0.0, f64::max),
        final_mean: out.final_theta.mean(),
        max_h_neg1_increase: recs
            .windows(2)
            .map(|w| w[1].h_neg1 - w[0].h_neg1)
            .fold(f64::NEG_INFINITY, f64::max),
        max_enstrophy_error,
        max_cost_error,
        color_scale: 0.0,
        snapshots: Vec::new(),
        analysis,
    }
}

/// Result of one simulation, kept in memory for sweeps and tests.
#[derive(Debug)]
pub struct SimulateResult {
    pub dir: PathBuf,
    pub output: RunOutput,
    pub summary: RunSummary,
}

fn snapshot_stem(idx: usize, time: f64) -> String {
    format!("snap_{idx:02}_t{time:.3}")
}

/// Runs the solver for data parameter `a` and writes all artifacts to `dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, a: f64, dir: &Path) -> Result<SimulateResult> {
    let grid = cfg.grid()?;
    let theta0 = solver::initial_data(a, &grid)?;
    let mut source = cfg.velocity_mode();
    let output = solver::run(&cfg.solver_config(), &theta0, &mut source)?;

    let theta0_real = output.initial_theta.to_real();
    let analysis = analysis::analyze_run(&output.series, output.spectral_fill_time, Some(&theta0_real), cfg);
    let mut summary = summarize(a, cfg, &output, analysis);

    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    write_text(&dir.join(TIMESERIES_FILE), &formats::timeseries_csv(&output.series))?;
    formats::write_field(&dir.join(INITIAL_FIELD_FILE), &theta0_real, Some(0.0))?;

    let scale = output
        .snapshots
        .iter()
        .map(|s| s.field.max_abs())
        .fold(theta0_real.max_abs(), f64::max);
    summary.color_scale = scale;
    for (idx, snap) in output.snapshots.iter().enumerate() {
        let stem = snapshot_stem(idx, snap.time);
        let mut info = SnapshotInfo {
            time: snap.time,
            image: None,
            field: None,
        };
        if cfg.write_snapshot_images {
            let name = format!("snapshots/{stem}.png");
            render::write_heatmap(&dir.join(&name), &snap.field, scale)?;
            info.image = Some(name);
        }
        if cfg.write_snapshot_fields {
            let name = format!("snapshots/{stem}.field.json");
            formats::write_field(&dir.join(&name), &snap.field, Some(snap.time))?;
            info.field = Some(name);
        }
        summary.snapshots.push(info);
    }
    if let Some(env) = &summary.analysis.envelope {
        write_text(&dir.join("envelope.svg"), &analysis::envelope_plot(&output.series, env).to_svg())?;
    }
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(SimulateResult {
        dir: dir.to_path_buf(),
        output,
        summary,
    })
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulateResult> {
    cfg.validate()?;
    let res = run_to_dir(cfg, cfg.a, &cfg.output)?;
    write_manifest(&cfg.output, "simulate", &cfg.hash(), cfg.seed)?;
    Ok(res)
}

#[derive(Debug, Serialize)]
pub struct SweepMember {
    pub a: f64,
    pub dir: String,
    pub ok: bool,
    pub error: Option<String>,
    pub spectral_fill_time: Option<f64>,
    pub fit_r_squared: Option<f64>,
    pub rate_reciprocal: Option<f64>,
    pub envelope_holds: Option<bool>,
    pub log_gradient_holds: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub workers: usize,
    pub members: Vec<SweepMember>,
    pub rates: analysis::RateSummary,
    pub figures: Vec<String>,
    /// Set when the rate-against-`a` figure could not be drawn.
    pub rate_figure_degenerate: bool,
}

pub fn member_dir_name(idx: usize, a: f64) -> String {
    format!("run{idx:02}_a{a:.4}")
}

fn member_entry(a: f64, dir: String, summary: Option<&RunSummary>, error: Option<String>) -> SweepMember {
    SweepMember {
        a,
        dir,
        ok: summary.is_some(),
        error,
        spectral_fill_time: summary.and_then(|s| s.spectral_fill_time),
        fit_r_squared: summary.and_then(|s| s.analysis.fit.as_ref().map(|f| f.r_squared)),
        rate_reciprocal: summary.and_then(|s| s.analysis.fit.as_ref().map(|f| f.rate_reciprocal)),
        envelope_holds: summary.and_then(|s| s.analysis.envelope.as_ref().map(|e| e.holds)),
        log_gradient_holds: summary.and_then(|s| s.analysis.log_gradient.as_ref().map(|l| l.holds)),
    }
}

/// Writes the combined rate table and figures for completed members.
fn write_sweep_outputs(
    out_dir: &Path,
    workers: usize,
    entries: Vec<SweepMember>,
    runs: &[(f64, Option<analysis::FitReport>, &MixTimeSeries)],
) -> Result<SweepSummary> {
    let fits: Vec<(f64, Option<analysis::FitReport>)> = runs.iter().map(|(a, f, _)| (*a, f.clone())).collect();
    let rates = analysis::rate_summary(&fits);
    write_text(&out_dir.join("rates.csv"), &analysis::rate_csv(&rates))?;
    let series: Vec<(f64, &MixTimeSeries)> = runs.iter().map(|(a, _, s)| (*a, *s)).collect();
    let (fa, fb, fc) = analysis::sweep_plots(&series, &rates);
    let mut figures = vec!["mixnorm.svg".to_string(), "log_mixnorm.svg".to_string()];
    write_text(&out_dir.join(&figures[0]), &fa.to_svg())?;
    write_text(&out_dir.join(&figures[1]), &fb.to_svg())?;
    let degenerate = fc.is_none();
    if let Some(fc) = fc {
        figures.push("rate_vs_a.svg".into());
        write_text(&out_dir.join(&figures[2]), &fc.to_svg())?;
    }
    let summary = SweepSummary {
        workers,
        members: entries,
        rates,
        figures,
        rate_figure_degenerate: degenerate,
    };
    write_json(&out_dir.join("sweep.json"), &summary)?;
    Ok(summary)
}

/// Runs every member of `a_list` on a worker pool; a failing member is
/// reported and the rest continue.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<SweepSummary> {
    cfg.validate()?;
    if cfg.a_list.is_empty() {
        return Err(CliError::Config("a_list must not be empty".into()));
    }
    let workers = cfg.effective_workers().min(cfg.a_list.len());
    let slots: Vec<Mutex<Option<Result<SimulateResult>>>> = cfg.a_list.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= cfg.a_list.len() {
                    break;
                }
                let a = cfg.a_list[i];
                let dir = cfg.output.join(member_dir_name(i, a));
                let res = run_to_dir(cfg, a, &dir);
                *slots[i].lock().expect("slot") = Some(res);
            });
        }
    });
    let results: Vec<Result<SimulateResult>> = slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot").expect("every member ran"))
        .collect();

    let mut entries = Vec::new();
    let mut runs = Vec::new();
    for (i, res) in results.iter().enumerate() {
        let a = cfg.a_list[i];
        let name = member_dir_name(i, a);
        match res {
            Ok(r) => {
                entries.push(member_entry(a, name, Some(&r.summary), None));
                runs.push((a, r.summary.analysis.fit.clone(), &r.output.series));
            }
            Err(e) => entries.push(member_entry(a, name, None, Some(e.to_string()))),
        }
    }
    let summary = write_sweep_outputs(&cfg.output, workers, entries, &runs)?;
    write_manifest(&cfg.output, "sweep", &cfg.hash(), cfg.seed)?;
    Ok(summary)
}

/// Time series, fill time, data parameter and initial field of a run directory.
type StoredRun = (MixTimeSeries, Option<f64>, Option<f64>, Option<ScalarField>);

fn read_run_dir(dir: &Path) -> Result<StoredRun> {
    let ts_path = dir.join(TIMESERIES_FILE);
    let series = formats::parse_timeseries(&formats::read_text(&ts_path)?, &ts_path)?;
    let (mut fill, mut a) = (None, None);
    let summary_path = dir.join(SUMMARY_FILE);
    if summary_path.exists() {
        let v: serde_json::Value =
            serde_json::from_str(&formats::read_text(&summary_path)?).map_err(|e| CliError::Parse {
                path: summary_path.clone(),
                msg: e.to_string(),
            })?;
        fill = v.get("spectral_fill_time").and_then(|x| x.as_f64());
        a = v.get("a").and_then(|x| x.as_f64());
    }
    let init_path = dir.join(INITIAL_FIELD_FILE);
    let theta0 = if init_path.exists() {
        Some(formats::read_field(&init_path)?.0)
    } else {
        None
    };
    Ok((series, fill, a, theta0))
}

/// Re-analyses a run directory, or every run directory below a sweep
/// directory, writing `analysis.json` (and the sweep table and figures).
pub fn cmd_analyze(path: &Path, cfg: &ExperimentConfig) -> Result<serde_json::Value> {
    if path.join(TIMESERIES_FILE).exists() {
        let (series, fill, _, theta0) = read_run_dir(path)?;
        let res = analysis::analyze_run(&series, fill, theta0.as_ref(), cfg);
        write_json(&path.join("analysis.json"), &res)?;
        if let Some(env) = &res.envelope {
            write_text(&path.join("envelope.svg"), &analysis::envelope_plot(&series, env).to_svg())?;
        }
        return Ok(serde_json::to_value(&res).expect("serialisable"));
    }
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| CliError::io(format!("listing {}", path.display()), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(TIMESERIES_FILE).exists())
        .collect();
    if dirs.is_empty() {
        return Err(CliError::Config(format!("{} holds no run output", path.display())));
    }
    dirs.sort();
    let mut loaded = Vec::new();
    for d in &dirs {
        let (series, fill, a, theta0) = read_run_dir(d)?;
        let res = analysis::analyze_run(&series, fill, theta0.as_ref(), cfg);
        write_json(&d.join("analysis.json"), &res)?;
        loaded.push((a.unwrap_or(f64::NAN), series, res, d.file_name().unwrap().to_string_lossy().into_owned()));
    }
    let entries = loaded
        .iter()
        .map(|(a, _, res, name)| SweepMember {
            a: *a,
            dir: name.clone(),
            ok: true,
            error: None,
            spectral_fill_time: None,
            fit_r_squared: res.fit.as_ref().map(|f| f.r_squared),
            rate_reciprocal: res.fit.as_ref().map(|f| f.rate_reciprocal),
            envelope_holds: res.envelope.as_ref().map(|e| e.holds),
            log_gradient_holds: res.log_gradient.as_ref().map(|l| l.holds),
        })
        .collect();
    let runs: Vec<_> = loaded.iter().map(|(a, s, res, _)| (*a, res.fit.clone(), s)).collect();
    let summary = write_sweep_outputs(path, 0, entries, &runs)?;
    Ok(serde_json::to_value(&summary).expect("serialisable"))
}

#[derive(Debug, Serialize)]
pub struct CertifyEntry {
    pub delta: f64,
    pub semi_mixed: bool,
    pub mixed: bool,
    pub worst_center: Vec<f64>,
    pub worst_fraction: f64,
    pub complement_worst_fraction: f64,
    /// H⁻¹ lower bound from the bump at the worst center, when it fits.
    pub certificate: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct CertifyReport {
    pub dim: usize,
    pub n: usize,
    pub time: Option<f64>,
    pub lambda: f64,
    pub kappa: f64,
    pub eps: f64,
    pub measure: f64,
    pub linf_norm: f64,
    pub h_neg1_norm: f64,
    pub entries: Vec<CertifyEntry>,
    pub semi_mixing_scale: Option<f64>,
    pub mixing_scale: Option<f64>,
    pub monotone: bool,
    pub r0_proxy: Option<f64>,
}

pub fn certify_field(
    f: &ScalarField,
    time: Option<f64>,
    lambda: f64,
    kappa: f64,
    deltas: Option<&[f64]>,
) -> Result<(CertifyReport, mixedness::LevelSetMask)> {
    let grid = *f.grid();
    let mask = mixedness::super_level_set(f, lambda)?;
    let deltas: Vec<f64> = match deltas {
        Some(d) => d.to_vec(),
        None => mixedness::geometric_deltas(&grid, 8),
    };
    let scan = mixedness::mixing_scale_scan(&mask, kappa, &deltas)?;
    let mut entries = Vec::new();
    for e in &scan.entries {
        let rep = mixedness::is_mixed(&mask, e.delta, kappa)?;
        let center = rep.worst_center;
        let certificate = match mixedness::h_neg1_certificate(f, &center, e.delta, DEFAULT_EPS) {
            Ok(c) => Some(c),
            Err(stirmix_core::Error::GeometryError { .. }) => None,
            Err(other) => return Err(other.into()),
        };
        entries.push(CertifyEntry {
            delta: e.delta,
            semi_mixed: rep.semi_mixed,
            mixed: rep.mixed.unwrap_or(false),
            worst_center: center[..grid.dim()].to_vec(),
            worst_fraction: rep.worst_fraction,
            complement_worst_fraction: rep.complement_worst_fraction.unwrap_or(f64::NAN),
            certificate,
        });
    }
    let report = CertifyReport {
        dim: grid.dim(),
        n: grid.n(),
        time,
        lambda,
        kappa,
        eps: DEFAULT_EPS,
        measure: mask.measure(),
        linf_norm: f.max_abs(),
        h_neg1_norm: norms::h_neg1_norm(&f.without_mean())?,
        entries,
        semi_mixing_scale: scan.semi_mixing_scale,
        mixing_scale: scan.mixing_scale,
        monotone: scan.monotone,
        r0_proxy: scan.r0_proxy,
    };
    Ok((report, mask))
}

/// Mixedness verdicts and certificates for a field file. With `out`, the
/// report, a mask image and a manifest are written there.
pub fn cmd_certify(
    field_path: &Path,
    cfg: &ExperimentConfig,
    deltas: Option<&[f64]>,
    out: Option<&Path>,
) -> Result<CertifyReport> {
    let (f, time) = formats::read_field(field_path)?;
    let (report, mask) = certify_field(&f, time, cfg.lambda, cfg.kappa, deltas)?;
    if let Some(dir) = out {
        write_json(&dir.join("certify.json"), &report)?;
        if f.grid().dim() == 2 {
            render::write_mask(&dir.join("level_set.png"), mask.indicator(), f.grid().n())?;
        }
        write_manifest(dir, "certify", &cfg.hash(), cfg.seed)?;
    }
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct ScaleRow {
    pub n: usize,
    pub p: f64,
    pub h_neg1_theta: f64,
    pub h_neg1_eta: f64,
    pub h_neg1_mismatch: f64,
    pub grad_u: f64,
    pub grad_v: f64,
    pub grad_mismatch: f64,
}

#[derive(Debug, Serialize)]
pub struct ScaleCheckReport {
    pub a: f64,
    pub support: [f64; 2],
    pub rows: Vec<ScaleRow>,
    /// Both mismatches fall at every doubling of `n`, for every `p`.
    pub mismatch_decreasing: bool,
    pub max_mismatch_at_finest: f64,
}

fn scale_row(n: usize, r: &ScalingReport) -> ScaleRow {
    ScaleRow {
        n,
        p: r.p,
        h_neg1_theta: r.h_neg1_theta,
        h_neg1_eta: r.h_neg1_eta,
        h_neg1_mismatch: r.h_neg1_mismatch,
        grad_u: r.grad_u,
        grad_v: r.grad_v,
        grad_mismatch: r.grad_mismatch,
    }
}

/// Rescaling identities at `n/4`, `n/2` and `n` for every `p` in the config.
pub fn scale_check(n: usize, a: f64, p_list: &[f64]) -> Result<ScaleCheckReport> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(CliError::Config("scale factor must lie in (0, 1]".into()));
    }
    let (lo, hi) = bounds::DEFAULT_SCALING_SUPPORT;
    let ns: Vec<usize> = [n / 4, n / 2, n].into_iter().filter(|&m| m >= 16).collect();
    let mut rows = Vec::new();
    for &m in &ns {
        let g = GridSpec::square(m)?;
        let th = bounds::scaling_test_scalar(&g, lo, hi);
        let u = bounds::scaling_test_velocity(&g, lo, hi);
        for &p in p_list {
            rows.push(scale_row(m, &bounds::scaling_check(&th, &u, a, p)?));
        }
    }
    let np = p_list.len();
    let mut decreasing = true;
    for k in np..rows.len() {
        let (prev, cur) = (&rows[k - np], &rows[k]);
        decreasing &= cur.h_neg1_mismatch < prev.h_neg1_mismatch || cur.h_neg1_mismatch == 0.0;
        decreasing &= cur.grad_mismatch < prev.grad_mismatch || cur.grad_mismatch == 0.0;
    }
    let finest = rows
        .iter()
        .filter(|r| r.n == n)
        .map(|r| r.h_neg1_mismatch.max(r.grad_mismatch))
        .fold(0.0, f64::max);
    Ok(ScaleCheckReport {
        a,
        support: [lo, hi],
        rows,
        mismatch_decreasing: decreasing,
        max_mismatch_at_finest: finest,
    })
}

pub fn cmd_scalecheck(cfg: &ExperimentConfig, a: f64, out: Option<&Path>) -> Result<ScaleCheckReport> {
    cfg.grid()?;
    let report = scale_check(cfg.n, a, &cfg.p_list)?;
    if let Some(dir) = out {
        write_json(&dir.join("scalecheck.json"), &report)?;
        write_manifest(dir, "scalecheck", &cfg.hash(), cfg.seed)?;
    }
    Ok(report)
}

/// Reference fields for `certify`.
pub fn fixture(kind: &str, n: usize, a: f64) -> Result<ScalarField> {
    let g = GridSpec::square(n)?;
    Ok(match kind {
        "checkerboard" => fixtures::checkerboard(&g, 8),
        "stripe" => fixtures::stripe(&g, 0.25, 0.5),
        "constant" => ScalarField::constant(g, 1.0),
        "disks" => fixtures::disk_pair(&g, &[0.25, 0.25, 0.0], 0.125),
        "initial" => solver::initial_data(a, &g)?,
        other => {
            return Err(CliError::Config(format!(
                "unknown fixture {other:?}; expected checkerboard, stripe, constant, disks or initial"
            )))
        }
    })
}
