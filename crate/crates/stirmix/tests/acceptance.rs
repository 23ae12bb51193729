//! End-to-end acceptance run: prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stirmix::analysis::{self, FitReport};
use stirmix::commands::{self, SimulateResult};
use stirmix::config::ExperimentConfig;
use stirmix_core::mixedness::{self, LevelSetMask};
use stirmix_core::{bounds, fixtures, norms, spectral, GridSpec, ScalarField, VectorField};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_real(grid: &GridSpec, rng: &mut ChaCha8Rng) -> ScalarField {
    ScalarField::from_values(*grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn random_vector(grid: &GridSpec, rng: &mut ChaCha8Rng) -> VectorField {
    VectorField::new((0..grid.dim()).map(|_| random_real(grid, rng)).collect()).unwrap()
}

fn spectral_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut round_trip, mut parseval, mut leray, mut inverse) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (d, n) in [(1, 1024), (2, 256), (3, 32)] {
        let g = GridSpec::new(d, n).unwrap();
        let f = random_real(&g, &mut rng);
        round_trip = round_trip.max(max_diff(&f.values(), &f.to_spectral().to_real().values()));

        let real: f64 = f.values().iter().map(|x| x * x).sum::<f64>() / g.len() as f64;
        let spec: f64 = f.coefficients().iter().map(|z| z.norm_sqr()).sum();
        parseval = parseval.max((real - spec).abs() / real);

        let v = random_vector(&g, &mut rng);
        let w = random_vector(&g, &mut rng);
        let pv = spectral::leray_project(&v);
        let ppv = spectral::leray_project(&pv);
        for i in 0..d {
            let a = pv.component(i).to_real();
            let b = ppv.component(i).to_real();
            leray = leray.max(max_diff(&a.values(), &b.values()));
        }
        let lhs = spectral::inner_vector(&pv, &w).unwrap();
        let rhs = spectral::inner_vector(&v, &spectral::leray_project(&w)).unwrap();
        leray = leray.max((lhs - rhs).abs() / lhs.abs().max(1.0));

        let f0 = f.without_mean();
        let back = spectral::laplacian(&spectral::inverse_laplacian(&f0).unwrap()).to_real();
        inverse = inverse.max(max_diff(&f0.to_real().values(), &back.values()));
    }
    let elapsed = start.elapsed();
    let pass = round_trip <= 1e-12
        && parseval <= 1e-10
        && leray <= 1e-10
        && inverse <= 1e-10
        && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "round trip {round_trip:.1e}, Parseval {parseval:.1e}, Leray {leray:.1e}, inverse Laplacian {inverse:.1e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

struct SweepRun {
    a: f64,
    result: SimulateResult,
    seconds: f64,
}

fn desk_sweep(root: &Path) -> Vec<SweepRun> {
    let cfg = ExperimentConfig {
        n: 256,
        t_final: 5.0,
        stop_on_spectral_fill: false,
        write_snapshot_images: false,
        write_snapshot_fields: false,
        ..ExperimentConfig::default()
    };
    cfg.validate().unwrap();
    cfg.a_list
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let start = Instant::now();
            let result = commands::run_to_dir(&cfg, a, &root.join(commands::member_dir_name(i, a))).unwrap();
            let seconds = start.elapsed().as_secs_f64();
            eprintln!(
                "  sweep member a = {a:.4}: {} steps, fill at {:?}, {seconds:.1} s",
                result.output.steps, result.output.spectral_fill_time
            );
            SweepRun { a, result, seconds }
        })
        .collect()
}

fn is_last(a: f64) -> bool {
    (a - 11.0 / 12.0).abs() < 1e-12
}

fn conservation(runs: &[SweepRun]) -> Outcome {
    let run = runs.iter().find(|r| is_last(r.a)).unwrap();
    let recs = &run.result.output.series.records;
    let l2_0 = recs[0].l2;
    let drift = recs.iter().map(|r| (r.l2 - l2_0).abs() / l2_0).fold(0.0, f64::max);
    let mut mean = run.result.output.final_theta.mean().abs();
    for s in &run.result.output.snapshots {
        mean = mean.max(s.field.mean().abs());
    }
    let rise = recs.windows(2).map(|w| w[1].h_neg1 - w[0].h_neg1).fold(f64::NEG_INFINITY, f64::max);
    let pass = drift <= 1e-3 && mean <= 1e-12 && rise <= 1e-8 && run.seconds <= 300.0;
    outcome(
        pass,
        format!(
            "a = 11/12: L2 drift {drift:.2e}, |mean| {mean:.1e}, largest mix-norm rise {rise:.2e}, {:.0} s",
            run.seconds
        ),
    )
}

fn enstrophy(runs: &[SweepRun]) -> Outcome {
    let (mut grad, mut cost, mut checked) = (0.0f64, 0.0f64, 0usize);
    for run in runs {
        let series = &run.result.output.series;
        let j = series.p_index(2.0).unwrap();
        for r in &series.records {
            if !r.degenerate {
                grad = grad.max((r.grad_lp[j] - 1.0).abs());
                checked += 1;
            }
            if r.time > 0.0 {
                cost = cost.max((r.cost[j] - r.time).abs() / r.time);
            }
        }
    }
    outcome(
        grad <= 1e-8 && cost <= 1e-4 && checked > 0,
        format!("{checked} velocities: max |grad u|_2 - 1| {grad:.1e}, max relative cost error {cost:.1e}"),
    )
}

fn exponential_regime(runs: &[SweepRun]) -> Outcome {
    let run = runs.iter().find(|r| is_last(r.a)).unwrap();
    match &run.result.summary.analysis.fit {
        Some(f) => outcome(
            f.r_squared >= 0.98,
            format!(
                "a = 11/12 window [{:.2}, {:.2}], {} samples: slope {:.4}, R2 {:.5}",
                f.window[0], f.window[1], f.samples, f.slope, f.r_squared
            ),
        ),
        None => outcome(
            false,
            format!("no fit: {}", run.result.summary.analysis.fit_error.clone().unwrap_or_default()),
        ),
    }
}

fn rate_trend(runs: &[SweepRun]) -> Outcome {
    let fits: Vec<(f64, Option<FitReport>)> = runs.iter().map(|r| (r.a, r.result.summary.analysis.fit.clone())).collect();
    let summary = analysis::rate_summary(&fits);
    let total: f64 = runs.iter().map(|r| r.seconds).sum();
    let rates: Vec<String> = summary.rows.iter().map(|r| format!("{:.3}", r.rate_reciprocal)).collect();
    let r2 = summary.fit.as_ref().map_or(f64::NAN, |f| f.r_squared);
    let pass = summary.rows.len() == runs.len() && summary.strictly_increasing && r2 >= 0.9 && total <= 1800.0;
    outcome(
        pass,
        format!(
            "-1/slope [{}], strictly increasing {}, line R2 {r2:.4}, sweep {total:.0} s",
            rates.join(", "),
            summary.strictly_increasing
        ),
    )
}

fn envelope(runs: &[SweepRun]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for run in runs {
        let an = &run.result.summary.analysis;
        match &an.envelope {
            Some(e) => {
                let holds = e.holds && e.bound_curve_holds == Some(true);
                ok &= holds;
                parts.push(format!("{:.3}:{:.3}", run.a, e.min_ratio));
            }
            None => {
                ok = false;
                parts.push(format!("{:.3}:none", run.a));
            }
        }
    }
    outcome(ok, format!("min measured/bound ratio per a: {}", parts.join(" ")))
}

fn random_band_limited(grid: &GridSpec, kmax: i64, rng: &mut ChaCha8Rng) -> ScalarField {
    let mut modes = Vec::new();
    for kx in -kmax..=kmax {
        for ky in 0..=kmax {
            if ky == 0 && kx <= 0 {
                continue;
            }
            modes.push((kx as f64, ky as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
    }
    ScalarField::from_fn(*grid, |p| {
        modes
            .iter()
            .map(|(kx, ky, a, b)| {
                let ph = 2.0 * PI * (kx * p[0] + ky * p[1]);
                a * ph.cos() + b * ph.sin()
            })
            .sum()
    })
}

fn certificates() -> Outcome {
    let g = GridSpec::square(64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let kmax = rng.gen_range(1..=8);
        let f = random_band_limited(&g, kmax, &mut rng);
        let h = norms::h_neg1_norm(&f).unwrap();
        let center = [rng.gen::<f64>(), rng.gen::<f64>(), 0.0];
        let delta = rng.gen_range(1.0 / 16.0..0.25);
        let cert = mixedness::h_neg1_certificate(&f, &center, delta, 0.5).unwrap();
        worst = worst.max(cert / h);
    }

    let g = GridSpec::square(256).unwrap();
    let center = [0.25, 0.25, 0.0];
    let (xs, ys): (Vec<f64>, Vec<f64>) = [1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0]
        .iter()
        .map(|&d| {
            let f = fixtures::disk_pair(&g, &center, 2.0 * d);
            let c = mixedness::h_neg1_certificate(&f, &center, d, 0.5).unwrap();
            (d.ln(), c.ln())
        })
        .unzip();
    let slope = bounds::linear_fit(&xs, &ys).unwrap().slope;
    let dim = g.dim() as f64;
    let expected = dim / 2.0 + 1.0;
    outcome(
        worst <= 1.0 + 1e-6 && (slope - expected).abs() <= 0.15,
        format!("100 fields: max certificate/norm {worst:.4}; disk exponent {slope:.4} (expected {expected})"),
    )
}

fn brute_force_counts(mask: &LevelSetMask, delta: f64) -> Vec<u64> {
    let g = *mask.grid();
    let n = g.n() as i64;
    let r = delta * n as f64;
    let r2 = r * r * (1.0 + 1e-12);
    // distinct pixel offsets within the minimal-image distance
    let mut offsets: Vec<(i64, i64)> = (-n / 2..=n / 2)
        .flat_map(|dx| (-n / 2..=n / 2).map(move |dy| (dx, dy)))
        .filter(|&(dx, dy)| ((dx * dx + dy * dy) as f64) <= r2)
        .map(|(dx, dy)| (dx.rem_euclid(n), dy.rem_euclid(n)))
        .collect();
    offsets.sort_unstable();
    offsets.dedup();
    let ind = mask.indicator();
    let mut counts = vec![0u64; g.len()];
    for cx in 0..n {
        for cy in 0..n {
            let mut c = 0u64;
            for &(dx, dy) in &offsets {
                c += ind[(((cx + dx) % n) * n + (cy + dy) % n) as usize] as u64;
            }
            counts[(cx * n + cy) as usize] = c;
        }
    }
    counts
}

fn random_mask(grid: &GridSpec, rng: &mut ChaCha8Rng) -> LevelSetMask {
    let f = random_band_limited(grid, rng.gen_range(1..=6), rng);
    let level = rng.gen_range(-0.5..0.5) * f.max_abs();
    LevelSetMask::from_indicator(*grid, f.values().iter().map(|&x| x > level).collect()).unwrap()
}

fn mixedness_oracle() -> Outcome {
    let g = GridSpec::square(64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let deltas = [1.0 / 64.0, 3.0 / 64.0, 0.1, 0.2, 0.35];
    let kappas = [0.1, 0.25, 0.4];
    let (mut verdicts, mut mismatches) = (0usize, 0usize);
    for _ in 0..20 {
        let mask = random_mask(&g, &mut rng);
        for &delta in &deltas {
            let counts = brute_force_counts(&mask, delta);
            let total = brute_force_counts(&LevelSetMask::from_fn(g, |_| true), delta)[0];
            let (fft_counts, fft_total) = mixedness::ball_counts(&mask, delta).unwrap();
            if fft_total != total || fft_counts != counts {
                mismatches += 1;
            }
            let worst = *counts.iter().max().unwrap() as f64 / total as f64;
            for &kappa in &kappas {
                let fft = mixedness::is_semi_mixed(&mask, delta, kappa).unwrap();
                verdicts += 1;
                if fft.semi_mixed != (worst <= 1.0 - kappa) || fft.worst_fraction != worst {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{verdicts} verdicts over 20 masks, 5 radii, 3 accuracies: {mismatches} mismatches"),
    )
}

fn log_gradient(runs: &[SweepRun]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for run in runs {
        let an = &run.result.summary.analysis;
        match &an.log_gradient {
            Some(l) => {
                ok &= l.holds;
                parts.push(format!("{:.3}:{:+.2e}@{:.2}", run.a, l.max_excess, l.until));
            }
            None => {
                ok = false;
                parts.push(format!("{:.3}:{}", run.a, an.log_gradient_error.clone().unwrap_or_default()));
            }
        }
    }
    outcome(ok, format!("max excess until fill per a: {}", parts.join(" ")))
}

fn scaling() -> Outcome {
    let report = commands::scale_check(512, 0.5, &[1.0, 1.5, 2.0]).unwrap();
    let finest: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.n == 512)
        .map(|r| format!("p={} H-1 {:.1e} grad {:.1e}", r.p, r.h_neg1_mismatch, r.grad_mismatch))
        .collect();
    outcome(
        report.max_mismatch_at_finest <= 1e-3 && report.mismatch_decreasing,
        format!(
            "n = 512: {}; decreasing over n = 128, 256, 512: {}",
            finest.join(", "),
            report.mismatch_decreasing
        ),
    )
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism(root: &Path) -> Outcome {
    let base = ExperimentConfig {
        n: 64,
        a_list: vec![0.5, 0.75, 11.0 / 12.0],
        t_final: 2.0,
        seed: 42,
        write_snapshot_images: false,
        ..ExperimentConfig::default()
    };
    let mut outputs = Vec::new();
    for (name, serial, workers) in [("serial1", true, None), ("serial2", true, None), ("parallel", false, Some(4))] {
        let cfg = ExperimentConfig {
            output: root.join(name),
            serial,
            workers,
            ..base.clone()
        };
        commands::cmd_sweep(&cfg).unwrap();
        outputs.push(csv_files(&cfg.output));
    }
    let files = outputs[0].len();
    let serial_same = outputs[0] == outputs[1];
    let parallel_same = outputs[0] == outputs[2];
    outcome(
        serial_same && parallel_same && files == 4,
        format!("{files} CSV files; serial repeat identical {serial_same}, 4 workers identical {parallel_same}"),
    )
}

fn main() {
    let root = tempfile::tempdir().unwrap();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |id: usize, name: &'static str, o: Outcome| {
        println!("criterion {id:>2} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    report(1, "spectral identities", spectral_suite());
    report(7, "certificate soundness and scaling", certificates());
    report(8, "mixedness oracle equivalence", mixedness_oracle());
    report(10, "scaling identities", scaling());
    report(11, "determinism", determinism(&root.path().join("determinism")));

    eprintln!("running the n = 256 sweep");
    let runs = desk_sweep(&root.path().join("sweep"));
    report(2, "conservation", conservation(&runs));
    report(3, "enstrophy normalisation", enstrophy(&runs));
    report(4, "exponential regime", exponential_regime(&runs));
    report(5, "rate against a", rate_trend(&runs));
    report(6, "bound envelope", envelope(&runs));
    report(9, "log-gradient diagnostic", log_gradient(&runs));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("all {} criteria passed", results.len());
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
