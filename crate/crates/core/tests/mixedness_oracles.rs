use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stirmix_core::mixedness::{self, LevelSetMask};
use stirmix_core::{bounds, fixtures, norms, GridSpec, ScalarField};

/// Per-center pixel count over the closed periodic ball, no transforms.
fn brute_force_fraction(mask: &LevelSetMask, center: usize, delta: f64) -> (u64, u64) {
    let g = *mask.grid();
    let n = g.n() as i64;
    let r = delta * n as f64;
    let r2 = r * r * (1.0 + 1e-12);
    let c = g.unravel(center);
    let (mut inside, mut total) = (0u64, 0u64);
    for (idx, &b) in mask.indicator().iter().enumerate() {
        let m = g.unravel(idx);
        let mut d2 = 0i64;
        for axis in 0..g.dim() {
            let mut dx = (m[axis] as i64 - c[axis] as i64).rem_euclid(n);
            if dx > n / 2 {
                dx = n - dx;
            }
            d2 += dx * dx;
        }
        if d2 as f64 <= r2 {
            total += 1;
            inside += b as u64;
        }
    }
    (inside, total)
}

fn brute_force_semi_mixed(mask: &LevelSetMask, delta: f64, kappa: f64) -> bool {
    (0..mask.grid().len()).all(|c| {
        let (m, t) = brute_force_fraction(mask, c, delta);
        m as f64 / t as f64 <= 1.0 - kappa
    })
}

/// Random blobs: super level set of a random low-mode field.
fn random_mask(grid: &GridSpec, rng: &mut ChaCha8Rng) -> LevelSetMask {
    let modes: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.gen_range(-4..=4) as f64,
                rng.gen_range(-4..=4) as f64,
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.2..1.0),
            )
        })
        .collect();
    let f = ScalarField::from_fn(*grid, |p| {
        modes
            .iter()
            .map(|(kx, ky, ph, amp)| amp * (2.0 * PI * (kx * p[0] + ky * p[1]) + ph).cos())
            .sum()
    });
    let level = rng.gen_range(-0.5..0.5);
    let vals = f.values();
    LevelSetMask::from_indicator(*grid, vals.iter().map(|&x| x > level).collect()).unwrap()
}

#[test]
fn fft_verdicts_match_pixel_counts() {
    let g = GridSpec::square(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let deltas = [1.0 / 32.0, 2.0 / 32.0, 3.5 / 32.0, 0.25, 0.5];
    for _ in 0..6 {
        let mask = random_mask(&g, &mut rng);
        for &delta in &deltas {
            let (counts, total) = mixedness::ball_counts(&mask, delta).unwrap();
            for c in (0..g.len()).step_by(5) {
                assert_eq!((counts[c], total), brute_force_fraction(&mask, c, delta));
            }
            for &kappa in &[0.1, 0.3] {
                let report = mixedness::is_semi_mixed(&mask, delta, kappa).unwrap();
                assert_eq!(report.semi_mixed, brute_force_semi_mixed(&mask, delta, kappa));
            }
        }
    }
}

#[test]
fn super_level_set_of_a_sine_has_measure_one_third() {
    let g = GridSpec::new(1, 256).unwrap();
    let f = ScalarField::from_fn(g, |p| (2.0 * PI * p[0]).sin());
    let mask = mixedness::super_level_set(&f, 0.5).unwrap();
    assert!((mask.measure() - 1.0 / 3.0).abs() <= 1.0 / 256.0);
}

#[test]
fn fine_checkerboard_is_mixed_at_quarter_scale() {
    let g = GridSpec::square(64).unwrap();
    let board = fixtures::checkerboard(&g, 8);
    let mask = mixedness::super_level_set(&board, 0.5).unwrap();
    let report = mixedness::is_mixed(&mask, 0.25, 0.4).unwrap();
    assert_eq!(report.mixed, Some(true));
    // a single cell is far from mixed at its own scale
    let tiny = mixedness::is_semi_mixed(&mask, 1.0 / 64.0, 0.4).unwrap();
    assert!(!tiny.semi_mixed);
}

#[test]
fn constant_field_is_never_semi_mixed() {
    let g = GridSpec::square(32).unwrap();
    let mask = mixedness::super_level_set(&ScalarField::constant(g, 1.0), 0.5).unwrap();
    for delta in mixedness::geometric_deltas(&g, 6) {
        assert!(!mixedness::is_semi_mixed(&mask, delta, 0.25).unwrap().semi_mixed);
    }
}

#[test]
fn worst_ball_of_a_stripe_sits_in_the_stripe() {
    let g = GridSpec::square(64).unwrap();
    let mask = mixedness::super_level_set(&fixtures::stripe(&g, 0.25, 0.5), 0.5).unwrap();
    let report = mixedness::is_semi_mixed(&mask, 0.1, 0.25).unwrap();
    let x = report.worst_center[0];
    assert!((0.25..0.5).contains(&x));
    assert!(!report.semi_mixed);
}

#[test]
fn verdicts_are_translation_equivariant() {
    let g = GridSpec::square(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mask = random_mask(&g, &mut rng);
    let moved = mask.translated(&[5, 19]);
    for &delta in &[2.0 / 32.0, 0.2] {
        let a = mixedness::is_mixed(&mask, delta, 0.2).unwrap();
        let b = mixedness::is_mixed(&moved, delta, 0.2).unwrap();
        assert_eq!(a.mixed, b.mixed);
        assert_eq!(a.worst_fraction, b.worst_fraction);
        assert_eq!(a.complement_worst_fraction, b.complement_worst_fraction);
    }
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

#[test]
fn certificate_never_exceeds_the_mix_norm() {
    let g = GridSpec::square(64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let f = random_band_limited(&g, 6, &mut rng);
        let h = norms::h_neg1_norm(&f).unwrap();
        let center = [rng.gen::<f64>(), rng.gen::<f64>(), 0.0];
        let delta = rng.gen_range(1.0 / 16.0..0.25);
        let cert = mixedness::h_neg1_certificate(&f, &center, delta, 0.5).unwrap();
        assert!(cert <= h * (1.0 + 1e-6), "{cert} > {h}");
    }
}

#[test]
fn certificate_scales_like_delta_squared_on_disks() {
    let g = GridSpec::square(256).unwrap();
    let center = [0.25, 0.25, 0.0];
    let deltas = [1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0];
    let (xs, ys): (Vec<f64>, Vec<f64>) = deltas
        .iter()
        .map(|&d| {
            let f = fixtures::disk_pair(&g, &center, 2.0 * d);
            let c = mixedness::h_neg1_certificate(&f, &center, d, 0.5).unwrap();
            (d.ln(), c.ln())
        })
        .unzip();
    let fit = bounds::linear_fit(&xs, &ys).unwrap();
    assert!((fit.slope - 2.0).abs() < 0.15, "slope {}", fit.slope);
}

#[test]
fn certificate_is_translation_equivariant() {
    let g = GridSpec::square(64).unwrap();
    let f = fixtures::disk_pair(&g, &[0.25, 0.25, 0.0], 0.2);
    let moved = ScalarField::from_fn(g, |p| {
        let q = [(p[0] - 0.125).rem_euclid(1.0), (p[1] - 0.25).rem_euclid(1.0), 0.0];
        let i = ((q[0] * 64.0).round() as usize % 64) * 64 + (q[1] * 64.0).round() as usize % 64;
        f.values()[i]
    });
    let a = mixedness::h_neg1_certificate(&f, &[0.25, 0.25, 0.0], 0.1, 0.5).unwrap();
    let b = mixedness::h_neg1_certificate(&moved, &[0.375, 0.5, 0.0], 0.1, 0.5).unwrap();
    assert!((a - b).abs() < 1e-12 * a);
}
