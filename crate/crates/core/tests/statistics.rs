//! Distributional checks on the random ensembles and the diagnostics built
//! on them. Thresholds are loose high-probability events, seeds are fixed.

use num_complex::Complex64;
use pocs_core::diagnostics::{
    count_small_measurements, l1_concentration, perturbation_audit, perturbed_phases,
    rip_monte_carlo, RipCone,
};
use pocs_core::linalg::norm2;
use pocs_core::linearization::{build_linearized, ground_truth_scaled};
use pocs_core::measurement::{observe, SensingMatrix};
use pocs_core::rng::{stream, streams};
use pocs_core::signal::SignalVector;
use rand::Rng;
use rand_distr::StandardNormal;

fn unit_sparse(n: usize, s: usize, seed: u64) -> Vec<f64> {
    SignalVector::random_sparse(n, s, &mut stream(seed, streams::SIGNAL))
        .unwrap()
        .values
}

#[test]
fn sensing_entries_have_unit_variance_parts() {
    let phi = SensingMatrix::draw(200, 100, 11).unwrap();
    let count = 20_000.0;
    let (mut re, mut im, mut re2, mut im2, mut cross) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for c in phi.entries() {
        re += c.re;
        im += c.im;
        re2 += c.re * c.re;
        im2 += c.im * c.im;
        cross += c.re * c.im;
    }
    // standard errors are about 1/√20000 ≈ 0.007 and 0.01
    assert!((re / count).abs() < 0.035);
    assert!((im / count).abs() < 0.035);
    assert!((re2 / count - 1.0).abs() < 0.05);
    assert!((im2 / count - 1.0).abs() < 0.05);
    assert!((cross / count).abs() < 0.035);
}

#[test]
fn scaled_truth_norm_concentrates_near_one() {
    for seed in 0..20 {
        let phi = SensingMatrix::draw(2000, 50, seed).unwrap();
        let x = unit_sparse(50, 5, seed);
        let t = ground_truth_scaled(&phi, &x).unwrap();
        assert!((norm2(&t.x_star) - 1.0).abs() < 0.1, "seed {seed}");
    }
}

#[test]
fn small_measurement_fraction_below_eta() {
    let eta = 0.1;
    let mut hits = 0;
    for seed in 0..20 {
        let phi = SensingMatrix::draw(10_000, 8, seed).unwrap();
        let x = unit_sparse(8, 3, seed);
        if count_small_measurements(&phi, &x, eta).unwrap() as f64 <= eta * 10_000.0 {
            hits += 1;
        }
    }
    assert!(hits >= 19);
}

#[test]
fn l1_norm_of_image_concentrates() {
    let mut hits = 0;
    for seed in 0..100 {
        let phi = SensingMatrix::draw(10_000, 4, seed).unwrap();
        let x = unit_sparse(4, 2, seed);
        if l1_concentration(&phi, &x).unwrap() <= 0.05 {
            hits += 1;
        }
    }
    assert!(hits >= 95);
}

#[test]
fn monte_carlo_distortion_of_linearized_matrix() {
    let mut hits = 0;
    for seed in 0..20 {
        let phi = SensingMatrix::draw(300, 500, seed).unwrap();
        let z = observe(&phi, &unit_sparse(500, 5, seed)).unwrap();
        let a = build_linearized(&z.values, &phi, 0.0).unwrap().matrix;
        if rip_monte_carlo(&a, RipCone::Sparse { t: 10 }, 500, seed)
            .unwrap()
            .delta
            <= 1.0 / 3.0
        {
            hits += 1;
        }
    }
    assert!(hits >= 18, "{hits} of 20");
}

#[test]
fn random_pre_sign_perturbations_respect_phase_bound() {
    let phi = SensingMatrix::draw(10_000, 6, 3).unwrap();
    let x = unit_sparse(6, 2, 3);
    let mut rng = stream(3, streams::CHANNEL);
    let delta: Vec<Complex64> = (0..10_000)
        .map(|_| {
            let scale = 10f64.powf(rng.gen_range(-3.0..1.0));
            Complex64::new(
                scale * rng.sample::<f64, _>(StandardNormal),
                scale * rng.sample::<f64, _>(StandardNormal),
            )
        })
        .collect();
    let clean = observe(&phi, &x).unwrap();
    let noisy = perturbed_phases(&phi, &x, &delta).unwrap();
    let audit = perturbation_audit(&noisy, &clean.values, &phi, &x, &delta).unwrap();
    assert!(audit.max_violation <= 1e-12);
    assert_eq!(audit.checked, 10_000);
}
