//! Randomized property suites behind `pocs selftest`.

use num_complex::Complex64;
use pocs_core::diagnostics::{count_small_measurements, rip_exhaustive, rip_monte_carlo, RipCone};
use pocs_core::linalg::{dist2, norm2, Matrix};
use pocs_core::linearization::build_linearized;
use pocs_core::measurement::{observe, phase, SensingMatrix};
use pocs_core::rng::{derive, stream, streams, Stream};
use pocs_core::signal::SignalVector;
use pocs_core::solver::{lp_oracle, qcbp, weighted_l1, SolverOptions};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestConfig {
    pub seed: u64,
    pub sign_pairs: usize,
    pub normalization_pairs: usize,
    pub linearity_triples: usize,
    pub rip_instances: usize,
    pub small_measurement_m: usize,
    pub small_measurement_trials: usize,
    pub eta: f64,
    pub oracle_instances: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sign_pairs: 100_000,
            normalization_pairs: 10_000,
            linearity_triples: 100,
            rip_instances: 20,
            small_measurement_m: 10_000,
            small_measurement_trials: 20,
            eta: 0.1,
            oracle_instances: 50,
        }
    }
}

fn gaussian(rng: &mut Stream) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex number with a log-uniform modulus over many decades, and an
/// exact zero now and then.
fn wide_complex(rng: &mut Stream) -> Complex64 {
    if rng.gen_bool(0.01) {
        return Complex64::new(0.0, 0.0);
    }
    let scale = 10f64.powf(rng.gen_range(-6.0..3.0));
    Complex64::new(scale * gaussian(rng), scale * gaussian(rng))
}

/// `|sign(a + d) − sign(a)| ≤ min{2|d|/max(|a + d|, |a|), 2}`.
pub fn sign_perturbation(pairs: usize, seed: u64) -> CheckOutcome {
    let mut rng = stream(seed, streams::SAMPLER);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let a = wide_complex(&mut rng);
        let d = wide_complex(&mut rng);
        let denom = (a + d).norm().max(a.norm());
        let bound = if denom == 0.0 {
            2.0
        } else {
            (2.0 * d.norm() / denom).min(2.0)
        };
        let excess = (phase(a + d) - phase(a)).norm() - bound;
        worst = worst.max(excess);
        if excess > 1e-12 {
            violations += 1;
        }
    }
    CheckOutcome {
        name: "sign-perturbation inequality",
        passed: violations == 0,
        detail: format!("{pairs} pairs, {violations} violations, worst excess {worst:.3e}"),
    }
}

/// `‖a/‖a‖ − b/‖b‖‖ ≤ 2‖a − b‖/max(‖a‖, ‖b‖)`.
pub fn vector_normalization(pairs: usize, seed: u64) -> CheckOutcome {
    let mut rng = stream(seed, streams::SAMPLER);
    let mut violations = 0;
    for _ in 0..pairs {
        let d = rng.gen_range(1..20);
        let sa = 10f64.powf(rng.gen_range(-3.0..3.0));
        let sb = 10f64.powf(rng.gen_range(-3.0..3.0));
        let a: Vec<f64> = (0..d).map(|_| sa * gaussian(&mut rng)).collect();
        let b: Vec<f64> = (0..d).map(|_| sb * gaussian(&mut rng)).collect();
        let (na, nb) = (norm2(&a), norm2(&b));
        let ua: Vec<f64> = a.iter().map(|v| v / na).collect();
        let ub: Vec<f64> = b.iter().map(|v| v / nb).collect();
        let bound = 2.0 * dist2(&a, &b) / na.max(nb);
        if dist2(&ua, &ub) > bound * (1.0 + 1e-12) + 1e-15 {
            violations += 1;
        }
    }
    CheckOutcome {
        name: "vector-normalization inequality",
        passed: violations == 0,
        detail: format!("{pairs} pairs, {violations} violations"),
    }
}

/// `A_{λw + w'} = λA_w + A_{w'}` entrywise, and `A_w(αu + v) = αA_w u + A_w v`.
pub fn linearity(triples: usize, seed: u64) -> CheckOutcome {
    let mut rng = stream(seed, streams::SAMPLER);
    let mut worst: f64 = 0.0;
    for t in 0..triples {
        let (m, n) = (rng.gen_range(2..30), rng.gen_range(2..30));
        let phi = SensingMatrix::draw(m, n, derive(seed, t as u64)).expect("valid dimensions");
        let w1: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(gaussian(&mut rng), gaussian(&mut rng)))
            .collect();
        let w2: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(gaussian(&mut rng), gaussian(&mut rng)))
            .collect();
        let lambda = gaussian(&mut rng);
        let mixed: Vec<Complex64> = w1.iter().zip(&w2).map(|(a, b)| a * lambda + b).collect();
        let build = |w: &[Complex64]| {
            build_linearized(w, &phi, 0.0)
                .expect("matching lengths")
                .matrix
        };
        let (a1, a2, am) = (build(&w1), build(&w2), build(&mixed));
        for k in 0..am.as_slice().len() {
            let expect = lambda * a1.as_slice()[k] + a2.as_slice()[k];
            worst = worst.max((am.as_slice()[k] - expect).abs());
        }
        let u: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let v: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let alpha = gaussian(&mut rng);
        let combo: Vec<f64> = u.iter().zip(&v).map(|(p, q)| alpha * p + q).collect();
        let (au, av, ac) = (a1.mul_vec(&u), a1.mul_vec(&v), a1.mul_vec(&combo));
        for i in 0..ac.len() {
            worst = worst.max((ac[i] - (alpha * au[i] + av[i])).abs());
        }
    }
    CheckOutcome {
        name: "linearized-matrix linearity",
        passed: worst <= 1e-12,
        detail: format!("{triples} triples, worst entry gap {worst:.3e}"),
    }
}

/// Monte Carlo distortion never exceeds the exhaustive value.
pub fn rip_cross_check(instances: usize, seed: u64) -> CheckOutcome {
    let mut failures = 0;
    let mut tightest: f64 = f64::INFINITY;
    for k in 0..instances {
        let s = derive(seed, k as u64);
        let (m, n, t) = (8 + k % 5, 10 + k % 5, 2 + k % 2);
        let phi = SensingMatrix::draw(m, n, s).expect("valid dimensions");
        let x = SignalVector::random_sparse(n, 2, &mut stream(s, streams::SIGNAL)).expect("s <= n");
        let z = observe(&phi, &x.values).expect("matching lengths");
        let a = build_linearized(&z.values, &phi, 0.0)
            .expect("matching lengths")
            .matrix;
        let cone = RipCone::Sparse { t };
        let ex = rip_exhaustive(&a, cone).expect("small cone").delta;
        let mc = rip_monte_carlo(&a, cone, 500, s)
            .expect("samples > 0")
            .delta;
        tightest = tightest.min(ex - mc);
        if mc > ex + 1e-12 {
            failures += 1;
        }
    }
    CheckOutcome {
        name: "monte-carlo RIP <= exhaustive RIP",
        passed: failures == 0,
        detail: format!(
            "{instances} instances, {failures} failures, smallest margin {tightest:.3e}"
        ),
    }
}

/// `|J_{x,η}|` is monotone in `η` and at most `ηm` in at least 95% of trials.
pub fn small_measurements(m: usize, eta: f64, trials: usize, seed: u64) -> CheckOutcome {
    let mut within = 0;
    let mut monotone = true;
    for t in 0..trials {
        let s = derive(seed, t as u64);
        let phi = SensingMatrix::draw(m, 8, s).expect("valid dimensions");
        let x = SignalVector::random_sparse(8, 3, &mut stream(s, streams::SIGNAL)).expect("s <= n");
        let counts: Vec<usize> = [0.0, eta / 4.0, eta / 2.0, eta, 2.0 * eta, 1.0]
            .iter()
            .map(|&e| count_small_measurements(&phi, &x.values, e).expect("eta >= 0"))
            .collect();
        monotone &= counts.windows(2).all(|w| w[0] <= w[1]);
        if counts[3] as f64 <= eta * m as f64 {
            within += 1;
        }
    }
    let frequency = within as f64 / trials as f64;
    CheckOutcome {
        name: "small-measurement count",
        passed: monotone && frequency >= 0.95,
        detail: format!("monotone {monotone}, |J| <= eta*m in {within}/{trials} trials"),
    }
}

/// ADMM basis pursuit against the simplex oracle on small planted problems.
pub fn solver_oracle(instances: usize, seed: u64) -> CheckOutcome {
    let opts = SolverOptions::default();
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for k in 0..instances {
        let mut rng = stream(derive(seed, k as u64), streams::SAMPLER);
        let rows = rng.gen_range(3..=10);
        let cols = rng.gen_range(rows + 1..=20);
        let data: Vec<f64> = (0..rows * cols).map(|_| gaussian(&mut rng)).collect();
        let a = Matrix::from_row_major(rows, cols, data).expect("sized data");
        let mut u0 = vec![0.0; cols];
        let planted = rng.gen_range(1..=rows.min(3));
        for j in rand::seq::index::sample(&mut rng, cols, planted) {
            u0[j] = gaussian(&mut rng);
        }
        let y = a.mul_vec(&u0);
        let ones = vec![1.0; cols];
        match (qcbp(&a, &y, 0.0, &opts), lp_oracle(&a, &y, &ones)) {
            (Ok(r), Ok(exact)) => {
                worst = worst.max((r.objective - weighted_l1(&exact, &ones)).abs())
            }
            _ => errors += 1,
        }
    }
    CheckOutcome {
        name: "solver-oracle equivalence",
        passed: errors == 0 && worst <= 1e-6,
        detail: format!("{instances} instances, {errors} errors, worst objective gap {worst:.3e}"),
    }
}

pub fn run(cfg: &SelftestConfig) -> Vec<CheckOutcome> {
    vec![
        sign_perturbation(cfg.sign_pairs, cfg.seed),
        vector_normalization(cfg.normalization_pairs, cfg.seed),
        linearity(cfg.linearity_triples, cfg.seed),
        rip_cross_check(cfg.rip_instances, cfg.seed),
        small_measurements(
            cfg.small_measurement_m,
            cfg.eta,
            cfg.small_measurement_trials,
            cfg.seed,
        ),
        solver_oracle(cfg.oracle_instances, cfg.seed),
    ]
}
