//! Monte Carlo checks of the fading and channel statistics against
//! independent analytic oracles.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Gamma};

use swmimo::analysis::scattered_power;
use swmimo::channel::{whitened_channel, RicianGains};
use swmimo::circuit::CouplingRegime;
use swmimo::config::ScenarioConfig;
use swmimo::fading::{jakes_entry, BlockFactors, FreqCorrGenerator, ScatteredFieldStream, SpatialCorrModel};
use swmimo::noise::standard_complex_normal;
use swmimo::seeding::{stream_rng, StreamPurpose};
use swmimo::sim::Simulator;
use swmimo::{CMatrix, CVector};

fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn scattered_power_is_gamma_distributed() {
    let (n_r, n_t) = (4, 2);
    let trials = 10_000;
    let alpha = Complex64::from_polar(3.0, 0.7);
    let gains = RicianGains::new(2e-3, 1.5).unwrap();
    let s2 = alpha.norm_sqr() * gains.scatter_amp * gains.scatter_amp;
    let p_t = 0.25;
    let factors = Arc::new(BlockFactors::new(4, 1e7, 2e-9).unwrap());
    let eye_r = CMatrix::identity(n_r, n_r);
    let eye_t = CMatrix::identity(n_t, n_t);
    let zero_r = CVector::zeros(n_r);
    let zero_t = CVector::zeros(n_t);
    let mut metric: Vec<f64> = (0..trials)
        .map(|trial| {
            let mut stream = ScatteredFieldStream::new(factors.clone(), n_r, n_t, 1, 3, trial);
            let u = stream.next_field();
            let h = whitened_channel(alpha, &gains, &zero_r, &zero_t, &eye_r, &u, &eye_t).unwrap();
            scattered_power(&h, p_t) / s2 * n_t as f64 / p_t
        })
        .collect();
    let gamma = Gamma::new((n_r * n_t) as f64, 1.0).unwrap();
    let d = ks_distance(&mut metric, |x| gamma.cdf(x));
    assert!(d < 0.02, "KS distance {d}");
}

#[test]
fn fading_stream_field_has_kronecker_covariance() {
    let mut c = ScenarioConfig::default();
    c.arrays.n_rx = 3;
    c.arrays.n_tx = 2;
    c.circuit.tx_radius_m = None;
    let sim = Simulator::new(&c, CouplingRegime::Tight).unwrap();
    let fr = sim.context_at(2e9).unwrap().frame;
    let factors = Arc::new(BlockFactors::new(8, 1e7, 2e-9).unwrap());
    let draws = 20_000;
    let dim = 6;
    let mut acc = CMatrix::zeros(dim, dim);
    for trial in 0..draws {
        let mut stream = ScatteredFieldStream::new(factors.clone(), 3, 2, 11, 5, trial);
        stream.skip(10);
        let h = &fr.f_r * stream.next_field() * &fr.f_t;
        let v = CMatrix::from_column_slice(dim, 1, h.as_slice());
        acc += &v * v.adjoint();
    }
    let emp = acc.unscale(draws as f64);
    let truth = fr.c_t.transpose().kronecker(&fr.c_r);
    let tol = 5.0 / (draws as f64).sqrt();
    for i in 0..dim {
        for j in 0..dim {
            let scale = (truth[(i, i)].re * truth[(j, j)].re).sqrt();
            let err = (emp[(i, j)] - truth[(i, j)]).norm() / scale;
            assert!(err < tol, "entry ({i}, {j}): scaled error {err} above {tol}");
        }
    }
}

fn laplace_draw<R: Rng>(rng: &mut R, b: f64) -> f64 {
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let w = -b * u.signum() * (1.0 - 2.0 * u.abs()).ln();
        if w.abs() <= PI {
            return w;
        }
    }
}

#[test]
fn spatial_quadrature_matches_laplacian_monte_carlo() {
    let spacing = 0.005;
    let cases = [(1e9, 10f64.to_radians(), 0.0), (2e10, 6f64.to_radians(), 0.3), (3e10, 2f64.to_radians(), -0.5)];
    let draws = 1_000_000;
    for (case, &(f, asd, theta)) in cases.iter().enumerate() {
        let model = SpatialCorrModel::new(theta, asd, spacing).unwrap();
        let k = 2.0 * PI * spacing * f / swmimo::SPEED_OF_LIGHT;
        let b = asd / 2f64.sqrt();
        let mut rng = stream_rng(21, StreamPurpose::Validation, &[case as u64]);
        let lags = [1usize, 2, 3];
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for _ in 0..draws {
            let s = (theta + laplace_draw(&mut rng, b)).sin();
            for (a, &lag) in acc.iter_mut().zip(&lags) {
                *a += Complex64::from_polar(1.0, k * lag as f64 * s);
            }
        }
        for (a, &lag) in acc.iter().zip(&lags) {
            let mc = a / draws as f64;
            let q = model.entry(0, lag, f).unwrap();
            assert!((q - mc).norm() < 3e-3, "f {f}, lag {lag}: quadrature {q} vs Monte Carlo {mc}");
        }
    }
}

#[test]
fn recursion_reproduces_jakes_within_adjacent_blocks() {
    let n = 4;
    let (delta_f, tau) = (1e7, 2e-9);
    let factors = Arc::new(BlockFactors::new(n, delta_f, tau).unwrap());
    let blocks = 4;
    let len = n * blocks;
    let trials = 40_000;
    let mut rng = stream_rng(9, StreamPurpose::Validation, &[]);
    let mut acc = vec![vec![Complex64::new(0.0, 0.0); len]; len];
    for _ in 0..trials {
        let mut g = FreqCorrGenerator::new(factors.clone());
        let mut h = Vec::with_capacity(len);
        for _ in 0..blocks {
            let u: Vec<Complex64> = (0..n).map(|_| standard_complex_normal(&mut rng)).collect();
            h.extend(g.next_block(&u).unwrap());
        }
        for a in 0..len {
            for b in a..len {
                acc[a][b] += h[a] * h[b].conj();
            }
        }
    }
    let tol = 5.0 / (trials as f64).sqrt();
    for a in 0..len {
        for b in a..len {
            if b / n - a / n > 1 {
                continue;
            }
            let est = acc[a][b] / trials as f64;
            let err = (est - jakes_entry(b - a, delta_f, tau)).norm();
            assert!(err < tol, "pair ({a}, {b}): error {err} above {tol}");
        }
    }
}
