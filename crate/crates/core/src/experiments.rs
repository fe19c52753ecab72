//! Figure-level experiments and the self-validation suite.

use rayon::prelude::*;

use crate::analysis::{effective_corr_row, eigen_snrs, empirical_cdf, scattered_power, steering_magnitude_profile};
use crate::channel::circuit_channel;
use crate::circuit::{passivity_margin, CouplingRegime, PASSIVITY_TOL};
use crate::config::ScenarioConfig;
use crate::fading::frequency::recursion_linear_map;
use crate::fading::jakes_matrix;
use crate::noise::standard_complex_normal;
use crate::seeding::{stream_rng, StreamPurpose};
use crate::sim::Simulator;
use crate::{CMatrix, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SnrRow {
    pub freq_hz: f64,
    pub trial: usize,
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdfRow {
    pub freq_label: String,
    pub value: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringRow {
    pub rank: usize,
    pub magnitude: f64,
    pub regime: CouplingRegime,
    pub end: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrRow {
    pub element_index: usize,
    pub magnitude: f64,
    pub regime: CouplingRegime,
    pub freq_label: String,
}

/// Compact frequency label such as `5GHz` or `100MHz`.
pub fn freq_label(f: f64) -> String {
    let (v, unit) = if f >= 1e9 {
        (f / 1e9, "GHz")
    } else if f >= 1e6 {
        (f / 1e6, "MHz")
    } else if f >= 1e3 {
        (f / 1e3, "kHz")
    } else {
        (f, "Hz")
    };
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{s}{unit}")
}

/// Strongest-eigenmode SNR of every trial at every sub-channel.
pub fn run_snr(config: &ScenarioConfig, regime: CouplingRegime) -> Result<Vec<SnrRow>> {
    let sim = Simulator::new(config, regime)?;
    let policy = sim.power_policy()?;
    let all: Vec<usize> = (0..sim.grid().len()).collect();
    let per_trial = sim.sweep(config.run.trials, &all, |ctx, _, g, u| {
        let h = ctx.frame.h_tilde_with(g, u)?;
        Ok(eigen_snrs(&h, &policy)?.strongest().snr_db)
    })?;
    let mut rows = Vec::with_capacity(config.run.trials * all.len());
    for (l, f) in sim.grid().centers().enumerate() {
        for (trial, snrs) in per_trial.iter().enumerate() {
            rows.push(SnrRow {
                freq_hz: f,
                trial,
                snr_db: snrs[l],
            });
        }
    }
    Ok(rows)
}

/// Scattered-power samples, one vector of `trials` values per requested
/// frequency (evaluated at the nearest grid sub-channel).
pub fn power_samples(config: &ScenarioConfig, regime: CouplingRegime, freqs: &[f64]) -> Result<Vec<Vec<f64>>> {
    let sim = Simulator::new(config, regime)?;
    let p_t = sim.power_policy()?.per_subchannel();
    let mut indices = Vec::with_capacity(freqs.len());
    for &f in freqs {
        if !sim.grid().contains(f) {
            return Err(Error::invalid(
                "power_cdf_freqs_Hz",
                format!("{f} Hz is outside the grid [{}, {}]", sim.grid().f_start(), sim.grid().f_stop()),
            ));
        }
        indices.push(sim.grid().nearest_index(f));
    }
    let mut targets = indices.clone();
    targets.sort_unstable();
    targets.dedup();
    let per_trial = sim.sweep(config.run.trials, &targets, |ctx, _, g, u| {
        Ok(scattered_power(&ctx.frame.h_eq_sc_with(g, u)?, p_t))
    })?;
    Ok(indices
        .iter()
        .map(|l| {
            let k = targets.binary_search(l).expect("target present");
            per_trial.iter().map(|row| row[k]).collect()
        })
        .collect())
}

/// Empirical CDFs of the scattered power at each frequency.
pub fn run_power_cdf(config: &ScenarioConfig, regime: CouplingRegime, freqs: &[f64]) -> Result<Vec<CdfRow>> {
    let samples = power_samples(config, regime, freqs)?;
    let mut rows = Vec::new();
    for (&f, s) in freqs.iter().zip(&samples) {
        let label = freq_label(f);
        for (value, prob) in empirical_cdf(s)? {
            rows.push(CdfRow {
                freq_label: label.clone(),
                value,
                prob,
            });
        }
    }
    Ok(rows)
}

/// Configuration with `n` elements at both ends and regime-sized transmit
/// elements.
fn symmetric_arrays(config: &ScenarioConfig, n: usize) -> ScenarioConfig {
    let mut c = config.clone();
    c.arrays.n_rx = n;
    c.arrays.n_tx = n;
    c.circuit.tx_radius_m = None;
    c
}

/// Ordered, normalized magnitudes of `w_R` and `w_T` for each regime.
pub fn run_steering(config: &ScenarioConfig, regimes: &[CouplingRegime], freq: f64) -> Result<Vec<SteeringRow>> {
    let c = symmetric_arrays(config, config.run.steering_elements);
    let mut rows = Vec::new();
    for &regime in regimes {
        let ctx = Simulator::new(&c, regime)?.context_at(freq)?;
        for (end, w) in [("rx", &ctx.frame.w_r), ("tx", &ctx.frame.w_t)] {
            for (rank, magnitude) in steering_magnitude_profile(w)?.into_iter().enumerate() {
                rows.push(SteeringRow {
                    rank: rank + 1,
                    magnitude,
                    regime,
                    end,
                });
            }
        }
    }
    Ok(rows)
}

/// First-row magnitudes of `C_R` for each regime and frequency.
pub fn run_corr_row(config: &ScenarioConfig, regimes: &[CouplingRegime], freqs: &[f64]) -> Result<Vec<CorrRow>> {
    let mut rows = Vec::new();
    for &regime in regimes {
        let sim = Simulator::new(config, regime)?;
        let contexts: Vec<_> = freqs.par_iter().map(|&f| sim.context_at(f)).collect::<Result<_>>()?;
        for (&f, ctx) in freqs.iter().zip(&contexts) {
            for (i, magnitude) in effective_corr_row(&ctx.frame.c_r)?.into_iter().enumerate() {
                rows.push(CorrRow {
                    element_index: i + 1,
                    magnitude,
                    regime,
                    freq_label: freq_label(f),
                });
            }
        }
    }
    Ok(rows)
}

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `measured ≤ tolerance`.
    fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<48} measured {:.3e}  tolerance {:.3e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance
            )?;
        }
        Ok(())
    }
}

/// Empirical covariance of `vec(F_R·U·F_T)` against `C_Tᵀ ⊗ C_R`, as the
/// largest entrywise deviation after scaling each entry by
/// `√(Σ_ii·Σ_jj)`.
pub fn kronecker_deviation(f_r: &CMatrix, f_t: &CMatrix, c_r: &CMatrix, c_t: &CMatrix, draws: usize, seed: u64) -> f64 {
    let (n_r, n_t) = (f_r.nrows(), f_t.ncols());
    let dim = n_r * n_t;
    let mut acc = CMatrix::zeros(dim, dim);
    let mut rng = stream_rng(seed, StreamPurpose::Validation, &[n_r as u64, n_t as u64]);
    for _ in 0..draws {
        let u = CMatrix::from_fn(f_r.ncols(), f_t.nrows(), |_, _| standard_complex_normal(&mut rng));
        let h = f_r * u * f_t;
        let v = CMatrix::from_column_slice(dim, 1, h.as_slice());
        acc += &v * v.adjoint();
    }
    let emp = acc.unscale(draws as f64);
    let truth = c_t.transpose().kronecker(c_r);
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let scale = (truth[(i, i)].re * truth[(j, j)].re).sqrt();
            worst = worst.max((emp[(i, j)] - truth[(i, j)]).norm() / scale);
        }
    }
    worst
}

/// Invariant suite on the configured scenario.
pub fn validate(config: &ScenarioConfig, regime: CouplingRegime) -> Result<ValidationReport> {
    let sim = Simulator::new(config, regime)?;
    let grid = sim.grid();
    let probes = {
        let mut v = vec![0, grid.len() / 2, grid.len() - 1];
        v.dedup();
        v
    };
    let mut report = ValidationReport::default();
    for &l in &probes {
        let ctx = sim.context(l)?;
        let label = freq_label(ctx.freq_hz);
        let margin = passivity_margin(&ctx.impedances.z_r)?.min(passivity_margin(&ctx.impedances.z_t)?);
        report.checks.push(Check::at_most(format!("passivity deficit at {label}"), (-margin).max(0.0), PASSIVITY_TOL));
        report.checks.push(Check::at_most(
            format!("whitening residual at {label}"),
            ctx.noise.whitening_residual(),
            1e-9,
        ));
    }

    let factors = sim.block_factors();
    let n = factors.block_len();
    report.checks.push(Check::at_most(
        "recursion stationarity",
        factors.stationarity_residual(),
        1e-10,
    ));
    let m = recursion_linear_map(factors, 2);
    let two_block = (&m * m.transpose() - jakes_matrix(2 * n, factors.delta_f(), factors.tau_rms())).amax();
    report.checks.push(Check::at_most("recursion two-block covariance", two_block, 1e-10));
    report.checks.push(Check::at_most(
        "correlation dropped at lag 2n",
        factors.truncated_correlation(),
        config.fading.uncorrelated_threshold,
    ));

    let ctx = sim.context(probes[probes.len() / 2])?;
    let fr = &ctx.frame;
    let draws = 20_000;
    let dev = kronecker_deviation(&fr.f_r, &fr.f_t, &fr.c_r, &fr.c_t, draws, config.fading.seed);
    report
        .checks
        .push(Check::at_most("Kronecker covariance (scaled)", dev, 5.0 / (draws as f64).sqrt()));

    let mut rng = stream_rng(config.fading.seed, StreamPurpose::Validation, &[0]);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let u = CMatrix::from_fn(fr.n_r(), fr.n_t(), |_, _| standard_complex_normal(&mut rng));
        let raw = circuit_channel(&ctx.impedances, sim.circuit_params(), &fr.h_mimo(&u)?)?;
        let white = &ctx.noise.whitener * raw;
        let eq = fr.h_tilde(&u)?;
        worst = worst.max((white - &eq).norm() / eq.norm());
    }
    report.checks.push(Check::at_most("pipeline equivalence (relative)", worst, 1e-9));
    Ok(report)
}
