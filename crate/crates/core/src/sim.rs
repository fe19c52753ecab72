//! Monte Carlo orchestration over trials and the frequency grid.
//!
//! Deterministic per-frequency products (impedances, noise whitener,
//! spatial correlations, equivalent steering vectors) are built once per
//! sub-channel and shared by all trials. Each trial owns a fading stream
//! that walks the grid in order; trials run in parallel and every random
//! draw is keyed by its coordinates, so the thread count never changes a
//! result.

use std::sync::Arc;

use rayon::prelude::*;

use crate::analysis::PowerPolicy;
use crate::channel::{steering_vector, ChannelRealization, EquivalentFrame, RicianGains};
use crate::circuit::{ChuCmsModel, CircuitParams, CouplingRegime, ImpedanceSet};
use crate::config::{KDraw, ScenarioConfig};
use crate::fading::{asd_schedule, BlockFactors, KFactorModel, ScatteredFieldStream, SpatialCorrModel};
use crate::geometry::{FrequencyGrid, UlaConfig};
use crate::noise::{NoiseModel, NoiseParams};
use crate::seeding::{stream_rng, StreamPurpose};
use crate::{CMatrix, Error, Result};

/// Contexts built together before the trials consume them.
const CONTEXT_CHUNK: usize = 32;

/// Deterministic quantities of one sub-channel.
#[derive(Debug, Clone)]
pub struct FrequencyContext {
    /// Grid index, or `None` for an off-grid evaluation.
    pub index: Option<usize>,
    pub freq_hz: f64,
    pub impedances: ImpedanceSet,
    pub noise: NoiseModel,
    pub r_r: CMatrix,
    pub r_t: CMatrix,
    /// Equivalent-channel factors; `frame.gains` holds the median (`z = 0`)
    /// environment.
    pub frame: EquivalentFrame,
}

/// Per-trial environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialEnv {
    pub trial: u64,
    /// Standardized K-factor draw.
    pub z: f64,
}

/// Builds contexts and runs trials for one coupling regime.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: ScenarioConfig,
    regime: CouplingRegime,
    grid: FrequencyGrid,
    rx: UlaConfig,
    tx: UlaConfig,
    rx_model: ChuCmsModel,
    tx_model: ChuCmsModel,
    circuit: CircuitParams,
    noise: NoiseParams,
    kmodel: KFactorModel,
    factors: Arc<BlockFactors>,
}

/// Element radius and impedance model of one array under `regime`.
pub fn array_for_regime(
    config: &ScenarioConfig,
    regime: CouplingRegime,
    n: usize,
    radius_override: Option<f64>,
) -> Result<(UlaConfig, ChuCmsModel)> {
    let spacing = config.arrays.spacing_m;
    let regime_radius = regime.radius(spacing, config.circuit.weak_radius_fraction);
    let radius = match radius_override {
        Some(r) if n == 1 => r,
        _ => regime_radius,
    };
    let array = UlaConfig::new(n, spacing, radius)?;
    let scale = regime.mutual_scale(regime_radius, spacing);
    let model = ChuCmsModel::new(radius, config.circuit.r_rad_ohm, scale, config.circuit.kernel);
    Ok((array, model))
}

impl Simulator {
    pub fn new(config: &ScenarioConfig, regime: CouplingRegime) -> Result<Self> {
        config.validate()?;
        let grid = FrequencyGrid::new(config.grid.f_start_hz, config.grid.f_stop_hz, config.grid.delta_f_hz)?;
        let (rx, rx_model) = array_for_regime(config, regime, config.arrays.n_rx, None)?;
        let (tx, tx_model) = array_for_regime(config, regime, config.arrays.n_tx, config.circuit.tx_radius_m)?;
        let circuit = CircuitParams {
            r_source: config.circuit.r_ohm,
            r_in: config.circuit.r_in_ohm,
            lna_gain: config.circuit.lna_gain,
        };
        let noise = NoiseParams::new(
            config.noise.temperature_k,
            grid.delta_f(),
            config.circuit.r_in_ohm,
            config.noise.noise_figure_db,
            config.circuit.lna_gain,
        )?;
        let f = &config.fading;
        let kmodel = KFactorModel {
            mu_slope: f.k_mu_slope,
            mu_intercept: f.k_mu_intercept,
            var_slope: f.k_var_slope,
            var_intercept: f.k_var_intercept,
        };
        let factors = BlockFactors::new(f.block_len, grid.delta_f(), config.tau_rms_s())?;
        let dropped = factors.truncated_correlation();
        if dropped > f.uncorrelated_threshold {
            return Err(Error::invalid(
                "fading.block_len",
                format!(
                    "correlation {dropped:.4} at lag 2·block_len exceeds uncorrelated_threshold {}; increase block_len",
                    f.uncorrelated_threshold
                ),
            ));
        }
        Ok(Self {
            config: config.clone(),
            regime,
            grid,
            rx,
            tx,
            rx_model,
            tx_model,
            circuit,
            noise,
            kmodel,
            factors: Arc::new(factors),
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn regime(&self) -> CouplingRegime {
        self.regime
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn rx_array(&self) -> &UlaConfig {
        &self.rx
    }

    pub fn tx_array(&self) -> &UlaConfig {
        &self.tx
    }

    pub fn circuit_params(&self) -> &CircuitParams {
        &self.circuit
    }

    pub fn block_factors(&self) -> &Arc<BlockFactors> {
        &self.factors
    }

    pub fn k_model(&self) -> &KFactorModel {
        &self.kmodel
    }

    pub fn power_policy(&self) -> Result<PowerPolicy> {
        PowerPolicy::new(
            self.config.link.p_total_w,
            self.config.link.power_normalization,
            self.grid.len(),
        )
    }

    /// Context of grid sub-channel `index`.
    pub fn context(&self, index: usize) -> Result<FrequencyContext> {
        if index >= self.grid.len() {
            return Err(Error::invalid(
                "index",
                format!("sub-channel {index} is outside a grid of {}", self.grid.len()),
            ));
        }
        let mut ctx = self.context_at(self.grid.center(index))?;
        ctx.index = Some(index);
        Ok(ctx)
    }

    /// Impedance matrices and coupling matrices at `f`.
    pub fn impedances_at(&self, f: f64) -> Result<ImpedanceSet> {
        ImpedanceSet::build(
            f,
            &self.circuit,
            (&self.tx, &self.tx_model as &dyn crate::circuit::ImpedanceModel),
            (&self.rx, &self.rx_model as &dyn crate::circuit::ImpedanceModel),
        )
    }

    /// Context at an arbitrary frequency inside the grid span.
    pub fn context_at(&self, f: f64) -> Result<FrequencyContext> {
        let fc = &self.config.fading;
        let asd = asd_schedule(f, &self.grid, fc.asd_low_deg, fc.asd_high_deg)?;
        let spacing = self.config.arrays.spacing_m;
        let corr = SpatialCorrModel::new(fc.cluster_angle_rad, asd, spacing)?;
        let r_r = corr.matrix(self.rx.n_elements(), f)?;
        let r_t = corr.matrix(self.tx.n_elements(), f)?;
        let impedances = self.impedances_at(f)?;
        let noise = NoiseModel::build(&impedances.p, &impedances.z_r, &self.noise)?;
        let link = &self.config.link;
        let a_r = steering_vector(self.rx.n_elements(), spacing, f, link.theta_r_rad);
        let a_t = steering_vector(self.tx.n_elements(), spacing, f, link.theta_t_rad);
        let gains = self.gains_at(f, 0.0)?;
        let frame = EquivalentFrame::build(&impedances, &noise, gains, a_r, a_t, &r_r, &r_t)?;
        Ok(FrequencyContext {
            index: None,
            freq_hz: f,
            impedances,
            noise,
            r_r,
            r_t,
            frame,
        })
    }

    /// Rician gains at `f` for standardized K draw `z`.
    pub fn gains_at(&self, f: f64, z: f64) -> Result<RicianGains> {
        let link = &self.config.link;
        let k = self.kmodel.k_linear(z, f * 1e-9)?;
        RicianGains::from_link(f, k, link.g_t, link.g_r, link.distance_m, link.gamma)
    }

    /// Environment of `trial`.
    pub fn trial_env(&self, trial: u64) -> TrialEnv {
        let seed = self.config.fading.seed;
        let mut rng = match self.config.fading.k_draw {
            KDraw::PerTrial => stream_rng(seed, StreamPurpose::KFactor, &[trial]),
            KDraw::PerRun => stream_rng(seed, StreamPurpose::KFactor, &[]),
        };
        TrialEnv {
            trial,
            z: KFactorModel::draw_z(&mut rng),
        }
    }

    fn fading_stream(&self, trial: u64, total_len: usize) -> ScatteredFieldStream {
        ScatteredFieldStream::new(
            self.factors.clone(),
            self.rx.n_elements(),
            self.tx.n_elements(),
            total_len,
            self.config.fading.seed,
            trial,
        )
    }

    /// Evaluates `observe` for every trial in `0..trials` at every grid
    /// index in `targets`. Results are indexed `[trial][target]`.
    pub fn sweep<T, F>(&self, trials: usize, targets: &[usize], observe: F) -> Result<Vec<Vec<T>>>
    where
        T: Send,
        F: Fn(&FrequencyContext, &TrialEnv, &RicianGains, &CMatrix) -> Result<T> + Sync,
    {
        if trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if targets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("targets", "grid indices must be strictly increasing"));
        }
        let Some(&last) = targets.last() else {
            return Ok((0..trials).map(|_| Vec::new()).collect());
        };
        if last >= self.grid.len() {
            return Err(Error::invalid("targets", format!("index {last} is outside the grid")));
        }
        let mut states: Vec<(TrialEnv, ScatteredFieldStream, Vec<T>)> = (0..trials as u64)
            .map(|t| (self.trial_env(t), self.fading_stream(t, last + 1), Vec::with_capacity(targets.len())))
            .collect();
        for chunk in targets.chunks(CONTEXT_CHUNK) {
            let contexts: Vec<FrequencyContext> =
                chunk.par_iter().map(|&l| self.context(l)).collect::<Result<_>>()?;
            states.par_iter_mut().try_for_each(|(env, stream, out)| -> Result<()> {
                for ctx in &contexts {
                    let l = ctx.index.expect("grid context");
                    stream.skip(l - stream.emitted());
                    let u = stream.next_field();
                    let gains = self.gains_at(ctx.freq_hz, env.z)?;
                    out.push(observe(ctx, env, &gains, &u)?);
                }
                Ok(())
            })?;
        }
        Ok(states.into_iter().map(|(_, _, out)| out).collect())
    }

    /// Full channel of one trial at the given grid indices.
    pub fn realize(&self, trial: u64, targets: &[usize]) -> Result<ChannelRealization> {
        if targets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("targets", "grid indices must be strictly increasing"));
        }
        let Some(&last) = targets.last() else {
            return Ok(Vec::new());
        };
        let env = self.trial_env(trial);
        let mut stream = self.fading_stream(trial, last + 1);
        let mut out = Vec::with_capacity(targets.len());
        for &l in targets {
            let ctx = self.context(l)?;
            stream.skip(l - stream.emitted());
            let u = stream.next_field();
            let mut frame = ctx.frame;
            frame.gains = self.gains_at(ctx.freq_hz, env.z)?;
            out.push(frame.snapshot(&u)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{eigen_snrs, PowerNormalization};

    fn small_config() -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        c.grid.f_start_hz = 1e9;
        c.grid.f_stop_hz = 1.5e9;
        c.grid.delta_f_hz = 1e8;
        c.arrays.n_rx = 3;
        c.arrays.n_tx = 2;
        c.circuit.tx_radius_m = None;
        c.fading.block_len = 2;
        c.fading.uncorrelated_threshold = 0.5;
        c
    }

    #[test]
    fn regime_arrays() {
        let c = ScenarioConfig::default();
        let (a, m) = array_for_regime(&c, CouplingRegime::Weak, 4, None).unwrap();
        assert!((a.element_radius() - 0.00025).abs() < 1e-15);
        assert!((m.mutual_scale - 1e-3).abs() < 1e-15);
        let (a, _) = array_for_regime(&c, CouplingRegime::Tight, 1, Some(0.5)).unwrap();
        assert_eq!(a.element_radius(), 0.5);
        let (_, m) = array_for_regime(&c, CouplingRegime::Decoupled, 4, None).unwrap();
        assert_eq!(m.mutual_scale, 0.0);
    }

    #[test]
    fn rejects_short_blocks() {
        let mut c = small_config();
        c.fading.uncorrelated_threshold = 1e-3;
        assert!(Simulator::new(&c, CouplingRegime::Tight).is_err());
    }

    #[test]
    fn sweep_is_deterministic_and_matches_realize() {
        let sim = Simulator::new(&small_config(), CouplingRegime::Tight).unwrap();
        let targets: Vec<usize> = vec![0, 2, 3, 5];
        let run = || {
            sim.sweep(3, &targets, |ctx, _, g, u| ctx.frame.h_tilde_with(g, u))
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
        let r = sim.realize(1, &targets).unwrap();
        for (k, snap) in r.iter().enumerate() {
            assert!((&snap.h_tilde - &a[1][k]).norm() <= 1e-12 * snap.h_tilde.norm());
        }
        assert!(sim.sweep(0, &targets, |_, _, _, _| Ok(())).is_err());
        assert!(sim.sweep(1, &[3, 1], |_, _, _, _| Ok(())).is_err());
    }

    #[test]
    fn k_draw_modes() {
        let mut c = small_config();
        let sim = Simulator::new(&c, CouplingRegime::Tight).unwrap();
        assert_ne!(sim.trial_env(0).z, sim.trial_env(1).z);
        c.fading.k_draw = KDraw::PerRun;
        let sim = Simulator::new(&c, CouplingRegime::Tight).unwrap();
        assert_eq!(sim.trial_env(0).z, sim.trial_env(5).z);
    }

    #[test]
    fn equal_power_sums_to_total() {
        let sim = Simulator::new(&small_config(), CouplingRegime::Tight).unwrap();
        let policy = sim.power_policy().unwrap();
        let all: Vec<usize> = (0..sim.grid().len()).collect();
        let total: f64 = sim
            .sweep(1, &all, |ctx, _, g, u| Ok(eigen_snrs(&ctx.frame.h_tilde_with(g, u)?, &policy)?.total_power()))
            .unwrap()[0]
            .iter()
            .sum();
        assert!((total - 2.0).abs() < 1e-9);
        let mut c = small_config();
        c.link.power_normalization = PowerNormalization::PerSubchannel;
        let sim = Simulator::new(&c, CouplingRegime::Tight).unwrap();
        assert_eq!(sim.power_policy().unwrap().per_subchannel(), 2.0);
    }

    #[test]
    fn off_grid_context_is_rejected() {
        let sim = Simulator::new(&small_config(), CouplingRegime::Tight).unwrap();
        assert!(sim.context_at(5e9).is_err());
        assert!(sim.context(6).is_err());
    }
}
