//! Scenario configuration: a TOML file with one table per subsystem.
//!
//! Every key has a default, unknown keys are rejected and every value is
//! range-checked by [`ScenarioConfig::validate`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::PowerNormalization;
use crate::circuit::{CouplingRegime, MutualKernel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitConfig {
    pub r_ohm: f64,
    pub r_in_ohm: f64,
    pub lna_gain: f64,
    /// Radiation resistance of the Chu circuit.
    pub r_rad_ohm: f64,
    pub kernel: MutualKernel,
    pub regime: CouplingRegime,
    /// Weak-coupling element radius as a fraction of the spacing.
    pub weak_radius_fraction: f64,
    /// Radius of a single transmit element; ignored for transmit arrays.
    pub tx_radius_m: Option<f64>,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            r_ohm: 1.0,
            r_in_ohm: 1.0,
            lna_gain: 10.0,
            r_rad_ohm: 1.0,
            kernel: MutualKernel::CmsSinc,
            regime: CouplingRegime::Tight,
            weak_radius_fraction: 0.05,
            tx_radius_m: Some(0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
    #[serde(rename = "noise_figure_dB")]
    pub noise_figure_db: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            temperature_k: 290.0,
            noise_figure_db: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    #[serde(rename = "f_start_Hz")]
    pub f_start_hz: f64,
    #[serde(rename = "f_stop_Hz")]
    pub f_stop_hz: f64,
    #[serde(rename = "delta_f_Hz")]
    pub delta_f_hz: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            f_start_hz: 1e8,
            f_stop_hz: 3e10,
            delta_f_hz: 1e7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraysConfig {
    pub n_rx: usize,
    pub n_tx: usize,
    pub spacing_m: f64,
}

impl Default for ArraysConfig {
    fn default() -> Self {
        Self {
            n_rx: 32,
            n_tx: 1,
            spacing_m: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    #[serde(rename = "p_total_W")]
    pub p_total_w: f64,
    pub distance_m: f64,
    pub gamma: f64,
    pub theta_t_rad: f64,
    pub theta_r_rad: f64,
    pub g_t: f64,
    pub g_r: f64,
    pub power_normalization: PowerNormalization,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            p_total_w: 2.0,
            distance_m: 90.0,
            gamma: 3.5,
            theta_t_rad: 0.0,
            theta_r_rad: 0.0,
            g_t: 1.0,
            g_r: 1.0,
            power_normalization: PowerNormalization::Total,
        }
    }
}

/// Whether the standardized K draw is shared by all trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KDraw {
    #[default]
    PerTrial,
    PerRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FadingConfig {
    pub tau_rms_ns: f64,
    pub block_len: usize,
    /// Largest acceptable correlation at lag `2·block_len`.
    pub uncorrelated_threshold: f64,
    pub asd_low_deg: f64,
    pub asd_high_deg: f64,
    /// Central angle of the scattering cluster at both ends.
    pub cluster_angle_rad: f64,
    pub k_mu_slope: f64,
    pub k_mu_intercept: f64,
    pub k_var_slope: f64,
    pub k_var_intercept: f64,
    pub k_draw: KDraw,
    pub seed: u64,
}

impl Default for FadingConfig {
    fn default() -> Self {
        Self {
            tau_rms_ns: 2.0,
            block_len: 512,
            uncorrelated_threshold: 0.01,
            asd_low_deg: 10.0,
            asd_high_deg: 5.0,
            cluster_angle_rad: 0.0,
            k_mu_slope: 4.142,
            k_mu_intercept: 0.246,
            k_var_slope: 0.455,
            k_var_intercept: 2.863,
            k_draw: KDraw::PerTrial,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub trials: usize,
    #[serde(rename = "power_cdf_freqs_Hz")]
    pub power_cdf_freqs_hz: Vec<f64>,
    #[serde(rename = "corr_row_freqs_Hz")]
    pub corr_row_freqs_hz: Vec<f64>,
    #[serde(rename = "steering_freq_Hz")]
    pub steering_freq_hz: f64,
    pub steering_elements: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            power_cdf_freqs_hz: vec![5e9, 3e10],
            corr_row_freqs_hz: vec![5e9, 3e10],
            steering_freq_hz: 1e8,
            steering_elements: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub circuit: CircuitConfig,
    pub noise: NoiseConfig,
    pub grid: GridConfig,
    pub arrays: ArraysConfig,
    pub link: LinkConfig,
    pub fading: FadingConfig,
    pub run: RunConfig,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be a positive finite number, got {v}")))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite, got {v}")))
    }
}

fn at_least_one(name: &'static str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be at least 1"))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("configuration always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.circuit;
        positive("circuit.r_ohm", c.r_ohm)?;
        positive("circuit.r_in_ohm", c.r_in_ohm)?;
        positive("circuit.lna_gain", c.lna_gain)?;
        positive("circuit.r_rad_ohm", c.r_rad_ohm)?;
        if !(c.weak_radius_fraction > 0.0 && c.weak_radius_fraction <= 0.5) {
            return Err(Error::invalid(
                "circuit.weak_radius_fraction",
                format!("must lie in (0, 0.5], got {}", c.weak_radius_fraction),
            ));
        }
        if let Some(r) = c.tx_radius_m {
            positive("circuit.tx_radius_m", r)?;
        }

        positive("noise.temperature_K", self.noise.temperature_k)?;
        if !(self.noise.noise_figure_db >= 0.0) || !self.noise.noise_figure_db.is_finite() {
            return Err(Error::invalid(
                "noise.noise_figure_dB",
                format!("must be a finite value of at least 0 dB, got {}", self.noise.noise_figure_db),
            ));
        }

        let g = &self.grid;
        positive("grid.f_start_Hz", g.f_start_hz)?;
        positive("grid.f_stop_Hz", g.f_stop_hz)?;
        positive("grid.delta_f_Hz", g.delta_f_hz)?;
        if g.f_stop_hz < g.f_start_hz {
            return Err(Error::invalid(
                "grid.f_stop_Hz",
                format!("must not be below f_start_Hz ({} < {})", g.f_stop_hz, g.f_start_hz),
            ));
        }

        at_least_one("arrays.n_rx", self.arrays.n_rx)?;
        at_least_one("arrays.n_tx", self.arrays.n_tx)?;
        positive("arrays.spacing_m", self.arrays.spacing_m)?;

        let l = &self.link;
        positive("link.p_total_W", l.p_total_w)?;
        positive("link.distance_m", l.distance_m)?;
        finite("link.gamma", l.gamma)?;
        finite("link.theta_t_rad", l.theta_t_rad)?;
        finite("link.theta_r_rad", l.theta_r_rad)?;
        positive("link.g_t", l.g_t)?;
        positive("link.g_r", l.g_r)?;

        let f = &self.fading;
        positive("fading.tau_rms_ns", f.tau_rms_ns)?;
        at_least_one("fading.block_len", f.block_len)?;
        if !(f.uncorrelated_threshold > 0.0 && f.uncorrelated_threshold < 1.0) {
            return Err(Error::invalid(
                "fading.uncorrelated_threshold",
                format!("must lie in (0, 1), got {}", f.uncorrelated_threshold),
            ));
        }
        for (name, v) in [("fading.asd_low_deg", f.asd_low_deg), ("fading.asd_high_deg", f.asd_high_deg)] {
            if !(v >= 0.0 && v <= 180.0) {
                return Err(Error::invalid(name, format!("must lie in [0, 180], got {v}")));
            }
        }
        finite("fading.cluster_angle_rad", f.cluster_angle_rad)?;
        finite("fading.k_mu_slope", f.k_mu_slope)?;
        finite("fading.k_mu_intercept", f.k_mu_intercept)?;
        finite("fading.k_var_slope", f.k_var_slope)?;
        finite("fading.k_var_intercept", f.k_var_intercept)?;
        let lowest_var = f.k_var_slope * (g.f_start_hz * 1e-9).log10().min((g.f_stop_hz * 1e-9).log10())
            + f.k_var_intercept;
        let highest_var = f.k_var_slope * (g.f_start_hz * 1e-9).log10().max((g.f_stop_hz * 1e-9).log10())
            + f.k_var_intercept;
        if lowest_var.min(highest_var) < 0.0 {
            return Err(Error::invalid(
                "fading.k_var_slope",
                "the K-factor variance becomes negative inside the grid",
            ));
        }

        let r = &self.run;
        at_least_one("run.trials", r.trials)?;
        for &fr in r.power_cdf_freqs_hz.iter().chain(&r.corr_row_freqs_hz) {
            positive("run frequency", fr)?;
        }
        positive("run.steering_freq_Hz", r.steering_freq_hz)?;
        at_least_one("run.steering_elements", r.steering_elements)?;
        Ok(())
    }

    pub fn tau_rms_s(&self) -> f64 {
        self.fading.tau_rms_ns * 1e-9
    }
}

/// Human-readable key reference printed by the CLI.
pub const SCHEMA: &str = "\
[circuit]  r_ohm, r_in_ohm, lna_gain, r_rad_ohm, kernel (cms-sinc | colinear-dipole),
           regime (tight | weak | decoupled), weak_radius_fraction, tx_radius_m
[noise]    temperature_K, noise_figure_dB
[grid]     f_start_Hz, f_stop_Hz, delta_f_Hz
[arrays]   n_rx, n_tx, spacing_m
[link]     p_total_W, distance_m, gamma, theta_t_rad, theta_r_rad, g_t, g_r,
           power_normalization (total | per-subchannel)
[fading]   tau_rms_ns, block_len, uncorrelated_threshold, asd_low_deg, asd_high_deg,
           cluster_angle_rad, k_mu_slope, k_mu_intercept, k_var_slope, k_var_intercept,
           k_draw (per-trial | per-run), seed
[run]      trials, power_cdf_freqs_Hz, corr_row_freqs_Hz, steering_freq_Hz, steering_elements
";
