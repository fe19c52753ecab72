//! Log-normal, frequency-dependent Rician K-factor.
//!
//! `K_dB(f) = μ(f) + z·σ(f)` with `μ(f) = a·log₁₀(f_GHz) + b` and
//! `σ²(f) = c·log₁₀(f_GHz) + d`. The standardized draw `z` belongs to one
//! environment and is held fixed across frequency.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KFactorModel {
    pub mu_slope: f64,
    pub mu_intercept: f64,
    pub var_slope: f64,
    pub var_intercept: f64,
}

impl Default for KFactorModel {
    fn default() -> Self {
        Self {
            mu_slope: 4.142,
            mu_intercept: 0.246,
            var_slope: 0.455,
            var_intercept: 2.863,
        }
    }
}

fn check_freq(f_ghz: f64) -> Result<f64> {
    if !(f_ghz > 0.0) || !f_ghz.is_finite() {
        return Err(Error::invalid("f_ghz", format!("must be positive, got {f_ghz}")));
    }
    Ok(f_ghz.log10())
}

impl KFactorModel {
    /// Mean of `K_dB` at `f_ghz`.
    pub fn mean_db(&self, f_ghz: f64) -> Result<f64> {
        Ok(self.mu_slope * check_freq(f_ghz)? + self.mu_intercept)
    }

    /// Variance of `K_dB` at `f_ghz` (dB²).
    pub fn var_db(&self, f_ghz: f64) -> Result<f64> {
        let v = self.var_slope * check_freq(f_ghz)? + self.var_intercept;
        if v < 0.0 {
            return Err(Error::invalid(
                "f_ghz",
                format!("K-factor variance is negative ({v} dB²) at {f_ghz} GHz"),
            ));
        }
        Ok(v)
    }

    /// `K_dB` of the environment with standardized draw `z`.
    pub fn k_db(&self, z: f64, f_ghz: f64) -> Result<f64> {
        Ok(self.mean_db(f_ghz)? + z * self.var_db(f_ghz)?.sqrt())
    }

    /// Linear K; always positive.
    pub fn k_linear(&self, z: f64, f_ghz: f64) -> Result<f64> {
        Ok(10f64.powf(self.k_db(z, f_ghz)? / 10.0))
    }

    /// Draws the standardized environment variable `z ~ N(0, 1)`.
    pub fn draw_z<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        rng.sample(StandardNormal)
    }
}

pub fn k_mean_db(f_ghz: f64) -> Result<f64> {
    KFactorModel::default().mean_db(f_ghz)
}

pub fn k_var_db(f_ghz: f64) -> Result<f64> {
    KFactorModel::default().var_db(f_ghz)
}

/// Linear K under the default coefficients.
pub fn draw_k(model: &KFactorModel, z: f64, f_hz: f64) -> Result<f64> {
    model.k_linear(z, f_hz * 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_ghz_gives_intercepts() {
        assert_eq!(k_mean_db(1.0).unwrap(), 0.246);
        assert_eq!(k_var_db(1.0).unwrap(), 2.863);
    }

    #[test]
    fn ten_ghz_mean() {
        assert!((k_mean_db(10.0).unwrap() - 4.388).abs() < 1e-12);
    }

    #[test]
    fn median_environment() {
        let m = KFactorModel::default();
        for f in [0.1, 1.0, 7.3, 30.0] {
            assert_eq!(m.k_db(0.0, f).unwrap(), m.mean_db(f).unwrap());
        }
    }

    #[test]
    fn rejects_non_positive_frequency() {
        assert!(k_mean_db(0.0).is_err());
        assert!(k_var_db(-1.0).is_err());
        assert!(draw_k(&KFactorModel::default(), 0.0, f64::NAN).is_err());
    }

    #[test]
    fn draw_k_uses_hz() {
        let m = KFactorModel::default();
        let k = draw_k(&m, 0.0, 1e10).unwrap();
        assert!((k - 10f64.powf(0.4388)).abs() < 1e-12);
    }
}
