//! Receiver noise covariance and whitening.
//!
//! The received noise is the LNA's own noise plus the antennas' thermal
//! noise carried through the receiver coupling matrix. Only covariances are
//! tracked; sample paths are drawn on demand.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::{hermitian_inv_sqrt, hermitian_part, hermitian_sqrt};
use crate::{CMatrix, CVector, Error, Result, BOLTZMANN};

/// Scalar noise parameters shared by every frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub boltzmann: f64,
    pub temperature_k: f64,
    pub delta_f: f64,
    pub r_in: f64,
    pub noise_factor_linear: f64,
    pub lna_gain: f64,
}

impl NoiseParams {
    pub fn new(temperature_k: f64, delta_f: f64, r_in: f64, noise_figure_db: f64, lna_gain: f64) -> Result<Self> {
        let p = Self {
            boltzmann: BOLTZMANN,
            temperature_k,
            delta_f,
            r_in,
            noise_factor_linear: db_to_linear(noise_figure_db),
            lna_gain,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_thermal(self.temperature_k, self.delta_f)?;
        if !(self.r_in > 0.0) {
            return Err(Error::invalid("r_in", format!("must be positive, got {}", self.r_in)));
        }
        if !(self.noise_factor_linear >= 1.0) {
            return Err(Error::invalid(
                "noise_factor",
                format!("must be at least 1 (0 dB), got {}", self.noise_factor_linear),
            ));
        }
        Ok(())
    }

    /// `4·k_b·T·Δf`.
    pub fn thermal_scale(&self) -> f64 {
        4.0 * self.boltzmann * self.temperature_k * self.delta_f
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn check_thermal(temperature_k: f64, delta_f: f64) -> Result<()> {
    if !(temperature_k > 0.0) {
        return Err(Error::invalid("temperature", format!("must be positive, got {temperature_k}")));
    }
    if !(delta_f > 0.0) {
        return Err(Error::invalid("delta_f", format!("must be positive, got {delta_f}")));
    }
    Ok(())
}

/// Thermal noise of the receive antennas, `4·k_b·T·Δf·Re{Z_R}`.
pub fn antenna_noise_cov(z_r: &CMatrix, boltzmann: f64, temperature_k: f64, delta_f: f64) -> Result<CMatrix> {
    check_thermal(temperature_k, delta_f)?;
    let s = 4.0 * boltzmann * temperature_k * delta_f;
    Ok(z_r.map(|z| Complex64::new(z.re * s, 0.0)))
}

/// LNA noise variance per branch, `4·k_b·T·Δf·R_in·(N_f − 1)`; the
/// covariance is this value times the identity.
pub fn lna_noise_cov(r_in: f64, noise_factor_linear: f64, boltzmann: f64, temperature_k: f64, delta_f: f64) -> Result<f64> {
    check_thermal(temperature_k, delta_f)?;
    if !(noise_factor_linear >= 1.0) {
        return Err(Error::invalid(
            "noise_factor",
            format!("must be at least 1, got {noise_factor_linear}"),
        ));
    }
    Ok(4.0 * boltzmann * temperature_k * delta_f * r_in * (noise_factor_linear - 1.0))
}

/// `R_n = 4k_bTΔf·R_in·[(N_f − 1)·I + β²·R_in·P·Re{Z_R}·Pᴴ]`.
pub fn total_noise_cov(p: &CMatrix, z_r: &CMatrix, params: &NoiseParams) -> Result<CMatrix> {
    let n = z_r.nrows();
    if p.shape() != (n, n) || z_r.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "total noise covariance",
            expected: z_r.shape(),
            found: p.shape(),
        });
    }
    params.validate()?;
    let re_z = z_r.map(|z| Complex64::new(z.re, 0.0));
    let coupled = hermitian_part(&(p * re_z * p.adjoint()));
    let g2 = params.lna_gain * params.lna_gain * params.r_in;
    let mut inner = coupled.scale(g2);
    for i in 0..n {
        inner[(i, i)] += params.noise_factor_linear - 1.0;
    }
    Ok(inner.scale(params.thermal_scale() * params.r_in))
}

/// `R_n^{−1/2}` (Hermitian inverse square root).
pub fn build_whitener(r_n: &CMatrix) -> Result<CMatrix> {
    hermitian_inv_sqrt(r_n)
}

/// Noise covariance at one frequency together with its whitener.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub params: NoiseParams,
    pub r_n: CMatrix,
    pub whitener: CMatrix,
}

impl NoiseModel {
    pub fn build(p: &CMatrix, z_r: &CMatrix, params: &NoiseParams) -> Result<Self> {
        let r_n = total_noise_cov(p, z_r, params)?;
        let whitener = build_whitener(&r_n)?;
        Ok(Self {
            params: *params,
            r_n,
            whitener,
        })
    }

    /// `‖W·R_n·Wᴴ − I‖_F`.
    pub fn whitening_residual(&self) -> f64 {
        let n = self.r_n.nrows();
        (&self.whitener * &self.r_n * self.whitener.adjoint() - CMatrix::identity(n, n)).norm()
    }

    /// One raw (coloured) noise voltage vector with covariance `R_n`.
    pub fn sample_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CVector> {
        let root = hermitian_sqrt(&self.r_n)?;
        Ok(root * standard_complex_normal_vector(rng, self.r_n.nrows()))
    }
}

/// One `CN(0, 1)` draw.
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn standard_complex_normal_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| standard_complex_normal(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{array_impedance_matrix, coupling_matrix_rx, ChuCmsModel, MutualKernel};
    use crate::geometry::UlaConfig;
    use crate::numerics::HermitianFactor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(nf_db: f64) -> NoiseParams {
        NoiseParams::new(290.0, 1e7, 1.0, nf_db, 10.0).unwrap()
    }

    fn tight_rx(n: usize, f: f64) -> (CMatrix, CMatrix) {
        let arr = UlaConfig::new(n, 0.005, 0.0025).unwrap();
        let model = ChuCmsModel::new(0.0025, 1.0, 1.0, MutualKernel::CmsSinc);
        let z = array_impedance_matrix(&arr, f, &model).unwrap();
        let p = coupling_matrix_rx(&z, 1.0, Some(f)).unwrap();
        (z, p)
    }

    #[test]
    fn antenna_noise_examples() {
        let z = CMatrix::from_element(2, 2, Complex64::new(0.0, 3.0));
        assert_eq!(antenna_noise_cov(&z, BOLTZMANN, 290.0, 1e7).unwrap().norm(), 0.0);
        let id = CMatrix::identity(3, 3);
        let r = antenna_noise_cov(&id, BOLTZMANN, 290.0, 1e7).unwrap();
        let expected = 4.0 * 1.380649e-23 * 290.0 * 1e7;
        assert!((r[(1, 1)].re - expected).abs() < 1e-27);
        assert!((expected - 1.60155e-13).abs() < 1e-17);
        let r2 = antenna_noise_cov(&id, BOLTZMANN, 290.0, 2e7).unwrap();
        assert!((r2 - r.scale(2.0)).norm() < 1e-28);
        assert!(antenna_noise_cov(&id, BOLTZMANN, 0.0, 1e7).is_err());
    }

    #[test]
    fn lna_noise_examples() {
        assert_eq!(lna_noise_cov(1.0, 1.0, BOLTZMANN, 290.0, 1e7).unwrap(), 0.0);
        let nf = db_to_linear(5.0);
        assert!((nf - 3.1623).abs() < 1e-4);
        let s = lna_noise_cov(1.0, nf, BOLTZMANN, 290.0, 1e7).unwrap();
        // independent evaluation: 4·1.380649e-23·290·1e7·(10^0.5 − 1)
        assert!((s - 3.463_001_927_511_2e-13).abs() < 1e-25, "{s:e}");
        let s2 = lna_noise_cov(2.0, nf, BOLTZMANN, 290.0, 1e7).unwrap();
        assert!((s2 - 2.0 * s).abs() < 1e-27);
        assert!(lna_noise_cov(1.0, 0.9, BOLTZMANN, 290.0, 1e7).is_err());
    }

    #[test]
    fn lossless_antennas_leave_lna_term() {
        let z = CMatrix::from_element(3, 3, Complex64::new(0.0, -5.0));
        let p = coupling_matrix_rx(&z, 1.0, None).unwrap();
        let pr = params(5.0);
        let r_n = total_noise_cov(&p, &z, &pr).unwrap();
        let lna = lna_noise_cov(1.0, pr.noise_factor_linear, BOLTZMANN, 290.0, 1e7).unwrap();
        assert!((r_n - CMatrix::identity(3, 3).scale(lna)).norm() < 1e-28);
    }

    #[test]
    fn decoupled_unit_resistance_hand_form() {
        let z = CMatrix::identity(2, 2);
        let p = coupling_matrix_rx(&z, 1.0, None).unwrap();
        let pr = params(5.0);
        let r_n = total_noise_cov(&p, &z, &pr).unwrap();
        let expected = pr.thermal_scale() * ((pr.noise_factor_linear - 1.0) + 100.0 / 4.0);
        assert!((r_n - CMatrix::identity(2, 2).scale(expected)).norm() < 1e-26);
    }

    #[test]
    fn covariance_is_exactly_hermitian() {
        let (z, p) = tight_rx(6, 2.3e9);
        let r_n = total_noise_cov(&p, &z, &params(5.0)).unwrap();
        assert_eq!(r_n, r_n.adjoint());
    }

    #[test]
    fn whitener_identity_tight_array() {
        let (z, p) = tight_rx(4, 1e9);
        let m = NoiseModel::build(&p, &z, &params(5.0)).unwrap();
        assert!(m.whitening_residual() < 1e-10);
    }

    #[test]
    fn noise_figure_monotonicity() {
        let (z, p) = tight_rx(4, 3e9);
        let lo = total_noise_cov(&p, &z, &params(3.0)).unwrap();
        let hi = total_noise_cov(&p, &z, &params(6.0)).unwrap();
        for i in 0..4 {
            assert!(hi[(i, i)].re > lo[(i, i)].re);
        }
    }

    #[test]
    fn total_dominates_lna_term() {
        let (z, p) = tight_rx(8, 2e10);
        let pr = params(5.0);
        let r_n = total_noise_cov(&p, &z, &pr).unwrap();
        let lna = lna_noise_cov(1.0, pr.noise_factor_linear, BOLTZMANN, 290.0, 1e7).unwrap();
        let diff = r_n - CMatrix::identity(8, 8).scale(lna);
        let f = HermitianFactor::new(&diff).unwrap();
        assert!(f.min_eigenvalue() >= -1e-10 * f.spectral_norm());
    }

    #[test]
    fn whitened_samples_have_identity_covariance() {
        let (z, p) = tight_rx(3, 5e9);
        let m = NoiseModel::build(&p, &z, &params(5.0)).unwrap();
        let root = hermitian_sqrt(&m.r_n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 100_000;
        let mut acc = CMatrix::zeros(3, 3);
        for _ in 0..draws {
            let raw = &root * standard_complex_normal_vector(&mut rng, 3);
            let white = &m.whitener * raw;
            acc += &white * white.adjoint();
        }
        let emp = acc.unscale(draws as f64);
        let tol = 5.0 / (draws as f64).sqrt();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((emp[(i, j)] - target).norm() < tol, "({i},{j}) {}", emp[(i, j)]);
            }
        }
    }
}
