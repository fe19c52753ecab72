//! Local-scattering spatial correlation with a Laplacian angular spread.
//!
//! The multipath angle is `φ̄ = φ + ω` with `ω` Laplacian of scale
//! `b = σ/√2` (so `Var ω = σ²`), truncated to `[−π, π]` and renormalised.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::geometry::FrequencyGrid;
use crate::quadrature::integrate;
use crate::{CMatrix, Error, Result, SPEED_OF_LIGHT};

/// Requested absolute accuracy of each correlation entry.
pub const QUAD_TARGET: f64 = 1e-9;
/// Entries whose error estimate exceeds this are rejected.
pub const QUAD_FAIL: f64 = 1e-8;
const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialCorrModel {
    /// Central angle of the scattering cluster (rad).
    pub central_angle: f64,
    /// Angular standard deviation (rad).
    pub asd: f64,
    /// Element spacing (m).
    pub spacing: f64,
}

impl SpatialCorrModel {
    pub fn new(central_angle: f64, asd: f64, spacing: f64) -> Result<Self> {
        if !(asd >= 0.0) || !asd.is_finite() {
            return Err(Error::invalid("asd", format!("must be non-negative, got {asd}")));
        }
        if !(spacing > 0.0) {
            return Err(Error::invalid("spacing", format!("must be positive, got {spacing}")));
        }
        if !central_angle.is_finite() {
            return Err(Error::invalid("central_angle", "must be finite"));
        }
        Ok(Self {
            central_angle,
            asd,
            spacing,
        })
    }

    /// Laplacian scale `b = σ/√2`.
    pub fn laplace_scale(&self) -> f64 {
        self.asd / std::f64::consts::SQRT_2
    }

    /// Truncated Laplacian density of the deviation `ω`.
    pub fn deviation_pdf(&self, omega: f64) -> f64 {
        if omega.abs() > PI {
            return 0.0;
        }
        let b = self.laplace_scale();
        (-omega.abs() / b).exp() / (2.0 * b * (1.0 - (-PI / b).exp()))
    }

    /// Correlation between elements `i` and `j` at frequency `f`.
    pub fn entry(&self, i: usize, j: usize, f: f64) -> Result<Complex64> {
        let lag = j as f64 - i as f64;
        if i == j {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let phase_per_sine = 2.0 * PI * self.spacing * f / SPEED_OF_LIGHT * lag;
        if self.asd == 0.0 {
            return Ok(Complex64::from_polar(1.0, phase_per_sine * self.central_angle.sin()));
        }
        let integrand = |omega: f64| {
            let ph = phase_per_sine * (self.central_angle + omega).sin();
            Complex64::from_polar(self.deviation_pdf(omega), ph)
        };
        // the density has a kink at ω = 0 and decays on the scale b, so the
        // range is cut at geometrically spaced multiples of b on each side
        let b = self.laplace_scale();
        let mut cuts = vec![0.0];
        let mut t = b;
        while t < PI {
            cuts.push(t);
            t *= 4.0;
        }
        cuts.push(PI);
        let tol = QUAD_TARGET / (2 * (cuts.len() - 1)) as f64;
        let mut value = Complex64::new(0.0, 0.0);
        let mut error_estimate = 0.0;
        for w in cuts.windows(2) {
            for (lo, hi) in [(w[0], w[1]), (-w[1], -w[0])] {
                let r = integrate(integrand, lo, hi, tol, MAX_PANELS);
                value += r.value;
                error_estimate += r.error_estimate;
            }
        }
        if error_estimate > QUAD_FAIL || value.norm() > 1.0 + 1e-9 {
            return Err(Error::Quadrature {
                i,
                j,
                freq_hz: f,
                error_estimate,
            });
        }
        Ok(value)
    }

    /// `n×n` Hermitian Toeplitz correlation matrix; one quadrature per lag.
    pub fn matrix(&self, n: usize, f: f64) -> Result<CMatrix> {
        let row: Vec<Complex64> = (0..n).map(|lag| self.entry(0, lag, f)).collect::<Result<_>>()?;
        Ok(CMatrix::from_fn(n, n, |i, j| {
            if j >= i {
                row[j - i]
            } else {
                row[i - j].conj()
            }
        }))
    }
}

/// `[R_s]_ij` for the given model; see [`SpatialCorrModel::entry`].
pub fn spatial_correlation_entry(i: usize, j: usize, f: f64, model: &SpatialCorrModel) -> Result<Complex64> {
    model.entry(i, j, f)
}

/// Angular spread falling linearly from `low_deg` at the first grid center
/// to `high_deg` at the last one. Returns radians.
pub fn asd_schedule(f: f64, grid: &FrequencyGrid, low_deg: f64, high_deg: f64) -> Result<f64> {
    if !grid.contains(f) {
        return Err(Error::invalid(
            "f",
            format!("{f} Hz is outside the grid span [{}, {}]", grid.f_start(), grid.f_stop()),
        ));
    }
    if grid.len() == 1 {
        return Ok(low_deg.to_radians());
    }
    let t = ((f - grid.f_start()) / (grid.f_stop() - grid.f_start())).clamp(0.0, 1.0);
    Ok((low_deg + (high_deg - low_deg) * t).to_radians())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{hermitian_asymmetry, HermitianFactor};

    fn model_5ghz() -> SpatialCorrModel {
        SpatialCorrModel::new(0.0, 9.59_f64.to_radians(), 0.005).unwrap()
    }

    #[test]
    fn diagonal_is_exactly_one() {
        assert_eq!(model_5ghz().entry(3, 3, 5e9).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn zero_spread_broadside_is_fully_correlated() {
        let m = SpatialCorrModel::new(0.0, 0.0, 0.005).unwrap();
        for j in 0..6 {
            assert_eq!(m.entry(0, j, 7e9).unwrap(), Complex64::new(1.0, 0.0));
        }
        let tiny = SpatialCorrModel::new(0.0, 1e-4, 0.005).unwrap();
        let v = tiny.entry(0, 3, 7e9).unwrap();
        assert!((v - 1.0).norm() < 1e-6, "{v}");
    }

    #[test]
    fn pdf_integrates_to_one() {
        let m = model_5ghz();
        let r = integrate(|w| Complex64::new(m.deviation_pdf(w), 0.0), 0.0, PI, 1e-13, 500);
        assert!((2.0 * r.value.re - 1.0).abs() < 1e-11);
    }

    #[test]
    fn matrix_properties() {
        let m = SpatialCorrModel::new(0.2, 7.0_f64.to_radians(), 0.005).unwrap();
        let r = m.matrix(8, 1.2e10).unwrap();
        assert!(hermitian_asymmetry(&r) == 0.0);
        for i in 0..8 {
            assert_eq!(r[(i, i)], Complex64::new(1.0, 0.0));
            for j in 0..8 {
                assert!(r[(i, j)].norm() <= 1.0 + 1e-9);
                if i > 0 && j > 0 {
                    assert_eq!(r[(i, j)], r[(i - 1, j - 1)]);
                }
            }
        }
        let f = HermitianFactor::new(&r).unwrap();
        assert!(f.min_eigenvalue() >= -1e-10 * f.spectral_norm());
    }

    #[test]
    fn wider_spread_decorrelates() {
        let mut last = f64::INFINITY;
        for deg in [1.0, 3.0, 5.0, 8.0, 12.0, 20.0] {
            let m = SpatialCorrModel::new(0.0, f64::to_radians(deg), 0.005).unwrap();
            let v = m.entry(0, 1, 2e10).unwrap().norm();
            assert!(v < last, "{deg}: {v} !< {last}");
            last = v;
        }
    }

    #[test]
    fn asd_schedule_endpoints() {
        let g = FrequencyGrid::new(1e8, 3e10, 1e7).unwrap();
        assert!((asd_schedule(1e8, &g, 10.0, 5.0).unwrap() - 10f64.to_radians()).abs() < 1e-15);
        assert!((asd_schedule(3e10, &g, 10.0, 5.0).unwrap() - 5f64.to_radians()).abs() < 1e-15);
        let mid = 0.5 * (1e8 + 3e10);
        assert!((asd_schedule(mid, &g, 10.0, 5.0).unwrap() - 7.5f64.to_radians()).abs() < 1e-15);
        assert!(asd_schedule(5e10, &g, 10.0, 5.0).is_err());
    }
}
