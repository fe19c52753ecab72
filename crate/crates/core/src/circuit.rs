//! Array impedances and coupling matrices.
//!
//! Each element is modelled as a Chu antenna: the lowest-order spherical
//! mode of an enclosing sphere of radius `a`, realised as a series
//! capacitor `C = a/(c·R)` feeding a parallel `L = a·R/c` / `R` branch.
//! Mutual impedances come from a pluggable [`ImpedanceModel`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::UlaConfig;
use crate::numerics::{checked_inverse, HermitianFactor};
use crate::{CMatrix, Error, Result, SPEED_OF_LIGHT};

/// Chu lowest-mode circuit impedance at `f` for an element of radius `radius`.
///
/// `Re{Z} = R·(ka)²/(1 + (ka)²)` with `k = 2πf/c`.
pub fn chu_self_impedance(f: f64, radius: f64, r_rad: f64) -> Result<Complex64> {
    if !(f > 0.0) {
        return Err(Error::invalid("f", format!("must be positive, got {f}")));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
    }
    if !(r_rad > 0.0) {
        return Err(Error::invalid("r_rad", format!("must be positive, got {r_rad}")));
    }
    let omega = 2.0 * PI * f;
    let cap = radius / (SPEED_OF_LIGHT * r_rad);
    let ind = radius * r_rad / SPEED_OF_LIGHT;
    let series_c = Complex64::new(0.0, -1.0 / (omega * cap));
    let jwl = Complex64::new(0.0, omega * ind);
    Ok(series_c + jwl * r_rad / (jwl + r_rad))
}

/// Default mutual-impedance kernel `self_re·[sinc(kd) + j·cos(kd)/(kd)]`.
pub fn cms_mutual_impedance(f: f64, distance: f64, self_re: f64) -> Result<Complex64> {
    let kd = check_kd(f, distance)?;
    Ok(Complex64::new(kd.sin() / kd, kd.cos() / kd) * self_re)
}

/// Mutual impedance of two colinear CMS elements radiating the dipole mode,
/// `3·self_re·e^{−jkd}·[j/(kd)³ − 1/(kd)²]`. Offered as an alternative kernel.
pub fn colinear_dipole_mutual_impedance(f: f64, distance: f64, self_re: f64) -> Result<Complex64> {
    let x = check_kd(f, distance)?;
    let (s, c) = x.sin_cos();
    let re = if x < 1e-2 {
        let x2 = x * x;
        1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0
    } else {
        s / x.powi(3) - c / (x * x)
    };
    let im = c / x.powi(3) + s / (x * x);
    Ok(Complex64::new(re, im) * (3.0 * self_re))
}

fn check_kd(f: f64, distance: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::invalid(
            "distance",
            "mutual impedance needs a positive separation; use the self impedance for d = 0",
        ));
    }
    if !(f > 0.0) {
        return Err(Error::invalid("f", format!("must be positive, got {f}")));
    }
    Ok(2.0 * PI * f * distance / SPEED_OF_LIGHT)
}

/// Frequency-dependent self and mutual impedances of identical array elements.
pub trait ImpedanceModel: Send + Sync {
    fn self_impedance(&self, f: f64) -> Result<Complex64>;
    fn mutual_impedance(&self, f: f64, distance: f64) -> Result<Complex64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutualKernel {
    /// `sinc(kd)` resistance, `cos(kd)/(kd)` reactance.
    #[default]
    CmsSinc,
    /// Colinear dipole-mode near/far-field coupling.
    ColinearDipole,
}

/// Chu self impedance plus a CMS mutual kernel scaled by the self resistance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChuCmsModel {
    pub radius: f64,
    pub r_rad: f64,
    /// Multiplies every mutual term; 0 gives the decoupled baseline.
    pub mutual_scale: f64,
    pub kernel: MutualKernel,
}

impl ChuCmsModel {
    pub fn new(radius: f64, r_rad: f64, mutual_scale: f64, kernel: MutualKernel) -> Self {
        Self {
            radius,
            r_rad,
            mutual_scale,
            kernel,
        }
    }
}

impl ImpedanceModel for ChuCmsModel {
    fn self_impedance(&self, f: f64) -> Result<Complex64> {
        chu_self_impedance(f, self.radius, self.r_rad)
    }

    fn mutual_impedance(&self, f: f64, distance: f64) -> Result<Complex64> {
        if self.mutual_scale == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let self_re = self.self_impedance(f)?.re;
        let z = match self.kernel {
            MutualKernel::CmsSinc => cms_mutual_impedance(f, distance, self_re)?,
            MutualKernel::ColinearDipole => colinear_dipole_mutual_impedance(f, distance, self_re)?,
        };
        Ok(z * self.mutual_scale)
    }
}

/// Coupling strength between neighbouring elements, set through element size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingRegime {
    /// Touching Chu spheres, `a = δ/2`.
    Tight,
    /// Small isolated elements, `a = δ/20`, mutual terms scaled by `(2a/δ)³`.
    Weak,
    /// Tight-sized elements with every mutual impedance forced to zero.
    Decoupled,
}

impl CouplingRegime {
    pub const ALL: [CouplingRegime; 3] = [Self::Tight, Self::Weak, Self::Decoupled];

    pub fn radius(self, spacing: f64, weak_fraction: f64) -> f64 {
        match self {
            Self::Tight | Self::Decoupled => 0.5 * spacing,
            Self::Weak => weak_fraction * spacing,
        }
    }

    pub fn mutual_scale(self, radius: f64, spacing: f64) -> f64 {
        match self {
            Self::Tight => 1.0,
            Self::Weak => (radius / (0.5 * spacing)).powi(3),
            Self::Decoupled => 0.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Tight => "tight",
            Self::Weak => "weak",
            Self::Decoupled => "decoupled",
        }
    }
}

impl std::str::FromStr for CouplingRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tight" => Ok(Self::Tight),
            "weak" => Ok(Self::Weak),
            "decoupled" => Ok(Self::Decoupled),
            other => Err(Error::Config(format!(
                "unknown coupling regime `{other}` (expected tight, weak or decoupled)"
            ))),
        }
    }
}

impl std::fmt::Display for CouplingRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Impedance matrix of a ULA: self impedance on the diagonal, mutual
/// impedance of `|i−j|·δ` off it. Only the first row is evaluated, so the
/// result is Toeplitz and exactly symmetric.
pub fn array_impedance_matrix(
    array: &UlaConfig,
    f: f64,
    model: &dyn ImpedanceModel,
) -> Result<CMatrix> {
    let n = array.n_elements();
    let mut row = Vec::with_capacity(n);
    row.push(model.self_impedance(f)?);
    for lag in 1..n {
        row.push(model.mutual_impedance(f, array.distance(0, lag))?);
    }
    Ok(CMatrix::from_fn(n, n, |i, j| row[i.abs_diff(j)]))
}

/// `P = (Z_R + R_in·I)⁻¹`.
pub fn coupling_matrix_rx(z_r: &CMatrix, r_in: f64, freq_hz: Option<f64>) -> Result<CMatrix> {
    loaded_inverse(z_r, r_in, "receiver coupling matrix P", freq_hz)
}

/// `Q = (Z_T + R·I)⁻¹`.
pub fn coupling_matrix_tx(z_t: &CMatrix, r: f64, freq_hz: Option<f64>) -> Result<CMatrix> {
    loaded_inverse(z_t, r, "transmitter coupling matrix Q", freq_hz)
}

fn loaded_inverse(z: &CMatrix, load: f64, what: &str, freq_hz: Option<f64>) -> Result<CMatrix> {
    let n = z.nrows();
    let mut m = z.clone();
    for i in 0..n.min(z.ncols()) {
        m[(i, i)] += load;
    }
    checked_inverse(&m, what, freq_hz)
}

/// `φ = π − atan(2πf·a_T/c) − atan(2πf·a_R/c)`.
pub fn chu_phase(f: f64, radius_t: f64, radius_r: f64) -> f64 {
    let k = 2.0 * PI * f / SPEED_OF_LIGHT;
    PI - (k * radius_t).atan() - (k * radius_r).atan()
}

/// `α = β_LNA·R_in·√(Re{Z₁}·Re{Z₂})·e^{jφ}`.
pub fn alpha_scale(r_in: f64, lna_gain: f64, z1_re: f64, z2_re: f64, phi: f64) -> Result<Complex64> {
    if z1_re < 0.0 || z2_re < 0.0 {
        return Err(Error::invalid(
            "self resistance",
            format!("must be non-negative, got Re{{Z1}} = {z1_re}, Re{{Z2}} = {z2_re}"),
        ));
    }
    Ok(Complex64::from_polar(lna_gain * r_in * (z1_re * z2_re).sqrt(), phi))
}

/// Smallest eigenvalue of `Re{Z}` divided by its spectral norm. Passivity
/// holds when this is at least `−1e-10`.
pub fn passivity_margin(z: &CMatrix) -> Result<f64> {
    let re = z.map(|v| Complex64::new(v.re, 0.0));
    let f = HermitianFactor::new(&re)?;
    let norm = f.spectral_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(f.min_eigenvalue() / norm)
}

pub const PASSIVITY_TOL: f64 = 1e-10;

/// Source, load and LNA parameters of the end-to-end circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Source generator resistance `R` (Ω).
    pub r_source: f64,
    /// LNA input resistance `R_in` (Ω).
    pub r_in: f64,
    /// LNA voltage gain.
    pub lna_gain: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self {
            r_source: 1.0,
            r_in: 1.0,
            lna_gain: 10.0,
        }
    }
}

/// Per-frequency circuit quantities of one transmitter/receiver array pair.
#[derive(Debug, Clone)]
pub struct ImpedanceSet {
    pub freq_hz: f64,
    pub z_t: CMatrix,
    pub z_r: CMatrix,
    pub p: CMatrix,
    pub q: CMatrix,
    pub phi: f64,
    /// Common transmit self resistance `Re{Z₁}`.
    pub z1_re: f64,
    /// Common receive self resistance `Re{Z₂}`.
    pub z2_re: f64,
    pub alpha: Complex64,
}

impl ImpedanceSet {
    pub fn build(
        freq_hz: f64,
        params: &CircuitParams,
        tx: (&UlaConfig, &dyn ImpedanceModel),
        rx: (&UlaConfig, &dyn ImpedanceModel),
    ) -> Result<Self> {
        let z_t = array_impedance_matrix(tx.0, freq_hz, tx.1)?;
        let z_r = array_impedance_matrix(rx.0, freq_hz, rx.1)?;
        let p = coupling_matrix_rx(&z_r, params.r_in, Some(freq_hz))?;
        let q = coupling_matrix_tx(&z_t, params.r_source, Some(freq_hz))?;
        let phi = chu_phase(freq_hz, tx.0.element_radius(), rx.0.element_radius());
        let z1_re = z_t[(0, 0)].re;
        let z2_re = z_r[(0, 0)].re;
        let alpha = alpha_scale(params.r_in, params.lna_gain, z1_re, z2_re, phi)?;
        Ok(Self {
            freq_hz,
            z_t,
            z_r,
            p,
            q,
            phi,
            z1_re,
            z2_re,
            alpha,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn is_diagonal(m: &CMatrix) -> bool {
        m.iter().enumerate().all(|(k, z)| k % (m.nrows() + 1) == 0 || *z == Complex64::new(0.0, 0.0))
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn chu_resistance_at_ka_one_is_half() {
        let a = 0.0025;
        let f = SPEED_OF_LIGHT / (2.0 * PI * a);
        let z = chu_self_impedance(f, a, 1.0).unwrap();
        assert!((z.re - 0.5).abs() < 1e-12);
        // at ka = 1 the capacitor (−j) and RL branch (+j/2) leave −j/2
        assert!((z.im + 0.5).abs() < 1e-12);
    }

    #[test]
    fn chu_limits() {
        let hi = chu_self_impedance(1e14, 0.0025, 1.0).unwrap();
        assert!((hi.re - 1.0).abs() < 1e-6);
        let lo = chu_self_impedance(1e3, 0.0025, 1.0).unwrap();
        assert!(lo.re < 1e-12);
        assert!(lo.im < -1e6);
        assert!(chu_self_impedance(0.0, 0.0025, 1.0).is_err());
        assert!(chu_self_impedance(1e9, -1.0, 1.0).is_err());
    }

    #[test]
    fn chu_resistance_closed_form() {
        for &f in &[1e8, 1e9, 7.3e9, 3e10] {
            let a = 0.0025;
            let ka = 2.0 * PI * f * a / SPEED_OF_LIGHT;
            let z = chu_self_impedance(f, a, 1.0).unwrap();
            assert!((z.re - ka * ka / (1.0 + ka * ka)).abs() < 1e-14);
        }
    }

    #[test]
    fn sinc_kernel_examples() {
        let d = 0.005;
        let f_pi = SPEED_OF_LIGHT / (2.0 * d); // kd = π
        assert!(cms_mutual_impedance(f_pi, d, 1.0).unwrap().re.abs() < 1e-15);
        let f_half = SPEED_OF_LIGHT / (4.0 * d); // kd = π/2
        let z = cms_mutual_impedance(f_half, d, 1.0).unwrap();
        assert!((z.re - 2.0 / PI).abs() < 1e-15);
        assert!(z.im.abs() < 1e-15);
        let tiny = cms_mutual_impedance(1.0, d, 0.7).unwrap();
        assert!((tiny.re - 0.7).abs() < 1e-12);
        assert!(cms_mutual_impedance(1e9, 0.0, 1.0).is_err());
    }

    #[test]
    fn dipole_kernel_tends_to_self_resistance() {
        let z = colinear_dipole_mutual_impedance(1e5, 0.005, 0.3).unwrap();
        assert!((z.re - 0.3).abs() < 1e-6);
    }

    fn tight_model() -> ChuCmsModel {
        ChuCmsModel::new(0.0025, 1.0, 1.0, MutualKernel::CmsSinc)
    }

    #[test]
    fn impedance_matrix_structure() {
        let one = UlaConfig::new(1, 0.005, 0.0025).unwrap();
        let m = array_impedance_matrix(&one, 1e9, &tight_model()).unwrap();
        assert_eq!(m[(0, 0)], chu_self_impedance(1e9, 0.0025, 1.0).unwrap());

        let arr = UlaConfig::new(5, 0.005, 0.0025).unwrap();
        let z = array_impedance_matrix(&arr, 3e9, &tight_model()).unwrap();
        assert_eq!(z, z.transpose());
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(z[(i, j)], z[(0, i.abs_diff(j))]);
            }
        }
        let dec = ChuCmsModel::new(0.0025, 1.0, 0.0, MutualKernel::CmsSinc);
        let zd = array_impedance_matrix(&arr, 3e9, &dec).unwrap();
        assert!(is_diagonal(&zd));
    }

    #[test]
    fn coupling_matrix_examples() {
        let p = coupling_matrix_rx(&CMatrix::zeros(3, 3), 1.0, None).unwrap();
        assert!((p - CMatrix::identity(3, 3)).norm() < 1e-15);
        let z = c(0.3, -2.0);
        let zr = CMatrix::identity(2, 2) * z;
        let p = coupling_matrix_rx(&zr, 1.0, None).unwrap();
        let expected = CMatrix::identity(2, 2) * (c(1.0, 0.0) / (z + 1.0));
        assert!((p - expected).norm() < 1e-15);
    }

    #[test]
    fn tight_pair_against_adjugate() {
        let arr = UlaConfig::new(2, 0.005, 0.0025).unwrap();
        let z = array_impedance_matrix(&arr, 1e8, &tight_model()).unwrap();
        let p = coupling_matrix_rx(&z, 1.0, Some(1e8)).unwrap();
        let (a, b) = (z[(0, 0)] + 1.0, z[(0, 1)]);
        let det = a * a - b * b;
        let adj = CMatrix::from_row_slice(2, 2, &[a / det, -b / det, -b / det, a / det]);
        assert!((&p - &adj).norm() <= 1e-12 * adj.norm());
    }

    #[test]
    fn chu_phase_examples() {
        assert_eq!(chu_phase(0.0, 0.1, 0.2), PI);
        let a = 0.01;
        let f = SPEED_OF_LIGHT / (2.0 * PI * a);
        assert!((chu_phase(f, a, a) - PI / 2.0).abs() < 1e-14);
        let k = 2.0 * PI * 1e10 * 0.0025 / SPEED_OF_LIGHT;
        let phi = chu_phase(1e10, 0.0025, 0.0025);
        assert!((phi - (PI - 2.0 * k.atan())).abs() < 1e-15);
        assert!((phi - 2.176_327_951_456_084).abs() < 1e-12);
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_scale(1.0, 10.0, 0.0, 0.0, 0.3).unwrap().norm(), 0.0);
        let a = alpha_scale(1.0, 10.0, 1.0, 1.0, 0.0).unwrap();
        assert!((a - c(10.0, 0.0)).norm() < 1e-15);
        let a = alpha_scale(1.0, 10.0, 1.0, 1.0, PI / 2.0).unwrap();
        assert!((a - c(0.0, 10.0)).norm() < 1e-14);
        assert!(alpha_scale(1.0, 10.0, -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn passivity_across_band_for_shipped_regimes() {
        let spacing = 0.005;
        for regime in [CouplingRegime::Tight, CouplingRegime::Weak] {
            let radius = regime.radius(spacing, 0.05);
            let model = ChuCmsModel::new(radius, 1.0, regime.mutual_scale(radius, spacing), MutualKernel::CmsSinc);
            let arr = UlaConfig::new(16, spacing, radius).unwrap();
            for l in 0..60 {
                let f = 1e8 + l as f64 * 5e8;
                let z = array_impedance_matrix(&arr, f, &model).unwrap();
                let m = passivity_margin(&z).unwrap();
                assert!(m >= -PASSIVITY_TOL, "{regime} at {f}: {m}");
            }
        }
    }

    #[test]
    fn decoupled_coupling_matrices_are_scaled_identity() {
        let arr = UlaConfig::new(4, 0.005, 0.0025).unwrap();
        let model = ChuCmsModel::new(0.0025, 1.0, 0.0, MutualKernel::CmsSinc);
        let set = ImpedanceSet::build(1e9, &CircuitParams::default(), (&arr, &model), (&arr, &model)).unwrap();
        for m in [&set.p, &set.q] {
            assert!(is_diagonal(m));
            let d: DVector<Complex64> = m.diagonal();
            assert!(d.iter().all(|&x| x == d[0]));
        }
    }

    #[test]
    fn regime_parameters() {
        let d = 0.005;
        assert_eq!(CouplingRegime::Tight.radius(d, 0.05), 0.0025);
        let w = CouplingRegime::Weak.radius(d, 0.05);
        assert!((w - 0.00025).abs() < 1e-18);
        assert!((CouplingRegime::Weak.mutual_scale(w, d) - 1e-3).abs() < 1e-15);
        assert_eq!("weak".parse::<CouplingRegime>().unwrap(), CouplingRegime::Weak);
        assert!("medium".parse::<CouplingRegime>().is_err());
    }
}
