//! Rician MIMO channel and its circuit-aware equivalent.
//!
//! The propagation channel is
//! `H_MIMO = √β·[√(K/(K+1))·a_R·a_Tᴴ + √(1/(K+1))·R_R^{1/2}·U·R_T^{1/2}]`.
//! Passing it through the transmit coupling `Q`, the trans-impedance, the
//! receive coupling `P`, the LNA and the noise whitener `W = R_n^{−1/2}`
//! gives
//!
//! ```text
//! H̃ = α·[√β_LoS·w_R·w_Tᴴ + √(β/(K+1))·F_R·U·F_T]
//! w_R = W·P·a_R    w_T = Qᴴ·a_T
//! F_R = W·P·R_R^{1/2}    F_T = R_T^{1/2}·Q
//! ```
//!
//! with `F_R·F_Rᴴ = C_R` and `F_Tᴴ·F_T = C_T`. Using `F_R` and `F_T` rather
//! than Hermitian roots of `C_R`, `C_T` keeps the equivalent channel equal to
//! the circuit path draw by draw, not only in distribution.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{CircuitParams, ImpedanceSet};
use crate::noise::{standard_complex_normal_vector, NoiseModel};
use crate::numerics::{hermitian_part, hermitian_sqrt};
use crate::seeding::{stream_rng, StreamPurpose};
use crate::{CMatrix, CVector, Error, Result, SPEED_OF_LIGHT};

/// Above this K the scattered part is dropped.
pub const K_LOS_LIMIT: f64 = 1e8;
/// Below this K the LoS part is dropped.
pub const K_RAYLEIGH_LIMIT: f64 = 1e-8;

/// ULA steering vector `a_m = e^{j2π·δ·(f/c)·m·sin θ}` referenced to the
/// first element.
pub fn steering_vector(n: usize, spacing: f64, f: f64, theta: f64) -> CVector {
    let step = 2.0 * PI * spacing * f / SPEED_OF_LIGHT * theta.sin();
    CVector::from_fn(n, |m, _| Complex64::from_polar(1.0, step * m as f64))
}

/// `β_LoS = G_T·G_R·(c/(2πf·d^{γ/2}))²`.
pub fn los_path_gain(f: f64, g_t: f64, g_r: f64, distance: f64, gamma: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::invalid("f", format!("must be positive, got {f}")));
    }
    if !(distance > 0.0) {
        return Err(Error::invalid("distance", format!("must be positive, got {distance}")));
    }
    if !(g_t > 0.0) || !(g_r > 0.0) {
        return Err(Error::invalid("gain", format!("antenna gains must be positive, got {g_t}, {g_r}")));
    }
    if !gamma.is_finite() {
        return Err(Error::invalid("gamma", "must be finite"));
    }
    let amp = SPEED_OF_LIGHT / (2.0 * PI * f * distance.powf(gamma / 2.0));
    Ok(g_t * g_r * amp * amp)
}

/// `(β_LoS, β)` with `β = β_LoS·(1 + 1/K)`.
pub fn path_gain(f: f64, k_linear: f64, g_t: f64, g_r: f64, distance: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(k_linear > 0.0) {
        return Err(Error::invalid(
            "k_linear",
            format!("must be positive, got {k_linear}; request pure Rayleigh through the K→0 limit"),
        ));
    }
    let los = los_path_gain(f, g_t, g_r, distance, gamma)?;
    Ok((los, los * (1.0 + 1.0 / k_linear)))
}

/// Which form of the Rician mixture is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RicianRegime {
    Mixed,
    LosOnly,
    Rayleigh,
}

/// Amplitudes of the LoS and scattered terms at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianGains {
    pub k_linear: f64,
    pub beta_los: f64,
    pub beta: f64,
    /// `√(β·K/(K+1))`.
    pub los_amp: f64,
    /// `√(β/(K+1))`.
    pub scatter_amp: f64,
    pub regime: RicianRegime,
}

impl RicianGains {
    /// Mixture weights for `β_LoS` and `K`. Outside `[1e-8, 1e8]` the limit
    /// forms apply: LoS only with `β = β_LoS`, or Rayleigh carrying power
    /// `β_LoS`.
    pub fn new(beta_los: f64, k_linear: f64) -> Result<Self> {
        if !(beta_los > 0.0) || !beta_los.is_finite() {
            return Err(Error::invalid("beta_los", format!("must be positive, got {beta_los}")));
        }
        if !(k_linear >= 0.0) || k_linear.is_nan() {
            return Err(Error::invalid("k_linear", format!("must be non-negative, got {k_linear}")));
        }
        let g = if k_linear > K_LOS_LIMIT {
            Self {
                k_linear,
                beta_los,
                beta: beta_los,
                los_amp: beta_los.sqrt(),
                scatter_amp: 0.0,
                regime: RicianRegime::LosOnly,
            }
        } else if k_linear < K_RAYLEIGH_LIMIT {
            Self {
                k_linear,
                beta_los,
                beta: beta_los,
                los_amp: 0.0,
                scatter_amp: beta_los.sqrt(),
                regime: RicianRegime::Rayleigh,
            }
        } else {
            let beta = beta_los * (1.0 + 1.0 / k_linear);
            Self {
                k_linear,
                beta_los,
                beta,
                los_amp: (beta * k_linear / (k_linear + 1.0)).sqrt(),
                scatter_amp: (beta / (k_linear + 1.0)).sqrt(),
                regime: RicianRegime::Mixed,
            }
        };
        Ok(g)
    }

    pub fn from_link(f: f64, k_linear: f64, g_t: f64, g_r: f64, distance: f64, gamma: f64) -> Result<Self> {
        Self::new(los_path_gain(f, g_t, g_r, distance, gamma)?, k_linear)
    }
}

fn check_shape(context: &'static str, m: &CMatrix, expected: (usize, usize)) -> Result<()> {
    if m.shape() != expected {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found: m.shape(),
        });
    }
    Ok(())
}

fn check_len(context: &'static str, v: &CVector, expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            context,
            expected: (expected, 1),
            found: (v.len(), 1),
        });
    }
    Ok(())
}

/// `H_MIMO` from its ingredients.
pub fn assemble_h_mimo(
    gains: &RicianGains,
    a_r: &CVector,
    a_t: &CVector,
    r_r_sqrt: &CMatrix,
    r_t_sqrt: &CMatrix,
    u_field: &CMatrix,
) -> Result<CMatrix> {
    let (n_r, n_t) = (a_r.len(), a_t.len());
    check_shape("scattered field U", u_field, (n_r, n_t))?;
    check_shape("R_R^{1/2}", r_r_sqrt, (n_r, n_r))?;
    check_shape("R_T^{1/2}", r_t_sqrt, (n_t, n_t))?;
    let mut h = CMatrix::zeros(n_r, n_t);
    if gains.los_amp != 0.0 {
        h += (a_r * a_t.adjoint()).scale(gains.los_amp);
    }
    if gains.scatter_amp != 0.0 {
        h += (r_r_sqrt * u_field * r_t_sqrt).scale(gains.scatter_amp);
    }
    Ok(h)
}

/// `w_R = W·P·a_R`.
pub fn equivalent_steering_rx(whitener: &CMatrix, p: &CMatrix, a_r: &CVector) -> Result<CVector> {
    check_shape("receiver coupling P", p, (a_r.len(), a_r.len()))?;
    check_shape("whitener", whitener, p.shape())?;
    Ok(whitener * (p * a_r))
}

/// `w_T = Qᴴ·a_T`.
pub fn equivalent_steering_tx(q: &CMatrix, a_t: &CVector) -> Result<CVector> {
    check_shape("transmitter coupling Q", q, (a_t.len(), a_t.len()))?;
    Ok(q.adjoint() * a_t)
}

/// `C_R = W·P·R_R·Pᴴ·W`, Hermitian by construction.
pub fn equivalent_spatial_corr_rx(whitener: &CMatrix, p: &CMatrix, r_r: &CMatrix) -> Result<CMatrix> {
    check_shape("receiver coupling P", p, r_r.shape())?;
    check_shape("whitener", whitener, r_r.shape())?;
    let wp = whitener * p;
    Ok(hermitian_part(&(&wp * r_r * wp.adjoint())))
}

/// `C_T = Qᴴ·R_T·Q`.
pub fn equivalent_spatial_corr_tx(q: &CMatrix, r_t: &CMatrix) -> Result<CMatrix> {
    check_shape("transmitter coupling Q", q, r_t.shape())?;
    Ok(hermitian_part(&(q.adjoint() * r_t * q)))
}

/// `H̃ = α·[los_amp·w_R·w_Tᴴ + scatter_amp·L·U·R]` where `L·Lᴴ = C_R` and
/// `Rᴴ·R = C_T`.
pub fn whitened_channel(
    alpha: Complex64,
    gains: &RicianGains,
    w_r: &CVector,
    w_t: &CVector,
    left: &CMatrix,
    u_field: &CMatrix,
    right: &CMatrix,
) -> Result<CMatrix> {
    let (n_r, n_t) = (w_r.len(), w_t.len());
    check_shape("scattered field U", u_field, (n_r, n_t))?;
    check_shape("receive scattering factor", left, (n_r, n_r))?;
    check_shape("transmit scattering factor", right, (n_t, n_t))?;
    let mut h = CMatrix::zeros(n_r, n_t);
    if gains.los_amp != 0.0 {
        h += w_r * w_t.adjoint() * Complex64::from(gains.los_amp);
    }
    if gains.scatter_amp != 0.0 {
        h += left * u_field * right * Complex64::from(gains.scatter_amp);
    }
    Ok(h * alpha)
}

/// `Z_RT = diag(Re Z_R)^{1/2}·H_MIMO·diag(Re Z_T)^{1/2}·e^{jφ}`.
pub fn trans_impedance(h_mimo: &CMatrix, z_r: &CMatrix, z_t: &CMatrix, phi: f64) -> Result<CMatrix> {
    check_shape("H_MIMO", h_mimo, (z_r.nrows(), z_t.nrows()))?;
    let rot = Complex64::from_polar(1.0, phi);
    Ok(CMatrix::from_fn(h_mimo.nrows(), h_mimo.ncols(), |i, j| {
        h_mimo[(i, j)] * (z_r[(i, i)].re * z_t[(j, j)].re).sqrt() * rot
    }))
}

/// End-to-end circuit channel `H = β_LNA·R_in·P·Z_RT·Q` (before whitening).
pub fn circuit_channel(imp: &ImpedanceSet, params: &CircuitParams, h_mimo: &CMatrix) -> Result<CMatrix> {
    let z_rt = trans_impedance(h_mimo, &imp.z_r, &imp.z_t, imp.phi)?;
    Ok((&imp.p * z_rt * &imp.q).scale(params.lna_gain * params.r_in))
}

/// Every deterministic per-frequency factor of the equivalent channel.
#[derive(Debug, Clone)]
pub struct EquivalentFrame {
    pub freq_hz: f64,
    pub alpha: Complex64,
    pub gains: RicianGains,
    pub a_r: CVector,
    pub a_t: CVector,
    pub r_r_sqrt: CMatrix,
    pub r_t_sqrt: CMatrix,
    pub w_r: CVector,
    pub w_t: CVector,
    /// `F_R = W·P·R_R^{1/2}`.
    pub f_r: CMatrix,
    /// `F_T = R_T^{1/2}·Q`.
    pub f_t: CMatrix,
    pub c_r: CMatrix,
    pub c_t: CMatrix,
}

impl EquivalentFrame {
    pub fn build(
        imp: &ImpedanceSet,
        noise: &NoiseModel,
        gains: RicianGains,
        a_r: CVector,
        a_t: CVector,
        r_r: &CMatrix,
        r_t: &CMatrix,
    ) -> Result<Self> {
        let w = &noise.whitener;
        let w_r = equivalent_steering_rx(w, &imp.p, &a_r)?;
        let w_t = equivalent_steering_tx(&imp.q, &a_t)?;
        let r_r_sqrt = hermitian_sqrt(r_r)?;
        let r_t_sqrt = hermitian_sqrt(r_t)?;
        let f_r = w * &imp.p * &r_r_sqrt;
        let f_t = &r_t_sqrt * &imp.q;
        let c_r = equivalent_spatial_corr_rx(w, &imp.p, r_r)?;
        let c_t = equivalent_spatial_corr_tx(&imp.q, r_t)?;
        Ok(Self {
            freq_hz: imp.freq_hz,
            alpha: imp.alpha,
            gains,
            a_r,
            a_t,
            r_r_sqrt,
            r_t_sqrt,
            w_r,
            w_t,
            f_r,
            f_t,
            c_r,
            c_t,
        })
    }

    pub fn n_r(&self) -> usize {
        self.w_r.len()
    }

    pub fn n_t(&self) -> usize {
        self.w_t.len()
    }

    /// `α·los_amp·w_R·w_Tᴴ`.
    pub fn h_eq_los(&self) -> CMatrix {
        &self.w_r * self.w_t.adjoint() * (self.alpha * self.gains.los_amp)
    }

    /// `α·scatter_amp·F_R·U·F_T`.
    pub fn h_eq_sc(&self, u_field: &CMatrix) -> Result<CMatrix> {
        self.h_eq_sc_with(&self.gains, u_field)
    }

    pub fn h_tilde(&self, u_field: &CMatrix) -> Result<CMatrix> {
        self.h_tilde_with(&self.gains, u_field)
    }

    /// [`Self::h_eq_sc`] under other Rician gains.
    pub fn h_eq_sc_with(&self, gains: &RicianGains, u_field: &CMatrix) -> Result<CMatrix> {
        check_shape("scattered field U", u_field, (self.n_r(), self.n_t()))?;
        Ok(&self.f_r * u_field * &self.f_t * (self.alpha * gains.scatter_amp))
    }

    /// [`Self::h_tilde`] under other Rician gains.
    pub fn h_tilde_with(&self, gains: &RicianGains, u_field: &CMatrix) -> Result<CMatrix> {
        whitened_channel(self.alpha, gains, &self.w_r, &self.w_t, &self.f_r, u_field, &self.f_t)
    }

    pub fn h_mimo(&self, u_field: &CMatrix) -> Result<CMatrix> {
        assemble_h_mimo(&self.gains, &self.a_r, &self.a_t, &self.r_r_sqrt, &self.r_t_sqrt, u_field)
    }

    /// Full channel snapshot for one fading draw.
    pub fn snapshot(&self, u_field: &CMatrix) -> Result<ChannelSnapshot> {
        let h_eq_los = self.h_eq_los();
        let h_eq_sc = self.h_eq_sc(u_field)?;
        let h_tilde = &h_eq_los + &h_eq_sc;
        Ok(ChannelSnapshot {
            freq_hz: self.freq_hz,
            h_mimo: self.h_mimo(u_field)?,
            h_eq_los,
            h_eq_sc,
            h_tilde,
            w_r: self.w_r.clone(),
            w_t: self.w_t.clone(),
            c_r: self.c_r.clone(),
            c_t: self.c_t.clone(),
            path_gain: self.gains.beta,
            path_gain_los: self.gains.beta_los,
            k_linear: self.gains.k_linear,
        })
    }
}

/// Channel quantities of one trial at one frequency. `h_eq_los` and
/// `h_eq_sc` already carry `α` and the Rician amplitudes, so
/// `h_tilde = h_eq_los + h_eq_sc`.
#[derive(Debug, Clone)]
pub struct ChannelSnapshot {
    pub freq_hz: f64,
    pub h_mimo: CMatrix,
    pub h_eq_los: CMatrix,
    pub h_eq_sc: CMatrix,
    pub h_tilde: CMatrix,
    pub w_r: CVector,
    pub w_t: CVector,
    pub c_r: CMatrix,
    pub c_t: CMatrix,
    pub path_gain: f64,
    pub path_gain_los: f64,
    pub k_linear: f64,
}

/// One trial across the frequency grid.
pub type ChannelRealization = Vec<ChannelSnapshot>;

/// Whitened receiver output `ṽ_L = H̃·v_G + ñ`, `ñ ~ CN(0, I)`. With
/// `noise = None` the noiseless response is returned.
pub fn simulate_output(h_tilde: &CMatrix, v_g: &CVector, noise: Option<(u64, &[u64])>) -> Result<CVector> {
    check_len("transmit vector v_G", v_g, h_tilde.ncols())?;
    let mut out = h_tilde * v_g;
    if let Some((seed, coords)) = noise {
        let mut rng = stream_rng(seed, StreamPurpose::Noise, coords);
        out += standard_complex_normal_vector(&mut rng, h_tilde.nrows());
    }
    Ok(out)
}

/// Same as [`simulate_output`] with a caller-owned generator.
pub fn simulate_output_with<R: Rng + ?Sized>(h_tilde: &CMatrix, v_g: &CVector, rng: &mut R) -> Result<CVector> {
    check_len("transmit vector v_G", v_g, h_tilde.ncols())?;
    Ok(h_tilde * v_g + standard_complex_normal_vector(rng, h_tilde.nrows()))
}
