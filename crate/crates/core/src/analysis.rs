//! Eigenchannel SNRs, scattered power, empirical CDFs and the magnitude
//! profiles of equivalent steering vectors and correlation rows.

use serde::{Deserialize, Serialize};

use crate::numerics::HermitianFactor;
use crate::{CMatrix, CVector, Error, Result};

/// How the total transmit power is spread over sub-channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PowerNormalization {
    /// `P_total` is shared by all sub-channels of the grid.
    #[default]
    Total,
    /// Every sub-channel transmits `P_total` on its own.
    PerSubchannel,
}

impl std::str::FromStr for PowerNormalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(Self::Total),
            "per-subchannel" => Ok(Self::PerSubchannel),
            other => Err(Error::invalid(
                "power_normalization",
                format!("unknown mode {other:?}; expected \"total\" or \"per-subchannel\""),
            )),
        }
    }
}

/// Equal power allocation over sub-channels and active eigenmodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPolicy {
    pub p_total: f64,
    pub normalization: PowerNormalization,
    pub n_subchannels: usize,
}

impl PowerPolicy {
    pub fn new(p_total: f64, normalization: PowerNormalization, n_subchannels: usize) -> Result<Self> {
        if !(p_total > 0.0) || !p_total.is_finite() {
            return Err(Error::invalid("p_total", format!("must be positive, got {p_total}")));
        }
        if n_subchannels == 0 {
            return Err(Error::invalid("n_subchannels", "must be at least 1"));
        }
        Ok(Self {
            p_total,
            normalization,
            n_subchannels,
        })
    }

    /// Power available on one sub-channel.
    pub fn per_subchannel(&self) -> f64 {
        match self.normalization {
            PowerNormalization::Total => self.p_total / self.n_subchannels as f64,
            PowerNormalization::PerSubchannel => self.p_total,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSnr {
    pub index: usize,
    pub lambda: f64,
    pub power: f64,
    pub snr: f64,
    pub snr_db: f64,
}

/// Eigenmode SNRs of one sub-channel, strongest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrProfile {
    pub modes: Vec<EigenSnr>,
}

impl SnrProfile {
    pub fn total_power(&self) -> f64 {
        self.modes.iter().map(|m| m.power).sum()
    }

    pub fn strongest(&self) -> &EigenSnr {
        &self.modes[0]
    }
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `SNR_i = P_t,i·λ_i(H̃ᴴH̃)` with `P_t,i` equal over the `min(N_r, N_t)`
/// active modes. Modes beyond the active count get zero power.
pub fn eigen_snrs(h_tilde: &CMatrix, policy: &PowerPolicy) -> Result<SnrProfile> {
    let n_t = h_tilde.ncols();
    if n_t == 0 || h_tilde.nrows() == 0 {
        return Err(Error::invalid("h_tilde", "channel matrix is empty"));
    }
    let gram = h_tilde.adjoint() * h_tilde;
    let eig = HermitianFactor::new(&crate::numerics::hermitian_part(&gram))?;
    let active = h_tilde.nrows().min(n_t);
    let p_mode = policy.per_subchannel() / active as f64;
    let modes = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(index, &l)| {
            let lambda = l.max(0.0);
            let power = if index < active { p_mode } else { 0.0 };
            let snr = power * lambda;
            EigenSnr {
                index,
                lambda,
                power,
                snr,
                snr_db: to_db(snr),
            }
        })
        .collect();
    Ok(SnrProfile { modes })
}

/// Isotropic-input received scattered power `p_t·‖H_eq^Sc‖_F²/N_t`.
pub fn scattered_power(h_eq_sc: &CMatrix, p_t: f64) -> f64 {
    if h_eq_sc.ncols() == 0 {
        return 0.0;
    }
    p_t * h_eq_sc.norm_squared() / h_eq_sc.ncols() as f64
}

/// Step CDF: sorted samples paired with `(i+1)/n`.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "empirical CDF needs at least one sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("samples", "contains NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.into_iter().enumerate().map(|(i, v)| (v, (i + 1) as f64 / n)).collect())
}

/// Sample median (mean of the two central values for even counts).
pub fn median(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "median needs at least one sample"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Ok(if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    })
}

/// `|w_m|/‖w‖` sorted in descending order.
pub fn steering_magnitude_profile(w: &CVector) -> Result<Vec<f64>> {
    let norm = w.norm();
    if !(norm > 0.0) {
        return Err(Error::invalid("w", "steering vector is zero"));
    }
    let mut mags: Vec<f64> = w.iter().map(|z| z.norm() / norm).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags)
}

/// `|C_{1,m}|/C_{1,1}` for every column `m`.
pub fn effective_corr_row(c: &CMatrix) -> Result<Vec<f64>> {
    if c.nrows() == 0 || !c.is_square() {
        return Err(Error::DimensionMismatch {
            context: "effective correlation row",
            expected: (c.nrows(), c.nrows()),
            found: c.shape(),
        });
    }
    let d = c[(0, 0)].re;
    if !(d > 0.0) {
        return Err(Error::invalid("c", format!("first diagonal entry must be positive, got {d}")));
    }
    Ok(c.row(0).iter().map(|z| z.norm() / d).collect())
}

/// Mean of the off-diagonal entries of a first-row profile.
pub fn mean_off_diagonal(row: &[f64]) -> f64 {
    if row.len() < 2 {
        return 0.0;
    }
    row[1..].iter().sum::<f64>() / (row.len() - 1) as f64
}
