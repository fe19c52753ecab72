//! Frequency-correlated fading via a blockwise Cholesky recursion.
//!
//! Sub-channels follow the Jakes correlation `1/(1 + 2πΔf·|lag|·τ_rms)`.
//! Rather than factoring the full `L×L` matrix, the `2n×2n` Jakes matrix
//! is factored once as
//!
//! ```text
//! R_f = [[R₁, C], [Cᴴ, R₁]] = [[U₁ᴴ, 0], [U₂ᴴ, U₃ᴴ]]·[[U₁, U₂], [0, U₃]]
//! ```
//!
//! and length-`n` blocks are produced by `h₁ = U₁ᴴu₁`,
//! `h_k = A·h_{k−1} + U₃ᴴu_k` with `A = U₂ᴴ(U₁ᴴ)⁻¹`. Any two sub-channels
//! inside two consecutive blocks have exactly the Jakes correlation;
//! correlation across non-adjacent blocks is only approximated, which is
//! harmless once `jakes_entry(2n)` is negligible.
//!
//! The Jakes matrix is real, so all factors are real and complex streams
//! are propagated as separate real and imaginary columns.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::numerics::{cholesky_upper, hermitian_sqrt};
use crate::seeding::{stream_rng, StreamPurpose};
use crate::{CMatrix, Error, Result};

/// Jakes frequency correlation at integer lag `lag`.
pub fn jakes_entry(lag: usize, delta_f: f64, tau_rms: f64) -> f64 {
    1.0 / (1.0 + 2.0 * PI * delta_f * lag as f64 * tau_rms)
}

/// `size×size` real Toeplitz Jakes matrix.
pub fn jakes_matrix(size: usize, delta_f: f64, tau_rms: f64) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| jakes_entry(i.abs_diff(j), delta_f, tau_rms))
}

/// Precomputed factors of the block recursion; immutable and shareable.
#[derive(Debug, Clone)]
pub struct BlockFactors {
    block_len: usize,
    delta_f: f64,
    tau_rms: f64,
    /// `U₁ᴴ` (lower triangular).
    pub u1h: DMatrix<f64>,
    /// `U₂ᴴ`.
    pub u2h: DMatrix<f64>,
    /// `U₃ᴴ` (lower triangular).
    pub u3h: DMatrix<f64>,
    /// `A = U₂ᴴ(U₁ᴴ)⁻¹`.
    pub transition: DMatrix<f64>,
}

impl BlockFactors {
    pub fn new(block_len: usize, delta_f: f64, tau_rms: f64) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::invalid("block_len", "must be at least 1"));
        }
        if !(tau_rms >= 0.0) || !tau_rms.is_finite() {
            return Err(Error::invalid("tau_rms", format!("must be non-negative, got {tau_rms}")));
        }
        if !(delta_f > 0.0) {
            return Err(Error::invalid("delta_f", format!("must be positive, got {delta_f}")));
        }
        let n = block_len;
        let r_f = jakes_matrix(2 * n, delta_f, tau_rms);
        let lower = cholesky_upper(&r_f)?.transpose();
        let u1h = lower.view((0, 0), (n, n)).into_owned();
        let u2h = lower.view((n, 0), (n, n)).into_owned();
        let u3h = lower.view((n, n), (n, n)).into_owned();
        // A·U₁ᴴ = U₂ᴴ  ⇔  U₁·Aᵀ = U₂
        let at = u1h
            .transpose()
            .solve_upper_triangular(&u2h.transpose())
            .ok_or_else(|| Error::SingularMatrix {
                what: "U₁ᴴ in the frequency recursion".into(),
                freq_hz: None,
            })?;
        Ok(Self {
            block_len,
            delta_f,
            tau_rms,
            u1h,
            u2h,
            u3h,
            transition: at.transpose(),
        })
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    pub fn tau_rms(&self) -> f64 {
        self.tau_rms
    }

    /// Correlation at lag `2n`, the first lag the recursion does not carry.
    pub fn truncated_correlation(&self) -> f64 {
        jakes_entry(2 * self.block_len, self.delta_f, self.tau_rms)
    }

    /// `‖A·R₁·Aᵀ + U₃ᴴU₃ − R₁‖_max`; zero up to rounding when the recursion
    /// is stationary.
    pub fn stationarity_residual(&self) -> f64 {
        let r1 = jakes_matrix(self.block_len, self.delta_f, self.tau_rms);
        let lhs = &self.transition * &r1 * self.transition.transpose() + &self.u3h * self.u3h.transpose();
        (lhs - r1).amax()
    }

    /// One recursion step on a batch of real columns. `prev = None` starts a
    /// sequence. Only the first `rows` outputs are formed.
    fn step(&self, prev: Option<&DMatrix<f64>>, u: &DMatrix<f64>, rows: usize) -> DMatrix<f64> {
        let n = self.block_len;
        debug_assert!(rows <= n);
        match prev {
            None => {
                let l = self.u1h.view((0, 0), (rows, rows));
                l * u.rows(0, rows)
            }
            Some(h) => {
                let l3 = self.u3h.view((0, 0), (rows, rows));
                self.transition.rows(0, rows) * h + l3 * u.rows(0, rows)
            }
        }
    }
}

/// Single-stream recursion state.
#[derive(Debug, Clone)]
pub struct FreqCorrGenerator {
    factors: Arc<BlockFactors>,
    state: Option<DMatrix<f64>>,
}

impl FreqCorrGenerator {
    pub fn new(factors: Arc<BlockFactors>) -> Self {
        Self {
            factors,
            state: None,
        }
    }

    pub fn factors(&self) -> &BlockFactors {
        &self.factors
    }

    /// Emits the next block from `n` fresh `CN(0,1)` innovations.
    pub fn next_block(&mut self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.factors.block_len;
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                context: "frequency recursion innovations",
                expected: (n, 1),
                found: (u.len(), 1),
            });
        }
        let um = DMatrix::from_fn(n, 2, |r, c| if c == 0 { u[r].re } else { u[r].im });
        let h = self.factors.step(self.state.as_ref(), &um, n);
        let out = (0..n).map(|r| Complex64::new(h[(r, 0)], h[(r, 1)])).collect();
        self.state = Some(h);
        Ok(out)
    }

    pub fn reset(&mut self) {
        self.state = None;
    }
}

/// Unit-variance, Jakes-correlated `N_r×N_t` fields `U(f)` for one trial,
/// produced one sub-channel at a time with memory `O(n·N_r·N_t)`.
///
/// Entry `(i, j)` draws its innovations from its own keyed stream, so the
/// output does not depend on evaluation order.
pub struct ScatteredFieldStream {
    factors: Arc<BlockFactors>,
    n_r: usize,
    n_t: usize,
    total_len: usize,
    rngs: Vec<ChaCha12Rng>,
    block: Option<DMatrix<f64>>,
    emitted: usize,
    pos: usize,
}

impl ScatteredFieldStream {
    /// `total_len` is the number of sub-channels that will be requested; the
    /// last block is only partially formed.
    pub fn new(
        factors: Arc<BlockFactors>,
        n_r: usize,
        n_t: usize,
        total_len: usize,
        seed: u64,
        trial: u64,
    ) -> Self {
        let mut rngs = Vec::with_capacity(n_r * n_t);
        for j in 0..n_t {
            for i in 0..n_r {
                rngs.push(stream_rng(seed, StreamPurpose::Fading, &[trial, i as u64, j as u64]));
            }
        }
        Self {
            factors,
            n_r,
            n_t,
            total_len,
            rngs,
            block: None,
            emitted: 0,
            pos: 0,
        }
    }

    fn advance_block(&mut self) {
        let n = self.factors.block_len;
        let cols = 2 * self.rngs.len();
        let mut u = DMatrix::<f64>::zeros(n, cols);
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        for (s, rng) in self.rngs.iter_mut().enumerate() {
            for r in 0..n {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                u[(r, 2 * s)] = re * scale;
                u[(r, 2 * s + 1)] = im * scale;
            }
        }
        assert!(
            self.block.as_ref().map_or(true, |b| b.nrows() == n),
            "scattered field stream read past its declared length {}",
            self.total_len
        );
        let remaining = self.total_len.saturating_sub(self.emitted).max(1);
        let rows = remaining.min(n);
        let next = self.factors.step(self.block.as_ref(), &u, rows);
        self.block = Some(next);
        self.pos = 0;
    }

    fn ensure_block(&mut self) {
        let need_new = match &self.block {
            None => true,
            Some(b) => self.pos >= b.nrows(),
        };
        if need_new {
            self.advance_block();
        }
    }

    /// Next `U(f)`.
    pub fn next_field(&mut self) -> CMatrix {
        self.ensure_block();
        let block = self.block.as_ref().expect("block generated above");
        let r = self.pos;
        let n_r = self.n_r;
        let field = CMatrix::from_fn(self.n_r, self.n_t, |i, j| {
            let s = j * n_r + i;
            Complex64::new(block[(r, 2 * s)], block[(r, 2 * s + 1)])
        });
        self.pos += 1;
        self.emitted += 1;
        field
    }

    /// Advances past `count` sub-channels without materialising them.
    pub fn skip(&mut self, count: usize) {
        for _ in 0..count {
            self.ensure_block();
            self.pos += 1;
            self.emitted += 1;
        }
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }
}

/// Coloured scattered fields `R_R^{1/2}(f)·U(f)·R_T^{1/2}(f)` for every
/// sub-channel of one trial.
pub fn generate_scattered_field(
    n_r: usize,
    n_t: usize,
    spatial_r_per_f: &[CMatrix],
    spatial_t_per_f: &[CMatrix],
    factors: Arc<BlockFactors>,
    seed: u64,
    trial: u64,
) -> Result<Vec<CMatrix>> {
    let len = spatial_r_per_f.len();
    if spatial_t_per_f.len() != len {
        return Err(Error::DimensionMismatch {
            context: "per-frequency spatial correlations",
            expected: (len, 1),
            found: (spatial_t_per_f.len(), 1),
        });
    }
    let mut stream = ScatteredFieldStream::new(factors, n_r, n_t, len, seed, trial);
    spatial_r_per_f
        .iter()
        .zip(spatial_t_per_f)
        .map(|(r_r, r_t)| {
            if r_r.shape() != (n_r, n_r) || r_t.shape() != (n_t, n_t) {
                return Err(Error::DimensionMismatch {
                    context: "spatial correlation",
                    expected: (n_r, n_t),
                    found: (r_r.nrows(), r_t.nrows()),
                });
            }
            let u = stream.next_field();
            Ok(hermitian_sqrt(r_r)? * u * hermitian_sqrt(r_t)?)
        })
        .collect()
}

/// Real-valued linear map from stacked innovations to `k_blocks` recursion
/// outputs, `h = M·u`. Used to check the implied covariance `M·Mᵀ`.
pub fn recursion_linear_map(factors: &BlockFactors, k_blocks: usize) -> DMatrix<f64> {
    let n = factors.block_len;
    let total = n * k_blocks;
    let mut m = DMatrix::<f64>::zeros(total, total);
    for k in 0..k_blocks {
        if k == 0 {
            m.view_mut((0, 0), (n, n)).copy_from(&factors.u1h);
        } else {
            let prev = m.rows((k - 1) * n, n).into_owned();
            let next = &factors.transition * prev;
            m.rows_mut(k * n, n).copy_from(&next);
            let mut diag = m.view_mut((k * n, k * n), (n, n));
            diag += &factors.u3h;
        }
    }
    m
}

/// Upper bound `‖A^k‖_F^{1/k}` on the spectral radius of `A`; tends to it as
/// `k` grows.
pub fn transition_growth(factors: &BlockFactors, k: u32) -> f64 {
    let mut p = DMatrix::<f64>::identity(factors.block_len, factors.block_len);
    for _ in 0..k {
        p = &factors.transition * p;
    }
    p.norm().powf(1.0 / k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jakes_examples() {
        assert_eq!(jakes_entry(0, 1e7, 2e-9), 1.0);
        let v = jakes_entry(1, 1e7, 2e-9);
        assert!((v - 0.888_364_788_295_340_3).abs() < 1e-15);
        let mut last = 1.0;
        for lag in 1..2000 {
            let x = jakes_entry(lag, 1e7, 2e-9);
            assert!(x < last && x > 0.0);
            last = x;
        }
    }

    #[test]
    fn single_block_is_ar1() {
        let f = BlockFactors::new(1, 1e7, 2e-9).unwrap();
        let rho = jakes_entry(1, 1e7, 2e-9);
        assert!((f.u1h[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((f.u2h[(0, 0)] - rho).abs() < 1e-15);
        assert!((f.u3h[(0, 0)] - (1.0 - rho * rho).sqrt()).abs() < 1e-15);
        assert!((f.transition[(0, 0)] - rho).abs() < 1e-15);
    }

    #[test]
    fn factors_reproduce_jakes_blocks() {
        let f = BlockFactors::new(4, 1e7, 2e-9).unwrap();
        let r1 = jakes_matrix(4, 1e7, 2e-9);
        assert!((&f.u1h * f.u1h.transpose() - &r1).amax() < 1e-12);
        assert!(f.stationarity_residual() < 1e-12);
        let m = recursion_linear_map(&f, 2);
        let cov = &m * m.transpose();
        assert!((cov - jakes_matrix(8, 1e7, 2e-9)).amax() < 1e-12);
        for r in 0..4 {
            for c in (r + 1)..4 {
                assert_eq!(f.u1h[(r, c)], 0.0);
                assert_eq!(f.u3h[(r, c)], 0.0);
            }
        }
    }

    #[test]
    fn fully_correlated_is_rejected() {
        assert!(matches!(
            BlockFactors::new(4, 1e7, 0.0),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn probe_first_block() {
        let f = Arc::new(BlockFactors::new(3, 1e7, 2e-9).unwrap());
        let mut g = FreqCorrGenerator::new(f.clone());
        let e1 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let h = g.next_block(&e1).unwrap();
        for r in 0..3 {
            assert_eq!(h[r], Complex64::new(f.u1h[(r, 0)], 0.0));
        }
    }

    #[test]
    fn zero_innovations_decay_geometrically() {
        let f = Arc::new(BlockFactors::new(4, 1e7, 2e-9).unwrap());
        assert!(transition_growth(&f, 64) < 1.0);
        let mut g = FreqCorrGenerator::new(f);
        let u1 = vec![Complex64::new(1.0, -0.5); 4];
        let zero = vec![Complex64::new(0.0, 0.0); 4];
        let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut prev = norm(&g.next_block(&u1).unwrap());
        let first = prev;
        for _ in 0..40 {
            let cur = norm(&g.next_block(&zero).unwrap());
            prev = cur;
        }
        assert!(prev < 1e-3 * first);
        assert!(g.next_block(&zero[..3]).is_err());
    }

    #[test]
    fn stream_matches_single_generator() {
        // one entry stream must equal driving FreqCorrGenerator with the same draws
        let f = Arc::new(BlockFactors::new(5, 1e7, 2e-9).unwrap());
        let mut s = ScatteredFieldStream::new(f.clone(), 1, 1, 12, 99, 3);
        let got: Vec<Complex64> = (0..12).map(|_| s.next_field()[(0, 0)]).collect();

        let mut rng = stream_rng(99, StreamPurpose::Fading, &[3, 0, 0]);
        let mut g = FreqCorrGenerator::new(f);
        let mut expected = Vec::new();
        for _ in 0..3 {
            let u: Vec<Complex64> = (0..5)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect();
            expected.extend(g.next_block(&u).unwrap());
        }
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn siso_field_is_the_recursion_output() {
        let f = Arc::new(BlockFactors::new(4, 1e7, 2e-9).unwrap());
        let ones = vec![CMatrix::identity(1, 1); 9];
        let col = generate_scattered_field(1, 1, &ones, &ones, f.clone(), 5, 0).unwrap();
        let mut s = ScatteredFieldStream::new(f, 1, 1, 9, 5, 0);
        for m in col {
            assert!((m[(0, 0)] - s.next_field()[(0, 0)]).norm() < 1e-15);
        }
    }

    #[test]
    fn skip_equals_discarding() {
        let f = Arc::new(BlockFactors::new(3, 1e7, 2e-9).unwrap());
        let mut a = ScatteredFieldStream::new(f.clone(), 2, 2, 10, 1, 0);
        let mut b = ScatteredFieldStream::new(f, 2, 2, 10, 1, 0);
        a.skip(7);
        for _ in 0..7 {
            b.next_field();
        }
        assert_eq!(a.next_field(), b.next_field());
    }
}
