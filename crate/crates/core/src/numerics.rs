//! Hermitian matrix functions and factorizations.
//!
//! Everything here works on dense `nalgebra` matrices. Eigendecompositions
//! are delegated to `nalgebra::SymmetricEigen`, which handles complex
//! Hermitian input; the wrappers add sorting, tolerance policy and error
//! reporting.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::{CMatrix, Error, Result};

/// Relative tolerance on `‖A − Aᴴ‖_F / ‖A‖_F` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Negative eigenvalues above `−PSD_CLAMP·‖A‖₂` are clamped to zero.
pub const PSD_CLAMP: f64 = 1e-10;
/// Smallest eigenvalue must exceed `PD_FLOOR·‖A‖₂` for an inverse square root.
pub const PD_FLOOR: f64 = 1e-14;
/// Condition number above which a checked inverse logs a warning.
pub const COND_WARN: f64 = 1e12;
/// Relative residual bound `‖M·X − I‖_F / √n` for a checked inverse.
pub const INVERSE_RESIDUAL_TOL: f64 = 1e-10;

/// Eigendecomposition `A = V·diag(λ)·Vᴴ` of a Hermitian matrix with eigenvalues
/// sorted in descending order (ties keep their original order).
#[derive(Debug, Clone)]
pub struct HermitianFactor {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianFactor {
    pub fn new(a: &CMatrix) -> Result<Self> {
        check_square(a, "Hermitian factorization")?;
        let asym = hermitian_asymmetry(a);
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                asymmetry: asym,
                tolerance: HERMITIAN_TOL,
            });
        }
        let n = a.nrows();
        if n == 0 {
            return Ok(Self {
                eigenvalues: DVector::zeros(0),
                eigenvectors: CMatrix::zeros(0, 0),
            });
        }
        let sym = hermitian_part(a);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        // stable sort: equal eigenvalues stay in solver order
        order.sort_by(|&i, &j| {
            eig.eigenvalues[j]
                .partial_cmp(&eig.eigenvalues[i])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
        let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Largest absolute eigenvalue, i.e. the spectral norm of the source.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(0.0_f64, |acc, &l| acc.max(l.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(f64::INFINITY, |acc, &l| acc.min(l))
    }

    /// `V·diag(g(λ))·Vᴴ`.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for c in 0..n {
            let s = g(self.eigenvalues[c]);
            scaled.column_mut(c).scale_mut(s);
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|l| l)
    }
}

/// Unique PSD square root `S = V·diag(√λ)·Vᴴ`, so that `S·Sᴴ = S² = A`.
pub fn hermitian_sqrt(a: &CMatrix) -> Result<CMatrix> {
    let f = HermitianFactor::new(a)?;
    let threshold = -PSD_CLAMP * f.spectral_norm();
    let min = f.min_eigenvalue();
    if min < threshold {
        return Err(Error::NotPositiveSemidefinite {
            eigenvalue: min,
            threshold,
        });
    }
    Ok(f.map(|l| l.max(0.0).sqrt()))
}

/// Hermitian inverse square root `W = V·diag(1/√λ)·Vᴴ`, so that `W·A·Wᴴ = I`.
pub fn hermitian_inv_sqrt(a: &CMatrix) -> Result<CMatrix> {
    let f = HermitianFactor::new(a)?;
    let threshold = PD_FLOOR * f.spectral_norm();
    let min = f.min_eigenvalue();
    if !(min > threshold) {
        return Err(Error::NearSingular {
            eigenvalue: min,
            threshold,
        });
    }
    let w = f.map(|l| 1.0 / l.sqrt());
    let n = a.nrows();
    let e = CMatrix::identity(n, n) - &w * a * &w;
    let refined = &w + (&w * e).scale(0.5);
    Ok(hermitian_part(&refined))
}

/// Upper-triangular Cholesky factor `U` with `Uᴴ·U = A` and a real positive diagonal.
///
/// Generic over real and complex scalars so the frequency-correlation
/// recursion can stay in real arithmetic.
pub fn cholesky_upper<T>(a: &DMatrix<T>) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "Cholesky factorization",
            expected: (n, n),
            found: a.shape(),
        });
    }
    let mut u = DMatrix::<T>::zeros(n, n);
    for i in 0..n {
        let mut d = a[(i, i)].real();
        for k in 0..i {
            d -= u[(k, i)].modulus_squared();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: i, value: d });
        }
        let d = d.sqrt();
        u[(i, i)] = T::from_real(d);
        for j in (i + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..i {
                s -= u[(k, i)].conjugate() * u[(k, j)];
            }
            u[(i, j)] = s.unscale(d);
        }
    }
    Ok(u)
}

/// Inverse via partial-pivot LU with a residual check.
///
/// `what` and `freq_hz` only label errors and the ill-conditioning warning.
pub fn checked_inverse(m: &CMatrix, what: &str, freq_hz: Option<f64>) -> Result<CMatrix> {
    check_square(m, "matrix inversion")?;
    let n = m.nrows();
    let singular = || Error::SingularMatrix {
        what: what.to_string(),
        freq_hz,
    };
    let inv = m.clone().lu().try_inverse().ok_or_else(singular)?;
    if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(singular());
    }
    let residual = (m * &inv - CMatrix::identity(n, n)).norm() / (n as f64).sqrt();
    if residual > INVERSE_RESIDUAL_TOL {
        return Err(Error::InaccurateInverse {
            what: what.to_string(),
            freq_hz,
            residual,
            tolerance: INVERSE_RESIDUAL_TOL,
        });
    }
    let cond = norm_1(m) * norm_1(&inv);
    if cond > COND_WARN {
        match freq_hz {
            Some(f) => log::warn!("{what} at {f} Hz is ill-conditioned (cond_1 ≈ {cond:.3e})"),
            None => log::warn!("{what} is ill-conditioned (cond_1 ≈ {cond:.3e})"),
        }
    }
    Ok(inv)
}

/// Maximum absolute column sum.
pub fn norm_1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖A − Aᴴ‖_F / ‖A‖_F` (zero for the zero matrix).
pub fn hermitian_asymmetry(a: &CMatrix) -> f64 {
    let scale = a.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (a - a.adjoint()).norm() / scale
}

/// `(A + Aᴴ)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Lifts a real matrix to complex.
pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Hermitian eigenvalues in descending order.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<DVector<f64>> {
    Ok(HermitianFactor::new(a)?.eigenvalues)
}

fn check_square(a: &CMatrix, context: &'static str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            context,
            expected: (a.nrows(), a.nrows()),
            found: a.shape(),
        });
    }
    Ok(())
}
