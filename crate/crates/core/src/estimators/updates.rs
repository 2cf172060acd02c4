//! Closed-form texture and speckle updates used between searches over `Δ`.

use nalgebra::DVector;
use num_complex::Complex;

use crate::clutter::{TextureFamily, TextureKind};
use crate::error::{Error, Result};
use crate::linalg::{bilinear_re, hermitian_part, trace_re, HermitianEigen};
use crate::special::{invert_ln_minus_digamma, ShapeRoot};
use crate::{CMatrix, CVector, Scalar};

/// Lower limit applied to every texture estimate.
pub const TAU_FLOOR: f64 = 1e-12;
/// Bracket and tolerance for the shape estimate.
pub const SHAPE_BRACKET: (f64, f64) = (1e-3, 1e3);
pub const SHAPE_TOL: f64 = 1e-8;

fn check_shapes<T: Scalar>(y: &CMatrix<T>, v: &CMatrix<T>, sigma: &CMatrix<T>) -> Result<()> {
    if y.shape() != v.shape() {
        return Err(Error::Dimension(format!("y is {:?} but v is {:?}", y.shape(), v.shape())));
    }
    if sigma.nrows() != y.nrows() || !sigma.is_square() {
        return Err(Error::Dimension(format!("covariance is {:?} for {} sensors", sigma.shape(), y.nrows())));
    }
    Ok(())
}

fn pinv<T: Scalar>(sigma: &CMatrix<T>, t: usize) -> CMatrix<T> {
    HermitianEigen::new(sigma, sigma.nrows().max(t)).pinv()
}

/// `q(t) = r(t)ᴴ Σ^{−1} r(t)` with `r = y − v`.
pub fn quadratic_forms<T: Scalar>(y: &CMatrix<T>, v: &CMatrix<T>, sigma: &CMatrix<T>) -> Result<DVector<T>> {
    check_shapes(y, v, sigma)?;
    let inv = pinv(sigma, y.ncols());
    Ok(quadratic_forms_with(&(y - v), &inv))
}

fn quadratic_forms_with<T: Scalar>(r: &CMatrix<T>, sigma_inv: &CMatrix<T>) -> DVector<T> {
    DVector::from_iterator(
        r.ncols(),
        r.column_iter().map(|c| {
            let c: CVector<T> = c.into_owned();
            bilinear_re(&c, sigma_inv, &c).max(T::zero())
        }),
    )
}

/// ML texture: `τ̂(t) = q(t)/N`, floored at [`TAU_FLOOR`].
pub fn update_tau_ml<T: Scalar>(y: &CMatrix<T>, v: &CMatrix<T>, sigma_norm: &CMatrix<T>) -> Result<DVector<T>> {
    let n = T::of(y.nrows() as f64);
    let floor = T::of(TAU_FLOOR);
    Ok(quadratic_forms(y, v, sigma_norm)?.map(|q| (q / n).max(floor)))
}

/// MAP texture for the K and t priors with parameters `(a, b)`.
pub fn update_tau_map<T: Scalar>(
    y: &CMatrix<T>,
    v: &CMatrix<T>,
    sigma_norm: &CMatrix<T>,
    family: &TextureFamily,
) -> Result<DVector<T>> {
    let q = quadratic_forms(y, v, sigma_norm)?;
    let n = y.nrows();
    let floor = T::of(TAU_FLOOR);
    let taus = q
        .iter()
        .map(|&qt| Ok(T::of(tau_map(qt.as_f64(), n, family)?).max(floor)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(taus))
}

/// Scalar MAP texture for one quadratic form `q`.
pub fn tau_map(q: f64, n: usize, family: &TextureFamily) -> Result<f64> {
    family.validate()?;
    let (a, b, nf) = (family.a, family.b, n as f64);
    match family.kind {
        TextureKind::K => {
            let c = (a - nf - 1.0) * b;
            let disc = c * c + 4.0 * b * q;
            assert!(disc >= 0.0, "negative discriminant with b > 0 and q ≥ 0");
            let root = disc.sqrt();
            // the two forms agree; pick the one without cancellation
            Ok(if c >= 0.0 { 0.5 * (c + root) } else { 2.0 * b * q / (root - c) })
        }
        TextureKind::T => Ok((q + b) / (a + nf + 1.0)),
        TextureKind::Gaussian => Err(Error::invalid("family", "MAP texture update needs a K or t prior")),
    }
}

/// Scale estimate given the shape: `Στ/(Ta)` (K) or `Ta/Σ(1/τ)` (t).
pub fn update_b<T: Scalar>(tau: &DVector<T>, a: f64, kind: TextureKind) -> Result<f64> {
    if tau.is_empty() || tau.iter().any(|&x| !(x > T::zero())) {
        return Err(Error::invalid("tau", "texture values must be positive"));
    }
    if !(a > 0.0) {
        return Err(Error::invalid("a", "shape must be positive"));
    }
    let t = tau.len() as f64;
    match kind {
        TextureKind::K => Ok(tau.iter().map(|x| x.as_f64()).sum::<f64>() / (t * a)),
        TextureKind::T => Ok(t * a / tau.iter().map(|x| 1.0 / x.as_f64()).sum::<f64>()),
        TextureKind::Gaussian => Err(Error::invalid("family", "scale update needs a K or t prior")),
    }
}

/// Shape estimate: root of `ln a − ψ(a) = s` after substituting the scale
/// update, with `s = ln mean(τ) − mean(ln τ)` (K) or
/// `s = ln mean(1/τ) + mean(ln τ)` (t). Both are non-negative by Jensen.
pub fn solve_a<T: Scalar>(tau: &DVector<T>, kind: TextureKind) -> Result<ShapeRoot> {
    if tau.len() < 2 {
        return Err(Error::invalid("tau", "at least two texture values are required"));
    }
    if tau.iter().any(|&x| !(x > T::zero())) {
        return Err(Error::invalid("tau", "texture values must be positive"));
    }
    let t = tau.len() as f64;
    let vals: Vec<f64> = tau.iter().map(|x| x.as_f64()).collect();
    let mean_ln = vals.iter().map(|x| x.ln()).sum::<f64>() / t;
    let s = match kind {
        TextureKind::K => (vals.iter().sum::<f64>() / t).ln() - mean_ln,
        TextureKind::T => (vals.iter().map(|x| 1.0 / x).sum::<f64>() / t).ln() + mean_ln,
        TextureKind::Gaussian => return Err(Error::invalid("family", "shape update needs a K or t prior")),
    };
    Ok(invert_ln_minus_digamma(s.max(0.0), SHAPE_BRACKET.0, SHAPE_BRACKET.1, SHAPE_TOL))
}

/// Result of a speckle covariance update.
#[derive(Clone, Debug)]
pub struct SigmaUpdate<T: Scalar> {
    /// Trace-one estimate.
    pub sigma: CMatrix<T>,
    /// Snapshots dropped because their residual was exactly zero.
    pub skipped: usize,
}

fn weighted_scatter<T: Scalar>(r: &CMatrix<T>, weights: &[Option<T>]) -> Result<SigmaUpdate<T>> {
    let n = r.nrows();
    let mut acc = CMatrix::<T>::zeros(n, n);
    let mut skipped = 0;
    for (col, w) in r.column_iter().zip(weights) {
        match w {
            Some(w) => {
                let c: CVector<T> = col.into_owned();
                acc += (&c * c.adjoint()) * Complex::new(*w, T::zero());
            }
            None => skipped += 1,
        }
    }
    let acc = hermitian_part(&acc);
    let tr = trace_re(&acc);
    if !(tr > T::zero()) {
        return Err(Error::Singular("all residuals vanish; covariance update undefined".into()));
    }
    Ok(SigmaUpdate { sigma: acc * Complex::new(T::one() / tr, T::zero()), skipped })
}

/// Fixed-point ML update
/// `(N/T)·Σ_t r rᴴ / (rᴴ Σ_prev^{−1} r)`, normalised to unit trace.
/// Zero residuals are skipped; the normalisation redistributes their weight.
pub fn update_sigma_ml<T: Scalar>(y: &CMatrix<T>, v: &CMatrix<T>, sigma_prev: &CMatrix<T>) -> Result<SigmaUpdate<T>> {
    check_shapes(y, v, sigma_prev)?;
    let r = y - v;
    let q = quadratic_forms_with(&r, &pinv(sigma_prev, y.ncols()));
    let scale = T::of(y.nrows() as f64 / y.ncols() as f64);
    let weights: Vec<Option<T>> = q.iter().map(|&qt| (qt > T::zero()).then(|| scale / qt)).collect();
    weighted_scatter(&r, &weights)
}

/// MAP update: the ML scatter with `τ̂(t)` replaced by the MAP texture
/// computed from `Σ_prev`, i.e. `(1/T)·Σ_t r rᴴ / τ̂_MAP(t)`, normalised.
pub fn update_sigma_map<T: Scalar>(
    y: &CMatrix<T>,
    v: &CMatrix<T>,
    sigma_prev: &CMatrix<T>,
    family: &TextureFamily,
) -> Result<SigmaUpdate<T>> {
    check_shapes(y, v, sigma_prev)?;
    let r = y - v;
    let q = quadratic_forms_with(&r, &pinv(sigma_prev, y.ncols()));
    let t = T::of(y.ncols() as f64);
    let weights = q
        .iter()
        .map(|&qt| {
            if qt > T::zero() {
                Ok(Some(T::one() / (t * T::of(tau_map(qt.as_f64(), y.nrows(), family)?))))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    weighted_scatter(&r, &weights)
}

/// Conditional log-likelihood up to constants:
/// `−T ln|Σ| − N Σ_t ln τ(t) − Σ_t q(t)/τ(t)` (pseudo-determinant when
/// `Σ` is singular).
pub fn conditional_log_likelihood<T: Scalar>(
    y: &CMatrix<T>,
    v: &CMatrix<T>,
    tau: &DVector<T>,
    sigma_norm: &CMatrix<T>,
) -> Result<T> {
    check_shapes(y, v, sigma_norm)?;
    if tau.len() != y.ncols() {
        return Err(Error::Dimension("texture length differs from the snapshot count".into()));
    }
    let eig = HermitianEigen::new(sigma_norm, y.nrows().max(y.ncols()));
    let q = quadratic_forms_with(&(y - v), &eig.pinv());
    let (n, t) = (T::of(y.nrows() as f64), T::of(y.ncols() as f64));
    let mut ll = -t * eig.ln_pdet();
    for (&qt, &tt) in q.iter().zip(tau.iter()) {
        ll -= n * tt.ln() + qt / tt;
    }
    Ok(ll)
}
