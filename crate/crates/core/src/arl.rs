//! Angular resolution limit (ARL) in Smith's sense: the spacing `δ` with
//! `δ² = CRB(δ)`.
//!
//! The model is expanded to second order around `Δ = 0`,
//! `v(t) ≈ ρ₁(t)(α₁+α₂) + jα₂Δ·ρ₂(t) − α₂Δ²·ρ₃(t)`, which makes the CRB a
//! closed-form function of `Δ` and the Smith equation a quartic in `δ`.
//! [`arl_exact`] solves the Smith equation on the full model instead.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use nalgebra::{ComplexField, DMatrix};

use crate::bounds::{fim_target_block, kappa, nu, FimBlock};
use crate::clutter::{SpeckleCovariance, TextureFamily};
use crate::error::{Error, Result};
use crate::linalg::HermitianEigen;
use crate::radar_model::{steering_derivatives, steering_vector, RadarScene};
use crate::{CMatrix, CVector, Scalar};

pub const DEFAULT_EXACT_TOL: f64 = 1e-6;
pub const MAX_EXACT_ITERS: usize = 200;

#[derive(Clone, Debug)]
pub struct LinearizedModel<T: Scalar> {
    /// `a_R a_Tᵀ`.
    pub r1: CMatrix<T>,
    /// `ȧ_R a_Tᵀ + a_R ȧ_Tᵀ`.
    pub r2: CMatrix<T>,
    /// `ȧ_R ȧ_Tᵀ + ½ä_R a_Tᵀ + ½a_R ä_Tᵀ`.
    pub r3: CMatrix<T>,
    /// `ρ_i` stacked over snapshots (length `N·T`).
    pub rho: [CVector<T>; 3],
    /// `γ_ij = ρ_iᴴ (I_T ⊗ Σ^{−1}) ρ_j`.
    pub gram: CMatrix<T>,
}

/// Second-order expansion at `ω₁` (the scene's `Δ` is ignored).
pub fn linearize<T: Scalar>(scene: &RadarScene<T>, cov: &SpeckleCovariance<T>) -> Result<LinearizedModel<T>> {
    scene.validate()?;
    let g = &scene.geometry;
    if cov.dim() != g.n() {
        return Err(Error::Dimension("covariance size differs from the receive array".into()));
    }
    let w = scene.omega1;
    let (ar, at) = (steering_vector(g.rx_offsets(), w), steering_vector(g.tx_offsets(), w));
    let (dar, ddar) = steering_derivatives(g.rx_offsets(), w);
    let (dat, ddat) = steering_derivatives(g.tx_offsets(), w);
    let half = Complex::new(T::of(0.5), T::zero());
    let r1 = &ar * at.transpose();
    let r2 = &dar * at.transpose() + &ar * dat.transpose();
    let r3 = &dar * dat.transpose() + (&ddar * at.transpose()) * half + (&ar * ddat.transpose()) * half;

    let stack = |r: &CMatrix<T>| {
        let m = r * &scene.waveform;
        CVector::from_column_slice(m.as_slice())
    };
    let rho = [stack(&r1), stack(&r2), stack(&r3)];

    let inv = HermitianEigen::new(&cov.full(), cov.dim()).pinv();
    let (n, t) = (g.n(), scene.snapshots());
    let whiten = |v: &CVector<T>| {
        let m = CMatrix::from_column_slice(n, t, v.as_slice());
        CVector::from_column_slice((&inv * m).as_slice())
    };
    let ups_rho: Vec<CVector<T>> = rho.iter().map(whiten).collect();
    let mut gram = CMatrix::from_fn(3, 3, |i, j| rho[i].dotc(&ups_rho[j]));
    // exact Hermitian symmetry with a real diagonal
    for i in 0..3 {
        gram[(i, i)] = Complex::new(gram[(i, i)].re, T::zero());
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)].conj();
        }
    }
    Ok(LinearizedModel { r1, r2, r3, rho, gram })
}

impl<T: Scalar> LinearizedModel<T> {
    fn g(&self, i: usize, j: usize) -> Complex<T> {
        self.gram[(i - 1, j - 1)]
    }

    /// `v(t)` of the expanded model as an `N×T` matrix.
    pub fn response(&self, n: usize, delta: T, alpha1: Complex<T>, alpha2: Complex<T>) -> CMatrix<T> {
        let j = Complex::new(T::zero(), T::one());
        let d = Complex::new(delta, T::zero());
        let v = &self.rho[0] * (alpha1 + alpha2) + &self.rho[1] * (j * alpha2 * d) - &self.rho[2] * (alpha2 * d * d);
        CMatrix::from_column_slice(n, v.len() / n, v.as_slice())
    }

    /// `det Γ`.
    pub fn gram_determinant(&self) -> T {
        let (g11, g22, g33) = (self.g(1, 1).re, self.g(2, 2).re, self.g(3, 3).re);
        let (g12, g13, g23) = (self.g(1, 2), self.g(1, 3), self.g(2, 3));
        g11 * g22 * g33 + T::of(2.0) * (g13 * g12.conj() * g23.conj()).re
            - g11 * g23.modulus_squared()
            - g22 * g13.modulus_squared()
            - g33 * g12.modulus_squared()
    }
}

/// `Φ′` of the expanded model; `info_scale` is `κ/N` (CRB) or `ν`
/// (MCRB/HCRB).
pub fn phi_prime<T: Scalar>(lin: &LinearizedModel<T>, delta: T, alpha2: Complex<T>, info_scale: T) -> FimBlock<T> {
    let w = T::of(2.0) * info_scale;
    let d = delta;
    let d2 = d * d;
    let d3 = d2 * d;
    let (two, three, four) = (T::of(2.0), T::of(3.0), T::of(4.0));
    let (ar, ai) = (alpha2.re, alpha2.im);
    let g11 = lin.g(1, 1).re;
    let g22 = lin.g(2, 2).re;
    let g33 = lin.g(3, 3).re;
    let (r12, i12) = (lin.g(1, 2).re, lin.g(1, 2).im);
    let (r13, i13) = (lin.g(1, 3).re, lin.g(1, 3).im);
    let (r23, i23) = (lin.g(2, 3).re, lin.g(2, 3).im);

    let f11 = w * alpha2.modulus_squared() * (g22 - four * d * i23 + four * d2 * g33);
    let f22 = w * g11;
    let f44 = w * (g11 - two * d * i12 + d2 * g22 - two * d2 * r13 - two * d3 * i23 + d2 * d2 * g33);
    let f12 = w * (-ar * i12 - ai * r12 - two * d * ar * r13 + two * d * ai * i13);
    let f13 = w * (ar * r12 - ai * i12 - two * d * ar * i13 - two * d * ai * r13);
    let f14 = w
        * (-ar * i12 - ai * r12 + d * ar * g22 - two * d * ar * r13 + two * d * ai * i13 - d2 * ai * r23
            - three * d2 * ar * i23
            + two * d3 * ar * g33);
    let f15 = w
        * (ar * r12 - ai * i12 + d * ai * g22 - two * d * ar * i13 - two * d * ai * r13 + d2 * ar * r23
            - three * d2 * ai * i23
            + two * d3 * ai * g33);
    let f24 = w * (g11 - d * i12 - d2 * r13);
    let f25 = w * (-d * r12 + d2 * i13);
    let z = T::zero();

    #[rustfmt::skip]
    let phi = DMatrix::from_row_slice(5, 5, &[
        f11, f12, f13, f14, f15,
        f12, f22, z,   f24, f25,
        f13, z,   f22, -f25, f24,
        f14, f24, -f25, f44, z,
        f15, f25, f24, z,   f44,
    ]);
    FimBlock { phi }
}

/// Closed-form `[Φ′^{−1}]₁₁ = 1/(φ′₁₁ + Q)`.
///
/// `Q` is the Schur-complement correction
/// `[φ′₄₄(φ′₁₂²+φ′₁₃²) + φ′₂₂(φ′₁₄²+φ′₁₅²) − 2φ′₂₄(φ′₁₂φ′₁₄+φ′₁₃φ′₁₅)
///  − 2φ′₂₅(φ′₁₂φ′₁₅−φ′₁₃φ′₁₄)] / (φ′₂₄²+φ′₂₅²−φ′₂₂φ′₄₄)`.
pub fn crb_analytic<T: Scalar>(lin: &LinearizedModel<T>, delta: T, alpha2: Complex<T>, info_scale: T) -> Result<T> {
    let p = phi_prime(lin, delta, alpha2, info_scale).phi;
    let f = |i: usize, j: usize| p[(i - 1, j - 1)];
    let den = f(2, 4) * f(2, 4) + f(2, 5) * f(2, 5) - f(2, 2) * f(4, 4);
    if den == T::zero() || !den.is_finite() {
        return Err(Error::Singular("degenerate geometry: φ′₂₄² + φ′₂₅² − φ′₂₂φ′₄₄ = 0".into()));
    }
    let two = T::of(2.0);
    let num = f(4, 4) * (f(1, 2) * f(1, 2) + f(1, 3) * f(1, 3)) + f(2, 2) * (f(1, 4) * f(1, 4) + f(1, 5) * f(1, 5))
        - two * f(2, 4) * f(1, 2) * f(1, 4)
        - two * f(2, 5) * f(1, 2) * f(1, 5)
        + two * f(2, 5) * f(1, 3) * f(1, 4)
        - two * f(2, 4) * f(1, 3) * f(1, 5);
    Ok(T::one() / (f(1, 1) + num / den))
}

/// Quartic `Aδ⁴ − Bδ² − C = 0` and its positive root.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quartic<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub delta: T,
    /// `|Aδ⁴ − Bδ² − C| / (Aδ⁴)`.
    pub residual: T,
}

impl<T: Scalar> Quartic<T> {
    pub fn eval(&self, x: T) -> T {
        let x2 = x * x;
        self.a * x2 * x2 - self.b * x2 - self.c
    }
}

fn quartic<T: Scalar>(lin: &LinearizedModel<T>, alpha2: Complex<T>, info_scale: T) -> Result<Quartic<T>> {
    let g11 = lin.g(1, 1).re;
    let a = T::of(2.0) * info_scale * alpha2.modulus_squared() * lin.gram_determinant();
    let b = g11 * lin.g(3, 3).re - lin.g(1, 3).modulus_squared();
    let c = g11 * lin.g(2, 2).re - lin.g(1, 2).modulus_squared();
    if !(a > T::zero()) {
        return Err(Error::Singular(format!("quartic leading coefficient A = {a} is not positive")));
    }
    let disc = (b * b + T::of(4.0) * a * c).sqrt();
    let delta = ((b + disc) / (T::of(2.0) * a)).sqrt();
    let d4 = delta * delta * delta * delta;
    let residual = ((a * d4 - b * delta * delta - c) / (a * d4)).abs();
    Ok(Quartic { a, b, c, delta, residual })
}

/// Closed-form ARL with the CRB weight `κ/N`.
pub fn arl_closed_form<T: Scalar>(lin: &LinearizedModel<T>, alpha2: Complex<T>, kappa: f64, n: usize) -> Result<Quartic<T>> {
    quartic(lin, alpha2, T::of(kappa / n as f64))
}

/// Asymptotic ARL `(C/A)^{1/4}`.
pub fn arl_asymptotic<T: Scalar>(lin: &LinearizedModel<T>, alpha2: Complex<T>, kappa: f64, n: usize) -> Result<T> {
    let q = quartic(lin, alpha2, T::of(kappa / n as f64))?;
    Ok((q.c / q.a).sqrt().sqrt())
}

/// Closed-form ARL from the MCRB/HCRB, i.e. with `κ/N` replaced by `ν`.
pub fn arl_from_mcrb<T: Scalar>(lin: &LinearizedModel<T>, alpha2: Complex<T>, nu: f64) -> Result<Quartic<T>> {
    quartic(lin, alpha2, T::of(nu))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactArl<T> {
    pub delta: T,
    pub iterations: usize,
    /// `Δ_k` for every iterate, starting from the seed.
    pub trace: Vec<T>,
}

/// Fixed point of `Δ ← √CRB(Δ)` on the full model with FIM weight
/// `weight`, started at `start`.
///
/// Near the root `√CRB(Δ) ≈ c/Δ`, so the plain iteration has slope −1
/// and cycles; once the update changes sign the step is halved for the
/// rest of the run. Stops when `|Δ² − CRB(Δ)| < tol·Δ²`.
pub fn smith_fixed_point<T: Scalar>(
    scene: &RadarScene<T>,
    cov: &SpeckleCovariance<T>,
    weight: T,
    start: T,
    tol: T,
) -> Result<ExactArl<T>> {
    if !(tol > T::zero()) {
        return Err(Error::invalid("tol", "tolerance must be positive"));
    }
    if !(start > T::zero()) {
        return Err(Error::invalid("start", "initial spacing must be positive"));
    }
    let crb = |d: T| fim_target_block(&scene.with_delta(d), cov, weight)?.delta_bound();
    let mut d = start;
    let mut damping = T::one();
    let mut last_step: Option<T> = None;
    let mut trace = vec![d];
    for k in 0..MAX_EXACT_ITERS {
        let c = crb(d)?;
        if !(c > T::zero()) {
            return Err(Error::Singular(format!("non-positive CRB at Δ = {d}")));
        }
        if (d * d - c).abs() < tol * d * d {
            return Ok(ExactArl { delta: d, iterations: k, trace });
        }
        let step = c.sqrt() - d;
        if last_step.is_some_and(|s| s * step < T::zero()) {
            damping = T::of(0.5);
        }
        last_step = Some(step);
        d += damping * step;
        trace.push(d);
    }
    Err(Error::NoConvergence { what: "Smith fixed point", iterations: MAX_EXACT_ITERS })
}

/// Exact ARL for a texture family, seeded at the closed-form root.
pub fn arl_exact<T: Scalar>(
    scene: &RadarScene<T>,
    cov: &SpeckleCovariance<T>,
    family: &TextureFamily,
    tol: T,
) -> Result<ExactArl<T>> {
    let n = scene.geometry.n();
    let k = kappa(family, n)?;
    let lin = linearize(scene, cov)?;
    let seed = arl_closed_form(&lin, scene.alpha2, k, n)?.delta;
    smith_fixed_point(scene, cov, T::of(2.0 * k / n as f64), seed, tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArlReport<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub delta_closed: T,
    pub delta_asymptotic: T,
    pub delta_exact: T,
    pub quartic_residual: T,
    /// Closed-form ARL from the MCRB weight, when `ν` exists.
    pub delta_mcrb: Option<T>,
}

/// Closed-form, asymptotic and exact ARL for one scene.
pub fn arl_report<T: Scalar>(scene: &RadarScene<T>, cov: &SpeckleCovariance<T>, family: &TextureFamily, tol: T) -> Result<ArlReport<T>> {
    let n = scene.geometry.n();
    let k = kappa(family, n)?;
    let lin = linearize(scene, cov)?;
    let q = arl_closed_form(&lin, scene.alpha2, k, n)?;
    let asym = (q.c / q.a).sqrt().sqrt();
    let exact = smith_fixed_point(scene, cov, T::of(2.0 * k / n as f64), q.delta, tol)?;
    let delta_mcrb = match nu(family) {
        Ok(v) => Some(arl_from_mcrb(&lin, scene.alpha2, v)?.delta),
        Err(_) => None,
    };
    Ok(ArlReport {
        a: q.a,
        b: q.b,
        c: q.c,
        delta_closed: q.delta,
        delta_asymptotic: asym,
        delta_exact: exact.delta,
        quartic_residual: q.residual,
        delta_mcrb,
    })
}
