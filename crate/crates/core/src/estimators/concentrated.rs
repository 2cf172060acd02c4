//! Concentrated criterion in `Δ`: whitened least squares on the two target
//! regressors, and the one-dimensional search over `Δ`.

use nalgebra::{ComplexField, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::HermitianEigen;
use crate::radar_model::{steering_vector, RadarScene};
use crate::{CMatrix, Scalar};

use super::EstimatorOptions;

/// Relative ridge added to the 2×2 Gram matrix before inversion.
pub const GRAM_RIDGE: f64 = 1e-12;
/// Gram matrices with `λ_min/λ_max` below this are flagged.
pub const GRAM_FLAG_RCOND: f64 = 1e-10;

/// Whitening by `G^{−1/2}` with `G = diag(τ) ⊗ Σ`, using a pseudoinverse
/// square root of `Σ` so rank-deficient covariances (`T < N`) still work.
#[derive(Clone, Debug)]
pub struct Whitener<T: Scalar> {
    /// `Σ^{−1/2}` (pseudo).
    pub inv_sqrt: CMatrix<T>,
    /// `Σ^{−1}` (pseudo).
    pub pinv: CMatrix<T>,
    /// Log pseudo-determinant of `Σ`.
    pub ln_det: T,
    /// `τ(t)^{−1/2}`.
    pub tau_inv_sqrt: DVector<T>,
}

impl<T: Scalar> Whitener<T> {
    pub fn new(sigma: &CMatrix<T>, tau: &DVector<T>) -> Result<Self> {
        if !sigma.is_square() {
            return Err(Error::Dimension("covariance must be square".into()));
        }
        if tau.iter().any(|&x| !(x > T::zero())) {
            return Err(Error::invalid("tau", "texture values must be positive"));
        }
        let eig = HermitianEigen::new(sigma, sigma.nrows().max(tau.len()));
        if eig.rank() == 0 {
            return Err(Error::Singular("covariance estimate is zero".into()));
        }
        Ok(Whitener {
            inv_sqrt: eig.inv_sqrt(),
            pinv: eig.pinv(),
            ln_det: eig.ln_pdet(),
            tau_inv_sqrt: tau.map(|x| T::one() / x.sqrt()),
        })
    }

    /// `Σ^{−1/2}·X·diag(τ)^{−1/2}`.
    pub fn apply(&self, x: &CMatrix<T>) -> CMatrix<T> {
        let mut out = &self.inv_sqrt * x;
        for (mut col, &s) in out.column_iter_mut().zip(self.tau_inv_sqrt.iter()) {
            col.scale_mut(s);
        }
        out
    }
}

/// Whitened fit at a fixed `Δ`.
#[derive(Clone, Debug)]
pub struct Fit<T: Scalar> {
    pub delta: T,
    pub alpha: [Complex<T>; 2],
    /// `‖Π⊥ y̌‖²`.
    pub objective: T,
    pub ill_conditioned: bool,
}

/// The concentrated least-squares problem for fixed `(τ, Σ)`.
pub struct Concentrated<'a, T: Scalar> {
    scene: &'a RadarScene<T>,
    whitener: &'a Whitener<T>,
    y_white: CMatrix<T>,
    b1_white: CMatrix<T>,
}

impl<'a, T: Scalar> Concentrated<'a, T> {
    pub fn new(y: &CMatrix<T>, scene: &'a RadarScene<T>, whitener: &'a Whitener<T>) -> Result<Self> {
        let (n, t) = (scene.geometry.n(), scene.snapshots());
        if y.nrows() != n || y.ncols() != t {
            return Err(Error::Dimension(format!(
                "observations are {}×{} but the scene expects {n}×{t}",
                y.nrows(),
                y.ncols()
            )));
        }
        if whitener.inv_sqrt.nrows() != n || whitener.tau_inv_sqrt.len() != t {
            return Err(Error::Dimension("whitener does not match the observation size".into()));
        }
        let b1_white = whitener.apply(&target_block(scene, scene.omega1));
        Ok(Concentrated { scene, whitener, y_white: whitener.apply(y), b1_white })
    }

    fn b2_white(&self, delta: T) -> CMatrix<T> {
        self.whitener.apply(&target_block(self.scene, self.scene.omega1 + delta))
    }

    /// Whitened residual `Π⊥ y̌` (as an `N×T` matrix) and the fit.
    pub fn residual(&self, delta: T) -> (CMatrix<T>, Fit<T>) {
        let b2 = self.b2_white(delta);
        let (alpha, ill_conditioned) = solve_2x2(&self.b1_white, &b2, &self.y_white);
        let mut r = self.y_white.clone();
        r -= &self.b1_white * alpha[0];
        r -= &b2 * alpha[1];
        let objective = r.norm_squared();
        (r, Fit { delta, alpha, objective, ill_conditioned })
    }

    pub fn fit(&self, delta: T) -> Fit<T> {
        self.residual(delta).1
    }

    /// Grid search, golden-section refinement around the best grid point,
    /// and optionally a previous estimate as an extra candidate.
    pub fn minimize(&self, opts: &EstimatorOptions<T>, previous: Option<T>) -> SearchOutcome<T> {
        let (lo, hi) = (opts.search_lo, opts.search_hi);
        let m = opts.grid_points;
        let step = (hi - lo) / T::of((m - 1) as f64);
        let grid = |k: usize| if k + 1 == m { hi } else { lo + step * T::of(k as f64) };
        let mut best_k = 0;
        let mut best_val = T::max_value().unwrap_or_else(T::one);
        for k in 0..m {
            let v = self.fit(grid(k)).objective;
            if v < best_val {
                best_val = v;
                best_k = k;
            }
        }
        let left = grid(best_k.saturating_sub(1));
        let right = grid((best_k + 1).min(m - 1));
        let refined = golden_section(|d| self.fit(d).objective, left, right, opts.refine_tol);
        let mut best = self.fit(refined);
        let grid_best = self.fit(grid(best_k));
        if grid_best.objective < best.objective {
            best = grid_best;
        }
        if let Some(prev) = previous {
            if prev >= lo && prev <= hi {
                let f = self.fit(prev);
                if f.objective < best.objective {
                    best = f;
                }
            }
        }
        let at_boundary = (best.delta - lo).abs() <= opts.refine_tol || (hi - best.delta).abs() <= opts.refine_tol;
        SearchOutcome { fit: best, at_boundary }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome<T: Scalar> {
    pub fit: Fit<T>,
    /// The minimiser sits on an end of the search interval.
    pub at_boundary: bool,
}

/// `N×T` matrix with columns `a_R(ω)a_T(ω)ᵀ s(t)`.
pub(crate) fn target_block<T: Scalar>(scene: &RadarScene<T>, omega: T) -> CMatrix<T> {
    let g = &scene.geometry;
    let a_r = steering_vector(g.rx_offsets(), omega);
    let a_t = steering_vector(g.tx_offsets(), omega);
    let gains = a_t.transpose() * &scene.waveform;
    a_r * gains
}

fn inner<T: Scalar>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    a.iter().zip(b.iter()).fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

/// Ridge-regularised normal equations for two regressors.
fn solve_2x2<T: Scalar>(b1: &CMatrix<T>, b2: &CMatrix<T>, y: &CMatrix<T>) -> ([Complex<T>; 2], bool) {
    let g11 = b1.norm_squared();
    let g22 = b2.norm_squared();
    let g12 = inner(b1, b2);
    let h1 = inner(b1, y);
    let h2 = inner(b2, y);
    let ridge = T::of(GRAM_RIDGE) * (g11 + g22);
    let (d11, d22) = (g11 + ridge, g22 + ridge);
    let det = d11 * d22 - g12.modulus_squared();
    let zero = Complex::new(T::zero(), T::zero());
    if !(det > T::zero()) {
        return ([zero, zero], true);
    }
    let a1 = (h1 * d22 - g12 * h2) / Complex::new(det, T::zero());
    let a2 = (h2 * d11 - g12.conj() * h1) / Complex::new(det, T::zero());
    // eigenvalues of the (unregularised) Hermitian 2×2 Gram
    let mean = (g11 + g22) * T::of(0.5);
    let half_gap = (((g11 - g22) * T::of(0.5)).powi(2) + g12.modulus_squared()).sqrt();
    let (lmin, lmax) = (mean - half_gap, mean + half_gap);
    let ill = !(lmax > T::zero()) || lmin < T::of(GRAM_FLAG_RCOND) * lmax;
    ([a1, a2], ill)
}

/// Golden-section minimisation on `[a, b]` down to width `tol`.
pub fn golden_section<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> T {
    let inv_phi = T::of((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    (a + b) * T::of(0.5)
}

/// `‖Π⊥_{B̌(Δ)} y̌‖²` for explicit `(τ, Σ)`.
pub fn concentrated_objective<T: Scalar>(
    delta: T,
    y: &CMatrix<T>,
    scene: &RadarScene<T>,
    tau: &DVector<T>,
    sigma_norm: &CMatrix<T>,
) -> Result<T> {
    let w = Whitener::new(sigma_norm, tau)?;
    Ok(Concentrated::new(y, scene, &w)?.fit(delta).objective)
}

/// Generalised least-squares amplitudes `α̂ = (B̌ᴴB̌)^{−1}B̌ᴴy̌`.
pub fn gls_alpha<T: Scalar>(
    delta: T,
    y: &CMatrix<T>,
    scene: &RadarScene<T>,
    tau: &DVector<T>,
    sigma_norm: &CMatrix<T>,
) -> Result<[Complex<T>; 2]> {
    let w = Whitener::new(sigma_norm, tau)?;
    Ok(Concentrated::new(y, scene, &w)?.fit(delta).alpha)
}

/// Noise-free snapshots `α̂₁b₁(t) + α̂₂b₂(t, Δ̂)`.
pub fn fitted_response<T: Scalar>(scene: &RadarScene<T>, delta: T, alpha: &[Complex<T>; 2]) -> CMatrix<T> {
    target_block(scene, scene.omega1) * alpha[0] + target_block(scene, scene.omega1 + delta) * alpha[1]
}
