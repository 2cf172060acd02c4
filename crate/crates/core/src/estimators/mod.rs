//! Estimators of the angular spacing `Δ`: conventional ML (white Gaussian
//! clutter assumed), iterative ML (texture treated as deterministic) and
//! iterative MAP (gamma / inverse-gamma texture prior), all by stepwise
//! numerical concentration.
//!
//! Each iteration minimises the whitened projection residual over `Δ` for
//! fixed `(τ, Σ)`, then refreshes `Σ` and `τ` from the fitted response.
//! `Σ` estimates are always trace-normalised; the texture absorbs the
//! clutter power.

mod concentrated;
mod updates;

use nalgebra::DVector;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use concentrated::{
    concentrated_objective, fitted_response, gls_alpha, golden_section, Concentrated, Fit, SearchOutcome, Whitener,
    GRAM_FLAG_RCOND, GRAM_RIDGE,
};
pub use updates::{
    conditional_log_likelihood, quadratic_forms, solve_a, tau_map, update_b, update_sigma_map, update_sigma_ml,
    update_tau_map, update_tau_ml, SigmaUpdate, SHAPE_BRACKET, SHAPE_TOL, TAU_FLOOR,
};

use crate::clutter::{TextureFamily, TextureKind};
use crate::error::{Error, Result};
use crate::radar_model::RadarScene;
use crate::{CMatrix, Scalar};

pub const DEFAULT_MAX_ITERS: usize = 10;
pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_SEARCH_LO: f64 = 0.02;
pub const DEFAULT_SEARCH_HI: f64 = std::f64::consts::FRAC_PI_2;
pub const DEFAULT_GRID_POINTS: usize = 512;
pub const DEFAULT_REFINE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions<T> {
    pub max_iters: usize,
    /// Stop once `|Δ̂⁽ⁱ⁺¹⁾ − Δ̂⁽ⁱ⁾| < epsilon`.
    pub epsilon: T,
    pub search_lo: T,
    pub search_hi: T,
    pub grid_points: usize,
    pub refine_tol: T,
}

impl<T: Scalar> Default for EstimatorOptions<T> {
    fn default() -> Self {
        EstimatorOptions {
            max_iters: DEFAULT_MAX_ITERS,
            epsilon: T::of(DEFAULT_EPSILON),
            search_lo: T::of(DEFAULT_SEARCH_LO),
            search_hi: T::of(DEFAULT_SEARCH_HI),
            grid_points: DEFAULT_GRID_POINTS,
            refine_tol: T::of(DEFAULT_REFINE_TOL),
        }
    }
}

impl<T: Scalar> EstimatorOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.search_lo < self.search_hi) {
            return Err(Error::invalid("search_lo", "search interval must satisfy lo < hi"));
        }
        if self.grid_points < 8 {
            return Err(Error::invalid("grid_points", "at least 8 grid points are required"));
        }
        if !(self.epsilon > T::zero()) {
            return Err(Error::invalid("epsilon", "convergence threshold must be positive"));
        }
        if !(self.refine_tol > T::zero()) {
            return Err(Error::invalid("refine_tol", "refinement tolerance must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "at least one iteration is required"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord<T> {
    pub delta: T,
    /// Concentrated criterion at `Δ̂⁽ⁱ⁾` for the `(τ, Σ)` used in that search.
    pub objective: T,
    /// Conditional log-likelihood after the search of this iteration.
    pub log_likelihood: T,
}

#[derive(Clone, Debug)]
pub struct EstimationResult<T: Scalar> {
    pub delta_hat: T,
    pub alpha_hat: [Complex<T>; 2],
    /// Trace-one speckle covariance estimate.
    pub sigma_hat_norm: CMatrix<T>,
    pub tau_hat: DVector<T>,
    pub a_hat: Option<f64>,
    pub b_hat: Option<f64>,
    pub trace: Vec<IterationRecord<T>>,
    pub iterations_run: usize,
    pub converged: bool,
    /// The final `Δ̂` sits on an end of the search interval.
    pub at_boundary: bool,
    /// The regressor Gram matrix at `Δ̂` was nearly singular.
    pub ill_conditioned: bool,
    /// The shape root fell outside its bracket in some iteration and a
    /// fallback shape was used.
    pub shape_fallback: bool,
}

impl<T: Scalar> EstimationResult<T> {
    /// `Δ̂⁽ⁱ⁾`, if iteration `i` ran.
    pub fn delta_at(&self, i: usize) -> Option<T> {
        self.trace.get(i).map(|r| r.delta)
    }
}

enum Mode {
    Conventional,
    Ml,
    Map(TextureFamily),
}

fn check_inputs<T: Scalar>(y: &CMatrix<T>, scene: &RadarScene<T>, opts: &EstimatorOptions<T>) -> Result<()> {
    opts.validate()?;
    scene.validate()?;
    if y.nrows() != scene.geometry.n() || y.ncols() != scene.snapshots() {
        return Err(Error::Dimension(format!(
            "observations are {}×{} but the scene expects {}×{}",
            y.nrows(),
            y.ncols(),
            scene.geometry.n(),
            scene.snapshots()
        )));
    }
    if y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::invalid("observations", "non-finite sample"));
    }
    Ok(())
}

fn run<T: Scalar>(y: &CMatrix<T>, scene: &RadarScene<T>, mode: Mode, opts: &EstimatorOptions<T>) -> Result<EstimationResult<T>> {
    check_inputs(y, scene, opts)?;
    let (n, t) = (y.nrows(), y.ncols());
    let mut tau = DVector::from_element(t, T::one());
    let mut sigma = CMatrix::<T>::identity(n, n) * Complex::new(T::one() / T::of(n as f64), T::zero());
    let max_iters = if matches!(mode, Mode::Conventional) { 1 } else { opts.max_iters };

    let mut trace: Vec<IterationRecord<T>> = Vec::with_capacity(max_iters);
    let mut previous: Option<T> = None;
    let mut converged = false;
    let mut last: Option<SearchOutcome<T>> = None;
    let mut hyper: Option<(f64, f64)> = None;
    let mut shape_fallback = false;
    let mut prior_ready = false;

    for i in 0..max_iters {
        // Step 2: search Δ for fixed (τ, Σ), then α̂ and v̂.
        let whitener = Whitener::new(&sigma, &tau)?;
        let problem = Concentrated::new(y, scene, &whitener)?;
        let outcome = problem.minimize(opts, previous);
        let fit = &outcome.fit;
        let ln_tau: T = tau.iter().fold(T::zero(), |acc, x| acc + x.ln());
        let ll = -(T::of(t as f64) * whitener.ln_det) - T::of(n as f64) * ln_tau - fit.objective;
        trace.push(IterationRecord { delta: fit.delta, objective: fit.objective, log_likelihood: ll });
        let v_hat = fitted_response(scene, fit.delta, &fit.alpha);

        if let Mode::Map(prior) = &mode {
            let root = solve_a(&tau, prior.kind)?;
            prior_ready |= !root.at_boundary;
            let a = if root.at_boundary {
                shape_fallback = true;
                hyper.map(|(a, _)| a).unwrap_or(prior.a)
            } else {
                root.a
            };
            hyper = Some((a, update_b(&tau, a, prior.kind)?));
        }

        let delta_now = fit.delta;
        let done = previous.is_some_and(|p| (delta_now - p).abs() < opts.epsilon);
        last = Some(outcome);
        if done {
            converged = true;
            break;
        }
        if i + 1 == max_iters {
            break;
        }
        previous = Some(delta_now);

        // Step 3: refresh Σ, then τ with the new Σ.
        match &mode {
            Mode::Conventional => {}
            Mode::Ml => {
                sigma = update_sigma_ml(y, &v_hat, &sigma)?.sigma;
                tau = update_tau_ml(y, &v_hat, &sigma)?;
            }
            // no shape estimate yet: the prior would only inject the fallback
            Mode::Map(_) if !prior_ready => {
                sigma = update_sigma_ml(y, &v_hat, &sigma)?.sigma;
                tau = update_tau_ml(y, &v_hat, &sigma)?;
            }
            Mode::Map(prior) => {
                let (a, b) = hyper.expect("hyperparameters set in step 2");
                let fam = TextureFamily { kind: prior.kind, a, b };
                sigma = update_sigma_map(y, &v_hat, &sigma, &fam)?.sigma;
                tau = update_tau_map(y, &v_hat, &sigma, &fam)?;
            }
        }
    }

    let outcome = last.expect("at least one iteration runs");
    Ok(EstimationResult {
        delta_hat: outcome.fit.delta,
        alpha_hat: outcome.fit.alpha,
        sigma_hat_norm: sigma,
        tau_hat: tau,
        a_hat: hyper.map(|h| h.0),
        b_hat: hyper.map(|h| h.1),
        iterations_run: trace.len(),
        trace,
        converged,
        at_boundary: outcome.at_boundary,
        ill_conditioned: outcome.fit.ill_conditioned,
        shape_fallback,
    })
}

/// Conventional ML: a single search of `‖Π⊥_{B(Δ)} y‖²` with `τ ≡ 1` and
/// white speckle.
pub fn cmle<T: Scalar>(y: &CMatrix<T>, scene: &RadarScene<T>, opts: &EstimatorOptions<T>) -> Result<EstimationResult<T>> {
    run(y, scene, Mode::Conventional, opts)
}

/// Iterative ML estimator.
pub fn imle<T: Scalar>(y: &CMatrix<T>, scene: &RadarScene<T>, opts: &EstimatorOptions<T>) -> Result<EstimationResult<T>> {
    run(y, scene, Mode::Ml, opts)
}

/// Iterative MAP estimator for a K or t texture prior.
///
/// The shape and scale are re-estimated from the current texture estimates
/// in every iteration. When those carry no shape information (all equal, as
/// at initialisation) the shape root does not exist; the previous estimate,
/// or initially `family.a`, is reported instead and `shape_fallback` is set.
/// Until a shape root has been found, the `(Σ, τ)` refresh uses the ML
/// updates.
pub fn imape<T: Scalar>(
    y: &CMatrix<T>,
    scene: &RadarScene<T>,
    family: &TextureFamily,
    opts: &EstimatorOptions<T>,
) -> Result<EstimationResult<T>> {
    family.validate()?;
    if family.kind == TextureKind::Gaussian {
        return Err(Error::invalid("family", "the MAP estimator needs a K or t texture prior"));
    }
    run(y, scene, Mode::Map(*family), opts)
}
