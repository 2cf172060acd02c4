//! SIRP clutter synthesis: `n(t) = √τ(t)·x(t)` with gamma (K-clutter) or
//! inverse-gamma (t-clutter) texture and circular Gaussian speckle.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_hermitian, trace_re, HermitianEigen};
use crate::radar_model::RadarScene;
use crate::{CMatrix, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextureKind {
    /// Gamma texture.
    K,
    /// Inverse-gamma texture.
    T,
    /// `τ ≡ 1`.
    Gaussian,
}

impl fmt::Display for TextureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TextureKind::K => "k",
            TextureKind::T => "t",
            TextureKind::Gaussian => "gaussian",
        })
    }
}

impl FromStr for TextureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k" => Ok(TextureKind::K),
            "t" => Ok(TextureKind::T),
            "gaussian" | "g" => Ok(TextureKind::Gaussian),
            other => Err(Error::invalid("family", format!("unknown texture family `{other}` (expected k, t or gaussian)"))),
        }
    }
}

/// Texture law with shape `a` and scale `b` (ignored for Gaussian clutter).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextureFamily {
    pub kind: TextureKind,
    pub a: f64,
    pub b: f64,
}

impl TextureFamily {
    pub fn new(kind: TextureKind, a: f64, b: f64) -> Result<Self> {
        let fam = TextureFamily { kind, a, b };
        fam.validate()?;
        Ok(fam)
    }

    pub fn k(a: f64, b: f64) -> Result<Self> {
        Self::new(TextureKind::K, a, b)
    }

    pub fn t(a: f64, b: f64) -> Result<Self> {
        Self::new(TextureKind::T, a, b)
    }

    pub fn gaussian() -> Self {
        TextureFamily { kind: TextureKind::Gaussian, a: 1.0, b: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == TextureKind::Gaussian {
            return Ok(());
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::invalid("a", format!("shape must be positive, got {}", self.a)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::invalid("b", format!("scale must be positive, got {}", self.b)));
        }
        Ok(())
    }

    pub fn with_shape(self, a: f64) -> Self {
        TextureFamily { a, ..self }
    }

    pub fn with_scale(self, b: f64) -> Self {
        TextureFamily { b, ..self }
    }

    /// `E{τ}`: `ab` for K, `b/(a−1)` for t (needs `a > 1`), 1 for Gaussian.
    pub fn mean_texture(&self) -> Result<f64> {
        self.validate()?;
        match self.kind {
            TextureKind::K => Ok(self.a * self.b),
            TextureKind::T if self.a > 1.0 => Ok(self.b / (self.a - 1.0)),
            TextureKind::T => Err(Error::invalid("a", "t-clutter texture mean needs a > 1")),
            TextureKind::Gaussian => Ok(1.0),
        }
    }

    /// `Var{τ}`: `ab²` for K, `b²/((a−1)²(a−2))` for t (needs `a > 2`).
    pub fn texture_variance(&self) -> Option<f64> {
        match self.kind {
            TextureKind::K => Some(self.a * self.b * self.b),
            TextureKind::T if self.a > 2.0 => {
                Some(self.b * self.b / ((self.a - 1.0).powi(2) * (self.a - 2.0)))
            }
            TextureKind::T => None,
            TextureKind::Gaussian => Some(0.0),
        }
    }
}

/// Seeded generator for trial `stream` of experiment `seed`; streams are
/// independent so trials can run in any order.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `T` i.i.d. texture draws.
///
/// Both families are built from a unit-scale `Gamma(a, 1)` draw `g`
/// (`τ = b·g` for K, `τ = b/g` for t), so sweeps over `b` with a shared seed
/// see the same underlying randomness.
pub fn sample_texture<T: Scalar, R: Rng + ?Sized>(family: &TextureFamily, t: usize, rng: &mut R) -> Result<DVector<T>> {
    family.validate()?;
    if t == 0 {
        return Err(Error::invalid("T", "at least one snapshot is required"));
    }
    if family.kind == TextureKind::Gaussian {
        return Ok(DVector::from_element(t, T::one()));
    }
    let unit = Gamma::new(family.a, 1.0).map_err(|e| Error::invalid("a", e.to_string()))?;
    let draws = (0..t).map(|_| {
        let g: f64 = unit.sample(rng);
        let tau = match family.kind {
            TextureKind::K => family.b * g,
            _ => family.b / g,
        };
        T::of(tau.max(f64::MIN_POSITIVE))
    });
    Ok(DVector::from_iterator(t, draws))
}

/// Speckle covariance `Σ = σ²·Σ̌` with `tr Σ̌ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeckleCovariance<T: Scalar> {
    pub sigma_norm: CMatrix<T>,
    pub sigma2: T,
}

impl<T: Scalar> SpeckleCovariance<T> {
    /// Splits an arbitrary Hermitian PSD matrix into trace-one shape and
    /// power.
    pub fn from_full(sigma: CMatrix<T>) -> Result<Self> {
        let tr = trace_re(&sigma);
        if !(tr > T::zero()) {
            return Err(Error::invalid("sigma", "covariance must have positive trace"));
        }
        let inv = Complex::new(T::one() / tr, T::zero());
        Self::new(sigma * inv, tr)
    }

    pub fn new(sigma_norm: CMatrix<T>, sigma2: T) -> Result<Self> {
        let tol = T::of(1e-10);
        if !sigma_norm.is_square() || sigma_norm.nrows() == 0 {
            return Err(Error::Dimension("speckle covariance must be square and nonempty".into()));
        }
        if !is_hermitian(&sigma_norm, tol) {
            return Err(Error::invalid("sigma", "speckle covariance is not Hermitian"));
        }
        if (trace_re(&sigma_norm) - T::one()).abs() > tol {
            return Err(Error::invalid("sigma", "normalized speckle covariance must have unit trace"));
        }
        if !HermitianEigen::new(&sigma_norm, sigma_norm.nrows()).is_psd(tol) {
            return Err(Error::invalid("sigma", "speckle covariance is not positive semidefinite"));
        }
        if !(sigma2 >= T::zero()) {
            return Err(Error::invalid("sigma2", "power scale must be non-negative"));
        }
        Ok(SpeckleCovariance { sigma_norm, sigma2 })
    }

    /// `σ²·I_N / N` normalised form of a white covariance with per-sensor
    /// power `sigma2 / N`... i.e. `Σ = (sigma2/N)·I`.
    pub fn white(n: usize, sigma2: T) -> Result<Self> {
        let s = Complex::new(T::one() / T::of(n as f64), T::zero());
        Self::new(CMatrix::identity(n, n) * s, sigma2)
    }

    pub fn dim(&self) -> usize {
        self.sigma_norm.nrows()
    }

    /// `Σ = σ²·Σ̌`.
    pub fn full(&self) -> CMatrix<T> {
        &self.sigma_norm * Complex::new(self.sigma2, T::zero())
    }

    pub fn with_sigma2(&self, sigma2: T) -> Self {
        SpeckleCovariance { sigma_norm: self.sigma_norm.clone(), sigma2 }
    }

    /// Hermitian square root of `Σ`.
    pub fn sqrt_factor(&self) -> CMatrix<T> {
        HermitianEigen::new(&self.full(), self.dim()).sqrt()
    }
}

/// `[Σ]_{mn} = σ²·0.9^{|m−n|}·e^{j(π/2)(m−n)}`, stored as `(Σ/tr Σ, σ²·tr Σ)`.
pub fn toeplitz_sigma<T: Scalar>(n: usize, sigma2: T) -> Result<SpeckleCovariance<T>> {
    if n == 0 {
        return Err(Error::invalid("N", "at least one receive sensor is required"));
    }
    let raw = CMatrix::<T>::from_fn(n, n, |m, k| {
        let lag = m as f64 - k as f64;
        let mag = 0.9f64.powf(lag.abs());
        let z = Complex::from_polar(mag, std::f64::consts::FRAC_PI_2 * lag);
        Complex::new(T::of(z.re), T::of(z.im))
    });
    let tr = T::of(n as f64);
    let inv = Complex::new(T::one() / tr, T::zero());
    SpeckleCovariance::new(raw * inv, sigma2 * tr)
}

fn standard_complex_normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(T::of(re * s), T::of(im * s))
}

/// `N×T` matrix of i.i.d. `CN(0, Σ)` columns.
pub fn sample_speckle<T: Scalar, R: Rng + ?Sized>(cov: &SpeckleCovariance<T>, t: usize, rng: &mut R) -> Result<CMatrix<T>> {
    Ok(sample_speckle_with_factor(&cov.sqrt_factor(), t, rng))
}

/// Same as [`sample_speckle`] with a precomputed square-root factor.
pub fn sample_speckle_with_factor<T: Scalar, R: Rng + ?Sized>(factor: &CMatrix<T>, t: usize, rng: &mut R) -> CMatrix<T> {
    let n = factor.ncols();
    let white = CMatrix::<T>::from_fn(n, t, |_, _| standard_complex_normal(rng));
    factor * white
}

#[derive(Clone, Debug)]
pub struct ClutterDraw<T: Scalar> {
    pub tau: DVector<T>,
    pub n: CMatrix<T>,
}

pub fn sample_clutter<T: Scalar, R: Rng + ?Sized>(
    family: &TextureFamily,
    cov: &SpeckleCovariance<T>,
    t: usize,
    rng: &mut R,
) -> Result<ClutterDraw<T>> {
    sample_clutter_with_factor(family, &cov.sqrt_factor(), t, rng)
}

/// Texture is drawn before speckle so the texture sequence of a stream does
/// not depend on `N`.
pub fn sample_clutter_with_factor<T: Scalar, R: Rng + ?Sized>(
    family: &TextureFamily,
    factor: &CMatrix<T>,
    t: usize,
    rng: &mut R,
) -> Result<ClutterDraw<T>> {
    let tau = sample_texture::<T, R>(family, t, rng)?;
    let mut n = sample_speckle_with_factor(factor, t, rng);
    for (mut col, &tt) in n.column_iter_mut().zip(tau.iter()) {
        col.scale_mut(tt.sqrt());
    }
    Ok(ClutterDraw { tau, n })
}

/// Speckle power `σ²` giving the requested SCR
/// `Σ_t‖s(t)‖² / (T·E{τ}·σ²)` (with `tr Σ̌ = 1`).
pub fn sigma2_for_scr<T: Scalar>(scene: &RadarScene<T>, family: &TextureFamily, scr_db: f64) -> Result<T> {
    if !scr_db.is_finite() {
        return Err(Error::invalid("scr_db", "SCR must be finite"));
    }
    let mean_tau = family.mean_texture()?;
    let energy = scene.waveform_energy().as_f64();
    let t = scene.snapshots() as f64;
    Ok(T::of(energy / (t * mean_tau * 10f64.powf(scr_db / 10.0))))
}
