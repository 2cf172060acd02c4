//! Colocated MIMO array model: steering vectors, the two-target noise-free
//! response and its derivatives with respect to `μ = [Δ, Re α₁, Im α₁, Re α₂, Im α₂]`.
//!
//! Sensor positions are in half-wavelength units, so sensor `k` sees phase
//! `ω·d_k` for electrical angle `ω`. A uniform half-wavelength array has
//! offsets `0, 1, …, M−1`, and a physical direction `θ` maps to
//! `ω = π·sin θ`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::cis;
use crate::{CMatrix, CVector, Scalar};

/// Electrical angle for a physical direction in degrees on a half-wavelength
/// grid.
pub fn electrical_angle(direction_deg: f64) -> f64 {
    std::f64::consts::PI * direction_deg.to_radians().sin()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry<T> {
    tx_offsets: Vec<T>,
    rx_offsets: Vec<T>,
}

impl<T: Scalar> ArrayGeometry<T> {
    pub fn new(tx_offsets: Vec<T>, rx_offsets: Vec<T>) -> Result<Self> {
        check_offsets("tx_offsets", &tx_offsets)?;
        check_offsets("rx_offsets", &rx_offsets)?;
        Ok(ArrayGeometry { tx_offsets, rx_offsets })
    }

    /// Uniform linear arrays with half-wavelength spacing.
    pub fn uniform(m: usize, n: usize) -> Result<Self> {
        let ula = |k: usize| (0..k).map(|i| T::of(i as f64)).collect::<Vec<_>>();
        Self::new(ula(m), ula(n))
    }

    pub fn tx_offsets(&self) -> &[T] {
        &self.tx_offsets
    }

    pub fn rx_offsets(&self) -> &[T] {
        &self.rx_offsets
    }

    /// Number of transmit sensors `M`.
    pub fn m(&self) -> usize {
        self.tx_offsets.len()
    }

    /// Number of receive sensors `N`.
    pub fn n(&self) -> usize {
        self.rx_offsets.len()
    }
}

fn check_offsets<T: Scalar>(name: &'static str, d: &[T]) -> Result<()> {
    if d.len() < 2 {
        return Err(Error::invalid(name, "at least two sensors are required"));
    }
    if d[0] != T::zero() {
        return Err(Error::invalid(name, "the reference sensor must sit at offset 0"));
    }
    if d.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(name, "offsets must be strictly increasing"));
    }
    Ok(())
}

/// Two-target scene: target 1 at the known electrical angle `omega1`, target
/// 2 at `omega1 + delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadarScene<T: Scalar> {
    pub geometry: ArrayGeometry<T>,
    pub omega1: T,
    pub delta: T,
    pub alpha1: Complex<T>,
    pub alpha2: Complex<T>,
    /// `M×T` transmitted waveform; column `t` is `s(t)`.
    pub waveform: CMatrix<T>,
}

impl<T: Scalar> RadarScene<T> {
    pub fn new(
        geometry: ArrayGeometry<T>,
        omega1: T,
        delta: T,
        alpha1: Complex<T>,
        alpha2: Complex<T>,
        waveform: CMatrix<T>,
    ) -> Result<Self> {
        let scene = RadarScene { geometry, omega1, delta, alpha1, alpha2, waveform };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        if self.waveform.nrows() != self.geometry.m() {
            return Err(Error::Dimension(format!(
                "waveform has {} rows but the transmit array has {} sensors",
                self.waveform.nrows(),
                self.geometry.m()
            )));
        }
        if self.waveform.ncols() == 0 {
            return Err(Error::invalid("waveform", "at least one snapshot is required"));
        }
        if !self.delta.is_finite() || !self.omega1.is_finite() {
            return Err(Error::invalid("delta", "angles must be finite"));
        }
        if self
            .waveform
            .column_iter()
            .any(|col| col.iter().all(|z| z.re == T::zero() && z.im == T::zero()))
        {
            return Err(Error::invalid("waveform", "all-zero snapshot column"));
        }
        Ok(())
    }

    pub fn snapshots(&self) -> usize {
        self.waveform.ncols()
    }

    pub fn with_delta(&self, delta: T) -> Self {
        RadarScene { delta, ..self.clone() }
    }

    /// Total transmitted energy `Σ_t ‖s(t)‖²`.
    pub fn waveform_energy(&self) -> T {
        self.waveform.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }
}

/// `a(ω)` with elements `exp(j·ω·d_k)`.
pub fn steering_vector<T: Scalar>(offsets: &[T], omega: T) -> CVector<T> {
    CVector::from_iterator(
        offsets.len(),
        offsets.iter().map(|&d| cis(omega * d)),
    )
}

/// `(ȧ, ä) = (a ⊙ d, a ⊙ d ⊙ d)`, so that `∂a/∂ω = j·ȧ` and `∂²a/∂ω² = −ä`.
pub fn steering_derivatives<T: Scalar>(offsets: &[T], omega: T) -> (CVector<T>, CVector<T>) {
    let a = steering_vector(offsets, omega);
    let first = CVector::from_iterator(
        offsets.len(),
        a.iter().zip(offsets).map(|(z, &d)| z.scale(d)),
    );
    let second = CVector::from_iterator(
        offsets.len(),
        first.iter().zip(offsets).map(|(z, &d)| z.scale(d)),
    );
    (first, second)
}

/// `N×T` matrix whose column `t` is `a_R (a_Tᵀ s(t))`.
pub fn rank_one_response<T: Scalar>(a_rx: &CVector<T>, a_tx: &CVector<T>, waveform: &CMatrix<T>) -> CMatrix<T> {
    let gains = a_tx.transpose() * waveform;
    a_rx * gains
}

/// Same as [`rank_one_response`] but for a general `N×M` mixing matrix `R`.
pub fn mixed_response<T: Scalar>(mix: &CMatrix<T>, waveform: &CMatrix<T>) -> CMatrix<T> {
    mix * waveform
}

/// Noise-free snapshots `v(t) = α₁ b₁(t) + α₂ b₂(t, Δ)` plus the stacked
/// regressors.
#[derive(Clone, Debug)]
pub struct TargetResponse<T: Scalar> {
    /// `N×T` noise-free snapshots.
    pub v: CMatrix<T>,
    /// `b₁(t)` stacked over `t` (length `N·T`).
    pub b1: CVector<T>,
    /// `b₂(t, Δ)` stacked over `t`.
    pub b2: CVector<T>,
}

impl<T: Scalar> TargetResponse<T> {
    /// `N·T × 2` regression matrix `[b₁, b₂]`.
    pub fn regressors(&self) -> CMatrix<T> {
        CMatrix::from_columns(&[self.b1.clone(), self.b2.clone()])
    }
}

fn stack<T: Scalar>(m: &CMatrix<T>) -> CVector<T> {
    CVector::from_column_slice(m.as_slice())
}

/// Columns `b₁(t)` and `b₂(t, Δ)` as `N×T` matrices.
pub fn target_columns<T: Scalar>(scene: &RadarScene<T>, delta: T) -> (CMatrix<T>, CMatrix<T>) {
    let g = &scene.geometry;
    let w1 = scene.omega1;
    let w2 = scene.omega1 + delta;
    let b1 = rank_one_response(
        &steering_vector(g.rx_offsets(), w1),
        &steering_vector(g.tx_offsets(), w1),
        &scene.waveform,
    );
    let b2 = rank_one_response(
        &steering_vector(g.rx_offsets(), w2),
        &steering_vector(g.tx_offsets(), w2),
        &scene.waveform,
    );
    (b1, b2)
}

pub fn target_response<T: Scalar>(scene: &RadarScene<T>) -> TargetResponse<T> {
    let (b1, b2) = target_columns(scene, scene.delta);
    let v = &b1 * scene.alpha1 + &b2 * scene.alpha2;
    TargetResponse { v, b1: stack(&b1), b2: stack(&b2) }
}

/// `∂v(t)/∂μ_i` for `μ = [Δ, Re α₁, Im α₁, Re α₂, Im α₂]`, each as an `N×T`
/// matrix.
pub fn response_jacobian<T: Scalar>(scene: &RadarScene<T>) -> [CMatrix<T>; 5] {
    let g = &scene.geometry;
    let w2 = scene.omega1 + scene.delta;
    let (b1, b2) = target_columns(scene, scene.delta);
    let a_r = steering_vector(g.rx_offsets(), w2);
    let a_t = steering_vector(g.tx_offsets(), w2);
    let (da_r, _) = steering_derivatives(g.rx_offsets(), w2);
    let (da_t, _) = steering_derivatives(g.tx_offsets(), w2);
    let mix = &da_r * a_t.transpose() + &a_r * da_t.transpose();
    let j = Complex::new(T::zero(), T::one());
    let d_delta = mixed_response(&mix, &scene.waveform) * (scene.alpha2 * j);
    let jb1 = &b1 * j;
    let jb2 = &b2 * j;
    [d_delta, b1, jb1, b2, jb2]
}
