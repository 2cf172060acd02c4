//! Cramér-Rao-type bounds on `Δ`: the standard CRB (marginal likelihood),
//! the extended Miller-Chang bound (EMCB), and the modified and hybrid
//! bounds (MCRB, HCRB), plus the Gaussian-clutter reference CRB.
//!
//! All four share the `5×5` target block
//! `φ_ij = w·Σ_t Re{v_j(t)ᴴ Σ^{−1} v_i(t)}` and differ only in the weight:
//! `2κ/N` (CRB), `2ν` with `ν = E{1/τ}` (MCRB = HCRB), and `2/τ(t)` per
//! snapshot averaged after inversion (EMCB).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clutter::{sample_texture, stream_rng, SpeckleCovariance, TextureFamily, TextureKind};
use crate::error::{Error, Result};
use crate::linalg::{bilinear_re, HermitianEigen};
use crate::radar_model::{response_jacobian, RadarScene};
use crate::special::k_clutter_kappa_unit_scale;
use crate::{CVector, Scalar};

pub const DEFAULT_EMCB_DRAWS: usize = 2000;

/// Marginal-likelihood Fisher weight `κ`.
///
/// t: `N·a·(a+N)/(b·(a+N+1))`; K: Bessel-function integral (numerical);
/// Gaussian: `N`.
pub fn kappa(family: &TextureFamily, n: usize) -> Result<f64> {
    family.validate()?;
    if n == 0 {
        return Err(Error::invalid("N", "at least one receive sensor is required"));
    }
    let (a, b, nf) = (family.a, family.b, n as f64);
    match family.kind {
        TextureKind::T => Ok(nf * a * (a + nf) / (b * (a + nf + 1.0))),
        TextureKind::K => Ok(k_clutter_kappa_unit_scale(a, n)? / b),
        TextureKind::Gaussian => Ok(nf),
    }
}

/// `ν = E{1/τ}`: `1/(b(a−1))` for K (needs `a > 1`), `a/b` for t, 1 for
/// Gaussian clutter.
pub fn nu(family: &TextureFamily) -> Result<f64> {
    family.validate()?;
    let (a, b) = (family.a, family.b);
    match family.kind {
        TextureKind::K if a > 1.0 => Ok(1.0 / (b * (a - 1.0))),
        TextureKind::K => Err(Error::invalid("a", "E{1/τ} is infinite for K-clutter with a ≤ 1")),
        TextureKind::T => Ok(a / b),
        TextureKind::Gaussian => Ok(1.0),
    }
}

/// The alternative convention `2/(b(a−1))` (K) and `2a/b` (t), twice the
/// inverse-texture moment. Kept for comparison only: with it the CRB/MCRB
/// ratio for t-clutter is not `(a+N+1)/(a+N)`.
pub fn nu_printed(family: &TextureFamily) -> Result<f64> {
    family.validate()?;
    let (a, b) = (family.a, family.b);
    match family.kind {
        TextureKind::K if a > 1.0 => Ok(2.0 / (b * (a - 1.0))),
        TextureKind::K => Err(Error::invalid("a", "E{1/τ} is infinite for K-clutter with a ≤ 1")),
        TextureKind::T => Ok(2.0 * a / b),
        TextureKind::Gaussian => Ok(1.0),
    }
}

/// Monte Carlo estimate of `E{1/τ}` from `draws` texture samples.
pub fn nu_sampled<R: Rng + ?Sized>(family: &TextureFamily, draws: usize, rng: &mut R) -> Result<f64> {
    let tau: DVector<f64> = sample_texture(family, draws, rng)?;
    Ok(tau.iter().map(|x| 1.0 / x).sum::<f64>() / draws as f64)
}

/// Real symmetric `5×5` target-parameter block for
/// `μ = [Δ, Re α₁, Im α₁, Re α₂, Im α₂]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FimBlock<T: Scalar> {
    pub phi: DMatrix<T>,
}

impl<T: Scalar> FimBlock<T> {
    /// `[Φ^{−1}]₁₁` via Cholesky.
    pub fn delta_bound(&self) -> Result<T> {
        let chol = self
            .phi
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Singular("target FIM block is not positive definite".into()))?;
        let e1 = DVector::from_fn(5, |i, _| if i == 0 { T::one() } else { T::zero() });
        let x = chol.solve(&e1);
        Ok(x[0])
    }

    pub fn scaled(&self, w: T) -> Self {
        FimBlock { phi: &self.phi * w }
    }
}

/// `J_t,ij = Re{v_j(t)ᴴ Σ^{−1} v_i(t)}` for every snapshot (unit weight).
pub fn per_snapshot_information<T: Scalar>(scene: &RadarScene<T>, cov: &SpeckleCovariance<T>) -> Result<Vec<DMatrix<T>>> {
    scene.validate()?;
    if cov.dim() != scene.geometry.n() {
        return Err(Error::Dimension(format!(
            "covariance is {0}×{0} but the receive array has {1} sensors",
            cov.dim(),
            scene.geometry.n()
        )));
    }
    let eig = HermitianEigen::new(&cov.full(), cov.dim());
    if eig.rank() == 0 {
        return Err(Error::Singular("clutter covariance is zero".into()));
    }
    let inv = eig.pinv();
    let jac = response_jacobian(scene);
    let t = scene.snapshots();
    Ok((0..t)
        .map(|k| {
            let cols: Vec<CVector<T>> = jac.iter().map(|m| m.column(k).into_owned()).collect();
            DMatrix::from_fn(5, 5, |i, j| bilinear_re(&cols[j], &inv, &cols[i]))
        })
        .collect())
}

fn sum_weighted<T: Scalar>(blocks: &[DMatrix<T>], weights: impl Iterator<Item = T>) -> DMatrix<T> {
    let mut acc = DMatrix::zeros(5, 5);
    for (b, w) in blocks.iter().zip(weights) {
        acc += b * w;
    }
    // exact symmetry
    (&acc + acc.transpose()) * T::of(0.5)
}

/// `φ_ij = weight·Σ_t Re{v_j(t)ᴴ Σ^{−1} v_i(t)}`.
pub fn fim_target_block<T: Scalar>(scene: &RadarScene<T>, cov: &SpeckleCovariance<T>, weight: T) -> Result<FimBlock<T>> {
    if !(weight > T::zero()) {
        return Err(Error::invalid("weight", "FIM weight must be positive"));
    }
    let blocks = per_snapshot_information(scene, cov)?;
    Ok(FimBlock { phi: sum_weighted(&blocks, std::iter::repeat(weight)) })
}

fn require_nonzero_delta<T: Scalar>(scene: &RadarScene<T>) -> Result<()> {
    if scene.delta == T::zero() {
        return Err(Error::Singular("the target FIM is singular at Δ = 0".into()));
    }
    Ok(())
}

/// Standard CRB with weight `2κ/N`.
pub fn crb_standard<T: Scalar>(scene: &RadarScene<T>, cov: &SpeckleCovariance<T>, family: &TextureFamily) -> Result<T> {
    require_nonzero_delta(scene)?;
    let n = scene.geometry.n();
    let w = 2.0 * kappa(family, n)? / n as f64;
    fim_target_block(scene, cov, T::of(w))?.delta_bound()
}

/// CRB under Gaussian clutter of the same power, i.e. covariance `E{τ}·Σ`.
pub fn crb_gaussian<T: Scalar>(scene: &RadarScene<T>, cov: &SpeckleCovariance<T>, family: &TextureFamily) -> Result<T> {
    require_nonzero_delta(scene)?;
    let power = T::of(family.mean_texture()?);
    let g = cov.with_sigma2(cov.sigma2 * power);
    fim_target_block(scene, &g, T::of(2.0))?.delta_bound()
}

/// MCRB and HCRB, both `[Φ_M^{−1}]₁₁` with weight `2ν`; the pair is
/// identical because the hybrid information's target block equals the
/// modified one.
pub fn mcrb_hcrb<T: Scalar>(scene: &RadarScene<T>, cov: &SpeckleCovariance<T>, family: &TextureFamily) -> Result<(T, T)> {
    require_nonzero_delta(scene)?;
    let w = 2.0 * nu(family)?;
    let b = fim_target_block(scene, cov, T::of(w))?.delta_bound()?;
    Ok((b, b))
}

/// EMCB: mean over the supplied texture realisations of the conditional
/// CRB with weights `2/τ(t)`.
pub fn emcb_from_textures<T: Scalar>(scene: &RadarScene<T>, cov: &SpeckleCovariance<T>, draws: &[DVector<T>]) -> Result<T> {
    require_nonzero_delta(scene)?;
    if draws.is_empty() {
        return Err(Error::invalid("n_mc", "at least one texture draw is required"));
    }
    let blocks = per_snapshot_information(scene, cov)?;
    let mut acc = T::zero();
    for tau in draws {
        if tau.len() != blocks.len() {
            return Err(Error::Dimension("texture draw length differs from T".into()));
        }
        let phi = sum_weighted(&blocks, tau.iter().map(|&x| T::of(2.0) / x));
        acc += FimBlock { phi }.delta_bound()?;
    }
    Ok(acc / T::of(draws.len() as f64))
}

/// EMCB by Monte Carlo over `n_mc` texture draws; draw `k` uses stream `k`
/// of `seed`, and the average is accumulated in draw order.
pub fn emcb<T: Scalar>(
    scene: &RadarScene<T>,
    cov: &SpeckleCovariance<T>,
    family: &TextureFamily,
    n_mc: usize,
    seed: u64,
) -> Result<T> {
    if n_mc < 100 {
        return Err(Error::invalid("n_mc", "at least 100 texture draws are required"));
    }
    let t = scene.snapshots();
    let draws = (0..n_mc)
        .map(|k| sample_texture::<T, _>(family, t, &mut stream_rng(seed, k as u64)))
        .collect::<Result<Vec<_>>>()?;
    emcb_from_textures(scene, cov, &draws)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport<T> {
    pub crb: T,
    pub emcb: T,
    pub mcrb: T,
    pub hcrb: T,
    pub crb_gaussian: T,
    pub kappa: f64,
    pub nu: f64,
}

/// All bounds for one scene.
pub fn bounds_report<T: Scalar>(
    scene: &RadarScene<T>,
    cov: &SpeckleCovariance<T>,
    family: &TextureFamily,
    n_mc: usize,
    seed: u64,
) -> Result<BoundsReport<T>> {
    let (mcrb, hcrb) = mcrb_hcrb(scene, cov, family)?;
    Ok(BoundsReport {
        crb: crb_standard(scene, cov, family)?,
        emcb: emcb(scene, cov, family, n_mc, seed)?,
        mcrb,
        hcrb,
        crb_gaussian: crb_gaussian(scene, cov, family)?,
        kappa: kappa(family, scene.geometry.n())?,
        nu: nu(family)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clutter::{sigma2_for_scr, toeplitz_sigma};
    use crate::radar_model::{target_response, ArrayGeometry};
    use crate::CMatrix;
    use num_complex::Complex;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn scene(m: usize, n: usize, t: usize, seed: u64) -> RadarScene<f64> {
        let mut rng = stream_rng(seed, 1);
        let s = CMatrix::from_fn(m, t, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        RadarScene::new(ArrayGeometry::uniform(m, n).unwrap(), 1.3, 0.7, c(2.0, 0.5), c(1.0, -3.0), s).unwrap()
    }

    fn setup(fam: &TextureFamily, seed: u64) -> (RadarScene<f64>, SpeckleCovariance<f64>) {
        let sc = scene(5, 4, 6, seed);
        let s2 = sigma2_for_scr(&sc, fam, 0.0).unwrap();
        (sc.clone(), toeplitz_sigma(4, s2).unwrap())
    }

    #[test]
    fn kappa_examples() {
        let t = TextureFamily::t(1.1, 2.0).unwrap();
        assert!((kappa(&t, 4).unwrap() - 4.0 * 1.1 * 5.1 / (2.0 * 6.1)).abs() < 1e-15);
        assert!((kappa(&t, 4).unwrap() - 1.839_344_262_295_082).abs() < 1e-12);
        assert_eq!(kappa(&TextureFamily::gaussian(), 7).unwrap(), 7.0);
        let k = TextureFamily::k(2.0, 10.0).unwrap();
        assert!((kappa(&k, 4).unwrap() - 0.321_848_959_318_898_7).abs() < 1e-9);
    }

    #[test]
    fn nu_conventions() {
        let k = TextureFamily::k(2.0, 10.0).unwrap();
        let t = TextureFamily::t(1.1, 2.0).unwrap();
        assert!((nu_printed(&k).unwrap() - 0.2).abs() < 1e-15);
        assert!((nu_printed(&t).unwrap() - 1.1).abs() < 1e-15);
        assert!((nu(&k).unwrap() - 0.1).abs() < 1e-15);
        assert!((nu(&t).unwrap() - 0.55).abs() < 1e-15);
        assert_eq!(nu(&TextureFamily::gaussian()).unwrap(), 1.0);
        assert!(nu(&TextureFamily::k(1.0, 1.0).unwrap()).is_err());
        let sampled = nu_sampled(&k, 1_000_000, &mut stream_rng(3, 0)).unwrap();
        assert!((sampled - 0.1).abs() < 0.002, "{sampled}");
    }

    #[test]
    fn fim_block_structure() {
        let fam = TextureFamily::k(2.0, 10.0).unwrap();
        let (sc, cov) = setup(&fam, 4);
        let f = fim_target_block(&sc, &cov, 1.0).unwrap();
        assert!((f.phi[(1, 1)] - f.phi[(2, 2)]).abs() < 1e-12 * f.phi[(1, 1)]);
        assert_eq!(f.phi, f.phi.transpose());
        let mut zero = sc.clone();
        zero.alpha2 = c(0.0, 0.0);
        let f0 = fim_target_block(&zero, &cov, 1.0).unwrap();
        for k in 0..5 {
            assert_eq!(f0.phi[(0, k)], 0.0);
        }
        assert!(crb_standard(&zero, &cov, &fam).is_err());
        assert!(crb_standard(&sc.with_delta(0.0), &cov, &fam).is_err());
    }

    #[test]
    fn fim_block_matches_dense_trace_oracle() {
        let fam = TextureFamily::t(1.1, 2.0).unwrap();
        let (sc, cov) = setup(&fam, 5);
        let got = fim_target_block(&sc, &cov, 0.7).unwrap();
        let inv = cov.full().try_inverse().unwrap();
        let jac = response_jacobian(&sc);
        for i in 0..5 {
            for j in 0..5 {
                let mut acc = 0.0;
                for t in 0..sc.snapshots() {
                    let vi: CVector<f64> = jac[i].column(t).into_owned();
                    let vj: CVector<f64> = jac[j].column(t).into_owned();
                    acc += (&vi * vj.adjoint() * &inv).trace().re;
                }
                assert!((got.phi[(i, j)] - 0.7 * acc).abs() < 1e-10 * got.phi[(0, 0)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn fim_block_matches_finite_difference_fisher() {
        // Gaussian model y ~ CN(v(μ), Σ): FIM = 2 Re{∂vᴴ Σ⁻¹ ∂v}
        let fam = TextureFamily::gaussian();
        let sc = scene(3, 3, 4, 6);
        let cov = toeplitz_sigma(3, 0.5).unwrap();
        let got = fim_target_block(&sc, &cov, 2.0).unwrap();
        let h = 1e-6;
        let bump = |k: usize, s: f64| {
            let mut p = sc.clone();
            match k {
                0 => p.delta += s,
                1 => p.alpha1.re += s,
                2 => p.alpha1.im += s,
                3 => p.alpha2.re += s,
                _ => p.alpha2.im += s,
            }
            target_response(&p).v
        };
        let d: Vec<CMatrix<f64>> = (0..5).map(|k| (bump(k, h) - bump(k, -h)) / c(2.0 * h, 0.0)).collect();
        let inv = cov.full().try_inverse().unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let fd = 2.0 * (d[j].adjoint() * &inv * &d[i]).trace().re;
                let rel = (fd - got.phi[(i, j)]).abs() / got.phi[(i, i)].abs().max(got.phi[(j, j)].abs());
                assert!(rel < 1e-4, "({i},{j}) {fd} vs {}", got.phi[(i, j)]);
            }
        }
        let _ = fam;
    }

    #[test]
    fn t_clutter_crb_to_mcrb_ratio_is_exact() {
        let fam = TextureFamily::t(1.1, 2.0).unwrap();
        let (sc, cov) = setup(&fam, 7);
        let crb = crb_standard(&sc, &cov, &fam).unwrap();
        let (mcrb, hcrb) = mcrb_hcrb(&sc, &cov, &fam).unwrap();
        assert_eq!(mcrb.to_bits(), hcrb.to_bits());
        assert!((crb / mcrb - 6.1 / 5.1).abs() < 1e-10 * (6.1 / 5.1));
    }

    #[test]
    fn orderings_and_gaussian_reference() {
        for (i, fam) in [TextureFamily::k(2.0, 10.0).unwrap(), TextureFamily::t(1.1, 2.0).unwrap()].iter().enumerate() {
            let (sc, cov) = setup(fam, 8 + i as u64);
            let r = bounds_report(&sc, &cov, fam, 400, 1).unwrap();
            assert!(r.crb >= r.mcrb && r.emcb >= r.mcrb && r.mcrb > 0.0, "{r:?}");
            assert!(r.crb < r.crb_gaussian, "{r:?}");
        }
    }

    #[test]
    fn crb_scales_with_signal_power() {
        let fam = TextureFamily::k(2.0, 10.0).unwrap();
        let (sc, cov) = setup(&fam, 10);
        let loud = RadarScene { waveform: &sc.waveform * c(2.0, 0.0), ..sc.clone() };
        let ratio = crb_standard(&sc, &cov, &fam).unwrap() / crb_standard(&loud, &cov, &fam).unwrap();
        assert!((ratio - 4.0).abs() < 1e-10);
    }

    #[test]
    fn emcb_with_unit_texture_is_the_unit_weight_bound() {
        let fam = TextureFamily::k(2.0, 10.0).unwrap();
        let (sc, cov) = setup(&fam, 11);
        let ones = vec![DVector::from_element(6, 1.0); 3];
        let e = emcb_from_textures(&sc, &cov, &ones).unwrap();
        let direct = fim_target_block(&sc, &cov, 2.0).unwrap().delta_bound().unwrap();
        assert!((e - direct).abs() < 1e-14 * direct);
        assert!(emcb(&sc, &cov, &fam, 50, 0).is_err());
    }

    #[test]
    fn emcb_gap_shrinks_with_snapshots() {
        let fam = TextureFamily::t(1.1, 2.0).unwrap();
        let gap = |t: usize| {
            let sc = scene(5, 4, t, 12);
            let cov = toeplitz_sigma(4, sigma2_for_scr(&sc, &fam, 0.0).unwrap()).unwrap();
            let (m, _) = mcrb_hcrb(&sc, &cov, &fam).unwrap();
            (emcb(&sc, &cov, &fam, 2000, 3).unwrap() - m) / m
        };
        assert!(gap(100) < gap(4));
    }
}
