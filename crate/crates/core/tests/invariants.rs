use num_complex::Complex;
use proptest::prelude::*;

use sirp_radar::arl::{arl_closed_form, arl_report, linearize};
use sirp_radar::bounds::{crb_standard, emcb, kappa, mcrb_hcrb};
use sirp_radar::clutter::{sample_clutter, sigma2_for_scr, stream_rng, toeplitz_sigma, TextureFamily, TextureKind};
use sirp_radar::estimators::{imape, imle, EstimatorOptions};
use sirp_radar::linalg::HermitianEigen;
use sirp_radar::radar_model::{steering_vector, target_response, ArrayGeometry, RadarScene};
use sirp_radar::CMatrix;

#[derive(Clone, Debug)]
struct Setup {
    m: usize,
    n: usize,
    t: usize,
    omega: f64,
    delta: f64,
    alpha: [(f64, f64); 2],
    waveform: Vec<(f64, f64)>,
    kind: TextureKind,
    a: f64,
    b: f64,
    scr_db: f64,
}

impl Setup {
    fn scene(&self) -> RadarScene<f64> {
        let s = CMatrix::from_fn(self.m, self.t, |i, j| {
            let (re, im) = self.waveform[(i * 17 + j) % self.waveform.len()];
            Complex::new(re, im)
        });
        let c = |(re, im): (f64, f64)| Complex::new(re, im);
        RadarScene::new(ArrayGeometry::uniform(self.m, self.n).unwrap(), self.omega, self.delta, c(self.alpha[0]), c(self.alpha[1]), s)
            .unwrap()
    }

    fn family(&self) -> TextureFamily {
        TextureFamily::new(self.kind, self.a, self.b).unwrap()
    }
}

fn amplitude() -> impl Strategy<Value = (f64, f64)> {
    (0.3..3.0f64, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(r, p)| (r * p.cos(), r * p.sin()))
}

fn setup() -> impl Strategy<Value = Setup> {
    (
        2usize..=6,
        2usize..=6,
        2usize..=8,
        -2.5..2.5f64,
        0.05..1.0f64,
        [amplitude(), amplitude()],
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 48),
        prop_oneof![Just(TextureKind::K), Just(TextureKind::T)],
        1.2..5.0f64,
        0.5..20.0f64,
        0.0..20.0f64,
    )
        .prop_map(|(m, n, t, omega, delta, alpha, waveform, kind, a, b, scr_db)| Setup {
            m,
            n,
            t,
            omega,
            delta,
            alpha,
            waveform,
            kind,
            a,
            b,
            scr_db,
        })
}

fn covariance(s: &Setup, family: &TextureFamily) -> sirp_radar::SpeckleCovariance {
    let scene = s.scene();
    toeplitz_sigma(s.n, sigma2_for_scr(&scene, family, s.scr_db).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn steering_elements_have_unit_modulus(m in 2usize..12, omega in -10.0..10.0f64) {
        let offsets: Vec<f64> = (0..m).map(|k| k as f64).collect();
        for z in steering_vector(&offsets, omega).iter() {
            prop_assert!((z.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn toeplitz_speckle_has_unit_trace(n in 1usize..16, sigma2 in 1e-3..1e3f64) {
        let cov = toeplitz_sigma(n, sigma2).unwrap();
        let tr: f64 = cov.sigma_norm.diagonal().iter().map(|z| z.re).sum();
        prop_assert!((tr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn response_is_rank_one_at_zero_separation(s in setup()) {
        let resp = target_response(&s.scene().with_delta(0.0));
        let sv = resp.regressors().singular_values();
        prop_assert!(sv[1] / sv[0] < 1e-10);
    }

    #[test]
    fn quartic_coefficients_positive_with_sign_pattern(s in setup()) {
        let family = s.family();
        let lin = linearize(&s.scene(), &covariance(&s, &family)).unwrap();
        prop_assert!(HermitianEigen::new(&lin.gram, 3).min_value() > 0.0);
        let q = arl_closed_form(&lin, s.scene().alpha2, kappa(&family, s.n).unwrap(), s.n).unwrap();
        prop_assert!(q.a > 0.0 && q.b > 0.0 && q.c > 0.0);
        prop_assert!(q.eval(0.0) < 0.0);
        prop_assert!(q.eval(0.5 * q.delta) < 0.0);
        prop_assert!(q.eval(1.5 * q.delta) > 0.0);
    }

    #[test]
    fn bound_ordering(s in setup(), seed in any::<u64>()) {
        let scene = s.scene();
        let family = s.family();
        let cov = covariance(&s, &family);
        let crb = crb_standard(&scene, &cov, &family).unwrap();
        let (mcrb, hcrb) = mcrb_hcrb(&scene, &cov, &family).unwrap();
        let em = emcb(&scene, &cov, &family, 400, seed).unwrap();
        prop_assert_eq!(mcrb.to_bits(), hcrb.to_bits());
        prop_assert!(mcrb > 0.0);
        prop_assert!(crb >= mcrb);
        prop_assert!(em >= mcrb);
    }

    #[test]
    fn closed_arl_increases_with_shape(s in setup(), step in 0.1..2.0f64) {
        let scene = s.scene();
        let lo = s.family();
        let hi = lo.with_shape(lo.a + step);
        let delta = |f: &TextureFamily| {
            let lin = linearize(&scene, &covariance(&s, f)).unwrap();
            arl_closed_form(&lin, scene.alpha2, kappa(f, s.n).unwrap(), s.n).unwrap().delta
        };
        prop_assert!(delta(&hi) > delta(&lo));
    }

    #[test]
    fn gaussian_arl_is_an_upper_bound(s in setup()) {
        let scene = s.scene();
        let family = s.family();
        let gaussian = TextureFamily::gaussian();
        let sirp = arl_report(&scene, &covariance(&s, &family), &family, 1e-8).unwrap();
        let gauss = arl_report(&scene, &covariance(&s, &gaussian), &gaussian, 1e-8).unwrap();
        prop_assert!(gauss.delta_closed >= sirp.delta_closed);
        prop_assert!(gauss.delta_exact >= sirp.delta_exact);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimator_outputs_are_consistent(s in setup(), extra in 1usize..6, seed in any::<u64>()) {
        // the T < N pseudoinverse regime has its own smoke test; at N = 2 the
        // likelihood is unbounded as τ̂ collapses onto its floor
        let n = s.n.max(3);
        let s = Setup { n, t: n + extra, ..s };
        let scene = s.scene();
        let family = s.family();
        let cov = covariance(&s, &family);
        let mut rng = stream_rng(seed, 0);
        let clutter = sample_clutter(&family, &cov, s.t, &mut rng).unwrap();
        let y = target_response(&scene).v + clutter.n;
        let opts = EstimatorOptions::default();

        let first = imle(&y, &scene, &opts).unwrap();
        let again = imle(&y, &scene, &opts).unwrap();
        prop_assert_eq!(first.delta_hat.to_bits(), again.delta_hat.to_bits());
        prop_assert_eq!(&first.tau_hat, &again.tau_hat);

        // the conditional log-likelihood never decreases across iterations
        for w in first.trace.windows(2) {
            prop_assert!(w[1].log_likelihood >= w[0].log_likelihood - 1e-9 * w[0].log_likelihood.abs().max(1.0));
        }

        for est in [first, imape(&y, &scene, &family, &opts).unwrap()] {
            let sig = &est.sigma_hat_norm;
            let tr: f64 = sig.diagonal().iter().map(|z| z.re).sum();
            prop_assert!((tr - 1.0).abs() < 1e-10);
            prop_assert!((sig - sig.adjoint()).norm() < 1e-12);
            prop_assert!(HermitianEigen::new(sig, s.n).min_value() >= -1e-12);
            prop_assert!(est.tau_hat.iter().all(|&t| t >= 0.0));
            prop_assert!(est.delta_hat.is_finite());
        }
    }
}
