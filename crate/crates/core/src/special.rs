//! Special functions and quadrature needed by the bounds: modified Bessel
//! functions of the second kind of real order, digamma, adaptive
//! Gauss-Kronrod integration, and the inverse of `ln a − ψ(a)`.
//!
//! Everything here is `f64`; texture parameters never need another type.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const MAX_SERIES: usize = 10_000;

/// Chebyshev coefficients for `Γ₁(μ)` and `Γ₂(μ)` in Temme's series,
/// `|μ| ≤ 1/2`.
const TEMME_C1: [f64; 7] = [
    -1.142022680371168e0,
    6.5165112670737e-3,
    3.087090173086e-4,
    -3.4706269649e-6,
    6.9437664e-9,
    3.67795e-11,
    -1.356e-13,
];
const TEMME_C2: [f64; 8] = [
    1.843740587300905e0,
    -7.68528408447867e-2,
    1.2719271366546e-3,
    -4.9717367042e-6,
    -3.31261198e-8,
    2.423096e-10,
    -1.702e-13,
    -1.49e-15,
];

fn chebev(c: &[f64], x: f64) -> f64 {
    let y2 = 2.0 * x;
    let (mut d, mut dd) = (0.0, 0.0);
    for &cj in c[1..].iter().rev() {
        let sv = d;
        d = y2 * d - dd + cj;
        dd = sv;
    }
    x * d - dd + 0.5 * c[0]
}

/// `(Γ₁, Γ₂, 1/Γ(1+μ), 1/Γ(1−μ))`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let xx = 8.0 * mu * mu - 1.0;
    let g1 = chebev(&TEMME_C1, xx);
    let g2 = chebev(&TEMME_C2, xx);
    (g1, g2, g2 - mu * g1, g2 + mu * g1)
}

/// `e^x·K_μ(x)` and `e^x·K_{μ+1}(x)` for `|μ| ≤ 1/2`, `x > 0`.
fn scaled_k_pair(mu: f64, x: f64) -> (f64, f64) {
    let mu2 = mu * mu;
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (g1, g2, gpl, gmi) = temme_gammas(mu);
        let mut ff = fact * (g1 * e.cosh() + g2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gpl;
        let mut q = 0.5 / (ee * gmi);
        let mut c = 1.0;
        let dx = x2 * x2;
        let mut sum1 = p;
        for i in 1..MAX_SERIES {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dx / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        let scale = x.exp();
        (sum * scale, sum1 * 2.0 / x * scale)
    } else {
        // Steed's continued fraction CF2 with Temme's normalisation.
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let (mut q1, mut q2) = (0.0, 1.0);
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..MAX_SERIES {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
        }
        h *= a1;
        let k0 = (PI / (2.0 * x)).sqrt() / s;
        (k0, k0 * (mu + x + 0.5 - h) / x)
    }
}

/// `ln K_ν(x)` for real `ν` and `x > 0`, safe against overflow for large
/// orders at small arguments.
pub fn ln_bessel_k(nu: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut k0, mut k1) = scaled_k_pair(mu, x);
    let mut ln_scale = -x;
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * 2.0 / x * k1 + k0;
        k0 = k1;
        k1 = next;
        if k1 > 1e250 {
            k0 /= 1e250;
            k1 /= 1e250;
            ln_scale += 250.0 * std::f64::consts::LN_10;
        }
    }
    k0.ln() + ln_scale
}

/// `K_ν(x)`; `K_{−ν} = K_ν`.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    ln_bessel_k(nu, x).exp()
}

/// `e^x·K_ν(x)`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> f64 {
    (ln_bessel_k(nu, x) + x).exp()
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

const DIGAMMA_ASYMP: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// Digamma `ψ(x)` for `x > 0`: upward recurrence to `x ≥ 6`, then the
/// asymptotic series.
pub fn digamma(mut x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let mut acc = 0.0;
    while x < 6.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut pow = inv2;
    let mut series = 0.0;
    for c in DIGAMMA_ASYMP {
        series += c * pow;
        pow *= inv2;
    }
    acc + x.ln() - 0.5 / x - series
}

/// `ln a − ψ(a)`, strictly decreasing from `+∞` to `0` on `a > 0`.
pub fn ln_minus_digamma(a: f64) -> f64 {
    a.ln() - digamma(a)
}

/// Root of `ln a − ψ(a) = s` on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeRoot {
    pub a: f64,
    /// Set when no sign change exists in the bracket and `a` is the nearest
    /// end point.
    pub at_boundary: bool,
}

/// Bisection/secant hybrid on `ln a`, absolute tolerance `tol` in `a`.
pub fn invert_ln_minus_digamma(s: f64, lo: f64, hi: f64, tol: f64) -> ShapeRoot {
    let g = |a: f64| ln_minus_digamma(a) - s;
    if !s.is_finite() || g(lo) <= 0.0 {
        return ShapeRoot { a: lo, at_boundary: true };
    }
    if g(hi) >= 0.0 {
        return ShapeRoot { a: hi, at_boundary: true };
    }
    let (mut xl, mut xh) = (lo.ln(), hi.ln());
    let (mut gl, mut gh) = (g(lo), g(hi));
    for _ in 0..200 {
        let secant = xl - gl * (xh - xl) / (gh - gl);
        let mid = 0.5 * (xl + xh);
        let x = if secant > xl && secant < xh { secant } else { mid };
        let gx = g(x.exp());
        if gx == 0.0 {
            return ShapeRoot { a: x.exp(), at_boundary: false };
        }
        let width_before = xh - xl;
        if gx > 0.0 {
            xl = x;
            gl = gx;
        } else {
            xh = x;
            gh = gx;
        }
        // secant steps that barely shrink the bracket fall back to bisection
        if xh - xl > 0.5 * width_before {
            let m = 0.5 * (xl + xh);
            let gm = g(m.exp());
            if gm > 0.0 {
                xl = m;
                gl = gm;
            } else {
                xh = m;
                gh = gm;
            }
        }
        if xh.exp() - xl.exp() < tol {
            break;
        }
    }
    ShapeRoot { a: 0.5 * (xl.exp() + xh.exp()), at_boundary: false }
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7-K15 panel: (Kronrod estimate, |Kronrod − Gauss|).
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * GK_WK[7];
    let mut gauss = fc * GK_WG[3];
    for j in 0..7 {
        let dx = h * GK_X[j];
        let pair = f(c - dx) + f(c + dx);
        kron += GK_WK[j] * pair;
        if j % 2 == 1 {
            gauss += GK_WG[j / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (G7-K15) on a finite interval, splitting the panel
/// with the largest error estimate until `err ≤ max(abs_tol, rel_tol·|I|)`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    const MAX_PANELS: usize = 2000;
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}]: estimate {total:e}, error {err:e} after {MAX_PANELS} panels"
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// `∫₀^∞ x^{N+a−1} K²_{a−N−1}(x) / K_{a−N}(x) dx / (2^{N+a−2}·Γ(N)·Γ(a))`,
/// i.e. the K-clutter Fisher weight `κ` for unit scale `b`.
pub fn k_clutter_kappa_unit_scale(a: f64, n: usize) -> Result<f64> {
    if !(a > 0.0) || n == 0 {
        return Err(Error::invalid("a", "shape must be positive and N ≥ 1"));
    }
    let nf = n as f64;
    let (nu_sq, nu_den) = (a - nf - 1.0, a - nf);
    let ln_norm = (nf + a - 2.0) * std::f64::consts::LN_2 + ln_gamma(nf) + ln_gamma(a);
    let ln_integrand =
        |x: f64| (nf + a - 1.0) * x.ln() + 2.0 * ln_bessel_k(nu_sq, x) - ln_bessel_k(nu_den, x) - ln_norm;
    let integrand = |x: f64| if x > 0.0 { ln_integrand(x).exp() } else { 0.0 };

    // Small-x behaviour is x^p (up to logs); map [0,1] so the singularity
    // becomes integrable with a bounded integrand.
    let p = nf + a - 1.0 - 2.0 * nu_sq.abs() + nu_den.abs();
    if p <= -1.0 {
        return Err(Error::Quadrature(format!("integrand not integrable at 0 (x^{p})")));
    }
    let head = if p < 0.0 {
        let e = 1.0 / (p + 1.0);
        integrate(|s: f64| if s > 0.0 { integrand(s.powf(e)) * e * s.powf(e - 1.0) } else { 0.0 }, 0.0, 1.0, 0.0, 1e-12)?
    } else {
        integrate(integrand, 0.0, 1.0, 0.0, 1e-12)?
    };

    let mut total = head;
    let peak = nf + a;
    let (mut lo, mut hi) = (1.0, 2.0);
    for _ in 0..64 {
        let piece = integrate(integrand, lo, hi, 0.0, 1e-12)?;
        total += piece;
        if hi > peak && piece.abs() < 1e-10 * total.abs() {
            return Ok(total);
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(Error::Quadrature("tail of the kappa integral did not decay".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn bessel_k_half_integer_closed_forms() {
        // K_{1/2}(x) = √(π/2x)·e^{−x}, K_{3/2}(x) = K_{1/2}(x)(1 + 1/x)
        for &x in &[1e-3, 0.1, 0.7, 1.9, 2.1, 5.0, 30.0, 200.0] {
            let k12: f64 = (PI / (2.0 * x)).sqrt() * (-x).exp();
            if k12 > 0.0 {
                assert!(rel(bessel_k(0.5, x), k12) < 1e-13, "x={x}");
                assert!(rel(bessel_k(1.5, x), k12 * (1.0 + 1.0 / x)) < 1e-13, "x={x}");
                assert!(rel(bessel_k(-2.5, x), k12 * (1.0 + 3.0 / x + 3.0 / (x * x))) < 1e-12);
            }
            let scaled = (PI / (2.0 * x)).sqrt();
            assert!(rel(bessel_k_scaled(0.5, x), scaled) < 1e-13);
        }
    }

    #[test]
    fn bessel_k_reference_values() {
        // values from an arbitrary-precision evaluation
        let cases = [
            (0.0, 1.0, 0.42102443824070833),
            (1.0, 1.0, 0.60190723019723457),
            (0.3, 0.5, 0.97647412438178792),
            (2.9, 0.01, 4303028.4991187644),
            (3.9, 2.0, 1.9215151231342166),
        ];
        for (nu, x, want) in cases {
            let got = bessel_k(nu, x);
            assert!(rel(got, want) < 1e-10, "K_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn large_order_small_argument_stays_finite() {
        let l = ln_bessel_k(60.0, 1e-8);
        assert!(l.is_finite() && l > 1000.0);
    }

    #[test]
    fn digamma_values() {
        let gamma_e = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + gamma_e).abs() < 1e-12);
        assert!((digamma(0.5) + gamma_e + 2.0 * 2f64.ln()).abs() < 1e-12);
        for &x in &[0.3, 1.7, 5.5, 6.0, 12.0, 250.0] {
            assert!((digamma(x + 1.0) - digamma(x) - 1.0 / x).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_inversion_round_trip() {
        for &a in &[0.01, 0.5, 1.1, 2.0, 17.0, 400.0] {
            let root = invert_ln_minus_digamma(ln_minus_digamma(a), 1e-3, 1e3, 1e-10);
            assert!(!root.at_boundary);
            assert!((root.a - a).abs() < 1e-8 * a.max(1.0), "a={a} got {}", root.a);
        }
        assert!(invert_ln_minus_digamma(0.0, 1e-3, 1e3, 1e-8).at_boundary);
        assert!(invert_ln_minus_digamma(1e4, 1e-3, 1e3, 1e-8).at_boundary);
    }

    #[test]
    fn quadrature_polynomial_and_singular() {
        let v = integrate(|x| x * x * x, 0.0, 2.0, 0.0, 1e-14).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
        let v = integrate(|x| (-x).exp() * x.sin(), 0.0, 30.0, 0.0, 1e-13).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kappa_matches_arbitrary_precision_oracle() {
        // (a, N, κ at b = 1) from an independent 30-digit quadrature
        let cases = [
            (1.5, 4, 6.2415405022164157),
            (2.0, 4, 3.2184895931889871),
            (3.0, 4, 1.681438415139143),
            (5.0, 4, 0.88321949730587841),
            (1.1, 4, 30.262506863441204),
            (2.0, 3, 2.2836370166361652),
            (16.0, 4, 0.25348757370759951),
        ];
        for (a, n, want) in cases {
            let got = k_clutter_kappa_unit_scale(a, n).unwrap();
            assert!(rel(got, want) < 1e-8, "a={a} N={n}: {got} vs {want}");
        }
    }
}
