//! Gaussian moment functionals of the logarithmic error kernel.
//!
//! For `e ~ N(0, σ²)` and `g(e) = αe³/(1+αe²)`:
//!
//! * `h_G = E[e g(e)] / σ² = E[αe⁴/(1+αe²)] / σ²`
//! * `h_U = E[g²(e)] = E[α²e⁶/(1+αe²)²]`
//!
//! Neither has an elementary closed form at finite α. Both are evaluated by
//! adaptive Gauss–Kronrod integration over the standardised variable
//! `x = e/σ`. The integrands are analytic on the real line but have poles at
//! `x = ±i/√(ασ²)`, which defeats fixed-order Gauss–Hermite rules once ασ²
//! is large, so Gauss–Hermite is kept only as a cross-check.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussHermite;

use crate::error::{Error, Result};

/// Relative accuracy requested from the adaptive rule.
pub const QUADRATURE_RTOL: f64 = 1e-12;

/// Upper limit of the standardised integration range; the Gaussian weight
/// beyond it is below 1e-40.
const UPPER_LIMIT: f64 = 14.0;

const MAX_SUBDIVISIONS: usize = 2000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive G7/K15 integration of `f` over `[a, b]`, always
/// bisecting the segment with the largest error estimate.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rtol: f64) -> f64 {
    let (value, error) = gauss_kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let (mut total, mut total_err) = (value, error);
    for _ in 0..MAX_SUBDIVISIONS {
        if total_err <= rtol * total.abs() || total_err < f64::MIN_POSITIVE {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gauss_kronrod(&f, worst.a, mid);
        let (rv, re) = gauss_kronrod(&f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, error: re });
    }
    // Re-sum to shed the rounding drift of the running total.
    heap.iter().map(|s| s.value).sum()
}

fn standard_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Zero-mean Gaussian error with variance `sigma_e2`, seen through the
/// logarithmic kernel with parameter `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianErrorModel {
    pub sigma_e2: f64,
    pub alpha: f64,
}

impl GaussianErrorModel {
    pub fn new(sigma_e2: f64, alpha: f64) -> Result<Self> {
        if !(sigma_e2 >= 0.0) || !sigma_e2.is_finite() {
            return Err(Error::NegativeVariance(sigma_e2));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha must be positive and finite, got {alpha}")));
        }
        Ok(Self { sigma_e2, alpha })
    }

    fn scaled_alpha(&self) -> f64 {
        self.alpha * self.sigma_e2
    }

    pub fn h_g(&self) -> f64 {
        if self.sigma_e2 == 0.0 {
            return 0.0;
        }
        let a = self.scaled_alpha();
        2.0 * integrate_adaptive(
            |x| {
                let x2 = x * x;
                a * x2 * x2 / (1.0 + a * x2) * standard_normal_pdf(x)
            },
            0.0,
            UPPER_LIMIT,
            QUADRATURE_RTOL,
        )
    }

    pub fn h_u(&self) -> f64 {
        if self.sigma_e2 == 0.0 {
            return 0.0;
        }
        let a = self.scaled_alpha();
        let integral = 2.0
            * integrate_adaptive(
                |x| {
                    let x2 = x * x;
                    let r = a * x2 / (1.0 + a * x2);
                    r * r * x2 * standard_normal_pdf(x)
                },
                0.0,
                UPPER_LIMIT,
                QUADRATURE_RTOL,
            );
        self.sigma_e2 * integral
    }

    /// Fixed-order Gauss–Hermite estimate of `h_G`; accurate only while
    /// ασ² is moderate.
    pub fn h_g_hermite(&self, nodes: usize) -> Result<f64> {
        let a = self.scaled_alpha();
        self.hermite(nodes, |x| {
            let x2 = x * x;
            a * x2 * x2 / (1.0 + a * x2)
        })
    }

    /// Fixed-order Gauss–Hermite estimate of `h_U`.
    pub fn h_u_hermite(&self, nodes: usize) -> Result<f64> {
        let a = self.scaled_alpha();
        let mean = self.hermite(nodes, |x| {
            let x2 = x * x;
            let r = a * x2 / (1.0 + a * x2);
            r * r * x2
        })?;
        Ok(self.sigma_e2 * mean)
    }

    fn hermite(&self, nodes: usize, h: impl Fn(f64) -> f64) -> Result<f64> {
        let nodes = NonZeroUsize::new(nodes).ok_or_else(|| Error::InvalidArgument("Gauss-Hermite needs at least one node".into()))?;
        if self.sigma_e2 == 0.0 {
            return Ok(0.0);
        }
        // E[h(X)] for X ~ N(0,1) equals π^{-1/2} ∫ h(√2 t) e^{-t²} dt.
        let rule = GaussHermite::new(nodes);
        Ok(rule.integrate(|t| h(std::f64::consts::SQRT_2 * t)) / PI.sqrt())
    }
}

/// `h_G` for the given model.
pub fn h_g(model: &GaussianErrorModel) -> f64 {
    model.h_g()
}

/// `h_U` for the given model.
pub fn h_u(model: &GaussianErrorModel) -> f64 {
    model.h_u()
}

/// Small-error approximations `h_G ≈ 3ασ²`, `h_U ≈ 15α²σ⁶`.
pub fn small_error_moments(model: &GaussianErrorModel) -> (f64, f64) {
    let s = model.sigma_e2;
    (3.0 * model.alpha * s, 15.0 * model.alpha * model.alpha * s * s * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(s: f64, a: f64) -> GaussianErrorModel {
        GaussianErrorModel::new(s, a).unwrap()
    }

    #[test]
    fn adaptive_rule_integrates_known_functions() {
        let v = integrate_adaptive(|x| x.sin(), 0.0, PI, 1e-13);
        assert!((v - 2.0).abs() < 1e-13);
        let v = integrate_adaptive(|x| 1.0 / (1.0 + 1e6 * x * x), 0.0, 1.0, 1e-12);
        let exact = (1e3f64).atan() / 1e3;
        assert!((v / exact - 1.0).abs() < 1e-11);
    }

    #[test]
    fn gaussian_moments_via_adaptive_rule() {
        let m4 = 2.0 * integrate_adaptive(|x| x.powi(4) * standard_normal_pdf(x), 0.0, UPPER_LIMIT, 1e-13);
        let m6 = 2.0 * integrate_adaptive(|x| x.powi(6) * standard_normal_pdf(x), 0.0, UPPER_LIMIT, 1e-13);
        assert!((m4 - 3.0).abs() < 1e-12);
        assert!((m6 - 15.0).abs() < 1e-11);
    }

    #[test]
    fn zero_variance_gives_zero() {
        let m = model(0.0, 1.0);
        assert_eq!(m.h_g(), 0.0);
        assert_eq!(m.h_u(), 0.0);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(matches!(GaussianErrorModel::new(-1.0, 1.0), Err(Error::NegativeVariance(_))));
        assert!(GaussianErrorModel::new(1.0, 0.0).is_err());
        assert!(GaussianErrorModel::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn small_alpha_limits() {
        let m = model(1.0, 1e-6);
        assert!((m.h_g() / 3e-6 - 1.0).abs() < 1e-4);
        assert!((m.h_u() / 15e-12 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn large_alpha_limits() {
        let m = model(1.0, 1e8);
        assert!((m.h_g() - 1.0).abs() < 1e-3);
        assert!((m.h_u() - 1.0).abs() < 1e-3);
        let m = model(0.25, 1e9);
        assert!((m.h_u() - 0.25).abs() < 1e-3 * 0.25);
    }

    #[test]
    fn hermite_cross_check_in_moderate_regime() {
        for &(s, a) in &[(0.01, 0.1), (0.01, 1.0), (1.0, 0.1), (0.1, 1.0)] {
            let m = model(s, a);
            let g = m.h_g_hermite(200).unwrap();
            let u = m.h_u_hermite(200).unwrap();
            assert!((g / m.h_g() - 1.0).abs() < 1e-10, "h_G at ({s},{a})");
            assert!((u / m.h_u() - 1.0).abs() < 1e-10, "h_U at ({s},{a})");
        }
    }

    #[test]
    fn bounds_and_monotonicity() {
        let mut prev = (0.0, 0.0);
        for k in -6..=6 {
            let m = model(1.0, 10f64.powi(k));
            let (g, u) = (m.h_g(), m.h_u());
            assert!(g > prev.0 && g < 1.0);
            assert!(u > prev.1 && u < 1.0);
            prev = (g, u);
        }
        let mut prev = (0.0, 0.0);
        for k in -4..=3 {
            let s = 10f64.powi(k);
            let m = model(s, 1.0);
            let (g, u) = (m.h_g(), m.h_u());
            assert!(g > prev.0 && g < 1.0);
            assert!(u > prev.1 && u < s);
            prev = (g, u);
        }
    }
}
