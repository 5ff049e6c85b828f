//! Small numerical kernels shared by the analytic and event modules:
//! compensated summation, cancellation-free hyperbolic helpers, adaptive
//! Gauss–Kronrod quadrature and a bracketed root finder.

use crate::error::{Error, Result};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// `sinh(y) - y` without cancellation for small `|y|`.
pub fn sinh_minus_id(y: f64) -> f64 {
    if y.abs() > 1.0 {
        return y.sinh() - y;
    }
    // y^3/3! + y^5/5! + ...; at |y| <= 1 the terms fall below 1 ulp after ~9 of them.
    let y2 = y * y;
    let mut term = y * y2 / 6.0;
    let mut acc = term;
    let mut k = 2.0;
    while term.abs() > f64::EPSILON * 1e-3 * acc.abs() {
        term *= y2 / ((2.0 * k) * (2.0 * k + 1.0));
        acc += term;
        k += 1.0;
    }
    acc
}

/// `sinh(x) / x`, continuous at zero.
pub fn sinhc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        1.0 + sinh_minus_id(x) / x
    }
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

// 15-point Kronrod abscissae/weights and the embedded 7-point Gauss weights,
// quoted to the published number of digits.
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive G7–K15 quadrature of `f` over `[a, b]`.
///
/// Subintervals are bisected (largest error first) until the summed error
/// estimate drops below `abs_tol`. Fails with [`Error::QuadratureBudget`]
/// once `max_evaluations` integrand calls have been spent.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_evaluations: usize,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let (v, e) = kronrod15(&f, a, b);
    let mut evaluations = 15;
    // (a, b, value, error)
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        let value = pieces
            .iter()
            .map(|p| p.2)
            .collect::<CompensatedSum>()
            .value();
        if total_err <= abs_tol {
            return Ok(Quadrature {
                value,
                error_estimate: total_err,
                evaluations,
            });
        }
        if evaluations + 30 > max_evaluations {
            return Err(Error::QuadratureBudget {
                evaluations,
                estimate: value,
                error_estimate: total_err,
            });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("nonempty");
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval can no longer be split in floating point.
            return Err(Error::QuadratureBudget {
                evaluations,
                estimate: value,
                error_estimate: total_err,
            });
        }
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        evaluations += 30;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Root of a continuous function on a bracket where it changes sign.
///
/// Illinois-modified regula falsi with a bisection step whenever a secant
/// step fails to halve the bracket. Returns the midpoint of the final
/// bracket once its width is at most `x_tol`.
pub fn find_root<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    max_iterations: usize,
) -> Result<f64> {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InvalidConfig(format!(
            "root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}"
        )));
    }
    // -1: last update moved `lo`, +1: moved `hi`.
    let mut last_side = 0i8;
    for iteration in 0..max_iterations {
        let width = hi - lo;
        if width <= x_tol {
            return Ok(0.5 * (lo + hi));
        }
        let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let bisect = iteration % 3 == 2 || !(secant > lo && secant < hi);
        let x = if bisect { 0.5 * (lo + hi) } else { secant };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
            if last_side == -1 {
                f_hi *= 0.5;
            }
            last_side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if last_side == 1 {
                f_lo *= 0.5;
            }
            last_side = 1;
        }
    }
    if hi - lo <= x_tol {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::RootIterations {
            iterations: max_iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn sinh_minus_id_matches_direct_form_away_from_zero() {
        for &y in &[0.3, 0.7, 1.0, -0.9, 2.5] {
            let direct = f64::sinh(y) - y;
            assert!((sinh_minus_id(y) - direct).abs() <= 1e-15 * direct.abs().max(1.0));
        }
        let y = 1e-4;
        assert!((sinh_minus_id(y) / (y * y * y / 6.0) - 1.0).abs() < 1e-8);
        assert_eq!(sinh_minus_id(0.0), 0.0);
    }

    #[test]
    fn sinhc_is_continuous() {
        assert_eq!(sinhc(0.0), 1.0);
        assert!((sinhc(1e-9) - 1.0).abs() < 1e-17);
        assert!((sinhc(0.5) - 0.5f64.sinh() / 0.5).abs() < 1e-16);
    }

    #[test]
    fn kronrod_integrates_polynomials_exactly() {
        // K15 is exact through degree 22.
        let q = integrate(|x| x.powi(10) - 3.0 * x.powi(3), 0.0, 2.0, 1e-13, 1000).unwrap();
        let exact = 2f64.powi(11) / 11.0 - 3.0 * 16.0 / 4.0;
        assert!((q.value - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_quadrature_handles_peaked_integrand() {
        let q = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10, 100_000).unwrap();
        let exact = 2.0 * 100.0 * (100.0f64).atan();
        assert!((q.value - exact).abs() < 1e-9, "{} vs {}", q.value, exact);
    }

    #[test]
    fn quadrature_budget_is_reported() {
        let err = integrate(|x| (1.0 / x).sin(), 1e-9, 1.0, 1e-14, 300).unwrap_err();
        assert!(matches!(err, Error::QuadratureBudget { .. }));
    }

    #[test]
    fn root_finder_converges_on_monotone_function() {
        let r = find_root(|x| x.powi(3) - 0.2, 0.0, 1.0, 1e-14, 200).unwrap();
        assert!((r - 0.2f64.cbrt()).abs() < 1e-13);
        // Very flat near the root.
        let r = find_root(|x| (x - 0.3).powi(5), 0.0, 1.0, 1e-12, 200).unwrap();
        assert!((r - 0.3).abs() < 1e-11);
    }

    #[test]
    fn root_finder_rejects_missing_bracket() {
        assert!(find_root(|x| x + 1.0, 0.0, 1.0, 1e-12, 200).is_err());
    }
}
