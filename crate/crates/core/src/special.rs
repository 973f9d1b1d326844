//! Special functions. Evaluated in `f64` through `statrs` and narrowed to
//! the working scalar; the finite-series helper is generic.

use crate::scalar::Real;

pub fn ln_gamma<R: Real>(x: R) -> R {
    R::lit(statrs::function::gamma::ln_gamma(x.as_f64()))
}

pub fn ln_beta<R: Real>(a: R, b: R) -> R {
    R::lit(statrs::function::beta::ln_beta(a.as_f64(), b.as_f64()))
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_lower_regularized<R: Real>(a: R, x: R) -> R {
    if x <= R::zero() {
        return R::zero();
    }
    R::lit(statrs::function::gamma::gamma_lr(a.as_f64(), x.as_f64()))
}

/// Regularized incomplete beta I_x(a, b).
pub fn beta_regularized<R: Real>(a: R, b: R, x: R) -> R {
    if x <= R::zero() {
        return R::zero();
    }
    if x >= R::one() {
        return R::one();
    }
    R::lit(statrs::function::beta::beta_reg(
        a.as_f64(),
        b.as_f64(),
        x.as_f64(),
    ))
}

/// Standard normal CDF.
pub fn normal_cdf<R: Real>(z: R) -> R {
    let z = z.as_f64();
    R::lit(0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2))
}

/// Standard normal upper tail 1 - Φ(z), accurate far into the tail.
pub fn normal_sf<R: Real>(z: R) -> R {
    let z = z.as_f64();
    R::lit(0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2))
}

/// Standard normal quantile Φ⁻¹(p).
pub fn normal_quantile<R: Real>(p: R) -> R {
    R::lit(-std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p.as_f64()))
}

pub fn normal_pdf<R: Real>(z: R) -> R {
    let half = R::lit(0.5);
    (-half * z * z).exp() / (R::TAU()).sqrt()
}

/// Sums `terms` entries of a series whose first term is `exp(log_first)`
/// and whose consecutive terms satisfy `t[k + 1] = t[k] * ratio(k)`.
///
/// Terms are accumulated relative to the first one and rescaled when the
/// running sum grows large, so neither a tiny first term nor a huge peak
/// underflows or overflows. When `ratios_decrease` is set the caller
/// guarantees `ratio` is non-increasing, and the loop stops once the
/// geometric bound on the remainder drops below the working precision.
pub fn scaled_series<R, F>(log_first: R, terms: u64, ratios_decrease: bool, ratio: F) -> R
where
    R: Real,
    F: FnMut(u64) -> R,
{
    ln_scaled_series(log_first, terms, ratios_decrease, ratio).exp()
}

/// Logarithm of [`scaled_series`], finite even when the sum itself
/// underflows.
pub fn ln_scaled_series<R, F>(log_first: R, terms: u64, ratios_decrease: bool, mut ratio: F) -> R
where
    R: Real,
    F: FnMut(u64) -> R,
{
    if terms == 0 {
        return R::neg_infinity();
    }
    let rescale = R::lit(1e150);
    let inv_rescale = R::lit(1e-150);
    let ln_rescale = rescale.ln();
    let tiny = R::epsilon() * R::lit(1e-3);

    let mut term = R::one();
    let mut sum = R::one();
    let mut log_scale = log_first;
    for k in 0..terms - 1 {
        let r = ratio(k);
        term *= r;
        sum += term;
        if sum > rescale {
            term *= inv_rescale;
            sum *= inv_rescale;
            log_scale += ln_rescale;
        }
        if ratios_decrease && r < R::one() && term * r / (R::one() - r) < sum * tiny {
            break;
        }
    }
    log_scale + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quantile_inverts_cdf() {
        for p in [1e-10, 0.025, 0.5, 0.95, 0.999] {
            let z: f64 = normal_quantile(p);
            assert_relative_eq!(normal_cdf(z), p, max_relative = 1e-9);
        }
        assert_relative_eq!(
            normal_quantile(0.95f64),
            1.6448536269514722,
            max_relative = 1e-10
        );
    }

    #[test]
    fn series_matches_direct_geometric_sum() {
        // 0.5^0 + ... + 0.5^9
        let s: f64 = scaled_series(0.0, 10, true, |_| 0.5);
        assert_relative_eq!(s, (1.0 - 0.5f64.powi(10)) / 0.5, max_relative = 1e-14);
    }

    #[test]
    fn series_survives_underflowing_first_term() {
        // first term e^-800 (underflows), ratio e^2 for 500 terms: last term e^198.
        let s: f64 = scaled_series(-800.0, 500, false, |_| 2f64.exp());
        let expected_ln = 198.0 + (1.0 / (1.0 - (-2f64).exp())).ln();
        assert_relative_eq!(s.ln(), expected_ln, max_relative = 1e-12);
    }

    #[test]
    fn normal_tails_are_complementary() {
        for z in [-3.0f64, -0.7, 0.0, 0.4, 2.5] {
            assert_relative_eq!(normal_cdf(z) + normal_sf(z), 1.0, epsilon = 1e-15);
        }
        assert_eq!(normal_cdf(0.0f64), 0.5);
    }

    #[test]
    fn f32_instantiation() {
        let p: f32 = normal_cdf(1.0f32);
        assert!((p - 0.841_344_7).abs() < 1e-6);
    }
}
