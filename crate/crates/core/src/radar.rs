//! Bi-static radar detection probability.
//!
//! A target at ranges `R1` (transmitter) and `R2` (receiver) returns a
//! signal-to-noise ratio `SNR = K / (R1² R2²)`. With the single-pulse
//! nonfluctuating (Swerling 0) receiver model the detection probability is
//!
//! ```text
//! P_d = Q1(√(2·SNR), √v_t),   v_t = −2 ln P_fa
//! ```
//!
//! where `Q1` is the first-order Marcum Q function.

use alloc::format;

use crate::error::{Error, Result};
use crate::math;

const SERIES_LIMIT: f64 = 15.0;

/// Terms of the large-argument expansion of `e^{-x} I_ν(x)`, `μ = 4ν²`.
fn bessel_scaled_asymptotic(x: f64, mu: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / math::sqrt(2.0 * core::f64::consts::PI * x)
}

/// Power series of `I_ν(x)` for integer order 0 or 1.
fn bessel_series(x: f64, order: u32) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = if order == 0 { 1.0 } else { half };
    let mut sum = term;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * (kf + order as f64));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Modified Bessel function of the first kind, order zero.
///
/// Power series for `x ≤ 15`, asymptotic expansion beyond. Negative
/// arguments use the even symmetry.
pub fn bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        bessel_series(x, 0)
    } else {
        math::exp(x) * bessel_scaled_asymptotic(x, 0.0)
    }
}

/// `e^{-x} I0(x)` for `x ≥ 0`, finite for all arguments.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        math::exp(-x) * bessel_series(x, 0)
    } else {
        bessel_scaled_asymptotic(x, 0.0)
    }
}

/// `e^{-x} I1(x)` for `x ≥ 0`.
pub fn bessel_i1_scaled(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        math::exp(-x) * bessel_series(x, 1)
    } else {
        bessel_scaled_asymptotic(x, 4.0)
    }
}

/// Regularized incomplete gamma pair `(P(a, x), Q(a, x))`, each computed
/// directly on the side where it is the smaller of the two.
fn gamma_pq(a: f64, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    let prefactor = math::exp(a * math::ln(x) - x - math::lgamma(a));
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..10_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        let p = sum * prefactor;
        (p, 1.0 - p)
    } else {
        // Lentz continued fraction.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-17 {
                break;
            }
        }
        let q = prefactor * h;
        (1.0 - q, q)
    }
}

/// Bound on the neglected remainder of the Poisson mixture sums.
const EARLY_EXIT: f64 = 1e-20;

/// Separation beyond which `Q1` is within 1e-30 of 0 or 1.
const SATURATION: f64 = 12.0;

fn log_pois(n: f64, mean: f64) -> f64 {
    n * math::ln(mean) - mean - math::lgamma(n + 1.0)
}

/// Next Poisson pmf by recurrence, or directly while the recurrence would
/// be stuck in the underflow range.
#[inline]
fn step_pmf(pmf: f64, ratio: f64, n: f64, mean: f64) -> f64 {
    if pmf > 1e-280 {
        pmf * ratio
    } else {
        math::exp(log_pois(n, mean))
    }
}

/// First-order Marcum Q function
/// `Q1(α, β) = ∫_β^∞ x I0(αx) exp(−(x² + α²)/2) dx`.
///
/// Evaluated as the Poisson mixture of the noncentral chi-square law with
/// two degrees of freedom,
/// `Q1(α, β) = Σ_n Pois(n; α²/2) · P(Pois(β²/2) ≤ n)`. For `α > β` the
/// complement is summed instead, so values near 1 stay smooth.
pub fn marcum_q1(alpha: f64, beta: f64) -> f64 {
    debug_assert!(alpha >= 0.0 && beta >= 0.0);
    if beta <= 0.0 {
        return 1.0;
    }
    if alpha <= 0.0 {
        return math::exp(-0.5 * beta * beta);
    }
    if alpha - beta > SATURATION {
        return 1.0;
    }
    if beta - alpha > SATURATION {
        return 0.0;
    }
    let lambda = 0.5 * alpha * alpha;
    let x = 0.5 * beta * beta;
    // Poisson mass outside λ ± spread(λ) is below 1e-20. Beyond the window
    // of Poisson(x) the cdf factor is 0 below it and the tail factor 0
    // above it, so only the overlap of the two windows matters.
    let spread = |m: f64| 10.0 * math::sqrt(m) + 20.0;
    let lo = math::floor((lambda - spread(lambda)).max(0.0));
    let hi = math::floor(lambda + spread(lambda));
    let (lo, hi) = if alpha <= beta {
        (lo.max(math::floor((x - spread(x)).max(0.0))), hi)
    } else {
        (lo, hi.min(math::floor(x + spread(x))))
    };

    if alpha <= beta {
        // Q1 = Σ Pois(n; λ) P(Pois(x) ≤ n); the cdf grows stably upward.
        let mut w = math::exp(log_pois(lo, lambda));
        let mut pmf = math::exp(log_pois(lo, x));
        let mut cdf = gamma_pq(lo + 1.0, x).1;
        let mut total = w * cdf;
        let mut n = lo;
        while n < hi {
            n += 1.0;
            let inv = 1.0 / n;
            w *= lambda * inv;
            pmf = step_pmf(pmf, x * inv, n, x);
            cdf += pmf;
            total += w * cdf;
            // Past the mode the remaining weights shrink geometrically.
            if n > lambda && w < EARLY_EXIT * (1.0 - lambda / (n + 1.0)) {
                break;
            }
        }
        total.clamp(0.0, 1.0)
    } else {
        // 1 − Q1 = Σ Pois(n; λ) P(Pois(x) > n); the tail grows stably downward.
        let mut w = math::exp(log_pois(hi, lambda));
        let mut pmf = math::exp(log_pois(hi, x));
        let mut tail = gamma_pq(hi + 1.0, x).0;
        let mut total = w * tail;
        let mut n = hi;
        let (inv_lambda, inv_x) = (1.0 / lambda, 1.0 / x);
        while n > lo {
            tail += pmf;
            w *= n * inv_lambda;
            pmf = step_pmf(pmf, n * inv_x, n - 1.0, x);
            n -= 1.0;
            total += w * tail;
            if n < lambda && w < EARLY_EXIT * (1.0 - n / lambda) {
                break;
            }
        }
        (1.0 - total).clamp(0.0, 1.0)
    }
}

/// `∂Q1/∂α = β exp(−(α² + β²)/2) I1(αβ)`.
pub fn marcum_q1_dalpha(alpha: f64, beta: f64) -> f64 {
    if alpha <= 0.0 || beta <= 0.0 {
        return 0.0;
    }
    let gap = alpha - beta;
    if gap.abs() > SATURATION {
        return 0.0;
    }
    beta * bessel_i1_scaled(alpha * beta) * math::exp(-0.5 * gap * gap)
}

/// Radar constants: `K` of the SNR law and the false-alarm probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadarParams {
    power_constant: f64,
    false_alarm: f64,
    threshold: f64,
}

impl RadarParams {
    /// The threshold is derived as `v_t = −2 ln P_fa`.
    pub fn new(power_constant: f64, false_alarm: f64) -> Result<Self> {
        if !(power_constant > 0.0) || !power_constant.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "power constant must be positive, got {power_constant}"
            )));
        }
        if !(false_alarm > 0.0 && false_alarm < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "false-alarm probability must be in (0, 1), got {false_alarm}"
            )));
        }
        Ok(Self {
            power_constant,
            false_alarm,
            threshold: -2.0 * math::ln(false_alarm),
        })
    }

    pub fn power_constant(&self) -> f64 {
        self.power_constant
    }

    pub fn false_alarm(&self) -> f64 {
        self.false_alarm
    }

    /// `v_t`.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn snr(&self, r1: f64, r2: f64) -> f64 {
        self.power_constant / (r1 * r1 * r2 * r2)
    }

    /// `α = √(2·SNR) = √(2K)/(R1 R2)`.
    fn alpha(&self, r1: f64, r2: f64) -> f64 {
        math::sqrt(2.0 * self.power_constant) / (r1 * r2)
    }

    fn check(r1: f64, r2: f64) -> Result<()> {
        if r1 > 0.0 && r2 > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "ranges must be positive, got R1 = {r1}, R2 = {r2}"
            )))
        }
    }

    /// Detection probability at ranges `r1`, `r2`.
    pub fn detection_probability(&self, r1: f64, r2: f64) -> Result<f64> {
        Self::check(r1, r2)?;
        Ok(self.probability_unchecked(r1, r2))
    }

    pub(crate) fn probability_unchecked(&self, r1: f64, r2: f64) -> f64 {
        if r1 <= 0.0 || r2 <= 0.0 {
            return 1.0;
        }
        marcum_q1(self.alpha(r1, r2), math::sqrt(self.threshold))
    }

    /// `∂P/∂R1` (the `R2` partial follows by symmetry). Nonpositive.
    pub fn detection_partial_r1(&self, r1: f64, r2: f64) -> Result<f64> {
        Self::check(r1, r2)?;
        Ok(self.partial_unchecked(r1, r2))
    }

    pub(crate) fn partial_unchecked(&self, r1: f64, r2: f64) -> f64 {
        if r1 <= 0.0 || r2 <= 0.0 {
            return 0.0;
        }
        let alpha = self.alpha(r1, r2);
        // dα/dR1 = −α/R1.
        -marcum_q1_dalpha(alpha, math::sqrt(self.threshold)) * alpha / r1
    }
}

/// `P_d(R1, R2)` for the given radar.
pub fn detection_probability(r1: f64, r2: f64, params: &RadarParams) -> Result<f64> {
    params.detection_probability(r1, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain power series summed to 40 terms.
    fn i0_series_oracle(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=40 {
            term *= (x / 2.0) * (x / 2.0) / ((k * k) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn i0_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        let v = bessel_i0(1.0);
        assert!((v - i0_series_oracle(1.0)).abs() < 1e-12);
        assert!((v - 1.266_065_877_752_008_4).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..400 {
            let x = i as f64 * 0.1;
            let v = bessel_i0(x);
            assert!(v > prev, "not increasing at {x}");
            prev = v;
        }
    }

    #[test]
    fn i0_branches_agree_at_switch() {
        // The asymptotic branch must agree with the series near the switch.
        for x in [15.0, 16.0, 20.0] {
            let series = bessel_series(x, 0);
            let asym = libm::exp(x) * bessel_scaled_asymptotic(x, 0.0);
            assert!(((series - asym) / series).abs() < 1e-10, "x = {x}");
            let series = bessel_series(x, 1);
            let asym = libm::exp(x) * bessel_scaled_asymptotic(x, 4.0);
            assert!(((series - asym) / series).abs() < 1e-10, "x = {x}");
        }
        let lead = 1.0 / libm::sqrt(2.0 * core::f64::consts::PI * 1e6);
        assert!(((bessel_i0_scaled(1e6) - lead) / lead - 1.25e-7).abs() < 1e-12);
    }

    #[test]
    fn marcum_limits() {
        assert_eq!(marcum_q1(1.3, 0.0), 1.0);
        assert!((marcum_q1(0.0, 1.0) - 0.606_530_659_712_633_4).abs() < 1e-15);
        assert_eq!(marcum_q1(1e6, 3.0), 1.0);
        assert_eq!(marcum_q1(0.5, 60.0), 0.0);
        // Continuity across the saturation shortcut.
        assert!(1.0 - marcum_q1(44.9, 5.0) < 1e-14);
    }

    #[test]
    fn marcum_derivative_matches_difference() {
        for &(a, b) in &[(1.0, 1.0), (3.0, 4.5), (0.4, 2.0), (8.0, 6.0)] {
            let h = 1e-6;
            let fd = (marcum_q1(a + h, b) - marcum_q1(a - h, b)) / (2.0 * h);
            let exact = marcum_q1_dalpha(a, b);
            assert!((fd - exact).abs() < 1e-8, "({a}, {b}): {fd} vs {exact}");
        }
    }

    #[test]
    fn detection_probability_properties() {
        let p = RadarParams::new(0.05, 1e-4).unwrap();
        assert!((p.threshold() + 2.0 * libm::log(1e-4)).abs() < 1e-15);
        // Far away the detector only sees false alarms.
        let far = p.detection_probability(1e4, 1e4).unwrap();
        assert!((far - 1e-4).abs() < 1e-12);
        let near = p.detection_probability(1e-3, 1e-3).unwrap();
        assert_eq!(near, 1.0);
        assert_eq!(
            p.detection_probability(0.3, 0.7).unwrap(),
            p.detection_probability(0.7, 0.3).unwrap()
        );
        assert!(p.detection_probability(0.0, 1.0).is_err());
        assert!(p.detection_partial_r1(-1.0, 1.0).is_err());
        assert!(RadarParams::new(1.0, 1.0).is_err());
        assert!(RadarParams::new(0.0, 0.1).is_err());
    }
}
