//! Log-gamma with sign tracking and generalized binomial coefficients.

use std::f64::consts::PI;

/// `ln(2π)/2`
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this argument the Stirling series is reached by upward recurrence.
const STIRLING_MIN: f64 = 15.0;

/// `B_{2k} / (2k(2k-1))` for k = 1..=8.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn ln_gamma_stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut tail = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        tail = tail * inv2 + c;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + tail * inv
}

/// `(ln|Γ(x)|, sign Γ(x))`. Poles (non-positive integers) return `(+∞, 1.0)`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, 1.0);
    }
    if x <= 0.0 && x == x.floor() {
        return (f64::INFINITY, 1.0);
    }
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        let s = sin_pi(x);
        let (lg, _) = ln_gamma_signed(1.0 - x);
        let sign = if s < 0.0 { -1.0 } else { 1.0 };
        return ((PI / s.abs()).ln() - lg, sign);
    }
    if x >= STIRLING_MIN {
        return (ln_gamma_stirling(x), 1.0);
    }
    let mut shifted = x;
    let mut prod = 1.0;
    while shifted < STIRLING_MIN {
        prod *= shifted;
        shifted += 1.0;
    }
    (ln_gamma_stirling(shifted) - prod.ln(), 1.0)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    ln_gamma_signed(x).0
}

/// `ln n!`
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0)
}

/// `sin(πx)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor();
    match r {
        r if r == 0.0 || r == 1.0 => 0.0,
        r if r <= 0.5 => (PI * r).sin(),
        r if r <= 1.5 => (PI * (1.0 - r)).sin(),
        r => -(PI * (2.0 - r)).sin(),
    }
}

fn is_integer(a: f64) -> bool {
    a == a.floor()
}

/// Generalized binomial coefficient `C(a, k) = a(a-1)…(a-k+1)/k!` for real `a`.
///
/// Evaluated as `Γ(a+1)/(Γ(k+1)Γ(a-k+1))` through signed log-gamma. Integer `a`
/// is routed around the poles: `C(a, k) = 0` for `0 ≤ a < k`, and for negative
/// integers the upper-negation identity `C(a, k) = (-1)^k C(k-a-1, k)` is used.
pub fn gen_binomial(a: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let kf = k as f64;
    if is_integer(a) {
        if a >= 0.0 {
            if a < kf {
                return 0.0;
            }
            return (ln_gamma(a + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(a - kf + 1.0))
                .exp()
                .round_if_integral();
        }
        let m = kf - a - 1.0;
        let mag = (ln_gamma(m + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(m - kf + 1.0)).exp();
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        return sign * mag.round_if_integral();
    }
    let (top, s_top) = ln_gamma_signed(a + 1.0);
    let (bottom, s_bottom) = ln_gamma_signed(a - kf + 1.0);
    s_top * s_bottom * (top - ln_gamma(kf + 1.0) - bottom).exp()
}

/// Falling-product form of [`gen_binomial`], used as a cross-check.
pub fn gen_binomial_product(a: f64, k: u64) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (a - i as f64) / (i + 1) as f64;
    }
    acc
}

trait RoundIfIntegral {
    fn round_if_integral(self) -> f64;
}

impl RoundIfIntegral for f64 {
    // Integer binomials below 2^53 are exact integers; snap the exp/ln noise.
    fn round_if_integral(self) -> f64 {
        if self < 9.007_199_254_740_992e15 {
            self.round()
        } else {
            self
        }
    }
}
