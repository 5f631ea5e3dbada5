//! Exact and floating-point values of `ν(n, r)`, the probability that a
//! uniform random permutation of `n` elements has no cycle longer than `r`.
//!
//! Three independent routes are provided:
//!
//! * [`exact_count`]: the integer `n!·ν(n, r)` from the recurrence
//!   `a(m) = Σ_{j=1}^{min(r,m)} (m−1)!/(m−j)! · a(m−j)`, `a(0) = 1`;
//! * [`brute_force_count`]: enumeration of `S_n` for tiny `n`;
//! * [`nu_log`] / [`coefficient_oracle`]: the coefficient `[z^n] exp(Σ_{j≤r} z^j/j)`
//!   through the log-derivative convolution `c_m = (1/m) Σ_{j≤min(r,m)} c_{m−j}`,
//!   in double precision (log-scaled) and in extended precision respectively.
//!
//! `ν(n, r) = e^{H_r} · P(ℓ_r(Z) = n)` with independent Poisson `Z_j`, `E Z_j = 1/j`,
//! so [`poisson_local_prob_log`] is `ln ν − H_r`.

use astro_float::{BigFloat, RoundingMode};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::logvalue::LogValue;
use crate::numeric::gamma::ln_factorial;
use crate::numeric::sum::{compensated_sum, CompensatedSum};

/// Largest `n` accepted by [`exact_count`].
pub const DEFAULT_BIGINT_MAX_N: u64 = 2000;
/// Largest `n` accepted by [`nu_log`].
pub const DEFAULT_FLOAT_MAX_N: u64 = 1_000_000;
/// Largest `n` accepted by [`brute_force_count`].
pub const BRUTE_FORCE_MAX_N: u64 = 10;
/// Largest `n` accepted by [`coefficient_oracle`].
pub const ORACLE_MAX_N: u64 = 5000;

/// Number of permutations of `n` elements with every cycle of length `≤ r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleBoundCount {
    pub n: u64,
    pub r: u64,
    /// `n!·ν(n, r)`
    pub count: BigUint,
}

impl CycleBoundCount {
    /// `ln count`
    pub fn ln_count(&self) -> f64 {
        ln_biguint(&self.count)
    }

    /// `ln ν(n, r) = ln count − ln n!`
    pub fn nu_ln(&self) -> f64 {
        self.ln_count() - ln_factorial(self.n)
    }

    pub fn nu(&self) -> LogValue {
        LogValue::from_ln(self.nu_ln())
    }
}

/// `H_r = Σ_{j=1}^r 1/j`, the log of `exp{Σ E Z_j}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFactor {
    pub r: u64,
    pub value: f64,
}

impl HarmonicFactor {
    pub fn new(r: u64) -> Self {
        HarmonicFactor {
            r,
            value: harmonic(r),
        }
    }
}

/// `H_r`, summed smallest term first.
pub fn harmonic(r: u64) -> f64 {
    compensated_sum((1..=r).rev().map(|j| 1.0 / j as f64))
}

fn check_pair(n: u64, r: u64, max_n: u64) -> Result<()> {
    if n == 0 || n > max_n {
        return Err(Error::range("n", format!("n = {n} not in [1, {max_n}]")));
    }
    if r == 0 || r > n {
        return Err(Error::range("r", format!("r = {r} not in [1, n = {n}]")));
    }
    Ok(())
}

/// Exact `n!·ν(n, r)` for `1 ≤ r ≤ n ≤` [`DEFAULT_BIGINT_MAX_N`].
pub fn exact_count(n: u64, r: u64) -> Result<CycleBoundCount> {
    exact_count_with_limit(n, r, DEFAULT_BIGINT_MAX_N)
}

/// [`exact_count`] with a caller-chosen cap on `n`.
pub fn exact_count_with_limit(n: u64, r: u64, max_n: u64) -> Result<CycleBoundCount> {
    check_pair(n, r, max_n)?;
    let count = exact_count_unchecked(n, r);
    Ok(CycleBoundCount { n, r, count })
}

fn exact_count_unchecked(n: u64, r: u64) -> BigUint {
    // Window of the last r values a(m-r) .. a(m-1); window[i] = a(m-1-i) after rotation.
    let r = r as usize;
    let mut window: std::collections::VecDeque<BigUint> =
        std::collections::VecDeque::with_capacity(r);
    window.push_front(BigUint::one()); // a(0)
    for m in 1..=n {
        let terms = (m as usize).min(r);
        // Nested form of Σ_{j=1}^{terms} (m-1)(m-2)…(m-j+1)·a(m-j):
        // a(m-1) + (m-1)(a(m-2) + (m-2)(a(m-3) + … + (m-terms+1)·a(m-terms))).
        let mut acc = window[terms - 1].clone();
        for j in (1..terms).rev() {
            acc *= m - j as u64;
            acc += &window[j - 1];
        }
        window.push_front(acc);
        if window.len() > r {
            window.pop_back();
        }
    }
    window.pop_front().expect("window holds a(n)")
}

/// Enumerates `S_n` and counts permutations whose longest cycle is `≤ r`.
pub fn brute_force_count(n: u64, r: u64) -> Result<u64> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Resource(format!(
            "brute force refused for n = {n} > {BRUTE_FORCE_MAX_N}"
        )));
    }
    if n == 0 {
        return Ok(1);
    }
    if r == 0 {
        return Err(Error::range("r", "r must be positive"));
    }
    let n = n as usize;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counter = vec![0usize; n];
    let mut total = u64::from(longest_cycle(&perm) as u64 <= r);
    // Heap's algorithm, iterative form.
    let mut i = 1;
    while i < n {
        if counter[i] < i {
            let k = if i % 2 == 0 { 0 } else { counter[i] };
            perm.swap(k, i);
            total += u64::from(longest_cycle(&perm) as u64 <= r);
            counter[i] += 1;
            i = 1;
        } else {
            counter[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

/// Longest cycle by index chasing with a visited mask.
fn longest_cycle(perm: &[usize]) -> usize {
    let mut visited = 0u32;
    let mut longest = 0;
    for start in 0..perm.len() {
        if visited & (1 << start) != 0 {
            continue;
        }
        let mut len = 0;
        let mut at = start;
        while visited & (1 << at) == 0 {
            visited |= 1 << at;
            at = perm[at];
            len += 1;
        }
        longest = longest.max(len);
    }
    longest
}

/// Rescale threshold for the float recurrence: keep the newest value above 2^-512.
const RESCALE_BITS: i32 = 512;
/// Window-sum work (steps × r) above which [`nu_log`] switches to incremental sums.
const DIRECT_SUM_BUDGET: u64 = 200_000_000;

/// `ln ν(n, r)` from the double-precision recurrence `ν(m) = (1/m) Σ_{j≤r} ν(m−j)`.
pub fn nu_log(n: u64, r: u64) -> Result<LogValue> {
    nu_log_with_limit(n, r, DEFAULT_FLOAT_MAX_N)
}

/// [`nu_log`] with a caller-chosen cap on `n`.
///
/// Only the last `min(r, n)` values are kept. They are stored relative to a
/// power-of-two offset that is bumped whenever the newest value drops below
/// `2^-512`, so the recurrence runs far past the double underflow point.
pub fn nu_log_with_limit(n: u64, r: u64, max_n: u64) -> Result<LogValue> {
    if n > max_n {
        return Err(Error::Resource(format!(
            "float recurrence workspace limited to n <= {max_n}, got {n}"
        )));
    }
    check_pair(n, r, u64::MAX)?;
    if r >= n {
        return Ok(LogValue::ONE);
    }
    let r = r as usize;
    // ν(m, r) = 1 for m ≤ r, so the window starts full of ones.
    let mut ring = vec![1.0f64; r];
    let mut head = 0usize; // slot of the oldest value
    let mut scale_exp: i64 = 0; // true value = stored × 2^scale_exp
    let steps = n - r as u64;
    // Direct window sums cost O(r) per step. Past the budget the sum is
    // updated incrementally and re-summed from scratch every r steps, which
    // bounds the drift from subtracting the (largest) outgoing value.
    let incremental = steps.saturating_mul(r as u64) > DIRECT_SUM_BUDGET;
    let mut running = ring.iter().copied().collect::<CompensatedSum>();
    for (step, m) in ((r as u64 + 1)..=n).enumerate() {
        let sum = if !incremental {
            ring.iter().copied().collect::<CompensatedSum>().value()
        } else {
            if step % r == 0 {
                running = ring.iter().copied().collect::<CompensatedSum>();
            }
            running.value()
        };
        let next = sum / m as f64;
        if incremental {
            running.add(next);
            running.add(-ring[head]);
        }
        ring[head] = next;
        head = (head + 1) % r;
        if next < f64::powi(2.0, -RESCALE_BITS) {
            let factor = f64::powi(2.0, RESCALE_BITS);
            for v in ring.iter_mut() {
                *v *= factor;
            }
            running = running.scaled(factor);
            scale_exp -= RESCALE_BITS as i64;
        }
    }
    let newest = ring[(head + r - 1) % r];
    Ok(LogValue::from_ln(
        newest.ln() + scale_exp as f64 * std::f64::consts::LN_2,
    ))
}

/// `ln P(ℓ_r(Z) = n) = ln ν(n, r) − H_r`.
pub fn poisson_local_prob_log(n: u64, r: u64) -> Result<LogValue> {
    let nu = nu_log(n, r)?;
    Ok(LogValue::from_ln(nu.ln() - harmonic(r)))
}

/// `[z^n] exp(Σ_{j≤r} z^j / j)` in extended precision with `digits` decimal digits.
///
/// Same convolution as [`nu_log`] but carried in arbitrary-precision binary
/// floating point, so it checks the double-precision route's rounding and
/// rescaling. `n = 0` gives the constant term 1.
pub fn coefficient_oracle(n: u64, r: u64, digits: u32) -> Result<LogValue> {
    if !(15..=50).contains(&digits) {
        return Err(Error::Config(format!(
            "oracle precision must be 15..=50 digits, got {digits}"
        )));
    }
    if n > ORACLE_MAX_N {
        return Err(Error::range("n", format!("n = {n} > {ORACLE_MAX_N}")));
    }
    if r == 0 {
        return Err(Error::range("r", "r must be positive"));
    }
    if n == 0 {
        return Ok(LogValue::ONE);
    }
    // digits·log2(10) plus guard bits, rounded up to whole words.
    let bits = ((digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 32).div_ceil(64) * 64;
    let rm = RoundingMode::ToEven;
    let r = r as usize;
    let mut coeffs: Vec<BigFloat> = Vec::with_capacity(n as usize + 1);
    coeffs.push(BigFloat::from_word(1, bits));
    for m in 1..=n as usize {
        let terms = m.min(r);
        let mut sum = BigFloat::from_word(0, bits);
        for j in 1..=terms {
            sum = sum.add(&coeffs[m - j], bits, rm);
        }
        let next = sum.div(&BigFloat::from_word(m as u64, bits), bits, rm);
        coeffs.push(next);
    }
    ln_bigfloat(&coeffs[n as usize]).map(LogValue::from_ln)
}

fn ln_bigfloat(x: &BigFloat) -> Result<f64> {
    if x.is_zero() {
        return Ok(f64::NEG_INFINITY);
    }
    let words = x
        .mantissa_digits()
        .ok_or_else(|| Error::Resource("extended-precision value is not finite".into()))?;
    let exp = x.exponent().unwrap_or(0) as f64;
    let top = words.len() - 1;
    // 0.m in [1/2, 1) from the two most significant words.
    let mut frac = words[top] as f64 / 2f64.powi(64);
    if top > 0 {
        frac += words[top - 1] as f64 / 2f64.powi(128);
    }
    Ok(frac.ln() + exp * std::f64::consts::LN_2)
}

/// Natural log of a big unsigned integer, accurate to a few ulp.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().map(|v| (v as f64).ln()).unwrap_or(f64::NAN);
    }
    // Top 64 bits carry all the precision a double can hold.
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 bits after shift");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}
