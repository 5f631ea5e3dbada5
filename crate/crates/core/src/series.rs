//! Inversion coefficients for the small-`r` regime.
//!
//! `y(z)` solves `y = z·((1 − y^r)/(1 − y))^{1/r}` and `g(z) = z/y(z)`. The
//! coefficient families are
//!
//! * `g_N^{(j)} = [z^N] g^j`, with `g_N = g_N^{(1)}`,
//! * `b_N = [z^N] ln g`,
//! * `h_N = [z^N] Σ_{j≤r} 1/(j y^j)` for `N ≥ −r`,
//! * `Λ_N = [z^N] (z^r Σ_{j≤r} j/y^j)^{−1}`,
//! * `d_{r,N}`, the coefficients of `n^{(r−N)/r}` in `ln(n!ν(n, r))`.
//!
//! Each `g` and `b` is a sum of products of generalized binomials with
//! rational upper argument `(N − j)/r`. In double precision those sums cancel
//! catastrophically once `N` exceeds `r` (terms near 1e15 summing to 0 at
//! `r = 2, N = 40`), so the tables are evaluated in exact rational arithmetic
//! and rounded once. [`phi_power_coeff`] keeps the log-Γ evaluation for real
//! exponents.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::logvalue::LogValue;
use crate::numeric::gamma::{gen_binomial, ln_gamma};

/// A value together with whether its inputs lie in the range where the
/// underlying expansion is proven.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeChecked<T> {
    pub value: T,
    pub in_proven_range: bool,
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `C(a, k) = a(a−1)…(a−k+1)/k!` for rational `a`.
fn binomial_exact(a: &BigRational, k: u64) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..k {
        acc *= a - BigRational::from_integer(BigInt::from(i));
        acc /= BigRational::from_integer(BigInt::from(i + 1));
    }
    acc
}

/// `[y^N] ((1 − y^r)/(1 − y))^α` as `Σ_{rl+m=N} C(α, l)(−1)^l C(m−1+α, m)`,
/// with the binomials through log-Γ.
pub fn phi_power_coeff(r: u64, alpha: f64, n: u64) -> f64 {
    let mut acc = 0.0;
    let mut l = 0;
    while r * l <= n {
        let m = n - r * l;
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * gen_binomial(alpha, l) * gen_binomial(m as f64 - 1.0 + alpha, m);
        l += 1;
    }
    acc
}

/// Exact [`phi_power_coeff`] for rational `α`.
pub fn phi_power_coeff_exact(r: u64, alpha: &BigRational, n: u64) -> BigRational {
    let mut acc = BigRational::zero();
    let mut l = 0;
    while r * l <= n {
        let m = n - r * l;
        let shifted = BigRational::from_integer(BigInt::from(m)) - BigRational::one() + alpha;
        let term = binomial_exact(alpha, l) * binomial_exact(&shifted, m);
        if l % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        l += 1;
    }
    acc
}

fn check_r(r: u64) -> Result<()> {
    if r < 2 {
        return Err(Error::range("r", format!("need r >= 2, got {r}")));
    }
    Ok(())
}

/// Exact `g_N^{(j)} = [z^N] (z/y(z))^j`.
pub fn g_coeff_exact(r: u64, j: u64, n: u64) -> Result<BigRational> {
    check_r(r)?;
    if j == 0 {
        return Err(Error::range("j", "need j >= 1".to_string()));
    }
    let r_inv = ratio(1, r as i64);
    if n == j {
        let indicator = if j.is_multiple_of(r) {
            BigRational::one()
        } else {
            BigRational::zero()
        };
        return Ok(indicator - r_inv);
    }
    let (ni, ji, ri) = (n as i64, j as i64, r as i64);
    let alpha = ratio(ni - ji, ri);
    Ok(ratio(ji, ji - ni) * phi_power_coeff_exact(r, &alpha, n))
}

/// `g_N^{(j)}` rounded to double.
pub fn g_coeff(r: u64, j: u64, n: u64) -> Result<f64> {
    g_coeff_exact(r, j, n).map(|q| to_f64(&q))
}

/// Exact `b_N = [z^N] ln(z/y(z))`, `N ≥ 1`.
pub fn b_coeff_exact(r: u64, n: u64) -> Result<BigRational> {
    check_r(r)?;
    if n == 0 {
        return Err(Error::range("N", "b_N starts at N = 1".to_string()));
    }
    if n == r {
        return Ok(BigRational::zero());
    }
    let alpha = ratio(n as i64, r as i64);
    Ok(-phi_power_coeff_exact(r, &alpha, n) / BigRational::from_integer(BigInt::from(n)))
}

/// `b_N` rounded to double.
pub fn b_coeff(r: u64, n: u64) -> Result<f64> {
    if n >= 1 && n < r {
        return Ok(b_closed_form(r, n));
    }
    b_coeff_exact(r, n).map(|q| to_f64(&q))
}

/// `b_N = −Γ(N + N/r)/(N Γ(N+1) Γ(N/r))` for `1 ≤ N ≤ r − 1`.
fn b_closed_form(r: u64, n: u64) -> f64 {
    let (nf, a) = (n as f64, n as f64 / r as f64);
    -(ln_gamma(nf + a) - ln_gamma(nf + 1.0) - ln_gamma(a)).exp() / nf
}

/// `−(1/r) Σ_{j=2}^r 1/j`
fn constant_term_exact(r: u64) -> BigRational {
    let mut h = BigRational::zero();
    for j in 2..=r {
        h += ratio(1, j as i64);
    }
    -h / BigRational::from_integer(BigInt::from(r))
}

/// Exact `d_{r,N}`: `−1 + 1/r` at `N = 0`, `−(1/r)Σ_{j=2}^r 1/j` at `N = r`, and
/// `Π_{k=1}^{N−1}(k + N/r) / ((r − N) N!)` between.
pub fn d_coeff_exact(r: u64, n: u64) -> Result<BigRational> {
    check_r(r)?;
    if n > r {
        return Err(Error::range(
            "N",
            format!("need 0 <= N <= r = {r}, got {n}"),
        ));
    }
    if n == 0 {
        return Ok(ratio(1 - r as i64, r as i64));
    }
    if n == r {
        return Ok(constant_term_exact(r));
    }
    let a = ratio(n as i64, r as i64);
    let mut acc = BigRational::one();
    for k in 1..n {
        acc *= &a + BigRational::from_integer(BigInt::from(k));
        acc /= BigRational::from_integer(BigInt::from(k + 1));
    }
    Ok(acc / BigRational::from_integer(BigInt::from(r - n)))
}

/// `d_{r,N}` in double precision; interior values via log-Γ.
pub fn d_coeff(r: u64, n: u64) -> Result<f64> {
    check_r(r)?;
    if n > r {
        return Err(Error::range(
            "N",
            format!("need 0 <= N <= r = {r}, got {n}"),
        ));
    }
    if n == 0 || n == r {
        return d_coeff_exact(r, n).map(|q| to_f64(&q));
    }
    let (nf, a) = (n as f64, n as f64 / r as f64);
    Ok((ln_gamma(nf + a) - ln_gamma(nf + 1.0) - ln_gamma(1.0 + a)).exp() / (r - n) as f64)
}

/// Coefficient families for one `r`, indexed `0..=n_max` unless noted.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    pub r: u64,
    pub n_max: u64,
    /// `g_0..g_{n_max}`
    pub g: Vec<f64>,
    /// `b_0..b_{n_max + r}` with `b_0 = 0`; the tail feeds `h`.
    pub b: Vec<f64>,
    /// `h_{−r}..h_{n_max}`; see [`CoeffTable::h`].
    pub h_shifted: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `d_{r,0}..d_{r,r}`
    pub d: Vec<f64>,
    pub d_exact: Vec<BigRational>,
}

impl CoeffTable {
    /// `h_N` for `−r ≤ N ≤ n_max`.
    pub fn h(&self, n: i64) -> Option<f64> {
        let idx = n + self.r as i64;
        (idx >= 0)
            .then(|| self.h_shifted.get(idx as usize).copied())
            .flatten()
    }
}

/// Default table depth `4r`.
pub fn default_n_max(r: u64) -> u64 {
    4 * r
}

pub fn build_coeff_table(r: u64, n_max: u64) -> Result<CoeffTable> {
    check_r(r)?;
    if n_max < r {
        return Err(Error::range(
            "n_max",
            format!("need n_max >= r = {r}, got {n_max}"),
        ));
    }
    let g = (0..=n_max)
        .map(|n| g_coeff(r, 1, n))
        .collect::<Result<Vec<_>>>()?;
    let b_exact = std::iter::once(Ok(BigRational::zero()))
        .chain((1..=n_max + r).map(|n| b_coeff_exact(r, n)))
        .collect::<Result<Vec<_>>>()?;
    let b: Vec<f64> = b_exact.iter().map(to_f64).collect();
    let r_inv = ratio(1, r as i64);
    let h_shifted = (-(r as i64)..=n_max as i64)
        .map(|n| {
            let q = match n {
                n if n == -(r as i64) => r_inv.clone(),
                0 => constant_term_exact(r),
                n => ratio(n + r as i64, n) * &b_exact[(n + r as i64) as usize],
            };
            to_f64(&q)
        })
        .collect();
    let lambda = (0..=n_max)
        .map(|n| {
            if n == 0 {
                to_f64(&r_inv)
            } else {
                to_f64(&(-ratio(n as i64, r as i64) * &b_exact[n as usize]))
            }
        })
        .collect();
    let d_exact = (0..=r)
        .map(|n| d_coeff_exact(r, n))
        .collect::<Result<Vec<_>>>()?;
    let d = d_exact.iter().map(to_f64).collect();
    Ok(CoeffTable {
        r,
        n_max,
        g,
        b,
        h_shifted,
        lambda,
        d,
        d_exact,
    })
}

/// `n^{1/r} − 1/r − Σ_{N=2}^r Γ(N + (N−1)/r)/((N−1)Γ(N+1)Γ((N−1)/r)) n^{−(N−1)/r} + n^{−1+1/r}/r`,
/// the saddle point to `O(1/n)` for `2 ≤ r ≤ ln n`.
///
/// Computed for any `r ≥ 2`; `in_proven_range` reports `r ≤ ln n`.
pub fn x_expansion(n: u64, r: u64) -> Result<RegimeChecked<f64>> {
    check_r(r)?;
    if n < 2 {
        return Err(Error::range("n", format!("need n >= 2, got {n}")));
    }
    let (nf, rf) = (n as f64, r as f64);
    let ln_n = nf.ln();
    let mut acc = (ln_n / rf).exp() - 1.0 / rf;
    for big_n in 2..=r {
        let k = big_n as f64;
        let a = (k - 1.0) / rf;
        let coeff = (ln_gamma(k + a) - ln_gamma(k + 1.0) - ln_gamma(a)).exp() / (k - 1.0);
        acc -= coeff * (-a * ln_n).exp();
    }
    acc += ((-1.0 + 1.0 / rf) * ln_n).exp() / rf;
    Ok(RegimeChecked {
        value: acc,
        in_proven_range: rf <= ln_n,
    })
}

/// `ln(n!ν(n, r)) ≈ −½ ln r + n(1 − 1/r) ln n + Σ_{N=0}^r d_{r,N} n^{(r−N)/r}`.
///
/// Proven for `2 ≤ r ≤ ln n`; `in_proven_range` reports `r ≤ max(2, ⌈ln n⌉)`.
pub fn theorem1_estimate(n: u64, r: u64) -> Result<RegimeChecked<LogValue>> {
    check_r(r)?;
    if n < 1 {
        return Err(Error::range("n", "need n >= 1".to_string()));
    }
    let (nf, rf) = (n as f64, r as f64);
    let ln_n = nf.ln();
    let mut terms = vec![-0.5 * rf.ln(), nf * (1.0 - 1.0 / rf) * ln_n];
    for big_n in 0..=r {
        let power = ((r - big_n) as f64 / rf * ln_n).exp();
        terms.push(d_coeff(r, big_n)? * power);
    }
    let value = crate::numeric::sum::compensated_sum(terms);
    Ok(RegimeChecked {
        value: LogValue::from_ln(value),
        in_proven_range: r <= 2u64.max(ln_n.ceil() as u64),
    })
}

/// `|q|` as a double, for bounds checks on exact coefficients.
pub fn abs_f64(q: &BigRational) -> f64 {
    to_f64(&q.abs())
}
