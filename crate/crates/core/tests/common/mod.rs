//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Involution counts `I(0..=n)` from `I(m) = I(m−1) + (m−1) I(m−2)`.
pub fn involutions(n: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::one(), BigUint::one()];
    for m in 2..=n {
        let next = &out[m - 1] + BigUint::from(m - 1) * &out[m - 2];
        out.push(next);
    }
    out.truncate(n + 1);
    out
}

/// Positive root of `x² + x = n`.
pub fn quadratic_root(n: f64) -> f64 {
    (-1.0 + (1.0 + 4.0 * n).sqrt()) / 2.0
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    /// One panel: endpoints, their values and the midpoint value.
    #[derive(Clone, Copy)]
    struct Panel {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
    }
    impl Panel {
        fn simpson(&self) -> f64 {
            (self.b - self.a) / 6.0 * (self.fa + 4.0 * self.fm + self.fb)
        }
    }
    fn step<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (p.a + p.b);
        let left = Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: f(0.5 * (p.a + m)),
            fb: p.fm,
        };
        let right = Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: f(0.5 * (m + p.b)),
            fb: p.fb,
        };
        let (l, r) = (left.simpson(), right.simpson());
        let delta = l + r - p.simpson();
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return l + r + delta / 15.0;
        }
        step(f, left, 0.5 * tol, depth - 1) + step(f, right, 0.5 * tol, depth - 1)
    }
    let whole = Panel {
        a,
        b,
        fa: f(a),
        fm: f(0.5 * (a + b)),
        fb: f(b),
    };
    step(f, whole, tol, 50)
}

/// `ρ(3) = ρ(2) − ∫_2^3 (1 − ln(t − 1))/t dt`, with `ρ = 1 − ln u` on `[1, 2]`.
pub fn rho_three_by_quadrature() -> f64 {
    let integrand = |t: f64| (1.0 - (t - 1.0).ln()) / t;
    (1.0 - 2f64.ln()) - adaptive_simpson(&integrand, 2.0, 3.0, 1e-15)
}

/// Root of `e^ξ = 1 + uξ` on `[ln u, 2 ln u]` by bisection, `u > 1`.
pub fn xi_by_bisection(u: f64) -> f64 {
    // (e^x − 1 − x)/x against u − 1; the Taylor form keeps u → 1 accurate.
    let excess = |x: f64| {
        if x < 1.0 {
            let (mut term, mut sum) = (x / 2.0, 0.0);
            for k in 3..40 {
                sum += term;
                term *= x / k as f64;
            }
            sum
        } else {
            (x.exp_m1() - x) / x
        }
    };
    let g = |x: f64| excess(x) - (u - 1.0);
    let (mut lo, mut hi) = (u.ln(), 2.0 * u.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub type Series = Vec<BigRational>;

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn mul(a: &Series, b: &Series, len: usize) -> Series {
    let mut out = vec![BigRational::zero(); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `a^α` for `a_0 = 1` by the power recurrence `k b_k = Σ_{i≤k} ((α+1)i − k) a_i b_{k−i}`.
fn power(a: &Series, alpha: &BigRational, len: usize) -> Series {
    let mut out = vec![BigRational::one()];
    for k in 1..len {
        let mut acc = BigRational::zero();
        for i in 1..=k.min(a.len() - 1) {
            let weight = (alpha + BigRational::one()) * q(i as i64, 1) - q(k as i64, 1);
            acc += weight * &a[i] * &out[k - i];
        }
        out.push(acc / q(k as i64, 1));
    }
    out
}

fn reciprocal(a: &Series, len: usize) -> Series {
    power(a, &q(-1, 1), len)
}

/// `ln a` for `a_0 = 1`.
fn log(a: &Series, len: usize) -> Series {
    let mut out = vec![BigRational::zero(); len];
    for k in 1..len {
        let mut acc = a.get(k).cloned().unwrap_or_else(BigRational::zero);
        for (i, li) in out.iter().enumerate().take(k).skip(1) {
            acc -= q(i as i64, k as i64)
                * li
                * a.get(k - i).cloned().unwrap_or_else(BigRational::zero);
        }
        out[k] = acc;
    }
    out
}

/// Coefficient families obtained by direct series manipulation.
pub struct SeriesOracle {
    pub r: usize,
    /// `[z^N] z/y`
    pub g: Vec<f64>,
    /// `[z^N] ln(z/y)`, index 0 unused
    pub b: Vec<f64>,
    /// `h_N` for `N = −r..=len−1−r`, shifted by `r`
    pub h: Vec<f64>,
    /// `[z^N] (z^r Σ j/y^j)^{−1}`
    pub lambda: Vec<f64>,
}

/// Solves `y = z·((1 − y^r)/(1 − y))^{1/r}` by fixed-point iteration in
/// truncated rational series with `len` coefficients.
pub fn series_oracle(r: usize, len: usize) -> SeriesOracle {
    let alpha = q(1, r as i64);
    // Each pass fixes one more coefficient of y/z.
    let mut y_over_z: Series = vec![BigRational::one()];
    for pass in 1..len {
        let cur = pass + 1;
        let mut y = vec![BigRational::zero()];
        y.extend(y_over_z.iter().cloned());
        y.truncate(cur);
        // 1 + y + … + y^{r−1}
        let mut poly = vec![BigRational::zero(); cur];
        let mut y_pow: Series = vec![BigRational::one()];
        for _ in 0..r {
            for (p, c) in poly.iter_mut().zip(&y_pow) {
                *p += c;
            }
            y_pow = mul(&y_pow, &y, cur);
        }
        y_over_z = power(&poly, &alpha, cur);
    }
    let g = reciprocal(&y_over_z, len);
    let b = log(&g, len);
    // h_N = Σ_j (1/j) [z^{N+j}] g^j;  Λ = (Σ_j j z^{r−j} g^j)^{−1}
    let mut h = vec![BigRational::zero(); len];
    let mut denom = vec![BigRational::zero(); len];
    let mut g_pow = g.clone();
    for j in 1..=r {
        for (shifted, slot) in h.iter_mut().enumerate() {
            let idx = shifted + j;
            if idx >= r && idx - r < len {
                *slot += q(1, j as i64) * &g_pow[idx - r];
            }
        }
        for (k, slot) in denom.iter_mut().enumerate() {
            if k >= r - j {
                *slot += q(j as i64, 1) * &g_pow[k - (r - j)];
            }
        }
        g_pow = mul(&g_pow, &g, len);
    }
    let lead = denom[0].clone();
    let normalized: Series = denom.iter().map(|c| c / &lead).collect();
    let lambda: Series = reciprocal(&normalized, len)
        .iter()
        .map(|c| c / &lead)
        .collect();
    let to = |s: &Series| s.iter().map(|c| c.to_f64().unwrap()).collect::<Vec<_>>();
    SeriesOracle {
        r,
        g: to(&g),
        b: to(&b),
        h: to(&h),
        lambda: to(&lambda),
    }
}

/// `|a − b| ≤ tol·max(1, |b|)`
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// `Σ_{j=1}^r x^j` for `x = e^{log_x}`, Kahan-summed.
///
/// Takes `ln x`: for `r` in the hundreds of thousands, rounding `x` itself
/// moves the sum by more than `1e-12` relative.
pub fn power_sum(log_x: f64, r: u64) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for j in 1..=r {
        let y = (j as f64 * log_x).exp() - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
