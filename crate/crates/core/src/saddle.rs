//! Saddle point of `Σ_{j≤r} x^j = n` and the main term `Q(x)/√(2πλ₂)`.
//!
//! The root is found in `ℓ = ln x`: `F(ℓ) = Σ expm1(jℓ) − (n − r)` is convex
//! and increasing with `F' = λ₂`, and the residual of a rounded `ℓ` is about
//! `ξ·ε` relative rather than the `r·ε` a rounded `x` would give.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::dickman::i_integral;
use crate::error::{Error, Result};
use crate::logvalue::LogValue;
use crate::numeric::quad::GaussLegendre;
use crate::numeric::sum::CompensatedSum;

pub const DEFAULT_TOL: f64 = 1e-13;
pub const MAX_ITERATIONS: usize = 200;

const ZETA_TERMS: usize = 64;
const SERIES_CUTOFF: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleSolution {
    pub n: u64,
    pub r: u64,
    pub u: f64,
    pub x: f64,
    /// `ln x`, the variable the solver works in.
    pub log_x: f64,
    /// `|Σ x^j − n| / n`
    pub residual: f64,
    /// `λ₁..λ₄`
    pub lambda: [f64; 4],
    pub log_q: f64,
}

impl SaddleSolution {
    pub fn lambda2(&self) -> f64 {
        self.lambda[1]
    }
}

fn check_pair(n: u64, r: u64) -> Result<()> {
    if n == 0 || r == 0 || r > n {
        return Err(Error::range(
            "(n, r)",
            format!("need 1 <= r <= n, got n={n}, r={r}"),
        ));
    }
    Ok(())
}

/// `(Σ_{j≤r} expm1(jℓ), Σ_{j≤r} j e^{jℓ})`
fn power_sums(log_x: f64, r: u64) -> (f64, f64) {
    let mut excess = CompensatedSum::new();
    let mut slope = CompensatedSum::new();
    for j in 1..=r {
        let t = j as f64 * log_x;
        let em1 = t.exp_m1();
        excess.add(em1);
        slope.add(j as f64 * (em1 + 1.0));
    }
    (excess.value(), slope.value())
}

/// `Σ_{j≤r} j^{k−1} e^{jℓ}` for `k = 1..4`.
fn lambdas_from_log(log_x: f64, r: u64) -> [f64; 4] {
    if r as f64 * log_x.abs() <= f64::EPSILON {
        return lambda_polynomial_limits(r);
    }
    let mut acc = [CompensatedSum::new(); 4];
    for j in 1..=r {
        let jf = j as f64;
        let mut term = (jf * log_x).exp();
        for a in acc.iter_mut() {
            a.add(term);
            term *= jf;
        }
    }
    acc.map(|a| a.value())
}

/// `Σ_{j≤r} j^{k−1}` for `k = 1..4`.
fn lambda_polynomial_limits(r: u64) -> [f64; 4] {
    let r = r as f64;
    let s1 = r * (r + 1.0) / 2.0;
    [r, s1, s1 * (2.0 * r + 1.0) / 3.0, s1 * s1]
}

/// Solves `Σ_{j=1}^r x^j = n` for `x > 0` with relative residual at most `tol`.
///
/// Newton in `ℓ = ln x` from the lower end of the bracket
/// `ln u / r ≤ ℓ ≤ 2 ln u / (r + 1)`; iterates leaving the bracket are
/// replaced by bisection.
pub fn solve_saddle(n: u64, r: u64, tol: f64) -> Result<SaddleSolution> {
    check_pair(n, r)?;
    if !(1e-15..=1e-6).contains(&tol) {
        return Err(Error::range(
            "tol",
            format!("need 1e-15 <= tol <= 1e-6, got {tol}"),
        ));
    }
    let u = n as f64 / r as f64;
    if n == r {
        return Ok(finish(n, r, u, 0.0, 0.0));
    }
    if r == 1 {
        let mut sol = finish(n, r, u, (n as f64).ln(), 0.0);
        sol.x = n as f64;
        return Ok(sol);
    }
    let ln_u = u.ln();
    let (mut lo, mut hi) = (ln_u / r as f64, 2.0 * ln_u / (r as f64 + 1.0));
    let target = (n - r) as f64;
    let nf = n as f64;
    let mut log_x = lo.max(ln_u.ln_1p() / r as f64);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let (excess, slope) = power_sums(log_x, r);
        let f = excess - target;
        residual = f.abs() / nf;
        if f == 0.0 || residual <= 1e-3 * tol {
            return Ok(finish(n, r, u, log_x, residual));
        }
        if f > 0.0 {
            hi = hi.min(log_x);
        } else {
            lo = lo.max(log_x);
        }
        let mut next = log_x - f / slope;
        if !(next >= lo && next <= hi) {
            next = 0.5 * (lo + hi);
        }
        let stalled = (next - log_x).abs() <= 4.0 * f64::EPSILON * log_x
            || hi - lo <= 4.0 * f64::EPSILON * hi;
        if stalled {
            if residual <= tol {
                return Ok(finish(n, r, u, log_x, residual));
            }
            break;
        }
        log_x = next;
    }
    Err(Error::NoConvergence {
        solver: "saddle",
        iterations: MAX_ITERATIONS,
        last: log_x.exp(),
        residual,
    })
}

fn finish(n: u64, r: u64, u: f64, log_x: f64, residual: f64) -> SaddleSolution {
    SaddleSolution {
        n,
        r,
        u,
        x: log_x.exp(),
        log_x,
        residual,
        lambda: lambdas_from_log(log_x, r),
        log_q: log_q_from_log(log_x, n, r),
    }
}

/// `λ_k = Σ_{j=1}^r j^{k−1} x^j`, `k ∈ [1, 4]`.
pub fn lambda_k(x: f64, r: u64, k: usize) -> Result<f64> {
    if !(1..=4).contains(&k) {
        return Err(Error::range("k", format!("need 1 <= k <= 4, got {k}")));
    }
    if !(x > 0.0) {
        return Err(Error::range("x", format!("need x > 0, got {x}")));
    }
    Ok(lambdas_from_log(x.ln(), r)[k - 1])
}

/// `ln Q(x) = −n ln x + Σ_{j=1}^r (x^j − 1)/j`.
pub fn log_q(x: f64, n: u64, r: u64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::range("x", format!("need x > 0, got {x}")));
    }
    Ok(log_q_from_log(x.ln(), n, r))
}

fn log_q_from_log(log_x: f64, n: u64, r: u64) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.add(-(n as f64) * log_x);
    for j in 1..=r {
        let jf = j as f64;
        acc.add((jf * log_x).exp_m1() / jf);
    }
    acc.value()
}

/// `ln Q(x) − ½ ln(2πλ₂)` at the saddle point.
pub fn theorem2_estimate(n: u64, r: u64) -> Result<LogValue> {
    theorem2_estimate_with_tol(n, r, DEFAULT_TOL)
}

/// [`theorem2_estimate`] with an explicit saddle tolerance.
pub fn theorem2_estimate_with_tol(n: u64, r: u64, tol: f64) -> Result<LogValue> {
    let sol = solve_saddle(n, r, tol)?;
    Ok(LogValue::from_ln(
        sol.log_q - 0.5 * (2.0 * PI * sol.lambda2()).ln(),
    ))
}

fn zeta_even() -> &'static [f64; ZETA_TERMS] {
    static TABLE: OnceLock<[f64; ZETA_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = [0.0; ZETA_TERMS];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = zeta(2.0 * (k + 1) as f64);
        }
        out
    })
}

/// `ζ(s)` for `s ≥ 2`: 49 terms plus an Euler–Maclaurin tail.
fn zeta(s: f64) -> f64 {
    const M: f64 = 50.0;
    let head = CompensatedSum::from_iter((1..50).rev().map(|m| (m as f64).powf(-s)));
    let ms = M.powf(-s);
    let tail = M * ms / (s - 1.0) + 0.5 * ms + s * ms / (12.0 * M)
        - s * (s + 1.0) * (s + 2.0) * ms / (720.0 * M.powi(3))
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * ms / (30_240.0 * M.powi(5));
    head.value() + tail
}

fn check_t_domain(re: f64, im: f64, r: u64) -> Result<()> {
    let bound = PI * r as f64;
    if r == 0 || !(re.abs() <= bound && im.abs() <= bound) {
        return Err(Error::range(
            "z",
            format!("T(z) needs |Re z|, |Im z| <= πr = {bound}, got {re}{im:+}i"),
        ));
    }
    Ok(())
}

/// `T(z) = ∫_0^z (e^t − 1)/t · (w/(1 − e^{−w}) − 1) dt` with `w = t/r`.
///
/// Real `z` in `[−πr, πr]`. Nonnegative `z` uses the Bernoulli expansion
/// `(e^z − z − 1)/(2r) + 2 Σ_k (−1)^{k+1} ζ(2k)/(2πr)^{2k} ∫_0^z (e^t − 1)t^{2k−1} dt`;
/// its inner series alternate for negative `z`, which is integrated directly.
pub fn t_function(z: f64, r: u64) -> Result<f64> {
    check_t_domain(z, 0.0, r)?;
    let value = if z >= 0.0 {
        t_series(z, r)
    } else {
        t_quadrature(z, r)
    };
    if !value.is_finite() {
        return Err(Error::range("z", format!("T({z}) overflows")));
    }
    Ok(value)
}

/// Complex `T(z)` on the same square, by quadrature along `[0, z]`.
pub fn t_function_complex(z: Complex64, r: u64) -> Result<Complex64> {
    check_t_domain(z.re, z.im, r)?;
    let value = t_quadrature_complex(z, r);
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::range("z", format!("T({z}) overflows")));
    }
    Ok(value)
}

fn t_series(z: f64, r: u64) -> f64 {
    let rf = r as f64;
    let lead = if z < 1.0 {
        // Σ_{i≥2} z^i/i!
        let mut term = z;
        let mut acc = CompensatedSum::new();
        for i in 2..30 {
            term *= z / i as f64;
            acc.add(term);
            if term < SERIES_CUTOFF * acc.value() {
                break;
            }
        }
        acc.value()
    } else {
        z.exp_m1() - z
    };
    let mut total = CompensatedSum::new();
    total.add(lead / (2.0 * rf));
    if z == 0.0 {
        return 0.0;
    }
    let q = (z / (2.0 * PI * rf)).powi(2);
    let mut q_pow = 1.0;
    for (k0, zeta) in zeta_even().iter().enumerate() {
        let k = (k0 + 1) as f64;
        q_pow *= q;
        // Σ_{i≥1} z^i/(i!(2k+i)), so that the integral is (2πr)^{2k} q^k times it.
        let mut inner = CompensatedSum::new();
        let mut pow_over_fact = 1.0;
        let mut i = 1u32;
        loop {
            pow_over_fact *= z / i as f64;
            let term = pow_over_fact / (2.0 * k + i as f64);
            inner.add(term);
            if i as f64 > z && term <= SERIES_CUTOFF * inner.value() {
                break;
            }
            i += 1;
        }
        let sign = if k0 % 2 == 0 { 1.0 } else { -1.0 };
        let term = 2.0 * sign * zeta * q_pow * inner.value();
        total.add(term);
        if term.abs() <= SERIES_CUTOFF * total.value().abs() || q_pow == 0.0 {
            break;
        }
    }
    total.value()
}

fn t_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// `w/(1 − e^{−w}) − 1`
fn bernoulli_generating_excess(w: f64) -> f64 {
    if w.abs() < 0.1 {
        let w2 = w * w;
        w / 2.0 + w2 / 12.0 - w2 * w2 / 720.0 + w2 * w2 * w2 / 30_240.0
            - w2 * w2 * w2 * w2 / 1_209_600.0
    } else {
        w / -(-w).exp_m1() - 1.0
    }
}

fn t_integrand(t: f64, r: f64) -> f64 {
    let ratio = if t == 0.0 { 1.0 } else { t.exp_m1() / t };
    ratio * bernoulli_generating_excess(t / r)
}

/// `T(z)` by composite Gauss–Legendre on panels of width at most 1/2.
/// Valid for any real `z`, including beyond the series domain.
pub(crate) fn t_quadrature(z: f64, r: u64) -> f64 {
    let rf = r as f64;
    let panels = (2.0 * z.abs()).ceil().max(1.0) as usize;
    t_rule().integrate_composite(0.0, z, panels, |t| t_integrand(t, rf))
}

fn complex_exp_m1(t: Complex64) -> Complex64 {
    if t.norm() < 0.5 {
        let mut term = t;
        let mut acc = t;
        for i in 2..30 {
            term = term * t / i as f64;
            acc += term;
            if term.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        acc
    } else {
        t.exp() - 1.0
    }
}

fn t_integrand_complex(t: Complex64, r: f64) -> Complex64 {
    if t == Complex64::new(0.0, 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let ratio = complex_exp_m1(t) / t;
    let w = t / r;
    let excess = if w.norm() < 0.1 {
        let w2 = w * w;
        w / 2.0 + w2 / 12.0 - w2 * w2 / 720.0 + w2 * w2 * w2 / 30_240.0
            - w2 * w2 * w2 * w2 / 1_209_600.0
    } else {
        w / -complex_exp_m1(-w) - 1.0
    };
    ratio * excess
}

fn t_quadrature_complex(z: Complex64, r: u64) -> Complex64 {
    let rf = r as f64;
    let panels = (2.0 * z.norm()).ceil().max(1.0) as usize;
    let step = z / panels as f64;
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for p in 0..panels {
        let mid = step * (p as f64 + 0.5);
        for (node, weight) in t_rule().points() {
            let v = t_integrand_complex(mid + step * (0.5 * node), rf) * (0.5 * weight) * step;
            re.add(v.re);
            im.add(v.im);
        }
    }
    Complex64::new(re.value(), im.value())
}

/// `|ln Q(x) − (−n ln x + I(r ln x) + T(r ln x))|` at the saddle point.
///
/// The identity is exact, so the result measures rounding and truncation in
/// the three evaluators. When `r ln x` lies outside the series domain of `T`
/// (only for `r ≤ 3` at large `n`) `T` is integrated directly.
pub fn q_decomposition_check(n: u64, r: u64) -> Result<f64> {
    let sol = solve_saddle(n, r, DEFAULT_TOL)?;
    if n == r {
        return Ok(0.0);
    }
    let s = r as f64 * sol.log_x;
    let t = if s <= PI * r as f64 {
        t_series(s, r)
    } else {
        t_quadrature(s, r)
    };
    let rhs = -(sol.u * r as f64) * sol.log_x + i_integral(s)? + t;
    Ok((sol.log_q - rhs).abs())
}
