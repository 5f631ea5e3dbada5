//! The Dickman function and the large-`r` estimates built on it.
//!
//! `ρ(u)` is the continuous solution of `u ρ'(u) + ρ(u − 1) = 0` with `ρ ≡ 1`
//! on `[0, 1]`. For `u > 1` the saddle point `ξ(u)` is the nonzero root of
//! `e^ξ = 1 + uξ` (and `ξ(1) = 0`), and `I(s) = ∫_0^s (e^v − 1)/v dv`.
//!
//! ρ is tabulated once, piece by piece, by collocation of the identity
//! `u ρ(u) = ∫_{u−1}^u ρ(t) dt`. Every term is positive, so relative error
//! does not grow as ρ decays; the difference form `ρ(a) − ∫_a^u ρ(t−1)/t`
//! keeps only absolute accuracy and is unusable past `u ≈ 10`. Each piece of
//! width `1/pieces_per_unit` holds ρ at Chebyshev–Lobatto nodes, normalized by
//! ρ at the piece's left end, plus a log-scale offset, so values far below the
//! double underflow threshold are available (ρ(500) ≈ 10^-1558).

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::logvalue::LogValue;
use crate::numeric::quad::GaussLegendre;
use crate::numeric::sum::CompensatedSum;

/// Euler–Mascheroni constant, 20 significant digits.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Largest argument the ρ table covers.
pub const RHO_MAX_U: f64 = 500.0;
/// Largest `|s|` accepted by [`i_integral`].
pub const I_MAX_ABS: f64 = 300.0;

const DEFAULT_PIECES_PER_UNIT: usize = 4;
const DEFAULT_DEGREE: usize = 16;
const QUAD_NODES: usize = 32;

/// `ξ(u)` together with `ξ'(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiValue {
    pub u: f64,
    pub xi: f64,
    pub xi_prime: f64,
}

/// Which route produced a [`DickmanContext`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoMethod {
    PiecewiseDde,
    AlladiAsymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickmanContext {
    pub u: f64,
    /// `ln ρ(u)`
    pub log_rho: f64,
    /// `I(ξ(u))`; absent for `u < 1` where ξ is undefined.
    pub i_xi: Option<f64>,
    pub method: RhoMethod,
}

impl DickmanContext {
    pub fn rho(&self) -> LogValue {
        LogValue::from_ln(self.log_rho)
    }
}

/// `(e^ξ − 1 − ξ)/ξ` and its derivative, with the series used near 0.
fn excess_ratio(xi: f64) -> (f64, f64) {
    if xi < 0.5 {
        // Σ_{k≥1} ξ^k/(k+1)!  and  Σ_{k≥1} k ξ^{k-1}/(k+1)!
        let mut value = 0.0;
        let mut deriv = 0.0;
        let mut pow = 1.0; // ξ^{k-1}
        let mut fact = 1.0; // (k+1)!
        for k in 1..40 {
            fact *= (k + 1) as f64;
            deriv += k as f64 * pow / fact;
            pow *= xi;
            value += pow / fact;
            if pow / fact < 1e-18 * value {
                break;
            }
        }
        (value, deriv)
    } else {
        let em1 = xi.exp_m1();
        let value = (em1 - xi) / xi;
        let deriv = ((xi - 1.0) * xi.exp() + 1.0) / (xi * xi);
        (value, deriv)
    }
}

/// `1 − 1/ξ + 1/(e^ξ − 1)`, so that `ξ' = 1/(u·D(ξ))`.
fn xi_prime_denominator(xi: f64) -> f64 {
    if xi < 0.1 {
        let x2 = xi * xi;
        0.5 + xi / 12.0 - xi * x2 / 720.0 + xi * x2 * x2 / 30_240.0
            - xi * x2 * x2 * x2 / 1_209_600.0
    } else {
        1.0 - 1.0 / xi + 1.0 / xi.exp_m1()
    }
}

/// Solves `e^ξ = 1 + uξ` for the nonzero root.
///
/// Newton on `(e^ξ − 1 − ξ)/ξ = u − 1`, a convex increasing function of ξ, so
/// the factor of ξ is divided out and `u → 1⁺` keeps full relative accuracy.
/// The iteration is kept inside `(ln u, 2 ln u]` by bisection.
pub fn solve_xi(u: f64, tol: f64) -> Result<XiValue> {
    if !(u >= 1.0) || !u.is_finite() {
        return Err(Error::range("u", format!("ξ(u) needs u >= 1, got {u}")));
    }
    if u == 1.0 {
        return Ok(XiValue {
            u,
            xi: 0.0,
            xi_prime: 2.0,
        });
    }
    let target = u - 1.0;
    let ln_u = u.ln();
    let (mut lo, mut hi) = (ln_u, 2.0 * ln_u);
    let mut xi = (ln_u + (u + 2.0).ln().ln()).clamp(lo, hi);
    let mut converged = false;
    for _ in 0..200 {
        let (value, deriv) = excess_ratio(xi);
        let h = value - target;
        if h > 0.0 {
            hi = xi;
        } else {
            lo = xi;
        }
        let mut next = xi - h / deriv;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - xi).abs();
        xi = next;
        if step <= tol * xi || hi - lo <= 2.0 * f64::EPSILON * xi {
            converged = true;
            break;
        }
    }
    if !converged {
        let (value, _) = excess_ratio(xi);
        return Err(Error::NoConvergence {
            solver: "xi",
            iterations: 200,
            last: xi,
            residual: value - target,
        });
    }
    // One unconditional step removes the bias of stopping on the step size.
    let (value, deriv) = excess_ratio(xi);
    let polished = xi - (value - target) / deriv;
    if polished >= lo && polished <= hi {
        xi = polished;
    }
    Ok(XiValue {
        u,
        xi,
        xi_prime: 1.0 / (u * xi_prime_denominator(xi)),
    })
}

/// `I(s) = ∫_0^s (e^v − 1)/v dv`.
///
/// The series `Σ s^k/(k·k!)` is used for `s ≥ −2`; for more negative `s` the
/// alternating series cancels badly and `I(−x) = −(γ + ln x + E₁(x))` is used.
pub fn i_integral(s: f64) -> Result<f64> {
    if !(s.abs() <= I_MAX_ABS) {
        return Err(Error::range(
            "s",
            format!("|s| = {} > {I_MAX_ABS}", s.abs()),
        ));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    if s < -2.0 {
        let x = -s;
        return Ok(-(EULER_GAMMA + x.ln() + exp_integral_e1(x)));
    }
    let mut acc = CompensatedSum::new();
    let mut pow_over_fact = 1.0; // s^k / k!
    let mut k = 1u32;
    loop {
        pow_over_fact *= s / k as f64;
        let term = pow_over_fact / k as f64;
        acc.add(term);
        if k as f64 > s.abs() && term.abs() <= 1e-17 * acc.value().abs() {
            break;
        }
        k += 1;
    }
    Ok(acc.value())
}

/// `E₁(x)` for `x ≥ 1` by its continued fraction (modified Lentz).
fn exp_integral_e1(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// One piece of the ρ table: Chebyshev–Lobatto samples on `[left, left + width]`.
#[derive(Debug, Clone)]
struct RhoPiece {
    left: f64,
    /// `ln ρ(left)`
    log_scale: f64,
    /// `ρ(node_i)/ρ(left)`
    values: Vec<f64>,
    /// `∫ ρ / ρ(left)` over the piece.
    integral: f64,
}

/// Gaussian elimination with partial pivoting; `matrix` is row-major.
fn solve_dense(mut matrix: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| matrix[a][col].abs().total_cmp(&matrix[b][col].abs()))
            .expect("nonempty");
        matrix.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = matrix[row][col] / matrix[col][col];
            if f != 0.0 {
                let (upper, lower) = matrix.split_at_mut(row);
                for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                    *dst -= f * src;
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| matrix[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / matrix[row][row];
    }
    x
}

/// Piecewise-polynomial tabulation of `ln ρ` on `[0, max_u]`.
#[derive(Debug, Clone)]
pub struct DickmanTable {
    max_u: f64,
    pieces_per_unit: usize,
    /// Lobatto nodes on `[-1, 1]`, `cos(π i/degree)` reversed to ascend.
    unit_nodes: Vec<f64>,
    bary_weights: Vec<f64>,
    pieces: Vec<RhoPiece>,
}

impl DickmanTable {
    /// Table on `[0, max_u]` at the default resolution.
    pub fn build(max_u: f64) -> Result<Self> {
        Self::with_resolution(max_u, DEFAULT_PIECES_PER_UNIT, DEFAULT_DEGREE)
    }

    /// Table with `pieces_per_unit` interpolation pieces per unit interval,
    /// each a degree-`degree` Chebyshev–Lobatto interpolant.
    pub fn with_resolution(max_u: f64, pieces_per_unit: usize, degree: usize) -> Result<Self> {
        if !(max_u >= 1.0) || !max_u.is_finite() {
            return Err(Error::Config(format!(
                "table bound must be >= 1, got {max_u}"
            )));
        }
        if pieces_per_unit == 0 || degree < 2 {
            return Err(Error::Config(
                "need at least one piece and degree >= 2".into(),
            ));
        }
        let unit_nodes: Vec<f64> = (0..=degree)
            .map(|i| -(PI * i as f64 / degree as f64).cos())
            .collect();
        let bary_weights: Vec<f64> = (0..=degree)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                if i == 0 || i == degree {
                    0.5 * sign
                } else {
                    sign
                }
            })
            .collect();
        let mut table = DickmanTable {
            max_u,
            pieces_per_unit,
            unit_nodes,
            bary_weights,
            pieces: Vec::new(),
        };
        table.fill(QUAD_NODES);
        Ok(table)
    }

    /// Process-wide table covering `[0, 500]`, built on first use.
    pub fn global() -> &'static DickmanTable {
        static TABLE: OnceLock<DickmanTable> = OnceLock::new();
        TABLE.get_or_init(|| DickmanTable::build(RHO_MAX_U).expect("static resolution is valid"))
    }

    pub fn max_u(&self) -> f64 {
        self.max_u
    }

    fn width(&self) -> f64 {
        1.0 / self.pieces_per_unit as f64
    }

    fn fill(&mut self, quad_nodes: usize) {
        let m = self.pieces_per_unit;
        let width = self.width();
        let total = (self.max_u.ceil() as usize) * m;
        let rule = GaussLegendre::new(quad_nodes);
        let d = self.unit_nodes.len();
        // cumulative[i][j] = ∫_left^{node_i} ℓ_j, ℓ_j the Lagrange basis of a piece.
        let cumulative: Vec<Vec<f64>> = self
            .unit_nodes
            .iter()
            .map(|&x_i| {
                (0..d)
                    .map(|j| 0.5 * width * rule.integrate(-1.0, x_i, |x| self.basis(j, x)))
                    .collect()
            })
            .collect();
        let full = &cumulative[d - 1];
        // ρ ≡ 1 on [0, 1].
        for p in 0..m {
            self.pieces.push(RhoPiece {
                left: p as f64 * width,
                log_scale: 0.0,
                values: vec![1.0; d],
                integral: width,
            });
        }
        for p in m..total {
            let left = p as f64 * width;
            let log_scale = {
                let before = &self.pieces[p - 1];
                before.log_scale + before.values.last().expect("nonempty").ln()
            };
            let oldest = &self.pieces[p - m];
            let oldest_right = oldest.left + width;
            let oldest_ratio = (oldest.log_scale - log_scale).exp();
            let mut middle = CompensatedSum::new();
            for q in &self.pieces[p - m + 1..p] {
                middle.add((q.log_scale - log_scale).exp() * q.integral);
            }
            let middle = middle.value();
            // Collocation of t·y(t) = ∫_{t-1}^{left} ρ/ρ(left) + ∫_left^t y at
            // nodes 1..d, with y(node_0) = 1.
            let n = d - 1;
            let mut matrix = vec![vec![0.0; n]; n];
            let mut rhs = vec![0.0; n];
            for i in 1..d {
                let t = left + 0.5 * width * (self.unit_nodes[i] + 1.0);
                let tail = rule.integrate(t - 1.0, oldest_right, |s| self.interpolate(oldest, s));
                rhs[i - 1] = oldest_ratio * tail + middle + cumulative[i][0];
                for j in 1..d {
                    matrix[i - 1][j - 1] = -cumulative[i][j];
                }
                matrix[i - 1][i - 1] += t;
            }
            let solved = solve_dense(matrix, rhs);
            let mut values = Vec::with_capacity(d);
            values.push(1.0);
            values.extend(solved);
            let integral = full.iter().zip(&values).map(|(w, v)| w * v).sum();
            self.pieces.push(RhoPiece {
                left,
                log_scale,
                values,
                integral,
            });
        }
    }

    /// Lagrange basis polynomial `j` on the reference nodes, at `x ∈ [-1, 1]`.
    fn basis(&self, j: usize, x: f64) -> f64 {
        let mut den = 0.0;
        let mut own = 0.0;
        for (k, (node, w)) in self.unit_nodes.iter().zip(&self.bary_weights).enumerate() {
            let diff = x - node;
            if diff == 0.0 {
                return if k == j { 1.0 } else { 0.0 };
            }
            let c = w / diff;
            den += c;
            if k == j {
                own = c;
            }
        }
        own / den
    }

    /// Barycentric interpolation of a piece's normalized values at `u`.
    fn interpolate(&self, piece: &RhoPiece, u: f64) -> f64 {
        let x = 2.0 * (u - piece.left) / self.width() - 1.0;
        let mut num = 0.0;
        let mut den = 0.0;
        for ((node, w), v) in self
            .unit_nodes
            .iter()
            .zip(&self.bary_weights)
            .zip(&piece.values)
        {
            let diff = x - node;
            if diff == 0.0 {
                return *v;
            }
            let c = w / diff;
            num += c * v;
            den += c;
        }
        num / den
    }

    /// `ln ρ(u)` for `0 ≤ u ≤ max_u`.
    pub fn log_rho(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) || u > self.max_u {
            return Err(Error::range(
                "u",
                format!("ρ(u) tabulated on [0, {}], got {u}", self.max_u),
            ));
        }
        if u <= 1.0 {
            return Ok(0.0);
        }
        let idx = ((u / self.width()).floor() as usize).min(self.pieces.len() - 1);
        let piece = &self.pieces[idx];
        Ok(piece.log_scale + self.interpolate(piece, u).ln())
    }
}

/// `ρ(u)` from the piecewise table, `0 ≤ u ≤ 500`.
pub fn rho(u: f64) -> Result<DickmanContext> {
    let log_rho = DickmanTable::global().log_rho(u)?;
    let i_xi = if u >= 1.0 {
        Some(i_integral(solve_xi(u, XI_TOL)?.xi)?)
    } else {
        None
    };
    Ok(DickmanContext {
        u,
        log_rho,
        i_xi,
        method: RhoMethod::PiecewiseDde,
    })
}

const XI_TOL: f64 = 1e-15;

/// Alladi's saddle-point form `ρ(u) ≈ √(ξ'/2π) · exp{γ − uξ + I(ξ)}`, `u ≥ 1`.
///
/// At `u = 1` the removable singularity is taken as its limit `ξ = 0, ξ' = 2`.
pub fn rho_alladi(u: f64) -> Result<DickmanContext> {
    let xi = solve_xi(u, XI_TOL)?;
    let i_xi = i_integral(xi.xi)?;
    let log_rho = 0.5 * (xi.xi_prime / (2.0 * PI)).ln() + EULER_GAMMA - u * xi.xi + i_xi;
    Ok(DickmanContext {
        u,
        log_rho,
        i_xi: Some(i_xi),
        method: RhoMethod::AlladiAsymptotic,
    })
}

/// `P(ℓ_r(Z) = n) ≈ e^{−γ} ρ(n/r) / r`, accurate for `√(n ln n) ≤ r ≤ n`.
pub fn theorem3_estimate(n: u64, r: u64) -> Result<LogValue> {
    if r == 0 || r > n {
        return Err(Error::range(
            "r",
            format!("need 1 <= r <= n, got n={n}, r={r}"),
        ));
    }
    let u = n as f64 / r as f64;
    let log_rho = DickmanTable::global().log_rho(u)?;
    Ok(LogValue::from_ln(-EULER_GAMMA - (r as f64).ln() + log_rho))
}

/// `P(ℓ_r(Z) = n) ≈ (2π r n)^{−1/2} exp{I(ξ) − uξ}` with `u = n/r > 1`, `r ≥ 2`.
pub fn corollary1_estimate(n: u64, r: u64) -> Result<LogValue> {
    if r < 2 {
        return Err(Error::range("r", format!("need r >= 2, got {r}")));
    }
    if n <= r {
        return Err(Error::range(
            "n/r",
            format!("need n/r > 1, got n={n}, r={r}"),
        ));
    }
    let u = n as f64 / r as f64;
    let xi = solve_xi(u, XI_TOL)?;
    let i_xi = i_integral(xi.xi)?;
    Ok(LogValue::from_ln(
        -0.5 * (2.0 * PI * r as f64 * n as f64).ln() + i_xi - u * xi.xi,
    ))
}
