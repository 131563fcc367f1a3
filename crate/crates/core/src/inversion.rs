//! The family `F_c(y) = y (1 − y)^c`, series reversion, and the series
//! representations of the symmetric-family parameter `v*`.
//!
//! With `y = v*²/(1 + u²)`, `x̄ = (p/b)²` and `a = −(M + 2)/4` the boundary
//! condition reads `x̄^a = F_a(y)`, or equivalently `x̄ = F_{1/a}(1 − y)`.
//! The first form is used for large `|p|` ("far" branch), the second for
//! small `|p|` ("near" branch).

use std::ops::Neg;

use num_traits::{FromPrimitive, Num};

use crate::error::{domain, Error, Result};

/// `y (1 − y)^c`
pub fn f_a(c: f64, y: f64) -> Result<f64> {
    if c < 0.0 && !(y < 1.0) {
        return domain(format!("F_c needs y < 1 for c < 0, got y = {y}"));
    }
    if c > 0.0 && !(0.0..=1.0).contains(&y) {
        return domain(format!("F_c needs y in [0, 1] for c > 0, got y = {y}"));
    }
    Ok(y * (1.0 - y).powf(c))
}

/// `b_M(u) = h_{M,2}(M) (1 + u²)^((M−2)/(2(M+2)))`
pub fn b_m(u: f64, m: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return domain(format!("u must be >= 0, got {u}"));
    }
    Ok(m.powf(2.0 / (m + 2.0)) * series_scale(u, m))
}

/// The scale that actually enters `x̄ = (p/b)²`: `b_M(u) / h_{M,2}(M)`.
fn series_scale(u: f64, m: f64) -> f64 {
    (1.0 + u * u).powf((m - 2.0) / (2.0 * (m + 2.0)))
}

/// Exponent `a = −(M + 2)/4` of the boundary family.
pub fn family_exponent(m: f64) -> f64 {
    -(m + 2.0) / 4.0
}

/// Convergence radius of the inverse series of `F_c`: `|c^c / (1+c)^(1+c)|`.
pub fn series_radius(c: f64) -> f64 {
    let pw = |b: f64, e: f64| if b == 0.0 { 1.0 } else { b.abs().powf(e) };
    pw(c, c) / pw(1.0 + c, 1.0 + c)
}

/// Truncated power series `Σ_{k=1..n} a_k x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoeffs<T> {
    pub coeffs: Vec<T>,
}

impl<T> SeriesCoeffs<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Index("a series needs at least one coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// `a_k`, 1-based; zero past the truncation order.
    pub fn get(&self, k: usize) -> T
    where
        T: Num + Clone,
    {
        if k == 0 || k > self.coeffs.len() {
            T::zero()
        } else {
            self.coeffs[k - 1].clone()
        }
    }
}

impl SeriesCoeffs<f64> {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| (acc + c) * x)
    }
}

/// Scalar bound shared by the `f64` and exact rational code paths.
pub trait Scalar: Num + Clone + Neg<Output = Self> + FromPrimitive {}
impl<T: Num + Clone + Neg<Output = T> + FromPrimitive> Scalar for T {}

fn factorial<T: Scalar>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * T::from_usize(i).unwrap())
}

/// `d_{[c],l,k}`: coefficient of `x^k` in `(Σ c_m x^m)^l`, as `l!` times the
/// sum over nonincreasing `k_1 = l ≥ k_2 ≥ … ≥ 0` with `Σ k_i = k` of
/// `∏ c_i^{Δk_i} / Δk_i!`.
pub fn partition_d_coeffs<T: Scalar>(c: &SeriesCoeffs<T>, l: usize, k: usize) -> Result<T> {
    if l == 0 || l > k {
        return Err(Error::Index(format!("need 1 <= l <= k, got l = {l}, k = {k}")));
    }
    let mut parts = vec![l];
    let sum = partition_sum(c, &mut parts, k - l);
    Ok(factorial::<T>(l) * sum)
}

fn partition_sum<T: Scalar>(c: &SeriesCoeffs<T>, parts: &mut Vec<usize>, rest: usize) -> T {
    let last = *parts.last().unwrap();
    if rest == 0 {
        return partition_term(c, parts);
    }
    let mut total = T::zero();
    for next in (1..=last.min(rest)).rev() {
        parts.push(next);
        total = total + partition_sum(c, parts, rest - next);
        parts.pop();
    }
    total
}

fn partition_term<T: Scalar>(c: &SeriesCoeffs<T>, parts: &[usize]) -> T {
    let mut term = T::one();
    for (i, &ki) in parts.iter().enumerate() {
        let next = parts.get(i + 1).copied().unwrap_or(0);
        let dk = ki - next;
        if dk == 0 {
            continue;
        }
        let ci = c.get(i + 1);
        if ci.is_zero() {
            return T::zero();
        }
        for _ in 0..dk {
            term = term * ci.clone();
        }
        term = term / factorial::<T>(dk);
    }
    term
}

/// Series reversion: `a*_1 = 1/a_1`,
/// `a*_{i+1} = −a_1^{−i−1} Σ_{m≤i} a*_m d_{[a],m,i+1}`.
pub fn invert_series<T: Scalar>(a: &SeriesCoeffs<T>) -> Result<SeriesCoeffs<T>> {
    let a1 = a.get(1);
    if a1.is_zero() {
        return domain("series reversion needs a nonzero leading coefficient");
    }
    let n = a.order();
    let inv_a1 = T::one() / a1;
    let mut out = vec![inv_a1.clone()];
    let mut inv_pow = inv_a1.clone();
    for i in 1..n {
        inv_pow = inv_pow * inv_a1.clone();
        let mut acc = T::zero();
        for (m, am) in out.iter().enumerate() {
            acc = acc + am.clone() * partition_d_coeffs(a, m + 1, i + 1)?;
        }
        out.push(-(inv_pow.clone() * acc));
    }
    Ok(SeriesCoeffs { coeffs: out })
}

/// Taylor coefficients of `F_c`: `a_k = (−1)^{k−1} binom(c, k−1)`.
pub fn f_a_taylor<T: Scalar>(c: T, n: usize) -> SeriesCoeffs<T> {
    let mut coeffs = Vec::with_capacity(n);
    let mut binom = T::one();
    for j in 0..n {
        let sign = if j % 2 == 0 { T::one() } else { -T::one() };
        coeffs.push(sign * binom.clone());
        binom = binom * (c.clone() - T::from_usize(j).unwrap()) / T::from_usize(j + 1).unwrap();
    }
    SeriesCoeffs { coeffs }
}

/// Coefficients of the inverse of `F_c` in closed Pochhammer form,
/// `a*_k = (ck)_{k−1} / k!`.
pub fn g_minus_coeffs(c: f64, n: usize) -> SeriesCoeffs<f64> {
    let coeffs = (1..=n)
        .map(|k| {
            let ck = c * k as f64;
            (0..k - 1).map(|i| (ck + i as f64) / (i + 1) as f64).product::<f64>() / k as f64
        })
        .collect();
    SeriesCoeffs { coeffs }
}

/// Partial sum `x + c Σ_{k=2..n} (t)_{k−2}/(k−1)! (−x)^k`, `t = 2 − k(c+1)`.
///
/// Fails with a divergence error when the last term is larger in magnitude
/// than the one before it.
pub fn g_minus_series(c: f64, x: f64, n_terms: usize) -> Result<f64> {
    if n_terms < 2 {
        return Err(Error::Index(format!("need at least 2 terms, got {n_terms}")));
    }
    let mut sum = x;
    // root test on the coefficients: robust to underflowing powers of x and
    // to coefficients that vanish for rational exponents
    let mut last_ratio = 0.0;
    let mut xk = -x;
    for k in 2..=n_terms {
        xk *= -x;
        let t = 2.0 - k as f64 * (c + 1.0);
        // (t)_{k−2}/(k−1)! as a running product of ratios, to stay finite
        let coeff: f64 = (0..k - 2).map(|i| (t + i as f64) / (i + 1) as f64).product::<f64>() / (k - 1) as f64;
        sum += c * coeff * xk;
        let mag = (c * coeff).abs();
        if mag > 0.0 {
            last_ratio = mag.powf(1.0 / (k - 1) as f64) * x.abs();
        }
    }
    if last_ratio > 1.0 {
        return Err(Error::Divergence { term: n_terms, ratio: last_ratio });
    }
    Ok(sum)
}

/// Elementary closed forms of the inverse branch through 0 of
/// `F_a`, `a = −(M+2)/4`, for `M = 2 + 4k`, `k ≤ 3`.
pub fn g_closed(m: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return domain(format!("closed-form inverse needs x >= 0, got {x}"));
    }
    let k = (m - 2.0) / 4.0;
    if k.fract() != 0.0 || k < 0.0 {
        return domain(format!("no closed form for M = {m}; M must be 2 + 4k"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    match k as u32 {
        0 => Ok(x / (1.0 + x)),
        1 => Ok(2.0 * x / (1.0 + 2.0 * x + (1.0 + 4.0 * x).sqrt())),
        2 => {
            let t = (27.0 * x).sqrt() / 2.0;
            Ok(1.0 - 2.0 / (3.0 * x).sqrt() * (t.asinh() / 3.0).sinh())
        }
        3 => Ok(1.0 - quartic_root(x)),
        _ => Err(Error::NotImplemented(format!(
            "closed form for M = {m} needs a general hypergeometric evaluator; use the series or bisection"
        ))),
    }
}

/// Positive root `w` of `w⁴ + w/x − 1/x = 0` by Ferrari's method, written
/// without cancellation for small `x`.
fn quartic_root(x: f64) -> f64 {
    let p = 1.0 / x;
    // resolvent m³ + p m − p²/8 = 0
    let disc = (p.powi(4) / 256.0 + p.powi(3) / 27.0).sqrt();
    let a = (p * p / 16.0 + disc).cbrt();
    let mut m = a - p / (3.0 * a);
    for _ in 0..3 {
        let f = m * m * m + p * m - p * p / 8.0;
        let df = 3.0 * m * m + p;
        m -= f / df;
    }
    let s = (2.0 * m).sqrt();
    let inner = (-2.0 * m + 2.0 * p / s).sqrt();
    16.0 * m * p / ((p + 2.0 * m * s) * s * 2.0 * (s + inner))
}

/// `φ(G)_a(x) = 1 − G_{1/a}(x^{1/a})`, mapping one inverse branch of the
/// family onto the other. `φ ∘ φ` is the identity.
pub fn phi_conjugate<G>(g: G, a: f64, x: f64) -> Result<f64>
where
    G: Fn(f64, f64) -> Result<f64>,
{
    if a == 0.0 {
        return domain("phi conjugation needs a != 0");
    }
    if x < 0.0 && (1.0 / a).fract() != 0.0 {
        return domain(format!("negative base {x} with non-integer exponent {}", 1.0 / a));
    }
    let arg = x.powf(1.0 / a);
    Ok(1.0 - g(1.0 / a, arg)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesBranch {
    /// Series in `(p/b)^{2a}`, good for large `|p|`.
    Far,
    /// Series in `(p/b)²`, good for small `|p|`.
    Near,
}

pub const DEFAULT_TERMS: usize = 16;

/// Fraction of the convergence radius inside which the 16-term series
/// reproduces bisection to better than 1e−8 for all tested `M`.
pub const VALIDATED_FRACTION: f64 = 0.3;

/// Argument and exponent of the series for one branch.
fn branch_argument(p: f64, u: f64, m: f64, branch: SeriesBranch) -> (f64, f64) {
    let a = family_exponent(m);
    let xbar = (p / series_scale(u, m)).powi(2);
    match branch {
        SeriesBranch::Far => (xbar.powf(a), a),
        SeriesBranch::Near => (xbar, 1.0 / a),
    }
}

/// Whether `(p, u, M)` lies in the validated domain of `branch`.
pub fn in_series_domain(p: f64, u: f64, m: f64, branch: SeriesBranch) -> bool {
    let (x, c) = branch_argument(p, u, m, branch);
    x.is_finite() && x <= VALIDATED_FRACTION * series_radius(c)
}

/// `v*` from the truncated inverse series on the given branch.
pub fn vstar_series(p: f64, u: f64, m: f64, branch: SeriesBranch) -> Result<f64> {
    if !(u >= 0.0) {
        return domain(format!("u must be >= 0, got {u}"));
    }
    if !(m > 0.0) {
        return domain(format!("M must be positive, got {m}"));
    }
    let (x, c) = branch_argument(p, u, m, branch);
    let bound = VALIDATED_FRACTION * series_radius(c);
    if !(x.is_finite() && x <= bound) {
        return Err(Error::SeriesDomain { arg: x, bound });
    }
    let g = g_minus_series(c, x, DEFAULT_TERMS)?;
    let y = match branch {
        SeriesBranch::Far => g,
        SeriesBranch::Near => 1.0 - g,
    };
    Ok(((1.0 + u * u) * y).sqrt())
}

/// The first branch whose validated domain contains the point.
pub fn vstar_series_auto(p: f64, u: f64, m: f64) -> Result<f64> {
    let branch = [SeriesBranch::Near, SeriesBranch::Far]
        .into_iter()
        .find(|&b| in_series_domain(p, u, m, b));
    match branch {
        Some(b) => vstar_series(p, u, m, b),
        None => {
            let (x, c) = branch_argument(p, u, m, SeriesBranch::Far);
            Err(Error::SeriesDomain { arg: x, bound: VALIDATED_FRACTION * series_radius(c) })
        }
    }
}
