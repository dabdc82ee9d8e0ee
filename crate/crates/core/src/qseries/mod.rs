//! q-arithmetic: q-integers, q-factorials, q-binomials, q-Pochhammer symbols and the
//! `S_n(a,b|q)` polynomials.
//!
//! Every finite object has two evaluation paths. The functions in this module work in
//! `f64`; [`exact`] builds the same objects as integer polynomials in `q`, which can be
//! evaluated exactly at rational `q` or divided exactly by powers of `1 - q`.

pub mod exact;

use crate::error::{Error, Result};

/// Deformation parameter `q` in `(-1, 1]`.
///
/// `q = 1` is the classical (Gaussian) limit. It is accepted by [`q_integer`],
/// [`q_factorial`], [`q_binomial`], [`s_polynomial`] and the finite [`q_pochhammer`];
/// infinite products and the densities `fh`, `fQ` reject it.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QParameter {
    value: f64,
}

impl QParameter {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= -1.0 || value > 1.0 {
            return Err(Error::invalid("q", value, "q must lie in (-1, 1]"));
        }
        Ok(QParameter { value })
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.value
    }

    /// True iff `q = 1`; callers must switch to the classical closed forms.
    #[inline]
    pub fn is_limit_case(self) -> bool {
        self.value == 1.0
    }

    /// The value, provided `|q| < 1`.
    pub fn proper(self) -> Result<f64> {
        if self.is_limit_case() {
            Err(Error::invalid("q", 1.0, "q = 1 is a limit case; |q| < 1 required"))
        } else {
            Ok(self.value)
        }
    }

    /// Half-width `2/sqrt(1-q)` of `J(q)`, `None` at `q = 1` where `J(q)` is the real line.
    pub fn support_half_width(self) -> Option<f64> {
        if self.is_limit_case() {
            None
        } else {
            Some(2.0 / (1.0 - self.value).sqrt())
        }
    }
}

impl TryFrom<f64> for QParameter {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        QParameter::new(value)
    }
}

/// `[n]_q = 1 + q + ... + q^(n-1)`, with `[0]_q = 0`.
pub fn q_integer(n: u32, q: QParameter) -> f64 {
    if q.is_limit_case() {
        return n as f64;
    }
    let q = q.value();
    let mut sum = 0.0;
    let mut pow = 1.0;
    for _ in 0..n {
        sum += pow;
        pow *= q;
    }
    sum
}

/// `[n]_q! = [1]_q [2]_q ... [n]_q`, with `[0]_q! = 1`.
pub fn q_factorial(n: u32, q: QParameter) -> f64 {
    (1..=n).map(|j| q_integer(j, q)).product()
}

/// Gaussian binomial coefficient; zero unless `n >= k >= 0`.
pub fn q_binomial(n: i64, k: i64, q: QParameter) -> f64 {
    if k < 0 || n < k {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut value = 1.0;
    for i in 1..=k {
        value *= q_integer((n - k + i) as u32, q) / q_integer(i as u32, q);
    }
    value
}

/// Order of a q-Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PochhammerOrder {
    Finite(usize),
    /// `(a;q)_inf`, truncated after `factors` factors.
    Infinite { factors: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPochhammerValue {
    pub value: f64,
    pub order: PochhammerOrder,
    /// Bound on the relative error from the omitted tail; `None` for finite products.
    pub truncation_error_bound: Option<f64>,
}

/// `(a;q)_n = (1-a)(1-aq)...(1-aq^(n-1))`, `(a;q)_0 = 1`.
pub fn q_pochhammer(a: f64, q: QParameter, n: usize) -> QPochhammerValue {
    let q = q.value();
    let mut value = 1.0;
    let mut aq = a;
    for _ in 0..n {
        value *= 1.0 - aq;
        aq *= q;
    }
    QPochhammerValue {
        value,
        order: PochhammerOrder::Finite(n),
        truncation_error_bound: None,
    }
}

/// `(a_1, ..., a_k; q)_n`, the product of the single-parameter symbols.
pub fn q_pochhammer_multi(params: &[f64], q: QParameter, n: usize) -> QPochhammerValue {
    let value = params.iter().map(|&a| q_pochhammer(a, q, n).value).product();
    QPochhammerValue {
        value,
        order: PochhammerOrder::Finite(n),
        truncation_error_bound: None,
    }
}

const MAX_INFINITE_FACTORS: usize = 10_000_000;

/// `(a;q)_inf` truncated so that the omitted tail changes the value by a relative amount
/// below `tol`.
///
/// The cut-off is `K = max(ceil(log(tol (1-|q|)/|a|) / log|q|), 1)`, enlarged if needed
/// until the geometric tail bound `|a||q|^K / (1-|q|)` is below `tol`.
pub fn q_pochhammer_infinite(a: f64, q: QParameter, tol: f64) -> Result<QPochhammerValue> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", tol, "tolerance must be positive"));
    }
    if q.is_limit_case() {
        return Err(Error::NonConvergence {
            what: "infinite q-Pochhammer product",
            limit: 0,
            detail: "|q| >= 1".into(),
        });
    }
    let qv = q.value();
    let abs_q = qv.abs();
    let abs_a = a.abs();
    if abs_a == 0.0 {
        return Ok(QPochhammerValue {
            value: 1.0,
            order: PochhammerOrder::Infinite { factors: 0 },
            truncation_error_bound: Some(0.0),
        });
    }
    if abs_q == 0.0 {
        return Ok(QPochhammerValue {
            value: 1.0 - a,
            order: PochhammerOrder::Infinite { factors: 1 },
            truncation_error_bound: Some(0.0),
        });
    }

    let tail = |k: usize| {
        let lead = abs_a * abs_q.powi(k as i32);
        let sum = lead / (1.0 - abs_q);
        if lead >= 1.0 {
            f64::INFINITY
        } else {
            // log|prod (1 - a q^j)| over j >= K is bounded by sum / (1 - lead)
            (sum / (1.0 - lead)).exp_m1()
        }
    };

    let guess = ((tol * (1.0 - abs_q) / abs_a).ln() / abs_q.ln()).ceil();
    let mut factors = if guess.is_finite() && guess > 1.0 { guess as usize } else { 1 };
    while tail(factors) > tol {
        factors += 1;
        if factors > MAX_INFINITE_FACTORS {
            return Err(Error::NonConvergence {
                what: "infinite q-Pochhammer product",
                limit: MAX_INFINITE_FACTORS,
                detail: format!("a = {a}, q = {qv}, tol = {tol}"),
            });
        }
    }
    let value = q_pochhammer(a, q, factors).value;
    Ok(QPochhammerValue {
        value,
        order: PochhammerOrder::Infinite { factors },
        truncation_error_bound: Some(tail(factors)),
    })
}

/// `S_n(a,b|q) = sum_i [n choose i]_q a^i b^(n-i)`.
///
/// The sum is accumulated in symmetric pairs so that swapping `a` and `b` gives a
/// bit-identical result.
pub fn s_polynomial(n: u32, a: f64, b: f64, q: QParameter) -> f64 {
    let n_i = n as i64;
    let mut sum = 0.0;
    for i in 0..=(n / 2) {
        let j = n - i;
        let coeff = q_binomial(n_i, i as i64, q);
        if i == j {
            sum += coeff * (a.powi(i as i32) * b.powi(i as i32));
        } else {
            let left = a.powi(i as i32) * b.powi(j as i32);
            let right = b.powi(i as i32) * a.powi(j as i32);
            sum += coeff * (left + right);
        }
    }
    sum
}

/// Ordinary binomial coefficient as `f64`; zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || n < k {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut value = 1.0;
    for i in 1..=k {
        value = value * (n - k + i) as f64 / i as f64;
    }
    value.round()
}
