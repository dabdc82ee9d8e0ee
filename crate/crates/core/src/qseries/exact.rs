//! Integer polynomials in `q` for the finite q-objects.
//!
//! Gaussian binomials, `c_{m,n}(q)` and the q-Normal moment numerators all have integer
//! coefficients. Keeping them as polynomials allows exact checks at rational `q` and,
//! more importantly, exact division by `(1-q)^m`: the quotients are what the moment
//! formulas need, and evaluating them directly avoids the cancellation that the
//! printed alternating sums suffer when `q` is close to one.

use std::collections::HashMap;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Polynomial in `q` with integer coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QPoly {
    coeffs: Vec<BigInt>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial(c, 0)
    }

    /// `c q^k`
    pub fn monomial(c: i64, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = BigInt::from(c);
        QPoly::from_coeffs(coeffs)
    }

    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Self {
        let mut p = QPoly { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        QPoly::from_coeffs(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Multiply by `q^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        QPoly { coeffs }
    }

    /// Value at `q = 1`, i.e. the coefficient sum.
    pub fn value_at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    /// Exact quotient by `1 - q`; `None` if `1 - q` does not divide the polynomial.
    pub fn div_one_minus_q(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(QPoly::zero());
        }
        if !self.value_at_one().is_zero() {
            return None;
        }
        // p_i = r_i - r_{i-1}  =>  r_i = p_0 + ... + p_i
        let d = self.coeffs.len() - 1;
        let mut running = BigInt::zero();
        let mut quotient = Vec::with_capacity(d);
        for c in &self.coeffs[..d] {
            running += c;
            quotient.push(running.clone());
        }
        Some(QPoly::from_coeffs(quotient))
    }

    /// Exact quotient by `(1 - q)^m`.
    pub fn div_one_minus_q_pow(&self, m: usize) -> Option<Self> {
        let mut p = self.clone();
        for _ in 0..m {
            p = p.div_one_minus_q()?;
        }
        Some(p)
    }

    /// Horner evaluation in `f64`.
    pub fn eval(&self, q: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * q + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Exact evaluation at a rational point.
    pub fn eval_exact(&self, q: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| {
            acc * q + BigRational::from_integer(c.clone())
        })
    }

    /// True if every coefficient is non-negative.
    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).cloned().unwrap_or_default();
                let b = rhs.coeffs.get(i).cloned().unwrap_or_default();
                a + b
            })
            .collect();
        QPoly::from_coeffs(coeffs)
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        self + &rhs.scale(&BigInt::from(-1))
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(coeffs)
    }
}

/// Integer binomial coefficient, zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < k {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut value = BigInt::one();
    for i in 1..=k {
        value = value * BigInt::from(n - k + i) / BigInt::from(i);
    }
    value
}

/// `[n]_q` as a polynomial.
pub fn q_integer(n: usize) -> QPoly {
    QPoly::from_coeffs(vec![BigInt::one(); n])
}

/// `[n]_q!` as a polynomial.
pub fn q_factorial(n: usize) -> QPoly {
    (1..=n).fold(QPoly::one(), |acc, j| &acc * &q_integer(j))
}

/// Gaussian binomial `[n choose k]_q`, built with the q-Pascal rule
/// `[n,k] = [n-1,k-1] + q^k [n-1,k]`.
pub fn q_binomial(n: i64, k: i64) -> QPoly {
    if k < 0 || n < k {
        return QPoly::zero();
    }
    let (n, k) = (n as usize, k.min(n - k) as usize);
    // row[j] = [i choose j]_q for the current i
    let mut row = vec![QPoly::one()];
    for i in 1..=n {
        let width = i.min(k) + 1;
        let mut next = Vec::with_capacity(width);
        for j in 0..width {
            let left = if j == 0 { QPoly::zero() } else { row[j - 1].clone() };
            let right = row.get(j).map(|p| p.shift(j)).unwrap_or_default();
            next.push(&left + &right);
        }
        row = next;
    }
    row.swap_remove(k)
}

/// `c_{m,n}(q) = sum_j (-1)^j q^(j(j+1)/2) (C(n,m-j) - C(n,m-j-1)) [n-2m+j choose j]_q`.
pub fn c_polynomial(m: usize, n: usize) -> Result<QPoly> {
    check_c_indices(m, n)?;
    let (m_i, n_i) = (m as i64, n as i64);
    let mut total = QPoly::zero();
    for j in 0..=m_i {
        let weight = binomial(n_i, m_i - j) - binomial(n_i, m_i - j - 1);
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let term = q_binomial(n_i - 2 * m_i + j, j)
            .shift((j * (j + 1) / 2) as usize)
            .scale(&(weight * sign));
        total = &total + &term;
    }
    Ok(total)
}

pub(crate) fn check_c_indices(m: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::IndexOutOfRange {
            name: "n",
            value: 0,
            reason: "c_{m,n} is defined for n >= 1",
        });
    }
    if m > n / 2 {
        return Err(Error::IndexOutOfRange {
            name: "m",
            value: m as i64,
            reason: "c_{m,n} requires m <= floor(n/2)",
        });
    }
    Ok(())
}

type PolyCache = RwLock<HashMap<(usize, usize), Arc<QPoly>>>;

fn cached(cache: &'static OnceLock<PolyCache>, key: (usize, usize), build: impl FnOnce() -> QPoly) -> Arc<QPoly> {
    let cache = cache.get_or_init(Default::default);
    if let Some(p) = cache.read().expect("poly cache poisoned").get(&key) {
        return Arc::clone(p);
    }
    let poly = Arc::new(build());
    cache
        .write()
        .expect("poly cache poisoned")
        .entry(key)
        .or_insert(poly)
        .clone()
}

/// `c_{m,n}(q) / (1-q)^m`, which is again an integer polynomial.
///
/// At `q = 1` it equals the classical coefficient `n! / (2^m m! (n-2m)!)` of the
/// probabilists' Hermite expansion of `x^n`. Results are cached per `(m, n)`.
pub fn reduced_c_polynomial(m: usize, n: usize) -> Result<Arc<QPoly>> {
    check_c_indices(m, n)?;
    static CACHE: OnceLock<PolyCache> = OnceLock::new();
    Ok(cached(&CACHE, (m, n), || {
        c_polynomial(m, n)
            .expect("indices checked")
            .div_one_minus_q_pow(m)
            .expect("(1-q)^m divides c_{m,n}(q)")
    }))
}

/// `sum_k (-1)^k q^(k(k+1)/2) (2k+1) C(2j+1, j-k)`, the numerator of the `2j`-th
/// q-Normal moment.
pub fn q_normal_moment_numerator(j: usize) -> QPoly {
    let j_i = j as i64;
    let mut total = QPoly::zero();
    for k in 0..=j_i {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let weight = binomial(2 * j_i + 1, j_i - k) * (2 * k + 1) * sign;
        total = &total + &QPoly::monomial(1, (k * (k + 1) / 2) as usize).scale(&weight);
    }
    total
}

/// The numerator divided by `(1-q)^j`; the `2j`-th q-Normal moment is this polynomial
/// divided by `2j + 1`. Its coefficients are non-negative.
pub fn q_normal_moment_polynomial(j: usize) -> Arc<QPoly> {
    static CACHE: OnceLock<PolyCache> = OnceLock::new();
    cached(&CACHE, (j, 0), || {
        q_normal_moment_numerator(j)
            .div_one_minus_q_pow(j)
            .expect("(1-q)^j divides the moment numerator")
    })
}
