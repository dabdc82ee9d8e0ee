//! Three-term-recurrence polynomial families and the expansions of `x^n` in them.
//!
//! All families are evaluated by forward recurrence from `p_{-1} = 0`, `p_0 = 1`:
//!
//! * `h_{n+1} = 2x h_n - (1-q^n) h_{n-1}` (continuous q-Hermite)
//! * `H_{n+1} = x H_n - [n]_q H_{n-1}` (rescaled q-Hermite; probabilists' Hermite at `q = 1`)
//! * `Q_{n+1} = (2x - (a+b)q^n) Q_n - (1-q^n)(1-ab q^(n-1)) Q_{n-1}` (Al-Salam–Chihara)
//! * `P_{n+1} = (x - rho y q^n) P_n - (1-rho^2 q^(n-1)) [n]_q P_{n-1}` (conditional variant)
//!
//! `H_n` and `P_n` are monic, `h_n` and `Q_n` have leading coefficient `2^n`.

use crate::error::{Error, Result};
use crate::qseries::{self, exact, q_binomial, q_integer, QParameter};

/// Runs `p_{k+1} = a(k) p_k - b(k) p_{k-1}` and returns `p_0..=p_n`.
///
/// `b` is never called with `k = 0` (it would multiply `p_{-1} = 0`).
fn recurrence(n: usize, mut a: impl FnMut(usize) -> f64, mut b: impl FnMut(usize) -> f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(n + 1);
    values.push(1.0);
    if n == 0 {
        return values;
    }
    values.push(a(0));
    for k in 1..n {
        let next = a(k) * values[k] - b(k) * values[k - 1];
        values.push(next);
    }
    values
}

/// Powers `q^0..=q^n` built by repeated multiplication (`0^0 = 1`).
fn powers(q: f64, n: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    let mut v = 1.0;
    for _ in 0..=n {
        p.push(v);
        v *= q;
    }
    p
}

/// Chebyshev polynomial of the second kind, `U_{n+1}(x) = 2x U_n(x) - U_{n-1}(x)`.
pub fn chebyshev_u(n: usize, x: f64) -> f64 {
    chebyshev_u_all(n, x)[n]
}

pub fn chebyshev_u_all(n: usize, x: f64) -> Vec<f64> {
    recurrence(n, |_| 2.0 * x, |_| 1.0)
}

/// Probabilists' Hermite polynomial `He_n`, monic and orthogonal for the standard normal.
pub fn hermite_prob(n: usize, x: f64) -> f64 {
    hermite_prob_all(n, x)[n]
}

pub fn hermite_prob_all(n: usize, x: f64) -> Vec<f64> {
    recurrence(n, |_| x, |k| k as f64)
}

/// Continuous q-Hermite polynomial `h_n(x|q)`; requires `|q| < 1`.
pub fn continuous_qhermite(n: usize, x: f64, q: QParameter) -> Result<f64> {
    Ok(continuous_qhermite_all(n, x, q)?[n])
}

pub fn continuous_qhermite_all(n: usize, x: f64, q: QParameter) -> Result<Vec<f64>> {
    let qp = powers(q.proper()?, n);
    Ok(recurrence(n, |_| 2.0 * x, |k| 1.0 - qp[k]))
}

/// Rescaled q-Hermite polynomial `H_n(x|q)`, `q` in `(-1, 1]`.
pub fn rescaled_qhermite(n: usize, x: f64, q: QParameter) -> f64 {
    rescaled_qhermite_all(n, x, q)[n]
}

pub fn rescaled_qhermite_all(n: usize, x: f64, q: QParameter) -> Vec<f64> {
    recurrence(n, |_| x, |k| q_integer(k as u32, q))
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, v, "must satisfy |value| < 1"))
    }
}

fn check_in_support(name: &'static str, v: f64, q: QParameter) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::invalid(name, v, "must be finite"));
    }
    match q.support_half_width() {
        Some(w) if v.abs() > w => Err(Error::invalid(name, v, "must lie in J(q) = [-2/sqrt(1-q), 2/sqrt(1-q)]")),
        _ => Ok(()),
    }
}

/// Al-Salam–Chihara polynomial `Q_n(x|a,b,q)`; `|a|, |b|, |q| < 1`.
pub fn asc_q(n: usize, x: f64, a: f64, b: f64, q: QParameter) -> Result<f64> {
    Ok(asc_q_all(n, x, a, b, q)?[n])
}

pub fn asc_q_all(n: usize, x: f64, a: f64, b: f64, q: QParameter) -> Result<Vec<f64>> {
    check_unit("a", a)?;
    check_unit("b", b)?;
    let qp = powers(q.proper()?, n);
    let (sum, prod) = (a + b, a * b);
    Ok(recurrence(
        n,
        |k| 2.0 * x - sum * qp[k],
        |k| (1.0 - qp[k]) * (1.0 - prod * qp[k - 1]),
    ))
}

/// Conditional Al-Salam–Chihara polynomial `P_n(x|y,rho,q)`; `|rho| < 1`, `y` in `J(q)`,
/// `q` in `(-1, 1]`.
pub fn asc_p(n: usize, x: f64, y: f64, rho: f64, q: QParameter) -> Result<f64> {
    Ok(asc_p_all(n, x, y, rho, q)?[n])
}

pub fn asc_p_all(n: usize, x: f64, y: f64, rho: f64, q: QParameter) -> Result<Vec<f64>> {
    check_unit("rho", rho)?;
    check_in_support("y", y, q)?;
    let qp = powers(q.value(), n);
    let (shift, rho2) = (rho * y, rho * rho);
    Ok(recurrence(
        n,
        |k| x - shift * qp[k],
        |k| (1.0 - rho2 * qp[k - 1]) * q_integer(k as u32, q),
    ))
}

/// A recurrence-defined family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolynomialFamily {
    /// `h_n(x|q)`
    ContinuousQHermite { q: QParameter },
    /// `H_n(x|q)`
    RescaledQHermite { q: QParameter },
    /// `Q_n(x|a,b,q)`
    AlSalamChihara { a: f64, b: f64, q: QParameter },
    /// `P_n(x|y,rho,q)`
    ConditionalAsc { y: f64, rho: f64, q: QParameter },
    ChebyshevU,
    HermiteProb,
}

impl PolynomialFamily {
    pub fn continuous_qhermite(q: QParameter) -> Result<Self> {
        q.proper()?;
        Ok(PolynomialFamily::ContinuousQHermite { q })
    }

    pub fn rescaled_qhermite(q: QParameter) -> Self {
        PolynomialFamily::RescaledQHermite { q }
    }

    pub fn al_salam_chihara(a: f64, b: f64, q: QParameter) -> Result<Self> {
        check_unit("a", a)?;
        check_unit("b", b)?;
        q.proper()?;
        Ok(PolynomialFamily::AlSalamChihara { a, b, q })
    }

    pub fn conditional_asc(y: f64, rho: f64, q: QParameter) -> Result<Self> {
        check_unit("rho", rho)?;
        check_in_support("y", y, q)?;
        Ok(PolynomialFamily::ConditionalAsc { y, rho, q })
    }

    /// Short label used in reports (`h`, `H`, `Q`, `P`, `U`, `He`).
    pub fn label(&self) -> &'static str {
        match self {
            PolynomialFamily::ContinuousQHermite { .. } => "h",
            PolynomialFamily::RescaledQHermite { .. } => "H",
            PolynomialFamily::AlSalamChihara { .. } => "Q",
            PolynomialFamily::ConditionalAsc { .. } => "P",
            PolynomialFamily::ChebyshevU => "U",
            PolynomialFamily::HermiteProb => "He",
        }
    }

    /// Values of degrees `0..=n` at `x`.
    pub fn eval_all(&self, n: usize, x: f64) -> Vec<f64> {
        // parameters were validated by the constructors
        match *self {
            PolynomialFamily::ContinuousQHermite { q } => continuous_qhermite_all(n, x, q).expect("validated"),
            PolynomialFamily::RescaledQHermite { q } => rescaled_qhermite_all(n, x, q),
            PolynomialFamily::AlSalamChihara { a, b, q } => asc_q_all(n, x, a, b, q).expect("validated"),
            PolynomialFamily::ConditionalAsc { y, rho, q } => asc_p_all(n, x, y, rho, q).expect("validated"),
            PolynomialFamily::ChebyshevU => chebyshev_u_all(n, x),
            PolynomialFamily::HermiteProb => hermite_prob_all(n, x),
        }
    }

    pub fn eval(&self, n: usize, x: f64) -> f64 {
        self.eval_all(n, x)[n]
    }
}

/// `c_{m,n}(q)` for `n >= 1`, `0 <= m <= floor(n/2)`.
///
/// Evaluated as `(1-q)^m` times the exact quotient polynomial `c_{m,n}(q)/(1-q)^m`,
/// which avoids the cancellation in the alternating sum near `q = 1`.
pub fn c_coefficient(m: usize, n: usize, q: QParameter) -> Result<f64> {
    let reduced = c_coefficient_reduced(m, n, q)?;
    Ok((1.0 - q.value()).powi(m as i32) * reduced)
}

/// `c_{m,n}(q) / (1-q)^m`; at `q = 1` the classical Hermite-expansion coefficient.
pub fn c_coefficient_reduced(m: usize, n: usize, q: QParameter) -> Result<f64> {
    Ok(exact::reduced_c_polynomial(m, n)?.eval(q.value()))
}

/// `c_{m,n}(q)` summed term by term in floating point exactly as defined.
pub fn c_coefficient_direct(m: usize, n: usize, q: QParameter) -> Result<f64> {
    exact::check_c_indices(m, n)?;
    let (m, n) = (m as i64, n as i64);
    let qv = q.value();
    let mut sum = 0.0;
    for j in 0..=m {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let weight = qseries::binomial(n, m - j) - qseries::binomial(n, m - j - 1);
        sum += sign * qv.powi((j * (j + 1) / 2) as i32) * weight * q_binomial(n - 2 * m + j, j, q);
    }
    Ok(sum)
}

/// Table of `c_{m,n}(q)` and `c_{m,n}(q)/(1-q)^m` for one `(n, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub n: usize,
    pub q: QParameter,
    pub c: Vec<f64>,
    pub reduced: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(n: usize, q: QParameter) -> Result<Self> {
        let mut c = Vec::with_capacity(n / 2 + 1);
        let mut reduced = Vec::with_capacity(n / 2 + 1);
        for m in 0..=n / 2 {
            let r = c_coefficient_reduced(m, n, q)?;
            reduced.push(r);
            c.push((1.0 - q.value()).powi(m as i32) * r);
        }
        Ok(CoefficientTable { n, q, c, reduced })
    }
}

/// Left-hand side of an expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expanded {
    /// `scale * x^n`
    Power { scale: f64 },
    /// `U_n(arg_scale * x)`
    ChebyshevU { arg_scale: f64 },
}

/// Basis in which the left-hand side is expanded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    /// `U_k(arg_scale * x)`
    ChebyshevU { arg_scale: f64 },
    /// `h_k(x|q)`
    ContinuousQHermite { q: QParameter },
    /// `H_k(x|q)`
    RescaledQHermite { q: QParameter },
}

impl Basis {
    fn eval_all(&self, n: usize, x: f64) -> Vec<f64> {
        match *self {
            Basis::ChebyshevU { arg_scale } => chebyshev_u_all(n, arg_scale * x),
            Basis::ContinuousQHermite { q } => continuous_qhermite_all(n, x, q).expect("validated"),
            Basis::RescaledQHermite { q } => rescaled_qhermite_all(n, x, q),
        }
    }
}

/// Coefficients of an expansion `lhs = sum coeff_k * basis_k`, listed for degrees
/// `n, n-2, n-4, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoefficients {
    pub n: usize,
    pub expanded: Expanded,
    pub basis: Basis,
    pub terms: Vec<(usize, f64)>,
}

impl ExpansionCoefficients {
    pub fn lhs(&self, x: f64) -> f64 {
        match self.expanded {
            Expanded::Power { scale } => scale * x.powi(self.n as i32),
            Expanded::ChebyshevU { arg_scale } => chebyshev_u(self.n, arg_scale * x),
        }
    }

    /// Sum of the coefficients against the basis evaluated at `x`.
    pub fn rhs(&self, x: f64) -> f64 {
        let values = self.basis.eval_all(self.n, x);
        self.terms.iter().map(|&(k, c)| c * values[k]).sum()
    }

    pub fn coefficient(&self, degree: usize) -> Option<f64> {
        self.terms.iter().find(|&&(k, _)| k == degree).map(|&(_, c)| c)
    }
}

/// Which Chebyshev expansion of `x^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChebyshevVariant {
    /// `x^n = sum_k (C(n,k) - C(n,k-1)) U_{n-2k}(x/2)`
    HalfArgument,
    /// `2^n x^n = sum_k (C(n,k) - C(n,k-1)) U_{n-2k}(x)`
    Doubled,
    /// `(1-q)^(n/2) x^n = sum_k (C(n,k) - C(n,k-1)) U_{n-2k}(x sqrt(1-q)/2)`, `|q| < 1`
    QScaled(QParameter),
}

/// Expansion of a power of `x` in Chebyshev polynomials of the second kind.
pub fn expand_xn_in_u(n: usize, variant: ChebyshevVariant) -> Result<ExpansionCoefficients> {
    let (scale, arg_scale) = match variant {
        ChebyshevVariant::HalfArgument => (1.0, 0.5),
        ChebyshevVariant::Doubled => (2f64.powi(n as i32), 1.0),
        ChebyshevVariant::QScaled(q) => {
            let q = q.proper()?;
            ((1.0 - q).powf(n as f64 / 2.0), (1.0 - q).sqrt() / 2.0)
        }
    };
    let n_i = n as i64;
    let terms = (0..=n_i / 2)
        .map(|k| {
            let coeff = qseries::binomial(n_i, k) - qseries::binomial(n_i, k - 1);
            ((n_i - 2 * k) as usize, coeff)
        })
        .collect();
    Ok(ExpansionCoefficients {
        n,
        expanded: Expanded::Power { scale },
        basis: Basis::ChebyshevU { arg_scale },
        terms,
    })
}

/// Which q-Hermite basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HermiteBasis {
    /// `H_k(x|q)`
    Rescaled,
    /// `h_k(x|q)`
    Continuous,
}

/// Expansion of a Chebyshev polynomial in q-Hermite polynomials:
///
/// * `U_n(x) = sum_j (-1)^j q^(j(j+1)/2) [n-j choose j]_q h_{n-2j}(x|q)`
/// * `U_n(x sqrt(1-q)/2) = sum_j (-1)^j (1-q)^(n/2-j) q^(j(j+1)/2) [n-j choose j]_q H_{n-2j}(x|q)`
pub fn expand_u_in_qhermite(n: usize, q: QParameter, basis: HermiteBasis) -> Result<ExpansionCoefficients> {
    let qv = q.proper()?;
    let n_i = n as i64;
    let terms = (0..=n_i / 2)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let mut coeff = sign * qv.powi((j * (j + 1) / 2) as i32) * q_binomial(n_i - j, j, q);
            if basis == HermiteBasis::Rescaled {
                coeff *= (1.0 - qv).powf(n as f64 / 2.0 - j as f64);
            }
            ((n_i - 2 * j) as usize, coeff)
        })
        .collect();
    let (expanded, basis) = match basis {
        HermiteBasis::Continuous => (
            Expanded::ChebyshevU { arg_scale: 1.0 },
            Basis::ContinuousQHermite { q },
        ),
        HermiteBasis::Rescaled => (
            Expanded::ChebyshevU { arg_scale: (1.0 - qv).sqrt() / 2.0 },
            Basis::RescaledQHermite { q },
        ),
    };
    Ok(ExpansionCoefficients { n, expanded, basis, terms })
}

/// Expansion of `x^n` in q-Hermite polynomials:
///
/// * `x^n = sum_m (1-q)^(-m) c_{m,n}(q) H_{n-2m}(x|q)`, also valid at `q = 1`
/// * `x^n = 2^(-n) sum_m c_{m,n}(q) h_{n-2m}(x|q)`, `|q| < 1`
pub fn expand_xn_in_qhermite(n: usize, q: QParameter, basis: HermiteBasis) -> Result<ExpansionCoefficients> {
    let table = CoefficientTable::new(n, q)?;
    let (values, basis) = match basis {
        HermiteBasis::Rescaled => (table.reduced, Basis::RescaledQHermite { q }),
        HermiteBasis::Continuous => {
            q.proper()?;
            let scale = 0.5f64.powi(n as i32);
            (
                table.c.iter().map(|c| c * scale).collect(),
                Basis::ContinuousQHermite { q },
            )
        }
    };
    let terms = values.into_iter().enumerate().map(|(m, c)| (n - 2 * m, c)).collect();
    Ok(ExpansionCoefficients {
        n,
        expanded: Expanded::Power { scale: 1.0 },
        basis,
        terms,
    })
}

/// Classical coefficient `n! / (2^m m! (n-2m)!)` of `He_{n-2m}` in `x^n`.
pub fn hermite_expansion_coefficient(m: usize, n: usize) -> f64 {
    let mut v = 1.0;
    // n! / (n-2m)! / m! / 2^m, built to stay in range
    for i in 0..2 * m {
        v *= (n - i) as f64;
    }
    for i in 1..=m {
        v /= 2.0 * i as f64;
    }
    v
}
