//! Closed-form moments and Bessel-series moment generating functions.
//!
//! Moments use the exact quotient polynomials `c_{m,n}(q)/(1-q)^m`:
//!
//! * `E_N X^{2j} = [sum_k (-1)^k q^{k(k+1)/2} (2k+1) C(2j+1, j-k)] / ((2j+1)(1-q)^j)`
//! * `E_h X^{2j} = (1-q)^j / 4^j * E_N X^{2j}`
//! * `E_CN X^n = sum_m c_{m,n}(q)/(1-q)^m rho^{n-2m} H_{n-2m}(y|q)`
//! * `E_Q X^n = 2^{-n} sum_j c_{j,n}(q) S_{n-2j}(a,b|q)`
//!
//! The moment generating functions are series in `I_nu`. Writing
//! `I_nu(z) = (z/2)^nu / nu! * F(nu+1, z^2/4)` with `F(c, s) = sum_m s^m / ((c)_m m!)`
//! removes the `1/t` prefactor and all square roots:
//!
//! ```text
//! M(t) = sum_k u^k c_k G_k(s),
//! G_k(s) = sum_j (-1)^j q^{j(j+1)/2} [k+j choose j]_q s^j / (k+2j)! * F(k+2j+2, s)
//! ```
//!
//! | family | `u`        | `c_k`          | `s`           |
//! |--------|------------|----------------|---------------|
//! | `fN`   | -          | `[k = 0]`      | `t^2/(1-q)`   |
//! | `fh`   | -          | `[k = 0]`      | `t^2/4`       |
//! | `fCN`  | `t rho`    | `H_k(y|q)`     | `t^2/(1-q)`   |
//! | `fQ`   | `t/2`      | `S_k(a,b|q)`   | `t^2/4`       |
//!
//! For `q` close to one the inner sum cancels massively (24 digits at `q = 0.999`,
//! `t = 1`), so it is accumulated in double-double arithmetic.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::ddouble::Dd;
use crate::densities::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::orthopoly::{hermite_expansion_coefficient, rescaled_qhermite_all};
use crate::qseries::exact::{q_normal_moment_polynomial, reduced_c_polynomial};
use crate::qseries::{s_polynomial, QParameter};

/// Largest `|t|` accepted by [`bessel_i`].
pub const BESSEL_ARG_LIMIT: f64 = 100.0;

/// Largest order accepted by [`bessel_i`].
pub const BESSEL_ORDER_LIMIT: u32 = 300;

/// Truncation controls of the Bessel double series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselSeriesConfig {
    pub term_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for BesselSeriesConfig {
    fn default() -> Self {
        BesselSeriesConfig {
            term_tol: 1e-15,
            max_outer: 120,
            max_inner: 80,
        }
    }
}

impl BesselSeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.term_tol > 0.0) {
            return Err(Error::invalid("term_tol", self.term_tol, "must be positive"));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::invalid("max_terms", 0.0, "must be positive"));
        }
        Ok(())
    }
}

/// Value of a truncated Bessel series together with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Number of outer (`k`) terms summed; 0 for closed forms.
    pub outer_terms: usize,
    /// Largest number of inner (`j`) terms used by any outer term.
    pub inner_terms: usize,
    /// Double-double rounding bound, `2^-100 * sum |term|`.
    pub rounding_bound: f64,
}

impl SeriesValue {
    fn closed_form(value: f64) -> Self {
        SeriesValue {
            value,
            outer_terms: 0,
            inner_terms: 0,
            rounding_bound: 0.0,
        }
    }
}

/// `(2n-1)!! = 1 * 3 * ... * (2n-1)` style double factorial `n!!`; `0!! = (-1)!! = 1`.
pub fn double_factorial(n: u32) -> Result<f64> {
    let mut v = 1.0;
    let mut k = n;
    while k > 1 {
        v *= k as f64;
        k -= 2;
    }
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            limit: 300.0,
        })
    }
}

/// Modified Bessel function `I_nu(t)` of integer order by its ascending series.
pub fn bessel_i(order: u32, t: f64) -> Result<f64> {
    if !(t.abs() <= BESSEL_ARG_LIMIT) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            limit: BESSEL_ARG_LIMIT,
        });
    }
    if order > BESSEL_ORDER_LIMIT {
        return Err(Error::OutOfRange {
            name: "order",
            value: order as f64,
            limit: BESSEL_ORDER_LIMIT as f64,
        });
    }
    let half = 0.5 * t;
    let mut lead = 1.0;
    for k in 1..=order {
        lead *= half / k as f64;
    }
    if lead == 0.0 {
        return Ok(0.0);
    }
    let x = half * half;
    let mut term = lead;
    let mut sum = lead;
    for m in 1.. {
        term *= x / (m as f64 * (m + order) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    Ok(sum)
}

/// `F(c, s) = sum_m s^m / ((c)_m m!)` for `s >= 0`, in double-double.
fn hyp0f1(c: usize, s: Dd) -> Dd {
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let sf = s.to_f64();
    for m in 1..100_000usize {
        term = term * s / ((c + m - 1) as f64 * m as f64);
        sum += term;
        if term.to_f64() <= 1e-34 * sum.to_f64() && (m as f64) > sf.sqrt() {
            break;
        }
    }
    sum
}

struct SeriesEngine<'a> {
    q: f64,
    s: Dd,
    config: &'a BesselSeriesConfig,
    f_cache: Vec<Option<Dd>>,
    inner_max: usize,
    abs_sum: f64,
}

impl<'a> SeriesEngine<'a> {
    fn new(q: f64, s: Dd, config: &'a BesselSeriesConfig) -> Self {
        SeriesEngine {
            q,
            s,
            config,
            f_cache: Vec::new(),
            inner_max: 0,
            abs_sum: 0.0,
        }
    }

    fn f(&mut self, c: usize) -> Dd {
        if self.f_cache.len() <= c {
            self.f_cache.resize(c + 1, None);
        }
        match self.f_cache[c] {
            Some(v) => v,
            None => {
                let v = hyp0f1(c, self.s);
                self.f_cache[c] = Some(v);
                v
            }
        }
    }

    /// `G_k(s)`, returned together with `sum_j |term_j|`.
    fn inner(&mut self, k: usize) -> Result<(Dd, f64)> {
        let q = Dd::new(self.q);
        // s^j / (k+2j)!
        let mut lead = Dd::ONE;
        for i in 1..=k {
            lead = lead / i as f64;
        }
        // (-1)^j q^{j(j+1)/2} [k+j choose j]_q
        let mut weight = Dd::ONE;
        let mut qj = Dd::ONE;
        let mut qkj = q.powi(k as u32);
        let mut sum = Dd::ZERO;
        let mut abs = 0.0;
        let mut quiet = 0;
        for j in 0..self.config.max_inner {
            let term = weight * lead * self.f(k + 2 * j + 2);
            sum += term;
            let mag = term.abs().to_f64();
            abs += mag;
            if mag <= self.config.term_tol * sum.abs().to_f64() {
                quiet += 1;
                if quiet == 2 {
                    self.inner_max = self.inner_max.max(j + 1);
                    return Ok((sum, abs));
                }
            } else {
                quiet = 0;
            }
            qj = qj * q;
            qkj = qkj * q;
            let denom = Dd::ONE - qj;
            weight = -(weight * qj * (Dd::ONE - qkj) / denom);
            let a = (k + 2 * j + 1) as f64;
            lead = lead * self.s / (a * (a + 1.0));
        }
        Err(Error::NonConvergence {
            what: "Bessel series (inner sum)",
            limit: self.config.max_inner,
            detail: format!("k = {k}, s = {}, q = {}", self.s.to_f64(), self.q),
        })
    }

    /// `sum_k u^k c_k G_k(s)`.
    fn outer(&mut self, u: f64, mut coeff: impl FnMut(usize) -> f64) -> Result<SeriesValue> {
        let mut sum = Dd::ZERO;
        let mut upow = 1.0;
        let mut quiet = 0;
        for k in 0..self.config.max_outer {
            let c = coeff(k);
            let scale = upow * c;
            let term = if scale == 0.0 {
                Dd::ZERO
            } else {
                let (g, abs) = self.inner(k)?;
                self.abs_sum += abs * scale.abs();
                g * scale
            };
            sum += term;
            if term.abs().to_f64() <= self.config.term_tol * sum.abs().to_f64() {
                quiet += 1;
                if quiet == 3 {
                    return Ok(SeriesValue {
                        value: sum.to_f64(),
                        outer_terms: k + 1,
                        inner_terms: self.inner_max,
                        rounding_bound: self.abs_sum * 2f64.powi(-100),
                    });
                }
            } else {
                quiet = 0;
            }
            upow *= u;
        }
        Err(Error::NonConvergence {
            what: "Bessel series (outer sum)",
            limit: self.config.max_outer,
            detail: format!("u = {u}, s = {}, q = {}", self.s.to_f64(), self.q),
        })
    }

    fn single(&mut self) -> Result<SeriesValue> {
        self.outer(0.0, |k| if k == 0 { 1.0 } else { 0.0 })
    }
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("t", t, "must be finite"))
    }
}

fn check_bessel_argument(t: f64, z: f64) -> Result<()> {
    if z > BESSEL_ARG_LIMIT {
        return Err(Error::invalid(
            "t",
            t,
            "the Bessel argument (2|t|/sqrt(1-q) or |t|) must not exceed 100",
        ));
    }
    Ok(())
}

/// `s = t^2/(1-q)` in double-double (the Bessel argument is `2 sqrt(s)`).
fn s_normal(t: f64, q: f64) -> Result<Dd> {
    let s = Dd::new(t) * Dd::new(t) / (Dd::ONE - Dd::new(q));
    check_bessel_argument(t, 2.0 * s.to_f64().sqrt())?;
    Ok(s)
}

fn s_compact(t: f64) -> Result<Dd> {
    check_bessel_argument(t, t.abs())?;
    Ok(Dd::new(t) * Dd::new(t) / 4.0)
}

/// `E exp(tX)` under `fN(.|q)`; the Gaussian `exp(t^2/2)` at `q = 1`.
pub fn mgf_fn(t: f64, q: QParameter, config: &BesselSeriesConfig) -> Result<SeriesValue> {
    check_t(t)?;
    config.validate()?;
    if q.is_limit_case() {
        return Ok(SeriesValue::closed_form((0.5 * t * t).exp()));
    }
    let qv = q.value();
    SeriesEngine::new(qv, s_normal(t, qv)?, config).single()
}

/// `E exp(tX)` under `fh(.|q)`.
pub fn mgf_fh(t: f64, q: QParameter, config: &BesselSeriesConfig) -> Result<SeriesValue> {
    check_t(t)?;
    config.validate()?;
    let qv = q.proper()?;
    SeriesEngine::new(qv, s_compact(t)?, config).single()
}

/// `E exp(tX)` under `fCN(.|y,rho,q)`; `exp(t rho y + (1-rho^2) t^2/2)` at `q = 1`.
pub fn mgf_fcn(t: f64, y: f64, rho: f64, q: QParameter, config: &BesselSeriesConfig) -> Result<SeriesValue> {
    check_t(t)?;
    config.validate()?;
    if q.is_limit_case() {
        return Ok(SeriesValue::closed_form((t * rho * y + 0.5 * (1.0 - rho * rho) * t * t).exp()));
    }
    let qv = q.value();
    let hermite = rescaled_qhermite_all(config.max_outer, y, q);
    SeriesEngine::new(qv, s_normal(t, qv)?, config).outer(t * rho, |k| hermite[k])
}

/// `E exp(tX)` under `fQ(.|a,b,q)`.
pub fn mgf_fq(t: f64, a: f64, b: f64, q: QParameter, config: &BesselSeriesConfig) -> Result<SeriesValue> {
    check_t(t)?;
    config.validate()?;
    q.proper()?;
    let mut engine = SeriesEngine::new(q.value(), s_compact(t)?, config);
    engine.outer(0.5 * t, |k| s_polynomial(k as u32, a, b, q))
}

/// Moment generating function of any family with the default series configuration.
pub fn mgf(spec: &DistributionSpec, t: f64) -> Result<SeriesValue> {
    mgf_with(spec, t, &BesselSeriesConfig::default())
}

pub fn mgf_with(spec: &DistributionSpec, t: f64, config: &BesselSeriesConfig) -> Result<SeriesValue> {
    let q = spec.q();
    match spec.family() {
        Family::QHermite => mgf_fh(t, q, config),
        Family::QNormal => mgf_fn(t, q, config),
        Family::AlSalamChihara { a, b } => mgf_fq(t, a, b, q, config),
        Family::ConditionalQNormal { y, rho } => mgf_fcn(t, y, rho, q, config),
    }
}

/// `n`-th moment of `fN(.|q)`: zero for odd `n`, `(n-1)!!` at `q = 1`.
pub fn moment_fn(n: u32, q: QParameter) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    if q.is_limit_case() {
        return double_factorial(n.saturating_sub(1)).unwrap_or(f64::INFINITY);
    }
    let j = (n / 2) as usize;
    q_normal_moment_polynomial(j).eval(q.value()) / (2 * j + 1) as f64
}

/// `n`-th moment of `fh(.|q)`.
pub fn moment_fh(n: u32, q: QParameter) -> Result<f64> {
    let qv = q.proper()?;
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let j = (n / 2) as i32;
    Ok(((1.0 - qv) / 4.0).powi(j) * moment_fn(n, q))
}

/// `n`-th moment of `fCN(.|y,rho,q)`; at `q = 1` the conditional Gaussian moment.
pub fn moment_fcn(n: u32, y: f64, rho: f64, q: QParameter) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    let n = n as usize;
    let hermite = rescaled_qhermite_all(n, y, q);
    let mut sum = 0.0;
    for m in 0..=n / 2 {
        let reduced = if q.is_limit_case() {
            hermite_expansion_coefficient(m, n)
        } else {
            reduced_c_polynomial(m, n)?.eval(q.value())
        };
        sum += reduced * rho.powi((n - 2 * m) as i32) * hermite[n - 2 * m];
    }
    Ok(sum)
}

/// `n`-th moment of `fQ(.|a,b,q)`.
pub fn moment_fq(n: u32, a: f64, b: f64, q: QParameter) -> Result<f64> {
    let qv = q.proper()?;
    if n == 0 {
        return Ok(1.0);
    }
    let n = n as usize;
    let mut sum = 0.0;
    for j in 0..=n / 2 {
        let c = (1.0 - qv).powi(j as i32) * reduced_c_polynomial(j, n)?.eval(qv);
        sum += c * s_polynomial((n - 2 * j) as u32, a, b, q);
    }
    Ok(sum * 0.5f64.powi(n as i32))
}

/// `n`-th moment of any family.
pub fn moment(spec: &DistributionSpec, n: u32) -> Result<f64> {
    let q = spec.q();
    match spec.family() {
        Family::QHermite => moment_fh(n, q),
        Family::QNormal => Ok(moment_fn(n, q)),
        Family::AlSalamChihara { a, b } => moment_fq(n, a, b, q),
        Family::ConditionalQNormal { y, rho } => moment_fcn(n, y, rho, q),
    }
}

/// `sum_{n <= order} t^n mu_n / n!`.
pub fn mgf_from_moments(spec: &DistributionSpec, t: f64, order: u32) -> Result<f64> {
    let mut sum = 0.0;
    let mut tn = 1.0;
    for n in 0..=order {
        sum += tn * moment(spec, n)?;
        tn *= t / (n + 1) as f64;
    }
    Ok(sum)
}

/// Moments `mu_0..=mu_max_order` of one distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub spec: DistributionSpec,
    pub max_order: u32,
    pub values: Vec<f64>,
}

impl MomentTable {
    pub fn new(spec: DistributionSpec, max_order: u32) -> Result<Self> {
        let values = (0..=max_order).map(|n| moment(&spec, n)).collect::<Result<Vec<_>>>()?;
        Ok(MomentTable { spec, max_order, values })
    }

    /// `[mu_{i+j}]` for `0 <= i, j <= max_order/2`.
    pub fn hankel_matrix(&self) -> DMatrix<f64> {
        let size = (self.max_order / 2) as usize + 1;
        DMatrix::from_fn(size, size, |i, j| self.values[i + j])
    }

    /// Smallest eigenvalue of the Hankel moment matrix.
    pub fn hankel_min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.hankel_matrix())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive_semidefinite(&self, floor: f64) -> bool {
        self.hankel_min_eigenvalue() >= floor
    }
}

/// One point of a `q -> 1` convergence check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitPoint {
    pub q: f64,
    pub value: f64,
    pub error: f64,
}

/// Errors against a `q = 1` target along an increasing sequence of `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub target: f64,
    pub points: Vec<LimitPoint>,
}

impl LimitReport {
    fn build(target: f64, qs: &[f64], mut eval: impl FnMut(QParameter) -> Result<f64>) -> Result<Self> {
        let mut last = f64::NEG_INFINITY;
        let mut points = Vec::with_capacity(qs.len());
        for &qv in qs {
            if !(qv > last && qv < 1.0) {
                return Err(Error::invalid("q", qv, "sequence must increase strictly and stay below 1"));
            }
            last = qv;
            let value = eval(QParameter::new(qv)?)?;
            points.push(LimitPoint {
                q: qv,
                value,
                error: (value - target).abs(),
            });
        }
        Ok(LimitReport { target, points })
    }

    /// Errors strictly decrease along the sequence (all zero also counts).
    pub fn is_decreasing(&self) -> bool {
        if self.points.iter().all(|p| p.error == 0.0) {
            return true;
        }
        self.points.windows(2).all(|w| w[1].error < w[0].error)
    }
}

/// `|mgf_fN(t, q) - exp(t^2/2)|` along `qs`.
pub fn gaussian_limit_check(t: f64, qs: &[f64]) -> Result<LimitReport> {
    let config = BesselSeriesConfig::default();
    LimitReport::build((0.5 * t * t).exp(), qs, |q| Ok(mgf_fn(t, q, &config)?.value))
}

/// `|mgf_fCN(t, y, rho, q) - exp(t rho y + (1-rho^2) t^2/2)|` along `qs`.
pub fn conditional_limit_check(t: f64, y: f64, rho: f64, qs: &[f64]) -> Result<LimitReport> {
    let config = BesselSeriesConfig::default();
    let target = (t * rho * y + 0.5 * (1.0 - rho * rho) * t * t).exp();
    LimitReport::build(target, qs, |q| Ok(mgf_fcn(t, y, rho, q, &config)?.value))
}

/// `|c_{m,n}(q)/(1-q)^m - n!/(2^m m! (n-2m)!)|` along `qs`.
pub fn coefficient_limit_check(m: usize, n: usize, qs: &[f64]) -> Result<LimitReport> {
    let poly = reduced_c_polynomial(m, n)?;
    LimitReport::build(hermite_expansion_coefficient(m, n), qs, |q| Ok(poly.eval(q.value())))
}

/// `|mu_n(fN, q) - (n-1)!!|` along `qs`.
pub fn moment_limit_check(n: u32, qs: &[f64]) -> Result<LimitReport> {
    let target = if n % 2 == 1 { 0.0 } else { double_factorial(n.saturating_sub(1))? };
    LimitReport::build(target, qs, |q| Ok(moment_fn(n, q)))
}
