//! The four densities `fh`, `fN`, `fQ`, `fCN`, their supports and the auxiliary
//! quadratics `w_k` and `W_k`.
//!
//! Each density is an infinite product whose `k = 0` factor vanishes at the support
//! endpoints. That factor is combined analytically with the square-root prefactor, so
//! the remaining product over `k >= 1` is smooth and strictly positive on the support:
//!
//! * `fh(x|q)  = 2 (q)_inf / pi * sqrt(1-x^2) * prod_{k>=1} ((1+q^k)^2 - 4 q^k x^2)`
//! * `fN(x|q)  = sqrt(1-q) (q)_inf / (2 pi) * sqrt(4-(1-q)x^2) * prod_{k>=1} ((1+q^k)^2 - (1-q) q^k x^2)`
//! * `fQ(x|a,b,q) = 2 (q,ab)_inf / pi * sqrt(1-x^2) / w_0(x) * prod_{k>=1} ((1+q^k)^2 - 4 q^k x^2) / w_k(x)`
//! * `fCN(x|y,rho,q) = fN(x|q) (rho^2)_inf / prod_{k>=0} W_k(x,y)`
//!
//! At `q = 1`, `fN` is the standard normal and `fCN` the normal with mean `rho y` and
//! variance `1 - rho^2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::orthopoly::PolynomialFamily;
use crate::qseries::{
    q_factorial, q_pochhammer, q_pochhammer_infinite, q_pochhammer_multi, PochhammerOrder, QParameter,
};

/// Tolerances and caps for the truncated infinite products and series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub product_tol: f64,
    pub max_factors: usize,
    pub series_tol: f64,
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            product_tol: 1e-14,
            // |q| = 0.95 already needs ~800 factors for 1e-14
            max_factors: 50_000,
            series_tol: 1e-13,
            max_terms: 500,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.product_tol > 0.0) {
            return Err(Error::invalid("product_tol", self.product_tol, "must be positive"));
        }
        if !(self.series_tol > 0.0) {
            return Err(Error::invalid("series_tol", self.series_tol, "must be positive"));
        }
        if self.max_factors == 0 {
            return Err(Error::invalid("max_factors", 0.0, "must be positive"));
        }
        if self.max_terms == 0 {
            return Err(Error::invalid("max_terms", 0.0, "must be positive"));
        }
        Ok(())
    }
}

/// Family selector without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// `fh`
    QHermite,
    /// `fN`
    QNormal,
    /// `fQ`
    AlSalamChihara,
    /// `fCN`
    ConditionalQNormal,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] = [
        FamilyKind::QHermite,
        FamilyKind::QNormal,
        FamilyKind::AlSalamChihara,
        FamilyKind::ConditionalQNormal,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FamilyKind::QHermite => "fh",
            FamilyKind::QNormal => "fN",
            FamilyKind::AlSalamChihara => "fQ",
            FamilyKind::ConditionalQNormal => "fCN",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FamilyKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fh" => Ok(FamilyKind::QHermite),
            "fN" => Ok(FamilyKind::QNormal),
            "fQ" => Ok(FamilyKind::AlSalamChihara),
            "fCN" => Ok(FamilyKind::ConditionalQNormal),
            other => Err(format!("unknown family `{other}` (expected fh, fN, fQ or fCN)")),
        }
    }
}

/// Family together with its non-`q` parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    QHermite,
    QNormal,
    AlSalamChihara { a: f64, b: f64 },
    ConditionalQNormal { y: f64, rho: f64 },
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::QHermite => FamilyKind::QHermite,
            Family::QNormal => FamilyKind::QNormal,
            Family::AlSalamChihara { .. } => FamilyKind::AlSalamChihara,
            Family::ConditionalQNormal { .. } => FamilyKind::ConditionalQNormal,
        }
    }
}

/// A validated distribution: family, parameters and truncation policy.
///
/// Immutable once built; the normalizing constant is computed on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    family: Family,
    q: QParameter,
    truncation: TruncationPolicy,
    constant: ScaledProduct,
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, v, "must satisfy |value| < 1"))
    }
}

impl DistributionSpec {
    /// `fh(x|q)`, `|q| < 1`.
    pub fn q_hermite(q: QParameter) -> Result<Self> {
        Self::build(Family::QHermite, q, TruncationPolicy::default())
    }

    /// `fN(x|q)`, `q` in `(-1, 1]`.
    pub fn q_normal(q: QParameter) -> Result<Self> {
        Self::build(Family::QNormal, q, TruncationPolicy::default())
    }

    /// `fQ(x|a,b,q)`, `|a|, |b|, |q| < 1`.
    pub fn al_salam_chihara(a: f64, b: f64, q: QParameter) -> Result<Self> {
        Self::build(Family::AlSalamChihara { a, b }, q, TruncationPolicy::default())
    }

    /// `fCN(x|y,rho,q)`, `|rho| < 1`, `y` in `J(q)`, `q` in `(-1, 1]`.
    pub fn conditional_q_normal(y: f64, rho: f64, q: QParameter) -> Result<Self> {
        Self::build(Family::ConditionalQNormal { y, rho }, q, TruncationPolicy::default())
    }

    pub fn new(family: Family, q: QParameter) -> Result<Self> {
        Self::build(family, q, TruncationPolicy::default())
    }

    pub fn with_truncation(self, truncation: TruncationPolicy) -> Result<Self> {
        Self::build(self.family, self.q, truncation)
    }

    fn build(family: Family, q: QParameter, truncation: TruncationPolicy) -> Result<Self> {
        truncation.validate()?;
        match family {
            Family::QHermite | Family::AlSalamChihara { .. } if q.is_limit_case() => {
                return Err(Error::invalid("q", 1.0, "q = 1 is only available for fN and fCN"));
            }
            Family::AlSalamChihara { a, b } => {
                check_unit("a", a)?;
                check_unit("b", b)?;
            }
            Family::ConditionalQNormal { y, rho } => {
                check_unit("rho", rho)?;
                if !y.is_finite() {
                    return Err(Error::invalid("y", y, "must be finite"));
                }
                if let Some(w) = q.support_half_width() {
                    if y.abs() > w {
                        return Err(Error::invalid("y", y, "must lie in J(q) = [-2/sqrt(1-q), 2/sqrt(1-q)]"));
                    }
                }
            }
            _ => {}
        }

        let constant = if q.is_limit_case() {
            ScaledProduct::of(match family {
                Family::ConditionalQNormal { rho, .. } => 1.0 / (2.0 * PI * (1.0 - rho * rho)).sqrt(),
                _ => 1.0 / (2.0 * PI).sqrt(),
            })
        } else {
            let tol = truncation.product_tol;
            let qv = q.value();
            let mut c = scaled_pochhammer_infinite(qv, q, tol)?;
            match family {
                Family::QHermite => c.mul(2.0 / PI),
                Family::QNormal => c.mul((1.0 - qv).sqrt() / (2.0 * PI)),
                Family::AlSalamChihara { a, b } => {
                    c.mul_product(&scaled_pochhammer_infinite(a * b, q, tol)?);
                    c.mul(2.0 / PI);
                }
                Family::ConditionalQNormal { rho, .. } => {
                    c.mul_product(&scaled_pochhammer_infinite(rho * rho, q, tol)?);
                    c.mul((1.0 - qv).sqrt() / (2.0 * PI));
                }
            }
            c
        };
        Ok(DistributionSpec { family, q, truncation, constant })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn kind(&self) -> FamilyKind {
        self.family.kind()
    }

    pub fn q(&self) -> QParameter {
        self.q
    }

    pub fn truncation(&self) -> &TruncationPolicy {
        &self.truncation
    }

    pub fn support(&self) -> Support {
        support(self)
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        density(self, x)
    }

    /// The polynomial family orthogonal with respect to this density.
    pub fn orthogonal_family(&self) -> PolynomialFamily {
        let q = self.q;
        match self.family {
            Family::QHermite => PolynomialFamily::ContinuousQHermite { q },
            Family::QNormal => PolynomialFamily::RescaledQHermite { q },
            Family::AlSalamChihara { a, b } => PolynomialFamily::AlSalamChihara { a, b, q },
            Family::ConditionalQNormal { y, rho } => PolynomialFamily::ConditionalAsc { y, rho, q },
        }
    }

    /// `int p_n^2 f`: `(q)_n`, `[n]_q!`, `(q,ab)_n` or `(rho^2)_n [n]_q!`.
    pub fn orthogonality_norm(&self, n: usize) -> f64 {
        let q = self.q;
        match self.family {
            Family::QHermite => q_pochhammer(q.value(), q, n).value,
            Family::QNormal => q_factorial(n as u32, q),
            Family::AlSalamChihara { a, b } => q_pochhammer_multi(&[q.value(), a * b], q, n).value,
            Family::ConditionalQNormal { rho, .. } => {
                q_pochhammer(rho * rho, q, n).value * q_factorial(n as u32, q)
            }
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.q.value();
        match self.family {
            Family::QHermite => write!(f, "fh(q={q})"),
            Family::QNormal => write!(f, "fN(q={q})"),
            Family::AlSalamChihara { a, b } => write!(f, "fQ(a={a},b={b},q={q})"),
            Family::ConditionalQNormal { y, rho } => write!(f, "fCN(y={y},rho={rho},q={q})"),
        }
    }
}

/// Closed interval carrying the density; infinite bounds at `q = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// `[-1, 1]` for `fh` and `fQ`, `J(q)` for `fN` and `fCN`.
pub fn support(spec: &DistributionSpec) -> Support {
    match spec.family {
        Family::QHermite | Family::AlSalamChihara { .. } => Support { lower: -1.0, upper: 1.0 },
        Family::QNormal | Family::ConditionalQNormal { .. } => match spec.q.support_half_width() {
            Some(w) => Support { lower: -w, upper: w },
            None => Support {
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            },
        },
    }
}

/// `w_k(x|a,b,q) = (1+a^2 q^2k)(1+b^2 q^2k) - 2x(a+b) q^k (1+ab q^2k) + 4x^2 ab q^2k`.
///
/// Written in terms of `a q^k` and `b q^k`, so `w_k(x|a,b,q)` and `w_0(x|aq^k,bq^k,q)`
/// go through the same floating-point expression.
pub fn poly_w(k: u32, x: f64, a: f64, b: f64, q: f64) -> f64 {
    let qk = q.powi(k as i32);
    let (a, b) = (a * qk, b * qk);
    (1.0 + a * a) * (1.0 + b * b) - 2.0 * x * (a + b) * (1.0 + a * b) + 4.0 * x * x * a * b
}

/// `W_k(x,y|rho,q) = (1-rho^2 q^2k)^2 - (1-q) rho q^k (1+rho^2 q^2k) xy + (1-q) rho^2 (x^2+y^2) q^2k`.
///
/// Written in terms of `rho q^k`; `W_k(x,y|rho,q) = W_0(x,y|rho q^k,q)` holds bit for bit.
pub fn poly_w_conditional(k: u32, x: f64, y: f64, rho: f64, q: f64) -> f64 {
    let r = rho * q.powi(k as i32);
    let r2 = r * r;
    let s = 1.0 - q;
    (1.0 - r2) * (1.0 - r2) - s * r * (1.0 + r2) * x * y + s * r2 * (x * x + y * y)
}

/// Running product kept as mantissa and binary exponent so that long products near
/// `|q| = 1` neither overflow nor underflow before they are combined.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ScaledProduct {
    mantissa: f64,
    exp2: i32,
}

impl ScaledProduct {
    fn new() -> Self {
        ScaledProduct { mantissa: 1.0, exp2: 0 }
    }

    fn of(v: f64) -> Self {
        let mut p = ScaledProduct::new();
        p.mul(v);
        p
    }

    fn mul(&mut self, f: f64) {
        self.mantissa *= f;
        let m = self.mantissa.abs();
        if m > 1e150 || (m < 1e-150 && m > 0.0) {
            let e = m.log2().floor() as i32;
            self.mantissa *= 2f64.powi(-e);
            self.exp2 += e;
        }
    }

    fn mul_product(&mut self, other: &ScaledProduct) {
        self.exp2 += other.exp2;
        self.mul(other.mantissa);
    }

    /// `factor * self` as a plain float.
    fn scaled(&self, factor: f64) -> f64 {
        let mut v = factor * self.mantissa;
        let mut e = self.exp2;
        while e != 0 && v != 0.0 && v.is_finite() {
            let step = e.clamp(-1000, 1000);
            v *= 2f64.powi(step);
            e -= step;
        }
        v
    }
}

/// `(a;q)_inf` with the cut-off of [`q_pochhammer_infinite`], accumulated without underflow.
fn scaled_pochhammer_infinite(a: f64, q: QParameter, tol: f64) -> Result<ScaledProduct> {
    let factors = match q_pochhammer_infinite(a, q, tol)?.order {
        PochhammerOrder::Infinite { factors } | PochhammerOrder::Finite(factors) => factors,
    };
    let mut p = ScaledProduct::new();
    let mut term = a;
    for _ in 0..factors {
        p.mul(1.0 - term);
        term *= q.value();
    }
    Ok(p)
}

/// `prod_{k>=1} factor(k, q^k)`, stopped once `|factor - 1| < product_tol (1-|q|)` for two
/// consecutive `k` (the geometric tail is then below `product_tol`).
fn tail_product(q: f64, policy: &TruncationPolicy, mut factor: impl FnMut(f64) -> f64) -> Result<ScaledProduct> {
    let threshold = policy.product_tol * (1.0 - q.abs());
    let mut product = ScaledProduct::new();
    let mut qk = 1.0;
    let mut quiet = 0;
    for _ in 0..policy.max_factors {
        qk *= q;
        let f = factor(qk);
        product.mul(f);
        if (f - 1.0).abs() < threshold {
            quiet += 1;
            if quiet == 2 {
                return Ok(product);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "density product",
        limit: policy.max_factors,
        detail: format!("q = {q}, product_tol = {}", policy.product_tol),
    })
}

fn gaussian(x: f64, mean: f64, variance: f64) -> f64 {
    let z = x - mean;
    (-z * z / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
}

/// Density value; exactly zero outside the support.
pub fn density(spec: &DistributionSpec, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::invalid("x", x, "must not be NaN"));
    }
    let q = spec.q.value();
    if spec.q.is_limit_case() {
        return Ok(match spec.family {
            Family::ConditionalQNormal { y, rho } => gaussian(x, rho * y, 1.0 - rho * rho),
            _ => gaussian(x, 0.0, 1.0),
        });
    }
    if !spec.support().contains(x) {
        return Ok(0.0);
    }
    let policy = &spec.truncation;
    match spec.family {
        Family::QHermite => {
            let x2 = x * x;
            let mut p = tail_product(q, policy, |qk| (1.0 + qk) * (1.0 + qk) - 4.0 * qk * x2)?;
            p.mul_product(&spec.constant);
            Ok(p.scaled((1.0 - x2).max(0.0).sqrt()))
        }
        Family::QNormal => {
            let c2 = (1.0 - q) * x * x;
            let mut p = tail_product(q, policy, |qk| (1.0 + qk) * (1.0 + qk) - c2 * qk)?;
            p.mul_product(&spec.constant);
            Ok(p.scaled((4.0 - c2).max(0.0).sqrt()))
        }
        Family::AlSalamChihara { a, b } => {
            let x2 = x * x;
            let w0 = poly_w(0, x, a, b, q);
            let mut k = 0;
            let mut p = tail_product(q, policy, |qk| {
                k += 1;
                ((1.0 + qk) * (1.0 + qk) - 4.0 * qk * x2) / poly_w(k, x, a, b, q)
            })?;
            p.mul_product(&spec.constant);
            Ok(p.scaled((1.0 - x2).max(0.0).sqrt() / w0))
        }
        Family::ConditionalQNormal { y, rho } => {
            let c2 = (1.0 - q) * x * x;
            let w0 = poly_w_conditional(0, x, y, rho, q);
            let mut k = 0;
            let mut p = tail_product(q, policy, |qk| {
                k += 1;
                ((1.0 + qk) * (1.0 + qk) - c2 * qk) / poly_w_conditional(k, x, y, rho, q)
            })?;
            p.mul_product(&spec.constant);
            Ok(p.scaled((4.0 - c2).max(0.0).sqrt() / w0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> QParameter {
        QParameter::new(v).unwrap()
    }

    #[test]
    fn q_zero_closed_forms() {
        let fn0 = DistributionSpec::q_normal(q(0.0)).unwrap();
        assert!((fn0.density(0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        let fh0 = DistributionSpec::q_hermite(q(0.0)).unwrap();
        assert!((fh0.density(0.5).unwrap() - 2.0 / PI * 0.75f64.sqrt()).abs() < 1e-15);
        let fq0 = DistributionSpec::al_salam_chihara(0.5, 0.2, q(0.0)).unwrap();
        let expect = 2.0 * 0.9 * 0.91f64.sqrt() / (PI * poly_w(0, 0.3, 0.5, 0.2, 1.0));
        assert!((fq0.density(0.3).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn gaussian_limits() {
        let f = DistributionSpec::q_normal(q(1.0)).unwrap();
        assert!((f.density(0.0).unwrap() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-16);
        let g = DistributionSpec::conditional_q_normal(0.5, 0.6, q(1.0)).unwrap();
        let v = 0.64;
        let expect = (-(1.2f64 - 0.3).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
        assert!((g.density(1.2).unwrap() - expect).abs() < 1e-15);
        assert!(!f.support().is_bounded());
    }

    #[test]
    fn conditional_with_zero_rho_is_q_normal() {
        for &qv in &[-0.9, -0.2, 0.0, 0.5, 0.95] {
            let cn = DistributionSpec::conditional_q_normal(0.7, 0.0, q(qv)).unwrap();
            let n = DistributionSpec::q_normal(q(qv)).unwrap();
            for i in 0..20 {
                let x = -1.3 + 0.13 * i as f64;
                let (a, b) = (cn.density(x).unwrap(), n.density(x).unwrap());
                assert!((a - b).abs() < 1e-14, "q={qv} x={x}");
            }
        }
    }

    #[test]
    fn supports() {
        let s = DistributionSpec::q_normal(q(0.0)).unwrap().support();
        assert_eq!((s.lower, s.upper), (-2.0, 2.0));
        let s = DistributionSpec::q_normal(q(0.75)).unwrap().support();
        assert_eq!((s.lower, s.upper), (-4.0, 4.0));
        let s = DistributionSpec::q_hermite(q(0.9)).unwrap().support();
        assert_eq!((s.lower, s.upper), (-1.0, 1.0));
    }

    #[test]
    fn zero_outside_support_and_at_endpoints() {
        let f = DistributionSpec::q_normal(q(0.5)).unwrap();
        assert_eq!(f.density(2.9).unwrap(), 0.0);
        assert_eq!(f.density(-100.0).unwrap(), 0.0);
        assert!(f.density(2.0 / 0.5f64.sqrt()).unwrap() < 1e-6);
        let h = DistributionSpec::q_hermite(q(-0.5)).unwrap();
        assert_eq!(h.density(1.0).unwrap(), 0.0);
        assert_eq!(h.density(-1.5).unwrap(), 0.0);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(DistributionSpec::q_hermite(q(1.0)).is_err());
        assert!(DistributionSpec::al_salam_chihara(0.2, 0.3, q(1.0)).is_err());
        assert!(DistributionSpec::al_salam_chihara(1.0, 0.3, q(0.5)).is_err());
        assert!(DistributionSpec::conditional_q_normal(0.0, 1.0, q(0.5)).is_err());
        assert!(DistributionSpec::conditional_q_normal(2.1, 0.5, q(0.0)).is_err());
        assert!(DistributionSpec::conditional_q_normal(5.0, 0.5, q(1.0)).is_ok());
        let err = DistributionSpec::al_salam_chihara(0.2, -1.5, q(0.5)).unwrap_err();
        assert_eq!(err.parameter(), Some("b"));
    }

    #[test]
    fn w_polynomials() {
        assert_eq!(poly_w(3, 0.4, 0.0, 0.0, 0.7), 1.0);
        assert!((poly_w(0, 0.0, 0.5, 0.2, 0.3) - 1.3).abs() < 1e-15);
        assert_eq!(poly_w_conditional(2, 0.4, -0.3, 0.0, 0.7), 1.0);
        let rho: f64 = 0.45;
        assert!((poly_w_conditional(0, 0.0, 0.0, rho, 0.2) - (1.0 - rho * rho).powi(2)).abs() < 1e-16);
    }

    #[test]
    fn w_matches_expanded_form() {
        let (x, a, b, qv): (f64, f64, f64, f64) = (0.37, -0.55, 0.8, -0.6);
        for k in 0..6u32 {
            let qk = qv.powi(k as i32);
            let q2k = qk * qk;
            let literal = (1.0 + a * a * q2k) * (1.0 + b * b * q2k) - 2.0 * x * (a + b) * qk * (1.0 + a * b * q2k)
                + 4.0 * x * x * a * b * q2k;
            assert!((poly_w(k, x, a, b, qv) - literal).abs() < 1e-14);
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let tight = TruncationPolicy {
            max_factors: 10,
            ..TruncationPolicy::default()
        };
        let f = DistributionSpec::q_normal(q(0.9)).unwrap().with_truncation(tight).unwrap();
        assert!(matches!(f.density(0.1), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn family_labels_round_trip() {
        for kind in FamilyKind::ALL {
            assert_eq!(kind.label().parse::<FamilyKind>().unwrap(), kind);
        }
        assert!("fX".parse::<FamilyKind>().is_err());
    }
}
