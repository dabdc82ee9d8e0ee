//! Adaptive Gauss–Kronrod quadrature used as an independent oracle.
//!
//! The rule is the 7-point Gauss / 15-point Kronrod pair on every panel; the panel with
//! the largest error estimate `|K15 - G7|` is bisected until the summed estimate drops
//! below `max(abs_tol, rel_tol * int |f|)` or [`MAX_PANELS`] is reached.
//!
//! Density-weighted integrals over a compact support `[c-h, c+h]` go through the
//! substitution `x = c + h sin(theta)`, which turns the square-root endpoint behavior of
//! the densities into a smooth integrand. At `q = 1` the Gaussian is integrated over
//! `mean +- 16 sd`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use crate::densities::{density, DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::orthopoly::PolynomialFamily;

/// Hard cap on the number of panels in one integration.
pub const MAX_PANELS: usize = 4000;

/// Default relative tolerance of the density oracles.
pub const ORACLE_REL_TOL: f64 = 1e-12;

/// Default absolute tolerance of the density oracles.
pub const ORACLE_ABS_TOL: f64 = 1e-14;

const GAUSSIAN_WINDOW: f64 = 16.0;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Outcome of one oracle integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub value: f64,
    pub error_estimate: f64,
    /// `int |f|`, the scale used by the relative tolerance.
    pub abs_value: f64,
    pub panels: usize,
    pub converged: bool,
    /// The tolerance actually enforced, `max(abs_tol, rel_tol * abs_value)`.
    pub tolerance: f64,
}

/// Absolute and relative accuracy goals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    pub fn oracle() -> Self {
        Tolerance {
            abs: ORACLE_ABS_TOL,
            rel: ORACLE_REL_TOL,
        }
    }

    /// Both goals multiplied by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Tolerance {
            abs: self.abs * factor,
            rel: self.rel * factor,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs >= 0.0 && self.rel >= 0.0 && (self.abs > 0.0 || self.rel > 0.0)) {
            return Err(Error::invalid("tol", self.abs.max(self.rel), "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lower: f64,
    upper: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> Result<f64>>(f: &mut F, lower: f64, upper: f64) -> Result<Panel> {
    let center = 0.5 * (lower + upper);
    let half = 0.5 * (upper - lower);
    let fc = f(center)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        k += WGK[i] * (f1 + f2);
        abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    let value = k * half;
    let error = ((k - g) * half).abs();
    if !value.is_finite() {
        return Err(Error::NonConvergence {
            what: "quadrature",
            limit: 0,
            detail: format!("non-finite integrand on [{lower}, {upper}]"),
        });
    }
    Ok(Panel {
        lower,
        upper,
        value,
        error,
        abs_value: abs * half.abs(),
    })
}

/// Integrates a fallible integrand; the first integrand error aborts the integration.
pub fn try_integrate<F>(mut f: F, lower: f64, upper: f64, tol: Tolerance) -> Result<OracleReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    tol.validate()?;
    if !(lower.is_finite() && upper.is_finite()) {
        return Err(Error::invalid("lower", lower, "integration bounds must be finite"));
    }
    if !(lower < upper) {
        return Err(Error::invalid("upper", upper, "must exceed the lower bound"));
    }

    const INITIAL: usize = 4;
    let width = (upper - lower) / INITIAL as f64;
    let mut heap = BinaryHeap::with_capacity(MAX_PANELS + 1);
    for i in 0..INITIAL {
        let a = lower + width * i as f64;
        let b = if i + 1 == INITIAL { upper } else { a + width };
        heap.push(kronrod(&mut f, a, b)?);
    }

    let totals = |heap: &BinaryHeap<Panel>| {
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|x, y| x.lower.total_cmp(&y.lower));
        panels.iter().fold((0.0, 0.0, 0.0), |(v, e, a), p| (v + p.value, e + p.error, a + p.abs_value))
    };

    let mut error: f64 = heap.iter().map(|p| p.error).sum();
    let mut abs_value: f64 = heap.iter().map(|p| p.abs_value).sum();
    loop {
        let goal = tol.abs.max(tol.rel * abs_value);
        if error <= goal {
            // the running sums drift; confirm with a fresh total
            let (v, e, a) = totals(&heap);
            let goal = tol.abs.max(tol.rel * a);
            if e <= goal {
                return Ok(OracleReport {
                    value: v,
                    error_estimate: e,
                    abs_value: a,
                    panels: heap.len(),
                    converged: true,
                    tolerance: goal,
                });
            }
            error = e;
            abs_value = a;
        }
        if heap.len() >= MAX_PANELS {
            let (v, e, a) = totals(&heap);
            return Ok(OracleReport {
                value: v,
                error_estimate: e,
                abs_value: a,
                panels: heap.len(),
                converged: false,
                tolerance: tol.abs.max(tol.rel * a),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lower + worst.upper);
        if !(worst.lower < mid && mid < worst.upper) {
            // panel cannot be split any further
            heap.push(worst);
            let (v, e, a) = totals(&heap);
            return Ok(OracleReport {
                value: v,
                error_estimate: e,
                abs_value: a,
                panels: heap.len(),
                converged: false,
                tolerance: tol.abs.max(tol.rel * a),
            });
        }
        let left = kronrod(&mut f, worst.lower, mid)?;
        let right = kronrod(&mut f, mid, worst.upper)?;
        error += left.error + right.error - worst.error;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
    }
}

/// `int_lower^upper f(x) dx` to absolute tolerance `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, lower: f64, upper: f64, tol: f64) -> Result<OracleReport> {
    try_integrate(|x| Ok(f(x)), lower, upper, Tolerance::absolute(tol))
}

/// `int g(x) f(x) dx` over the support of the density `f` of `spec`.
pub fn density_oracle<G>(spec: &DistributionSpec, mut g: G, tol: Tolerance) -> Result<OracleReport>
where
    G: FnMut(f64) -> f64,
{
    let support = spec.support();
    if support.is_bounded() {
        let c = 0.5 * (support.lower + support.upper);
        let h = 0.5 * (support.upper - support.lower);
        try_integrate(
            |theta: f64| {
                let (s, cos) = theta.sin_cos();
                let x = c + h * s;
                let fx = density(spec, x)?;
                Ok(if fx == 0.0 { 0.0 } else { g(x) * fx * h * cos })
            },
            -FRAC_PI_2,
            FRAC_PI_2,
            tol,
        )
    } else {
        let (mean, sd) = match spec.family() {
            Family::ConditionalQNormal { y, rho } => (rho * y, (1.0 - rho * rho).sqrt()),
            _ => (0.0, 1.0),
        };
        let half = GAUSSIAN_WINDOW * sd;
        try_integrate(
            |x| {
                let fx = density(spec, x)?;
                Ok(if fx == 0.0 { 0.0 } else { g(x) * fx })
            },
            mean - half,
            mean + half,
            tol,
        )
    }
}

/// `int x^n f(x) dx`.
pub fn moment_oracle(spec: &DistributionSpec, n: u32) -> Result<OracleReport> {
    density_oracle(spec, |x| x.powi(n as i32), Tolerance::oracle())
}

/// `int exp(t x) f(x) dx`.
pub fn mgf_oracle(spec: &DistributionSpec, t: f64) -> Result<OracleReport> {
    density_oracle(spec, |x| (t * x).exp(), Tolerance::oracle())
}

fn check_degree(name: &'static str, n: usize) -> Result<()> {
    if n > 12 {
        return Err(Error::IndexOutOfRange {
            name,
            value: n as i64,
            reason: "polynomial degrees up to 12 are supported by the oracle",
        });
    }
    Ok(())
}

/// `int p_m(x) p_n(x) f(x) dx`.
pub fn orthogonality_oracle(
    spec: &DistributionSpec,
    family: &PolynomialFamily,
    m: usize,
    n: usize,
) -> Result<OracleReport> {
    check_degree("m", m)?;
    check_degree("n", n)?;
    let top = m.max(n);
    density_oracle(
        spec,
        |x| {
            let p = family.eval_all(top, x);
            p[m] * p[n]
        },
        Tolerance::oracle(),
    )
}

/// `int p_n(x) f(x) dx`.
pub fn transfer_oracle(spec: &DistributionSpec, family: &PolynomialFamily, n: usize) -> Result<OracleReport> {
    check_degree("n", n)?;
    density_oracle(spec, |x| family.eval(n, x), Tolerance::oracle())
}
