//! Verification suites behind `qnormal verify`.
//!
//! Every check compares a closed form (or a series) with an independent value, usually
//! the quadrature oracle. Checks run in parallel and are reported in a fixed order.

use rayon::prelude::*;

use super::Suite;
use crate::densities::DistributionSpec;
use crate::error::Result;
use crate::moments::{
    coefficient_limit_check, conditional_limit_check, double_factorial, gaussian_limit_check, mgf,
    mgf_from_moments, moment, moment_fn, LimitReport,
};
use crate::orthopoly::{rescaled_qhermite, PolynomialFamily};
use crate::qseries::{s_polynomial, QParameter};
use crate::quadrature::{mgf_oracle, moment_oracle, orthogonality_oracle, transfer_oracle};

/// `q` values of the verification grid.
pub const GRID_Q: [f64; 6] = [-0.9, -0.5, 0.0, 0.3, 0.7, 0.95];
/// `(a, b)` values of the verification grid.
pub const GRID_AB: [(f64, f64); 3] = [(0.0, 0.0), (0.5, 0.2), (-0.6, 0.6)];
/// `(y, rho)` values of the verification grid.
pub const GRID_Y_RHO: [(f64, f64); 3] = [(0.0, 0.5), (1.0, 0.3), (-0.8, -0.7)];

pub const NORMALIZATION_TOL: f64 = 1e-9;
pub const ORTHOGONALITY_TOL: f64 = 1e-7;
pub const TRANSFER_TOL: f64 = 1e-8;
pub const MOMENT_REL_TOL: f64 = 1e-8;
pub const MGF_REL_TOL: f64 = 1e-7;
pub const MGF_TAYLOR_TOL: f64 = 1e-9;
pub const GAUSSIAN_MOMENT_REL_TOL: f64 = 0.02;

const MGF_T: [f64; 5] = [-2.0, -0.5, 0.5, 1.0, 2.0];
const TAYLOR_T: [f64; 3] = [-1.0, 0.5, 1.0];
const LIMIT_Q: [f64; 3] = [0.9, 0.99, 0.999];

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn absolute(suite: &'static str, name: String, value: f64, reference: f64, tolerance: f64) -> Self {
        let error = (value - reference).abs();
        Check {
            suite,
            name,
            value,
            reference,
            error,
            tolerance,
            passed: error <= tolerance,
        }
    }

    /// Error measured relative to `scale`.
    fn relative(suite: &'static str, name: String, value: f64, reference: f64, scale: f64, tolerance: f64) -> Self {
        let error = (value - reference).abs() / scale.abs().max(f64::MIN_POSITIVE);
        Check {
            suite,
            name,
            value,
            reference,
            error,
            tolerance,
            passed: error <= tolerance,
        }
    }

    fn require(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }
}

/// Every family over the verification grid: 6 `fh`, 6 `fN`, 18 `fQ`, 18 `fCN`.
pub fn parameter_grid() -> Vec<DistributionSpec> {
    let mut specs = Vec::new();
    for &qv in &GRID_Q {
        let q = QParameter::new(qv).expect("grid q is valid");
        specs.push(DistributionSpec::q_hermite(q).expect("valid"));
        specs.push(DistributionSpec::q_normal(q).expect("valid"));
        for &(a, b) in &GRID_AB {
            specs.push(DistributionSpec::al_salam_chihara(a, b, q).expect("valid"));
        }
        for &(y, rho) in &GRID_Y_RHO {
            // the grid values of y lie in J(q) for every grid q
            specs.push(DistributionSpec::conditional_q_normal(y, rho, q).expect("valid"));
        }
    }
    specs
}

type Job = Box<dyn Fn() -> Result<Vec<Check>> + Send + Sync>;

fn normalization_jobs(scale: f64) -> Vec<Job> {
    parameter_grid()
        .into_iter()
        .map(|spec| -> Job {
            Box::new(move || {
                let r = moment_oracle(&spec, 0)?;
                let c = Check::absolute("normalization", format!("{spec}"), r.value, 1.0, NORMALIZATION_TOL * scale);
                Ok(vec![c.require(r.converged)])
            })
        })
        .collect()
}

fn orthogonality_specs() -> Vec<DistributionSpec> {
    let mut specs = Vec::new();
    for &qv in &[-0.5, 0.7] {
        let q = QParameter::new(qv).expect("valid");
        specs.push(DistributionSpec::q_hermite(q).expect("valid"));
        specs.push(DistributionSpec::q_normal(q).expect("valid"));
        specs.push(DistributionSpec::al_salam_chihara(0.5, 0.2, q).expect("valid"));
        specs.push(DistributionSpec::conditional_q_normal(1.0, 0.3, q).expect("valid"));
    }
    specs
}

fn orthogonality_jobs(scale: f64) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    for spec in orthogonality_specs() {
        for n in 0..=6usize {
            for m in 0..=n {
                jobs.push(Box::new(move || {
                    let family = spec.orthogonal_family();
                    let r = orthogonality_oracle(&spec, &family, m, n)?;
                    let name = format!("{spec} {}{m}*{}{n}", family.label(), family.label());
                    let tol = ORTHOGONALITY_TOL * scale;
                    let c = if m == n {
                        let norm = spec.orthogonality_norm(n);
                        Check::relative("orthogonality", name, r.value, norm, norm, tol)
                    } else {
                        Check::absolute("orthogonality", name, r.value, 0.0, tol)
                    };
                    Ok(vec![c.require(r.converged)])
                }));
            }
        }
    }
    jobs
}

fn transfer_jobs(scale: f64) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    for &(a, b, qv) in &[(0.5, 0.2, 0.3), (-0.6, 0.6, -0.5), (0.3, -0.4, 0.9)] {
        let q = QParameter::new(qv).expect("valid");
        let spec = DistributionSpec::al_salam_chihara(a, b, q).expect("valid");
        jobs.push(Box::new(move || {
            let h = PolynomialFamily::continuous_qhermite(q)?;
            (0..=8usize)
                .map(|n| {
                    let r = transfer_oracle(&spec, &h, n)?;
                    let target = s_polynomial(n as u32, a, b, q);
                    let name = format!("{spec} int h{n} = S{n}");
                    Ok(Check::absolute("transfer", name, r.value, target, TRANSFER_TOL * scale).require(r.converged))
                })
                .collect()
        }));
    }
    for &(y, rho, qv) in &[(0.0, 0.5, 0.3), (1.0, 0.3, 0.7), (-0.8, -0.7, -0.5)] {
        let q = QParameter::new(qv).expect("valid");
        let spec = DistributionSpec::conditional_q_normal(y, rho, q).expect("valid");
        jobs.push(Box::new(move || {
            let hq = PolynomialFamily::rescaled_qhermite(q);
            (0..=8usize)
                .map(|n| {
                    let r = transfer_oracle(&spec, &hq, n)?;
                    let target = rho.powi(n as i32) * rescaled_qhermite(n, y, q);
                    let name = format!("{spec} int H{n} = rho^{n} H{n}(y)");
                    Ok(Check::absolute("transfer", name, r.value, target, TRANSFER_TOL * scale).require(r.converged))
                })
                .collect()
        }));
    }
    jobs
}

fn moment_jobs(scale: f64) -> Vec<Job> {
    parameter_grid()
        .into_iter()
        .map(|spec| -> Job {
            Box::new(move || {
                (0..=10u32)
                    .map(|n| {
                        let closed = moment(&spec, n)?;
                        let r = moment_oracle(&spec, n)?;
                        let name = format!("{spec} mu{n}");
                        Ok(Check::relative("moments", name, closed, r.value, r.abs_value, MOMENT_REL_TOL * scale)
                            .require(r.converged))
                    })
                    .collect()
            })
        })
        .collect()
}

fn mgf_jobs(scale: f64) -> Vec<Job> {
    parameter_grid()
        .into_iter()
        .map(|spec| -> Job {
            Box::new(move || {
                let mut checks = Vec::new();
                for &t in &MGF_T {
                    let series = mgf(&spec, t)?;
                    let r = mgf_oracle(&spec, t)?;
                    let name = format!("{spec} M({t})");
                    checks.push(
                        Check::relative("mgf", name, series.value, r.value, r.value, MGF_REL_TOL * scale)
                            .require(r.converged),
                    );
                }
                for &t in &TAYLOR_T {
                    let series = mgf(&spec, t)?;
                    let taylor = mgf_from_moments(&spec, t, 30)?;
                    let name = format!("{spec} M({t}) vs moment sum");
                    checks.push(Check::absolute("mgf", name, series.value, taylor, MGF_TAYLOR_TOL * scale));
                }
                Ok(checks)
            })
        })
        .collect()
}

fn trend_checks(label: String, report: &LimitReport) -> Vec<Check> {
    report
        .points
        .windows(2)
        .map(|w| Check {
            suite: "limits",
            name: format!("{label} q={} improves on q={}", w[1].q, w[0].q),
            value: w[1].value,
            reference: report.target,
            error: w[1].error,
            tolerance: w[0].error,
            passed: w[1].error < w[0].error || (w[1].error == 0.0 && w[0].error == 0.0),
        })
        .collect()
}

fn limit_jobs(scale: f64) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    for &t in &[0.5, 1.0] {
        jobs.push(Box::new(move || {
            Ok(trend_checks(format!("M_fN({t}) -> exp(t^2/2)"), &gaussian_limit_check(t, &LIMIT_Q)?))
        }));
        jobs.push(Box::new(move || {
            let (y, rho) = (0.3, 0.4);
            let label = format!("M_fCN({t}|y={y},rho={rho}) -> exp(t rho y + (1-rho^2) t^2/2)");
            Ok(trend_checks(label, &conditional_limit_check(t, y, rho, &LIMIT_Q)?))
        }));
    }
    jobs.push(Box::new(|| {
        let mut checks = Vec::new();
        for n in 2..=8usize {
            for m in 1..=n / 2 {
                checks.extend(trend_checks(
                    format!("c_{{{m},{n}}}/(1-q)^{m} -> n!/(2^m m!(n-2m)!)"),
                    &coefficient_limit_check(m, n, &LIMIT_Q)?,
                ));
            }
        }
        Ok(checks)
    }));
    jobs.push(Box::new(move || {
        let q1 = QParameter::new(1.0)?;
        let near = QParameter::new(0.999)?;
        let mut checks = Vec::new();
        for j in 1..=4u32 {
            let target = double_factorial(2 * j - 1)?;
            checks.push(Check::absolute("limits", format!("mu{} at q=1", 2 * j), moment_fn(2 * j, q1), target, 0.0));
            checks.push(Check::relative(
                "limits",
                format!("mu{} at q=0.999", 2 * j),
                moment_fn(2 * j, near),
                target,
                target,
                GAUSSIAN_MOMENT_REL_TOL * scale,
            ));
        }
        Ok(checks)
    }));
    jobs
}

fn jobs(suite: Suite, scale: f64) -> Vec<Job> {
    match suite {
        Suite::Normalization => normalization_jobs(scale),
        Suite::Orthogonality => orthogonality_jobs(scale),
        Suite::Transfer => transfer_jobs(scale),
        Suite::Moments => moment_jobs(scale),
        Suite::Mgf => mgf_jobs(scale),
        Suite::Limits => limit_jobs(scale),
        Suite::All => [
            Suite::Normalization,
            Suite::Orthogonality,
            Suite::Transfer,
            Suite::Moments,
            Suite::Mgf,
            Suite::Limits,
        ]
        .into_iter()
        .flat_map(|s| jobs(s, scale))
        .collect(),
    }
}

/// Runs one suite (or all) with every tolerance multiplied by `scale`.
pub fn run_suite(suite: Suite, scale: f64) -> Result<Vec<Check>> {
    let results: Vec<Result<Vec<Check>>> = jobs(suite, scale).par_iter().map(|job| job()).collect();
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }
    Ok(checks)
}
