//! Adaptive Gauss-Kronrod integration and numerical checks of the Bessel
//! integral identities used by the area laws.

mod engine;

pub use engine::{
    integrate, integrate_panels, Interval, QuadResult, QuadValue, Tolerance, DEFAULT_MAX_EVALS,
};

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::specialfn::gamma::rgamma;
use crate::specialfn::{bessel_k_scaled, LqgParams};

/// Integrates `f` until `err_est <= tol * max(|value|, 1)`.
pub fn adapt_integrate<F: FnMut(f64) -> f64>(f: F, interval: Interval, tol: f64) -> Result<QuadResult<f64>> {
    if !(tol > 0.0) {
        return Err(domain(format!("tol must be positive, got {tol}")));
    }
    let r = integrate(f, interval, &Tolerance::mixed(tol));
    if r.converged {
        Ok(r)
    } else {
        Err(Error::NonConvergence { value: r.value, err_est: r.err_est, evaluations: r.evaluations })
    }
}

fn checked(r: QuadResult<f64>) -> Result<f64> {
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::NonConvergence { value: r.value, err_est: r.err_est, evaluations: r.evaluations })
    }
}

fn inner_tol(tol: f64, factor: f64) -> f64 {
    (tol * factor).max(1e-13)
}

/// `exp(-x) K_nu(x)`; unwraps because `x > 0` is guaranteed by the callers.
fn ks(nu: f64, x: f64, tol: f64) -> f64 {
    if x == 0.0 {
        return f64::INFINITY;
    }
    bessel_k_scaled(nu, x, tol).unwrap_or(f64::NAN)
}

fn check_nu_half(nu: f64) -> Result<()> {
    if nu.abs() < 0.5 {
        Ok(())
    } else {
        Err(domain(format!("nu must lie in (-1/2, 1/2), got {nu}")))
    }
}

/// `int_0^{x0} x^{-1/2} exp(-c x) K_nu(c x) dx` from the power series of
/// `exp(-z) I_mu(z) = (z/2)^mu / Gamma(mu+1) M(mu + 1/2, 2 mu + 1, -2z)`.
fn identity_one_head(c: f64, nu: f64, x0: f64) -> f64 {
    let z0 = c * x0;
    let h = |mu: f64| -> f64 {
        let mut coef = 1.0;
        let mut sum = 0.0;
        for k in 0..60 {
            let kf = k as f64;
            let term = coef / (mu + kf + 0.5);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() && k > 3 {
                break;
            }
            coef *= (mu + 0.5 + kf) / (2.0 * mu + 1.0 + kf) * (-2.0 * z0) / (kf + 1.0);
        }
        x0.sqrt() * (0.5 * z0).powf(mu) * rgamma(mu + 1.0) * sum
    };
    PI / (2.0 * (PI * nu).sin()) * (h(-nu) - h(nu))
}

/// Relative residual of `int_0^inf x^{-1/2} e^{-cx} K_nu(cx) dx = pi^{3/2} / (sqrt(2c) cos(pi nu))`.
pub fn verify_bessel_identity_one(c: f64, nu: f64, tol: f64) -> Result<f64> {
    check_nu_half(nu)?;
    if !(c > 0.0) {
        return Err(domain(format!("c must be positive, got {c}")));
    }
    let nu = nu.abs();
    let kt = inner_tol(tol, 1e-2);
    let rhs = PI.powf(1.5) / ((2.0 * c).sqrt() * (PI * nu).cos());
    let lhs = if nu >= 0.25 {
        // the x^{-1/2-nu} singularity is handled by the series on [0, x0]
        let x0 = 0.5 / c;
        let tail = adapt_integrate(
            |x| ks(nu, c * x, kt) * (-2.0 * c * x).exp() / x.sqrt(),
            Interval::UpperInfinite(x0),
            tol * 0.1,
        )?;
        identity_one_head(c, nu, x0) + tail.value
    } else {
        // x = u^4
        let r = integrate(
            |u: f64| {
                let x = u.powi(4);
                4.0 * u * ks(nu, c * x, kt) * (-2.0 * c * x).exp()
            },
            Interval::UpperInfinite(0.0),
            &Tolerance::relative(tol * 0.1),
        );
        checked(r)?
    };
    Ok(((lhs - rhs) / rhs).abs())
}

/// `int_0^inf exp(-(b+1)x) K_nu(bx) dx`, by quadrature over `x = v^2`.
fn identity_two_inner(b: f64, nu: f64, tol: f64) -> f64 {
    let kt = inner_tol(tol, 1e-2);
    let r = integrate(
        |v: f64| {
            let x = v * v;
            2.0 * v * ks(nu, b * x, kt) * (-(2.0 * b + 1.0) * x).exp()
        },
        Interval::UpperInfinite(0.0),
        &Tolerance::relative(inner_tol(tol, 0.1)),
    );
    if r.converged {
        r.value
    } else {
        f64::NAN
    }
}

/// Relative residual of the double integral
/// `int int b^{-1/2} (b+1)^{-1} e^{-(b+1)x} K_nu(bx) db dx = pi^2 / (2 cos(pi nu) cos(pi nu / 2))`,
/// evaluated as an outer `b` integral over inner `x` integrals.
pub fn verify_bessel_identity_two(nu: f64, tol: f64) -> Result<f64> {
    check_nu_half(nu)?;
    if !(tol > 0.0) {
        return Err(domain("tol must be positive"));
    }
    let nu = nu.abs();
    // b = u^m turns the b^{-1/2-nu} endpoint behaviour into a linear one
    let m = 2.0 / (0.5 - nu);
    let r = integrate(
        |u: f64| {
            let b = u.powf(m);
            if b == 0.0 {
                return 0.0;
            }
            let jac = m * b / u;
            jac / (b.sqrt() * (b + 1.0)) * identity_two_inner(b, nu, tol)
        },
        Interval::UpperInfinite(0.0),
        &Tolerance::relative(tol * 0.5),
    );
    let lhs = checked(r)?;
    if !lhs.is_finite() {
        return Err(Error::NonConvergence { value: lhs, err_est: f64::INFINITY, evaluations: 0 });
    }
    let rhs = PI * PI / (2.0 * (PI * nu).cos() * (0.5 * PI * nu).cos());
    Ok(((lhs - rhs) / rhs).abs())
}

/// Residual of the annulus welding identity with the right-hand side's `s`
/// multiplied by `rhs_scale` (1 for the true identity).
pub fn qa_welding_residual(a: f64, mu: f64, p: &LqgParams, tol: f64, rhs_scale: f64) -> Result<f64> {
    if !(a > 0.0 && mu > 0.0) {
        return Err(domain("a and mu must be positive"));
    }
    if !(p.kappa > 8.0 / 3.0 && p.kappa < 4.0) {
        return Err(domain(format!("kappa must lie in (8/3, 4), got {}", p.kappa)));
    }
    let nu = 2.0 * (p.q_charge - p.gamma) / p.gamma;
    let s = (mu / p.sin_term()).sqrt();
    let kt = inner_tol(tol, 1e-2);
    let lhs = ks(nu, a * s, kt) * (-a * s).exp() / a;
    let s2 = s * rhs_scale;
    let m = 2.0 / (0.5 - nu);
    let c = (PI * nu).cos() / PI;
    let r = integrate(
        |u: f64| {
            let b = u.powf(m);
            if b == 0.0 {
                return 0.0;
            }
            let jac = m * b / u;
            jac * c * (-(a + 2.0 * b) * s2).exp() / ((a * b).sqrt() * (a + b)) * ks(nu, b * s2, kt)
        },
        Interval::UpperInfinite(0.0),
        &Tolerance::relative(tol * 0.1),
    );
    let rhs = checked(r)?;
    Ok(((lhs - rhs) / lhs).abs())
}

/// Relative residual of `a^{-1} K_nu(a s) = int_0^inf b QA(a,b)[e^{-mu A}] b^{-1} K_nu(b s) db`
/// with `nu = 2(Q - gamma)/gamma` and `s = sqrt(mu / sin(pi gamma^2/4))`.
pub fn verify_qa_welding_identity(a: f64, mu: f64, p: &LqgParams, tol: f64) -> Result<f64> {
    qa_welding_residual(a, mu, p, tol, 1.0)
}

/// Relative residual of `int_0^inf K_nu(x) dx = pi / (2 cos(pi nu / 2))`.
pub fn verify_k_integral(nu: f64, tol: f64) -> Result<f64> {
    if !(nu.abs() < 1.0) {
        return Err(domain(format!("nu must lie in (-1, 1), got {nu}")));
    }
    let nu = nu.abs();
    let m = 2.0 / (1.0 - nu);
    let kt = inner_tol(tol, 1e-2);
    let r = integrate(
        |u: f64| {
            let x = u.powf(m);
            if x == 0.0 {
                return 0.0;
            }
            m * x / u * ks(nu, x, kt) * (-x).exp()
        },
        Interval::UpperInfinite(0.0),
        &Tolerance::relative(tol * 0.1),
    );
    let lhs = checked(r)?;
    let rhs = PI / (2.0 * (0.5 * PI * nu).cos());
    Ok(((lhs - rhs) / rhs).abs())
}
