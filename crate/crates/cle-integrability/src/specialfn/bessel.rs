use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, Interval, Tolerance};

/// Truncation point for `int_0^inf exp(-x(cosh t - 1)) cosh(nu t) dt`.
fn cutoff(nu: f64, x: f64) -> f64 {
    let nu = nu.abs();
    let mut t: f64 = 1.0;
    for _ in 0..60 {
        let next = (1.0 + (60.0 + nu * t) / x).acosh();
        if (next - t).abs() < 1e-6 {
            return next;
        }
        t = next;
    }
    t
}

/// `exp(x) K_nu(x)` from the `cosh` integral, relative error `tol`.
pub fn bessel_k_scaled(nu: f64, x: f64, tol: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("bessel_k needs x > 0, got {x}")));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tol must be positive, got {tol}")));
    }
    let upper = cutoff(nu, x);
    let r = integrate(
        |t: f64| {
            let s = (0.5 * t).sinh();
            (-2.0 * x * s * s).exp() * (nu * t).cosh()
        },
        Interval::Finite(0.0, upper),
        &Tolerance::relative(tol),
    );
    if !r.converged {
        return Err(Error::NonConvergence { value: r.value, err_est: r.err_est, evaluations: r.evaluations });
    }
    Ok(r.value)
}

/// Modified Bessel function of the second kind, `int_0^inf exp(-x cosh t) cosh(nu t) dt`.
pub fn bessel_k(nu: f64, x: f64, tol: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, x, tol)? * (-x).exp())
}
