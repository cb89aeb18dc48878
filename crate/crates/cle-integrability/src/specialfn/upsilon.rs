use num_complex::Complex64;

use super::gamma::{cgamma, crgamma};
use super::LqgParams;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Interval, Tolerance};

/// `expm1` for complex arguments without cancellation near zero.
fn cexpm1(w: Complex64) -> Complex64 {
    let em1 = w.re.exp_m1();
    let s = (0.5 * w.im).sin();
    Complex64::new(em1 * w.im.cos() - 2.0 * s * s, (em1 + 1.0) * w.im.sin())
}

/// Integrand of the log-Upsilon representation as a function of `a = Q/2 - z`.
fn log_upsilon_integrand(t: f64, a: Complex64, a2: Complex64, c2: Complex64, p: &LqgParams) -> Complex64 {
    if t < 1e-4 {
        return a2 * (-1.0 + t * (0.5 - c2) - t * t / 6.0);
    }
    let g = p.gamma;
    let one_minus = -cexpm1(-a * t);
    let den = (-(-g * t / 2.0).exp_m1()) * (-(-2.0 * t / g).exp_m1());
    let s = ((a - p.q_charge / 2.0) * t).exp() * one_minus * one_minus / den;
    (a2 * (-t).exp() - s) / t
}

/// log Upsilon by quadrature, for `gamma/4 <= Re z <= Q - gamma/4`.
fn log_upsilon_core(z: Complex64, p: &LqgParams, tol: f64) -> Result<Complex64> {
    let mut a = Complex64::new(p.q_charge / 2.0, 0.0) - z;
    if a.re < 0.0 || (a.re == 0.0 && a.im < 0.0) {
        a = -a;
    }
    let a2 = a * a;
    let c2 = a2 / 12.0 - (p.kappa / 16.0 + 1.0 / p.kappa) / 6.0;
    let decay = (p.q_charge / 2.0 - a.re).min(1.0);
    let cutoff = (45.0 + 2.0 * a2.norm().max(1.0).ln()) / decay;
    let r = integrate(
        |t| log_upsilon_integrand(t, a, a2, c2, p),
        Interval::Finite(0.0, cutoff),
        &Tolerance::absolute(0.5 * tol),
    );
    if !r.converged {
        return Err(Error::NonConvergence { value: r.value.re, err_est: r.err_est, evaluations: r.evaluations });
    }
    Ok(r.value)
}

fn pow_half_gamma(p: &LqgParams, s: Complex64) -> Complex64 {
    (s * (p.gamma / 2.0).ln()).exp()
}

/// `Upsilon_{gamma/2}(z)` with relative accuracy `tol` away from its zeros.
///
/// The integral representation is used on `gamma/4 <= Re z <= Q - gamma/4`;
/// other arguments are reduced there with `Upsilon(z) = Upsilon(Q - z)` and
/// the shift relations, taking a `2/gamma` step only when one `gamma/2` step
/// would not reach the quadrature band.
pub fn upsilon(z: Complex64, p: &LqgParams, tol: f64) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::DomainError(format!("tol must be positive, got {tol}")));
    }
    let g = p.gamma;
    let mut w = if z.re > p.q_charge / 2.0 { p.q_charge - z } else { z };
    let mut factor = Complex64::new(1.0, 0.0);
    let mut steps = 0usize;
    while w.re < g / 4.0 {
        if w.re >= -g / 4.0 {
            let u = w * (g / 2.0);
            factor *= cgamma(1.0 - u) * crgamma(u) * pow_half_gamma(p, w * g - 1.0);
            w += g / 2.0;
        } else {
            let u = w * (2.0 / g);
            factor *= cgamma(1.0 - u) * crgamma(u) * pow_half_gamma(p, 1.0 - w * (4.0 / g));
            w += 2.0 / g;
        }
        steps += 1;
        if steps > 10_000 {
            return Err(Error::DomainError(format!("argument {z} too far from the strip")));
        }
    }
    if factor == Complex64::new(0.0, 0.0) {
        return Ok(factor);
    }
    Ok(factor * log_upsilon_core(w, p, tol)?.exp())
}

/// `Upsilon'(0)`, which equals `Upsilon(gamma/2)` by the `gamma/2` shift relation.
pub fn upsilon_prime_zero(p: &LqgParams, tol: f64) -> Result<Complex64> {
    upsilon(Complex64::new(p.gamma / 2.0, 0.0), p, tol)
}

/// Distance from `z` to the zero set `{-m gamma/2 - 2n/gamma} U {Q + m gamma/2 + 2n/gamma}`.
pub fn upsilon_zero_distance(z: Complex64, p: &LqgParams) -> f64 {
    let g = p.gamma;
    let lattice = |x: Complex64| -> f64 {
        // distance from x to {-(m g/2 + 2n/g): m, n >= 0}
        let mut best = f64::INFINITY;
        let depth = (-x.re).max(0.0);
        let nmax = (depth / (2.0 / g)).ceil() as i64 + 1;
        for n in 0..=nmax {
            let base = n as f64 * 2.0 / g;
            let m0 = ((depth - base) / (g / 2.0)).round().max(0.0) as i64;
            for m in [m0 - 1, m0, m0 + 1] {
                if m < 0 {
                    continue;
                }
                let pt = -(m as f64 * g / 2.0 + base);
                best = best.min((x - pt).norm());
            }
        }
        best
    };
    lattice(z).min(lattice(Complex64::new(p.q_charge, 0.0) - z))
}
