//! Exponential tilting of the absorbed small jumps by the area marks.
//!
//! With independent marks `A` of law `qd_area_law`, a jump `x` contributes
//! `phi(x) = E exp(-mu x^2 A)`.  For the process with jumps below `delta` and
//! drift `-c`, `exp(-r Y_t) prod phi(jumps)` is a martingale when
//! `k(r) = r c + int_0^delta (exp(-r x) phi(x) - 1 + r x) x^{-beta-1} dx = 0`,
//! so a descent of `s` carries the weight `exp(-r s)` and runs under the
//! tilted law with drift `k'(r)` and jump variance `int x^2 exp(-r x) phi(x) nu(dx)`.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, Interval, Tolerance};
use crate::specialfn::gamma::{gamma, rgamma};
use crate::specialfn::{bessel_k, LqgParams};

use super::qd_area_law;

/// Area marks `mu x^2 A` with `A` inverse gamma of the given shape and rate.
#[derive(Debug, Clone, Copy)]
pub struct AreaTilt {
    pub mu: f64,
    pub shape: f64,
    pub rate: f64,
}

/// Tilted small-jump law of one level.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LevelTilt {
    pub drift: f64,
    pub var: f64,
    pub rate: f64,
}

const QUAD_TOL: f64 = 1e-11;

/// `exp(-y) - 1 + y` without cancellation.
fn g(y: f64) -> f64 {
    if y < 0.1 {
        let mut term = y * y / 2.0;
        let mut sum = 0.0;
        for k in 3..14 {
            sum += term;
            term *= -y / k as f64;
        }
        sum
    } else {
        y + (-y).exp_m1()
    }
}

impl AreaTilt {
    pub fn new(mu: f64, p: &LqgParams) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(domain("mu must be positive"));
        }
        if !(p.kappa > 8.0 / 3.0 && p.kappa < 4.0) {
            return Err(domain(format!("kappa must lie in (8/3, 4), got {}", p.kappa)));
        }
        let (shape, rate) = qd_area_law(p);
        Ok(AreaTilt { mu, shape, rate })
    }

    /// `1 - E exp(-mu x^2 A)`.
    pub fn one_minus_phi(&self, x: f64) -> f64 {
        let k = self.shape;
        let w = self.rate * self.mu * x * x;
        if w == 0.0 {
            return 0.0;
        }
        if w < 1.0 {
            // 2 w^{k/2} K_k(2 sqrt w) / Gamma(k) expanded through I_{-k} and I_k
            let mut a = 0.0;
            let mut t = w * rgamma(2.0 - k);
            for m in 1..40 {
                a += t;
                t *= w / ((m + 1) as f64 * (m as f64 + 1.0 - k));
            }
            let mut b = 0.0;
            let mut t = rgamma(1.0 + k);
            for m in 0..40 {
                b += t;
                t *= w / ((m + 1) as f64 * (m as f64 + 1.0 + k));
            }
            -PI / ((PI * k).sin() * gamma(k)) * (a - w.powf(k) * b)
        } else {
            let z = 2.0 * w.sqrt();
            1.0 - 2.0 * w.powf(k / 2.0) * bessel_k(k, z, 1e-13).unwrap_or(0.0) / gamma(k)
        }
    }

    /// `int_0^delta f(x) x^{-beta-1} dx` for `f = O(x^2)` at the origin.
    fn levy_integral<F: Fn(f64) -> f64>(&self, f: F, delta: f64, beta: f64) -> Result<f64> {
        let head_end = delta.min(1.0);
        let m = 1.0 / (2.0 - beta);
        let r = integrate(
            |u: f64| {
                if u == 0.0 {
                    return 0.0;
                }
                let x = head_end * u.powf(m);
                f(x) * m * head_end.powf(-beta) * u.powf(m - 1.0 - m * (beta + 1.0))
            },
            Interval::Finite(0.0, 1.0),
            &Tolerance { abs: 1e-15, rel: QUAD_TOL, max_evals: 1_000_000 },
        );
        if !r.converged {
            return Err(Error::NonConvergence { value: r.value, err_est: r.err_est, evaluations: r.evaluations });
        }
        let mut total = r.value;
        if delta > head_end {
            let interval =
                if delta.is_finite() { Interval::Finite(head_end, delta) } else { Interval::UpperInfinite(head_end) };
            let t = integrate(
                |x: f64| f(x) * x.powf(-beta - 1.0),
                interval,
                &Tolerance { abs: 1e-15, rel: QUAD_TOL, max_evals: 1_000_000 },
            );
            if !t.converged {
                return Err(Error::NonConvergence { value: t.value, err_est: t.err_est, evaluations: t.evaluations });
            }
            total += t.value;
        }
        Ok(total)
    }

    fn kappa(&self, r: f64, c: f64, delta: f64, beta: f64) -> Result<f64> {
        Ok(r * c + self.levy_integral(|x| g(r * x) - (-r * x).exp() * self.one_minus_phi(x), delta, beta)?)
    }

    fn kappa_prime(&self, r: f64, c: f64, delta: f64, beta: f64) -> Result<f64> {
        Ok(c + self.levy_integral(
            |x| x * (-(-r * x).exp_m1() + (-r * x).exp() * self.one_minus_phi(x)),
            delta,
            beta,
        )?)
    }

    /// Root of `k(r) = 0` for drift `c` and cutoff `delta`.
    fn root(&self, c: f64, delta: f64, beta: f64) -> Result<f64> {
        let mut r = 0.0;
        for _ in 0..100 {
            let f = self.kappa(r, c, delta, beta)?;
            let d = self.kappa_prime(r, c, delta, beta)?;
            let next = r - f / d;
            if !next.is_finite() {
                break;
            }
            if (next - r).abs() <= 1e-13 * next.abs().max(1e-300) {
                return Ok(next);
            }
            r = next;
        }
        Err(Error::SolverFailure(format!("tilt root did not converge at delta = {delta}")))
    }

    pub(crate) fn at(&self, delta: f64, beta: f64) -> Result<LevelTilt> {
        let c = delta.powf(1.0 - beta) / (beta - 1.0);
        let r = self.root(c, delta, beta)?;
        let drift = self.kappa_prime(r, c, delta, beta)?;
        let var = self.levy_integral(|x| x * x * (-r * x).exp() * (1.0 - self.one_minus_phi(x)), delta, beta)?;
        Ok(LevelTilt { drift, var, rate: r })
    }
}

/// Tilt exponent of the full process (no cutoff, no drift); the annulus area
/// law predicts `sqrt(mu / sin(pi gamma^2 / 4))`.
pub fn full_tilt_root(mu: f64, p: &LqgParams) -> Result<f64> {
    AreaTilt::new(mu, p)?.root(0.0, f64::INFINITY, p.beta)
}
