use std::f64::consts::PI;

use num_complex::Complex64;

use super::bessel::bessel_k;
use super::dozz::dozz;
use super::gamma::{gamma, ln_gamma, pole_distance, sinpi};
use super::{LqgParams, POLE_TOL};
use crate::error::{domain, Error, Result};

fn check_alpha_range(alpha: f64, p: &LqgParams) -> Result<()> {
    if alpha > p.gamma / 2.0 && alpha < p.q_charge {
        Ok(())
    } else {
        Err(domain(format!("alpha must lie in (gamma/2, Q) = ({}, {}), got {alpha}", p.gamma / 2.0, p.q_charge)))
    }
}

fn check_kappa_open(p: &LqgParams) -> Result<()> {
    if p.kappa > 8.0 / 3.0 && p.kappa < 4.0 {
        Ok(())
    } else {
        Err(domain(format!("kappa must lie in (8/3, 4), got {}", p.kappa)))
    }
}

/// `2(Q - alpha)/gamma`.
fn nu_of(alpha: f64, p: &LqgParams) -> f64 {
    2.0 * (p.q_charge - alpha) / p.gamma
}

/// Boundary-length prefactor `U(alpha)` of the one-point disk.
pub fn u_bar(alpha: f64, p: &LqgParams) -> Result<f64> {
    let g = p.gamma;
    let arg = g * alpha / 2.0 - p.kappa / 4.0;
    if pole_distance(Complex64::new(arg, 0.0)) < POLE_TOL {
        return Err(Error::PoleHit { factor: "Gamma(gamma alpha/2 - gamma^2/4)".into(), re: arg, im: 0.0 });
    }
    if alpha <= g / 2.0 {
        return Err(domain(format!("u_bar needs alpha > gamma/2, got {alpha}")));
    }
    let base = 2f64.powf(-g * alpha / 2.0) * 2.0 * PI / gamma(1.0 - p.kappa / 4.0);
    Ok(base.powf(nu_of(alpha, p)) * gamma(arg))
}

/// Total mass `(2/gamma) 2^{-alpha^2/2} U(alpha) ell^{2(alpha-Q)/gamma - 1}` of the length law.
pub fn fzz_total_mass(alpha: f64, ell: f64, p: &LqgParams) -> Result<f64> {
    check_alpha_range(alpha, p)?;
    if !(ell > 0.0) {
        return Err(domain("ell must be positive"));
    }
    Ok(2.0 / p.gamma * 2f64.powf(-alpha * alpha / 2.0) * u_bar(alpha, p)? * ell.powf(-nu_of(alpha, p) - 1.0))
}

/// Area Laplace transform `M_1^disk(alpha; ell)[exp(-mu A)]`.
pub fn fzz_disk_laplace(alpha: f64, ell: f64, mu: f64, p: &LqgParams, tol: f64) -> Result<f64> {
    check_alpha_range(alpha, p)?;
    if !(ell > 0.0 && mu > 0.0) {
        return Err(domain("ell and mu must be positive"));
    }
    let nu = nu_of(alpha, p);
    let c = (mu / p.sin_term()).sqrt();
    let k = bessel_k(nu, ell * c, tol)?;
    Ok(2.0 / p.gamma * 2f64.powf(-alpha * alpha / 2.0) * u_bar(alpha, p)? / ell * 2.0 / gamma(nu)
        * (0.5 * c).powf(nu)
        * k)
}

/// Inverse-gamma density of the disk area, shape `2(Q-alpha)/gamma`, rate `1/(4 sin(pi gamma^2/4))`.
pub fn disk_area_density(alpha: f64, x: f64, p: &LqgParams) -> Result<f64> {
    check_alpha_range(alpha, p)?;
    if !(x > 0.0) {
        return Err(domain("x must be positive"));
    }
    let nu = nu_of(alpha, p);
    let four_s = 4.0 * p.sin_term();
    let log_d = -nu * four_s.ln() - ln_gamma(nu) - (nu + 1.0) * x.ln() - 1.0 / (x * four_s);
    Ok(log_d.exp())
}

/// `cos(pi(4/gamma^2 - 1)) / (pi sqrt(ab) (a+b))`.
pub fn qa_total_mass(a: f64, b: f64, p: &LqgParams) -> Result<f64> {
    check_kappa_open(p)?;
    if !(a > 0.0 && b > 0.0) {
        return Err(domain("a and b must be positive"));
    }
    Ok((PI * (4.0 / p.kappa - 1.0)).cos() / (PI * (a * b).sqrt() * (a + b)))
}

/// Annulus area Laplace transform `qa_total_mass * exp(-(a+b) sqrt(mu / sin(pi gamma^2/4)))`.
pub fn qa_laplace(a: f64, b: f64, mu: f64, p: &LqgParams) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(domain("mu must be non-negative"));
    }
    Ok(qa_total_mass(a, b, p)? * (-(a + b) * (mu / p.sin_term()).sqrt()).exp())
}

/// Constant `C` in the pair-of-pants area law.
pub fn qp_constant(p: &LqgParams, tol: f64) -> Result<f64> {
    check_kappa_open(p)?;
    let g = p.gamma;
    let g4 = 4.0 / p.kappa;
    let gc = Complex64::new(g, 0.0);
    let d = dozz([gc, gc, gc], p, tol)?.value.re;
    let inner = 2f64.powf(p.kappa / 2.0 + g4 - 2.0)
        * gamma(g4 - 1.0)
        * (PI * (g4 - 1.0)).cos()
        * p.sin_term().powf(2.0 / p.kappa - 0.75)
        / u_bar(g, p)?;
    Ok(g * (p.q_charge - g).powi(4) / (2.0 * PI).sqrt() * d * inner.powi(3))
}

/// Pair-of-pants area Laplace transform.
pub fn qp_laplace(ells: [f64; 3], mu: f64, p: &LqgParams, tol: f64) -> Result<f64> {
    if ells.iter().any(|&l| !(l > 0.0)) || !(mu > 0.0) {
        return Err(domain("lengths and mu must be positive"));
    }
    let c = qp_constant(p, tol)?;
    let sum: f64 = ells.iter().sum();
    let prod: f64 = ells.iter().product();
    Ok(c * mu.powf(0.25 - 2.0 / p.kappa) / prod.sqrt() * (-sum * (mu / p.sin_term()).sqrt()).exp())
}

/// Unit-volume reflection coefficient `R(alpha)`.
pub fn reflection_coeff(alpha: f64, p: &LqgParams) -> Result<f64> {
    check_alpha_range(alpha, p)?;
    let g = p.gamma;
    let nu = nu_of(alpha, p);
    let x = g / 2.0 * (p.q_charge - alpha);
    let base = PI * gamma(p.kappa / 4.0) / gamma(1.0 - p.kappa / 4.0);
    Ok(-base.powf(nu) / nu * gamma(-x) / (gamma(x) * gamma(nu)))
}

/// `2^{-alpha^2 + 2 Q alpha} |L^alpha|` divided by `(gamma/2)(Q-alpha)/sin(gamma pi (Q-alpha)/2)`,
/// with `|L^alpha|` assembled from `R` and `U`; constant in `alpha` when the
/// reflection coefficient and the length law are mutually consistent.
pub fn reflection_consistency_ratio(alpha: f64, p: &LqgParams) -> Result<f64> {
    check_alpha_range(alpha, p)?;
    let q = p.q_charge;
    let nu = nu_of(alpha, p);
    let u = 2f64.powf(-alpha * alpha / 2.0) * u_bar(alpha, p)?;
    let l_alpha =
        u * u * (4.0 * p.sin_term()).powf(-nu) / ((q - alpha) * gamma(nu) * reflection_coeff(alpha, p)?);
    let target = p.gamma / 2.0 * (q - alpha) / sinpi(p.gamma * (q - alpha) / 2.0);
    Ok(2f64.powf(-alpha * alpha + 2.0 * q * alpha) * l_alpha / target)
}

/// `3 kappa/32 + 2/kappa - 1`.
pub fn ssw_threshold(kappa: f64) -> f64 {
    3.0 * kappa / 32.0 + 2.0 / kappa - 1.0
}

/// `E[CR^lambda]` of the outermost loop around the origin in the unit disk.
pub fn ssw_cr_moment(lambda: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 8.0 / 3.0 && kappa < 8.0) {
        return Err(domain(format!("kappa must lie in (8/3, 8), got {kappa}")));
    }
    if lambda <= ssw_threshold(kappa) {
        return Ok(f64::INFINITY);
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let u0 = 1.0 - 4.0 / kappa;
    let r = u0 * u0 - 8.0 * lambda / kappa;
    let den = if r >= 0.0 { (PI * r.sqrt()).cos() } else { (PI * (-r).sqrt()).cosh() };
    Ok(-(4.0 * PI / kappa).cos() / den)
}

/// `sin(pi u)/(pi u)` for real `u`, and `sinh(pi v)/(pi v)` for `u = i v`
/// (selected by `r = u^2 < 0`).
fn sinc_of_square(r: f64) -> f64 {
    if r.abs() < 1e-12 {
        return 1.0 - PI * PI * r / 6.0;
    }
    if r > 0.0 {
        let u = r.sqrt();
        sinpi(u) / (PI * u)
    } else {
        let v = (-r).sqrt();
        (PI * v).sinh() / (PI * v)
    }
}

/// Moment generating function of the electrical thickness of the SLE loop shape.
pub fn electrical_thickness_mgf(lambda: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa <= 4.0) {
        return Err(domain(format!("kappa must lie in (0, 4], got {kappa}")));
    }
    if lambda >= 1.0 - kappa / 8.0 {
        return Ok(f64::INFINITY);
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let u0 = 1.0 - kappa / 4.0;
    let first = sinc_of_square(u0 * u0);
    let r = u0 * u0 + lambda * kappa / 2.0;
    let second = if r > 0.25 {
        // sin(pi u) = sin(pi (1 - u)) with 1 - u computed without cancellation
        let u = r.sqrt();
        let one_minus = kappa / 2.0 * (1.0 - kappa / 8.0 - lambda) / (1.0 + u);
        (PI * one_minus).sin() / (PI * u)
    } else {
        sinc_of_square(r)
    };
    Ok(first / second)
}

/// The conjectured thickness formula, i.e. the right side of the thickness
/// law with `kappa` replaced by `16/kappa`.
pub fn kenyon_wilson_conjecture(lambda: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(domain("kappa must be positive"));
    }
    if lambda >= 1.0 - 2.0 / kappa {
        return Ok(f64::INFINITY);
    }
    let u0 = 1.0 - 4.0 / kappa;
    let r = u0 * u0 + 8.0 * lambda / kappa;
    Ok(sinc_of_square(u0 * u0) / sinc_of_square(r))
}

/// Brownian loop-soup intensity `(3 kappa - 8)(6 - kappa)/(2 kappa)`.
pub fn loop_soup_intensity(kappa: f64) -> Result<f64> {
    if !(kappa >= 8.0 / 3.0 && kappa <= 4.0) {
        return Err(domain(format!("kappa must lie in [8/3, 4], got {kappa}")));
    }
    Ok((3.0 * kappa - 8.0) * (6.0 - kappa) / (2.0 * kappa))
}
