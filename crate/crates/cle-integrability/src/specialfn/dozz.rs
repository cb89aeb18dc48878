use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::{cgamma, crgamma, gamma, pole_distance};
use super::upsilon::{upsilon, upsilon_prime_zero, upsilon_zero_distance};
use super::{LqgParams, POLE_TOL};
use crate::error::{domain, Error, Result};

/// DOZZ constant together with the Seiberg-bound flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DozzValue {
    pub value: Complex64,
    /// Set when `sum Re(alpha) <= 2Q` or some `Re(alpha_i) >= Q`.
    pub outside_seiberg: bool,
}

/// Exponents `lambda_i` with their KPZ images `alpha_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreePointQuery {
    pub lambdas: [f64; 3],
    pub alphas: [Complex64; 3],
}

impl ThreePointQuery {
    pub fn new(lambdas: [f64; 3], p: &LqgParams) -> Self {
        let alphas = lambdas.map(|l| kpz_alpha_from_lambda(l, p));
        ThreePointQuery { lambdas, alphas }
    }
}

fn pole_hit(factor: &str, z: Complex64) -> Error {
    Error::PoleHit { factor: factor.to_string(), re: z.re, im: z.im }
}

fn check_gamma_arg(factor: &str, z: Complex64) -> Result<()> {
    if pole_distance(z) < POLE_TOL {
        Err(pole_hit(factor, z))
    } else {
        Ok(())
    }
}

/// `pi (gamma/2)^{2 - gamma^2/2} Gamma(gamma^2/4) / Gamma(1 - gamma^2/4)`.
fn dozz_base(p: &LqgParams) -> f64 {
    let g = p.gamma;
    PI * (g / 2.0).powf(2.0 - p.kappa / 2.0) * gamma(p.kappa / 4.0) / gamma(1.0 - p.kappa / 4.0)
}

/// `pi Gamma(gamma^2/4) / Gamma(1 - gamma^2/4)`.
fn mu_base(p: &LqgParams) -> f64 {
    PI * gamma(p.kappa / 4.0) / gamma(1.0 - p.kappa / 4.0)
}

/// The DOZZ three-point constant with cosmological constant 1.
pub fn dozz(alphas: [Complex64; 3], p: &LqgParams, tol: f64) -> Result<DozzValue> {
    let q = p.q_charge;
    let abar: Complex64 = alphas.iter().sum();
    let outside_seiberg = abar.re <= 2.0 * q || alphas.iter().any(|a| a.re >= q);
    let den_args = [
        ("Upsilon(abar/2 - Q)", abar / 2.0 - q),
        ("Upsilon(abar/2 - alpha_1)", abar / 2.0 - alphas[0]),
        ("Upsilon(abar/2 - alpha_2)", abar / 2.0 - alphas[1]),
        ("Upsilon(abar/2 - alpha_3)", abar / 2.0 - alphas[2]),
    ];
    for (name, z) in den_args {
        if upsilon_zero_distance(z, p) < POLE_TOL {
            return Err(pole_hit(name, z));
        }
    }
    let mut num = upsilon_prime_zero(p, tol)?;
    for a in alphas {
        num *= upsilon(a, p, tol)?;
    }
    let mut den = Complex64::new(1.0, 0.0);
    for (_, z) in den_args {
        den *= upsilon(z, p, tol)?;
    }
    let expo = (2.0 * q - abar) / p.gamma;
    let pref = (expo * dozz_base(p).ln()).exp();
    Ok(DozzValue { value: pref * num / den, outside_seiberg })
}

/// KPZ image `alpha = Q - sqrt(Q^2 - 4 - 2 lambda)` on the principal branch.
pub fn kpz_alpha_from_lambda(lambda: f64, p: &LqgParams) -> Complex64 {
    let q = p.q_charge;
    let disc = q * q - 4.0 - 2.0 * lambda;
    if disc >= 0.0 {
        Complex64::new(q - disc.sqrt(), 0.0)
    } else {
        Complex64::new(q, -(-disc).sqrt())
    }
}

/// `|alpha (Q - alpha/2) - 2 - lambda|`.
pub fn kpz_residual(alpha: Complex64, lambda: f64, p: &LqgParams) -> f64 {
    (alpha * (p.q_charge - alpha / 2.0) - 2.0 - lambda).norm()
}

fn n_gamma_with(alpha: Complex64, p: &LqgParams, dozz_ggg: f64) -> Result<Complex64> {
    let g = p.gamma;
    let q = p.q_charge;
    let arg_top = alpha * (g / 2.0) - p.kappa / 4.0;
    check_gamma_arg("Gamma(gamma/2 (alpha - gamma/2))", arg_top)?;
    let arg_bot = (q - alpha) * (2.0 / g);
    let cos_term = (arg_bot * PI).cos();
    if cos_term.norm() < POLE_TOL {
        return Err(pole_hit("cos(2 pi/gamma (Q - alpha))", alpha));
    }
    let g4 = 4.0 / p.kappa;
    let lead = -PI * (PI * g4).cos() * gamma(g4 - 1.0) / gamma(1.0 - p.kappa / 4.0) * dozz_ggg.cbrt();
    let tail = (-(alpha / g) * mu_base(p).ln()).exp();
    Ok(cgamma(arg_top) * crgamma(arg_bot) / cos_term * tail * lead)
}

fn dozz_ggg(p: &LqgParams, tol: f64) -> Result<f64> {
    let g = Complex64::new(p.gamma, 0.0);
    Ok(dozz([g, g, g], p, tol)?.value.re)
}

/// Normalisation factor `N_gamma(alpha)` of the CLE structure constant.
pub fn n_gamma(alpha: Complex64, p: &LqgParams, tol: f64) -> Result<Complex64> {
    n_gamma_with(alpha, p, dozz_ggg(p, tol)?)
}

/// `prod N_gamma(alpha_i) / C_DOZZ(alpha)` for arbitrary (possibly complex) `alpha_i`.
pub fn cle_three_point_alphas(alphas: [Complex64; 3], p: &LqgParams, tol: f64) -> Result<Complex64> {
    let inner = (tol * 1e-2).max(1e-13);
    let d = dozz_ggg(p, inner)?;
    let mut num = Complex64::new(1.0, 0.0);
    for a in alphas {
        num *= n_gamma_with(a, p, d)?;
    }
    Ok(num / dozz(alphas, p, inner)?.value)
}

fn cle_three_point_open(lambdas: [f64; 3], gamma_: f64, tol: f64) -> Result<f64> {
    let p = LqgParams::unchecked(gamma_);
    let q = ThreePointQuery::new(lambdas, &p);
    let v = cle_three_point_alphas(q.alphas, &p, tol)?;
    if v.im.abs() >= tol * v.re.abs() {
        return Err(Error::ImaginaryLeak { re: v.re, im: v.im });
    }
    Ok(v.re)
}

/// Number of nodes and spacing in `kappa` for the limit at `kappa = 4`.
const EDGE_NODES: usize = 6;
const EDGE_STEP: f64 = 4e-3;

/// CLE three-point structure constant `C_kappa(lambda_1, lambda_2, lambda_3)`.
///
/// Returns `+inf` when some `lambda_i <= 3 kappa/32 - 1 + 2/kappa`. At
/// `kappa = 4` the closed form is a `0 * inf` limit and is obtained by
/// polynomial extrapolation from `kappa = 4 - j h`.
pub fn cle_three_point(lambdas: [f64; 3], kappa: f64, tol: f64) -> Result<f64> {
    if !(kappa > 8.0 / 3.0 && kappa <= 4.0) {
        return Err(domain(format!("kappa must lie in (8/3, 4], got {kappa}")));
    }
    let threshold = 3.0 * kappa / 32.0 - 1.0 + 2.0 / kappa;
    if lambdas.iter().any(|&l| l <= threshold) {
        return Ok(f64::INFINITY);
    }
    // fixed evaluation order makes the result exactly symmetric
    let mut lambdas = lambdas;
    lambdas.sort_by(f64::total_cmp);
    if kappa < 4.0 {
        return cle_three_point_open(lambdas, kappa.sqrt(), tol);
    }
    let mut xs = [0.0; EDGE_NODES];
    let mut ys = [0.0; EDGE_NODES];
    for j in 0..EDGE_NODES {
        let k = 4.0 - (j + 1) as f64 * EDGE_STEP;
        let th = 3.0 * k / 32.0 - 1.0 + 2.0 / k;
        if lambdas.iter().any(|&l| l <= th) {
            return Err(domain("lambda too close to the threshold for the kappa = 4 limit"));
        }
        xs[j] = k - 4.0;
        ys[j] = cle_three_point_open(lambdas, k.sqrt(), tol * 1e-2)?;
    }
    Ok(neville_at_zero(&xs, &mut ys))
}

fn neville_at_zero(xs: &[f64], ys: &mut [f64]) -> f64 {
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            ys[i] = (xs[i + m] * ys[i] - xs[i] * ys[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    ys[0]
}

/// Relative residual of the pants-factorisation identity
/// `2^{-sum lambda - 1} C_DOZZ C_CLE = C(gamma) prod f(alpha_i)`, with `C(gamma)`
/// fixed at `alpha_i = gamma`.
pub fn three_point_product_identity(alphas: [f64; 3], p: &LqgParams, tol: f64) -> Result<f64> {
    let q = p.q_charge;
    let g = p.gamma;
    let lo = q - g / 4.0;
    if alphas.iter().any(|&a| !(a > lo && a < q)) {
        return Err(domain(format!("alphas must lie in (Q - gamma/4, Q) = ({lo}, {q})")));
    }
    let inner = (tol * 1e-2).max(1e-13);
    let lhs = |al: [f64; 3]| -> Result<f64> {
        let ac = al.map(|a| Complex64::new(a, 0.0));
        let d = dozz(ac, p, inner)?.value.re;
        let c = cle_three_point_alphas(ac, p, inner)?.re;
        let sum_l: f64 = al.iter().map(|&a| a * (q - a / 2.0) - 2.0).sum();
        Ok(2f64.powf(-sum_l - 1.0) * d * c)
    };
    let f = |a: f64| -> f64 {
        2f64.powf(a * a / 2.0 - q * a) * gamma(g * a / 2.0 - p.kappa / 4.0)
            / (gamma(2.0 / g * (q - a)) * (2.0 * PI / g * (q - a)).cos())
            * mu_base(p).powf(-a / g)
    };
    let rhs_raw = |al: [f64; 3]| al.iter().map(|&a| f(a)).product::<f64>();
    let norm = lhs([g, g, g])? / rhs_raw([g, g, g]);
    let l = lhs(alphas)?;
    let r = norm * rhs_raw(alphas);
    Ok(((l - r) / r).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kpz_roots() {
        let p = LqgParams::new(3f64.sqrt()).unwrap();
        let a0 = kpz_alpha_from_lambda(0.0, &p);
        assert!((a0.re - p.gamma).abs() < 1e-14 && a0.im == 0.0);
        let edge = (p.q_charge.powi(2) - 4.0) / 2.0;
        assert!((kpz_alpha_from_lambda(edge, &p).re - p.q_charge).abs() < 1e-7);
        let a1 = kpz_alpha_from_lambda(1.0, &p);
        assert!((a1.im.powi(2) - (6.0 - p.q_charge.powi(2))).abs() < 1e-13);
        for l in [-0.04, 0.0, 0.3, 1.0, 7.5] {
            assert!(kpz_residual(kpz_alpha_from_lambda(l, &p), l, &p) < 1e-12);
        }
    }

    #[test]
    fn normalisation_three() {
        let v = cle_three_point([0.0; 3], 3.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn threshold_is_infinite() {
        let k: f64 = 3.2;
        let th = 3.0 * k / 32.0 - 1.0 + 2.0 / k;
        assert!(cle_three_point([th, 0.5, 0.5], k, 1e-10).unwrap().is_infinite());
    }

    #[test]
    fn dozz_symmetric_and_flagged() {
        let p = LqgParams::new(1.4).unwrap();
        let a = [0.9, 1.3, 1.1].map(|x| Complex64::new(x, 0.0));
        let d1 = dozz(a, &p, 1e-11).unwrap();
        let d2 = dozz([a[1], a[0], a[2]], &p, 1e-11).unwrap();
        assert!((d1.value - d2.value).norm() < 1e-10 * d1.value.norm());
        assert!(!d1.outside_seiberg || a.iter().map(|z| z.re).sum::<f64>() <= 2.0 * p.q_charge);
        let small = [0.3, 0.4, 0.5].map(|x| Complex64::new(x, 0.0));
        assert!(dozz(small, &p, 1e-10).unwrap().outside_seiberg);
    }
}
