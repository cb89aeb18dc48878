//! Deterministic verification suites behind `cleint verify`.
//!
//! Each function takes an optional tolerance override. The override only
//! replaces the pass threshold; internal quadrature tolerances stay fixed.

use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;

use super::{Check, SuiteReport};
use crate::error::Result;
use crate::quadrature::{verify_bessel_identity_one, verify_bessel_identity_two, verify_k_integral, verify_qa_welding_identity};
use crate::specialfn::gamma::{cgamma, crgamma};
use crate::specialfn::{
    cle_three_point, cle_three_point_alphas, electrical_thickness_mgf, kenyon_wilson_conjecture,
    kpz_alpha_from_lambda, three_point_product_identity, upsilon, LqgParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Shifts,
    Factorization,
    All,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "identities" => Ok(Suite::Identities),
            "shifts" => Ok(Suite::Shifts),
            "factorization" => Ok(Suite::Factorization),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite `{s}`; expected identities, shifts, factorization or all")),
        }
    }
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Shifts => "shifts",
            Suite::Factorization => "factorization",
            Suite::All => "all",
        }
    }
}

pub fn run(suite: Suite, tol: Option<f64>) -> SuiteReport {
    let start = Instant::now();
    let mut checks = Vec::new();
    if matches!(suite, Suite::Identities | Suite::All) {
        checks.extend(bessel_identities(tol));
        checks.extend(welding_identities(tol));
    }
    if matches!(suite, Suite::Shifts | Suite::All) {
        checks.extend(upsilon_relations(tol));
    }
    if matches!(suite, Suite::Factorization | Suite::All) {
        checks.extend(three_point_normalization(tol));
        checks.extend(product_identity(tol));
        checks.extend(thickness_mgf(tol));
    }
    SuiteReport::new(suite.name(), checks, start.elapsed().as_millis() as u64)
}

fn residual_check(name: String, r: Result<f64>, tol: f64) -> Check {
    match r {
        Ok(v) => Check::residual(name, v, tol),
        Err(e) => Check::failed(name, tol, &e),
    }
}

/// Both Bessel integral identities on the standard parameter grid.
pub fn bessel_identities(tol: Option<f64>) -> Vec<Check> {
    let t = tol.unwrap_or(1e-6);
    let mut out = Vec::new();
    for c in [0.5, 1.0, 2.0] {
        for nu in [0.0, 0.3, -0.3, 0.45] {
            out.push(residual_check(format!("bessel_one c={c} nu={nu}"), verify_bessel_identity_one(c, nu, 1e-9), t));
        }
    }
    for nu in [0.0, 0.3, -0.3] {
        out.push(residual_check(format!("bessel_two nu={nu}"), verify_bessel_identity_two(nu, 1e-8), t));
    }
    out
}

/// Welding convolution identity at `gamma = sqrt 3` and the `K_nu` integral.
pub fn welding_identities(tol: Option<f64>) -> Vec<Check> {
    let p = LqgParams::new(3f64.sqrt()).expect("valid gamma");
    let mut out = Vec::new();
    for a in [0.5, 1.0, 2.0] {
        for mu in [0.5, 1.0, 2.0] {
            out.push(residual_check(
                format!("welding a={a} mu={mu}"),
                verify_qa_welding_identity(a, mu, &p, 1e-9),
                tol.unwrap_or(1e-6),
            ));
        }
    }
    let nu = 2.0 * (p.q_charge - p.gamma) / p.gamma;
    out.push(residual_check(format!("k_integral nu={nu:.6}"), verify_k_integral(nu, 1e-11), tol.unwrap_or(1e-8)));
    out
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm()
}

fn upsilon_point(z: Complex64, p: &LqgParams) -> Result<[f64; 3]> {
    let g = p.gamma;
    let ut = 1e-13;
    let u = upsilon(z, p, ut)?;
    let half = z * (g / 2.0);
    let rhs1 = cgamma(half) * crgamma(1.0 - half) * ((1.0 - z * g) * (g / 2.0).ln()).exp() * u;
    let two = z * (2.0 / g);
    let rhs2 = cgamma(two) * crgamma(1.0 - two) * ((z * (4.0 / g) - 1.0) * (g / 2.0).ln()).exp() * u;
    Ok([
        rel(upsilon(z + g / 2.0, p, ut)?, rhs1),
        rel(upsilon(z + 2.0 / g, p, ut)?, rhs2),
        rel(u, upsilon(p.q_charge - z, p, ut)?),
    ])
}

/// Upsilon shift relations and reflection symmetry on a 20-point grid per
/// coupling, covering arguments inside and outside the strip.
pub fn upsilon_relations(tol: Option<f64>) -> Vec<Check> {
    let t = tol.unwrap_or(1e-8);
    let mut out = Vec::new();
    for g in [1.0, 2f64.sqrt(), 1.8, 1.95] {
        let p = LqgParams::new(g).expect("valid gamma");
        for xf in [-0.4, -0.1, 0.2, 0.5, 0.8] {
            for y in [0.15, 0.4, 0.8, 1.5] {
                let z = Complex64::new(xf * p.q_charge, y);
                let tag = format!("gamma={g:.4} z={:.4}{:+.2}i", z.re, z.im);
                match upsilon_point(z, &p) {
                    Ok([a, b, c]) => {
                        out.push(Check::residual(format!("shift_gamma_half {tag}"), a, t));
                        out.push(Check::residual(format!("shift_two_over_gamma {tag}"), b, t));
                        out.push(Check::residual(format!("reflection {tag}"), c, t));
                    }
                    Err(e) => out.push(Check::failed(format!("upsilon {tag}"), t, &e)),
                }
            }
        }
    }
    out
}

/// Normalisation, root invariance, permutation symmetry and the Koebe
/// monotonicity of the CLE three-point constant.
pub fn three_point_normalization(tol: Option<f64>) -> Vec<Check> {
    let mut out = Vec::new();
    for k in [2.8, 3.0, 3.5, 3.9, 4.0] {
        let name = format!("normalization kappa={k}");
        out.push(match cle_three_point([0.0; 3], k, 1e-10) {
            Ok(v) => Check::close(name, 1.0, v, tol.unwrap_or(1e-6)),
            Err(e) => Check::failed(name, tol.unwrap_or(1e-6), &e),
        });
    }
    for k in [3.0, 3.5, 3.9] {
        let p = LqgParams::from_kappa(k).expect("valid kappa");
        let q = p.q_charge;
        let real_edge = (q * q - 4.0) / 2.0;
        for lambdas in [[0.0, 0.5 * real_edge, 0.9 * real_edge], [0.2, 0.7, 1.5], [0.5 * real_edge, 0.4, 2.0]] {
            let name = format!("root_invariance kappa={k} lambdas={lambdas:?}");
            let r = (|| -> Result<f64> {
                let main = lambdas.map(|l| kpz_alpha_from_lambda(l, &p));
                let other = main.map(|a| if a.im == 0.0 { Complex64::new(2.0 * q - a.re, 0.0) } else { a.conj() });
                let a = cle_three_point_alphas(main, &p, 1e-12)?;
                let b = cle_three_point_alphas(other, &p, 1e-12)?;
                Ok(rel(a, b))
            })();
            out.push(residual_check(name, r, tol.unwrap_or(1e-9)));
        }
    }
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for k in [3.0, 4.0] {
        let l = [0.1, 0.6, 1.3];
        let name = format!("permutation_symmetry kappa={k}");
        let vals: Result<Vec<f64>> = perms.iter().map(|p| cle_three_point(p.map(|i| l[i]), k, 1e-10)).collect();
        out.push(match vals {
            Ok(v) => {
                let spread = v.iter().map(|x| (x - v[0]).abs()).fold(0.0, f64::max);
                Check::close(name, 0.0, spread, 0.0)
            }
            Err(e) => Check::failed(name, 0.0, &e),
        });
    }
    let grid = [0.0, 0.25, 0.5, 1.0, 2.0];
    for k in [3.0, 3.5] {
        let name = format!("monotonicity kappa={k}");
        let scaled = |i: usize, j: usize, m: usize| -> Result<f64> {
            let l = [grid[i], grid[j], grid[m]];
            Ok(4f64.powf(-(l[0] + l[1] + l[2])) * cle_three_point(l, k, 1e-10)?)
        };
        let r = (|| -> Result<(usize, f64)> {
            let n = grid.len();
            let mut table = vec![0.0; n * n * n];
            for i in 0..n {
                for j in 0..n {
                    for m in 0..n {
                        table[(i * n + j) * n + m] = scaled(i, j, m)?;
                    }
                }
            }
            let mut violations = 0;
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    for m in 0..n {
                        let v = table[(i * n + j) * n + m];
                        let nexts = [(i + 1, j, m), (i, j + 1, m), (i, j, m + 1)];
                        for (a, b, c) in nexts {
                            if a < n && b < n && c < n {
                                let w = table[(a * n + b) * n + c];
                                let excess = (w - v) / v;
                                worst = worst.max(excess);
                                if excess > 1e-12 {
                                    violations += 1;
                                }
                            }
                        }
                    }
                }
            }
            Ok((violations, worst))
        })();
        out.push(match r {
            Ok((v, worst)) => Check::predicate(name, worst, v == 0),
            Err(e) => Check::failed(name, 0.0, &e),
        });
    }
    out
}

/// Pants-factorisation cross-identity on a 3x3x3 grid in `(Q - gamma/4, Q)^3`.
pub fn product_identity(tol: Option<f64>) -> Vec<Check> {
    let t = tol.unwrap_or(1e-8);
    let mut out = Vec::new();
    for g in [3f64.sqrt(), 1.9] {
        let p = LqgParams::new(g).expect("valid gamma");
        let lo = p.q_charge - g / 4.0;
        let pts = [0.2, 0.5, 0.8].map(|f| lo + f * g / 4.0);
        for &a in &pts {
            for &b in &pts {
                for &c in &pts {
                    out.push(residual_check(
                        format!("product_identity gamma={g:.4} alphas=({a:.4},{b:.4},{c:.4})"),
                        three_point_product_identity([a, b, c], &p, 1e-10),
                        t,
                    ));
                }
            }
        }
    }
    out
}

/// Thickness MGF: value one at zero, blow-up at the threshold and the
/// `kappa -> 16/kappa` flip identity.
pub fn thickness_mgf(tol: Option<f64>) -> Vec<Check> {
    let mut out = Vec::new();
    for k in [1.0, 2.0, 8.0 / 3.0, 4.0] {
        let name = format!("mgf_at_zero kappa={k:.4}");
        out.push(match electrical_thickness_mgf(0.0, k) {
            Ok(v) => Check::close(name, 1.0, v, tol.unwrap_or(0.0)),
            Err(e) => Check::failed(name, 0.0, &e),
        });
        let lam = (1.0 - k / 8.0) - 1e-8;
        let name = format!("mgf_divergence kappa={k:.4}");
        out.push(match electrical_thickness_mgf(lam, k) {
            Ok(v) => Check::predicate(name, v, v > 1e6),
            Err(e) => Check::failed(name, 0.0, &e),
        });
    }
    let t = tol.unwrap_or(1e-10);
    for k in [0.5, 1.0, 2.0, 8.0 / 3.0, 3.0, 3.5, 4.0] {
        for lam in [-2.0, -0.5, 0.1, 0.3, 0.45] {
            if lam >= 1.0 - k / 8.0 {
                continue;
            }
            let name = format!("kenyon_wilson_flip kappa={k:.4} lambda={lam}");
            let r = (|| -> Result<f64> {
                let a = electrical_thickness_mgf(lam, k)?;
                let b = kenyon_wilson_conjecture(lam, 16.0 / k)?;
                Ok(((a - b) / a).abs())
            })();
            out.push(residual_check(name, r, t));
        }
    }
    out
}
