//! Closed-form evaluators: Upsilon, DOZZ and the CLE structure constant,
//! Bessel K, FZZ and annulus/pants area laws, reflection coefficient and the
//! conformal-radius / electrical-thickness moment formulas.

mod bessel;
mod dozz;
pub mod gamma;
mod laws;
mod upsilon;

pub use bessel::{bessel_k, bessel_k_scaled};
pub use dozz::{
    cle_three_point, cle_three_point_alphas, dozz, kpz_alpha_from_lambda, kpz_residual, n_gamma,
    three_point_product_identity, DozzValue, ThreePointQuery,
};
pub use laws::{
    disk_area_density, electrical_thickness_mgf, fzz_disk_laplace, fzz_total_mass,
    kenyon_wilson_conjecture, loop_soup_intensity, qa_laplace, qa_total_mass, qp_constant,
    qp_laplace, reflection_coeff, reflection_consistency_ratio, ssw_cr_moment, ssw_threshold,
    u_bar,
};
pub use upsilon::{upsilon, upsilon_prime_zero, upsilon_zero_distance};

use crate::error::{domain, Result};
use num_complex::Complex64;

/// Complex scalar used throughout the DOZZ chain.
pub type ComplexScalar = Complex64;

/// Default relative tolerance for special-function quadratures.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Arguments closer than this to a Gamma pole or an Upsilon zero are rejected.
pub const POLE_TOL: f64 = 1e-10;

/// Coupling constants: `gamma`, `kappa = gamma^2`, `Q = gamma/2 + 2/gamma`,
/// `beta = 4/gamma^2 + 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqgParams {
    pub gamma: f64,
    pub kappa: f64,
    pub q_charge: f64,
    pub beta: f64,
}

impl LqgParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 2.0) {
            return Err(domain(format!("gamma must lie in (0, 2), got {gamma}")));
        }
        Ok(Self::unchecked(gamma))
    }

    /// Builds the parameters from `kappa`, with `gamma = sqrt(kappa)`.
    pub fn from_kappa(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 4.0) {
            return Err(domain(format!("kappa must lie in (0, 4), got {kappa}")));
        }
        Ok(Self::unchecked(kappa.sqrt()))
    }

    /// No range check; used for limits at the edge of the parameter range.
    pub(crate) fn unchecked(gamma: f64) -> Self {
        LqgParams {
            gamma,
            kappa: gamma * gamma,
            q_charge: gamma / 2.0 + 2.0 / gamma,
            beta: 4.0 / (gamma * gamma) + 0.5,
        }
    }

    /// `sin(pi gamma^2 / 4)`.
    pub fn sin_term(&self) -> f64 {
        gamma::sinpi(self.kappa / 4.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_invariants() {
        let p = LqgParams::new(3f64.sqrt()).unwrap();
        assert_eq!(p.kappa, p.gamma * p.gamma);
        assert_eq!(p.q_charge, p.gamma / 2.0 + 2.0 / p.gamma);
        assert!(p.beta > 1.5 && p.beta < 2.0);
        assert!(LqgParams::new(2.0).is_err());
        assert!(LqgParams::new(0.0).is_err());
        assert!(LqgParams::from_kappa(4.5).is_err());
    }
}
