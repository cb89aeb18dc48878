//! Real and complex Gamma via recurrence shift plus the Stirling series.

use num_complex::Complex64;
use std::f64::consts::PI;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;
const SHIFT_TO: f64 = 16.0;

// B_{2k} / (2k (2k-1)) for k = 1..=9
const STIRLING: [f64; 9] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
];

/// `sin(pi x)` with exact zeros at the integers.
pub fn sinpi(x: f64) -> f64 {
    if x.fract() == 0.0 {
        return 0.0;
    }
    let r = x - 2.0 * (x / 2.0).round();
    let y = if r > 0.5 {
        1.0 - r
    } else if r < -0.5 {
        -1.0 - r
    } else {
        r
    };
    (PI * y).sin()
}

/// `cos(pi x)` with exact zeros at the half-integers.
pub fn cospi(x: f64) -> f64 {
    if (x - 0.5).fract() == 0.0 {
        return 0.0;
    }
    sinpi(x + 0.5)
}

fn stirling_real(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut p = inv;
    for c in STIRLING {
        series += c * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

fn ln_gamma_pos(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut y = x;
    let mut prod = 1.0;
    while y < SHIFT_TO {
        prod *= y;
        y += 1.0;
        if prod > 1e280 {
            shift += prod.ln();
            prod = 1.0;
        }
    }
    stirling_real(y) - shift - prod.ln()
}

/// `ln |Gamma(x)|`.
pub fn ln_gamma(x: f64) -> f64 {
    if x >= 0.5 {
        ln_gamma_pos(x)
    } else {
        (PI / sinpi(x).abs()).ln() - ln_gamma_pos(1.0 - x)
    }
}

/// `Gamma(x)`; infinite at the non-positive integers.
pub fn gamma(x: f64) -> f64 {
    if x >= 0.5 {
        if x > 171.7 {
            return f64::INFINITY;
        }
        ln_gamma_pos(x).exp()
    } else {
        let s = sinpi(x);
        if s == 0.0 {
            return f64::INFINITY;
        }
        PI / (s * ln_gamma_pos(1.0 - x).exp())
    }
}

/// `1/Gamma(x)`, entire.
pub fn rgamma(x: f64) -> f64 {
    if x >= 0.5 {
        if x > 171.7 {
            return 0.0;
        }
        (-ln_gamma_pos(x)).exp()
    } else {
        sinpi(x) * ln_gamma_pos(1.0 - x).exp() / PI
    }
}

fn csinpi(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    Complex64::new(sinpi(x) * (PI * y).cosh(), cospi(x) * (PI * y).sinh())
}

fn stirling_complex(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        series += p * c;
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series
}

fn cln_gamma_pos(z: Complex64) -> Complex64 {
    let mut y = z;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut prod = Complex64::new(1.0, 0.0);
    while y.norm() < SHIFT_TO || y.re < 0.5 {
        prod *= y;
        y += 1.0;
        if prod.norm() > 1e250 {
            acc += prod.ln();
            prod = Complex64::new(1.0, 0.0);
        }
    }
    stirling_complex(y) - acc - prod.ln()
}

/// `ln Gamma(z)` up to an additive multiple of `2 pi i`; fine for exponentiation.
pub fn cln_gamma(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        cln_gamma_pos(z)
    } else {
        Complex64::new(PI, 0.0).ln() - csinpi(z).ln() - cln_gamma_pos(1.0 - z)
    }
}

/// Complex `Gamma(z)`; infinite at the non-positive integers.
pub fn cgamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return Complex64::new(gamma(z.re), 0.0);
    }
    if z.re >= 0.5 {
        cln_gamma_pos(z).exp()
    } else {
        let s = csinpi(z);
        PI / (s * cln_gamma_pos(1.0 - z).exp())
    }
}

/// Complex `1/Gamma(z)`, entire.
pub fn crgamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return Complex64::new(rgamma(z.re), 0.0);
    }
    if z.re >= 0.5 {
        (-cln_gamma_pos(z)).exp()
    } else {
        csinpi(z) * cln_gamma_pos(1.0 - z).exp() / PI
    }
}

/// Distance from `z` to the nearest pole of Gamma.
pub fn pole_distance(z: Complex64) -> f64 {
    let n = z.re.round().min(0.0);
    Complex64::new(z.re - n, z.im).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn real_values() {
        assert!(rel(gamma(0.5), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(5.0), 24.0) < 1e-14);
        assert!(rel(gamma(1.0 / 3.0), 2.678_938_534_707_747_6) < 1e-14);
        assert!(rel(gamma(-1.7), 2.513_923_519_065_202_0) < 1e-14);
        assert!(rel(gamma(-0.5), -2.0 * PI.sqrt()) < 1e-14);
        assert!(rel(gamma(30.5), 4.822_696_933_490_908_6e31) < 1e-14);
        assert_eq!(rgamma(-3.0), 0.0);
        assert!(gamma(-2.0).is_infinite());
    }

    #[test]
    fn complex_values() {
        let g = cgamma(Complex64::new(1.0, 1.0));
        let want = Complex64::new(0.498_015_668_118_356_04, -0.154_949_828_301_810_68);
        assert!((g - want).norm() / want.norm() < 1e-14);
        let z = Complex64::new(-2.3, 0.7);
        let prod = cgamma(z) * crgamma(z);
        assert!((prod - 1.0).norm() < 1e-14);
        let refl = cgamma(z) * cgamma(1.0 - z) * csinpi(z);
        assert!((refl - PI).norm() < 1e-13);
    }

    #[test]
    fn sinpi_exact() {
        assert_eq!(sinpi(3.0), 0.0);
        assert_eq!(cospi(2.5), 0.0);
        assert!((sinpi(0.25) - (0.5f64).sqrt()).abs() < 3e-16);
        assert!((sinpi(-1.75) - (0.5f64).sqrt()).abs() < 1e-15);
    }
}
