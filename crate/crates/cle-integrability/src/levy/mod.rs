//! Spectrally positive stable Lévy process with Lévy measure `x^{-beta-1} dx`:
//! exact passage-time sampling through the stable subordinator, multilevel
//! path simulation, and the jump-law and area estimators built on it.

mod estimators;
mod path;
mod tilt;

pub use estimators::{
    estimate_annulus_area_laplace, estimate_marked_jump_density, marked_jump_density,
    marked_jump_tail_slope, AnnulusOptions, WeightedJumpHistogram,
};
pub use path::{jump_catalog, sample_path_to_hit, LevyPathSample, PathSampler};
pub use tilt::{full_tilt_root, AreaTilt};

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::error::{domain, Result};
use crate::replicate::{self, MeanEstimate};
use crate::specialfn::gamma::gamma;
use crate::specialfn::LqgParams;

/// How the jumps below the current cutoff are represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallJumpMode {
    /// Compensator drift only: the passage time is `s / c`.
    DriftOnly,
    /// Drift plus a Brownian term with the truncated-jump variance; the
    /// passage time is inverse Gaussian.
    GaussianMatch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableLevyConfig {
    pub beta: f64,
    /// Smallest jump size ever simulated explicitly.
    pub jump_cutoff_eps: f64,
    pub small_jump_mode: SmallJumpMode,
    pub seed: u64,
    /// Jumps below `refine * s` may be absorbed when descending a distance `s`.
    pub refine: f64,
    /// Jumps below `refine_floor * a` are never simulated on a path to `-a`.
    pub refine_floor: f64,
    /// Every jump at or above this size is simulated explicitly.
    pub explicit_above: f64,
    /// The descent following a jump at or above this size gets an exact
    /// stable passage time; the jumps inside it are not resolved.
    pub shortcut_above: f64,
    /// Maximal number of simulated events per path.
    pub event_budget: u64,
}

impl StableLevyConfig {
    pub fn new(beta: f64, jump_cutoff_eps: f64, seed: u64) -> Result<Self> {
        let cfg = StableLevyConfig {
            beta,
            jump_cutoff_eps,
            small_jump_mode: SmallJumpMode::GaussianMatch,
            seed,
            refine: 0.25,
            refine_floor: 1e-2,
            explicit_above: f64::INFINITY,
            shortcut_above: f64::INFINITY,
            event_budget: 100_000_000,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 1.5 && self.beta < 2.0) {
            return Err(domain(format!("beta must lie in (3/2, 2), got {}", self.beta)));
        }
        if !(self.jump_cutoff_eps > 0.0 && self.jump_cutoff_eps < 1.0) {
            return Err(domain(format!("jump cutoff must lie in (0, 1), got {}", self.jump_cutoff_eps)));
        }
        if !(self.refine > 0.0 && self.refine <= 1.0) {
            return Err(domain("refine must lie in (0, 1]"));
        }
        if !(self.refine_floor >= 0.0 && self.refine_floor < 1.0) {
            return Err(domain("refine_floor must lie in [0, 1)"));
        }
        if !(self.explicit_above >= self.jump_cutoff_eps) {
            return Err(domain("explicit_above must be at least the jump cutoff"));
        }
        if !(self.shortcut_above > 0.0) {
            return Err(domain("shortcut_above must be positive"));
        }
        Ok(())
    }
}

/// One-sided stable variate with `E[exp(-l S)] = exp(-scale l^index)` (Kanter's representation).
pub fn sample_one_sided_stable<R: Rng + ?Sized>(index: f64, scale: f64, rng: &mut R) -> f64 {
    let theta = PI * rng.random::<f64>();
    let e: f64 = Exp1.sample(rng);
    let a = index;
    let s = (a * theta).sin() / theta.sin().powf(1.0 / a) * ((1.0 - a) * theta).sin().powf((1.0 - a) / a)
        / e.powf((1.0 - a) / a);
    scale.powf(1.0 / a) * s
}

/// Subordinator scale of the first passage time below `-a`.
pub fn passage_scale(a: f64, beta: f64) -> f64 {
    a * gamma(-beta).powf(-1.0 / beta)
}

/// Exact draw of the first passage time below `-a`.
pub fn sample_passage_time<R: Rng + ?Sized>(a: f64, beta: f64, rng: &mut R) -> f64 {
    sample_one_sided_stable(1.0 / beta, passage_scale(a, beta), rng)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 1.5 && beta < 2.0 {
        Ok(())
    } else {
        Err(domain(format!("beta must lie in (3/2, 2), got {beta}")))
    }
}

/// Monte Carlo mean of `tau_{-a} / tau_{-a-b}`; the target is `a / (a + b)`.
pub fn estimate_tau_ratio(a: f64, b: f64, beta: f64, n: u64, seed: u64) -> Result<MeanEstimate> {
    check_beta(beta)?;
    if !(a > 0.0 && b > 0.0) || n < 2 {
        return Err(domain("a and b must be positive and n at least 2"));
    }
    let xs = replicate::map(seed, n, |_, rng| {
        let t1 = sample_passage_time(a, beta, rng);
        let t2 = sample_passage_time(b, beta, rng);
        t1 / (t1 + t2)
    });
    Ok(MeanEstimate::from_samples(&xs))
}

/// Monte Carlo mean of `1 / tau_{-a}`.
pub fn estimate_inv_tau_mean(a: f64, beta: f64, n: u64, seed: u64) -> Result<MeanEstimate> {
    check_beta(beta)?;
    if !(a > 0.0) || n < 2 {
        return Err(domain("a must be positive and n at least 2"));
    }
    let xs = replicate::map(seed, n, |_, rng| 1.0 / sample_passage_time(a, beta, rng));
    Ok(MeanEstimate::from_samples(&xs))
}

/// `a^{-beta} pi / sin(-pi beta)`.
pub fn inv_tau_mean_target(a: f64, beta: f64) -> f64 {
    a.powf(-beta) * PI / (-PI * beta).sin()
}

/// Shape and rate of the inverse-gamma area law of a unit-boundary quantum disk.
pub fn qd_area_law(p: &LqgParams) -> (f64, f64) {
    (2.0 * (p.q_charge - p.gamma) / p.gamma + 1.0, 1.0 / (4.0 * p.sin_term()))
}

/// Draw from the unit-boundary quantum disk area law.
pub fn sample_qd_area<R: Rng + ?Sized>(p: &LqgParams, rng: &mut R) -> f64 {
    let (shape, rate) = qd_area_law(p);
    let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
    rate / g
}
