use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, InverseGaussian, Poisson};

use super::tilt::AreaTilt;
use super::{sample_passage_time, SmallJumpMode, StableLevyConfig};
use crate::error::{domain, Error, Result};

/// Jumps of one path up to its first passage below `-target_level`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyPathSample {
    /// Explicitly simulated jump sizes, decreasing.
    pub jumps: Vec<f64>,
    pub tau: f64,
    pub target_level: f64,
    /// Log of the likelihood ratio carried by tilted small-jump segments plus
    /// `-mu x^2 A` for every explicit jump (zero unless an area tilt is installed).
    pub log_weight: f64,
    /// `(x, duration)` of every descent drawn exactly after a jump `x` at or
    /// above the shortcut size.
    pub shortcuts: Vec<(f64, f64)>,
    /// The path was abandoned once its weight fell below `exp(KILL_LOG_WEIGHT)`.
    pub killed: bool,
}

/// Paths whose area weight drops below `exp(KILL_LOG_WEIGHT)` are stopped.
pub const KILL_LOG_WEIGHT: f64 = -60.0;

/// Law of the small-jump part below the cutoff `delta`: drift `-drift`,
/// Gaussian variance rate `var`, and weight `exp(-rate * s)` per descent `s`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LevelLaw {
    pub delta: f64,
    pub drift: f64,
    pub var: f64,
    pub rate: f64,
}

/// Multilevel first-passage sampler.
///
/// A descent of `s` under the process whose jumps are all below `delta` is the
/// descent under the jumps below a finer cutoff `delta'`, lengthened by one
/// fresh descent for every jump in `[delta', delta)` arriving meanwhile.  The
/// finest descents use the small-jump law of their level.
#[derive(Debug, Clone)]
pub struct PathSampler {
    cfg: StableLevyConfig,
    levels: Vec<LevelLaw>,
    marks: Option<AreaTilt>,
}

const LADDER_RATIO: f64 = 2.0;
const LADDER_TOP: f64 = 1e6;

struct Walk<'a, R: Rng + ?Sized> {
    rng: &'a mut R,
    jumps: Vec<f64>,
    events: u64,
    log_weight: f64,
    floor: f64,
    shortcuts: Vec<(f64, f64)>,
    killed: bool,
}

impl PathSampler {
    pub fn new(cfg: StableLevyConfig) -> Result<Self> {
        cfg.validate()?;
        let b = cfg.beta;
        let top = cfg.explicit_above.min(LADDER_TOP);
        let mut levels = Vec::new();
        let mut delta = cfg.jump_cutoff_eps;
        while levels.is_empty() || delta <= top * (1.0 + 1e-12) {
            levels.push(LevelLaw {
                delta,
                drift: delta.powf(1.0 - b) / (b - 1.0),
                var: delta.powf(2.0 - b) / (2.0 - b),
                rate: 0.0,
            });
            delta *= LADDER_RATIO;
        }
        Ok(PathSampler { cfg, levels, marks: None })
    }

    /// Replaces the small-jump laws by their area-tilted versions and marks
    /// every explicit jump `x` with an independent disk area `x^2 A`.
    pub fn with_tilt(mut self, tilt: &AreaTilt) -> Result<Self> {
        self.marks = Some(*tilt);
        for lvl in self.levels.iter_mut() {
            let t = tilt.at(lvl.delta, self.cfg.beta)?;
            lvl.drift = t.drift;
            lvl.var = t.var;
            lvl.rate = t.rate;
        }
        Ok(self)
    }

    pub fn config(&self) -> &StableLevyConfig {
        &self.cfg
    }

    /// Cutoffs of the level ladder, increasing.
    pub fn cutoffs(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.delta).collect()
    }

    fn level_for(&self, x: f64) -> usize {
        let r = (x / self.cfg.jump_cutoff_eps).log2().floor();
        if r.is_nan() || r < 0.0 {
            0
        } else {
            (r as usize).min(self.levels.len() - 1)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, a: f64, rng: &mut R) -> Result<LevyPathSample> {
        if !(a > 0.0) {
            return Err(domain(format!("target level must be positive, got {a}")));
        }
        let mut w = Walk {
            rng,
            jumps: Vec::new(),
            events: 0,
            log_weight: 0.0,
            floor: self.cfg.refine_floor * a,
            shortcuts: Vec::new(),
            killed: false,
        };
        let tau = self.descend(a, None, &mut w)?;
        let mut jumps = w.jumps;
        jumps.sort_by(|x, y| y.total_cmp(x));
        Ok(LevyPathSample {
            jumps,
            tau,
            target_level: a,
            log_weight: w.log_weight,
            shortcuts: w.shortcuts,
            killed: w.killed,
        })
    }

    fn base<R: Rng + ?Sized>(&self, s: f64, level: usize, w: &mut Walk<'_, R>) -> Result<f64> {
        let law = &self.levels[level];
        w.log_weight -= law.rate * s;
        let mean = s / law.drift;
        Ok(match self.cfg.small_jump_mode {
            SmallJumpMode::DriftOnly => mean,
            SmallJumpMode::GaussianMatch => {
                let shape = s * s / law.var;
                InverseGaussian::new(mean, shape)
                    .map_err(|e| Error::SolverFailure(format!("inverse Gaussian({mean}, {shape}): {e}")))?
                    .sample(w.rng)
            }
        })
    }

    /// Passage time below `-s` for the process with jumps below `levels[upper]`
    /// (all jumps when `upper` is `None`).
    fn descend<R: Rng + ?Sized>(&self, s: f64, upper: Option<usize>, w: &mut Walk<'_, R>) -> Result<f64> {
        w.events += 1;
        if w.events > self.cfg.event_budget {
            return Err(Error::BudgetExceeded { budget: self.cfg.event_budget });
        }
        let target = self.level_for((self.cfg.refine * s).min(self.cfg.explicit_above));
        let lower = match upper {
            Some(u) if u == 0 || target >= u || self.cfg.refine * s < w.floor => return self.base(s, u, w),
            Some(_) | None => target,
        };
        let beta = self.cfg.beta;
        let lo = self.levels[lower].delta;
        let hi_pow = upper.map_or(0.0, |u| self.levels[u].delta.powf(-beta));
        let lo_pow = lo.powf(-beta);
        let rate = (lo_pow - hi_pow) / beta;
        let mut cur = self.descend(s, Some(lower), w)?;
        // time spent in exactly drawn descents, during which this clock is idle
        let mut skipped = 0.0;
        let e0: f64 = Exp1.sample(w.rng);
        let mut clock = e0 / rate;
        while clock < cur && !w.killed {
            let u: f64 = w.rng.random();
            let x = (lo_pow - u * (lo_pow - hi_pow)).powf(-1.0 / beta);
            w.jumps.push(x);
            if let Some(t) = &self.marks {
                let g: f64 = Gamma::new(t.shape, 1.0).map_err(|e| Error::SolverFailure(e.to_string()))?.sample(w.rng);
                w.log_weight -= t.mu * x * x * t.rate / g;
                if w.log_weight < KILL_LOG_WEIGHT {
                    w.killed = true;
                }
            }
            if x >= self.cfg.shortcut_above {
                let d = sample_passage_time(x, beta, w.rng);
                w.shortcuts.push((x, d));
                skipped += d;
            } else {
                cur += self.descend(x, Some(lower), w)?;
            }
            let e: f64 = Exp1.sample(w.rng);
            clock += e / rate;
        }
        Ok(cur + skipped)
    }
}

/// Simulates the path until it first passes below `-a`.
pub fn sample_path_to_hit<R: Rng + ?Sized>(a: f64, cfg: &StableLevyConfig, rng: &mut R) -> Result<LevyPathSample> {
    PathSampler::new(*cfg)?.sample(a, rng)
}

/// Jumps in `[lo, hi)` of the Poisson catalog over a time span `t`.
pub fn jump_catalog<R: Rng + ?Sized>(t: f64, lo: f64, hi: f64, beta: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(t >= 0.0 && lo > 0.0 && hi > lo) {
        return Err(domain("need t >= 0 and 0 < lo < hi"));
    }
    let lo_pow = lo.powf(-beta);
    let hi_pow = hi.powf(-beta);
    let mean = t * (lo_pow - hi_pow) / beta;
    let n = if mean > 0.0 {
        Poisson::new(mean).map_err(|e| Error::SolverFailure(e.to_string()))?.sample(rng) as usize
    } else {
        0
    };
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random();
            (lo_pow - u * (lo_pow - hi_pow)).powf(-1.0 / beta)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replicate::{stream, MeanEstimate};

    #[test]
    fn ladder_and_levels() {
        let cfg = StableLevyConfig::new(1.7, 1e-3, 0).unwrap();
        let s = PathSampler::new(cfg).unwrap();
        let c = s.cutoffs();
        assert_eq!(c[0], 1e-3);
        assert!(c.windows(2).all(|w| (w[1] / w[0] - 2.0).abs() < 1e-12));
        assert_eq!(s.level_for(1e-9), 0);
        assert_eq!(s.level_for(4.5e-3), 2);
    }

    #[test]
    fn catalog_intensity() {
        let mut rng = stream(9, 0);
        let (lo, beta) = (0.05, 1.7);
        let counts: Vec<f64> =
            (0..4000).map(|_| jump_catalog(1.0, lo, f64::INFINITY, beta, &mut rng).unwrap().len() as f64).collect();
        let m = MeanEstimate::from_samples(&counts);
        assert!(m.within(lo.powf(-beta) / beta, 3.5), "{m:?}");
    }

    #[test]
    fn paths_are_deterministic_and_sorted() {
        let cfg = StableLevyConfig::new(1.7, 1e-3, 0).unwrap();
        let s = PathSampler::new(cfg).unwrap();
        let a = s.sample(1.0, &mut stream(4, 2)).unwrap();
        let b = s.sample(1.0, &mut stream(4, 2)).unwrap();
        assert_eq!(a, b);
        assert!(a.tau > 0.0);
        assert!(a.jumps.windows(2).all(|w| w[0] >= w[1]));
        assert!(a.jumps.iter().all(|&x| x >= 1e-3));
    }

    #[test]
    fn budget_is_enforced() {
        let mut cfg = StableLevyConfig::new(1.7, 1e-4, 0).unwrap();
        cfg.event_budget = 3;
        let r = sample_path_to_hit(100.0, &cfg, &mut stream(1, 1));
        assert!(matches!(r, Err(Error::BudgetExceeded { budget: 3 })));
    }
}
