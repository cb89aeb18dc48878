use std::f64::consts::PI;

use rand_distr::{Distribution, Poisson};

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, Interval, Tolerance};
use crate::replicate::{self, MeanEstimate};
use crate::specialfn::LqgParams;

use super::path::PathSampler;
use super::tilt::AreaTilt;
use super::StableLevyConfig;

/// Law of a marked jump: `C / (a + b) (a / b)^{beta+1}` with `C = -sin(pi beta) / pi`.
pub fn marked_jump_density(b: f64, a: f64, beta: f64) -> f64 {
    -(PI * beta).sin() / PI / (a + b) * (a / b).powf(beta + 1.0)
}

/// Least-squares slope of `log density` against `log b` on `[lo, hi]`, from
/// 200 log-spaced points of the closed form.
pub fn marked_jump_tail_slope(a: f64, beta: f64, lo: f64, hi: f64) -> f64 {
    let pts: Vec<(f64, f64)> = (0..200)
        .map(|i| {
            let x = lo.ln() + (hi / lo).ln() * i as f64 / 199.0;
            (x, marked_jump_density(x.exp(), a, beta).ln())
        })
        .collect();
    least_squares_slope(&pts, None)
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)], weights: Option<&[f64]>) -> f64 {
    let w = |i: usize| weights.map_or(1.0, |ws| ws[i]);
    let sw: f64 = (0..pts.len()).map(w).sum();
    let mx = pts.iter().enumerate().map(|(i, p)| w(i) * p.0).sum::<f64>() / sw;
    let my = pts.iter().enumerate().map(|(i, p)| w(i) * p.1).sum::<f64>() / sw;
    let sxy: f64 = pts.iter().enumerate().map(|(i, p)| w(i) * (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().enumerate().map(|(i, p)| w(i) * (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Histogram of jump sizes weighted by `1 / tau`, normalised by the Monte
/// Carlo mean of `1 / tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedJumpHistogram {
    pub bin_edges: Vec<f64>,
    pub weighted_mass: Vec<f64>,
    /// Standard error of each bin mass (delta method for the ratio).
    pub stderr: Vec<f64>,
    /// Closed-form density integrated over each bin.
    pub target: Vec<f64>,
    pub total_weight: f64,
    pub n_paths: u64,
}

impl WeightedJumpHistogram {
    /// Largest `|mass / target - 1|` over the bins.
    pub fn sup_relative_deviation(&self) -> f64 {
        self.weighted_mass.iter().zip(&self.target).map(|(m, t)| (m / t - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Log-log slope of the empirical density, bins weighted by inverse variance.
    pub fn log_slope(&self) -> f64 {
        let mut pts = Vec::new();
        let mut ws = Vec::new();
        for k in 0..self.weighted_mass.len() {
            let (lo, hi) = (self.bin_edges[k], self.bin_edges[k + 1]);
            let m = self.weighted_mass[k];
            if m <= 0.0 {
                continue;
            }
            pts.push((((lo * hi).sqrt()).ln(), (m / (hi - lo)).ln()));
            let rel = self.stderr[k] / m;
            ws.push(1.0 / (rel * rel).max(1e-12));
        }
        least_squares_slope(&pts, Some(&ws))
    }
}

fn bin_target(lo: f64, hi: f64, a: f64, beta: f64) -> f64 {
    integrate(|b| marked_jump_density(b, a, beta), Interval::Finite(lo, hi), &Tolerance::relative(1e-12)).value
}

/// Weighted histogram of the jumps made before the first passage below `-a`.
pub fn estimate_marked_jump_density(
    a: f64,
    cfg: &StableLevyConfig,
    bin_edges: &[f64],
    n_paths: u64,
) -> Result<WeightedJumpHistogram> {
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("bin edges must be increasing with at least one bin"));
    }
    if bin_edges[0] < 10.0 * cfg.jump_cutoff_eps {
        return Err(domain("the first bin edge must be at least 10 times the jump cutoff"));
    }
    if n_paths < 2 {
        return Err(domain("need at least two paths"));
    }
    let nb = bin_edges.len() - 1;
    let mut c = *cfg;
    c.explicit_above = c.explicit_above.min(bin_edges[0]);
    if c.shortcut_above.is_infinite() {
        c.shortcut_above = (10.0 * a).max(2.0 * bin_edges[nb]);
    }
    if c.shortcut_above < bin_edges[nb] {
        return Err(domain("shortcut_above must not fall inside the binned range"));
    }
    let sampler = PathSampler::new(c)?;
    let beta = cfg.beta;
    let bin_rates: Vec<f64> =
        (0..nb).map(|k| (bin_edges[k].powf(-beta) - bin_edges[k + 1].powf(-beta)) / beta).collect();
    let rows = replicate::map(cfg.seed, n_paths, |_, rng| -> Result<(f64, Vec<f64>)> {
        let p = sampler.sample(a, rng)?;
        let w = 1.0 / p.tau;
        let mut row = vec![0.0; nb];
        for &x in &p.jumps {
            if x < bin_edges[0] || x >= bin_edges[nb] {
                continue;
            }
            let k = bin_edges.partition_point(|&e| e <= x) - 1;
            row[k] += w;
        }
        // unresolved long descents: bin counts from the jump intensity over their duration
        for &(_, d) in &p.shortcuts {
            for k in 0..nb {
                let count = Poisson::new(bin_rates[k] * d).map_err(|e| Error::SolverFailure(e.to_string()))?.sample(rng);
                row[k] += w * count;
            }
        }
        Ok((w, row))
    });
    let rows: Vec<(f64, Vec<f64>)> = rows.into_iter().collect::<Result<_>>()?;
    let n = rows.len() as f64;
    let mean_w = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let mut mass = vec![0.0; nb];
    for (_, row) in &rows {
        for k in 0..nb {
            mass[k] += row[k];
        }
    }
    for m in mass.iter_mut() {
        *m /= n * mean_w;
    }
    let stderr = (0..nb)
        .map(|k| {
            let resid: Vec<f64> = rows.iter().map(|(w, row)| row[k] - mass[k] * w).collect();
            let v = resid.iter().map(|r| r * r).sum::<f64>() / (n - 1.0);
            (v / n).sqrt() / mean_w
        })
        .collect();
    let target = (0..nb).map(|k| bin_target(bin_edges[k], bin_edges[k + 1], a, cfg.beta)).collect();
    Ok(WeightedJumpHistogram {
        bin_edges: bin_edges.to_vec(),
        total_weight: mass.iter().sum(),
        weighted_mass: mass,
        stderr,
        target,
        n_paths,
    })
}

/// Parameters of the annulus area estimator.
#[derive(Debug, Clone, Copy)]
pub struct AnnulusOptions {
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    pub params: LqgParams,
}

impl AnnulusOptions {
    /// `exp(-(a + b) sqrt(mu / sin(pi gamma^2 / 4)))`.
    pub fn target(&self) -> f64 {
        (-(self.a + self.b) * (self.mu / self.params.sin_term()).sqrt()).exp()
    }
}

/// Monte Carlo mean of `exp(-mu sum x_i^2 A_i)` over the jumps before the
/// first passage below `-(a + b)`, each jump carrying an independent disk area.
///
/// Jumps below the level cutoffs are not simulated; their marks enter through
/// the exact tilt of the small-jump law.
pub fn estimate_annulus_area_laplace(opts: &AnnulusOptions, cfg: &StableLevyConfig, n_paths: u64) -> Result<MeanEstimate> {
    if !(opts.a > 0.0 && opts.b > 0.0 && opts.mu > 0.0) {
        return Err(domain("a, b and mu must be positive"));
    }
    if (cfg.beta - opts.params.beta).abs() > 1e-12 {
        return Err(domain(format!("beta {} does not match 4/gamma^2 + 1/2 = {}", cfg.beta, opts.params.beta)));
    }
    let tilt = AreaTilt::new(opts.mu, &opts.params)?;
    let sampler = PathSampler::new(*cfg)?.with_tilt(&tilt)?;
    let level = opts.a + opts.b;
    let xs = replicate::map(cfg.seed, n_paths, |_, rng| -> Result<f64> {
        Ok(sampler.sample(level, rng)?.log_weight.exp())
    });
    let xs: Vec<f64> = xs.into_iter().collect::<Result<_>>()?;
    Ok(MeanEstimate::from_samples(&xs))
}
