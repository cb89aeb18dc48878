//! Direct lattice estimates of the three-point constant and the thickness
//! MGF. Both carry an uncontrolled grid and finite-domain bias; they exist
//! for exploration only.

use num_complex::Complex64;

use super::cluster::{cluster_loops, ClusterOutline};
use super::grid::GridDomain;
use super::harmonic::{electrical_thickness_estimate, estimate_log_cr, CapacityConfig};
use super::soup::LoopSoupSampler;
use super::ssw::{nested_loop_chain, CleMcConfig, SswEstimate};
use crate::error::{domain, Error, Result};
use crate::replicate::{self, MeanEstimate};
use crate::specialfn::loop_soup_intensity;

/// Vertices of an equilateral triangle of side `side` centred at the origin.
pub fn triangle_points(side: f64) -> [Complex64; 3] {
    let r = side / 3f64.sqrt();
    [0.0, 1.0, 2.0].map(|k: f64| Complex64::from_polar(r, std::f64::consts::FRAC_PI_2 + k * 2.0 * std::f64::consts::PI / 3.0))
}

fn separating<'a>(clusters: &'a [ClusterOutline], pts: &[Complex64; 3], i: usize) -> Option<&'a ClusterOutline> {
    clusters
        .iter()
        .filter(|c| c.contains(pts[i]) && (0..3).all(|j| j == i || !c.contains(pts[j])))
        .max_by(|a, b| a.area().total_cmp(&b.area()))
}

/// `E[prod CR(eta_i, z_i)^lambda_i] / prod |z_i - z_{i+1}|^{lambda_i + lambda_{i+1} - lambda_{i+2}}`
/// for three points on a small triangle in the unit disk, the disk standing
/// in for the full plane. Replicates where some point has no separating
/// cluster contribute zero.
pub fn three_point_mc(
    kappa: f64,
    lambdas: [f64; 3],
    side: f64,
    resolution: usize,
    n_samples: u64,
    cfg: &CleMcConfig,
    seed: u64,
) -> Result<SswEstimate> {
    if lambdas.iter().any(|&l| l < 0.0) {
        return Err(domain("the lattice estimator needs non-negative lambdas"));
    }
    if !(side > 0.0 && side < 0.5) {
        return Err(domain("side must lie in (0, 0.5)"));
    }
    let c = cfg.intensity_factor * loop_soup_intensity(kappa)?;
    let dom = GridDomain::unit_disk(resolution)?;
    let sampler = LoopSoupSampler::for_resolution(resolution)?;
    let pts = triangle_points(side);
    let delta = cfg.delta_stop_cells * dom.spacing();
    let rows: Result<Vec<Option<f64>>> = replicate::map(seed, n_samples, |_, rng| {
        let soup = sampler.sample(&dom, c, cfg.min_length, seed, rng)?;
        let clusters = cluster_loops(&soup);
        let mut log_prod = 0.0;
        for i in 0..3 {
            let Some(o) = separating(&clusters, &pts, i) else {
                return Ok(None);
            };
            log_prod += lambdas[i] * estimate_log_cr(&o.outer_boundary, pts[i], cfg.n_walks, delta, rng)?.log_value;
        }
        Ok(Some(log_prod))
    })
    .into_iter()
    .collect();
    let rows = rows?;
    let scale: f64 = (0..3)
        .map(|i| {
            let d = (pts[i] - pts[(i + 1) % 3]).norm();
            d.powf(lambdas[i] + lambdas[(i + 1) % 3] - lambdas[(i + 2) % 3])
        })
        .product();
    let xs: Vec<f64> = rows.iter().map(|r| r.map_or(0.0, |l| l.exp() / scale)).collect();
    let m = MeanEstimate::from_samples(&xs);
    Ok(SswEstimate {
        estimate: m.estimate,
        stderr: m.stderr,
        n: m.n,
        unresolved: rows.iter().filter(|r| r.is_none()).count() as u64,
    })
}

/// `E[exp(lambda theta)]` over the innermost loop of nested chains of the
/// given depth; chains that degenerate are counted in `unresolved` and left
/// out of the mean.
pub fn thickness_mgf_mc(
    kappa: f64,
    lambda: f64,
    depth: usize,
    resolution: usize,
    n_samples: u64,
    cfg: &CleMcConfig,
    seed: u64,
) -> Result<SswEstimate> {
    let dom = GridDomain::unit_disk(resolution)?;
    let cap = CapacityConfig::default();
    let delta = cfg.delta_stop_cells * dom.spacing();
    let rows: Vec<Result<Option<f64>>> = replicate::map(seed, n_samples, |_, rng| {
        let chain = match nested_loop_chain(&dom, kappa, depth, cfg, seed, rng) {
            Ok(c) => c,
            Err(Error::Degenerate(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let last = &chain[chain.len() - 1].outline.outer_boundary;
        Ok(Some(electrical_thickness_estimate(last, cfg.n_walks, delta, &cap, rng)?.theta))
    });
    let rows: Vec<Option<f64>> = rows.into_iter().collect::<Result<_>>()?;
    let xs: Vec<f64> = rows.iter().flatten().map(|t| (lambda * t).exp()).collect();
    let m = MeanEstimate::from_samples(&xs);
    Ok(SswEstimate {
        estimate: m.estimate,
        stderr: m.stderr,
        n: m.n,
        unresolved: rows.iter().filter(|r| r.is_none()).count() as u64,
    })
}
