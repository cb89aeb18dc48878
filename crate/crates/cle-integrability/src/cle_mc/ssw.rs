use num_complex::Complex64;
use rand::Rng;

use super::cluster::{outermost_around_point, ClusterOutline};
use super::grid::GridDomain;
use super::harmonic::{estimate_log_cr_segments, CrEstimate, SegmentIndex};
use super::soup::LoopSoupSampler;
use crate::error::{domain, Error, Result};
use crate::replicate::{self, MeanEstimate};
use crate::specialfn::loop_soup_intensity;

/// Default random-walk soup intensity for central charge `c_kappa`: the
/// rooted measure `4^{-|l|}/|l|` at intensity `c/2`.
pub fn rw_intensity(kappa: f64) -> Result<f64> {
    Ok(CleMcConfig::default().intensity_factor * loop_soup_intensity(kappa)?)
}

/// Settings shared by the CLE estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleMcConfig {
    pub min_length: usize,
    /// Walks per conformal-radius estimate.
    pub n_walks: u64,
    /// Absorption shell in lattice spacings.
    pub delta_stop_cells: f64,
    /// Soup intensity as a multiple of `c_kappa`.
    pub intensity_factor: f64,
}

impl Default for CleMcConfig {
    fn default() -> Self {
        CleMcConfig { min_length: 4, n_walks: 64, delta_stop_cells: 0.5, intensity_factor: 0.5 }
    }
}

/// A loop of a nested chain with its conformal radius seen from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    pub outline: ClusterOutline,
    pub log_cr: CrEstimate,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 8.0 / 3.0 && kappa <= 4.0) {
        return Err(domain(format!("kappa must lie in (8/3, 4], got {kappa}")));
    }
    Ok(())
}

fn boundary_index(o: &ClusterOutline, spacing: f64) -> Result<SegmentIndex> {
    SegmentIndex::new(o.segments(), spacing)
}

/// Outermost loop around the origin of one fresh soup in `dom`, with its log
/// conformal radius; `None` when no cluster surrounds the origin.
pub fn outermost_loop_sample<R: Rng + ?Sized>(
    dom: &GridDomain,
    sampler: &LoopSoupSampler,
    kappa: f64,
    cfg: &CleMcConfig,
    seed: u64,
    rng: &mut R,
) -> Result<Option<ChainLink>> {
    check_kappa(kappa)?;
    let soup = sampler.sample(dom, cfg.intensity_factor * loop_soup_intensity(kappa)?, cfg.min_length, seed, rng)?;
    let zero = Complex64::new(0.0, 0.0);
    let Some(outline) = outermost_around_point(&soup, dom, zero) else {
        return Ok(None);
    };
    let h = dom.spacing();
    let index = boundary_index(&outline, h)?;
    let log_cr = estimate_log_cr_segments(&index, zero, cfg.n_walks, cfg.delta_stop_cells * h, rng)?;
    Ok(Some(ChainLink { outline, log_cr }))
}

/// Iterated outermost loops around the origin, each sampled from a fresh soup
/// inside the previous loop.
pub fn nested_loop_chain<R: Rng + ?Sized>(
    dom: &GridDomain,
    kappa: f64,
    depth: usize,
    cfg: &CleMcConfig,
    seed: u64,
    rng: &mut R,
) -> Result<Vec<ChainLink>> {
    if depth < 1 {
        return Err(domain("depth must be at least 1"));
    }
    let sampler = LoopSoupSampler::for_resolution(dom.resolution)?;
    let mut cur = dom.clone();
    let mut chain = Vec::with_capacity(depth);
    for level in 0..depth {
        if cur.face_count() < 16 {
            return Err(Error::Degenerate(format!("domain collapsed below 16 faces at level {level}")));
        }
        let link = outermost_loop_sample(&cur, &sampler, kappa, cfg, seed, rng)?
            .ok_or_else(|| Error::Degenerate(format!("no cluster surrounds the origin at level {level}")))?;
        let m = dom.resolution - 1;
        let mut faces = vec![false; m * m];
        for &f in &link.outline.hull_faces {
            faces[f as usize] = true;
        }
        cur = GridDomain::from_faces(dom.resolution, faces)?;
        chain.push(link);
    }
    Ok(chain)
}

/// Log conformal radii of the outermost loop around the origin in the unit
/// disk, one entry per replicate; `None` marks replicates where no lattice
/// cluster surrounds the origin.
pub fn sample_outermost_log_cr(
    kappa: f64,
    resolution: usize,
    n_samples: u64,
    cfg: &CleMcConfig,
    seed: u64,
) -> Result<Vec<Option<f64>>> {
    check_kappa(kappa)?;
    let dom = GridDomain::unit_disk(resolution)?;
    let sampler = LoopSoupSampler::for_resolution(resolution)?;
    replicate::map(seed, n_samples, |_, rng| {
        Ok(outermost_loop_sample(&dom, &sampler, kappa, cfg, seed, rng)?.map(|l| l.log_cr.log_value))
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SswEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
    /// Replicates with no surrounding lattice cluster, counted as `CR = 0`.
    pub unresolved: u64,
}

/// `E[CR^lambda]` from per-replicate log conformal radii.
pub fn ssw_moment_from_samples(log_cr: &[Option<f64>], lambda: f64) -> SswEstimate {
    let xs: Vec<f64> = log_cr
        .iter()
        .map(|s| match s {
            _ if lambda == 0.0 => 1.0,
            Some(l) => (lambda * l).exp(),
            None => 0.0,
        })
        .collect();
    let m = MeanEstimate::from_samples(&xs);
    SswEstimate {
        estimate: m.estimate,
        stderr: m.stderr,
        n: xs.len() as u64,
        unresolved: log_cr.iter().filter(|s| s.is_none()).count() as u64,
    }
}

/// Monte Carlo `E[CR(eta, 0)^lambda]` for the outermost loop around the origin
/// of the lattice CLE in the unit disk.
pub fn ssw_moment_mc(
    kappa: f64,
    lambda: f64,
    n_samples: u64,
    resolution: usize,
    cfg: &CleMcConfig,
    seed: u64,
) -> Result<SswEstimate> {
    if lambda == 0.0 {
        check_kappa(kappa)?;
        return Ok(SswEstimate { estimate: 1.0, stderr: 0.0, n: n_samples, unresolved: 0 });
    }
    if !(lambda > 0.0) {
        return Err(domain("lambda must be non-negative for the lattice estimator"));
    }
    Ok(ssw_moment_from_samples(&sample_outermost_log_cr(kappa, resolution, n_samples, cfg, seed)?, lambda))
}
