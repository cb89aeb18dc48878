use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::cluster::winding_number;
use crate::error::{domain, Error, Result};
use crate::replicate::MeanEstimate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrEstimate {
    pub log_value: f64,
    pub stderr: f64,
    pub n_walks: u64,
}

/// Bucket grid over a set of segments answering "how far may a walk jump
/// from here": exact distances near the segments, safe lower bounds far away.
#[derive(Debug, Clone)]
pub struct SegmentIndex {
    segs: Vec<(Complex64, Complex64)>,
    origin: Complex64,
    size: f64,
    gx: usize,
    gy: usize,
    offsets: Vec<u32>,
    items: Vec<u32>,
    /// Distance from each bucket centre to the nearest non-empty bucket centre.
    gap: Vec<f64>,
}

pub(crate) fn point_segment(z: Complex64, a: Complex64, b: Complex64) -> (f64, Complex64) {
    let d = b - a;
    let l2 = d.norm_sqr();
    let t = if l2 > 0.0 { (((z - a) * d.conj()).re / l2).clamp(0.0, 1.0) } else { 0.0 };
    let p = a + d * t;
    ((z - p).norm(), p)
}

impl SegmentIndex {
    pub fn new(segs: Vec<(Complex64, Complex64)>, size: f64) -> Result<Self> {
        if segs.is_empty() {
            return Err(domain("no segments"));
        }
        if !(size > 0.0) {
            return Err(domain("bucket size must be positive"));
        }
        let (mut lo, mut hi) = (segs[0].0, segs[0].0);
        for &(a, b) in &segs {
            for p in [a, b] {
                lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
                hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
            }
        }
        let origin = lo - Complex64::new(size, size);
        let gx = ((hi.re - origin.re) / size).ceil() as usize + 2;
        let gy = ((hi.im - origin.im) / size).ceil() as usize + 2;
        if gx.saturating_mul(gy) > 1 << 26 {
            return Err(domain("bucket grid too fine for the segment extent"));
        }
        let half_diag = size * FRAC_1_SQRT_2;
        let centre = |i: usize, j: usize| origin + Complex64::new((i as f64 + 0.5) * size, (j as f64 + 0.5) * size);
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); gx * gy];
        for (k, &(a, b)) in segs.iter().enumerate() {
            let i0 = (((a.re.min(b.re) - origin.re) / size).floor() as usize).saturating_sub(1);
            let i1 = (((a.re.max(b.re) - origin.re) / size).floor() as usize + 1).min(gx - 1);
            let j0 = (((a.im.min(b.im) - origin.im) / size).floor() as usize).saturating_sub(1);
            let j1 = (((a.im.max(b.im) - origin.im) / size).floor() as usize + 1).min(gy - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    if point_segment(centre(i, j), a, b).0 <= half_diag {
                        lists[j * gx + i].push(k as u32);
                    }
                }
            }
        }
        let mut offsets = Vec::with_capacity(gx * gy + 1);
        let mut items = Vec::new();
        offsets.push(0);
        for l in &lists {
            items.extend_from_slice(l);
            offsets.push(items.len() as u32);
        }
        let occupied: Vec<bool> = lists.iter().map(|l| !l.is_empty()).collect();
        let gap = distance_transform(&occupied, gx, gy).into_iter().map(|d2| d2.sqrt() * size).collect();
        Ok(SegmentIndex { segs, origin, size, gx, gy, offsets, items, gap })
    }

    fn bucket(&self, z: Complex64) -> Option<(usize, usize)> {
        let i = ((z.re - self.origin.re) / self.size).floor();
        let j = ((z.im - self.origin.im) / self.size).floor();
        if i < 0.0 || j < 0.0 || i >= self.gx as f64 || j >= self.gy as f64 {
            return None;
        }
        Some((i as usize, j as usize))
    }

    /// `(radius, nearest)`: when `nearest` is set, `radius` is the exact
    /// distance to the segments and `nearest` the closest point; otherwise
    /// `radius` is a lower bound.
    pub fn query(&self, z: Complex64) -> (f64, Option<Complex64>) {
        let Some((i, j)) = self.bucket(z) else {
            return self.brute(z);
        };
        let hd = self.size * FRAC_1_SQRT_2;
        let c = self.origin + Complex64::new((i as f64 + 0.5) * self.size, (j as f64 + 0.5) * self.size);
        let gap = self.gap[j * self.gx + i];
        let off = (z - c).norm();
        if gap >= 3.0 * self.size {
            return (gap - hd - off, None);
        }
        let reach = gap + hd + off;
        let r = ((reach + hd) / self.size).ceil() as usize;
        let mut best = (f64::INFINITY, z);
        for jj in j.saturating_sub(r)..=(j + r).min(self.gy - 1) {
            for ii in i.saturating_sub(r)..=(i + r).min(self.gx - 1) {
                let b = jj * self.gx + ii;
                for &k in &self.items[self.offsets[b] as usize..self.offsets[b + 1] as usize] {
                    let (a, bb) = self.segs[k as usize];
                    let (d, p) = point_segment(z, a, bb);
                    if d < best.0 {
                        best = (d, p);
                    }
                }
            }
        }
        (best.0, Some(best.1))
    }

    fn brute(&self, z: Complex64) -> (f64, Option<Complex64>) {
        let mut best = (f64::INFINITY, z);
        for &(a, b) in &self.segs {
            let (d, p) = point_segment(z, a, b);
            if d < best.0 {
                best = (d, p);
            }
        }
        (best.0, Some(best.1))
    }
}

/// Squared Euclidean distance (in cells) from each cell to the nearest marked cell.
fn distance_transform(marked: &[bool], gx: usize, gy: usize) -> Vec<f64> {
    const BIG: f64 = 1e20;
    let mut g: Vec<f64> = marked.iter().map(|&m| if m { 0.0 } else { BIG }).collect();
    let mut f = Vec::new();
    let mut out = Vec::new();
    for i in 0..gx {
        f.clear();
        f.extend((0..gy).map(|j| g[j * gx + i]));
        dt_1d(&f, &mut out);
        for j in 0..gy {
            g[j * gx + i] = out[j];
        }
    }
    for j in 0..gy {
        f.clear();
        f.extend_from_slice(&g[j * gx..(j + 1) * gx]);
        dt_1d(&f, &mut out);
        g[j * gx..(j + 1) * gx].copy_from_slice(&out);
    }
    g
}

/// Lower envelope of parabolas `(q - p)^2 + f(p)`.
fn dt_1d(f: &[f64], out: &mut Vec<f64>) {
    let n = f.len();
    out.clear();
    out.resize(n, 0.0);
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        out[q] = (q as f64 - p as f64).powi(2) + f[p];
    }
}

const MAX_WOS_STEPS: usize = 100_000;

/// One walk-on-spheres exit point from `z`, stopped within `delta_stop` of
/// the boundary and projected onto it.
pub fn wos_exit<R: Rng + ?Sized>(index: &SegmentIndex, z: Complex64, delta_stop: f64, rng: &mut R) -> Result<Complex64> {
    let mut x = z;
    for _ in 0..MAX_WOS_STEPS {
        let (r, near) = index.query(x);
        if let Some(p) = near {
            if r <= delta_stop {
                return Ok(p);
            }
        }
        let th = rng.random::<f64>() * 2.0 * PI;
        x += Complex64::from_polar(r, th);
    }
    Err(Error::SolverFailure(format!("walk on spheres did not stop within {MAX_WOS_STEPS} steps")))
}

/// `log CR(D, z) = E_z log |B_T - z|` over `n_walks` walks, for the domain
/// bounded by the segments.
pub fn estimate_log_cr_segments<R: Rng + ?Sized>(
    index: &SegmentIndex,
    z: Complex64,
    n_walks: u64,
    delta_stop: f64,
    rng: &mut R,
) -> Result<CrEstimate> {
    if n_walks < 2 {
        return Err(domain("need at least two walks"));
    }
    if !(delta_stop > 0.0) {
        return Err(domain("delta_stop must be positive"));
    }
    let mut xs = Vec::with_capacity(n_walks as usize);
    for _ in 0..n_walks {
        let p = wos_exit(index, z, delta_stop, rng)?;
        xs.push((p - z).norm().ln());
    }
    let m = MeanEstimate::from_samples(&xs);
    Ok(CrEstimate { log_value: m.estimate, stderr: m.stderr, n_walks })
}

pub(crate) fn polygon_segments(curve: &[Complex64]) -> Vec<(Complex64, Complex64)> {
    let n = curve.len();
    (0..n).map(|k| (curve[k], curve[(k + 1) % n])).collect()
}

fn extent(curve: &[Complex64]) -> f64 {
    let (mut lo, mut hi) = (curve[0], curve[0]);
    for p in curve {
        lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    (hi.re - lo.re).max(hi.im - lo.im)
}

/// Default absorption shell for a polygon: a thousandth of its extent.
pub fn default_delta_stop(curve: &[Complex64]) -> f64 {
    1e-3 * extent(curve)
}

/// Walk-on-spheres estimate of `log CR` of the polygon's interior at `z`.
pub fn estimate_log_cr<R: Rng + ?Sized>(
    curve: &[Complex64],
    z: Complex64,
    n_walks: u64,
    delta_stop: f64,
    rng: &mut R,
) -> Result<CrEstimate> {
    if curve.len() < 3 {
        return Err(domain("a closed polygon needs at least three vertices"));
    }
    if winding_number(curve, z) == 0 {
        return Err(domain(format!("point {z} is not inside the curve")));
    }
    let index = SegmentIndex::new(polygon_segments(curve), extent(curve) / 256.0)?;
    estimate_log_cr_segments(&index, z, n_walks, delta_stop, rng)
}

/// Discretisation of the capacity solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityConfig {
    /// Panels per polygon edge on the coarse level (the fine level doubles it).
    pub panels_per_edge: usize,
    /// Upper bound on the fine-level unknown count.
    pub max_unknowns: usize,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        CapacityConfig { panels_per_edge: 16, max_unknowns: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    pub log_cap: f64,
    pub err_est: f64,
}

/// `int_0^len log|x - y(t)| dt` over the segment from `a` to `b`.
fn panel_log_integral(x: Complex64, a: Complex64, b: Complex64) -> f64 {
    let len = (b - a).norm();
    let u = (b - a) / len;
    let w = (x - a) * u.conj();
    let (s0, d) = (w.re, w.im.abs());
    let f = |s: f64| -> f64 {
        if d < 1e-300 {
            if s == 0.0 {
                0.0
            } else {
                s * s.abs().ln() - s
            }
        } else {
            0.5 * s * (s * s + d * d).ln() - s + d * (s / d).atan()
        }
    };
    f(len - s0) - f(-s0)
}

fn graded_panels(curve: &[Complex64], closed: bool, per_edge: usize) -> Vec<(Complex64, Complex64)> {
    let edges = if closed { curve.len() } else { curve.len() - 1 };
    let mut out = Vec::with_capacity(edges * per_edge);
    for e in 0..edges {
        let (a, b) = (curve[e], curve[(e + 1) % curve.len()]);
        let node = |k: usize| a + (b - a) * (0.5 - 0.5 * (PI * k as f64 / per_edge as f64).cos());
        for k in 0..per_edge {
            out.push((node(k), node(k + 1)));
        }
    }
    out
}

/// Robin constant of a polyline from the single-layer equation
/// `int log|x - y| sigma(y) ds(y) = log cap` with unit total charge.
fn log_cap_level(panels: &[(Complex64, Complex64)]) -> Result<f64> {
    let n = panels.len();
    let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..n {
        let x = 0.5 * (panels[i].0 + panels[i].1);
        for (j, &(p, q)) in panels.iter().enumerate() {
            a[(i, j)] = panel_log_integral(x, p, q);
        }
        a[(i, n)] = -1.0;
        a[(n, i)] = (panels[i].1 - panels[i].0).norm();
    }
    let mut rhs = DVector::<f64>::zeros(n + 1);
    rhs[n] = 1.0;
    let sol = a.lu().solve(&rhs).ok_or_else(|| Error::SolverFailure("singular capacity system".into()))?;
    let v = sol[n];
    if !v.is_finite() {
        return Err(Error::SolverFailure("capacity solve produced a non-finite value".into()));
    }
    Ok(v)
}

/// Logarithmic capacity of a polygon (`closed`) or polyline, extrapolated
/// from two panel levels assuming second-order convergence.
pub fn estimate_log_capacity(curve: &[Complex64], closed: bool, cfg: &CapacityConfig) -> Result<CapacityEstimate> {
    if curve.len() < if closed { 3 } else { 2 } {
        return Err(domain("not enough vertices"));
    }
    if cfg.panels_per_edge < 1 {
        return Err(domain("need at least one panel per edge"));
    }
    let edges = if closed { curve.len() } else { curve.len() - 1 };
    if edges * 2 * cfg.panels_per_edge > cfg.max_unknowns {
        return Err(Error::SolverFailure(format!(
            "{} unknowns exceed the limit {}",
            edges * 2 * cfg.panels_per_edge,
            cfg.max_unknowns
        )));
    }
    let coarse = log_cap_level(&graded_panels(curve, closed, cfg.panels_per_edge))?;
    let fine = log_cap_level(&graded_panels(curve, closed, 2 * cfg.panels_per_edge))?;
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    Ok(CapacityEstimate { log_cap: extrapolated, err_est: (fine - extrapolated).abs() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThicknessEstimate {
    pub theta: f64,
    pub stderr: f64,
    pub log_cr: CrEstimate,
    pub log_cap: CapacityEstimate,
}

/// `-log CR(eta, 0) + log cap(eta)` for a polygon surrounding the origin.
pub fn electrical_thickness_estimate<R: Rng + ?Sized>(
    curve: &[Complex64],
    n_walks: u64,
    delta_stop: f64,
    cap: &CapacityConfig,
    rng: &mut R,
) -> Result<ThicknessEstimate> {
    let log_cr = estimate_log_cr(curve, Complex64::new(0.0, 0.0), n_walks, delta_stop, rng)?;
    let log_cap = estimate_log_capacity(curve, true, cap)?;
    Ok(ThicknessEstimate {
        theta: log_cap.log_cap - log_cr.log_value,
        stderr: (log_cr.stderr.powi(2) + log_cap.err_est.powi(2)).sqrt(),
        log_cr,
        log_cap,
    })
}

/// Regular `n`-gon inscribed in the circle `|z - c| = r`.
pub fn circle_polygon(c: Complex64, r: f64, n: usize) -> Vec<Complex64> {
    (0..n).map(|k| c + Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64)).collect()
}
