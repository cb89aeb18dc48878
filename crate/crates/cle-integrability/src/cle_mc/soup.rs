use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::grid::GridDomain;
use crate::error::{domain, Error, Result};

/// Loops of a random-walk loop soup, each stored as its vertex sequence
/// starting at the root (the closing return to the root is implicit).
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSoupSample {
    pub resolution: usize,
    pub loops: Vec<Vec<u32>>,
    pub intensity: f64,
    pub min_length: usize,
    pub seed: u64,
}

impl LoopSoupSample {
    pub fn total_length(&self) -> usize {
        self.loops.iter().map(Vec::len).sum()
    }

    /// Superposition of two samples on the same lattice.
    pub fn union(&self, other: &LoopSoupSample) -> Result<LoopSoupSample> {
        if self.resolution != other.resolution {
            return Err(domain("samples live on different lattices"));
        }
        let mut loops = self.loops.clone();
        loops.extend(other.loops.iter().cloned());
        Ok(LoopSoupSample {
            resolution: self.resolution,
            loops,
            intensity: self.intensity + other.intensity,
            min_length: self.min_length.min(other.min_length),
            seed: self.seed,
        })
    }

    /// Compact snapshot: magic, resolution, intensity, min length, seed and
    /// loop count, then per loop its length and the zigzag varint deltas of
    /// consecutive vertex indices.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_all(&(self.resolution as u32).to_le_bytes())?;
        w.write_all(&self.intensity.to_le_bytes())?;
        w.write_all(&(self.min_length as u32).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.loops.len() as u64).to_le_bytes())?;
        let mut buf = Vec::new();
        for l in &self.loops {
            write_varint(&mut buf, l.len() as u64);
            let mut prev = 0i64;
            for &v in l {
                write_varint(&mut buf, zigzag(v as i64 - prev));
                prev = v as i64;
            }
        }
        w.write_all(&buf)
    }

    pub fn read_binary<R: Read>(mut r: R) -> std::io::Result<Self> {
        let bad = |m: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, m.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(bad("not a loop soup snapshot"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let resolution = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let intensity = f64::from_le_bytes(b8);
        r.read_exact(&mut b4)?;
        let min_length = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8);
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        let mut pos = 0;
        let mut next = || read_varint(&rest, &mut pos).ok_or_else(|| bad("truncated snapshot"));
        let mut loops = Vec::new();
        for _ in 0..count {
            let len = next()? as usize;
            let mut l = Vec::with_capacity(len);
            let mut prev = 0i64;
            for _ in 0..len {
                prev += unzigzag(next()?);
                l.push(u32::try_from(prev).map_err(|_| bad("vertex index out of range"))?);
            }
            loops.push(l);
        }
        Ok(LoopSoupSample { resolution, loops, intensity, min_length, seed })
    }
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"RWLS";

fn zigzag(x: i64) -> u64 {
    ((x << 1) ^ (x >> 63)) as u64
}

fn unzigzag(u: u64) -> i64 {
    ((u >> 1) as i64) ^ -((u & 1) as i64)
}

fn write_varint(buf: &mut Vec<u8>, mut u: u64) {
    while u >= 0x80 {
        buf.push((u as u8) | 0x80);
        u >>= 7;
    }
    buf.push(u as u8);
}

fn read_varint(buf: &[u8], pos: &mut usize) -> Option<u64> {
    let mut out = 0u64;
    for shift in (0..64).step_by(7) {
        let b = *buf.get(*pos)?;
        *pos += 1;
        out |= ((b & 0x7f) as u64) << shift;
        if b < 0x80 {
            return Some(out);
        }
    }
    None
}

/// Mass `4^{-2k} N_{2k} / (2k)` of rooted loops of length `2k` at a vertex of
/// `Z^2`, where `N_{2k} = binom(2k, k)^2`.
pub fn rooted_loop_mass(length: usize) -> f64 {
    if length < 2 || length % 2 != 0 {
        return 0.0;
    }
    let k = length / 2;
    let mut b = 1.0;
    for i in 1..=k {
        b *= (2 * i - 1) as f64 / (2 * i) as f64;
    }
    b * b / length as f64
}

/// Random-walk loop soup sampler for loops of length at most `2 * max_half_length`.
///
/// Rooted loops are drawn from `c * 4^{-|l|} / |l|` at every inside vertex;
/// forgetting the root gives the unrooted soup.
#[derive(Debug, Clone)]
pub struct LoopSoupSampler {
    /// Cumulative rooted masses by half-length, starting at length 4.
    cdf: Vec<f64>,
    event_budget: u64,
}

impl LoopSoupSampler {
    pub fn new(max_half_length: usize) -> Result<Self> {
        if max_half_length < 2 {
            return Err(domain("loops of length 4 must be allowed"));
        }
        let mut cdf = Vec::with_capacity(max_half_length - 1);
        let mut b = 0.375; // binom(4, 2) / 16
        let mut acc = 0.0;
        for k in 2..=max_half_length {
            if k > 2 {
                b *= (2 * k - 1) as f64 / (2 * k) as f64;
            }
            acc += b * b / (2 * k) as f64;
            cdf.push(acc);
        }
        Ok(LoopSoupSampler { cdf, event_budget: 1 << 34 })
    }

    /// Default length cap for a domain: `resolution^2` steps in each direction.
    pub fn for_resolution(resolution: usize) -> Result<Self> {
        Self::new((resolution * resolution).max(2))
    }

    pub fn with_event_budget(mut self, budget: u64) -> Self {
        self.event_budget = budget;
        self
    }

    /// Total rooted mass per vertex over the admitted lengths.
    pub fn mass_per_vertex(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        dom: &GridDomain,
        c: f64,
        min_length: usize,
        seed: u64,
        rng: &mut R,
    ) -> Result<LoopSoupSample> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain(format!("intensity must be positive, got {c}")));
        }
        if min_length < 4 || min_length % 2 != 0 {
            return Err(domain(format!("min_length must be even and at least 4, got {min_length}")));
        }
        let roots: Vec<u32> =
            dom.inside_mask.iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v as u32).collect();
        let mut out = LoopSoupSample { resolution: dom.resolution, loops: Vec::new(), intensity: c, min_length, seed };
        if roots.is_empty() {
            return Ok(out);
        }
        let mean = c * self.mass_per_vertex() * roots.len() as f64;
        let count = Poisson::new(mean).map_err(|e| Error::SolverFailure(e.to_string()))?.sample(rng) as u64;
        let total = self.mass_per_vertex();
        let n = dom.resolution as i64;
        let mut events = 0u64;
        let mut verts: Vec<u32> = Vec::new();
        for _ in 0..count {
            let root = roots[rng.random_range(0..roots.len())];
            let u: f64 = rng.random::<f64>() * total;
            let half = self.cdf.partition_point(|&x| x < u).min(self.cdf.len() - 1) + 2;
            events += 2 * half as u64;
            if events > self.event_budget {
                return Err(Error::BudgetExceeded { budget: self.event_budget });
            }
            // a bridge on Z^2 is a pair of independent +-1 bridges in the
            // rotated coordinates x + y and x - y
            verts.clear();
            verts.push(root);
            let (mut x, mut y) = ((root as i64) % n, (root as i64) / n);
            let (mut up_a, mut up_b) = (half, half);
            let mut left = 2 * half;
            let mut ok = true;
            while left > 1 {
                let a = if rng.random_range(0..left) < up_a {
                    up_a -= 1;
                    1
                } else {
                    -1
                };
                let b = if rng.random_range(0..left) < up_b {
                    up_b -= 1;
                    1
                } else {
                    -1
                };
                left -= 1;
                x += (a + b) / 2;
                y += (a - b) / 2;
                let v = (y * n + x) as usize;
                if x < 0 || y < 0 || x >= n || y >= n || !dom.inside_mask[v] {
                    ok = false;
                    break;
                }
                verts.push(v as u32);
            }
            if ok && 2 * half >= min_length {
                out.loops.push(verts.clone());
            }
        }
        Ok(out)
    }
}

/// One Poisson sample of `c` times the random-walk loop measure restricted to
/// loops inside the domain of length at least `min_length`.
pub fn sample_rw_loop_soup<R: Rng + ?Sized>(
    dom: &GridDomain,
    c: f64,
    min_length: usize,
    seed: u64,
    rng: &mut R,
) -> Result<LoopSoupSample> {
    LoopSoupSampler::for_resolution(dom.resolution)?.sample(dom, c, min_length, seed, rng)
}
