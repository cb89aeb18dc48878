use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;

use super::grid::{vertex_pos, GridDomain};
use super::soup::LoopSoupSample;

/// A loop cluster with the outer boundary of its filled hull.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOutline {
    pub member_loops: Vec<usize>,
    /// Counter-clockwise, without repeating the first vertex; may touch itself
    /// at pinch points but never crosses. Empty when the cluster encloses no face.
    pub outer_boundary: Vec<Complex64>,
    /// Faces of the filled hull, in the indexing of the lattice.
    pub hull_faces: Vec<u32>,
    pub resolution: usize,
}

impl ClusterOutline {
    /// Winding-number test against the outer boundary.
    pub fn contains(&self, z: Complex64) -> bool {
        winding_number(&self.outer_boundary, z) != 0
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.outer_boundary)
    }

    /// Boundary edges as segments.
    pub fn segments(&self) -> Vec<(Complex64, Complex64)> {
        let p = &self.outer_boundary;
        (0..p.len()).map(|k| (p[k], p[(k + 1) % p.len()])).collect()
    }
}

pub fn polygon_area(p: &[Complex64]) -> f64 {
    let n = p.len();
    0.5 * (0..n).map(|k| p[k].re * p[(k + 1) % n].im - p[(k + 1) % n].re * p[k].im).sum::<f64>()
}

pub fn winding_number(p: &[Complex64], z: Complex64) -> i32 {
    let n = p.len();
    let mut w = 0;
    for k in 0..n {
        let (a, b) = (p[k] - z, p[(k + 1) % n] - z);
        let cross = a.re * b.im - a.im * b.re;
        if a.im <= 0.0 {
            if b.im > 0.0 && cross > 0.0 {
                w += 1;
            }
        } else if b.im <= 0.0 && cross < 0.0 {
            w -= 1;
        }
    }
    w
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb) as usize] = ra.min(rb);
        }
    }
}

/// Loop index -> cluster root, clusters being loops connected through shared vertices.
pub(crate) fn cluster_roots(sample: &LoopSoupSample) -> Vec<u32> {
    let n = sample.resolution;
    let mut owner = vec![u32::MAX; n * n];
    let mut uf = UnionFind::new(sample.loops.len());
    for (k, l) in sample.loops.iter().enumerate() {
        for &v in l {
            let o = &mut owner[v as usize];
            if *o == u32::MAX {
                *o = k as u32;
            } else {
                uf.union(*o, k as u32);
            }
        }
    }
    (0..sample.loops.len() as u32).map(|k| uf.find(k)).collect()
}

/// Lattice edges as wall bitmaps: `horiz[j * (n-1) + i]` joins `(i, j)` and
/// `(i+1, j)`; `vert[j * n + i]` joins `(i, j)` and `(i, j+1)`.
pub(crate) struct Walls {
    n: usize,
    horiz: Vec<bool>,
    vert: Vec<bool>,
}

impl Walls {
    pub(crate) fn new(n: usize) -> Self {
        Walls { n, horiz: vec![false; (n - 1) * n], vert: vec![false; n * (n - 1)] }
    }

    pub(crate) fn add_loop(&mut self, l: &[u32]) {
        let n = self.n as u32;
        for k in 0..l.len() {
            let (a, b) = (l[k].min(l[(k + 1) % l.len()]), l[k].max(l[(k + 1) % l.len()]));
            if b == a + 1 {
                self.horiz[((a / n) * (n - 1) + a % n) as usize] = true;
            } else {
                self.vert[a as usize] = true;
            }
        }
    }

    /// Faces reachable from outside the domain without crossing a wall.
    pub(crate) fn exterior(&self, dom: &GridDomain) -> Vec<bool> {
        let n = self.n;
        let m = n - 1;
        let mut seen = vec![false; m * m];
        let mut queue = VecDeque::new();
        for f in 0..m * m {
            let (i, j) = (f % m, f / m);
            if !dom.faces[f] || i == 0 || j == 0 || i + 1 == m || j + 1 == m {
                seen[f] = true;
                queue.push_back(f);
            }
        }
        while let Some(f) = queue.pop_front() {
            let (i, j) = (f % m, f / m);
            // face (i, j) has bottom wall horiz(i, j), top horiz(i, j+1),
            // left vert(i, j) and right vert(i+1, j)
            let mut go = |g: usize, wall: bool| {
                if !wall && !seen[g] {
                    seen[g] = true;
                    queue.push_back(g);
                }
            };
            if j > 0 {
                go(f - m, self.horiz[j * m + i]);
            }
            if j + 1 < m {
                go(f + m, self.horiz[(j + 1) * m + i]);
            }
            if i > 0 {
                go(f - 1, self.vert[j * n + i]);
            }
            if i + 1 < m {
                go(f + 1, self.vert[j * n + i + 1]);
            }
        }
        seen
    }
}

/// Face-connected component of the non-exterior faces containing `start`.
fn hull_component(exterior: &[bool], m: usize, start: usize) -> Vec<u32> {
    let mut seen = vec![false; m * m];
    let mut out = vec![start as u32];
    seen[start] = true;
    let mut k = 0;
    while k < out.len() {
        let f = out[k] as usize;
        k += 1;
        let (i, j) = (f % m, f / m);
        let mut nb = [usize::MAX; 4];
        if i > 0 {
            nb[0] = f - 1;
        }
        if i + 1 < m {
            nb[1] = f + 1;
        }
        if j > 0 {
            nb[2] = f - m;
        }
        if j + 1 < m {
            nb[3] = f + m;
        }
        for g in nb {
            if g != usize::MAX && !exterior[g] && !seen[g] {
                seen[g] = true;
                out.push(g as u32);
            }
        }
    }
    out
}

/// Directed boundary edges of a face set (face on the left), as vertex pairs.
fn boundary_edges(faces: &[u32], m: usize) -> Vec<(u32, u32)> {
    let n = m + 1;
    let mut member = vec![false; m * m];
    for &f in faces {
        member[f as usize] = true;
    }
    let has = |i: isize, j: isize| {
        i >= 0 && j >= 0 && (i as usize) < m && (j as usize) < m && member[j as usize * m + i as usize]
    };
    let v = |i: usize, j: usize| (j * n + i) as u32;
    let mut out = Vec::new();
    for &f in faces {
        let (i, j) = ((f as usize) % m, (f as usize) / m);
        let (ii, jj) = (i as isize, j as isize);
        if !has(ii, jj - 1) {
            out.push((v(i, j), v(i + 1, j)));
        }
        if !has(ii + 1, jj) {
            out.push((v(i + 1, j), v(i + 1, j + 1)));
        }
        if !has(ii, jj + 1) {
            out.push((v(i + 1, j + 1), v(i, j + 1)));
        }
        if !has(ii - 1, jj) {
            out.push((v(i, j + 1), v(i, j)));
        }
    }
    out
}

/// Chains directed boundary edges into one closed walk, turning as far right
/// as possible at pinch vertices so the walk stays on the outer face.
fn trace(edges: &[(u32, u32)], n: usize) -> Vec<Complex64> {
    if edges.is_empty() {
        return Vec::new();
    }
    let mut out_edges: HashMap<u32, Vec<u32>> = HashMap::new();
    for &(a, b) in edges {
        out_edges.entry(a).or_default().push(b);
    }
    let dir = |a: u32, b: u32| -> (i64, i64) {
        let (a, b) = (a as i64, b as i64);
        let n = n as i64;
        (b % n - a % n, b / n - a / n)
    };
    let start = *edges.iter().min().unwrap();
    let mut poly = Vec::with_capacity(edges.len());
    let (mut a, mut b) = start;
    loop {
        poly.push(vertex_pos(n, a as usize % n, a as usize / n));
        let (dx, dy) = dir(a, b);
        let cands = &out_edges[&b];
        // preference: right turn, straight, left turn
        let pick = [(dy, -dx), (dx, dy), (-dy, dx)]
            .iter()
            .find_map(|&d| cands.iter().copied().find(|&c| dir(b, c) == d))
            .expect("boundary walk has an outgoing edge");
        a = b;
        b = pick;
        if (a, b) == start || poly.len() > edges.len() {
            break;
        }
    }
    poly
}

fn outline(member_loops: Vec<usize>, hull: Vec<u32>, n: usize) -> ClusterOutline {
    let edges = boundary_edges(&hull, n - 1);
    ClusterOutline { member_loops, outer_boundary: trace(&edges, n), hull_faces: hull, resolution: n }
}

/// Partitions the loops into clusters and traces each cluster's outer boundary.
pub fn cluster_loops(sample: &LoopSoupSample) -> Vec<ClusterOutline> {
    let n = sample.resolution;
    let m = n - 1;
    let roots = cluster_roots(sample);
    let mut groups: HashMap<u32, Vec<usize>> = HashMap::new();
    for (k, &r) in roots.iter().enumerate() {
        groups.entry(r).or_default().push(k);
    }
    let mut keys: Vec<u32> = groups.keys().copied().collect();
    keys.sort_unstable();
    let full = GridDomain::from_faces(n, vec![true; m * m]).expect("valid resolution");
    keys.into_iter()
        .map(|r| {
            let members = groups.remove(&r).unwrap();
            let mut walls = Walls::new(n);
            for &k in &members {
                walls.add_loop(&sample.loops[k]);
            }
            let ext = walls.exterior(&full);
            let mut hull = Vec::new();
            let mut seen = vec![false; m * m];
            for &k in &members {
                for &v in &sample.loops[k] {
                    let (i, j) = (v as usize % n, v as usize / n);
                    for (fi, fj) in [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)] {
                        let f = fj * m + fi;
                        if !ext[f] && !seen[f] {
                            for g in hull_component(&ext, m, f) {
                                seen[g as usize] = true;
                                hull.push(g);
                            }
                        }
                    }
                }
            }
            hull.sort_unstable();
            outline(members, hull, n)
        })
        .collect()
}

/// Among outlines surrounding `z`, the one not surrounded by another.
pub fn outermost_loop_around(clusters: &[ClusterOutline], z: Complex64) -> Option<&ClusterOutline> {
    clusters.iter().filter(|c| c.contains(z)).max_by(|a, b| a.area().total_cmp(&b.area()))
}

/// Outermost cluster around the face containing `z`, found with one flood
/// fill over all loops at once.
pub(crate) fn outermost_around_point(
    sample: &LoopSoupSample,
    dom: &GridDomain,
    z: Complex64,
) -> Option<ClusterOutline> {
    let n = sample.resolution;
    let m = n - 1;
    let fz = dom.face_at(z)?;
    let mut walls = Walls::new(n);
    for l in &sample.loops {
        walls.add_loop(l);
    }
    let ext = walls.exterior(dom);
    if ext[fz] {
        return None;
    }
    let hull = hull_component(&ext, m, fz);
    let edges = boundary_edges(&hull, m);
    // every boundary edge lies on a loop of the surrounding cluster
    let (a, _) = edges[0];
    let roots = cluster_roots(sample);
    let root = sample.loops.iter().position(|l| l.contains(&a)).map(|k| roots[k])?;
    let members = (0..sample.loops.len()).filter(|&k| roots[k] == root).collect();
    let mut hull = hull;
    hull.sort_unstable();
    Some(outline(members, hull, n))
}
