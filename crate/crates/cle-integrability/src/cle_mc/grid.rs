use num_complex::Complex64;

use crate::error::{domain, Result};

/// Square lattice on `[-1, 1]^2` with spacing `2 / resolution`.
///
/// Vertices sit at `-1 + (i + 1/2) h`, so the origin is the centre of a face
/// when `resolution` is even. The domain is a union of closed faces; loops
/// may only visit vertices whose four faces all belong to it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    pub resolution: usize,
    /// Face membership, indexed by `j * (resolution - 1) + i`.
    pub faces: Vec<bool>,
    /// Vertices strictly inside the domain, indexed by `j * resolution + i`.
    pub inside_mask: Vec<bool>,
}

impl GridDomain {
    /// Faces whose centre lies in the open unit disk.
    pub fn unit_disk(resolution: usize) -> Result<Self> {
        Self::from_predicate(resolution, |z| z.norm_sqr() < 1.0)
    }

    pub fn from_predicate<F: Fn(Complex64) -> bool>(resolution: usize, keep: F) -> Result<Self> {
        check_resolution(resolution)?;
        let m = resolution - 1;
        let mut faces = vec![false; m * m];
        for j in 0..m {
            for i in 0..m {
                faces[j * m + i] = keep(face_centre(resolution, i, j));
            }
        }
        Self::from_faces(resolution, faces)
    }

    pub fn from_faces(resolution: usize, faces: Vec<bool>) -> Result<Self> {
        check_resolution(resolution)?;
        let m = resolution - 1;
        if faces.len() != m * m {
            return Err(domain(format!("expected {} faces, got {}", m * m, faces.len())));
        }
        let n = resolution;
        let mut inside_mask = vec![false; n * n];
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                inside_mask[j * n + i] =
                    faces[(j - 1) * m + i - 1] && faces[(j - 1) * m + i] && faces[j * m + i - 1] && faces[j * m + i];
            }
        }
        Ok(GridDomain { resolution, faces, inside_mask })
    }

    pub fn spacing(&self) -> f64 {
        2.0 / self.resolution as f64
    }

    pub fn face_count(&self) -> usize {
        self.faces.iter().filter(|&&f| f).count()
    }

    pub fn vertex(&self, v: u32) -> Complex64 {
        let n = self.resolution;
        let (i, j) = (v as usize % n, v as usize / n);
        vertex_pos(n, i, j)
    }

    /// Face containing `z`, if `z` lies in the raster.
    pub fn face_at(&self, z: Complex64) -> Option<usize> {
        let h = self.spacing();
        let m = self.resolution - 1;
        let fi = ((z.re + 1.0) / h - 0.5).floor();
        let fj = ((z.im + 1.0) / h - 0.5).floor();
        if fi < 0.0 || fj < 0.0 || fi >= m as f64 || fj >= m as f64 {
            return None;
        }
        Some(fj as usize * m + fi as usize)
    }

    /// Faces of the domain touching a face outside it.
    pub fn boundary_faces(&self) -> Vec<usize> {
        let m = self.resolution - 1;
        (0..m * m)
            .filter(|&f| {
                if !self.faces[f] {
                    return false;
                }
                let (i, j) = (f % m, f / m);
                i == 0
                    || j == 0
                    || i + 1 == m
                    || j + 1 == m
                    || !self.faces[f - 1]
                    || !self.faces[f + 1]
                    || !self.faces[f - m]
                    || !self.faces[f + m]
            })
            .collect()
    }
}

fn check_resolution(n: usize) -> Result<()> {
    if n < 4 || n % 2 != 0 || n > 1 << 14 {
        return Err(domain(format!("resolution must be even and in [4, 16384], got {n}")));
    }
    Ok(())
}

pub(crate) fn vertex_pos(n: usize, i: usize, j: usize) -> Complex64 {
    let h = 2.0 / n as f64;
    Complex64::new(-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h)
}

pub(crate) fn face_centre(n: usize, i: usize, j: usize) -> Complex64 {
    let h = 2.0 / n as f64;
    Complex64::new(-1.0 + (i as f64 + 1.0) * h, -1.0 + (j as f64 + 1.0) * h)
}
