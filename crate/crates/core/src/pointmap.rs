//! Voxel-to-point label transfer by trilinear interpolation.
//!
//! Voxel `i` has its center at `origin + (i + 0.5) * voxel_size`. A point is
//! scored by blending the eight voxel centers around it; within half a voxel
//! of the volume faces the interpolation cell is clamped to the edge voxels.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::PointCloud;
use crate::volume::{linear_index, voxel_count, Dims3, GridGeometry, Volume};

/// Per-voxel class scores, stored voxel-major (`voxel * classes + class`).
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreVolume {
    dims: Dims3,
    geometry: GridGeometry,
    classes: usize,
    scores: Vec<f64>,
}

impl ScoreVolume {
    pub fn new(dims: Dims3, geometry: GridGeometry, classes: usize, scores: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Shape(format!("score volume dims must be positive, got {dims:?}")));
        }
        if classes == 0 {
            return Err(Error::Config("score volume needs at least one class".into()));
        }
        if scores.len() != voxel_count(dims) * classes {
            return Err(Error::Shape(format!("expected {} scores, got {}", voxel_count(dims) * classes, scores.len())));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput("scores must be finite".into()));
        }
        Ok(Self { dims, geometry, classes, scores })
    }

    /// Interprets each channel of `v` as one class.
    pub fn from_volume(v: &Volume) -> Result<Self> {
        let n = voxel_count(v.dims());
        let classes = v.channels().len();
        let mut scores = vec![0.0; n * classes];
        for (c, ch) in v.channels().iter().enumerate() {
            for (i, &s) in ch.iter().enumerate() {
                scores[i * classes + c] = s;
            }
        }
        Self::new(v.dims(), v.geometry(), classes, scores)
    }

    pub fn dims(&self) -> Dims3 {
        self.dims
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn voxel_scores(&self, voxel: usize) -> &[f64] {
        &self.scores[voxel * self.classes..(voxel + 1) * self.classes]
    }
}

/// The eight `(voxel index, weight)` pairs for a point, plus whether the
/// point lay outside the volume and fell back to its nearest voxel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weights {
    pub pairs: [(usize, f64); 8],
    pub outside: bool,
}

pub fn trilinear_weights(p: [f64; 3], v: &ScoreVolume) -> Weights {
    let GridGeometry { origin, voxel_size } = v.geometry;
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    let mut frac = [0.0f64; 3];
    let mut outside = false;
    for a in 0..3 {
        let n = v.dims[a];
        let rel = (p[a] - origin[a]) / voxel_size;
        if !(rel >= 0.0 && rel <= n as f64) {
            outside = true;
        }
        // continuous coordinate in voxel-center units
        let t = (rel - 0.5).clamp(0.0, (n - 1) as f64);
        let i0 = (t.floor() as usize).min(n.saturating_sub(2));
        lo[a] = i0;
        hi[a] = (i0 + 1).min(n - 1);
        frac[a] = if hi[a] == lo[a] { 0.0 } else { t - i0 as f64 };
    }
    if outside {
        // nearest voxel: the containing voxel of the clamped position
        let mut cell = [0usize; 3];
        for a in 0..3 {
            let rel = ((p[a] - origin[a]) / voxel_size).floor();
            cell[a] = rel.clamp(0.0, (v.dims[a] - 1) as f64) as usize;
        }
        let idx = linear_index(v.dims, cell);
        let mut pairs = [(idx, 0.0); 8];
        pairs[0].1 = 1.0;
        return Weights { pairs, outside };
    }
    let mut pairs = [(0usize, 0.0f64); 8];
    for (k, pair) in pairs.iter_mut().enumerate() {
        let mut cell = [0usize; 3];
        let mut w = 1.0;
        for a in 0..3 {
            if (k >> a) & 1 == 1 {
                cell[a] = hi[a];
                w *= frac[a];
            } else {
                cell[a] = lo[a];
                w *= 1.0 - frac[a];
            }
        }
        *pair = (linear_index(v.dims, cell), w);
    }
    Weights { pairs, outside }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Interpolated {
    /// One score vector per point.
    pub scores: Vec<Vec<f64>>,
    /// Argmax class per point; ties go to the lowest class id.
    pub labels: Vec<u32>,
    /// Points that fell outside the volume and used the nearest voxel.
    pub outside: usize,
}

pub fn argmax(scores: &[f64]) -> u32 {
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = c;
        }
    }
    best as u32
}

pub fn interpolate_scores(points: &PointCloud, v: &ScoreVolume) -> Interpolated {
    let per_point: Vec<(Vec<f64>, bool)> = points
        .points()
        .par_iter()
        .map(|&p| {
            let w = trilinear_weights(p, v);
            let mut s = vec![0.0; v.classes];
            for &(idx, weight) in &w.pairs {
                if weight != 0.0 {
                    for (acc, &x) in s.iter_mut().zip(v.voxel_scores(idx)) {
                        *acc += weight * x;
                    }
                }
            }
            (s, w.outside)
        })
        .collect();
    let outside = per_point.iter().filter(|(_, o)| *o).count();
    let labels = per_point.iter().map(|(s, _)| argmax(s)).collect();
    Interpolated { scores: per_point.into_iter().map(|(s, _)| s).collect(), labels, outside }
}
