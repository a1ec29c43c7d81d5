//! Dense scalar volumes shared by the transform, storage and interpolation code.
//!
//! Every volume uses the same linear layout: `x` varies fastest, then `y`,
//! then `z` (z-major), so the voxel `(x, y, z)` lives at
//! `(z * ny + y) * nx + x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Voxel counts along x, y and z.
pub type Dims3 = [usize; 3];

#[inline]
pub fn voxel_count(dims: Dims3) -> usize {
    dims[0] * dims[1] * dims[2]
}

#[inline]
pub fn linear_index(dims: Dims3, [x, y, z]: [usize; 3]) -> usize {
    (z * dims[1] + y) * dims[0] + x
}

#[inline]
pub fn unlinear_index(dims: Dims3, idx: usize) -> [usize; 3] {
    let x = idx % dims[0];
    let y = (idx / dims[0]) % dims[1];
    let z = idx / (dims[0] * dims[1]);
    [x, y, z]
}

/// Placement of a voxel lattice in world coordinates (meters).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub origin: [f64; 3],
    pub voxel_size: f64,
}

impl Default for GridGeometry {
    fn default() -> Self {
        Self { origin: [0.0; 3], voxel_size: 1.0 }
    }
}

impl GridGeometry {
    pub fn new(origin: [f64; 3], voxel_size: f64) -> Result<Self> {
        if !(voxel_size > 0.0) || !voxel_size.is_finite() {
            return Err(Error::Config(format!("voxel size must be positive and finite, got {voxel_size}")));
        }
        if origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("origin must be finite".into()));
        }
        Ok(Self { origin, voxel_size })
    }
}

/// A single-channel scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarVolume {
    dims: Dims3,
    data: Vec<f64>,
}

impl ScalarVolume {
    pub fn new(dims: Dims3, data: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Shape(format!("volume dims must be positive, got {dims:?}")));
        }
        if data.len() != voxel_count(dims) {
            return Err(Error::Shape(format!(
                "volume {dims:?} needs {} values, got {}",
                voxel_count(dims),
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Dims3) -> Self {
        Self { dims, data: vec![0.0; voxel_count(dims)] }
    }

    pub fn dims(&self) -> Dims3 {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, at: [usize; 3]) -> f64 {
        self.data[linear_index(self.dims, at)]
    }
}

/// A named multi-channel volume, e.g. a reconstruction or a per-class score field.
#[derive(Clone, Debug, PartialEq)]
pub struct Volume {
    dims: Dims3,
    geometry: GridGeometry,
    names: Vec<String>,
    channels: Vec<Vec<f64>>,
}

impl Volume {
    pub fn new(dims: Dims3, geometry: GridGeometry, names: Vec<String>, channels: Vec<Vec<f64>>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Shape(format!("volume dims must be positive, got {dims:?}")));
        }
        if names.len() != channels.len() {
            return Err(Error::Shape(format!("{} names for {} channels", names.len(), channels.len())));
        }
        let n = voxel_count(dims);
        if let Some(bad) = channels.iter().position(|c| c.len() != n) {
            return Err(Error::Shape(format!("channel {bad} has {} values, expected {n}", channels[bad].len())));
        }
        Ok(Self { dims, geometry, names, channels })
    }

    pub fn dims(&self) -> Dims3 {
        self.dims
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.channels[i].as_slice())
    }
}
