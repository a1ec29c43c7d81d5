//! Orthonormal 4x4x4 DCT-II over non-overlapping blocks.
//!
//! Block elements are indexed `(a0, a1, a2)` along x, y, z; the frequency
//! coordinate `(u, v, w)` of a coefficient follows the same axes.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{check_block_dims, VoxelGrid};
use crate::volume::{linear_index, voxel_count, Dims3, ScalarVolume};

pub const BLOCK: usize = 4;
pub const BLOCK_LEN: usize = BLOCK * BLOCK * BLOCK;

pub type Basis = [[f64; BLOCK]; BLOCK];

/// Orthonormal length-4 DCT-II matrix: `B[k][n] = s_k cos(pi (2n+1) k / 8)`.
pub fn dct1d_basis() -> &'static Basis {
    static BASIS: OnceLock<Basis> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut b = [[0.0; BLOCK]; BLOCK];
        for (k, row) in b.iter_mut().enumerate() {
            let scale = if k == 0 { 0.5 } else { 0.5f64.sqrt() };
            for (n, v) in row.iter_mut().enumerate() {
                *v = scale * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / 8.0).cos();
            }
        }
        b
    })
}

/// 64 values of a 4x4x4 block, spatial or frequency domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block4(pub [f64; BLOCK_LEN]);

impl Default for Block4 {
    fn default() -> Self {
        Block4([0.0; BLOCK_LEN])
    }
}

impl Block4 {
    #[inline]
    pub const fn offset(a0: usize, a1: usize, a2: usize) -> usize {
        (a0 * BLOCK + a1) * BLOCK + a2
    }

    #[inline]
    pub fn get(&self, a0: usize, a1: usize, a2: usize) -> f64 {
        self.0[Self::offset(a0, a1, a2)]
    }

    #[inline]
    pub fn set(&mut self, a0: usize, a1: usize, a2: usize, v: f64) {
        self.0[Self::offset(a0, a1, a2)] = v;
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }
}

// Applies `m` (or its transpose) along one axis of the block.
fn transform_axis(src: &Block4, m: &Basis, axis: usize, transpose: bool) -> Block4 {
    let mut dst = Block4::default();
    for i in 0..BLOCK {
        for j in 0..BLOCK {
            for k in 0..BLOCK {
                let mut acc = 0.0;
                for n in 0..BLOCK {
                    let (src_idx, coeff) = match axis {
                        0 => (Block4::offset(n, j, k), if transpose { m[n][i] } else { m[i][n] }),
                        1 => (Block4::offset(i, n, k), if transpose { m[n][j] } else { m[j][n] }),
                        _ => (Block4::offset(i, j, n), if transpose { m[n][k] } else { m[k][n] }),
                    };
                    acc += coeff * src.0[src_idx];
                }
                dst.set(i, j, k, acc);
            }
        }
    }
    dst
}

pub fn forward_block(b: &Block4) -> Block4 {
    let m = dct1d_basis();
    let t = transform_axis(b, m, 0, false);
    let t = transform_axis(&t, m, 1, false);
    let mut out = transform_axis(&t, m, 2, false);
    // DC is the block sum scaled by (1/2)^3; take it directly so it is exact.
    out.0[0] = b.sum() * 0.125;
    out
}

pub fn inverse_block(b: &Block4) -> Block4 {
    let m = dct1d_basis();
    let t = transform_axis(b, m, 0, true);
    let t = transform_axis(&t, m, 1, true);
    transform_axis(&t, m, 2, true)
}

/// A volume cut into 4x4x4 blocks, blocks laid out z-major like voxels.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockedVolume {
    block_dims: Dims3,
    blocks: Vec<Block4>,
}

impl BlockedVolume {
    pub fn new(block_dims: Dims3, blocks: Vec<Block4>) -> Result<Self> {
        if block_dims.contains(&0) {
            return Err(Error::Shape(format!("block dims must be positive, got {block_dims:?}")));
        }
        if blocks.len() != voxel_count(block_dims) {
            return Err(Error::Shape(format!("{} blocks do not fill a {block_dims:?} block lattice", blocks.len())));
        }
        Ok(Self { block_dims, blocks })
    }

    /// Builds a lattice from a flat block list whose count must be a perfect cube.
    pub fn from_cubic(blocks: Vec<Block4>) -> Result<Self> {
        let n = blocks.len();
        let side = (n as f64).cbrt().round() as usize;
        if side == 0 || side * side * side != n {
            return Err(Error::Shape(format!("{n} blocks is not a cubic block count")));
        }
        Self::new([side; 3], blocks)
    }

    pub fn block_dims(&self) -> Dims3 {
        self.block_dims
    }

    /// Voxel dims of the spatial volume this lattice covers.
    pub fn voxel_dims(&self) -> Dims3 {
        self.block_dims.map(|d| d * BLOCK)
    }

    pub fn blocks(&self) -> &[Block4] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Block4> {
        self.blocks
    }
}

fn gather_block(vol: &ScalarVolume, bpos: [usize; 3]) -> Block4 {
    let mut b = Block4::default();
    for i in 0..BLOCK {
        for j in 0..BLOCK {
            for k in 0..BLOCK {
                let at = [bpos[0] * BLOCK + i, bpos[1] * BLOCK + j, bpos[2] * BLOCK + k];
                b.set(i, j, k, vol.get(at));
            }
        }
    }
    b
}

/// Forward transform of every block of a scalar volume.
pub fn forward_volume(vol: &ScalarVolume) -> Result<BlockedVolume> {
    check_block_dims(vol.dims())?;
    let block_dims = vol.dims().map(|d| d / BLOCK);
    let blocks = (0..voxel_count(block_dims))
        .into_par_iter()
        .map(|bi| forward_block(&gather_block(vol, crate::volume::unlinear_index(block_dims, bi))))
        .collect();
    BlockedVolume::new(block_dims, blocks)
}

/// Forward transform of one grid feature (`occupancy` or an attribute name).
pub fn forward_grid(grid: &VoxelGrid, feature: &str) -> Result<BlockedVolume> {
    let data = grid.feature(feature)?;
    forward_volume(&ScalarVolume::new(grid.dims(), data)?)
}

/// Inverse transform of every block, reassembled into the spatial layout.
pub fn inverse_grid(blocked: &BlockedVolume) -> Result<ScalarVolume> {
    let block_dims = blocked.block_dims();
    let dims = blocked.voxel_dims();
    let spatial: Vec<Block4> = blocked.blocks().par_iter().map(inverse_block).collect();
    let mut out = ScalarVolume::zeros(dims);
    let data = out.data_mut();
    for (bi, b) in spatial.iter().enumerate() {
        let bpos = crate::volume::unlinear_index(block_dims, bi);
        for i in 0..BLOCK {
            for j in 0..BLOCK {
                for k in 0..BLOCK {
                    let at = [bpos[0] * BLOCK + i, bpos[1] * BLOCK + j, bpos[2] * BLOCK + k];
                    data[linear_index(dims, at)] = b.get(i, j, k);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_block(rng: &mut StdRng) -> Block4 {
        let mut b = Block4::default();
        for v in &mut b.0 {
            *v = rng.random_range(-10.0..10.0);
        }
        b
    }

    // Direct triple-sum definition, no separability.
    fn naive_forward(b: &Block4) -> Block4 {
        let m = dct1d_basis();
        let mut out = Block4::default();
        for u in 0..4 {
            for v in 0..4 {
                for w in 0..4 {
                    let mut acc = 0.0;
                    for x in 0..4 {
                        for y in 0..4 {
                            for z in 0..4 {
                                acc += m[u][x] * m[v][y] * m[w][z] * b.get(x, y, z);
                            }
                        }
                    }
                    out.set(u, v, w, acc);
                }
            }
        }
        out
    }

    #[test]
    fn basis_rows() {
        let b = dct1d_basis();
        assert_eq!(b[0], [0.5; 4]);
        assert!((b[1][0] - 0.5f64.sqrt() * (std::f64::consts::PI / 8.0).cos()).abs() < 1e-15);
        assert!((b[1][0] - 0.653281).abs() < 1e-6);
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..4).map(|n| b[i][n] * b[j][n]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_and_zero_blocks() {
        let ones = forward_block(&Block4([1.0; 64]));
        assert!((ones.get(0, 0, 0) - 8.0).abs() < 1e-12);
        assert!(ones.0[1..].iter().all(|v| v.abs() < 1e-12));
        assert_eq!(forward_block(&Block4::default()), Block4::default());

        let mut dc = Block4::default();
        dc.set(0, 0, 0, 8.0);
        assert!(inverse_block(&dc).0.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn impulse_expands_separably() {
        let b = dct1d_basis();
        let mut imp = Block4::default();
        imp.set(1, 0, 0, 1.0);
        let s = inverse_block(&imp);
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    assert!((s.get(x, y, z) - b[1][x] * 0.5 * 0.5).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn matches_naive_and_preserves_energy() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let x = random_block(&mut rng);
            let f = forward_block(&x);
            let naive = naive_forward(&x);
            for (a, b) in f.0.iter().zip(&naive.0) {
                assert!((a - b).abs() < 1e-9);
            }
            assert!((x.energy() - f.energy()).abs() < 1e-9);
            let back = inverse_block(&f);
            for (a, b) in back.0.iter().zip(&x.0) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn grid_shapes() {
        let ones = ScalarVolume::new([32; 3], vec![1.0; 32 * 32 * 32]).unwrap();
        let f = forward_volume(&ones).unwrap();
        assert_eq!(f.block_dims(), [8, 8, 8]);
        assert_eq!(f.blocks().len(), 512);
        for b in f.blocks() {
            assert!((b.get(0, 0, 0) - 8.0).abs() < 1e-12);
            assert!(b.0[1..].iter().all(|v| v.abs() < 1e-12));
        }
        let big = forward_volume(&ScalarVolume::zeros([80; 3])).unwrap();
        assert_eq!(big.block_dims(), [20, 20, 20]);
        assert!(forward_volume(&ScalarVolume::zeros([6, 8, 8])).is_err());
    }

    #[test]
    fn inverse_grid_round_trip_and_block_means() {
        let mut rng = StdRng::seed_from_u64(11);
        let dims = [8, 12, 4];
        let data: Vec<f64> = (0..voxel_count(dims)).map(|_| rng.random_range(-1.0..1.0)).collect();
        let vol = ScalarVolume::new(dims, data).unwrap();
        let f = forward_volume(&vol).unwrap();
        let back = inverse_grid(&f).unwrap();
        for (a, b) in back.data().iter().zip(vol.data()) {
            assert!((a - b).abs() < 1e-9);
        }

        let dc_only: Vec<Block4> = f
            .blocks()
            .iter()
            .map(|b| {
                let mut d = Block4::default();
                d.0[0] = b.0[0];
                d
            })
            .collect();
        let flat = inverse_grid(&BlockedVolume::new(f.block_dims(), dc_only).unwrap()).unwrap();
        for idx in 0..voxel_count(dims) {
            let [x, y, z] = crate::volume::unlinear_index(dims, idx);
            let (bx, by, bz) = (x / 4 * 4, y / 4 * 4, z / 4 * 4);
            let mut mean = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        mean += vol.get([bx + i, by + j, bz + k]);
                    }
                }
            }
            mean /= 64.0;
            assert!((flat.data()[idx] - mean).abs() < 1e-9);
        }

        let zero = inverse_grid(&forward_volume(&ScalarVolume::zeros([4; 3])).unwrap()).unwrap();
        assert!(zero.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn malformed_block_counts() {
        assert!(BlockedVolume::new([2, 2, 2], vec![Block4::default(); 7]).is_err());
        assert!(BlockedVolume::from_cubic(vec![Block4::default(); 9]).is_err());
        assert_eq!(BlockedVolume::from_cubic(vec![Block4::default(); 27]).unwrap().block_dims(), [3, 3, 3]);
    }
}
