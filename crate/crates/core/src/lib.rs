//! Frequency-domain inputs for 3D CNNs on voxelized point clouds.
//!
//! Pipeline: [`grid::voxelize`] a point cloud, transform each feature with a
//! blockwise 4x4x4 DCT ([`freqpack::transform_grid`]), normalize with
//! population statistics ([`freqpack::fit_stats`]), then keep the channels a
//! [`report::SpectralBiasReport`] ranks highest ([`select::select_top_n`],
//! [`select::apply`]). [`costmodel`] estimates what the smaller input saves
//! and [`pointmap`] carries voxel predictions back to points.

pub mod costmodel;
pub mod dct3;
pub mod error;
pub mod freqpack;
pub mod grid;
pub mod pointmap;
pub mod report;
pub mod select;
pub mod store;
pub mod volume;

pub use error::{Error, Result, StoreError};
pub use freqpack::{ChannelDescriptor, ChannelStats, FrequencyTensor};
pub use grid::{PointCloud, VoxelGrid};
pub use report::SpectralBiasReport;
pub use select::{ApplyMode, SelectionMap, SelectionPolicy};
pub use volume::{GridGeometry, Volume};
