//! Channel-wise frequency tensors.
//!
//! The 64 coefficients of every 4x4x4 block are numbered by a 3D zigzag map
//! and coefficients with the same frequency are gathered into one channel.
//! A grid with `N` features of `D^3` voxels becomes `64 * N` channels of
//! `(D/4)^3` values. Channel `attribute_index * 64 + zigzag_index` is the
//! canonical channel id.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dct3::{forward_grid, inverse_grid, Block4, BlockedVolume, BLOCK_LEN};
use crate::error::{Error, Result};
use crate::grid::VoxelGrid;
use crate::volume::{voxel_count, Dims3, GridGeometry, Volume};

/// Default guard added to the variance before normalization.
pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Bijection between zigzag index and frequency coordinate `(u, v, w)`.
///
/// Coordinates are ordered by plane `u + v + w`, then lexicographically.
#[derive(Debug, PartialEq, Eq)]
pub struct ZigzagMap {
    coords: [[u8; 3]; BLOCK_LEN],
    index: [u8; BLOCK_LEN],
}

pub fn zigzag_map() -> &'static ZigzagMap {
    static MAP: OnceLock<ZigzagMap> = OnceLock::new();
    MAP.get_or_init(|| {
        let mut all: Vec<[u8; 3]> = Vec::with_capacity(BLOCK_LEN);
        for u in 0..4u8 {
            for v in 0..4u8 {
                for w in 0..4u8 {
                    all.push([u, v, w]);
                }
            }
        }
        all.sort_by_key(|c| (c[0] + c[1] + c[2], c[0], c[1], c[2]));
        let mut coords = [[0u8; 3]; BLOCK_LEN];
        let mut index = [0u8; BLOCK_LEN];
        for (z, c) in all.into_iter().enumerate() {
            coords[z] = c;
            index[Block4::offset(c[0] as usize, c[1] as usize, c[2] as usize)] = z as u8;
        }
        ZigzagMap { coords, index }
    })
}

impl ZigzagMap {
    pub fn coord(&self, zigzag: usize) -> [u8; 3] {
        self.coords[zigzag]
    }

    pub fn index_of(&self, [u, v, w]: [u8; 3]) -> usize {
        self.index[Block4::offset(u as usize, v as usize, w as usize)] as usize
    }

    /// Offset of the coefficient inside a [`Block4`].
    pub fn block_offset(&self, zigzag: usize) -> usize {
        let [u, v, w] = self.coords[zigzag];
        Block4::offset(u as usize, v as usize, w as usize)
    }
}

/// Identity of one frequency channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelDescriptor {
    pub attribute_index: usize,
    pub zigzag_index: usize,
    pub freq_coord: [u8; 3],
}

impl ChannelDescriptor {
    pub fn new(attribute_index: usize, zigzag_index: usize) -> Self {
        Self { attribute_index, zigzag_index, freq_coord: zigzag_map().coord(zigzag_index) }
    }

    pub fn from_id(id: usize) -> Self {
        Self::new(id / BLOCK_LEN, id % BLOCK_LEN)
    }

    pub fn id(&self) -> usize {
        self.attribute_index * BLOCK_LEN + self.zigzag_index
    }
}

/// Full canonical channel table for `n_attributes` features.
pub fn canonical_channels(n_attributes: usize) -> Vec<ChannelDescriptor> {
    (0..n_attributes * BLOCK_LEN).map(ChannelDescriptor::from_id).collect()
}

/// `C x (D/4)^3` channel-major frequency data with its channel table.
///
/// The table may be a subset of the canonical channels (after compaction),
/// but `attributes` always lists every source feature.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyTensor {
    attributes: Vec<String>,
    channels: Vec<ChannelDescriptor>,
    block_dims: Dims3,
    geometry: GridGeometry,
    data: Vec<f64>,
    normalized: bool,
    stats_digest: u32,
}

impl FrequencyTensor {
    pub fn new(
        attributes: Vec<String>,
        channels: Vec<ChannelDescriptor>,
        block_dims: Dims3,
        geometry: GridGeometry,
        data: Vec<f64>,
    ) -> Result<Self> {
        if block_dims.contains(&0) {
            return Err(Error::Shape(format!("block dims must be positive, got {block_dims:?}")));
        }
        let zz = zigzag_map();
        let mut seen = vec![false; attributes.len() * BLOCK_LEN];
        for c in &channels {
            if c.attribute_index >= attributes.len() || c.zigzag_index >= BLOCK_LEN {
                return Err(Error::Config(format!("channel {c:?} outside the {}-attribute table", attributes.len())));
            }
            if zz.coord(c.zigzag_index) != c.freq_coord {
                return Err(Error::Config(format!("channel {c:?} disagrees with the zigzag map")));
            }
            if std::mem::replace(&mut seen[c.id()], true) {
                return Err(Error::Config(format!("duplicate channel id {}", c.id())));
            }
        }
        let expected = channels.len() * voxel_count(block_dims);
        if data.len() != expected {
            return Err(Error::Shape(format!("tensor needs {expected} values, got {}", data.len())));
        }
        Ok(Self { attributes, channels, block_dims, geometry, data, normalized: false, stats_digest: 0 })
    }

    /// Marks the tensor as normalized with the stats identified by `stats_digest`.
    pub fn with_normalization(mut self, normalized: bool, stats_digest: u32) -> Self {
        self.normalized = normalized;
        self.stats_digest = if normalized { stats_digest } else { 0 };
        self
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn channels(&self) -> &[ChannelDescriptor] {
        &self.channels
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Channel count of the uncompacted tensor, `64 * N_attributes`.
    pub fn full_channel_count(&self) -> usize {
        self.attributes.len() * BLOCK_LEN
    }

    pub fn block_dims(&self) -> Dims3 {
        self.block_dims
    }

    pub fn source_dims(&self) -> Dims3 {
        self.block_dims.map(|d| d * 4)
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn stats_digest(&self) -> u32 {
        self.stats_digest
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn channel_len(&self) -> usize {
        voxel_count(self.block_dims)
    }

    pub fn channel_data(&self, position: usize) -> &[f64] {
        let n = self.channel_len();
        &self.data[position * n..(position + 1) * n]
    }

    pub fn channel_data_mut(&mut self, position: usize) -> &mut [f64] {
        let n = self.channel_len();
        &mut self.data[position * n..(position + 1) * n]
    }

    /// Position of a canonical channel id in this tensor's table.
    pub fn position_of(&self, id: usize) -> Option<usize> {
        self.channels.iter().position(|c| c.id() == id)
    }

    pub fn is_canonical(&self) -> bool {
        self.channels.len() == self.full_channel_count() && self.channels.iter().enumerate().all(|(i, c)| c.id() == i)
    }
}

/// Regroups per-feature block coefficients into canonical channels.
pub fn pack(features: &[(String, BlockedVolume)], geometry: GridGeometry) -> Result<FrequencyTensor> {
    let Some((_, first)) = features.first() else {
        return Err(Error::Shape("no features to pack".into()));
    };
    let block_dims = first.block_dims();
    if let Some((name, _)) = features.iter().find(|(_, v)| v.block_dims() != block_dims) {
        return Err(Error::Shape(format!("feature `{name}` does not share block dims {block_dims:?}")));
    }
    let zz = zigzag_map();
    let n = voxel_count(block_dims);
    let mut data = Vec::with_capacity(features.len() * BLOCK_LEN * n);
    for (_, vol) in features {
        for z in 0..BLOCK_LEN {
            let off = zz.block_offset(z);
            data.extend(vol.blocks().iter().map(|b| b.0[off]));
        }
    }
    let attributes = features.iter().map(|(name, _)| name.clone()).collect::<Vec<_>>();
    let channels = canonical_channels(attributes.len());
    FrequencyTensor::new(attributes, channels, block_dims, geometry, data)
}

/// Inverse of [`pack`]. Channels missing from the table come back as zero coefficients.
pub fn unpack(t: &FrequencyTensor) -> Result<Vec<(String, BlockedVolume)>> {
    let zz = zigzag_map();
    let n = t.channel_len();
    let mut blocks: Vec<Vec<Block4>> = vec![vec![Block4::default(); n]; t.attributes.len()];
    for (pos, c) in t.channels.iter().enumerate() {
        let off = zz.block_offset(c.zigzag_index);
        for (b, &v) in blocks[c.attribute_index].iter_mut().zip(t.channel_data(pos)) {
            b.0[off] = v;
        }
    }
    t.attributes.iter().cloned().zip(blocks).map(|(name, b)| Ok((name, BlockedVolume::new(t.block_dims, b)?))).collect()
}

/// Forward transform of every grid feature, packed into one tensor.
pub fn transform_grid(grid: &VoxelGrid) -> Result<FrequencyTensor> {
    let features = grid
        .feature_names()
        .into_iter()
        .map(|name| {
            let blocked = forward_grid(grid, &name)?;
            Ok((name, blocked))
        })
        .collect::<Result<Vec<_>>>()?;
    pack(&features, grid.geometry())
}

/// Spatial reconstruction of an unnormalized tensor, one channel per feature.
pub fn reconstruct(t: &FrequencyTensor) -> Result<Volume> {
    if t.is_normalized() {
        return Err(Error::State("denormalize the tensor before reconstructing".into()));
    }
    let features = unpack(t)?;
    let dims = t.source_dims();
    let mut names = Vec::with_capacity(features.len());
    let mut channels = Vec::with_capacity(features.len());
    for (name, blocked) in features {
        names.push(name);
        channels.push(inverse_grid(&blocked)?.into_data());
    }
    Volume::new(dims, t.geometry(), names, channels)
}

/// Count, mean and sum of squared deviations of one channel.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn from_slice(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let count = values.len() as u64;
        let mean = values.iter().sum::<f64>() / count as f64;
        let m2 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        Self { count, mean, m2 }
    }

    /// Pairwise combination of two disjoint samples.
    pub fn merge(&self, other: &Moments) -> Moments {
        let count = self.count + other.count;
        if count == 0 {
            return Moments::default();
        }
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + delta * delta * na * nb / n;
        Moments { count, mean, m2 }
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0)
        }
    }
}

/// Streaming per-channel moments over a dataset. Shards merge exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsAccumulator {
    attributes: Vec<String>,
    channels: Vec<ChannelDescriptor>,
    moments: Vec<Moments>,
}

impl StatsAccumulator {
    pub fn new(attributes: Vec<String>, channels: Vec<ChannelDescriptor>) -> Self {
        let moments = vec![Moments::default(); channels.len()];
        Self { attributes, channels, moments }
    }

    pub fn for_tensor(t: &FrequencyTensor) -> Self {
        Self::new(t.attributes.clone(), t.channels.clone())
    }

    fn check_table(&self, attributes: &[String], channels: &[ChannelDescriptor]) -> Result<()> {
        if self.attributes != attributes || self.channels != channels {
            return Err(Error::Config("channel tables differ between samples".into()));
        }
        Ok(())
    }

    pub fn push(&mut self, t: &FrequencyTensor) -> Result<()> {
        if t.is_normalized() {
            return Err(Error::State("statistics must be fitted on unnormalized tensors".into()));
        }
        self.check_table(&t.attributes, &t.channels)?;
        for (pos, m) in self.moments.iter_mut().enumerate() {
            *m = m.merge(&Moments::from_slice(t.channel_data(pos)));
        }
        Ok(())
    }

    pub fn merge(mut self, other: &StatsAccumulator) -> Result<Self> {
        self.check_table(&other.attributes, &other.channels)?;
        for (a, b) in self.moments.iter_mut().zip(&other.moments) {
            *a = a.merge(b);
        }
        Ok(self)
    }

    pub fn finish(self, epsilon: f64) -> Result<ChannelStats> {
        if self.moments.first().is_none_or(|m| m.count == 0) {
            return Err(Error::Config("no samples accumulated".into()));
        }
        ChannelStats::new(epsilon, self.attributes, self.channels, self.moments)
    }
}

/// Fits per-channel population mean and variance over all positions of all tensors.
pub fn fit_stats<'a, I>(tensors: I) -> Result<ChannelStats>
where
    I: IntoIterator<Item = &'a FrequencyTensor>,
{
    let mut iter = tensors.into_iter();
    let first = iter.next().ok_or_else(|| Error::Config("fit_stats needs at least one tensor".into()))?;
    let mut acc = StatsAccumulator::for_tensor(first);
    acc.push(first)?;
    for t in iter {
        acc.push(t)?;
    }
    acc.finish(DEFAULT_EPSILON)
}

/// Per-channel dataset normalization statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelStats {
    epsilon: f64,
    attributes: Vec<String>,
    channels: Vec<ChannelDescriptor>,
    moments: Vec<Moments>,
    // kept separately so a reloaded file reproduces its variances bit for bit
    variances: Vec<f64>,
    by_id: HashMap<usize, usize>,
}

#[derive(Serialize, Deserialize)]
struct StatsFile {
    epsilon: f64,
    channels: Vec<StatsEntry>,
}

#[derive(Serialize, Deserialize)]
struct StatsEntry {
    channel_id: usize,
    attribute: String,
    zigzag_index: usize,
    freq_coord: [u8; 3],
    count: u64,
    mean: f64,
    variance: f64,
}

impl ChannelStats {
    pub fn new(
        epsilon: f64,
        attributes: Vec<String>,
        channels: Vec<ChannelDescriptor>,
        moments: Vec<Moments>,
    ) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        if channels.len() != moments.len() {
            return Err(Error::Shape("one moment entry per channel required".into()));
        }
        if let Some(m) = moments.iter().find(|m| m.count != moments[0].count) {
            return Err(Error::Config(format!("channel counts differ ({} vs {})", m.count, moments[0].count)));
        }
        if moments.iter().any(|m| !m.mean.is_finite() || !m.m2.is_finite() || m.m2 < 0.0) {
            return Err(Error::InvalidInput("statistics must be finite with non-negative variance".into()));
        }
        let mut by_id = HashMap::with_capacity(channels.len());
        for (pos, c) in channels.iter().enumerate() {
            if c.attribute_index >= attributes.len() || by_id.insert(c.id(), pos).is_some() {
                return Err(Error::Config(format!("invalid or duplicate channel {c:?}")));
            }
        }
        let variances = moments.iter().map(Moments::variance).collect();
        Ok(Self { epsilon, attributes, channels, moments, variances, by_id })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn channels(&self) -> &[ChannelDescriptor] {
        &self.channels
    }

    pub fn moments(&self) -> &[Moments] {
        &self.moments
    }

    pub fn mean(&self, id: usize) -> Option<f64> {
        self.by_id.get(&id).map(|&p| self.moments[p].mean)
    }

    pub fn variance(&self, id: usize) -> Option<f64> {
        self.by_id.get(&id).map(|&p| self.variances[p])
    }

    pub fn to_json(&self) -> String {
        let file = StatsFile {
            epsilon: self.epsilon,
            channels: self
                .channels
                .iter()
                .zip(self.moments.iter().zip(&self.variances))
                .map(|(c, (m, &variance))| StatsEntry {
                    channel_id: c.id(),
                    attribute: self.attributes[c.attribute_index].clone(),
                    zigzag_index: c.zigzag_index,
                    freq_coord: c.freq_coord,
                    count: m.count,
                    mean: m.mean,
                    variance,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("stats serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StatsFile = serde_json::from_str(text)?;
        let mut attributes: Vec<String> = Vec::new();
        let mut channels = Vec::with_capacity(file.channels.len());
        let mut moments = Vec::with_capacity(file.channels.len());
        let mut variances = Vec::with_capacity(file.channels.len());
        for e in file.channels {
            let c = ChannelDescriptor::from_id(e.channel_id);
            if c.zigzag_index != e.zigzag_index || c.freq_coord != e.freq_coord {
                return Err(Error::Config(format!("channel {} has an inconsistent descriptor", e.channel_id)));
            }
            match attributes.get(c.attribute_index) {
                Some(name) if *name != e.attribute => {
                    return Err(Error::Config(format!(
                        "attribute {} named both `{name}` and `{}`",
                        c.attribute_index, e.attribute
                    )))
                }
                Some(_) => {}
                None if c.attribute_index == attributes.len() => attributes.push(e.attribute),
                None => {
                    return Err(Error::Config(format!(
                        "attribute {} appears before its predecessors",
                        c.attribute_index
                    )))
                }
            }
            if !(e.variance >= 0.0) {
                return Err(Error::InvalidInput(format!("channel {} has negative variance", e.channel_id)));
            }
            channels.push(c);
            moments.push(Moments { count: e.count, mean: e.mean, m2: e.variance * e.count as f64 });
            variances.push(e.variance);
        }
        let mut stats = Self::new(file.epsilon, attributes, channels, moments)?;
        stats.variances = variances;
        Ok(stats)
    }

    /// CRC32 of the JSON form; stamped into normalized tensors.
    pub fn digest(&self) -> u32 {
        crc32fast::hash(self.to_json().as_bytes())
    }

    fn lookup(&self, t: &FrequencyTensor) -> Result<Vec<(f64, f64)>> {
        if self.attributes != t.attributes {
            return Err(Error::Config("stats and tensor attribute tables differ".into()));
        }
        t.channels
            .iter()
            .map(|c| {
                let pos = *self
                    .by_id
                    .get(&c.id())
                    .ok_or_else(|| Error::Config(format!("no stats for channel {}", c.id())))?;
                Ok((self.moments[pos].mean, (self.variances[pos] + self.epsilon).sqrt()))
            })
            .collect()
    }
}

/// `(x - mean_c) / sqrt(var_c + eps)` for every element of every channel.
pub fn normalize(t: &FrequencyTensor, stats: &ChannelStats) -> Result<FrequencyTensor> {
    if t.is_normalized() {
        return Err(Error::State("tensor is already normalized".into()));
    }
    let params = stats.lookup(t)?;
    let mut out = t.clone();
    for (pos, (mean, scale)) in params.into_iter().enumerate() {
        for v in out.channel_data_mut(pos) {
            *v = (*v - mean) / scale;
        }
    }
    Ok(out.with_normalization(true, stats.digest()))
}

pub fn denormalize(t: &FrequencyTensor, stats: &ChannelStats) -> Result<FrequencyTensor> {
    if !t.is_normalized() {
        return Err(Error::State("tensor is not normalized".into()));
    }
    if t.stats_digest() != 0 && t.stats_digest() != stats.digest() {
        return Err(Error::Config("tensor was normalized with different statistics".into()));
    }
    let params = stats.lookup(t)?;
    let mut out = t.clone();
    for (pos, (mean, scale)) in params.into_iter().enumerate() {
        for v in out.channel_data_mut(pos) {
            *v = *v * scale + mean;
        }
    }
    Ok(out.with_normalization(false, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::ScalarVolume;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn tensor_from(values: Vec<Vec<f64>>, block_dims: Dims3) -> FrequencyTensor {
        let attrs = vec!["occupancy".to_string()];
        let mut channels = Vec::new();
        let mut data = Vec::new();
        for (z, v) in values.into_iter().enumerate() {
            channels.push(ChannelDescriptor::new(0, z));
            data.extend(v);
        }
        FrequencyTensor::new(attrs, channels, block_dims, GridGeometry::default(), data).unwrap()
    }

    #[test]
    fn zigzag_first_entries() {
        let zz = zigzag_map();
        assert_eq!(zz.coord(0), [0, 0, 0]);
        assert_eq!(zz.coord(1), [0, 0, 1]);
        assert_eq!(zz.coord(2), [0, 1, 0]);
        assert_eq!(zz.coord(3), [1, 0, 0]);
        assert_eq!(zz.coord(63), [3, 3, 3]);
        for z in 0..64 {
            assert_eq!(zz.index_of(zz.coord(z)), z);
        }
    }

    #[test]
    fn pack_shapes_and_constant_volume() {
        let ones = ScalarVolume::new([32; 3], vec![1.0; 32768]).unwrap();
        let blocked = crate::dct3::forward_volume(&ones).unwrap();
        let t = pack(&[("occupancy".into(), blocked)], GridGeometry::default()).unwrap();
        assert_eq!(t.channel_count(), 64);
        assert_eq!(t.block_dims(), [8, 8, 8]);
        assert!(t.channel_data(0).iter().all(|&v| (v - 8.0).abs() < 1e-12));
        for c in 1..64 {
            assert!(t.channel_data(c).iter().all(|v| v.abs() < 1e-12));
        }
        assert!(t.is_canonical());

        let zero = crate::dct3::forward_volume(&ScalarVolume::zeros([80; 3])).unwrap();
        let four: Vec<_> = ["occupancy", "Y", "Cb", "Cr"].iter().map(|n| (n.to_string(), zero.clone())).collect();
        let t = pack(&four, GridGeometry::default()).unwrap();
        assert_eq!(t.channel_count(), 256);
        assert_eq!(t.block_dims(), [20, 20, 20]);
        assert_eq!(unpack(&t).unwrap().len(), 4);

        let small = crate::dct3::forward_volume(&ScalarVolume::zeros([4; 3])).unwrap();
        let bad = vec![("a".to_string(), zero), ("b".to_string(), small)];
        assert!(matches!(pack(&bad, GridGeometry::default()), Err(Error::Shape(_))));
    }

    #[test]
    fn unpack_reorders_and_fills() {
        let mut rng = StdRng::seed_from_u64(3);
        let values: Vec<Vec<f64>> = (0..64).map(|_| (0..8).map(|_| rng.random()).collect()).collect();
        let t = tensor_from(values.clone(), [2, 2, 2]);
        let round = pack(&unpack(&t).unwrap(), GridGeometry::default()).unwrap();
        assert_eq!(round, t);

        // reversed channel order unpacks to the same blocks
        let mut channels = t.channels().to_vec();
        channels.reverse();
        let data: Vec<f64> = values.iter().rev().flatten().copied().collect();
        let rev =
            FrequencyTensor::new(t.attributes().to_vec(), channels, [2, 2, 2], GridGeometry::default(), data).unwrap();
        assert!(!rev.is_canonical());
        assert_eq!(unpack(&rev).unwrap(), unpack(&t).unwrap());

        let dc = tensor_from(vec![vec![1.0; 8]], [2, 2, 2]);
        let blocks = unpack(&dc).unwrap();
        assert!(blocks[0].1.blocks().iter().all(|b| b.0[0] == 1.0 && b.0[1..].iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn rejects_inconsistent_tables() {
        let geometry = GridGeometry::default();
        let mut bad = ChannelDescriptor::new(0, 1);
        bad.freq_coord = [3, 3, 3];
        assert!(FrequencyTensor::new(vec!["a".into()], vec![bad], [1, 1, 1], geometry, vec![0.0]).is_err());
        let dup = vec![ChannelDescriptor::new(0, 1); 2];
        assert!(FrequencyTensor::new(vec!["a".into()], dup, [1, 1, 1], geometry, vec![0.0; 2]).is_err());
        let out = vec![ChannelDescriptor::new(1, 0)];
        assert!(FrequencyTensor::new(vec!["a".into()], out, [1, 1, 1], geometry, vec![0.0]).is_err());
    }

    #[test]
    fn stats_small_cases() {
        let t = tensor_from(vec![vec![5.0; 8]], [2, 2, 2]);
        let s = fit_stats([&t]).unwrap();
        assert_eq!(s.mean(0), Some(5.0));
        assert_eq!(s.variance(0), Some(0.0));

        let t = tensor_from(vec![vec![1.0, 3.0]], [2, 1, 1]);
        let s = fit_stats([&t]).unwrap();
        assert_eq!(s.mean(0), Some(2.0));
        assert_eq!(s.variance(0), Some(1.0));

        let n = normalize(&tensor_from(vec![vec![3.0, 2.0]], [2, 1, 1]), &s).unwrap();
        assert!((n.channel_data(0)[0] - 1.0 / (1.0f64 + 1e-5).sqrt()).abs() < 1e-15);
        assert!((n.channel_data(0)[0] - 0.999995).abs() < 1e-8);
        assert_eq!(n.channel_data(0)[1], 0.0);
        assert!(matches!(normalize(&n, &s), Err(Error::State(_))));
        assert!(matches!(denormalize(&t, &s), Err(Error::State(_))));

        let none: [&FrequencyTensor; 0] = [];
        assert!(fit_stats(none).is_err());
    }

    #[test]
    fn stats_json_round_trip() {
        let mut rng = StdRng::seed_from_u64(5);
        let values: Vec<Vec<f64>> = (0..64).map(|_| (0..8).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let t = tensor_from(values, [2, 2, 2]);
        let s = fit_stats([&t]).unwrap();
        let back = ChannelStats::from_json(&s.to_json()).unwrap();
        assert_eq!(back.to_json(), s.to_json());
        assert_eq!(back.digest(), s.digest());
        let n = normalize(&t, &s).unwrap();
        let d = denormalize(&n, &back).unwrap();
        for (a, b) in d.data().iter().zip(t.data()) {
            assert!((a - b).abs() < 1e-6);
        }
        let zero = tensor_from(vec![vec![0.0; 8]; 64], [2, 2, 2]).with_normalization(true, 0);
        let means = denormalize(&zero, &s).unwrap();
        for pos in 0..64 {
            assert!(means.channel_data(pos).iter().all(|&v| v == s.mean(pos).unwrap()));
        }
    }

    #[test]
    fn stats_mismatch_is_a_config_error() {
        let a = tensor_from(vec![vec![1.0; 8]], [2, 2, 2]);
        let b = tensor_from(vec![vec![1.0; 8]; 2], [2, 2, 2]);
        let sa = fit_stats([&a]).unwrap();
        let sb = fit_stats([&b]).unwrap();
        assert!(matches!(fit_stats([&a, &b]), Err(Error::Config(_))));
        let n = normalize(&a, &sa).unwrap();
        let other =
            ChannelStats::new(0.5, sa.attributes().to_vec(), sa.channels().to_vec(), sa.moments().to_vec()).unwrap();
        assert!(matches!(denormalize(&n, &other), Err(Error::Config(_))));
        // stats covering channel 0 work on a one-channel tensor; missing channels do not
        assert!(normalize(&a, &sb).is_ok());
        assert!(matches!(normalize(&b, &sa), Err(Error::Config(_))));
    }
}
