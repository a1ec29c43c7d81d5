//! VFT binary container and dataset manifests.
//!
//! All integers and floats are little-endian. Fixed 80-byte header:
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0  | 4  | magic `VFT1` |
//! | 4  | 1  | endianness tag `L` |
//! | 5  | 1  | payload kind: 1 grid, 2 freq, 3 volume |
//! | 6  | 2  | version (u16) = 1 |
//! | 8  | 12 | payload dims x, y, z (u32 each; block dims for freq) |
//! | 20 | 4  | channel count (u32) |
//! | 24 | 4  | attribute count (u32) |
//! | 28 | 1  | normalized flag (0/1) |
//! | 29 | 3  | reserved, zero |
//! | 32 | 4  | stats digest (u32, 0 = none) |
//! | 36 | 24 | origin x, y, z (f64) |
//! | 60 | 8  | voxel size (f64) |
//! | 68 | 4  | table length in bytes (u32) |
//! | 72 | 4  | CRC32 of the payload |
//! | 76 | 4  | CRC32 of bytes 0..76 followed by the table |
//!
//! The table lists every attribute as `u16 length + UTF-8 bytes`; freq
//! files follow it with one 6-byte entry per channel
//! (`u16 attribute index, u8 zigzag index, u8 u, u8 v, u8 w`). The payload is
//! `channel count * dims` f32 values, channel-major, then z-major.
//! Grids store occupancy as channel 0 named `occupancy`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StoreError};
use crate::freqpack::{zigzag_map, ChannelDescriptor, FrequencyTensor};
use crate::grid::{VoxelGrid, OCCUPANCY};
use crate::volume::{voxel_count, Dims3, GridGeometry, Volume};

pub const MAGIC: &[u8; 4] = b"VFT1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 80;
const ENDIAN_TAG: u8 = b'L';

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum PayloadKind {
    Grid = 1,
    Freq = 2,
    Volume = 3,
}

/// Anything a VFT file can hold.
#[derive(Clone, Debug, PartialEq)]
pub enum Entity {
    Grid(VoxelGrid),
    Freq(FrequencyTensor),
    Volume(Volume),
}

impl Entity {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Entity::Grid(_) => PayloadKind::Grid,
            Entity::Freq(_) => PayloadKind::Freq,
            Entity::Volume(_) => PayloadKind::Volume,
        }
    }
}

struct Layout<'a> {
    kind: PayloadKind,
    dims: Dims3,
    attributes: &'a [String],
    channels: Option<&'a [ChannelDescriptor]>,
    normalized: bool,
    stats_digest: u32,
    geometry: GridGeometry,
}

fn encode_with<'a>(layout: Layout<'a>, channels: impl Iterator<Item = &'a [f64]>, channel_count: usize) -> Vec<u8> {
    let mut table = Vec::new();
    for name in layout.attributes {
        table.extend_from_slice(&(name.len() as u16).to_le_bytes());
        table.extend_from_slice(name.as_bytes());
    }
    for c in layout.channels.unwrap_or(&[]) {
        table.extend_from_slice(&(c.attribute_index as u16).to_le_bytes());
        table.push(c.zigzag_index as u8);
        table.extend_from_slice(&c.freq_coord);
    }

    let mut payload = Vec::with_capacity(channel_count * voxel_count(layout.dims) * 4);
    for ch in channels {
        for &v in ch {
            payload.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }

    let mut out = Vec::with_capacity(HEADER_LEN + table.len() + payload.len());
    out.extend_from_slice(MAGIC);
    out.push(ENDIAN_TAG);
    out.push(layout.kind as u8);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in layout.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&(channel_count as u32).to_le_bytes());
    out.extend_from_slice(&(layout.attributes.len() as u32).to_le_bytes());
    out.push(layout.normalized as u8);
    out.extend_from_slice(&[0; 3]);
    out.extend_from_slice(&layout.stats_digest.to_le_bytes());
    for o in layout.geometry.origin {
        out.extend_from_slice(&o.to_le_bytes());
    }
    out.extend_from_slice(&layout.geometry.voxel_size.to_le_bytes());
    out.extend_from_slice(&(table.len() as u32).to_le_bytes());
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    let mut h = crc32fast::Hasher::new();
    h.update(&out[..76]);
    h.update(&table);
    out.extend_from_slice(&h.finalize().to_le_bytes());
    out.extend_from_slice(&table);
    out.extend_from_slice(&payload);
    out
}

/// Serializes an entity. Identical entities always give identical bytes.
pub fn encode(entity: &Entity) -> Vec<u8> {
    match entity {
        Entity::Grid(g) => {
            let names = g.feature_names();
            let occ: Vec<f64> = g.occupancy().iter().map(|&o| o as f64).collect();
            let attrs = g.attribute_names().iter().map(|n| g.attribute(n).expect("own attribute"));
            let layout = Layout {
                kind: PayloadKind::Grid,
                dims: g.dims(),
                attributes: &names,
                channels: None,
                normalized: false,
                stats_digest: 0,
                geometry: g.geometry(),
            };
            encode_with(layout, std::iter::once(occ.as_slice()).chain(attrs), names.len())
        }
        Entity::Freq(t) => {
            let layout = Layout {
                kind: PayloadKind::Freq,
                dims: t.block_dims(),
                attributes: t.attributes(),
                channels: Some(t.channels()),
                normalized: t.is_normalized(),
                stats_digest: t.stats_digest(),
                geometry: t.geometry(),
            };
            encode_with(layout, (0..t.channel_count()).map(|p| t.channel_data(p)), t.channel_count())
        }
        Entity::Volume(v) => {
            let layout = Layout {
                kind: PayloadKind::Volume,
                dims: v.dims(),
                attributes: v.names(),
                channels: None,
                normalized: false,
                stats_digest: 0,
                geometry: v.geometry(),
            };
            encode_with(layout, v.channels().iter().map(Vec::as_slice), v.names().len())
        }
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

fn truncated(expected: usize, actual: usize) -> StoreError {
    StoreError::Truncated { expected: expected as u64, actual: actual as u64 }
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Store(StoreError::Malformed(msg.into()))
}

/// Parses a VFT byte image. Never returns a partially decoded entity.
pub fn decode(bytes: &[u8]) -> Result<Entity> {
    if bytes.len() < MAGIC.len() {
        return Err(truncated(HEADER_LEN, bytes.len()).into());
    }
    if &bytes[..4] != MAGIC {
        return Err(StoreError::BadMagic.into());
    }
    if bytes.len() < HEADER_LEN {
        return Err(truncated(HEADER_LEN, bytes.len()).into());
    }
    let version = u16_at(bytes, 6);
    if version != VERSION {
        return Err(StoreError::UnsupportedVersion(version).into());
    }
    let table_len = u32_at(bytes, 68) as usize;
    let table_end = HEADER_LEN + table_len;
    if bytes.len() < table_end {
        return Err(truncated(table_end, bytes.len()).into());
    }
    let mut h = crc32fast::Hasher::new();
    h.update(&bytes[..76]);
    h.update(&bytes[HEADER_LEN..table_end]);
    if h.finalize() != u32_at(bytes, 76) {
        return Err(StoreError::HeaderChecksum.into());
    }
    if bytes[4] != ENDIAN_TAG {
        return Err(malformed(format!("unknown endianness tag {:#04x}", bytes[4])));
    }
    let kind = match bytes[5] {
        1 => PayloadKind::Grid,
        2 => PayloadKind::Freq,
        3 => PayloadKind::Volume,
        k => return Err(malformed(format!("unknown payload kind {k}"))),
    };
    let dims = [u32_at(bytes, 8) as usize, u32_at(bytes, 12) as usize, u32_at(bytes, 16) as usize];
    let channel_count = u32_at(bytes, 20) as usize;
    let attribute_count = u32_at(bytes, 24) as usize;
    let normalized = match bytes[28] {
        0 => false,
        1 => true,
        f => return Err(malformed(format!("normalized flag {f}"))),
    };
    let stats_digest = u32_at(bytes, 32);
    let origin = [f64_at(bytes, 36), f64_at(bytes, 44), f64_at(bytes, 52)];
    let geometry = GridGeometry::new(origin, f64_at(bytes, 60)).map_err(|e| malformed(e.to_string()))?;

    // table
    let table = &bytes[HEADER_LEN..table_end];
    let mut at = 0;
    let mut attributes = Vec::with_capacity(attribute_count.min(table_len));
    for _ in 0..attribute_count {
        if at + 2 > table.len() {
            return Err(malformed("attribute table overruns its declared length"));
        }
        let len = u16_at(table, at) as usize;
        at += 2;
        let raw = table.get(at..at + len).ok_or_else(|| malformed("attribute name overruns table"))?;
        attributes.push(String::from_utf8(raw.to_vec()).map_err(|_| malformed("attribute name is not UTF-8"))?);
        at += len;
    }
    let mut channels = Vec::new();
    if kind == PayloadKind::Freq {
        let zz = zigzag_map();
        for _ in 0..channel_count {
            let e = table.get(at..at + 6).ok_or_else(|| malformed("channel table overruns its declared length"))?;
            let zigzag = e[2] as usize;
            if zigzag >= 64 {
                return Err(malformed(format!("zigzag index {zigzag}")));
            }
            let c = ChannelDescriptor::new(u16_at(e, 0) as usize, zigzag);
            if zz.coord(zigzag) != [e[3], e[4], e[5]] {
                return Err(malformed(format!("channel {} coordinate disagrees with zigzag map", c.id())));
            }
            channels.push(c);
            at += 6;
        }
    } else if channel_count != attribute_count {
        return Err(malformed("channel and attribute counts differ"));
    }
    if at != table.len() {
        return Err(malformed("table has trailing bytes"));
    }

    // payload
    let elements = dims
        .iter()
        .try_fold(channel_count, |acc, &d| acc.checked_mul(d))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| malformed("declared payload size overflows"))?;
    let expected = table_end + elements;
    if bytes.len() < expected {
        return Err(truncated(expected, bytes.len()).into());
    }
    if bytes.len() > expected {
        return Err(malformed(format!("{} trailing bytes after payload", bytes.len() - expected)));
    }
    let payload = &bytes[table_end..];
    let actual = crc32fast::hash(payload);
    let stored = u32_at(bytes, 72);
    if actual != stored {
        return Err(StoreError::PayloadChecksum { expected: stored, actual }.into());
    }
    let values: Vec<f64> = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect();

    let entity = match kind {
        PayloadKind::Freq => Entity::Freq(
            FrequencyTensor::new(attributes, channels, dims, geometry, values)?
                .with_normalization(normalized, stats_digest),
        ),
        PayloadKind::Grid | PayloadKind::Volume => {
            if normalized || stats_digest != 0 {
                return Err(malformed("spatial payloads cannot be normalized"));
            }
            let n = voxel_count(dims);
            let mut chans: Vec<Vec<f64>> = values.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
            chans.resize(channel_count, Vec::new());
            if kind == PayloadKind::Volume {
                Entity::Volume(Volume::new(dims, geometry, attributes, chans)?)
            } else {
                if attributes.first().map(String::as_str) != Some(OCCUPANCY) {
                    return Err(malformed("grid channel 0 must be occupancy"));
                }
                let occ = chans.remove(0);
                if occ.iter().any(|&v| v != 0.0 && v != 1.0) {
                    return Err(malformed("occupancy values must be 0 or 1"));
                }
                let occ = occ.into_iter().map(|v| v as u8).collect();
                Entity::Grid(VoxelGrid::from_parts(dims, geometry, occ, attributes[1..].to_vec(), chans)?)
            }
        }
    };
    Ok(entity)
}

/// Writes via a temporary file in the same directory and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp.{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn write(entity: &Entity, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode(entity))
}

pub fn read(path: impl AsRef<Path>) -> Result<Entity> {
    decode(&fs::read(path)?)
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<VoxelGrid> {
    match read(path)? {
        Entity::Grid(g) => Ok(g),
        other => Err(Error::Config(format!("expected a grid file, found {:?}", other.kind()))),
    }
}

pub fn read_freq(path: impl AsRef<Path>) -> Result<FrequencyTensor> {
    match read(path)? {
        Entity::Freq(t) => Ok(t),
        other => Err(Error::Config(format!("expected a frequency file, found {:?}", other.kind()))),
    }
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<Volume> {
    match read(path)? {
        Entity::Volume(v) => Ok(v),
        other => Err(Error::Config(format!("expected a volume file, found {:?}", other.kind()))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: Option<u32>,
    pub split: String,
}

/// Sample list ordered by path, unique paths.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub samples: Vec<ManifestEntry>,
}

impl Manifest {
    /// Sorts `entries` by path and rejects duplicates.
    pub fn new(mut entries: Vec<ManifestEntry>) -> Result<Self> {
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        if let Some(w) = entries.windows(2).find(|w| w[0].path == w[1].path) {
            return Err(Error::Manifest(format!("duplicate path `{}`", w[0].path)));
        }
        Ok(Self { samples: entries })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text)?;
        Self::new(m.samples)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialize")
    }

    /// Sample paths resolved against `base` (the manifest's directory).
    pub fn resolve(&self, base: &Path) -> Vec<PathBuf> {
        self.samples.iter().map(|s| base.join(&s.path)).collect()
    }

    pub fn split<'a>(&'a self, split: &'a str) -> impl Iterator<Item = &'a ManifestEntry> + 'a {
        self.samples.iter().filter(move |s| s.split == split)
    }

    /// Fails if any sample file is missing under `base`.
    pub fn validate_files(&self, base: &Path) -> Result<()> {
        match self.samples.iter().find(|s| !base.join(&s.path).is_file()) {
            Some(s) => Err(Error::Manifest(format!("missing file `{}`", s.path))),
            None => Ok(()),
        }
    }
}

/// Builds a manifest over existing files, one split tag and optional label per path.
pub fn dataset_manifest(base: &Path, samples: Vec<(String, Option<u32>, String)>) -> Result<Manifest> {
    let entries = samples.into_iter().map(|(path, label, split)| ManifestEntry { path, label, split }).collect();
    let m = Manifest::new(entries)?;
    m.validate_files(base)?;
    Ok(m)
}
