//! Static binary frequency-channel selection.
//!
//! A [`SelectionMap`] is ranked once from a spectral bias report and then
//! applied identically to every sample, either by zeroing muted channels
//! (mask mode) or by dropping them (compact mode).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dct3::BLOCK_LEN;
use crate::error::{Error, Result};
use crate::freqpack::{ChannelDescriptor, FrequencyTensor};
use crate::report::SpectralBiasReport;

pub const MAP_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Top `n` over all channels.
    Global,
    /// Top `n / N_attributes` inside every attribute.
    PerAttribute,
}

impl std::str::FromStr for SelectionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(Self::Global),
            "per_attribute" | "per-attribute" => Ok(Self::PerAttribute),
            other => Err(Error::Config(format!("unknown selection policy `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApplyMode {
    /// Zero muted channels, keep the shape.
    Mask,
    /// Remove muted channels.
    Compact,
}

impl std::str::FromStr for ApplyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mask" => Ok(Self::Mask),
            "compact" => Ok(Self::Compact),
            other => Err(Error::Config(format!("unknown apply mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub lambda: f64,
    /// Identifier of the source report (usually its path).
    pub report: String,
    pub policy: SelectionPolicy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionMap {
    channel_count: usize,
    selected: BTreeSet<usize>,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct MapFile {
    version: u32,
    channel_count: usize,
    selected: Vec<usize>,
    provenance: Provenance,
}

impl SelectionMap {
    pub fn new(
        channel_count: usize,
        selected: impl IntoIterator<Item = usize>,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for id in selected {
            if id >= channel_count {
                return Err(Error::Config(format!("selected channel {id} outside {channel_count} channels")));
            }
            if !set.insert(id) {
                return Err(Error::Config(format!("channel {id} selected twice")));
            }
        }
        if set.is_empty() {
            return Err(Error::Config("a selection map needs at least one channel".into()));
        }
        Ok(Self { channel_count, selected: set, provenance })
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    pub fn n_selected(&self) -> usize {
        self.selected.len()
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.selected.iter().copied()
    }

    pub fn is_selected(&self, id: usize) -> bool {
        self.selected.contains(&id)
    }

    pub fn mask(&self) -> Vec<bool> {
        (0..self.channel_count).map(|id| self.selected.contains(&id)).collect()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn to_json(&self) -> String {
        let file = MapFile {
            version: MAP_VERSION,
            channel_count: self.channel_count,
            selected: self.selected.iter().copied().collect(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&file).expect("map serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MapFile = serde_json::from_str(text)?;
        if file.version != MAP_VERSION {
            return Err(Error::Config(format!("unsupported selection map version {}", file.version)));
        }
        Self::new(file.channel_count, file.selected, file.provenance)
    }
}

pub fn save_map(map: &SelectionMap, path: impl AsRef<std::path::Path>) -> Result<()> {
    crate::store::write_atomic(path.as_ref(), map.to_json().as_bytes())
}

pub fn load_map(path: impl AsRef<std::path::Path>) -> Result<SelectionMap> {
    SelectionMap::from_json(&std::fs::read_to_string(path)?)
}

// Highest probability first; ties go to the lower zigzag index, then the lower attribute.
fn rank(ids: &mut [usize], probs: &[f64]) {
    ids.sort_by(|&a, &b| {
        let (da, db) = (ChannelDescriptor::from_id(a), ChannelDescriptor::from_id(b));
        probs[b]
            .total_cmp(&probs[a])
            .then(da.zigzag_index.cmp(&db.zigzag_index))
            .then(da.attribute_index.cmp(&db.attribute_index))
    });
}

/// Picks the `n` most frequently activated channels of `report`.
pub fn select_top_n(
    report: &SpectralBiasReport,
    report_id: &str,
    n: usize,
    policy: SelectionPolicy,
) -> Result<SelectionMap> {
    report.validate()?;
    let c = report.channel_count();
    if n == 0 || n > c {
        return Err(Error::Config(format!("n must be in 1..={c}, got {n}")));
    }
    let probs = report.probabilities();
    let selected: Vec<usize> = match policy {
        SelectionPolicy::Global => {
            let mut ids: Vec<usize> = (0..c).collect();
            rank(&mut ids, &probs);
            ids.truncate(n);
            ids
        }
        SelectionPolicy::PerAttribute => {
            let attrs = report.attribute_count();
            if !n.is_multiple_of(attrs) {
                return Err(Error::Config(format!("n = {n} is not divisible by {attrs} attributes")));
            }
            let per = n / attrs;
            (0..attrs)
                .flat_map(|a| {
                    let mut ids: Vec<usize> = (a * BLOCK_LEN..(a + 1) * BLOCK_LEN).collect();
                    rank(&mut ids, &probs);
                    ids.truncate(per);
                    ids
                })
                .collect()
        }
    };
    SelectionMap::new(c, selected, Provenance { lambda: report.lambda, report: report_id.to_string(), policy })
}

/// Applies the map: zero muted channels, or drop them.
pub fn apply(t: &FrequencyTensor, map: &SelectionMap, mode: ApplyMode) -> Result<FrequencyTensor> {
    if map.channel_count() != t.full_channel_count() {
        return Err(Error::Config(format!(
            "map covers {} channels but the tensor has {} attributes ({} channels)",
            map.channel_count(),
            t.attributes().len(),
            t.full_channel_count()
        )));
    }
    if let Some(missing) = map.selected().find(|&id| t.position_of(id).is_none()) {
        return Err(Error::Config(format!("selected channel {missing} is absent from the tensor")));
    }
    let (channels, data): (Vec<ChannelDescriptor>, Vec<f64>) = match mode {
        ApplyMode::Mask => {
            let mut data = t.data().to_vec();
            let n = t.channel_len();
            for (pos, c) in t.channels().iter().enumerate() {
                if !map.is_selected(c.id()) {
                    data[pos * n..(pos + 1) * n].fill(0.0);
                }
            }
            (t.channels().to_vec(), data)
        }
        ApplyMode::Compact => {
            let keep: Vec<usize> = (0..t.channel_count()).filter(|&p| map.is_selected(t.channels()[p].id())).collect();
            let channels = keep.iter().map(|&p| t.channels()[p]).collect();
            let data = keep.iter().flat_map(|&p| t.channel_data(p).iter().copied()).collect();
            (channels, data)
        }
    };
    Ok(FrequencyTensor::new(t.attributes().to_vec(), channels, t.block_dims(), t.geometry(), data)?
        .with_normalization(t.is_normalized(), t.stats_digest()))
}

/// Selected input elements relative to a full spatial reference input.
///
/// `n_selected * (D/4)^3 / (n_attr_ref * D_ref^3)`; the reference defaults
/// to `(dims, n_attributes)`.
pub fn normalized_input_size(
    n_selected: usize,
    dims: usize,
    n_attributes: usize,
    reference: Option<(usize, usize)>,
) -> Result<f64> {
    if n_selected == 0 || dims == 0 || n_attributes == 0 {
        return Err(Error::Config("counts must be positive".into()));
    }
    if !dims.is_multiple_of(4) {
        return Err(Error::Config(format!("dims {dims} not divisible by 4")));
    }
    if n_selected > n_attributes * BLOCK_LEN {
        return Err(Error::Config(format!("{n_selected} channels exceed {} available", n_attributes * BLOCK_LEN)));
    }
    let (d_ref, a_ref) = reference.unwrap_or((dims, n_attributes));
    let ref_volume = (a_ref as f64) * (d_ref as f64).powi(3);
    if ref_volume == 0.0 {
        return Err(Error::Config("reference volume is zero".into()));
    }
    let blocks = (dims / 4) as f64;
    Ok(n_selected as f64 * blocks.powi(3) / ref_volume)
}

/// Rounds half away from zero to 3 decimals, the precision of the size tables.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}
