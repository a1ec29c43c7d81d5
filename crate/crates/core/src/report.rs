//! Spectral bias reports: per-channel gate activation probabilities.
//!
//! Reports are produced by the gate training harness and consumed here by
//! channel selection. File layout (JSON):
//!
//! ```json
//! {"lambda": 2.0, "n_channels_mean": 3.1,
//!  "channels": [{"id": 0, "attr": "occupancy", "zigzag": 0, "freq_coord": [0,0,0], "probability": 0.99}, ...]}
//! ```
//!
//! `attr` may be the attribute name or its index.

use serde::{Deserialize, Serialize};

use crate::dct3::BLOCK_LEN;
use crate::error::{Error, Result};
use crate::freqpack::ChannelDescriptor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttributeRef {
    Index(usize),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportChannel {
    pub id: usize,
    pub attr: AttributeRef,
    pub zigzag: usize,
    pub freq_coord: [u8; 3],
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralBiasReport {
    pub lambda: f64,
    pub n_channels_mean: f64,
    pub channels: Vec<ReportChannel>,
}

impl SpectralBiasReport {
    /// Builds a report over `probabilities.len()` canonical channels.
    pub fn from_probabilities(lambda: f64, attributes: &[&str], probabilities: &[f64]) -> Result<Self> {
        if probabilities.len() != attributes.len() * BLOCK_LEN {
            return Err(Error::Shape(format!(
                "{} probabilities for {} attributes",
                probabilities.len(),
                attributes.len()
            )));
        }
        let channels = probabilities
            .iter()
            .enumerate()
            .map(|(id, &p)| {
                let c = ChannelDescriptor::from_id(id);
                ReportChannel {
                    id,
                    attr: AttributeRef::Name(attributes[c.attribute_index].to_string()),
                    zigzag: c.zigzag_index,
                    freq_coord: c.freq_coord,
                    probability: p,
                }
            })
            .collect();
        let report = Self { lambda, n_channels_mean: probabilities.iter().sum(), channels };
        report.validate()?;
        Ok(report)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        report.validate()?;
        Ok(report)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialize")
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.channels.len() / BLOCK_LEN
    }

    /// Probabilities indexed by canonical channel id.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.channels.len()];
        for c in &self.channels {
            p[c.id] = c.probability;
        }
        p
    }

    /// Checks that the report covers channels `0..C` exactly once with
    /// probabilities in `[0, 1]` and descriptors that match the zigzag map.
    pub fn validate(&self) -> Result<()> {
        let n = self.channels.len();
        if n == 0 || !n.is_multiple_of(BLOCK_LEN) {
            return Err(Error::Config(format!("report must cover a multiple of 64 channels, has {n}")));
        }
        let mut seen = vec![false; n];
        for c in &self.channels {
            if c.id >= n || std::mem::replace(&mut seen[c.id], true) {
                return Err(Error::Config(format!("report channel id {} is out of range or repeated", c.id)));
            }
            let d = ChannelDescriptor::from_id(c.id);
            if d.zigzag_index != c.zigzag || d.freq_coord != c.freq_coord {
                return Err(Error::Config(format!("report channel {} disagrees with the zigzag map", c.id)));
            }
            if let AttributeRef::Index(i) = c.attr {
                if i != d.attribute_index {
                    return Err(Error::Config(format!("report channel {} has attribute index {i}", c.id)));
                }
            }
            if !(0.0..=1.0).contains(&c.probability) {
                return Err(Error::InvalidInput(format!(
                    "channel {} probability {} outside [0, 1]",
                    c.id, c.probability
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_names_or_indices() {
        let mut r = SpectralBiasReport::from_probabilities(2.0, &["occupancy"], &[0.5; 64]).unwrap();
        assert_eq!(r.n_channels_mean, 32.0);
        r.channels[3].attr = AttributeRef::Index(0);
        let back = SpectralBiasReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let text = r#"{"lambda":1,"n_channels_mean":0,"channels":[]}"#;
        assert!(SpectralBiasReport::from_json(text).is_err());
    }

    #[test]
    fn rejects_bad_probabilities_and_ids() {
        let mut p = vec![0.1; 64];
        p[5] = 1.5;
        assert!(SpectralBiasReport::from_probabilities(2.0, &["occupancy"], &p).is_err());
        let mut r = SpectralBiasReport::from_probabilities(2.0, &["occupancy"], &[0.1; 64]).unwrap();
        r.channels[1].id = 0;
        assert!(r.validate().is_err());
        let mut r = SpectralBiasReport::from_probabilities(2.0, &["occupancy"], &[0.1; 64]).unwrap();
        r.channels[1].attr = AttributeRef::Index(1);
        assert!(r.validate().is_err());
    }
}
