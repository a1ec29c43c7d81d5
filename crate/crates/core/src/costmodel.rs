//! FLOP and activation-memory accounting for 3D CNN layer graphs.
//!
//! Conventions: one multiply-accumulate is 2 FLOPs; pooling, upsampling,
//! normalization, activations and merges cost nothing. Activation memory
//! is the sum of layer output tensors; the peak is the largest
//! `input + output` pair of any single layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{voxel_count, Dims3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Conv3d,
    TransposedConv3d,
    Pool3d,
    GlobalPool,
    Linear,
    /// Nearest/trilinear upsampling by `stride` per axis.
    Upsample,
    Elementwise,
}

/// Where a layer reads its input from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    #[default]
    Previous,
    Input,
    Layer(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: [usize; 3],
    pub stride: [usize; 3],
    #[serde(default)]
    pub padding: [usize; 3],
    pub input_dims: Dims3,
    #[serde(default)]
    pub source: Source,
}

impl LayerSpec {
    pub fn output_dims(&self) -> Result<Dims3> {
        let bad = |msg: String| Error::Config(format!("layer `{}`: {msg}", self.name));
        if self.kernel.contains(&0) || self.stride.contains(&0) {
            return Err(bad("kernel and stride must be positive".into()));
        }
        if self.input_dims.contains(&0) {
            return Err(bad("input dims must be positive".into()));
        }
        let mut out = [0; 3];
        for a in 0..3 {
            let (i, k, s, p) = (self.input_dims[a], self.kernel[a], self.stride[a], self.padding[a]);
            out[a] = match self.kind {
                LayerKind::Conv3d | LayerKind::Pool3d => {
                    if i + 2 * p < k {
                        return Err(bad(format!("kernel {k} larger than padded input {}", i + 2 * p)));
                    }
                    (i + 2 * p - k) / s + 1
                }
                LayerKind::TransposedConv3d => {
                    let full = (i - 1) * s + k;
                    if full <= 2 * p {
                        return Err(bad("padding consumes the whole output".into()));
                    }
                    full - 2 * p
                }
                LayerKind::GlobalPool | LayerKind::Linear => 1,
                LayerKind::Upsample => i * s,
                LayerKind::Elementwise => i,
            };
        }
        Ok(out)
    }

    pub fn input_elements(&self) -> usize {
        self.in_channels * voxel_count(self.input_dims)
    }

    pub fn output_elements(&self) -> Result<usize> {
        Ok(self.out_channels * voxel_count(self.output_dims()?))
    }

    fn is_conv(&self) -> bool {
        matches!(self.kind, LayerKind::Conv3d | LayerKind::TransposedConv3d)
    }
}

/// FLOPs of a convolution: `2 * kx*ky*kz * C_in * C_out * positions`.
///
/// Positions are output voxels for a convolution and input voxels for a
/// transposed convolution (each input voxel scatters one kernel).
pub fn conv3d_flops(l: &LayerSpec) -> Result<u64> {
    if !l.is_conv() {
        return Err(Error::UnsupportedKind(format!("{:?}", l.kind)));
    }
    let k: u64 = l.kernel.iter().map(|&k| k as u64).product();
    let positions = match l.kind {
        LayerKind::TransposedConv3d => voxel_count(l.input_dims),
        _ => voxel_count(l.output_dims()?),
    } as u64;
    Ok(2 * k * l.in_channels as u64 * l.out_channels as u64 * positions)
}

pub fn layer_flops(l: &LayerSpec) -> Result<u64> {
    match l.kind {
        LayerKind::Conv3d | LayerKind::TransposedConv3d => conv3d_flops(l),
        LayerKind::Linear => Ok(2 * l.input_elements() as u64 * l.out_channels as u64),
        _ => Ok(0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Merge {
    /// Element-wise sum, shapes must match.
    Add,
    /// Channel concatenation, spatial dims must match.
    Concat,
}

/// Merges the output of layer `from` into the output of layer `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub merge: Merge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub name: String,
    pub input_channels: usize,
    pub input_dims: Dims3,
    pub layers: Vec<LayerSpec>,
    #[serde(default)]
    pub links: Vec<Link>,
}

impl NetworkSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialize")
    }

    /// Shape `(channels, dims)` of every layer's output after merges.
    pub fn validate(&self) -> Result<Vec<(usize, Dims3)>> {
        let mut shapes: Vec<(usize, Dims3)> = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            let spec_err = |msg: String| Error::Spec { layer: i, msg };
            let src = match l.source {
                Source::Previous if i == 0 => (self.input_channels, self.input_dims),
                Source::Previous => shapes[i - 1],
                Source::Input => (self.input_channels, self.input_dims),
                Source::Layer(j) if j < i => shapes[j],
                Source::Layer(j) => return Err(spec_err(format!("reads from later layer {j}"))),
            };
            if src != (l.in_channels, l.input_dims) {
                return Err(spec_err(format!(
                    "`{}` expects {} x {:?} but receives {} x {:?}",
                    l.name, l.in_channels, l.input_dims, src.0, src.1
                )));
            }
            let dims = l.output_dims().map_err(|e| spec_err(e.to_string()))?;
            if matches!(
                l.kind,
                LayerKind::Pool3d | LayerKind::GlobalPool | LayerKind::Upsample | LayerKind::Elementwise
            ) && l.in_channels != l.out_channels
            {
                return Err(spec_err(format!("`{}` cannot change the channel count", l.name)));
            }
            let mut shape = (l.out_channels, dims);
            for link in self.links.iter().filter(|k| k.to == i) {
                if link.from >= i {
                    return Err(spec_err(format!("link from layer {} must point backwards", link.from)));
                }
                let other = shapes[link.from];
                match link.merge {
                    Merge::Add if other != shape => {
                        return Err(spec_err(format!("add merge of {other:?} into {shape:?}")));
                    }
                    Merge::Concat if other.1 != shape.1 => {
                        return Err(spec_err(format!("concat merge of {other:?} into {shape:?}")));
                    }
                    Merge::Concat => shape.0 += other.0,
                    Merge::Add => {}
                }
            }
            shapes.push(shape);
        }
        if let Some(link) = self.links.iter().find(|k| k.to >= self.layers.len()) {
            return Err(Error::Spec { layer: link.to, msg: "link target does not exist".into() });
        }
        Ok(shapes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerCost {
    pub name: String,
    pub kind: LayerKind,
    pub out_channels: usize,
    pub output_dims: Dims3,
    pub flops: u64,
    pub activation_bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub network: String,
    pub bytes_per_element: u64,
    pub input_elements: u64,
    pub layers: Vec<LayerCost>,
    pub total_flops: u64,
    pub activation_bytes: u64,
    pub peak_activation_bytes: u64,
}

impl CostReport {
    pub fn gflops(&self) -> f64 {
        self.total_flops as f64 / 1e9
    }

    pub fn activation_mib(&self) -> f64 {
        self.activation_bytes as f64 / (1024.0 * 1024.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialize")
    }

    /// Aligned text table, one row per layer plus totals.
    pub fn to_table(&self) -> String {
        let mut out =
            format!("{:<24} {:<18} {:>6} {:>16} {:>12} {:>12}\n", "layer", "kind", "ch", "output", "MFLOPs", "act MiB");
        for l in &self.layers {
            out += &format!(
                "{:<24} {:<18} {:>6} {:>16} {:>12.1} {:>12.2}\n",
                l.name,
                format!("{:?}", l.kind),
                l.out_channels,
                format!("{}x{}x{}", l.output_dims[0], l.output_dims[1], l.output_dims[2]),
                l.flops as f64 / 1e6,
                l.activation_bytes as f64 / (1024.0 * 1024.0)
            );
        }
        out += &format!(
            "total: {:.2} GFLOPs, activations {:.1} MiB, peak layer {:.1} MiB, input {} elements\n",
            self.gflops(),
            self.activation_mib(),
            self.peak_activation_bytes as f64 / (1024.0 * 1024.0),
            self.input_elements
        );
        out
    }
}

pub fn network_cost(n: &NetworkSpec, bytes_per_element: u64) -> Result<CostReport> {
    let shapes = n.validate()?;
    let mut layers = Vec::with_capacity(n.layers.len());
    let mut peak = 0;
    for (l, &(channels, dims)) in n.layers.iter().zip(&shapes) {
        let out_bytes = (channels * voxel_count(dims)) as u64 * bytes_per_element;
        let in_bytes = l.input_elements() as u64 * bytes_per_element;
        peak = peak.max(in_bytes + out_bytes);
        layers.push(LayerCost {
            name: l.name.clone(),
            kind: l.kind,
            out_channels: channels,
            output_dims: dims,
            flops: layer_flops(l)?,
            activation_bytes: out_bytes,
        });
    }
    Ok(CostReport {
        network: n.name.clone(),
        bytes_per_element,
        input_elements: (n.input_channels * voxel_count(n.input_dims)) as u64,
        total_flops: layers.iter().map(|l| l.flops).sum(),
        activation_bytes: layers.iter().map(|l| l.activation_bytes).sum(),
        peak_activation_bytes: peak,
        layers,
    })
}

/// Inputs for the built-in network variants.
#[derive(Clone, Debug, PartialEq)]
pub struct BuiltinParams {
    /// Spatial grid edge `D`; frequency variants run on `D / 4`.
    pub dims: usize,
    /// Input channels (1 occupancy, 4 occupancy+YCbCr, or the number of
    /// selected frequency channels).
    pub channels: usize,
    pub classes: usize,
    /// Stage widths; `None` uses the variant's defaults.
    pub widths: Option<Vec<usize>>,
}

pub const BUILTIN_NAMES: &[&str] =
    &["voxnet-spatial", "voxnet-frequency", "vrn-spatial", "vrn-frequency", "segnet-spatial", "segnet-frequency"];

/// Default encoder widths of the segmentation network. With these, the
/// 160^3 spatial variant costs about 1135 GFLOPs and the frequency variant
/// about 1019 GFLOPs.
pub const SEGNET_WIDTHS: [usize; 4] = [40, 40, 80, 160];
/// Default block widths of the spatial VRN; the frequency VRN doubles the first two.
pub const VRN_WIDTHS: [usize; 4] = [32, 64, 128, 256];

struct Builder {
    spec: NetworkSpec,
    shapes: Vec<(usize, Dims3)>,
}

impl Builder {
    fn new(name: &str, channels: usize, dims: usize) -> Self {
        Self {
            spec: NetworkSpec {
                name: name.to_string(),
                input_channels: channels,
                input_dims: [dims; 3],
                layers: Vec::new(),
                links: Vec::new(),
            },
            shapes: Vec::new(),
        }
    }

    fn shape_of(&self, src: Source) -> (usize, Dims3) {
        match src {
            Source::Previous if !self.shapes.is_empty() => *self.shapes.last().unwrap(),
            Source::Layer(j) => self.shapes[j],
            _ => (self.spec.input_channels, self.spec.input_dims),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        name: &str,
        kind: LayerKind,
        src: Source,
        out: Option<usize>,
        k: usize,
        s: usize,
        p: usize,
    ) -> usize {
        let (in_channels, input_dims) = self.shape_of(src);
        let layer = LayerSpec {
            name: name.to_string(),
            kind,
            in_channels,
            out_channels: out.unwrap_or(in_channels),
            kernel: [k; 3],
            stride: [s; 3],
            padding: [p; 3],
            input_dims,
            source: src,
        };
        let dims = layer.output_dims().expect("builtin layer shapes are valid");
        self.shapes.push((layer.out_channels, dims));
        self.spec.layers.push(layer);
        self.shapes.len() - 1
    }

    fn conv(&mut self, name: &str, out: usize, k: usize, s: usize, p: usize) -> usize {
        self.push(name, LayerKind::Conv3d, Source::Previous, Some(out), k, s, p)
    }

    fn conv_same(&mut self, name: &str, out: usize) -> usize {
        self.conv(name, out, 3, 1, 1)
    }

    fn add(&mut self, from: usize, to: usize) {
        self.spec.links.push(Link { from, to, merge: Merge::Add });
    }

    fn finish(self) -> NetworkSpec {
        self.spec
    }
}

fn widths<const N: usize>(p: &BuiltinParams, default: [usize; N]) -> Result<[usize; N]> {
    match &p.widths {
        None => Ok(default),
        Some(w) => w.as_slice().try_into().map_err(|_| Error::Config(format!("expected {N} widths, got {}", w.len()))),
    }
}

/// Builds a named network variant.
pub fn builtin_spec(name: &str, p: &BuiltinParams) -> Result<NetworkSpec> {
    if p.dims == 0 || !p.dims.is_multiple_of(4) || p.channels == 0 || p.classes == 0 {
        return Err(Error::Config(format!("invalid builtin parameters {p:?}")));
    }
    let spec = match name {
        "voxnet-spatial" => voxnet(name, p, p.dims, 32, 5, 2),
        "voxnet-frequency" => voxnet(name, p, p.dims / 4, 128, 5, 1),
        "vrn-spatial" => vrn(name, p, false)?,
        "vrn-frequency" => vrn(name, p, true)?,
        "segnet-spatial" => segnet(name, p, false)?,
        "segnet-frequency" => segnet(name, p, true)?,
        other => return Err(Error::Config(format!("unknown network `{other}`; known: {}", BUILTIN_NAMES.join(", ")))),
    };
    spec.validate()?;
    Ok(spec)
}

// Two convolutions, one max pool and two fully connected layers.
fn voxnet(name: &str, p: &BuiltinParams, dims: usize, filters: usize, k1: usize, s1: usize) -> NetworkSpec {
    let mut b = Builder::new(name, p.channels, dims);
    b.conv("conv1", filters, k1, s1, 0);
    b.conv("conv2", filters, 3, 1, 0);
    b.push("pool", LayerKind::Pool3d, Source::Previous, None, 2, 2, 0);
    b.push("fc1", LayerKind::Linear, Source::Previous, Some(128), 1, 1, 0);
    b.push("fc2", LayerKind::Linear, Source::Previous, Some(p.classes), 1, 1, 0);
    b.finish()
}

// Stem, four residual blocks (each optionally followed by a stride-2
// downsampling convolution), then a classifier.
fn vrn(name: &str, p: &BuiltinParams, frequency: bool) -> Result<NetworkSpec> {
    let mut w = widths(p, VRN_WIDTHS)?;
    let dims = if frequency { p.dims / 4 } else { p.dims };
    if frequency {
        w[0] *= 2;
        w[1] *= 2;
    }
    let mut b = Builder::new(name, p.channels, dims);
    b.conv_same("stem", w[0]);
    for (i, &width) in w.iter().enumerate() {
        let a = b.conv_same(&format!("block{}.conv_a", i + 1), width);
        let c = b.conv_same(&format!("block{}.conv_b", i + 1), width);
        b.add(a, c);
        if !(frequency && i < 2) {
            b.conv(&format!("block{}.downsample", i + 1), width, 3, 2, 1);
        }
    }
    b.push("fc", LayerKind::Linear, Source::Previous, Some(p.classes), 1, 1, 0);
    Ok(b.finish())
}

// Encoder-decoder with residual conv blocks, element-wise skip connections
// and a per-voxel classifier. The frequency variant drops the first two
// encoder pools and feeds the two highest-resolution decoder blocks with
// upsampled encoder outputs.
fn segnet(name: &str, p: &BuiltinParams, frequency: bool) -> Result<NetworkSpec> {
    let w = widths(p, SEGNET_WIDTHS)?;
    let dims = if frequency { p.dims / 4 } else { p.dims };
    if !p.dims.is_multiple_of(16) {
        return Err(Error::Config(format!("segmentation network needs dims divisible by 16, got {}", p.dims)));
    }
    let mut b = Builder::new(name, p.channels, dims);
    let stem = b.conv_same("stem", w[0]);

    let mut encoder = Vec::new();
    for (i, &width) in w.iter().enumerate() {
        if !(frequency && i < 2) {
            b.push(&format!("enc{}.pool", i + 1), LayerKind::Pool3d, Source::Previous, None, 2, 2, 0);
        }
        let a = b.conv_same(&format!("enc{}.conv_a", i + 1), width);
        b.conv_same(&format!("enc{}.conv_b", i + 1), width);
        let c = b.conv_same(&format!("enc{}.conv_c", i + 1), width);
        b.add(a, c);
        encoder.push(c);
    }

    // (output width, skip source) for each decoder block, coarse to fine
    let skips: Vec<(usize, usize)> = if frequency {
        let up2 = b.push("skip.up2_enc2", LayerKind::Upsample, Source::Layer(encoder[1]), None, 1, 2, 0);
        let up4 = b.push("skip.up4_enc1", LayerKind::Upsample, Source::Layer(encoder[0]), None, 1, 4, 0);
        vec![(w[2], encoder[2]), (w[1], encoder[1]), (w[1], up2), (w[0], up4)]
    } else {
        vec![(w[2], encoder[2]), (w[1], encoder[1]), (w[0], encoder[0]), (w[0], stem)]
    };
    let mut src = Source::Layer(encoder[3]);
    for (i, (width, skip)) in skips.into_iter().enumerate() {
        let up = b.push(&format!("dec{}.up", i + 1), LayerKind::TransposedConv3d, src, Some(width), 4, 2, 1);
        b.add(skip, up);
        b.conv_same(&format!("dec{}.conv_a", i + 1), width);
        let c = b.conv_same(&format!("dec{}.conv_b", i + 1), width);
        b.add(up, c);
        src = Source::Layer(c);
    }
    b.push("classifier", LayerKind::Conv3d, src, Some(p.classes), 1, 1, 0);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv(ci: usize, co: usize, k: usize, s: usize, p: usize, dims: usize) -> LayerSpec {
        LayerSpec {
            name: "c".into(),
            kind: LayerKind::Conv3d,
            in_channels: ci,
            out_channels: co,
            kernel: [k; 3],
            stride: [s; 3],
            padding: [p; 3],
            input_dims: [dims; 3],
            source: Source::Previous,
        }
    }

    fn params(dims: usize, channels: usize, classes: usize) -> BuiltinParams {
        BuiltinParams { dims, channels, classes, widths: None }
    }

    #[test]
    fn conv_flops_examples() {
        assert_eq!(conv3d_flops(&conv(1, 8, 3, 1, 1, 32)).unwrap(), 14_155_776);
        assert_eq!(conv3d_flops(&conv(1, 1, 1, 1, 0, 1)).unwrap(), 2);
        let s1 = conv3d_flops(&conv(4, 4, 3, 1, 1, 16)).unwrap();
        let s2 = conv3d_flops(&conv(4, 4, 3, 2, 1, 16)).unwrap();
        assert_eq!(s1, 8 * s2);
        let mut pool = conv(4, 4, 2, 2, 0, 16);
        pool.kind = LayerKind::Pool3d;
        assert!(matches!(conv3d_flops(&pool), Err(Error::UnsupportedKind(_))));
    }

    #[test]
    fn output_dims_rules() {
        let mut l = conv(1, 1, 4, 2, 1, 10);
        l.kind = LayerKind::TransposedConv3d;
        assert_eq!(l.output_dims().unwrap(), [20; 3]);
        assert_eq!(conv(1, 1, 5, 2, 0, 32).output_dims().unwrap(), [14; 3]);
        assert!(conv(1, 1, 5, 1, 0, 4).output_dims().is_err());
    }

    #[test]
    fn single_layer_network() {
        let l = conv(1, 8, 3, 1, 1, 32);
        let net = NetworkSpec {
            name: "one".into(),
            input_channels: 1,
            input_dims: [32; 3],
            layers: vec![l.clone()],
            links: vec![],
        };
        let r = network_cost(&net, 4).unwrap();
        assert_eq!(r.total_flops, conv3d_flops(&l).unwrap());
        assert_eq!(r.activation_bytes, 8 * 32768 * 4);
        assert_eq!(r.peak_activation_bytes, 9 * 32768 * 4);
        assert_eq!(r.input_elements, 32768);
    }

    #[test]
    fn broken_chain_names_the_layer() {
        let net = NetworkSpec {
            name: "bad".into(),
            input_channels: 1,
            input_dims: [32; 3],
            layers: vec![conv(1, 8, 3, 1, 1, 32), conv(4, 8, 3, 1, 1, 32)],
            links: vec![],
        };
        assert!(matches!(network_cost(&net, 4), Err(Error::Spec { layer: 1, .. })));
        let mut linked = net.clone();
        linked.layers[1].in_channels = 8;
        linked.links.push(Link { from: 1, to: 0, merge: Merge::Add });
        assert!(matches!(linked.validate(), Err(Error::Spec { layer: 0, .. })));
    }

    #[test]
    fn builtins_have_documented_shapes() {
        let vf = builtin_spec("voxnet-frequency", &params(32, 64, 10)).unwrap();
        let convs: Vec<_> = vf.layers.iter().filter(|l| l.kind == LayerKind::Conv3d).collect();
        assert_eq!(convs.len(), 2);
        assert!(convs.iter().all(|l| l.stride == [1; 3] && l.out_channels == 128));
        assert_eq!(vf.input_dims, [8; 3]);

        let seg = builtin_spec("segnet-spatial", &params(160, 4, 13)).unwrap();
        let shapes = seg.validate().unwrap();
        let pools = seg.layers.iter().filter(|l| l.kind == LayerKind::Pool3d).count();
        assert_eq!(pools, 4);
        let bottleneck = seg.layers.iter().position(|l| l.name == "enc4.conv_c").unwrap();
        assert_eq!(shapes[bottleneck].1, [10; 3]);
        assert_eq!(shapes.last().unwrap(), &(13, [160; 3]));

        let segf = builtin_spec("segnet-frequency", &params(160, 256, 13)).unwrap();
        assert_eq!(segf.layers.iter().filter(|l| l.kind == LayerKind::Pool3d).count(), 2);
        assert!(segf.layers.iter().all(|l| l.name != "enc1.pool" && l.name != "enc2.pool"));
        assert_eq!(segf.validate().unwrap().last().unwrap(), &(13, [160; 3]));

        let vrn = builtin_spec("vrn-spatial", &params(32, 1, 40)).unwrap();
        let shapes = vrn.validate().unwrap();
        let b2 = vrn.layers.iter().position(|l| l.name == "block2.downsample").unwrap();
        assert_eq!(shapes[b2].1, [8; 3]);
        let vrnf = builtin_spec("vrn-frequency", &params(32, 64, 40)).unwrap();
        assert!(vrnf.layers.iter().all(|l| l.name != "block1.downsample" && l.name != "block2.downsample"));
        assert_eq!(vrnf.layers[0].out_channels, 64);

        assert!(builtin_spec("resnet", &params(32, 1, 10)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let seg = builtin_spec("segnet-frequency", &params(64, 8, 5)).unwrap();
        assert_eq!(NetworkSpec::from_json(&seg.to_json()).unwrap(), seg);
        let r = network_cost(&seg, 4).unwrap();
        let back: CostReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_table().contains("classifier"));
    }
}
