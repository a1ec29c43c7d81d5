//! Point clouds, hit-grid voxelization and scene splitting.
//!
//! A voxel is occupied iff at least one point falls inside its half-open cube
//! `[origin + i*s, origin + (i+1)*s)`. Point attributes (colors) are averaged
//! over the points inside each occupied voxel; empty voxels carry 0.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::volume::{linear_index, voxel_count, Dims3, GridGeometry};

/// Name of the binary occupancy feature; always the first feature of a grid.
pub const OCCUPANCY: &str = "occupancy";

/// Raw 3D points with optional named per-point scalar attributes and labels.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<[f64; 3]>,
    attribute_names: Vec<String>,
    attributes: Vec<Vec<f64>>,
    labels: Option<Vec<u32>>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidInput(format!("point {i} has a non-finite coordinate")));
        }
        Ok(Self { points, ..Default::default() })
    }

    pub fn with_attribute(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.len() != self.points.len() {
            return Err(Error::InvalidInput(format!(
                "attribute `{name}` has {} values for {} points",
                values.len(),
                self.points.len()
            )));
        }
        if name == OCCUPANCY || self.attribute_names.contains(&name) {
            return Err(Error::InvalidInput(format!("duplicate attribute name `{name}`")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("attribute `{name}` has non-finite values")));
        }
        self.attribute_names.push(name);
        self.attributes.push(values);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::InvalidInput(format!("{} labels for {} points", labels.len(), self.points.len())));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn attribute(&self, name: &str) -> Option<&[f64]> {
        self.attribute_names.iter().position(|n| n == name).map(|i| self.attributes[i].as_slice())
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    /// Axis-aligned bounding box `(min, max)`, or `None` for an empty cloud.
    pub fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(mut lo, mut hi), p| {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
            (lo, hi)
        }))
    }

    /// Keeps the points at `indices`, in that order, with their attributes and labels.
    pub fn subset(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            attribute_names: self.attribute_names.clone(),
            attributes: self.attributes.iter().map(|a| indices.iter().map(|&i| a[i]).collect()).collect(),
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }

    pub fn translated(&self, offset: [f64; 3]) -> PointCloud {
        let mut out = self.clone();
        for p in &mut out.points {
            for a in 0..3 {
                p[a] += offset[a];
            }
        }
        out
    }

    /// Replaces `r`, `g`, `b` attributes with `Y`, `Cb`, `Cr`.
    ///
    /// Returns the converted cloud and the number of points whose RGB input
    /// had to be clamped into `[0, 255]`.
    pub fn to_ycbcr(&self) -> Result<(PointCloud, usize)> {
        let (r, g, b) = match (self.attribute("r"), self.attribute("g"), self.attribute("b")) {
            (Some(r), Some(g), Some(b)) => (r, g, b),
            _ => return Err(Error::UnknownAttribute("r/g/b".into())),
        };
        let mut clamped = 0;
        let mut ycc = [Vec::with_capacity(self.len()), Vec::with_capacity(self.len()), Vec::with_capacity(self.len())];
        for i in 0..self.len() {
            let (v, c) = rgb_to_ycbcr(r[i], g[i], b[i]);
            clamped += c as usize;
            for k in 0..3 {
                ycc[k].push(v[k]);
            }
        }
        let mut out = PointCloud { points: self.points.clone(), labels: self.labels.clone(), ..Default::default() };
        for (name, values) in self.attribute_names.iter().zip(&self.attributes) {
            if !matches!(name.as_str(), "r" | "g" | "b") {
                out = out.with_attribute(name.clone(), values.clone())?;
            }
        }
        let [y, cb, cr] = ycc;
        out = out.with_attribute("Y", y)?.with_attribute("Cb", cb)?.with_attribute("Cr", cr)?;
        Ok((out, clamped))
    }
}

/// Full-range BT.601 RGB to YCbCr.
///
/// Inputs outside `[0, 255]` are clamped and reported through the returned
/// flag; outputs are clamped into `[0, 255]` silently (saturated red gives
/// Cr = 255.5 before clamping).
pub fn rgb_to_ycbcr(r: f64, g: f64, b: f64) -> ([f64; 3], bool) {
    let clamp = |v: f64| v.clamp(0.0, 255.0);
    let (r2, g2, b2) = (clamp(r), clamp(g), clamp(b));
    let input_clamped = r2 != r || g2 != g || b2 != b;
    let y = 0.299 * r2 + 0.587 * g2 + 0.114 * b2;
    let cb = 128.0 - 0.168736 * r2 - 0.331264 * g2 + 0.5 * b2;
    let cr = 128.0 + 0.5 * r2 - 0.418688 * g2 - 0.081312 * b2;
    ([clamp(y), clamp(cb), clamp(cr)], input_clamped)
}

/// Reads the whitespace-separated point format: `x y z [r g b] [label]`.
///
/// Column counts 3, 4, 6 and 7 are accepted and must be consistent across
/// lines. `#` starts a comment. Colors become attributes `r`, `g`, `b`.
pub fn read_points<R: BufRead>(reader: R) -> Result<PointCloud> {
    let mut columns: Option<usize> = None;
    let mut points = Vec::new();
    let mut rgb: [Vec<f64>; 3] = Default::default();
    let mut labels = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let n = fields.len();
        let err = |msg: String| Error::Parse { line: lineno + 1, msg };
        if !matches!(n, 3 | 4 | 6 | 7) {
            return Err(err(format!("expected 3, 4, 6 or 7 columns, found {n}")));
        }
        match columns {
            None => columns = Some(n),
            Some(c) if c != n => return Err(err(format!("expected {c} columns, found {n}"))),
            _ => {}
        }
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| err(format!("not a number: `{s}`")))?;
            if !v.is_finite() {
                return Err(err(format!("non-finite value `{s}`")));
            }
            Ok(v)
        };
        points.push([num(fields[0])?, num(fields[1])?, num(fields[2])?]);
        if n >= 6 {
            for k in 0..3 {
                rgb[k].push(num(fields[3 + k])?);
            }
        }
        if n == 4 || n == 7 {
            let s = fields[n - 1];
            labels.push(s.parse::<u32>().map_err(|_| err(format!("label must be a non-negative integer, got `{s}`")))?);
        }
    }
    let mut cloud = PointCloud::new(points)?;
    if matches!(columns, Some(6 | 7)) {
        let [r, g, b] = rgb;
        cloud = cloud.with_attribute("r", r)?.with_attribute("g", g)?.with_attribute("b", b)?;
    }
    if matches!(columns, Some(4 | 7)) {
        cloud = cloud.with_labels(labels)?;
    }
    Ok(cloud)
}

/// Writes `x y z [attributes...] [label] [extra]`, one point per line.
///
/// `extra` appends one more integer column, used for predicted labels.
pub fn write_points<W: Write>(cloud: &PointCloud, extra: Option<&[u32]>, mut out: W) -> Result<()> {
    if let Some(extra) = extra {
        if extra.len() != cloud.len() {
            return Err(Error::Shape(format!("{} extra labels for {} points", extra.len(), cloud.len())));
        }
    }
    for (i, p) in cloud.points.iter().enumerate() {
        write!(out, "{} {} {}", p[0], p[1], p[2])?;
        for a in &cloud.attributes {
            write!(out, " {}", a[i])?;
        }
        if let Some(l) = &cloud.labels {
            write!(out, " {}", l[i])?;
        }
        if let Some(e) = extra {
            write!(out, " {}", e[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Dense hit grid with per-voxel averaged attributes.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    dims: Dims3,
    geometry: GridGeometry,
    occupancy: Vec<u8>,
    attribute_names: Vec<String>,
    attributes: Vec<Vec<f64>>,
}

/// Result of [`voxelize`]: the grid plus the number of points outside its extent.
#[derive(Clone, Debug, PartialEq)]
pub struct Voxelized {
    pub grid: VoxelGrid,
    pub dropped: usize,
}

pub(crate) fn check_block_dims(dims: Dims3) -> Result<()> {
    if dims.iter().any(|&d| d == 0 || d % 4 != 0) {
        return Err(Error::Config(format!("grid dims must be positive multiples of 4, got {dims:?}")));
    }
    Ok(())
}

impl VoxelGrid {
    /// Assembles a grid from raw parts, checking every grid invariant.
    pub fn from_parts(
        dims: Dims3,
        geometry: GridGeometry,
        occupancy: Vec<u8>,
        attribute_names: Vec<String>,
        attributes: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_block_dims(dims)?;
        let n = voxel_count(dims);
        if occupancy.len() != n {
            return Err(Error::Shape(format!("occupancy has {} voxels, expected {n}", occupancy.len())));
        }
        if occupancy.iter().any(|&o| o > 1) {
            return Err(Error::InvalidInput("occupancy must be 0 or 1".into()));
        }
        if attribute_names.len() != attributes.len() {
            return Err(Error::Shape("attribute names and values differ in length".into()));
        }
        for (name, values) in attribute_names.iter().zip(&attributes) {
            if values.len() != n {
                return Err(Error::Shape(format!("attribute `{name}` has {} voxels, expected {n}", values.len())));
            }
            let leaks = values.iter().zip(&occupancy).any(|(&v, &o)| o == 0 && v != 0.0);
            if leaks {
                return Err(Error::InvalidInput(format!("attribute `{name}` is non-zero in an empty voxel")));
            }
        }
        Ok(Self { dims, geometry, occupancy, attribute_names, attributes })
    }

    pub fn dims(&self) -> Dims3 {
        self.dims
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occupancy
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o == 1).count()
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn attribute(&self, name: &str) -> Option<&[f64]> {
        self.attribute_names.iter().position(|n| n == name).map(|i| self.attributes[i].as_slice())
    }

    /// Feature names in transform order: occupancy first, then the attributes.
    pub fn feature_names(&self) -> Vec<String> {
        std::iter::once(OCCUPANCY.to_string()).chain(self.attribute_names.iter().cloned()).collect()
    }

    /// Number of per-voxel features (occupancy counts as one).
    pub fn feature_count(&self) -> usize {
        1 + self.attribute_names.len()
    }

    /// A feature as a dense f64 field.
    pub fn feature(&self, name: &str) -> Result<Vec<f64>> {
        if name == OCCUPANCY {
            return Ok(self.occupancy.iter().map(|&o| o as f64).collect());
        }
        self.attribute(name).map(<[f64]>::to_vec).ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }
}

/// Voxelizes `cloud` into a hit grid of `dims` voxels of edge `voxel_size` starting at `origin`.
pub fn voxelize(cloud: &PointCloud, dims: Dims3, origin: [f64; 3], voxel_size: f64) -> Result<Voxelized> {
    check_block_dims(dims)?;
    let geometry = GridGeometry::new(origin, voxel_size)?;
    let n = voxel_count(dims);
    let mut hits = vec![0u32; n];
    let mut sums = vec![vec![0.0f64; n]; cloud.attributes.len()];
    let mut dropped = 0;

    'points: for (pi, p) in cloud.points.iter().enumerate() {
        let mut cell = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - origin[a]) / voxel_size).floor();
            if !(f >= 0.0 && f < dims[a] as f64) {
                dropped += 1;
                continue 'points;
            }
            cell[a] = f as usize;
        }
        let idx = linear_index(dims, cell);
        hits[idx] += 1;
        for (sum, values) in sums.iter_mut().zip(&cloud.attributes) {
            sum[idx] += values[pi];
        }
    }

    let occupancy: Vec<u8> = hits.iter().map(|&h| (h > 0) as u8).collect();
    for sum in &mut sums {
        for (v, &h) in sum.iter_mut().zip(&hits) {
            if h > 0 {
                *v /= h as f64;
            }
        }
    }
    Ok(Voxelized {
        grid: VoxelGrid { dims, geometry, occupancy, attribute_names: cloud.attribute_names.clone(), attributes: sums },
        dropped,
    })
}

/// One tile of a scene split.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneBlock {
    /// Tile index along x, y, z.
    pub index: [usize; 3],
    /// Minimum corner of the tile (without overlap).
    pub origin: [f64; 3],
    pub cloud: PointCloud,
}

/// Tiles the cloud's bounding box with cubes of edge `block_extent`.
///
/// The tile count per axis is `max(1, ceil(span / extent))`. Each point is
/// assigned to the tile containing it (points on the far boundary go to the
/// last tile) and additionally to every tile whose box grown by `overlap`
/// contains it. Tiles without points are omitted.
pub fn split_blocks(cloud: &PointCloud, block_extent: f64, overlap: f64) -> Result<Vec<SceneBlock>> {
    if !(block_extent > 0.0) || !block_extent.is_finite() {
        return Err(Error::Config(format!("block extent must be positive, got {block_extent}")));
    }
    if !(overlap >= 0.0) || !overlap.is_finite() {
        return Err(Error::Config(format!("overlap must be non-negative, got {overlap}")));
    }
    let Some((lo, hi)) = cloud.bounds() else {
        return Ok(Vec::new());
    };
    let mut counts = [1usize; 3];
    for a in 0..3 {
        counts[a] = (((hi[a] - lo[a]) / block_extent).ceil() as usize).max(1);
    }
    let tile_count = counts.iter().product::<usize>();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); tile_count];

    for (pi, p) in cloud.points.iter().enumerate() {
        let mut ranges = [(0usize, 0usize); 3];
        for a in 0..3 {
            let rel = p[a] - lo[a];
            let home = ((rel / block_extent).floor() as usize).min(counts[a] - 1);
            let mut first = home;
            let mut last = home;
            if overlap > 0.0 {
                while first > 0 && rel < first as f64 * block_extent + overlap {
                    first -= 1;
                }
                while last + 1 < counts[a] && rel >= (last + 1) as f64 * block_extent - overlap {
                    last += 1;
                }
            }
            ranges[a] = (first, last);
        }
        for z in ranges[2].0..=ranges[2].1 {
            for y in ranges[1].0..=ranges[1].1 {
                for x in ranges[0].0..=ranges[0].1 {
                    members[linear_index(counts, [x, y, z])].push(pi);
                }
            }
        }
    }

    Ok(members
        .into_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(t, m)| {
            let index = crate::volume::unlinear_index(counts, t);
            let origin = [
                lo[0] + index[0] as f64 * block_extent,
                lo[1] + index[1] as f64 * block_extent,
                lo[2] + index[2] as f64 * block_extent,
            ];
            SceneBlock { index, origin, cloud: cloud.subset(&m) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[[f64; 3]]) -> PointCloud {
        PointCloud::new(points.to_vec()).unwrap()
    }

    #[test]
    fn single_point_hits_one_voxel() {
        let v = voxelize(&cloud(&[[0.03, 0.03, 0.03]]), [4, 4, 4], [0.0; 3], 0.0625).unwrap();
        assert_eq!(v.dropped, 0);
        assert_eq!(v.grid.occupancy()[0], 1);
        assert_eq!(v.grid.occupied_count(), 1);
    }

    #[test]
    fn attributes_are_averaged() {
        let c = cloud(&[[0.01, 0.01, 0.01], [0.02, 0.02, 0.02]]).with_attribute("Y", vec![100.0, 50.0]).unwrap();
        let g = voxelize(&c, [4, 4, 4], [0.0; 3], 0.0625).unwrap().grid;
        assert_eq!(g.attribute("Y").unwrap()[0], 75.0);
        assert!(g.attribute("Y").unwrap()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn subblock_resolutions() {
        assert_eq!(5.0 / 80.0, 0.0625);
        assert_eq!(5.0 / 160.0, 0.03125);
    }

    #[test]
    fn boundary_points_are_dropped_and_counted() {
        // exactly on the max face, and one behind the origin
        let c = cloud(&[[1.0, 0.5, 0.5], [-0.01, 0.5, 0.5], [0.999, 0.999, 0.999]]);
        let v = voxelize(&c, [4, 4, 4], [0.0; 3], 0.25).unwrap();
        assert_eq!(v.dropped, 2);
        assert_eq!(v.grid.occupancy()[linear_index([4, 4, 4], [3, 3, 3])], 1);
    }

    #[test]
    fn rejects_bad_configuration() {
        let c = cloud(&[[0.0; 3]]);
        assert!(matches!(voxelize(&c, [6, 6, 6], [0.0; 3], 1.0), Err(Error::Config(_))));
        assert!(matches!(voxelize(&c, [4, 4, 4], [0.0; 3], 0.0), Err(Error::Config(_))));
        assert!(matches!(PointCloud::new(vec![[f64::NAN, 0.0, 0.0]]), Err(Error::InvalidInput(_))));
        assert!(cloud(&[[0.0; 3]]).with_attribute("Y", vec![]).is_err());
    }

    #[test]
    fn ycbcr_reference_colors() {
        let (black, c) = rgb_to_ycbcr(0.0, 0.0, 0.0);
        assert!(!c);
        assert_eq!(black, [0.0, 128.0, 128.0]);
        let (white, _) = rgb_to_ycbcr(255.0, 255.0, 255.0);
        for (got, want) in white.iter().zip([255.0, 128.0, 128.0]) {
            assert!((got - want).abs() < 1e-9, "{white:?}");
        }
        let (red, c) = rgb_to_ycbcr(255.0, 0.0, 0.0);
        assert!(!c);
        assert!((red[0] - 76.245).abs() < 1e-9);
        assert!((red[1] - 84.972_32).abs() < 1e-9);
        assert_eq!(red[2], 255.0);
        let (_, c) = rgb_to_ycbcr(300.0, -1.0, 0.0);
        assert!(c);
    }

    #[test]
    fn split_counts() {
        let grid_points = |ext: [f64; 3]| -> PointCloud {
            let mut pts = Vec::new();
            for i in 0..=24 {
                for j in 0..=10 {
                    let t = i as f64 / 24.0;
                    let s = j as f64 / 10.0;
                    pts.push([t * ext[0], s * ext[1], (1.0 - s) * ext[2]]);
                }
            }
            cloud(&pts)
        };
        let blocks = split_blocks(&grid_points([10.0, 5.0, 5.0]), 5.0, 0.0).unwrap();
        assert_eq!(blocks.len(), 2);
        let blocks = split_blocks(&grid_points([5.0, 5.0, 5.0]), 5.0, 0.0).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].cloud.len(), 25 * 11);
        let blocks = split_blocks(&grid_points([12.0, 5.0, 5.0]), 5.0, 0.0).unwrap();
        assert_eq!(blocks.len(), 3);
        assert_eq!(blocks.iter().map(|b| b.index[0]).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(blocks[2].origin[0], 10.0);
        assert!(split_blocks(&PointCloud::default(), 5.0, 0.0).unwrap().is_empty());
        assert!(split_blocks(&grid_points([1.0; 3]), 0.0, 0.0).is_err());
    }

    #[test]
    fn overlap_duplicates_border_points() {
        let c = cloud(&[[0.0, 0.0, 0.0], [4.9, 0.0, 0.0], [5.1, 0.0, 0.0], [10.0, 0.0, 0.0]]);
        let plain = split_blocks(&c, 5.0, 0.0).unwrap();
        assert_eq!(plain.iter().map(|b| b.cloud.len()).sum::<usize>(), 4);
        let wide = split_blocks(&c, 5.0, 0.5).unwrap();
        assert_eq!(wide[0].cloud.len(), 3);
        assert_eq!(wide[1].cloud.len(), 3);
    }

    #[test]
    fn text_format_round_trip() {
        let text = "# header\n0 0 0 255 0 0 3\n1.5 2 -3 10 20 30 1 # trailing\n\n";
        let c = read_points(text.as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.attribute("g").unwrap(), &[0.0, 20.0]);
        assert_eq!(c.labels().unwrap(), &[3, 1]);
        let mut buf = Vec::new();
        write_points(&c, None, &mut buf).unwrap();
        assert_eq!(read_points(buf.as_slice()).unwrap(), c);

        assert!(matches!(read_points("0 0\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_points("0 0 0\n0 0 0 1\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_points("0 0 nan\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(read_points("0 0 0 -1\n".as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn to_ycbcr_replaces_rgb() {
        let c = read_points("0 0 0 255 255 255\n".as_bytes()).unwrap();
        let (y, clamped) = c.to_ycbcr().unwrap();
        assert_eq!(clamped, 0);
        assert_eq!(y.attribute_names(), &["Y", "Cb", "Cr"]);
        assert!(cloud(&[[0.0; 3]]).to_ycbcr().is_err());
    }
}
