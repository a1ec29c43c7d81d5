//! `voxfreq`: voxelize point clouds, build frequency-domain inputs, select
//! channels and estimate network cost.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data or validation errors.

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rayon::prelude::*;
use voxfreq::costmodel::{builtin_spec, network_cost, BuiltinParams, NetworkSpec, BUILTIN_NAMES};
use voxfreq::freqpack::{denormalize, normalize, reconstruct, transform_grid, ChannelStats, StatsAccumulator};
use voxfreq::grid::{read_points, split_blocks, voxelize, write_points, PointCloud};
use voxfreq::pointmap::{interpolate_scores, ScoreVolume};
use voxfreq::select::{
    apply, load_map, normalized_input_size, round3, save_map, select_top_n, ApplyMode, SelectionPolicy,
};
use voxfreq::store::{self, write_atomic, Entity, Manifest, ManifestEntry};
use voxfreq::SpectralBiasReport;

#[derive(Parser)]
#[command(name = "voxfreq", version, about = "Frequency-domain inputs for 3D CNNs on voxelized point clouds")]
struct Cli {
    /// Suppress informational messages on standard error.
    #[arg(long, global = true)]
    quiet: bool,

    /// Worker threads for per-file parallelism (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point cloud text file(s) to VFT occupancy/attribute grids.
    Voxelize(VoxelizeArgs),
    /// Grid(s) to frequency tensors, optionally normalized.
    Transform(TransformArgs),
    /// Fit per-channel mean and variance over a dataset of frequency tensors.
    Stats(StatsArgs),
    /// Turn a spectral bias report into a channel selection map.
    Select(SelectArgs),
    /// Mask or drop the channels a selection map mutes.
    Apply(ApplyArgs),
    /// Inverse transform a frequency tensor back to a spatial volume.
    Reconstruct(ReconstructArgs),
    /// Transfer per-voxel class scores to points.
    Interpolate(InterpolateArgs),
    /// FLOPs and activation memory of a network.
    Cost(CostArgs),
    /// Normalized input size of a channel selection.
    Size(SizeArgs),
}

/// A single input file, or a manifest whose samples are processed in parallel.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,

    /// Dataset manifest; `--output` is then a directory that receives one
    /// file per sample plus a new manifest.json.
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct VoxelizeArgs {
    #[command(flatten)]
    source: Source,

    /// Grid dims: `D` or `X,Y,Z`, each a multiple of 4.
    #[arg(long, default_value = "32", value_parser = parse_dims)]
    dims: [usize; 3],

    /// Voxel edge in point units (default with --block-extent: extent / D).
    #[arg(long)]
    voxel_size: Option<f64>,

    /// Grid minimum corner `X,Y,Z`.
    #[arg(long, default_value = "0,0,0", value_parser = parse_triple)]
    origin: [f64; 3],

    /// Split the scene into cubes of this edge and write one grid per block
    /// into the `--output` directory.
    #[arg(long)]
    block_extent: Option<f64>,

    #[arg(long, default_value_t = 0.0, requires = "block_extent")]
    overlap: f64,

    /// Convert `r g b` columns to Y, Cb, Cr attributes.
    #[arg(long)]
    ycbcr: bool,

    #[arg(long, value_name = "PATH")]
    output: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    source: Source,

    /// Normalize with these statistics.
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,

    #[arg(long, value_name = "PATH")]
    output: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Manifest of frequency tensors.
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,

    /// Only use samples with this split tag.
    #[arg(long)]
    split: Option<String>,

    #[arg(long, default_value_t = voxfreq::freqpack::DEFAULT_EPSILON)]
    epsilon: f64,

    #[arg(long, value_name = "FILE")]
    output: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long, value_name = "FILE")]
    report: PathBuf,

    /// Number of channels to keep.
    #[arg(long)]
    n: usize,

    /// `global` or `per_attribute`.
    #[arg(long, default_value = "global")]
    policy: SelectionPolicy,

    #[arg(long, value_name = "FILE")]
    output: PathBuf,
}

#[derive(Args)]
struct ApplyArgs {
    #[command(flatten)]
    source: Source,

    #[arg(long, value_name = "FILE")]
    map: PathBuf,

    /// `mask` zeroes muted channels, `compact` drops them.
    #[arg(long, default_value = "compact")]
    mode: ApplyMode,

    #[arg(long, value_name = "PATH")]
    output: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,

    /// Statistics used to denormalize a normalized tensor first.
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    output: PathBuf,
}

#[derive(Args)]
struct InterpolateArgs {
    /// Volume file with one channel per class.
    #[arg(long, value_name = "FILE")]
    scores: PathBuf,

    /// Point cloud text file.
    #[arg(long, value_name = "FILE")]
    points: PathBuf,

    /// Points with the predicted label appended as the last column.
    #[arg(long, value_name = "FILE")]
    output: PathBuf,
}

#[derive(Args)]
struct CostArgs {
    /// Built-in network name.
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    network: Option<String>,

    /// Network spec JSON file.
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,

    /// Spatial grid edge D (frequency variants run on D / 4).
    #[arg(long, default_value_t = 32)]
    dims: usize,

    /// Input channels.
    #[arg(long, default_value_t = 1)]
    channels: usize,

    #[arg(long, default_value_t = 10)]
    classes: usize,

    /// Comma-separated stage widths overriding the defaults.
    #[arg(long, value_delimiter = ',')]
    widths: Option<Vec<usize>>,

    #[arg(long, default_value_t = 4)]
    bytes_per_element: u64,

    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,

    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SizeArgs {
    /// Selected channels.
    #[arg(long)]
    n: usize,

    /// Grid edge D of the transformed input.
    #[arg(long)]
    dims: usize,

    /// Attributes per voxel.
    #[arg(long, default_value_t = 1)]
    attrs: usize,

    /// Grid edge of the spatial reference input (default: --dims).
    #[arg(long, requires = "ref_attrs")]
    ref_dims: Option<usize>,

    /// Attributes of the spatial reference input.
    #[arg(long, requires = "ref_dims")]
    ref_attrs: Option<usize>,

    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn parse_dims(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> =
        s.split(',').map(|p| p.trim().parse().map_err(|_| format!("bad dimension `{p}`"))).collect::<Result<_, _>>()?;
    match parts[..] {
        [d] => Ok([d; 3]),
        [x, y, z] => Ok([x, y, z]),
        _ => Err("expected D or X,Y,Z".into()),
    }
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> =
        s.split(',').map(|p| p.trim().parse().map_err(|_| format!("bad number `{p}`"))).collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| "expected X,Y,Z".to_string())
}

/// Argument combinations clap cannot express; reported with exit status 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let default_level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VOXFREQ_LOG", default_level))
        .format_target(false)
        .format_timestamp(None)
        .init();

    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Voxelize(a) => cmd_voxelize(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Select(a) => cmd_select(a),
        Command::Apply(a) => cmd_apply(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Interpolate(a) => cmd_interpolate(a),
        Command::Cost(a) => cmd_cost(a),
        Command::Size(a) => cmd_size(a),
    }
}

fn load_points(path: &Path, ycbcr: bool) -> anyhow::Result<PointCloud> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let cloud = read_points(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    if !ycbcr {
        return Ok(cloud);
    }
    let (converted, clamped) = cloud.to_ycbcr().with_context(|| format!("converting colors of {}", path.display()))?;
    if clamped > 0 {
        warn!("{}: {clamped} points had RGB values outside [0, 255] and were clamped", path.display());
    }
    Ok(converted)
}

fn load_manifest(path: &Path) -> anyhow::Result<(Manifest, PathBuf)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest = Manifest::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    manifest.validate_files(&base)?;
    Ok((manifest, base))
}

fn write_json(path: &Path, text: &str) -> anyhow::Result<()> {
    let mut bytes = text.as_bytes().to_vec();
    bytes.push(b'\n');
    write_atomic(path, &bytes).with_context(|| format!("writing {}", path.display()))
}

/// Runs `f(input, output)` for every manifest sample in parallel, writing
/// `<stem>.vft` files and a manifest with the same labels and splits.
fn for_each_sample<F>(manifest: &Path, out_dir: &Path, f: F) -> anyhow::Result<()>
where
    F: Fn(&Path, &Path) -> anyhow::Result<()> + Sync,
{
    let (m, base) = load_manifest(manifest)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut names: Vec<String> =
        m.samples.iter().map(|s| Path::new(&s.path).with_extension("vft").to_string_lossy().into_owned()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        // flatten to a unique name when two samples only differ by extension
        names = (0..names.len()).map(|i| format!("sample_{i:05}.vft")).collect();
    }
    m.samples.par_iter().zip(&names).try_for_each(|(s, name)| {
        f(&base.join(&s.path), &out_dir.join(name)).with_context(|| format!("sample {}", s.path))
    })?;
    let entries = m
        .samples
        .iter()
        .zip(names)
        .map(|(s, path)| ManifestEntry { path, label: s.label, split: s.split.clone() })
        .collect();
    write_json(&out_dir.join("manifest.json"), &Manifest::new(entries)?.to_json())?;
    info!("processed {} samples into {}", m.samples.len(), out_dir.display());
    Ok(())
}

fn cmd_voxelize(a: VoxelizeArgs) -> anyhow::Result<()> {
    if let Some(extent) = a.block_extent {
        let input = a.source.input.as_ref().ok_or_else(|| usage("--block-extent needs --input"))?;
        if !(extent > 0.0) || !(a.overlap >= 0.0) {
            return Err(usage("--block-extent must be positive and --overlap non-negative"));
        }
        let voxel_size = a.voxel_size.unwrap_or(extent / a.dims[0] as f64);
        let cloud = load_points(input, a.ycbcr)?;
        let blocks = split_blocks(&cloud, extent, a.overlap)?;
        fs::create_dir_all(&a.output).with_context(|| format!("creating {}", a.output.display()))?;
        let written: Vec<ManifestEntry> = blocks
            .par_iter()
            .map(|b| {
                let v = voxelize(&b.cloud, a.dims, b.origin, voxel_size)?;
                if v.dropped > 0 {
                    warn!("block {:?}: {} points outside the grid were dropped", b.index, v.dropped);
                }
                let name = format!("block_{}_{}_{}.vft", b.index[0], b.index[1], b.index[2]);
                store::write(&Entity::Grid(v.grid), a.output.join(&name))?;
                Ok(ManifestEntry { path: name, label: None, split: "scene".into() })
            })
            .collect::<anyhow::Result<_>>()?;
        write_json(&a.output.join("manifest.json"), &Manifest::new(written)?.to_json())?;
        info!("wrote {} blocks to {}", blocks.len(), a.output.display());
        return Ok(());
    }
    let voxel_size = a.voxel_size.ok_or_else(|| usage("--voxel-size is required without --block-extent"))?;
    let run_one = |input: &Path, output: &Path| -> anyhow::Result<()> {
        let cloud = load_points(input, a.ycbcr)?;
        let v = voxelize(&cloud, a.dims, a.origin, voxel_size)?;
        if v.dropped > 0 {
            warn!(
                "{}: {} of {} points fell outside the grid and were dropped",
                input.display(),
                v.dropped,
                cloud.len()
            );
        }
        info!("{}: {} occupied voxels", input.display(), v.grid.occupied_count());
        store::write(&Entity::Grid(v.grid), output)?;
        Ok(())
    };
    match (&a.source.input, &a.source.manifest) {
        (Some(input), _) => run_one(input, &a.output),
        (_, Some(m)) => for_each_sample(m, &a.output, run_one),
        _ => unreachable!("clap enforces one source"),
    }
}

fn load_stats(path: &Path) -> anyhow::Result<ChannelStats> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ChannelStats::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_transform(a: TransformArgs) -> anyhow::Result<()> {
    let stats = a.stats.as_deref().map(load_stats).transpose()?;
    let run_one = |input: &Path, output: &Path| -> anyhow::Result<()> {
        let grid = store::read_grid(input).with_context(|| format!("reading {}", input.display()))?;
        let mut t = transform_grid(&grid)?;
        if let Some(s) = &stats {
            t = normalize(&t, s)?;
        }
        store::write(&Entity::Freq(t), output)?;
        Ok(())
    };
    match (&a.source.input, &a.source.manifest) {
        (Some(input), _) => run_one(input, &a.output),
        (_, Some(m)) => for_each_sample(m, &a.output, run_one),
        _ => unreachable!("clap enforces one source"),
    }
}

fn cmd_stats(a: StatsArgs) -> anyhow::Result<()> {
    if !(a.epsilon > 0.0) {
        return Err(usage("--epsilon must be positive"));
    }
    let (m, base) = load_manifest(&a.manifest)?;
    let samples: Vec<&ManifestEntry> = match &a.split {
        Some(split) => m.split(split).collect(),
        None => m.samples.iter().collect(),
    };
    if samples.is_empty() {
        bail!("no samples to fit statistics on");
    }
    // per-file accumulators in parallel, merged in manifest order so the result
    // does not depend on scheduling
    let partial: Vec<StatsAccumulator> = samples
        .par_iter()
        .map(|s| {
            let t = store::read_freq(base.join(&s.path)).with_context(|| format!("reading {}", s.path))?;
            let mut acc = StatsAccumulator::for_tensor(&t);
            acc.push(&t).with_context(|| format!("sample {}", s.path))?;
            Ok(acc)
        })
        .collect::<anyhow::Result<_>>()?;
    let mut iter = partial.into_iter();
    let mut acc = iter.next().expect("non-empty");
    for other in iter {
        acc = acc.merge(&other)?;
    }
    let stats = acc.finish(a.epsilon)?;
    write_json(&a.output, &stats.to_json())?;
    info!("fitted {} channels over {} samples (digest {:08x})", stats.channels().len(), samples.len(), stats.digest());
    Ok(())
}

fn cmd_select(a: SelectArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&a.report).with_context(|| format!("reading {}", a.report.display()))?;
    let report = SpectralBiasReport::from_json(&text).with_context(|| format!("parsing {}", a.report.display()))?;
    let id = a.report.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let map = select_top_n(&report, &id, a.n, a.policy)?;
    save_map(&map, &a.output)?;
    info!(
        "selected {} of {} channels: {:?}",
        map.n_selected(),
        map.channel_count(),
        map.selected().collect::<Vec<_>>()
    );
    Ok(())
}

fn cmd_apply(a: ApplyArgs) -> anyhow::Result<()> {
    let map = load_map(&a.map).with_context(|| format!("reading {}", a.map.display()))?;
    let run_one = |input: &Path, output: &Path| -> anyhow::Result<()> {
        let t = store::read_freq(input).with_context(|| format!("reading {}", input.display()))?;
        store::write(&Entity::Freq(apply(&t, &map, a.mode)?), output)?;
        Ok(())
    };
    match (&a.source.input, &a.source.manifest) {
        (Some(input), _) => run_one(input, &a.output),
        (_, Some(m)) => for_each_sample(m, &a.output, run_one),
        _ => unreachable!("clap enforces one source"),
    }
}

fn cmd_reconstruct(a: ReconstructArgs) -> anyhow::Result<()> {
    let mut t = store::read_freq(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    if t.is_normalized() {
        let path = a.stats.as_ref().ok_or_else(|| usage("the tensor is normalized; pass --stats to denormalize it"))?;
        t = denormalize(&t, &load_stats(path)?)?;
    }
    let v = reconstruct(&t)?;
    store::write(&Entity::Volume(v), &a.output)?;
    Ok(())
}

fn cmd_interpolate(a: InterpolateArgs) -> anyhow::Result<()> {
    let volume = store::read_volume(&a.scores).with_context(|| format!("reading {}", a.scores.display()))?;
    let scores = ScoreVolume::from_volume(&volume)?;
    let cloud = load_points(&a.points, false)?;
    let out = interpolate_scores(&cloud, &scores);
    if out.outside > 0 {
        warn!("{} points lay outside the volume and used their nearest voxel", out.outside);
    }
    let mut buf = Vec::new();
    write_points(&cloud, Some(&out.labels), &mut buf)?;
    write_atomic(&a.output, &buf)?;
    info!("labeled {} points", cloud.len());
    Ok(())
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => write_json(path, text.trim_end()),
        None => {
            let mut stdout = std::io::stdout().lock();
            write!(stdout, "{text}")?;
            if !text.ends_with('\n') {
                writeln!(stdout)?;
            }
            Ok(())
        }
    }
}

fn cmd_cost(a: CostArgs) -> anyhow::Result<()> {
    let spec = match (&a.network, &a.spec) {
        (Some(name), _) => {
            if !BUILTIN_NAMES.contains(&name.as_str()) {
                return Err(usage(format!("unknown network `{name}`; known: {}", BUILTIN_NAMES.join(", "))));
            }
            let params =
                BuiltinParams { dims: a.dims, channels: a.channels, classes: a.classes, widths: a.widths.clone() };
            builtin_spec(name, &params)?
        }
        (_, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            NetworkSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        _ => unreachable!("clap enforces one source"),
    };
    if a.bytes_per_element == 0 {
        return Err(usage("--bytes-per-element must be positive"));
    }
    let report = network_cost(&spec, a.bytes_per_element)?;
    let text = if a.json { report.to_json() } else { report.to_table() };
    emit(a.output.as_deref(), &text)
}

fn cmd_size(a: SizeArgs) -> anyhow::Result<()> {
    let reference = a.ref_dims.zip(a.ref_attrs);
    let exact = normalized_input_size(a.n, a.dims, a.attrs, reference).map_err(|e| usage(e.to_string()))?;
    emit(a.output.as_deref(), &format!("{:.3} {exact}\n", round3(exact)))
}
