use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wavedge::batch::{run_batch, BatchOptions, BatchSummary, Method};
use wavedge::dataset::pnm::{read_pnm, write_pnm};
use wavedge::dataset::{
    self, label_histogram, Codec, DatasetFormat, EnhancementRecord, ProvenanceManifest,
};
use wavedge::dump::{dump_pyramids, subband_entries};
use wavedge::dwt::{decompose, max_levels};
use wavedge::mm::{enhance_mm_traced, MmTrace};
use wavedge::naive::{enhance_naive, Renormalize};
use wavedge::{Error, Image, Plane, Result, TOOL_VERSION};

use crate::config::{MethodFlags, RunConfig};
use crate::{BatchArgs, Cli, Command, DecomposeArgs, InspectArgs, MmArgs, NaiveArgs};

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Decompose(args) => decompose_cmd(args, &file),
        Command::EnhanceNaive(args) => naive_cmd(args, &file),
        Command::EnhanceMm(args) => mm_cmd(args, &file),
        Command::Batch(args) => batch_cmd(args, &file),
        Command::Inspect(args) => inspect_cmd(args, &file),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn decompose_cmd(args: DecomposeArgs, file: &RunConfig) -> Result<()> {
    file.check_command("decompose")?;
    let input = file.single_input(args.input)?;
    let levels = args.levels.or(file.levels).unwrap_or(2);
    let dump = args.dump.or_else(|| file.dump.clone());
    let img = read_pnm(&input)?;
    let pyramids = decompose(&img, levels)?;

    let (w, h, c) = img.shape();
    println!("input {} {w}x{h}x{c}", input.display());
    println!("levels {levels} (max feasible {})", max_levels(w, h));
    let mut total = 0.0;
    for (entry, _) in subband_entries(&pyramids) {
        let name = entry.file.trim_end_matches(".wvq");
        let shape = format!("{}x{}", entry.width, entry.height);
        println!("{name:<10} {shape:>7} energy {:.15e}", entry.energy);
        total += entry.energy;
    }
    println!("subband total energy {total:.15e}");
    println!("input energy {:.15e}", img.energy());
    if let Some(dir) = dump {
        let index = dump_pyramids(&dir, &pyramids)?;
        println!(
            "wrote {} subbands to {}",
            index.subbands.len(),
            dir.display()
        );
    }
    Ok(())
}

/// Sidecar written next to every single-image output.
#[derive(Serialize)]
struct ImageProvenance<'a> {
    input: String,
    output: String,
    shape: [usize; 3],
    enhancement: EnhancementRecord,
    tool_version: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage_dumps: Option<Vec<String>>,
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut json = serde_json::to_vec_pretty(value).expect("value serializes");
    json.push(b'\n');
    fs::write(path, json).map_err(|e| io_err(path, e))
}

fn finish_single(
    input: &Path,
    output: &Path,
    img: &Image,
    method: &Method,
    stage_dumps: Option<Vec<String>>,
) -> Result<()> {
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    write_pnm(output, img)?;
    let (w, h, c) = img.shape();
    let sidecar = sidecar_path(output);
    write_json(
        &sidecar,
        &ImageProvenance {
            input: input.display().to_string(),
            output: output.display().to_string(),
            shape: [w, h, c],
            enhancement: method.record(),
            tool_version: TOOL_VERSION,
            stage_dumps,
        },
    )?;
    println!("wrote {} ({})", output.display(), sidecar.display());
    Ok(())
}

fn naive_cmd(args: NaiveArgs, file: &RunConfig) -> Result<()> {
    file.check_command("enhance-naive")?;
    let input = file.single_input(args.input)?;
    let output = file.output(args.output)?;
    let cfg = MethodFlags {
        levels: args.levels,
        renorm: args.renorm,
        ..Default::default()
    }
    .naive(file)?;
    let img = read_pnm(&input)?;
    let out = enhance_naive(&img, &cfg)?;
    finish_single(&input, &output, &out, &Method::Naive(cfg), None)
}

fn mm_cmd(args: MmArgs, file: &RunConfig) -> Result<()> {
    file.check_command("enhance-mm")?;
    let input = file.single_input(args.input)?;
    let output = file.output(args.output)?;
    let dump_dir = args.dump_stages.or_else(|| file.dump_stages.clone());
    let cfg = MethodFlags {
        sigma: args.sigma,
        threshold: args.threshold,
        injection: args.inject,
        renorm: args.renorm,
        ..Default::default()
    }
    .mm(file)?;
    let img = read_pnm(&input)?;
    let trace = enhance_mm_traced(&img, &cfg)?;
    let dumped = match dump_dir {
        Some(dir) => Some(dump_stages(&dir, &trace)?),
        None => None,
    };
    finish_single(&input, &output, &trace.output, &Method::Mm(cfg), dumped)
}

/// Pipeline stage images in order. Signed or unbounded stages are rescaled
/// to the full gray range; the smoothed input and the final output are
/// written as they are.
pub const STAGE_NAMES: [&str; 7] = [
    "smoothed",
    "wx",
    "wy",
    "modulus",
    "nms",
    "thresholded",
    "final",
];

fn dump_stages(dir: &Path, trace: &MmTrace) -> Result<Vec<String>> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let collect = |f: &dyn Fn(&wavedge::mm::PlaneStages) -> Plane| {
        Image::from_planes(trace.channels.iter().map(f).collect())
    };
    let rescale = |img: Image| Renormalize::Rescale.apply(&img);
    let images = [
        collect(&|s| s.smoothed.clone())?,
        rescale(collect(&|s| s.wx.clone())?)?,
        rescale(collect(&|s| s.wy.clone())?)?,
        rescale(collect(&|s| s.field.modulus.clone())?)?,
        rescale(collect(&|s| s.maxima.values().clone())?)?,
        rescale(collect(&|s| s.edges.values().clone())?)?,
        trace.output.clone(),
    ];
    let mut names = Vec::with_capacity(images.len());
    for (i, (stage, img)) in STAGE_NAMES.iter().zip(&images).enumerate() {
        let ext = if img.channels() == 1 { "pgm" } else { "ppm" };
        let name = format!("{:02}_{stage}.{ext}", i + 1);
        write_pnm(&dir.join(&name), img)?;
        names.push(name);
    }
    Ok(names)
}

fn guess_format(paths: &[PathBuf]) -> Result<DatasetFormat> {
    match paths {
        [one] if one.is_dir() => Ok(DatasetFormat::ImageDir),
        [_, _] if paths.iter().all(|p| p.to_string_lossy().contains("idx")) => {
            Ok(DatasetFormat::Idx)
        }
        _ if !paths.is_empty()
            && paths
                .iter()
                .all(|p| p.extension().is_some_and(|e| e == "bin")) =>
        {
            Ok(DatasetFormat::CifarBin)
        }
        _ => Err(Error::Param(
            "cannot tell the dataset format from the inputs; pass --format".into(),
        )),
    }
}

fn resolve_format(
    flag: Option<String>,
    file: &RunConfig,
    inputs: &[PathBuf],
) -> Result<DatasetFormat> {
    match flag.or_else(|| file.format.clone()) {
        Some(f) => f.parse(),
        None => guess_format(inputs),
    }
}

fn print_summary(summary: &BatchSummary, method: &Method, out: &Path, prov: &ProvenanceManifest) {
    let secs = |d: std::time::Duration| d.as_secs_f64();
    println!("items        {}", summary.items);
    println!("workers      {}", summary.workers);
    println!(
        "chunk size   {} (max in flight {})",
        summary.chunk_size, summary.max_in_flight
    );
    println!("elapsed      {:.3} s", secs(summary.elapsed));
    println!("throughput   {:.1} items/s", summary.items_per_sec);
    println!(
        "stages       read {:.3} s, enhance {:.3} s, write {:.3} s",
        secs(summary.stages.read),
        secs(summary.stages.enhance),
        secs(summary.stages.write)
    );
    println!(
        "config       {}",
        serde_json::to_string(&method.record()).expect("record serializes")
    );
    println!(
        "output       {} ({} as {}, manifest.json)",
        out.display(),
        prov.count,
        prov.format
    );
}

fn batch_cmd(args: BatchArgs, file: &RunConfig) -> Result<()> {
    file.check_command("batch")?;
    let inputs = file.inputs(args.input);
    let format = resolve_format(args.format, file, &inputs)?;
    let out = file.output(args.out)?;
    let method = MethodFlags {
        sigma: args.sigma,
        levels: args.levels,
        threshold: args.threshold,
        injection: args.inject,
        renorm: args.renorm,
    }
    .method(args.method.as_deref(), file)?;
    let codec: Codec = match args.codec.or_else(|| file.codec.clone()) {
        Some(c) => c.parse()?,
        None => Codec::Same,
    };
    let opts = BatchOptions {
        workers: args.workers.or(file.workers).unwrap_or(1),
        chunk_size: args.chunk_size.or(file.chunk_size).unwrap_or(0),
        codec,
    };
    let (manifest, stream) = dataset::open(format, &inputs)?;
    let (prov, summary) = run_batch(&manifest, stream, &method, &out, &opts, |_| {})?;
    print_summary(&summary, &method, &out, &prov);
    std::io::stdout().flush().ok();
    Ok(())
}

fn inspect_image(path: &Path) -> Result<()> {
    let img = read_pnm(path)?;
    let (w, h, c) = img.shape();
    let (lo, hi) = img
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    println!("image        {}", path.display());
    println!("shape        {w}x{h}x{c}");
    println!("range        [{lo:.6}, {hi:.6}]");
    println!("mean         {:.6}", img.mean());
    println!("energy       {:.6}", img.energy());
    println!("max levels   {}", max_levels(w, h));
    Ok(())
}

fn inspect_cmd(args: InspectArgs, file: &RunConfig) -> Result<()> {
    let inputs = args.inputs;
    if args.format.is_none() && file.format.is_none() {
        if let [one] = inputs.as_slice() {
            let ext = one.extension().and_then(|e| e.to_str());
            if matches!(ext, Some("pgm" | "ppm" | "pnm")) {
                return inspect_image(one);
            }
            if ext == Some("json") {
                let prov = ProvenanceManifest::read(one)?;
                println!(
                    "{}",
                    serde_json::to_string_pretty(&prov).expect("manifest serializes")
                );
                return Ok(());
            }
        }
    }
    let format = resolve_format(args.format, file, &inputs)?;
    let (manifest, stream) = dataset::open(format, &inputs)?;
    let mut labels = Vec::with_capacity(manifest.num_items);
    for (i, record) in stream.enumerate() {
        let record = record.map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("record {i}: {m}")),
            other => other,
        })?;
        labels.push(record.label);
    }
    let (w, h, c) = manifest.image_shape;
    println!("format       {}", manifest.format);
    println!("items        {}", manifest.num_items);
    println!("shape        {w}x{h}x{c}");
    println!("max levels   {}", max_levels(w, h));
    println!("classes      {}", manifest.label_names.len());
    let hist = label_histogram(labels, manifest.label_names.len());
    for (name, count) in manifest.label_names.iter().zip(&hist) {
        println!("  {name:<12} {count}");
    }
    Ok(())
}
