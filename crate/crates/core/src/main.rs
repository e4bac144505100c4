use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use depth_layering::imgio::{self, ImgIoError};
use depth_layering::linking::{run_layering, LayeringParams};
use depth_layering::oracle::{compare_partitions, oracle_object_layers, PixelPartition};
use depth_layering::synthgen::{
    gen_office, gen_random_plateaus, gen_rings, OfficeConfig, PlateauConfig, RingsConfig,
    SyntheticScene,
};
use depth_layering::thresholding::{estimate_threshold, EstimatorMethod, ThresholdConfig};
use depth_layering::LabelMap;

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_INTERNAL: u8 = 3;
const EXIT_NOT_EQUIVALENT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "depth-layer",
    about = "Depth-wise layering of dense depth maps",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the layering pipeline on a depth map and write its artifacts.
    Layer(LayerArgs),
    /// Generate a synthetic scene with ground truth.
    Synth(SynthArgs),
    /// Write the brute-force reference object-layer partition.
    Oracle(OracleArgs),
    /// Compare two label maps up to relabeling.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FarSide {
    /// Low gray values are far (darker = farther).
    Low,
    /// High gray values are far.
    High,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Percentile,
    PaperMode,
}

#[derive(Args)]
struct LayerArgs {
    /// Depth map (PGM or grayscale PNG).
    depth_file: PathBuf,
    /// Color image used for the per-layer extractions.
    #[arg(long)]
    color: Option<PathBuf>,
    /// Row segmentation threshold; estimated when omitted.
    #[arg(long)]
    threshold: Option<u64>,
    /// Object connectivity value; defaults to the estimated column threshold.
    #[arg(long)]
    connectivity: Option<u64>,
    #[arg(long, default_value_t = 0)]
    layer_tolerance: u64,
    #[arg(long, value_enum, default_value_t = Estimator::Percentile)]
    estimator: Estimator,
    #[arg(long, default_value_t = 0.99)]
    percentile: f64,
    /// Lines sampled per axis by the estimator.
    #[arg(long)]
    sample_lines: Option<usize>,
    #[arg(long, value_enum, default_value_t = FarSide::Low)]
    far: FarSide,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma separated subset of label,viz,layers,report.
    #[arg(long, default_value = "label,viz,layers,report")]
    emit: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scene {
    Rings,
    Office,
    Plateaus,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    scene: Scene,
    /// JSON scene configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    depth_file: PathBuf,
    /// Connectivity value; defaults to the estimated column threshold.
    #[arg(long)]
    connectivity: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    labels_a: PathBuf,
    labels_b: PathBuf,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl From<ImgIoError> for CliError {
    fn from(e: ImgIoError) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not usage errors.
            let code = if e.exit_code() == 0 { 0 } else { EXIT_USAGE };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Layer(args) => cmd_layer(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::Oracle(args) => cmd_oracle(&args),
        Command::Compare(args) => cmd_compare(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

#[derive(Default)]
struct Emit {
    label: bool,
    viz: bool,
    layers: bool,
    report: bool,
}

fn parse_emit(spec: &str) -> Result<Emit, CliError> {
    let mut emit = Emit::default();
    for part in spec.split(',').filter(|p| !p.is_empty()) {
        match part.trim() {
            "label" => emit.label = true,
            "viz" => emit.viz = true,
            "layers" => emit.layers = true,
            "report" => emit.report = true,
            "all" => {
                emit = Emit {
                    label: true,
                    viz: true,
                    layers: true,
                    report: true,
                }
            }
            other => return Err(CliError::usage(format!("unknown emit target {other:?}"))),
        }
    }
    Ok(emit)
}

fn cmd_layer(args: &LayerArgs) -> Result<u8, CliError> {
    let emit = parse_emit(&args.emit)?;
    let depth = imgio::read_depth(&args.depth_file)?;
    let color = args
        .color
        .as_deref()
        .map(|p| {
            image::open(p)
                .map(|i| i.into_rgb8())
                .map_err(|e| CliError::usage(format!("cannot read color image {p:?}: {e}")))
        })
        .transpose()?;

    let params = LayeringParams {
        threshold: args.threshold,
        connectivity: args.connectivity,
        layer_tolerance: args.layer_tolerance,
        far_is_low: matches!(args.far, FarSide::Low),
        estimator: ThresholdConfig {
            method: match args.estimator {
                Estimator::Percentile => EstimatorMethod::Percentile,
                Estimator::PaperMode => EstimatorMethod::PaperMode,
            },
            percentile: args.percentile,
            sample_count: args.sample_lines,
            seed: args.seed,
        },
    };
    let started = Instant::now();
    let result = run_layering(&depth, &params).map_err(|e| match e {
        depth_layering::linking::LinkError::UnlinkedObject(_) => CliError::internal(e.to_string()),
        depth_layering::linking::LinkError::Threshold(t) => CliError::usage(t.to_string()),
    })?;
    let elapsed = started.elapsed();

    if emit.label {
        imgio::write_label_map(&result.label_map, &args.out.join("labels.pgm"))?;
    }
    if emit.viz {
        imgio::write_viz(&result.label_map, &args.out.join("viz.png"))?;
    }
    if emit.layers {
        imgio::write_layer_images(
            &result.label_map,
            color.as_ref(),
            result.diagnostics.object_layer_count,
            &args.out.join("layers"),
        )?;
    }
    if emit.report {
        imgio::write_report(&imgio::build_report(&result), &args.out.join("report.json"))?;
    }

    let d = &result.diagnostics;
    println!(
        "m={} objects={} layers={} threshold={} connectivity={}",
        d.object_layer_count, d.object_count, d.layer_count, d.threshold_used, d.connectivity_used
    );
    eprintln!("elapsed_ms={}", elapsed.as_millis());
    Ok(0)
}

fn load_config<T: serde::de::DeserializeOwned + Default>(
    path: Option<&Path>,
) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError {
                code: EXIT_IO,
                message: format!("cannot read config {p:?}: {e}"),
            })?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("invalid config {p:?}: {e}")))
        }
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<u8, CliError> {
    let scene: SyntheticScene = match args.scene {
        Scene::Rings => gen_rings(&load_config::<RingsConfig>(args.config.as_deref())?),
        Scene::Office => gen_office(&load_config::<OfficeConfig>(args.config.as_deref())?),
        Scene::Plateaus => gen_random_plateaus(
            args.seed,
            &load_config::<PlateauConfig>(args.config.as_deref())?,
        ),
    }
    .map_err(|e| CliError::usage(e.to_string()))?;

    imgio::write_depth_pgm(&scene.depth, &args.out.join("depth.pgm"))?;
    imgio::write_label_map(&partition_labels(&scene.truth), &args.out.join("truth.pgm"))?;
    if let Some(color) = &scene.color {
        let path = args.out.join("color.png");
        color.save(&path).map_err(|e| CliError {
            code: EXIT_IO,
            message: format!("cannot write {path:?}: {e}"),
        })?;
    }
    println!(
        "scene={:?} classes={} objects={} layers={}",
        args.out, scene.truth.class_count, scene.truth_object_count, scene.truth_layer_count
    );
    Ok(0)
}

fn partition_labels(partition: &PixelPartition) -> LabelMap {
    LabelMap {
        width: partition.width,
        height: partition.height,
        labels: partition.class_of.clone(),
    }
}

fn cmd_oracle(args: &OracleArgs) -> Result<u8, CliError> {
    let depth = imgio::read_depth(&args.depth_file)?;
    let connectivity = match args.connectivity {
        Some(t) => t,
        None => {
            estimate_threshold(&depth, &ThresholdConfig::default())
                .map_err(|e| CliError::usage(e.to_string()))?
                .column_threshold
        }
    };
    let partition = oracle_object_layers(&depth, connectivity);
    imgio::write_label_map(&partition_labels(&partition), &args.out.join("labels.pgm"))?;
    println!(
        "classes={} connectivity={}",
        partition.class_count, connectivity
    );
    Ok(0)
}

fn cmd_compare(args: &CompareArgs) -> Result<u8, CliError> {
    let a = PixelPartition::from(&imgio::read_label_map(&args.labels_a)?);
    let b = PixelPartition::from(&imgio::read_label_map(&args.labels_b)?);
    match compare_partitions(&a, &b) {
        Ok(cmp) => {
            println!(
                "equivalent={} mismatched_pairs={}",
                cmp.equivalent, cmp.mismatched_pixel_pairs
            );
            Ok(if cmp.equivalent { 0 } else { EXIT_NOT_EQUIVALENT })
        }
        Err(e) => {
            println!("equivalent=false mismatched_pairs=n/a");
            eprintln!("error: {e}");
            Ok(EXIT_NOT_EQUIVALENT)
        }
    }
}
