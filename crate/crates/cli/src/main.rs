mod sets;
mod sweep;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dpsw_core::dataset::{self, CorpusManifest};
use dpsw_core::eval::{cross_validate, DEFAULT_RIDGE};
use dpsw_core::fsutil::write_atomic;
use dpsw_core::{DescriptorConfig, FeatureMatrix, Rule, Thresholds, WalkMap};

use crate::sets::IntSet;
use crate::sweep::{Axis, SweepPlan};

/// Texture features from deterministic partially self-avoiding walks on
/// thresholded pixel maps, with an LDA cross-validation harness.
#[derive(Debug, Parser)]
#[command(name = "dpsw", version)]
struct Cli {
    /// Worker threads (default: one per core)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract one feature row per image into a CSV plus a layout JSON
    Extract(ExtractArgs),
    /// Cross-validate an LDA classifier on a feature CSV
    Evaluate(EvaluateArgs),
    /// Classification rate as a function of memory or threshold
    Sweep(SweepArgs),
    /// Write the edge list of one thresholded map
    ExportMap(ExportMapArgs),
    /// Write a seeded synthetic corpus (8 classes x 10 images, 64x64 PGM)
    Synth(SynthArgs),
    /// Write the path,label manifest of a class-per-directory corpus
    Manifest(ManifestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleSel {
    Min,
    Max,
    Both,
}

impl RuleSel {
    fn rules(self) -> Vec<Rule> {
        match self {
            RuleSel::Min => vec![Rule::Min],
            RuleSel::Max => vec![Rule::Max],
            RuleSel::Both => Rule::BOTH.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
struct FeatureOpts {
    /// Rule(s) of movement
    #[arg(long, value_enum, default_value = "min")]
    rule: RuleSel,
    /// Memory sizes, e.g. 0..6 or 0,2,4 (inclusive ranges)
    #[arg(long, default_value = "0..6")]
    memories: IntSet,
    /// Threshold indices k, e.g. 0..9
    #[arg(long, default_value = "0..9")]
    thresholds: IntSet,
    /// Min-rule cutoff step: t_min = k * step
    #[arg(long, default_value_t = 10)]
    min_step: u32,
    /// Max-rule cutoff step: t_max = 255 - k * step
    #[arg(long, default_value_t = 20)]
    max_step: u32,
}

#[derive(Debug, Args)]
struct CvOpts {
    /// Cross-validation folds
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Seed for the fold assignment
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative ridge added to the pooled covariance diagonal
    #[arg(long, default_value_t = DEFAULT_RIDGE)]
    ridge: f64,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Corpus directory (one subdirectory per class) or path,label manifest CSV
    #[arg(long)]
    input: PathBuf,
    /// Feature CSV; the layout goes to <stem>.layout.json next to it
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    features: FeatureOpts,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Feature CSV written by `extract`
    #[arg(long)]
    input: PathBuf,
    /// Report JSON
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    cv: CvOpts,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Corpus directory or manifest CSV
    #[arg(long)]
    input: PathBuf,
    /// Sweep CSV
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum)]
    axis: Axis,
    /// Restrict to one curve; by default min, max and both are all reported
    #[arg(long, value_enum)]
    rule: Option<RuleSel>,
    /// Memory sizes
    #[arg(long, default_value = "0..6")]
    memories: IntSet,
    /// Threshold indices (threshold axes only; memory axes use k = 0)
    #[arg(long, default_value = "0..9")]
    thresholds: IntSet,
    #[arg(long, default_value_t = 10)]
    min_step: u32,
    #[arg(long, default_value_t = 20)]
    max_step: u32,
    #[command(flatten)]
    cv: CvOpts,
}

#[derive(Debug, Args)]
struct ExportMapArgs {
    /// Image file
    #[arg(long)]
    input: PathBuf,
    /// Edge list, one `x1,y1,x2,y2,w` line per edge
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "min")]
    rule: MapRule,
    /// Threshold index k
    #[arg(long, short = 'k', default_value_t = 0)]
    threshold: u32,
    #[arg(long, default_value_t = 10)]
    min_step: u32,
    #[arg(long, default_value_t = 20)]
    max_step: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MapRule {
    Min,
    Max,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Corpus root to create
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ManifestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

fn descriptor_config(
    rules: Vec<Rule>,
    thresholds: &[u32],
    memories: &[u32],
    min_step: u32,
    max_step: u32,
) -> Result<DescriptorConfig> {
    let config = DescriptorConfig::new(
        rules,
        thresholds.iter().copied(),
        memories.iter().map(|&m| m as usize),
    )?;
    Ok(config.with_increments(Thresholds { min_step, max_step }))
}

fn check_folds(folds: usize) -> Result<()> {
    if folds < 2 {
        bail!("--folds must be at least 2, got {folds}");
    }
    Ok(())
}

fn extract(args: &ExtractArgs) -> Result<()> {
    let f = &args.features;
    let config = descriptor_config(
        f.rule.rules(),
        &f.thresholds,
        &f.memories,
        f.min_step,
        f.max_step,
    )?;
    let manifest = CorpusManifest::open(&args.input)?;
    let matrix = dataset::extract_corpus(&manifest, &config)?;
    matrix.save(&args.output)?;
    println!(
        "wrote {} images x {} features to {}",
        matrix.rows.len(),
        matrix.dimension,
        args.output.display()
    );
    Ok(())
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    check_folds(args.cv.folds)?;
    let matrix = FeatureMatrix::load(&args.input)?;
    let data = matrix.to_dataset()?;
    let mut report = cross_validate(&data, args.cv.folds, args.cv.seed, args.cv.ridge)?;
    report.features = matrix.layout.and_then(|l| l.config);
    println!("{}", report.summary());
    if let Some(out) = &args.output {
        report.save(out)?;
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    check_folds(args.cv.folds)?;
    let curves: Vec<Vec<Rule>> = match args.rule {
        Some(sel) => vec![sel.rules()],
        None => vec![vec![Rule::Min], vec![Rule::Max], Rule::BOTH.to_vec()],
    };
    let mut rules: Vec<Rule> = curves.iter().flatten().copied().collect();
    rules.sort();
    rules.dedup();
    let thresholds = if args.axis.uses_thresholds() {
        args.thresholds.0.clone()
    } else {
        vec![0]
    };
    let config = descriptor_config(
        rules,
        &thresholds,
        &args.memories,
        args.min_step,
        args.max_step,
    )?;
    let manifest = CorpusManifest::open(&args.input)?;
    let features = dataset::extract_corpus(&manifest, &config)?;
    let plan = SweepPlan {
        axis: args.axis,
        curves: &curves,
        memories: &args.memories,
        thresholds: &thresholds,
        folds: args.cv.folds,
        seed: args.cv.seed,
        ridge: args.cv.ridge,
    };
    let rows = sweep::run(&features, &plan)?;
    for r in &rows {
        println!(
            "{} {} [{}]: CCR: {:.2} (± {:.2})",
            r.axis,
            r.rule_label(),
            r.setting_label(),
            r.ccr_mean,
            r.ccr_std
        );
    }
    let mut bytes = Vec::new();
    sweep::write_csv(&rows, &mut bytes)?;
    write_atomic(&args.output, |w| w.write_all(&bytes))?;
    Ok(())
}

fn export_map(args: &ExportMapArgs) -> Result<()> {
    let raster = dataset::load_grayscale(&args.input)?;
    let rule = match args.rule {
        MapRule::Min => Rule::Min,
        MapRule::Max => Rule::Max,
    };
    let increments = Thresholds {
        min_step: args.min_step,
        max_step: args.max_step,
    };
    let map = WalkMap::with_thresholds(&raster, rule, args.threshold, increments);
    map.save_edge_list(&args.output)?;
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    let manifest = dataset::write_synthetic_corpus(&args.output, args.seed)?;
    let manifest_path = args.output.join("manifest.csv");
    manifest.save(&manifest_path)?;
    println!(
        "wrote {} images in {} classes under {}",
        manifest.len(),
        manifest.classes().len(),
        args.output.display()
    );
    Ok(())
}

fn manifest(args: &ManifestArgs) -> Result<()> {
    let root = fs::canonicalize(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let m = CorpusManifest::scan(&root)?;
    let out_dir = match args.output.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    // entries are written relative to the manifest's own directory
    let mut rebased = m.clone();
    rebased.root = fs::canonicalize(out_dir)?;
    rebased.save(&args.output)?;
    println!("{} images in {} classes", m.len(), m.classes().len());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker threads")?;
    }
    match &cli.command {
        Command::Extract(a) => extract(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Sweep(a) => sweep(a),
        Command::ExportMap(a) => export_map(a),
        Command::Synth(a) => synth(a),
        Command::Manifest(a) => manifest(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
