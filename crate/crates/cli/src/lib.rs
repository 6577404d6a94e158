//! The `trademap` command-line tool: embed trade data, validate on synthetic
//! gravity scenarios, query neighbors and partitions, and render SVG maps.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod plot;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use trademap::graph::{drop_isolated, largest_component, threshold_affinity};
use trademap::synth::ClusterSpec;
use trademap::{
    affinity, bipartition, build_flow_matrix, degrees, embed_with_spectrum, gravity_flows,
    nearest_neighbors, normalized_laplacian, parse_dyadic_csv, planted_cluster_scenario,
    read_coordinates_csv, read_label_file, recovery_score, select_subgraph, symmetric_eigen,
    write_coordinates_csv, CountryRoster, EmbedOptions, Embedding, Error, Matrix, RecoveryScore,
};

use config::{Config, PipelineFlags, PipelineSettings};
use plot::{render_svg, LabelMode, PlotSpec};

/// Bad invocation or config contents; exits like a parse error.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub mod exit {
    pub const OTHER: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const EMPTY_ROSTER: i32 = 3;
    pub const DISCONNECTED: i32 = 4;
    pub const NO_CONVERGENCE: i32 = 5;
}

/// Process exit code for an error, chosen by the first library error in its chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return exit::PARSE;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::MissingColumn { .. }
                | Error::Parse { .. }
                | Error::DuplicateDyad { .. }
                | Error::UnknownCountry(_) => exit::PARSE,
                Error::NoData { .. }
                | Error::DegenerateRoster { .. }
                | Error::SubsetTooSmall { .. } => exit::EMPTY_ROSTER,
                Error::Disconnected { .. }
                | Error::IsolatedVertex { .. }
                | Error::SpectrumMismatch { .. } => exit::DISCONNECTED,
                Error::NoConvergence { .. } => exit::NO_CONVERGENCE,
                _ => exit::OTHER,
            };
        }
    }
    exit::OTHER
}

#[derive(Debug, Parser)]
#[command(
    name = "trademap",
    version,
    about = "Spectral trade maps from bilateral trade volumes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a dyadic trade file and write coordinates (and optionally an SVG).
    Embed(EmbedArgs),
    /// Score recovery of planted gravity-model geometry.
    Synth(SynthArgs),
    /// List the nearest countries to one country in the embedding.
    Neighbors(NeighborsArgs),
    /// Split countries by the sign of the first coordinate.
    Partition(PartitionArgs),
    /// Render a 2-D embedding as an SVG scatter map.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// TOML config with pipeline settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dyadic trade CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub year: Option<i32>,
    /// drop-incomplete or zero-fill.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Value marking a missing flow (default -9).
    #[arg(long, allow_negative_numbers = true)]
    pub missing_sentinel: Option<f64>,
    #[arg(long)]
    pub reporter_column: Option<String>,
    #[arg(long)]
    pub partner_column: Option<String>,
    #[arg(long)]
    pub year_column: Option<String>,
    /// Column holding reporter → partner exports.
    #[arg(long)]
    pub value_column: Option<String>,
    /// Column holding partner → reporter exports on the same row.
    #[arg(long)]
    pub reverse_value_column: Option<String>,
    /// Comma-separated country codes to restrict to.
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<String>>,
    /// `code,label` CSV used for display names.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Number of embedding coordinates.
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    /// Embed only the largest connected component.
    #[arg(long)]
    pub largest_component: bool,
    /// Remove countries with zero total trade (logged).
    #[arg(long)]
    pub drop_isolated: bool,
    /// Ignore total trade at or below this value.
    #[arg(long)]
    pub edge_threshold: Option<f64>,
    /// Write affinity, degree, Laplacian and spectrum CSVs to this directory.
    #[arg(long, hide = true)]
    pub dump_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// Canvas width in pixels.
    #[arg(long, default_value_t = 800.0)]
    pub width: f64,
    #[arg(long, default_value_t = 800.0)]
    pub height: f64,
    /// code, full-name or none.
    #[arg(long, default_value = "code")]
    pub label_mode: LabelMode,
    /// `code,color-group` CSV (display only).
    #[arg(long)]
    pub colors: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub margin: f64,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Coordinates CSV (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also render the map to this SVG file.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[command(flatten)]
    pub render: RenderArgs,
}

/// Where an analysis command gets its embedding from.
#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Previously saved coordinates CSV (skips the pipeline).
    #[arg(long, conflicts_with_all = ["config", "input"])]
    pub coords: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub clusters: u64,
    /// Countries per cluster.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..=2000))]
    pub n: u64,
    /// Radius of each planted cluster.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub spread: f64,
    /// Minimum center separation divided by spread.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub separation_ratio: f64,
    /// Lognormal noise level σ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub noise: f64,
    /// Number of consecutive seeds to aggregate.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeat: u64,
    /// Write the first scenario's planted points as CSV.
    #[arg(long)]
    pub export_scenario: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Country to query.
    #[arg(long)]
    pub of: String,
    /// Number of neighbors.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Countries with |x| at or below this are flagged as boundary.
    #[arg(long, default_value_t = 0.0)]
    pub zero_band: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub render: RenderArgs,
    /// SVG output (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Embed(args) => cmd_embed(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Neighbors(args) => cmd_neighbors(args),
        Command::Partition(args) => cmd_partition(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn settings(args: &PipelineArgs) -> Result<PipelineSettings> {
    let config = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    config::resolve(
        config,
        PipelineFlags {
            input: args.input.clone(),
            year: args.year,
            policy: args.policy.clone(),
            delimiter: args.delimiter,
            missing_sentinel: args.missing_sentinel,
            reporter_column: args.reporter_column.clone(),
            partner_column: args.partner_column.clone(),
            year_column: args.year_column.clone(),
            value_column: args.value_column.clone(),
            reverse_value_column: args.reverse_value_column.clone(),
            subset: args.subset.clone(),
            labels: args.labels.clone(),
            edge_threshold: args.edge_threshold,
            largest_component: args.largest_component,
            drop_isolated: args.drop_isolated,
        },
    )
}

/// Ingest → restrict → Laplacian → eigensolve → embed.
pub fn pipeline_embedding(args: &PipelineArgs) -> Result<Embedding> {
    let s = settings(args)?;
    let table = parse_dyadic_csv(open(&s.input)?, &s.parse)
        .with_context(|| format!("parsing {}", s.input.display()))?;
    if table.self_dyads_dropped > 0 {
        log::info!("dropped {} self-dyad rows", table.self_dyads_dropped);
    }
    let build = build_flow_matrix(&table.records, s.year, s.policy)?;
    if !build.dropped.is_empty() {
        log::info!(
            "missing-data policy dropped {} countries: {}",
            build.dropped.len(),
            build.dropped.join(",")
        );
    }
    let mut flow = build.flow;
    if let Some(path) = &s.labels {
        flow = flow.with_labels(&read_label_file(open(path)?)?);
    }
    if let Some(subset) = &s.subset {
        flow = select_subgraph(&flow, subset)?;
    }
    if s.drop_isolated {
        flow = drop_isolated(&flow)?.0;
    }
    if s.largest_component {
        flow = largest_component(&flow, s.edge_threshold)?;
    }
    log::info!("roster: {} countries", flow.len());

    let aff = threshold_affinity(&affinity(&flow)?, s.edge_threshold);
    let lap = normalized_laplacian(&aff)?;
    let spectrum = symmetric_eigen(lap.values())?;
    if let Some(dir) = &args.dump_dir {
        std::fs::create_dir_all(dir)?;
        let roster = aff.roster();
        write_grid(&dir.join("affinity.csv"), roster, aff.values())?;
        write_grid(&dir.join("laplacian.csv"), roster, lap.values())?;
        let mut w = csv::Writer::from_path(dir.join("degrees.csv"))?;
        w.write_record(["code", "degree"])?;
        for (code, d) in roster.codes().iter().zip(degrees(&aff).as_slice()) {
            w.write_record([code.clone(), d.to_string()])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("spectrum.csv"))?;
        let mut header = vec!["index".to_string(), "eigenvalue".to_string()];
        header.extend(roster.codes().iter().cloned());
        w.write_record(&header)?;
        for k in 0..spectrum.len() {
            let mut row = vec![k.to_string(), spectrum.eigenvalues()[k].to_string()];
            row.extend(spectrum.eigenvector(k).iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    let emb = embed_with_spectrum(&lap, &spectrum, &EmbedOptions::with_k(args.dims))?;
    match emb.spectral_gap() {
        Some(gap) => log::info!("spectral gap after used eigenvalues: {gap:e}"),
        None => log::info!("spectral gap: none (spectrum exhausted)"),
    }
    log::info!("degenerate: {}", emb.is_degenerate());
    Ok(emb)
}

fn write_grid(path: &Path, roster: &CountryRoster, m: &Matrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![String::new()];
    header.extend(roster.codes().iter().cloned());
    w.write_record(&header)?;
    for i in 0..m.rows() {
        let mut row = vec![roster.code(i).to_string()];
        row.extend(m.row(i).iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn source_embedding(args: &SourceArgs) -> Result<Embedding> {
    match &args.coords {
        Some(path) => Ok(read_coordinates_csv(open(path)?)
            .with_context(|| format!("reading coordinates {}", path.display()))?),
        None => pipeline_embedding(&args.pipeline),
    }
}

fn plot_spec(args: &RenderArgs) -> Result<PlotSpec> {
    let color_groups = match &args.colors {
        Some(p) => {
            read_label_file(open(p)?).with_context(|| format!("reading colors {}", p.display()))?
        }
        None => Default::default(),
    };
    Ok(PlotSpec {
        width: args.width,
        height: args.height,
        label_mode: args.label_mode,
        color_groups,
        margin_fraction: args.margin,
    })
}

fn cmd_embed(args: EmbedArgs) -> Result<()> {
    let emb = pipeline_embedding(&args.pipeline)?;
    let mut out = sink(args.out.as_deref())?;
    write_coordinates_csv(&emb, &mut out)?;
    out.flush()?;
    if let Some(path) = &args.svg {
        let svg = render_svg(&emb, &plot_spec(&args.render)?)?;
        std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Cluster centers on a regular polygon whose side is the separation; one
/// cluster sits at the origin, two on the x axis.
pub fn cluster_centers(clusters: usize, separation: f64) -> Vec<[f64; 2]> {
    match clusters {
        1 => vec![[0.0, 0.0]],
        2 => vec![[0.0, 0.0], [separation, 0.0]],
        c => {
            let radius = separation / (2.0 * (std::f64::consts::PI / c as f64).sin());
            (0..c)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / c as f64;
                    [radius * t.cos(), radius * t.sin()]
                })
                .collect()
        }
    }
}

fn synth_spec(args: &SynthArgs) -> Result<ClusterSpec> {
    if !(args.spread > 0.0 && args.spread.is_finite()) {
        return Err(UsageError(format!("--spread must be positive, got {}", args.spread)).into());
    }
    if !(args.separation_ratio > 0.0 && args.separation_ratio.is_finite()) {
        return Err(UsageError(format!(
            "--separation-ratio must be positive, got {}",
            args.separation_ratio
        ))
        .into());
    }
    if !(args.noise >= 0.0 && args.noise.is_finite()) {
        return Err(UsageError(format!("--noise must be nonnegative, got {}", args.noise)).into());
    }
    Ok(ClusterSpec {
        n_per_cluster: args.n as usize,
        centers: cluster_centers(args.clusters as usize, args.separation_ratio * args.spread),
        spread: args.spread,
        mass_range: (1.0, 10.0),
    })
}

fn synth_once(seed: u64, spec: &ClusterSpec, noise: f64) -> Result<RecoveryScore> {
    let scenario = planted_cluster_scenario(seed, spec)?;
    let flow = gravity_flows(&scenario, noise)?;
    let emb = trademap::compose_map(&flow, 2).with_context(|| format!("seed {seed}"))?;
    Ok(recovery_score(&scenario, &emb)?)
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let spec = synth_spec(&args)?;
    if let Some(path) = &args.export_scenario {
        let scenario = planted_cluster_scenario(args.seed, &spec)?;
        trademap::synth::write_scenario_csv(&scenario, BufWriter::new(File::create(path)?))?;
    }
    let seeds: Vec<u64> = (0..args.repeat).map(|i| args.seed + i).collect();
    let scores: Vec<RecoveryScore> = seeds
        .par_iter()
        .map(|&seed| synth_once(seed, &spec, args.noise))
        .collect::<Result<_>>()?;

    let mut out = io::stdout().lock();
    writeln!(
        out,
        "scenario: clusters={} n_per_cluster={} spread={} separation_ratio={} noise={}",
        args.clusters, args.n, args.spread, args.separation_ratio, args.noise
    )?;
    writeln!(
        out,
        "seeds: {}..={} ({} runs)",
        seeds[0],
        seeds[seeds.len() - 1],
        seeds.len()
    )?;
    let accuracies: Vec<f64> = scores.iter().filter_map(|s| s.partition_accuracy).collect();
    if accuracies.is_empty() {
        writeln!(out, "partition_accuracy: n/a")?;
    } else {
        let (mean, min) = mean_min(&accuracies);
        writeln!(out, "partition_accuracy: mean {mean:.6} min {min:.6}")?;
    }
    let correlations: Vec<f64> = scores.iter().map(|s| s.distance_rank_correlation).collect();
    let (mean, min) = mean_min(&correlations);
    writeln!(
        out,
        "distance_rank_correlation: mean {mean:.6} min {min:.6}"
    )?;
    Ok(())
}

fn mean_min(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (mean, values.iter().copied().fold(f64::INFINITY, f64::min))
}

fn cmd_neighbors(args: NeighborsArgs) -> Result<()> {
    let emb = source_embedding(&args.source)?;
    let neighbors = nearest_neighbors(&emb, &args.of, args.k)?;
    let mut w = csv::Writer::from_writer(sink(args.out.as_deref())?);
    w.write_record(["rank", "code", "label", "distance"])?;
    for (rank, nb) in neighbors.iter().enumerate() {
        w.write_record([
            (rank + 1).to_string(),
            nb.code.clone(),
            emb.roster().label(&nb.code).unwrap_or("").to_string(),
            nb.distance.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_partition(args: PartitionArgs) -> Result<()> {
    let emb = source_embedding(&args.source)?;
    let part = bipartition(&emb, args.zero_band)?;
    let sides = part.sides(emb.roster());
    let mut w = csv::Writer::from_writer(sink(args.out.as_deref())?);
    w.write_record(["code", "label", "side", "x", "boundary"])?;
    for (i, positive) in sides.iter().enumerate() {
        let code = emb.roster().code(i);
        w.write_record([
            code.to_string(),
            emb.roster().label(code).unwrap_or("").to_string(),
            if *positive { "positive" } else { "negative" }.to_string(),
            emb.point(i)[0].to_string(),
            part.boundary.iter().any(|b| b == code).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let emb = source_embedding(&args.source)?;
    let svg = render_svg(&emb, &plot_spec(&args.render)?)?;
    let mut out = sink(args.out.as_deref())?;
    out.write_all(svg.as_bytes())?;
    out.flush()?;
    Ok(())
}
