//! Declarative pipeline config (TOML) merged with command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;
use trademap::{MissingPolicy, ParseOptions, Schema};

use crate::UsageError;

/// File form of the pipeline settings. Every key is optional; flags win.
///
/// ```toml
/// input = "cow_trade.csv"
/// year = 2009
/// policy = "drop-incomplete"
/// labels = "labels.csv"
/// subset = ["FRA", "ESP", "PRT"]
///
/// [schema]
/// reporter = "ccode1"
/// partner = "ccode2"
/// export_value = "flow2"
/// reverse_export_value = "flow1"
/// ```
///
/// Relative paths are resolved against the config file's directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub input: Option<PathBuf>,
    pub year: Option<i32>,
    pub policy: Option<String>,
    pub delimiter: Option<char>,
    pub missing_sentinel: Option<f64>,
    pub subset: Option<Vec<String>>,
    pub labels: Option<PathBuf>,
    pub edge_threshold: Option<f64>,
    pub largest_component: Option<bool>,
    pub drop_isolated: Option<bool>,
    #[serde(default)]
    pub schema: SchemaConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaConfig {
    pub reporter: Option<String>,
    pub partner: Option<String>,
    pub year: Option<String>,
    pub export_value: Option<String>,
    pub reverse_export_value: Option<String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config: Config = toml::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.input, &mut config.labels]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }
}

/// Fully resolved pipeline settings.
#[derive(Debug, Clone)]
pub struct PipelineSettings {
    pub input: PathBuf,
    pub year: i32,
    pub policy: MissingPolicy,
    pub parse: ParseOptions,
    pub subset: Option<Vec<String>>,
    pub labels: Option<PathBuf>,
    pub edge_threshold: f64,
    pub largest_component: bool,
    pub drop_isolated: bool,
}

/// Flag values as given on the command line (all optional).
#[derive(Debug, Clone, Default)]
pub struct PipelineFlags {
    pub input: Option<PathBuf>,
    pub year: Option<i32>,
    pub policy: Option<String>,
    pub delimiter: Option<char>,
    pub missing_sentinel: Option<f64>,
    pub reporter_column: Option<String>,
    pub partner_column: Option<String>,
    pub year_column: Option<String>,
    pub value_column: Option<String>,
    pub reverse_value_column: Option<String>,
    pub subset: Option<Vec<String>>,
    pub labels: Option<PathBuf>,
    pub edge_threshold: Option<f64>,
    pub largest_component: bool,
    pub drop_isolated: bool,
}

pub fn resolve(config: Config, flags: PipelineFlags) -> Result<PipelineSettings> {
    let input = flags
        .input
        .or(config.input)
        .ok_or_else(|| UsageError("no input file (use --input or `input` in the config)".into()))?;
    let year = flags
        .year
        .or(config.year)
        .ok_or_else(|| UsageError("no year (use --year or `year` in the config)".into()))?;
    let policy = match flags.policy.or(config.policy) {
        Some(p) => p
            .parse::<MissingPolicy>()
            .map_err(|e| UsageError(e.to_string()))?,
        None => MissingPolicy::default(),
    };
    let delimiter = flags.delimiter.or(config.delimiter).unwrap_or(',');
    if !delimiter.is_ascii() {
        return Err(UsageError(format!(
            "delimiter `{delimiter}` must be a single ASCII character"
        ))
        .into());
    }
    let defaults = ParseOptions::default();
    let s = config.schema;
    let schema = Schema {
        reporter: flags
            .reporter_column
            .or(s.reporter)
            .unwrap_or(defaults.schema.reporter),
        partner: flags
            .partner_column
            .or(s.partner)
            .unwrap_or(defaults.schema.partner),
        year: flags.year_column.or(s.year).unwrap_or(defaults.schema.year),
        export_value: flags
            .value_column
            .or(s.export_value)
            .unwrap_or(defaults.schema.export_value),
        reverse_export_value: flags.reverse_value_column.or(s.reverse_export_value),
    };
    let edge_threshold = flags
        .edge_threshold
        .or(config.edge_threshold)
        .unwrap_or(0.0);
    if !(edge_threshold >= 0.0) {
        return Err(UsageError(format!(
            "edge threshold must be nonnegative, got {edge_threshold}"
        ))
        .into());
    }
    Ok(PipelineSettings {
        input,
        year,
        policy,
        parse: ParseOptions {
            schema,
            delimiter: delimiter as u8,
            missing_sentinel: flags
                .missing_sentinel
                .or(config.missing_sentinel)
                .unwrap_or(defaults.missing_sentinel),
        },
        subset: flags.subset.or(config.subset),
        labels: flags.labels.or(config.labels),
        edge_threshold,
        largest_component: flags.largest_component || config.largest_component.unwrap_or(false),
        drop_isolated: flags.drop_isolated || config.drop_isolated.unwrap_or(false),
    })
}
