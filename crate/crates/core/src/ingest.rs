//! Dyadic trade tables in, export matrix out.
//!
//! Input is delimiter-separated text with a header row; one row per directed
//! dyad `(reporter, partner, year, value)`. Values equal to the missing
//! sentinel (COW uses `-9`) or left empty are treated as absent.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::roster::CountryRoster;

/// Default missing-value sentinel of the Correlates of War trade files.
pub const COW_MISSING_SENTINEL: f64 = -9.0;

/// One directed trade observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadRecord {
    pub reporter: String,
    pub partner: String,
    pub year: i32,
    /// Export from `reporter` to `partner`; `None` when missing in the source.
    pub export_value: Option<f64>,
}

/// Header names of the four required columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub reporter: String,
    pub partner: String,
    pub year: String,
    pub export_value: String,
    /// Optional column holding the opposite direction (partner → reporter)
    /// on the same row, as in undirected dyadic files. Each row then yields
    /// two records.
    pub reverse_export_value: Option<String>,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            reporter: "reporter".into(),
            partner: "partner".into(),
            year: "year".into(),
            export_value: "export_value".into(),
            reverse_export_value: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOptions {
    pub schema: Schema,
    pub delimiter: u8,
    pub missing_sentinel: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            schema: Schema::default(),
            delimiter: b',',
            missing_sentinel: COW_MISSING_SENTINEL,
        }
    }
}

/// Records parsed from one table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DyadTable {
    pub records: Vec<DyadRecord>,
    /// Rows with `reporter == partner`, which are dropped.
    pub self_dyads_dropped: usize,
}

/// Parses a dyadic table. An empty source yields an empty table.
pub fn parse_dyadic_csv<R: Read>(source: R, options: &ParseOptions) -> Result<DyadTable> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(DyadTable::default());
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                column: name.to_string(),
            })
    };
    let schema = &options.schema;
    let reporter_col = column(&schema.reporter)?;
    let partner_col = column(&schema.partner)?;
    let year_col = column(&schema.year)?;
    let value_col = column(&schema.export_value)?;
    let reverse_col = schema
        .reverse_export_value
        .as_deref()
        .map(column)
        .transpose()?;

    let mut table = DyadTable::default();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |col: usize| row.get(col).unwrap_or("");

        let reporter = field(reporter_col);
        let partner = field(partner_col);
        if reporter.is_empty() || partner.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty country code".into(),
            });
        }
        let year: i32 = field(year_col).parse().map_err(|_| Error::Parse {
            line,
            message: format!("year `{}` is not an integer", field(year_col)),
        })?;
        let value = |col: usize| -> Result<Option<f64>> {
            let raw = field(col);
            if raw.is_empty() {
                return Ok(None);
            }
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                line,
                message: format!("export value `{raw}` is not numeric"),
            })?;
            if v == options.missing_sentinel {
                Ok(None)
            } else if !v.is_finite() || v < 0.0 {
                Err(Error::Parse {
                    line,
                    message: format!("export value {v} must be finite and nonnegative"),
                })
            } else {
                Ok(Some(v))
            }
        };
        let export_value = value(value_col)?;
        let reverse_value = reverse_col.map(value).transpose()?;

        if reporter == partner {
            table.self_dyads_dropped += 1;
            continue;
        }
        table.records.push(DyadRecord {
            reporter: reporter.to_string(),
            partner: partner.to_string(),
            year,
            export_value,
        });
        if let Some(reverse) = reverse_value {
            table.records.push(DyadRecord {
                reporter: partner.to_string(),
                partner: reporter.to_string(),
                year,
                export_value: reverse,
            });
        }
    }
    if table.self_dyads_dropped > 0 {
        log::warn!("dropped {} self-dyad rows", table.self_dyads_dropped);
    }
    Ok(table)
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// How to treat directed dyads that are absent from the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// Greedily remove countries incident to missing dyads until none remain.
    #[default]
    DropIncomplete,
    /// Missing dyads become zero flow and are flagged in the mask.
    ZeroFill,
}

impl std::str::FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop-incomplete" => Ok(Self::DropIncomplete),
            "zero-fill" => Ok(Self::ZeroFill),
            other => Err(Error::InvalidParameter(format!(
                "unknown missing-data policy `{other}` (expected drop-incomplete or zero-fill)"
            ))),
        }
    }
}

/// The non-symmetric export matrix over a roster.
///
/// `values[(i, j)]` is the export from country `i` to country `j`; the
/// diagonal is zero. `missing[(i, j)]` marks dyads that were absent in the
/// source (their value is 0).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMatrix {
    roster: CountryRoster,
    values: Matrix,
    missing: Vec<bool>,
}

impl FlowMatrix {
    /// Builds a flow matrix with an empty missing mask.
    pub fn new(roster: CountryRoster, values: Matrix) -> Result<Self> {
        let n = roster.len();
        let missing = vec![false; n * n];
        Self::with_mask(roster, values, missing)
    }

    pub fn with_mask(roster: CountryRoster, values: Matrix, missing: Vec<bool>) -> Result<Self> {
        let n = roster.len();
        if values.rows() != n || values.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: values.rows().max(values.cols()),
            });
        }
        if missing.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: missing.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[(i, j)];
                if !v.is_finite() || v < 0.0 || (i == j && v != 0.0) {
                    return Err(Error::InvalidFlow {
                        from: roster.code(i).to_string(),
                        to: roster.code(j).to_string(),
                        value: v,
                    });
                }
            }
        }
        Ok(Self {
            roster,
            values,
            missing,
        })
    }

    pub fn roster(&self) -> &CountryRoster {
        &self.roster
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.roster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roster.is_empty()
    }

    pub fn is_missing(&self, i: usize, j: usize) -> bool {
        self.missing[i * self.len() + j]
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn with_labels(mut self, labels: &BTreeMap<String, String>) -> Self {
        self.roster = self.roster.with_labels(labels);
        self
    }

    /// Multiplies every flow by `c`; used to check scale invariance.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::with_mask(
            self.roster.clone(),
            self.values.scaled(c),
            self.missing.clone(),
        )
    }

    /// Restriction to ascending roster indices, with no size check.
    pub fn restrict(&self, indices: &[usize]) -> FlowMatrix {
        let n = self.len();
        let values = self.values.select(indices);
        let missing = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.missing[i * n + j])
            .collect();
        FlowMatrix {
            roster: self.roster.restrict(indices),
            values,
            missing,
        }
    }
}

/// Result of assembling a flow matrix for one year.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowBuild {
    pub flow: FlowMatrix,
    /// Countries removed by the drop-incomplete policy, in removal order.
    pub dropped: Vec<String>,
}

/// Assembles the export matrix for `year` under the given missing-data policy.
pub fn build_flow_matrix(
    records: &[DyadRecord],
    year: i32,
    policy: MissingPolicy,
) -> Result<FlowBuild> {
    let slice: Vec<&DyadRecord> = records.iter().filter(|r| r.year == year).collect();
    if slice.is_empty() {
        return Err(Error::NoData { year });
    }
    let roster = CountryRoster::new(
        slice
            .iter()
            .flat_map(|r| [r.reporter.as_str(), r.partner.as_str()]),
    );
    let n = roster.len();

    let mut values = Matrix::zeros(n, n);
    let mut seen = vec![false; n * n];
    let mut missing = vec![true; n * n];
    for i in 0..n {
        missing[i * n + i] = false;
    }
    for r in &slice {
        // Both codes are in the roster by construction.
        let i = roster.index_of(&r.reporter).unwrap();
        let j = roster.index_of(&r.partner).unwrap();
        if std::mem::replace(&mut seen[i * n + j], true) {
            return Err(Error::DuplicateDyad {
                reporter: r.reporter.clone(),
                partner: r.partner.clone(),
                year,
            });
        }
        if let Some(v) = r.export_value {
            values[(i, j)] = v;
            missing[i * n + j] = false;
        }
    }

    let full = FlowMatrix::with_mask(roster, values, missing)?;
    match policy {
        MissingPolicy::ZeroFill => Ok(FlowBuild {
            flow: full,
            dropped: Vec::new(),
        }),
        MissingPolicy::DropIncomplete => drop_incomplete(full),
    }
}

fn drop_incomplete(full: FlowMatrix) -> Result<FlowBuild> {
    let n = full.len();
    let mut alive = vec![true; n];
    let mut dropped = Vec::new();
    loop {
        let mut incident = vec![0usize; n];
        for i in (0..n).filter(|&i| alive[i]) {
            for j in (0..n).filter(|&j| alive[j]) {
                if full.is_missing(i, j) {
                    incident[i] += 1;
                    incident[j] += 1;
                }
            }
        }
        // Strict `>` keeps the lowest index among ties.
        let mut worst: Option<usize> = None;
        for i in 0..n {
            if incident[i] > 0 && worst.is_none_or(|w| incident[i] > incident[w]) {
                worst = Some(i);
            }
        }
        match worst {
            Some(w) => {
                alive[w] = false;
                dropped.push(full.roster().code(w).to_string());
            }
            None => break,
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    if keep.len() < 2 {
        return Err(Error::DegenerateRoster {
            remaining: keep.len(),
        });
    }
    if !dropped.is_empty() {
        log::info!(
            "drop-incomplete removed {} countries: {}",
            dropped.len(),
            dropped.join(",")
        );
    }
    Ok(FlowBuild {
        flow: full.restrict(&keep),
        dropped,
    })
}

/// Restricts a flow matrix to a collection of countries.
///
/// Restriction happens on the raw flows; nothing is renormalized.
pub fn select_subgraph<S: AsRef<str>>(flow: &FlowMatrix, subset: &[S]) -> Result<FlowMatrix> {
    let mut indices = BTreeSet::new();
    for code in subset {
        indices.insert(flow.roster().require(code.as_ref())?);
    }
    if indices.len() < 3 {
        return Err(Error::SubsetTooSmall {
            size: indices.len(),
        });
    }
    let indices: Vec<usize> = indices.into_iter().collect();
    Ok(flow.restrict(&indices))
}

/// Writes every off-diagonal dyad as one row; missing dyads get the sentinel.
pub fn write_dyadic_csv<W: Write>(
    flow: &FlowMatrix,
    year: i32,
    options: &ParseOptions,
    sink: W,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(options.delimiter)
        .from_writer(sink);
    let s = &options.schema;
    w.write_record([&s.reporter, &s.partner, &s.year, &s.export_value])
        .map_err(csv_error)?;
    let year = year.to_string();
    let sentinel = options.missing_sentinel.to_string();
    let n = flow.len();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let value = if flow.is_missing(i, j) {
                sentinel.clone()
            } else {
                flow.values()[(i, j)].to_string()
            };
            w.write_record([
                flow.roster().code(i),
                flow.roster().code(j),
                year.as_str(),
                value.as_str(),
            ])
            .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a two-column `code,label` side file (header row required).
pub fn read_label_file<R: Read>(source: R) -> Result<BTreeMap<String, String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut labels = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        match (row.get(0), row.get(1)) {
            (Some(code), Some(label)) if !code.is_empty() => {
                labels.insert(code.to_string(), label.to_string());
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: "expected `code,label`".into(),
                })
            }
        }
    }
    Ok(labels)
}
