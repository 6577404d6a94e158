//! Per-country coordinates from the smallest nontrivial eigenvectors of the
//! normalized Laplacian.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::graph::{self, LaplacianMatrix};
use crate::ingest::FlowMatrix;
use crate::matrix::Matrix;
use crate::roster::CountryRoster;
use crate::spectral::{self, Spectrum};

/// Eigenvalues at or below this count as the trivial (zero) eigenspace.
pub const DEFAULT_TRIVIAL_TOL: f64 = 1e-9;

/// Gap below which the last used eigenvalue and the next one are considered
/// degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    roster: CountryRoster,
    coordinates: Matrix,
    eigenvalues_used: Vec<f64>,
    spectral_gap: Option<f64>,
    degeneracy_flag: bool,
}

impl Embedding {
    /// An embedding from bare coordinates, e.g. loaded from a CSV export.
    /// Spectral metadata is empty.
    pub fn from_coordinates(roster: CountryRoster, coordinates: Matrix) -> Result<Self> {
        if coordinates.rows() != roster.len() {
            return Err(Error::DimensionMismatch {
                expected: roster.len(),
                found: coordinates.rows(),
            });
        }
        if coordinates.cols() == 0 {
            return Err(Error::InvalidParameter(
                "embedding needs at least one dimension".into(),
            ));
        }
        Ok(Self {
            roster,
            coordinates,
            eigenvalues_used: Vec::new(),
            spectral_gap: None,
            degeneracy_flag: false,
        })
    }

    pub fn roster(&self) -> &CountryRoster {
        &self.roster
    }

    /// `n × k`; row `i` is the position of country `i`.
    pub fn coordinates(&self) -> &Matrix {
        &self.coordinates
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.coordinates.row(i)
    }

    pub fn dim(&self) -> usize {
        self.coordinates.cols()
    }

    pub fn len(&self) -> usize {
        self.roster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roster.is_empty()
    }

    pub fn eigenvalues_used(&self) -> &[f64] {
        &self.eigenvalues_used
    }

    /// Next unused eigenvalue minus the last used one; `None` when the
    /// spectrum has nothing beyond the used eigenvalues.
    pub fn spectral_gap(&self) -> Option<f64> {
        self.spectral_gap
    }

    pub fn is_degenerate(&self) -> bool {
        self.degeneracy_flag
    }

    pub(crate) fn with_coordinates(&self, coordinates: Matrix) -> Self {
        Self {
            coordinates,
            ..self.clone()
        }
    }
}

/// Positions of the nontrivial eigenvalues in a sorted spectrum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NontrivialSplit {
    /// Ascending indices of eigenvalues above the trivial tolerance.
    pub indices: Vec<usize>,
    /// Eigenvalues at or below the tolerance; the component count for a
    /// valid normalized Laplacian.
    pub trivial_count: usize,
}

/// Splits off the trivial eigenvalues; errors unless at least `k` remain.
pub fn nontrivial_indices(
    spectrum: &Spectrum,
    trivial_tol: f64,
    k: usize,
) -> Result<NontrivialSplit> {
    let indices: Vec<usize> = spectrum
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > trivial_tol)
        .map(|(i, _)| i)
        .collect();
    let trivial_count = spectrum.len() - indices.len();
    if indices.len() < k {
        return Err(Error::InsufficientSpectrum {
            requested: k,
            available: indices.len(),
        });
    }
    Ok(NontrivialSplit {
        indices,
        trivial_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedOptions {
    pub k: usize,
    pub require_connected: bool,
    pub trivial_tol: f64,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        Self {
            k: 2,
            require_connected: true,
            trivial_tol: DEFAULT_TRIVIAL_TOL,
        }
    }
}

impl EmbedOptions {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }
}

/// Solves the Laplacian and embeds it.
pub fn embed(lap: &LaplacianMatrix, options: &EmbedOptions) -> Result<Embedding> {
    let spectrum = spectral::symmetric_eigen(lap.values())?;
    embed_with_spectrum(lap, &spectrum, options)
}

/// Embeds from a precomputed spectrum of `lap`.
///
/// Connectivity is checked combinatorially on the Laplacian's off-diagonal
/// pattern, and the count of near-zero eigenvalues must agree with it.
pub fn embed_with_spectrum(
    lap: &LaplacianMatrix,
    spectrum: &Spectrum,
    options: &EmbedOptions,
) -> Result<Embedding> {
    if options.k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if spectrum.len() != lap.len() {
        return Err(Error::DimensionMismatch {
            expected: lap.len(),
            found: spectrum.len(),
        });
    }
    let components = graph::laplacian_components(lap);
    if options.require_connected && components.len() > 1 {
        return Err(Error::Disconnected {
            components: components
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|&i| lap.roster().code(i).to_string())
                        .collect()
                })
                .collect(),
        });
    }
    let split = nontrivial_indices(spectrum, options.trivial_tol, options.k)?;
    if split.trivial_count != components.len() {
        return Err(Error::SpectrumMismatch {
            spectral: split.trivial_count,
            combinatorial: components.len(),
        });
    }

    let used = &split.indices[..options.k];
    let lambdas = spectrum.eigenvalues();
    let eigenvalues_used: Vec<f64> = used.iter().map(|&i| lambdas[i]).collect();
    let last = used[options.k - 1];
    let spectral_gap = lambdas.get(last + 1).map(|next| next - lambdas[last]);
    let degeneracy_flag = spectral_gap.is_some_and(|g| g < DEGENERACY_TOL);
    if degeneracy_flag {
        log::warn!(
            "eigenvalue {} is within {:e} of the next one; embedding is not unique",
            lambdas[last],
            DEGENERACY_TOL
        );
    }

    let vectors = spectrum.eigenvectors();
    let coordinates = Matrix::from_fn(lap.len(), options.k, |i, j| vectors[(i, used[j])]);
    Ok(Embedding {
        roster: lap.roster().clone(),
        coordinates,
        eigenvalues_used,
        spectral_gap,
        degeneracy_flag,
    })
}

/// Intermediate products of the flow → embedding pipeline.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub laplacian: LaplacianMatrix,
    pub spectrum: Spectrum,
    pub embedding: Embedding,
}

/// affinity → degrees → normalized Laplacian → eigensolve → embed,
/// keeping the intermediate products for diagnostics.
pub fn run_pipeline(flow: &FlowMatrix, options: &EmbedOptions) -> Result<PipelineOutput> {
    let aff = graph::affinity(flow)?;
    let laplacian = graph::normalized_laplacian(&aff)?;
    let spectrum = spectral::symmetric_eigen(laplacian.values())?;
    let embedding = embed_with_spectrum(&laplacian, &spectrum, options)?;
    Ok(PipelineOutput {
        laplacian,
        spectrum,
        embedding,
    })
}

/// The full map from a flow matrix to coordinates.
pub fn compose_map(flow: &FlowMatrix, k: usize) -> Result<Embedding> {
    run_pipeline(flow, &EmbedOptions::with_k(k)).map(|out| out.embedding)
}

/// Writes `code,label,x,y[,d3,...]`, one row per country in roster order.
pub fn write_coordinates_csv<W: Write>(emb: &Embedding, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["code".to_string(), "label".to_string()];
    for j in 0..emb.dim() {
        header.push(coordinate_name(j));
    }
    w.write_record(&header).map_err(io_error)?;
    for i in 0..emb.len() {
        let code = emb.roster().code(i);
        let mut row = vec![
            code.to_string(),
            emb.roster().label(code).unwrap_or("").to_string(),
        ];
        row.extend(emb.point(i).iter().map(|x| x.to_string()));
        w.write_record(&row).map_err(io_error)?;
    }
    w.flush()?;
    Ok(())
}

fn coordinate_name(j: usize) -> String {
    match j {
        0 => "x".into(),
        1 => "y".into(),
        _ => format!("d{}", j + 1),
    }
}

fn io_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Reads a coordinates CSV written by [`write_coordinates_csv`].
pub fn read_coordinates_csv<R: Read>(source: R) -> Result<Embedding> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers().map_err(io_error)?.clone();
    if headers.len() < 3 || &headers[0] != "code" || &headers[1] != "label" {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `code,label,x[,y,...]`".into(),
        });
    }
    let k = headers.len() - 2;
    let mut rows: Vec<(String, String, Vec<f64>)> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(io_error)?;
        let line = row.position().map_or(0, |p| p.line());
        let coords = (2..row.len())
            .map(|c| {
                row[c].parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("coordinate `{}` is not numeric", &row[c]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((row[0].to_string(), row[1].to_string(), coords));
    }
    let roster = CountryRoster::new(rows.iter().map(|r| r.0.clone()));
    if roster.len() != rows.len() {
        return Err(Error::Parse {
            line: 0,
            message: "duplicate country code in coordinates file".into(),
        });
    }
    let labels = rows
        .iter()
        .filter(|r| !r.1.is_empty())
        .map(|r| (r.0.clone(), r.1.clone()))
        .collect();
    let roster = roster.with_labels(&labels);
    let mut coordinates = Matrix::zeros(rows.len(), k);
    for (code, _, coords) in &rows {
        let i = roster.index_of(code).unwrap();
        for (j, &x) in coords.iter().enumerate() {
            coordinates[(i, j)] = x;
        }
    }
    Embedding::from_coordinates(roster, coordinates)
}
