use thiserror::Error;

/// Errors produced anywhere in the trade-map pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("required column `{column}` not found in header")]
    MissingColumn { column: String },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("no records for year {year}")]
    NoData { year: i32 },

    #[error("duplicate dyad {reporter} -> {partner} in year {year}")]
    DuplicateDyad {
        reporter: String,
        partner: String,
        year: i32,
    },

    #[error("missing-data policy left {remaining} countries; at least 2 are required")]
    DegenerateRoster { remaining: usize },

    #[error("unknown country code `{0}`")]
    UnknownCountry(String),

    #[error("subset of {size} countries is too small; at least 3 are required")]
    SubsetTooSmall { size: usize },

    #[error("negative or non-finite flow {value} on dyad {from} -> {to}")]
    InvalidFlow {
        from: String,
        to: String,
        value: f64,
    },

    #[error("country `{code}` has zero total trade (isolated vertex)")]
    IsolatedVertex { code: String },

    #[error("matrix is not symmetric at ({row}, {col}): {upper} vs {lower}")]
    Asymmetric {
        row: usize,
        col: usize,
        upper: f64,
        lower: f64,
    },

    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },

    #[error("QL iteration did not converge for eigenvalue {index} after {sweeps} sweeps")]
    NoConvergence { index: usize, sweeps: usize },

    #[error("requested {requested} nontrivial eigenpairs but only {available} are available")]
    InsufficientSpectrum { requested: usize, available: usize },

    #[error("graph has {} connected components: {}", .components.len(), format_components(.components))]
    Disconnected { components: Vec<Vec<String>> },

    #[error(
        "spectrum has {spectral} near-zero eigenvalues but the graph has {combinatorial} components; \
         raise or lower the trivial tolerance"
    )]
    SpectrumMismatch {
        spectral: usize,
        combinatorial: usize,
    },

    #[error(
        "rosters differ: only in reference {only_reference:?}, only in target {only_target:?}"
    )]
    RosterMismatch {
        only_reference: Vec<String>,
        only_target: Vec<String>,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("planted points {first} and {second} coincide")]
    DegenerateGeometry { first: usize, second: usize },

    #[error("all countries fall on one side of the first coordinate")]
    OneSidedPartition,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn format_components(components: &[Vec<String>]) -> String {
    components
        .iter()
        .map(|c| format!("{{{}}}", c.join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

pub type Result<T> = std::result::Result<T, Error>;
