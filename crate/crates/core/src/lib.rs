//! Trade maps from bilateral trade volumes.
//!
//! Countries are vertices of a complete weighted graph whose edge weights are
//! total bilateral trade. The smallest nontrivial eigenvectors of the
//! symmetric normalized Laplacian give each country a position in the plane:
//!
//! ```text
//! W (exports) ─► A = W + Wᵀ ─► d_i = Σ_j a_ij ─► N = I − D^{-1/2} A D^{-1/2}
//!            ─► eigenpairs of N ─► φ(i) = (v₁[i], v₂[i])
//! ```
//!
//! [`synth`] generates gravity-model trade over planted geometries so the
//! recovery can be checked against ground truth.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod matrix;
pub mod roster;
pub mod spectral;
pub mod synth;

pub use analysis::{
    bipartition, nearest_neighbors, pairwise_distances, procrustes_align, Alignment, Bipartition,
    DistanceReport, Neighbor, ProcrustesOptions,
};
pub use embedding::{
    compose_map, embed, embed_with_spectrum, nontrivial_indices, read_coordinates_csv,
    run_pipeline, write_coordinates_csv, EmbedOptions, Embedding, NontrivialSplit, PipelineOutput,
};
pub use error::{Error, Result};
pub use graph::{
    affinity, connected_components, degrees, normalized_laplacian, AffinityMatrix, DegreeVector,
    LaplacianMatrix,
};
pub use ingest::{
    build_flow_matrix, parse_dyadic_csv, read_label_file, select_subgraph, write_dyadic_csv,
    DyadRecord, DyadTable, FlowBuild, FlowMatrix, MissingPolicy, ParseOptions, Schema,
};
pub use matrix::Matrix;
pub use roster::CountryRoster;
pub use spectral::{fix_signs, symmetric_eigen, tridiagonalize, Spectrum, Tridiagonal};
pub use synth::{
    gravity_flows, planted_cluster_scenario, recovery_score, ClusterSpec, RecoveryScore,
    SyntheticScenario,
};
