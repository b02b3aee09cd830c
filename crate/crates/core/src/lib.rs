//! Spatially constrained multivariate analysis.
//!
//! Every ordination in this crate is the eigen-analysis of a statistical
//! triplet `(X, Q, D)`: PCA, between-class analysis, PCA on instrumental
//! variables (polynomial trend surfaces or Moran's eigenvector maps) and
//! MULTISPATI. Spatial structure is described by a [`SpatialWeights`]
//! matrix and measured with Moran's coefficient; configurations are
//! compared with the Procrustes correlation.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod autocorr;
pub mod concordance;
pub mod dataset;
pub mod diagram;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod mem;
pub mod methods;
pub mod permutation;

pub use autocorr::{
    moran, moran_generalized, moran_scatter, moran_test, MoranResult, MoranScatter,
};
pub use concordance::{procrustes_stat, procrustes_test, ProcrustesResult};
pub use dataset::{load_dataset, parse_coordinates, parse_dataset, parse_partition, Dataset};
pub use diagram::{decompose, decompose_signed, project_rows, DiagramResult, Metric, Triplet};
pub use error::{Error, Result};
pub use graph::{
    from_edge_list, parse_edge_list, row_standardize, symmetrize, Connectivity, SpatialWeights,
    WeightsKind,
};
pub use mem::{mc_bounds, mem_basis, select_mem, MemBasis};
pub use methods::{
    bca, lag_scores, multispati, ortho_poly, pca, pcaiv, pcaiv_mem, pcaiv_poly, BcaResult,
    MultispatiResult, Partition, PcaivResult,
};
pub use permutation::{Alternative, NullSummary};
