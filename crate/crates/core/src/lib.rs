#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Word-embedding cartography for text corpora.
//!
//! The crate covers the full path from raw documents to plot-ready series:
//!
//! * [`text`], [`dtm`], [`corpus`]: normalization, sparse document-term
//!   matrices, sparsity pruning, vocabulary intersection.
//! * [`embedding`], [`tcm`], [`train`]: pretrained vector loading, cosine
//!   geometry, co-occurrence counting and PPMI + SVD training.
//! * [`alignment`]: orthogonal Procrustes alignment and term-drift series.
//! * [`semantics`]: semantic directions, centroids and projections.
//! * [`transport`]: exact and relaxed word mover's distances.
//! * [`cmd`]: concept engagement scores and their time aggregation.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar for the common case.

pub mod alignment;
pub mod cmd;
pub mod corpus;
pub mod dtm;
pub mod embedding;
pub mod error;
mod numwords;
pub mod scalar;
pub mod semantics;
pub mod tcm;
pub mod text;
pub mod train;
pub mod transport;
pub mod vocab;

pub use error::{Error, ErrorClass, Result};
pub use scalar::Real;
pub use vocab::Vocabulary;

pub type Embedding = embedding::EmbeddingMatrix<f64>;
pub type Embedding32 = embedding::EmbeddingMatrix<f32>;
pub type Tcm = tcm::TermContextMatrix<f64>;
pub type Direction = semantics::SemanticDirection<f64>;
pub type Centroid = semantics::SemanticCentroid<f64>;
pub type Distribution = transport::DocDistribution<f64>;
pub type DistanceMatrix = transport::DistanceMatrixResult<f64>;
pub type Concept = cmd::ConceptSpec<f64>;
pub type Engagement = cmd::EngagementSeries<f64>;
