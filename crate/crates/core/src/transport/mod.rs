//! Document-to-document transport distances over an embedding space.
//!
//! * [`exact_wmd`]: exact earth mover's distance (transportation simplex),
//!   capped by support size; used as the correctness oracle.
//! * [`rwmd`]: relaxed distance where each unit of mass moves to its nearest
//!   counterpart term; a lower bound on the exact value.
//! * [`lc_rwmd_batch`]: the relaxed distance for many query/corpus pairs via
//!   a per-word minimum-distance table, linear in corpus size per query.
//! * [`wcd`]: distance between weighted document centroids.

mod batch;
mod emd;
mod relaxed;
mod similarity;

pub use batch::{lc_rwmd_batch, pairwise_distances};
pub use emd::{exact_wmd, solve_transport, TransportPlan};
pub use relaxed::{rwmd, rwmd_one_sided, wcd};
pub use similarity::{aggregate_blocks, distance_to_similarity, BlockMean, SimilarityMode};

use std::collections::BTreeMap;
use std::fmt;

use ndarray::{Array2, ArrayView1};

use crate::dtm::DocumentTermMatrix;
use crate::embedding::{norm, Vectors};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroundMetric {
    #[default]
    Euclidean,
    /// `1 - cos(u, v)`.
    CosineDistance,
}

impl fmt::Display for GroundMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroundMetric::Euclidean => "euclidean",
            GroundMetric::CosineDistance => "cosine-distance",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// Term frequency divided by document length.
    #[default]
    Normalized,
    RawCount,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::Normalized => "nbow",
            WeightMode::RawCount => "raw-count",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Emd,
    Rwmd,
    LcRwmd,
    Wcd,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Emd => "emd",
            Method::Rwmd => "rwmd",
            Method::LcRwmd => "lc-rwmd",
            Method::Wcd => "wcd",
        })
    }
}

/// Which side's mass is moved in a relaxed distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sidedness {
    /// Query (row) mass moves to corpus (column) terms.
    QueryToCorpus,
    /// Corpus (column) mass moves to query (row) terms.
    CorpusToQuery,
    /// Maximum of the two one-sided values.
    #[default]
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportConfig {
    pub ground: GroundMetric,
    /// L2-normalize term vectors before computing Euclidean ground distances.
    pub normalize_vectors: bool,
    /// Largest combined support the exact solver accepts.
    pub oracle_cap: usize,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            ground: GroundMetric::Euclidean,
            normalize_vectors: false,
            oracle_cap: 64,
        }
    }
}

/// Weighted bag of embedding-row ids. Ids are sorted and unique; weights are
/// positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DocDistribution<T> {
    pub doc_id: String,
    terms: Vec<usize>,
    weights: Vec<T>,
}

impl<T: Real> DocDistribution<T> {
    /// Merges repeated ids and drops zero weights.
    pub fn new(doc_id: impl Into<String>, entries: impl IntoIterator<Item = (usize, T)>) -> Result<Self> {
        let doc_id = doc_id.into();
        let mut merged: BTreeMap<usize, T> = BTreeMap::new();
        for (t, w) in entries {
            if !(w >= T::zero()) || !w.is_finite() {
                return Err(Error::InvalidArgument(format!("negative or non-finite weight in {doc_id:?}")));
            }
            *merged.entry(t).or_insert_with(T::zero) += w;
        }
        merged.retain(|_, w| *w > T::zero());
        if merged.is_empty() {
            return Err(Error::EmptyDocument(doc_id));
        }
        let (terms, weights) = merged.into_iter().unzip();
        Ok(Self { doc_id, terms, weights })
    }

    /// Builds from `(id, count)` pairs, normalizing by total count unless raw counts are requested.
    pub fn from_counts(doc_id: impl Into<String>, counts: &[(usize, u64)], mode: WeightMode) -> Result<Self> {
        let total: u64 = counts.iter().map(|&(_, c)| c).sum();
        let total = T::of(total as f64);
        Self::new(
            doc_id,
            counts.iter().map(|&(t, c)| {
                let c = T::of(c as f64);
                (t, if mode == WeightMode::Normalized { c / total } else { c })
            }),
        )
    }

    /// Uniform weights over the given ids.
    pub fn uniform(doc_id: impl Into<String>, terms: &[usize]) -> Result<Self> {
        let w = T::one() / T::of(terms.len().max(1) as f64);
        Self::new(doc_id, terms.iter().map(|&t| (t, w)))
    }

    pub fn terms(&self) -> &[usize] {
        &self.terms
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mass(&self) -> T {
        self.weights.iter().copied().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.terms.iter().copied().zip(self.weights.iter().copied())
    }
}

/// DTM rows mapped onto embedding ids.
#[derive(Debug, Clone)]
pub struct MappedDocuments<T> {
    pub docs: Vec<DocDistribution<T>>,
    /// DTM row index of each entry in `docs`.
    pub rows: Vec<usize>,
    /// Ids of documents with no in-vocabulary terms.
    pub skipped_docs: Vec<String>,
    /// DTM terms missing from the embedding.
    pub oov_terms: Vec<String>,
}

/// Converts every DTM row into a distribution over `emb_vocab` ids, dropping
/// out-of-vocabulary terms (reported) and skipping documents left empty.
pub fn map_dtm<T: Real>(dtm: &DocumentTermMatrix, emb_vocab: &Vocabulary, mode: WeightMode) -> MappedDocuments<T> {
    let map: Vec<Option<usize>> = dtm.vocab().terms().iter().map(|t| emb_vocab.id(t)).collect();
    let oov_terms = dtm
        .vocab()
        .terms()
        .iter()
        .zip(&map)
        .filter(|(_, m)| m.is_none())
        .map(|(t, _)| t.clone())
        .collect();
    let mut docs = Vec::new();
    let mut rows = Vec::new();
    let mut skipped_docs = Vec::new();
    for (i, meta) in dtm.docs().iter().enumerate() {
        let counts: Vec<(usize, u64)> = dtm.row(i).iter().filter_map(|&(t, c)| map[t].map(|e| (e, c))).collect();
        match DocDistribution::from_counts(meta.id.clone(), &counts, mode) {
            Ok(d) => {
                docs.push(d);
                rows.push(i);
            }
            Err(_) => skipped_docs.push(meta.id.clone()),
        }
    }
    MappedDocuments {
        docs,
        rows,
        skipped_docs,
        oov_terms,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueKind {
    Distance,
    Similarity(SimilarityMode),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrixResult<T> {
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub values: Array2<T>,
    pub method: Method,
    pub ground: GroundMetric,
    pub weighting: WeightMode,
    pub kind: ValueKind,
}

pub(crate) fn euclidean<T: Real>(u: ArrayView1<'_, T>, v: ArrayView1<'_, T>) -> T {
    u.iter()
        .zip(v.iter())
        .map(|(&a, &b)| (a - b) * (a - b))
        .fold(T::zero(), |acc, x| acc + x)
        .sqrt()
}

/// Ground distance between embedding rows `i` and `j`; identical ids are at distance 0.
pub fn ground_distance<T: Real, V: Vectors<T> + ?Sized>(emb: &V, i: usize, j: usize, cfg: &TransportConfig) -> T {
    if i == j {
        return T::zero();
    }
    let (u, v) = (emb.row(i), emb.row(j));
    match cfg.ground {
        GroundMetric::Euclidean if cfg.normalize_vectors => {
            let (nu, nv) = (norm(u), norm(v));
            euclidean((&u / nu).view(), (&v / nv).view())
        }
        GroundMetric::Euclidean => euclidean(u, v),
        GroundMetric::CosineDistance => {
            let c = u.dot(&v) / (norm(u) * norm(v));
            (T::one() - c).max(T::zero()).min(T::of(2.0))
        }
    }
}

fn check_ids<T: Real, V: Vectors<T> + ?Sized>(doc: &DocDistribution<T>, emb: &V) -> Result<()> {
    match doc.terms.last() {
        Some(&t) if t >= emb.n_rows() => Err(Error::InvalidArgument(format!(
            "document {:?} references embedding row {t} of {}",
            doc.doc_id,
            emb.n_rows()
        ))),
        None => Err(Error::EmptyDocument(doc.doc_id.clone())),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{DocMeta, TokenizedDocument};

    #[test]
    fn distribution_normalizes_and_merges() {
        let d = DocDistribution::<f64>::from_counts("d", &[(3, 2), (1, 2)], WeightMode::Normalized).unwrap();
        assert_eq!(d.terms(), [1, 3]);
        assert_eq!(d.weights(), [0.5, 0.5]);
        let raw = DocDistribution::<f64>::from_counts("d", &[(3, 2), (1, 6)], WeightMode::RawCount).unwrap();
        assert_eq!(raw.weights(), [6.0, 2.0]);
        assert!(matches!(DocDistribution::<f64>::from_counts("e", &[], WeightMode::Normalized), Err(Error::EmptyDocument(_))));
        assert!(DocDistribution::<f64>::new("n", [(0, -1.0)]).is_err());
    }

    #[test]
    fn doubling_counts_leaves_nbow_unchanged() {
        let a = DocDistribution::<f64>::from_counts("d", &[(0, 1), (4, 3)], WeightMode::Normalized).unwrap();
        let b = DocDistribution::<f64>::from_counts("d", &[(0, 2), (4, 6)], WeightMode::Normalized).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dtm_mapping_skips_oov_and_empty() {
        let docs = vec![
            TokenizedDocument { meta: DocMeta::new("a"), tokens: vec!["x".into(), "zz".into()] },
            TokenizedDocument { meta: DocMeta::new("b"), tokens: vec!["zz".into()] },
        ];
        let dtm = crate::dtm::build_dtm(&docs).unwrap();
        let vocab = Vocabulary::from_terms(["y", "x"]).unwrap();
        let mapped = map_dtm::<f64>(&dtm, &vocab, WeightMode::Normalized);
        assert_eq!(mapped.docs.len(), 1);
        assert_eq!(mapped.docs[0].terms(), [1]);
        assert_eq!(mapped.docs[0].weights(), [1.0]);
        assert_eq!(mapped.skipped_docs, vec!["b".to_string()]);
        assert_eq!(mapped.oov_terms, vec!["zz".to_string()]);
    }
}
