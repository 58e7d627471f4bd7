//! Batched distance matrices.
//!
//! The linear-complexity relaxation precomputes, for every word occurring in
//! the moving side and every document on the receiving side, the distance
//! from that word to the document's nearest term. A one-sided relaxed
//! distance is then a sparse weighted sum of that table, so no per-pair
//! nearest-term search is performed.

use std::collections::HashMap;

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;

use super::{
    exact_wmd, rwmd, wcd, DistanceMatrixResult, DocDistribution, GroundMetric, Method, Sidedness,
    TransportConfig, ValueKind, WeightMode,
};
use crate::embedding::{norm, Vectors};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rows of the moving-side vocabulary processed per distance block.
const WORD_BLOCK: usize = 256;

struct Side<T> {
    /// Sorted unique embedding ids used by the documents.
    words: Vec<usize>,
    /// Gathered vectors (`words.len() x d`), unit length when the metric needs it.
    vectors: Array2<T>,
    /// Squared norms of `vectors` rows.
    sq_norms: Array1<T>,
}

fn side<T: Real, V: Vectors<T> + ?Sized>(docs: &[DocDistribution<T>], emb: &V, unit: bool) -> Side<T> {
    let mut words: Vec<usize> = docs.iter().flat_map(|d| d.terms().iter().copied()).collect();
    words.sort_unstable();
    words.dedup();
    let d = emb.dim();
    let mut vectors = Array2::zeros((words.len(), d));
    vectors
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(words.par_iter())
        .for_each(|(mut out, &w)| {
            let row = emb.row(w);
            if unit {
                out.assign(&(&row / norm(row)));
            } else {
                out.assign(&row);
            }
        });
    let sq_norms = vectors.map_axis(Axis(1), |r| r.dot(&r));
    Side { words, vectors, sq_norms }
}

/// `out[s][c] = sum_{i in src[s]} w_i * min_{j in dst[c]} D(i, j)`.
fn one_sided_batch<T: Real, V: Vectors<T> + ?Sized>(
    src: &[DocDistribution<T>],
    dst: &[DocDistribution<T>],
    emb: &V,
    cfg: &TransportConfig,
) -> Array2<T> {
    let unit = cfg.ground == GroundMetric::CosineDistance || cfg.normalize_vectors;
    let from = side(src, emb, unit);
    let to = side(dst, emb, unit);
    let to_pos: HashMap<usize, usize> = to.words.iter().enumerate().map(|(k, &w)| (w, k)).collect();
    let dst_local: Vec<Vec<usize>> = dst
        .iter()
        .map(|d| d.terms().iter().map(|t| to_pos[t]).collect())
        .collect();

    let (n_src, n_dst) = (src.len(), dst.len());
    let mut out = Array2::<T>::zeros((n_src, n_dst));
    let mut dots = Array2::<T>::zeros((0, 0));

    for (block_index, block_words) in from.words.chunks(WORD_BLOCK).enumerate() {
        let start = block_index * WORD_BLOCK;
        let rows = block_words.len();
        let block_vecs = from.vectors.slice(ndarray::s![start..start + rows, ..]);
        if dots.dim() != (rows, to.words.len()) {
            dots = Array2::zeros((rows, to.words.len()));
        }
        general_mat_mul(T::one(), &block_vecs, &to.vectors.t(), T::zero(), &mut dots);

        // Dots -> ground distances, in place.
        dots.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(r, mut row)| {
                let word = block_words[r];
                let wn = from.sq_norms[start + r];
                for (k, x) in row.iter_mut().enumerate() {
                    *x = if to.words[k] == word {
                        T::zero()
                    } else if cfg.ground == GroundMetric::CosineDistance {
                        let c = *x / (wn * to.sq_norms[k]).sqrt();
                        (T::one() - c).max(T::zero()).min(T::of(2.0))
                    } else {
                        (wn + to.sq_norms[k] - (*x + *x)).max(T::zero()).sqrt()
                    };
                }
            });

        // Nearest-term table for this block of words.
        let mut nearest = Array2::<T>::zeros((rows, n_dst));
        nearest
            .axis_iter_mut(Axis(0))
            .into_par_iter()
            .zip(dots.axis_iter(Axis(0)).into_par_iter())
            .for_each(|(mut z, dist)| {
                for (c, terms) in dst_local.iter().enumerate() {
                    z[c] = terms.iter().map(|&j| dist[j]).fold(T::infinity(), T::min);
                }
            });

        let (lo, hi) = (block_words[0], block_words[rows - 1]);
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .zip(src.par_iter())
            .for_each(|(mut acc, doc)| {
                let terms = doc.terms();
                let begin = terms.partition_point(|&t| t < lo);
                for k in begin..terms.len() {
                    let t = terms[k];
                    if t > hi {
                        break;
                    }
                    let local = block_words.binary_search(&t).expect("block covers all source words in range");
                    acc.scaled_add(doc.weights()[k], &nearest.row(local));
                }
            });
    }
    out
}

fn validate_batch<T: Real, V: Vectors<T> + ?Sized>(docs: &[DocDistribution<T>], emb: &V, what: &str) -> Result<()> {
    if docs.is_empty() {
        return Err(Error::InvalidArgument(format!("empty {what} set")));
    }
    for d in docs {
        super::check_ids(d, emb)?;
    }
    Ok(())
}

/// Relaxed distances between every query (row) and corpus document (column).
pub fn lc_rwmd_batch<T: Real, V: Vectors<T> + ?Sized>(
    queries: &[DocDistribution<T>],
    corpus: &[DocDistribution<T>],
    emb: &V,
    cfg: &TransportConfig,
    sidedness: Sidedness,
) -> Result<DistanceMatrixResult<T>> {
    validate_batch(queries, emb, "query")?;
    validate_batch(corpus, emb, "corpus")?;
    let values = match sidedness {
        Sidedness::QueryToCorpus => one_sided_batch(queries, corpus, emb, cfg),
        Sidedness::CorpusToQuery => one_sided_batch(corpus, queries, emb, cfg).reversed_axes(),
        Sidedness::Max => {
            let mut qc = one_sided_batch(queries, corpus, emb, cfg);
            let cq = one_sided_batch(corpus, queries, emb, cfg);
            qc.zip_mut_with(&cq.t(), |a, &b| *a = a.max(b));
            qc
        }
    };
    Ok(DistanceMatrixResult {
        row_ids: queries.iter().map(|d| d.doc_id.clone()).collect(),
        col_ids: corpus.iter().map(|d| d.doc_id.clone()).collect(),
        values: values.as_standard_layout().into_owned(),
        method: Method::LcRwmd,
        ground: cfg.ground,
        weighting: WeightMode::Normalized,
        kind: ValueKind::Distance,
    })
}

/// Distance matrix computed pair by pair (parallel over rows). `LcRwmd`
/// dispatches to [`lc_rwmd_batch`].
pub fn pairwise_distances<T: Real, V: Vectors<T> + ?Sized>(
    queries: &[DocDistribution<T>],
    corpus: &[DocDistribution<T>],
    emb: &V,
    cfg: &TransportConfig,
    method: Method,
    sidedness: Sidedness,
) -> Result<DistanceMatrixResult<T>> {
    if method == Method::LcRwmd {
        return lc_rwmd_batch(queries, corpus, emb, cfg, sidedness);
    }
    validate_batch(queries, emb, "query")?;
    validate_batch(corpus, emb, "corpus")?;
    let rows: Vec<Vec<T>> = queries
        .par_iter()
        .map(|q| {
            corpus
                .iter()
                .map(|c| match method {
                    Method::Emd => exact_wmd(q, c, emb, cfg),
                    Method::Rwmd => rwmd(q, c, emb, cfg, sidedness),
                    Method::Wcd => wcd(q, c, emb, cfg),
                    Method::LcRwmd => unreachable!(),
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    let values = Array2::from_shape_fn((queries.len(), corpus.len()), |(i, j)| rows[i][j]);
    Ok(DistanceMatrixResult {
        row_ids: queries.iter().map(|d| d.doc_id.clone()).collect(),
        col_ids: corpus.iter().map(|d| d.doc_id.clone()).collect(),
        values,
        method,
        ground: cfg.ground,
        weighting: WeightMode::Normalized,
        kind: ValueKind::Distance,
    })
}
