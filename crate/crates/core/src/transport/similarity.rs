use std::collections::BTreeMap;

use super::{DistanceMatrixResult, ValueKind};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityMode {
    /// `-(d - mean) / sd` with population statistics over the whole matrix.
    NegateZscore,
    /// `1 / (1 + d)`.
    Inverse,
}

/// Monotone decreasing map from distances to similarities.
pub fn distance_to_similarity<T: Real>(d: &DistanceMatrixResult<T>, mode: SimilarityMode) -> Result<DistanceMatrixResult<T>> {
    if d.values.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite distance".into()));
    }
    let values = match mode {
        SimilarityMode::Inverse => d.values.mapv(|x| T::one() / (T::one() + x)),
        SimilarityMode::NegateZscore => {
            let n = T::of(d.values.len() as f64);
            if d.values.is_empty() {
                return Err(Error::ZeroVariance);
            }
            let mean = d.values.sum() / n;
            let var = d.values.mapv(|x| (x - mean) * (x - mean)).sum() / n;
            let sd = var.sqrt();
            if !(sd > T::zero()) {
                return Err(Error::ZeroVariance);
            }
            d.values.mapv(|x| -(x - mean) / sd)
        }
    };
    Ok(DistanceMatrixResult {
        values,
        kind: ValueKind::Similarity(mode),
        ..d.clone()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockMean<T> {
    pub row_key: String,
    pub col_key: String,
    pub mean: T,
    pub count: usize,
}

/// Mean over all (row, column) cells sharing a `(row key, column key)` pair,
/// e.g. outlet-year against organization. Output is sorted by keys.
pub fn aggregate_blocks<T: Real>(d: &DistanceMatrixResult<T>, row_keys: &[String], col_keys: &[String]) -> Result<Vec<BlockMean<T>>> {
    let (r, c) = d.values.dim();
    if row_keys.len() != r || col_keys.len() != c {
        return Err(Error::DimensionMismatch {
            expected: r * c,
            found: row_keys.len() * col_keys.len(),
        });
    }
    let mut acc: BTreeMap<(&str, &str), (T, usize)> = BTreeMap::new();
    for ((i, j), &v) in d.values.indexed_iter() {
        let e = acc.entry((&row_keys[i], &col_keys[j])).or_insert((T::zero(), 0));
        e.0 += v;
        e.1 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|((rk, ck), (sum, n))| BlockMean {
            row_key: rk.to_string(),
            col_key: ck.to_string(),
            mean: sum / T::of(n as f64),
            count: n,
        })
        .collect())
}
