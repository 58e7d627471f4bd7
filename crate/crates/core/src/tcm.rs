//! Windowed term co-occurrence matrices.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Every co-occurrence inside the window counts 1.
    #[default]
    Uniform,
    /// A pair at offset `k` counts `1/k`.
    InverseDistance,
}

/// Symmetric, nonnegative, zero-diagonal co-occurrence weights. Rows hold
/// `(column, weight)` sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct TermContextMatrix<T> {
    vocab: Vocabulary,
    rows: Vec<Vec<(usize, T)>>,
    window: usize,
    weighting: Weighting,
}

impl<T: Real> TermContextMatrix<T> {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, T)>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| self.rows[i][k].1)
            .unwrap_or_else(|_| T::zero())
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<T> {
        Some(self.get(self.vocab.id(a)?, self.vocab.id(b)?))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

// Documents are accumulated in fixed-size chunks merged in order, so the
// floating point result does not depend on the thread count.
const CHUNK: usize = 256;

/// Counts co-occurrences within `±window` positions of each token, never
/// across documents. Pairs of identical terms are not counted.
pub fn build_tcm<T: Real, S: AsRef<str> + Sync>(
    docs: &[Vec<S>],
    window: usize,
    weighting: Weighting,
) -> Result<TermContextMatrix<T>> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    let terms: BTreeSet<&str> = docs.iter().flatten().map(AsRef::as_ref).collect();
    let vocab = Vocabulary::from_terms(terms.iter().copied())?;
    let weights: Vec<T> = (1..=window)
        .map(|k| match weighting {
            Weighting::Uniform => T::one(),
            Weighting::InverseDistance => T::one() / T::of(k as f64),
        })
        .collect();

    let partials: Vec<HashMap<(usize, usize), T>> = docs
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc: HashMap<(usize, usize), T> = HashMap::new();
            for doc in chunk {
                let ids: Vec<usize> = doc.iter().map(|t| vocab.id(t.as_ref()).unwrap()).collect();
                for (i, &a) in ids.iter().enumerate() {
                    for k in 1..=window {
                        let Some(&b) = ids.get(i + k) else { break };
                        if a == b {
                            continue;
                        }
                        let key = if a < b { (a, b) } else { (b, a) };
                        *acc.entry(key).or_insert_with(T::zero) += weights[k - 1];
                    }
                }
            }
            acc
        })
        .collect();

    let mut merged: HashMap<(usize, usize), T> = HashMap::new();
    for part in partials {
        // Sort each partial so merge order is fixed.
        let mut entries: Vec<_> = part.into_iter().collect();
        entries.sort_unstable_by_key(|&(k, _)| k);
        for (k, w) in entries {
            *merged.entry(k).or_insert_with(T::zero) += w;
        }
    }
    let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); vocab.len()];
    for ((a, b), w) in merged {
        rows[a].push((b, w));
        rows[b].push((a, w));
    }
    for r in &mut rows {
        r.sort_unstable_by_key(|&(c, _)| c);
    }
    Ok(TermContextMatrix {
        vocab,
        rows,
        window,
        weighting,
    })
}
