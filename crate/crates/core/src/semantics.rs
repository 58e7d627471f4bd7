//! Semantic directions from juxtaposed term pairs and semantic centroids
//! from term sets.

use std::fs::File;
use std::path::Path;

use ndarray::{Array1, ArrayView1};

use crate::embedding::{cosine_similarity, norm, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Built-in pair lists, as `(name, csv text)`.
pub const BUNDLED_PAIR_SETS: [(&str, &str); 4] = [
    ("immigrant_citizen", include_str!("../data/immigrant_citizen.csv")),
    ("affluence_poverty", include_str!("../data/affluence_poverty.csv")),
    ("black_white", include_str!("../data/black_white.csv")),
    ("good_evil", include_str!("../data/good_evil.csv")),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermPairSet {
    pub label_a: String,
    pub label_b: String,
    pub pairs: Vec<(String, String)>,
}

impl TermPairSet {
    pub fn new(label_a: impl Into<String>, label_b: impl Into<String>, pairs: Vec<(String, String)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument("pair set is empty".into()));
        }
        if let Some((a, _)) = pairs.iter().find(|(a, b)| a == b) {
            return Err(Error::InvalidArgument(format!("pair with identical poles {a:?}")));
        }
        Ok(Self {
            label_a: label_a.into(),
            label_b: label_b.into(),
            pairs,
        })
    }

    /// Same pairs with poles swapped.
    pub fn reversed(&self) -> Self {
        Self {
            label_a: self.label_b.clone(),
            label_b: self.label_a.clone(),
            pairs: self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    /// Two-column CSV; the header row names the poles.
    pub fn from_csv_str(text: &str, origin: &str) -> Result<Self> {
        Self::from_reader(text.as_bytes(), origin)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    pub fn bundled(name: &str) -> Option<Self> {
        BUNDLED_PAIR_SETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, text)| Self::from_csv_str(text, n).expect("bundled pair sets are valid"))
    }

    fn from_reader<R: std::io::Read>(r: R, origin: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 {
            return Err(Error::parse(format!("{origin}:1"), "header must name exactly two poles"));
        }
        let mut pairs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::parse(format!("{origin}:{}", i + 2), "expected two columns"));
            }
            pairs.push((rec[0].trim().to_string(), rec[1].trim().to_string()));
        }
        Self::new(headers[0].trim(), headers[1].trim(), pairs)
    }
}

/// Unit vector pointing toward `label_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticDirection<T> {
    pub vector: Array1<T>,
    pub label_a: String,
    pub label_b: String,
    pub source_pairs: Vec<(String, String)>,
    pub skipped: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DirectionOptions {
    /// Length-normalize each term vector before subtracting.
    pub pre_normalize: bool,
    /// Normalize each pair difference before averaging.
    pub per_pair_normalize: bool,
}

fn unit<T: Real>(v: ArrayView1<'_, T>) -> Option<Array1<T>> {
    let n = norm(v);
    (n > T::zero()).then(|| &v / n)
}

/// Average of `v(a) - v(b)` over pairs with both terms in the vocabulary,
/// then normalized to unit length.
pub fn build_direction<T: Real>(
    pairs: &TermPairSet,
    emb: &EmbeddingMatrix<T>,
    opts: DirectionOptions,
) -> Result<SemanticDirection<T>> {
    let mut sum = Array1::zeros(emb.dim());
    let mut used = Vec::new();
    let mut skipped = Vec::new();
    for (a, b) in &pairs.pairs {
        let (Some(va), Some(vb)) = (emb.vector(a), emb.vector(b)) else {
            skipped.push((a.clone(), b.clone()));
            continue;
        };
        let mut diff = if opts.pre_normalize {
            let ua = unit(va).expect("embedding rows are nonzero");
            let ub = unit(vb).expect("embedding rows are nonzero");
            ua - ub
        } else {
            &va - &vb
        };
        if opts.per_pair_normalize {
            match unit(diff.view()) {
                Some(u) => diff = u,
                None => {
                    skipped.push((a.clone(), b.clone()));
                    continue;
                }
            }
        }
        sum += &diff;
        used.push((a.clone(), b.clone()));
    }
    if used.is_empty() {
        return Err(Error::AllOutOfVocabulary("pairs"));
    }
    let mean = sum / T::of(used.len() as f64);
    let vector = unit(mean.view()).ok_or_else(|| Error::ZeroVector("semantic direction".into()))?;
    Ok(SemanticDirection {
        vector,
        label_a: pairs.label_a.clone(),
        label_b: pairs.label_b.clone(),
        source_pairs: used,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticCentroid<T> {
    pub vector: Array1<T>,
    pub members: Vec<String>,
    pub skipped: Vec<String>,
}

const DEGENERATE_NORM: f64 = 1e-10;

/// Unweighted mean of the in-vocabulary member vectors.
pub fn build_centroid<T: Real>(terms: &[String], emb: &EmbeddingMatrix<T>) -> Result<SemanticCentroid<T>> {
    let mut sum = Array1::zeros(emb.dim());
    let mut members = Vec::new();
    let mut skipped = Vec::new();
    for t in terms {
        match emb.vector(t) {
            Some(v) => {
                sum += &v;
                members.push(t.clone());
            }
            None => skipped.push(t.clone()),
        }
    }
    if members.is_empty() {
        return Err(Error::AllOutOfVocabulary("terms"));
    }
    let vector = sum / T::of(members.len() as f64);
    if norm(vector.view()) < T::of(DEGENERATE_NORM) {
        return Err(Error::DegenerateCentroid);
    }
    Ok(SemanticCentroid { vector, members, skipped })
}

/// Cosine between a term and a direction; positive leans toward `label_a`.
pub fn project_term<T: Real>(term: &str, dir: &SemanticDirection<T>, emb: &EmbeddingMatrix<T>) -> Result<T> {
    let v = emb.require(term)?;
    cosine_similarity(v, dir.vector.view())
}
