//! Concept engagement: transport distance from each document to a concept
//! pseudo-document, negated and standardized across the scored corpus.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, NaiveDate};
use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;

use crate::dtm::DocumentTermMatrix;
use crate::embedding::{EmbeddingMatrix, Vectors};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::semantics::{SemanticCentroid, SemanticDirection};
use crate::transport::{exact_wmd, lc_rwmd_batch, map_dtm, rwmd, DocDistribution, Sidedness, TransportConfig, WeightMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pole {
    /// Toward the direction's first pole.
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConceptSpec<T> {
    Term(String),
    /// Uniform weights over the listed terms.
    Compound(Vec<String>),
    Centroid(SemanticCentroid<T>),
    DirectionPole { direction: SemanticDirection<T>, pole: Pole },
}

/// An embedding with extra synthetic rows appended after the base rows,
/// without copying the base matrix.
pub struct ExtendedEmbedding<'a, T> {
    base: &'a EmbeddingMatrix<T>,
    extra: &'a Array2<T>,
}

impl<T: Real> Vectors<T> for ExtendedEmbedding<'_, T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn n_rows(&self) -> usize {
        self.base.len() + self.extra.nrows()
    }

    fn row(&self, id: usize) -> ArrayView1<'_, T> {
        let n = self.base.len();
        if id < n {
            self.base.vectors().row(id)
        } else {
            self.extra.row(id - n)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoDocument<T> {
    pub distribution: DocDistribution<T>,
    /// Synthetic rows referenced by ids `base_len..`; empty for term concepts.
    pub synthetic: Vec<(String, Array1<T>)>,
    /// Concept terms missing from the embedding.
    pub skipped: Vec<String>,
    synthetic_rows: Array2<T>,
}

impl<T: Real> PseudoDocument<T> {
    /// Base embedding plus this document's synthetic rows.
    pub fn space<'a>(&'a self, base: &'a EmbeddingMatrix<T>) -> ExtendedEmbedding<'a, T> {
        ExtendedEmbedding {
            base,
            extra: &self.synthetic_rows,
        }
    }

    /// Owned copy of the extended embedding matrix.
    pub fn extended_matrix(&self, base: &EmbeddingMatrix<T>) -> Result<EmbeddingMatrix<T>> {
        base.with_appended_rows(&self.synthetic)
    }
}

const PSEUDO_DOC_ID: &str = "<concept>";

pub fn make_pseudo_doc<T: Real>(spec: &ConceptSpec<T>, emb: &EmbeddingMatrix<T>) -> Result<PseudoDocument<T>> {
    let plain = |distribution, skipped| PseudoDocument {
        distribution,
        synthetic: Vec::new(),
        skipped,
        synthetic_rows: Array2::zeros((0, emb.dim())),
    };
    let synthetic = |name: String, v: Array1<T>| -> Result<PseudoDocument<T>> {
        if v.len() != emb.dim() {
            return Err(Error::DimensionMismatch { expected: emb.dim(), found: v.len() });
        }
        let id = emb.len();
        let rows = v.clone().insert_axis(ndarray::Axis(0));
        Ok(PseudoDocument {
            distribution: DocDistribution::new(PSEUDO_DOC_ID, [(id, T::one())])?,
            synthetic: vec![(name, v)],
            skipped: Vec::new(),
            synthetic_rows: rows,
        })
    };
    match spec {
        ConceptSpec::Term(t) => {
            let id = emb.id(t).ok_or_else(|| Error::UnknownTerm(t.clone()))?;
            Ok(plain(DocDistribution::new(PSEUDO_DOC_ID, [(id, T::one())])?, Vec::new()))
        }
        ConceptSpec::Compound(terms) => {
            let mut ids = Vec::new();
            let mut skipped = Vec::new();
            for t in terms {
                match emb.id(t) {
                    Some(id) => ids.push(id),
                    None => skipped.push(t.clone()),
                }
            }
            if ids.is_empty() {
                return Err(Error::AllOutOfVocabulary("concept terms"));
            }
            Ok(plain(DocDistribution::uniform(PSEUDO_DOC_ID, &ids)?, skipped))
        }
        ConceptSpec::Centroid(c) => synthetic("<centroid>".into(), c.vector.clone()),
        ConceptSpec::DirectionPole { direction, pole } => {
            let (name, v) = match pole {
                Pole::Positive => (format!("<pole:{}>", direction.label_a), direction.vector.clone()),
                Pole::Negative => (format!("<pole:{}>", direction.label_b), direction.vector.mapv(|x| -x)),
            };
            synthetic(name, v)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmdMethod {
    Exact,
    Rwmd,
    /// Document-to-concept one-sided relaxation, batched.
    LcRwmd,
}

impl fmt::Display for CmdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmdMethod::Exact => "exact",
            CmdMethod::Rwmd => "rwmd",
            CmdMethod::LcRwmd => "lc-rwmd",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngagementRow<T> {
    pub doc_id: String,
    pub date: Option<NaiveDate>,
    pub distance: T,
    /// Negated distance; higher means closer to the concept.
    pub raw: T,
    /// z-score of `raw` over the scored documents.
    pub standardized: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngagementSeries<T> {
    pub concept_label: String,
    pub rows: Vec<EngagementRow<T>>,
    pub skipped_docs: Vec<String>,
    pub oov_terms: Vec<String>,
    pub skipped_concept_terms: Vec<String>,
}

/// Population z-scores; errors when all values are equal.
pub fn standardize<T: Real>(values: &[T]) -> Result<Vec<T>> {
    if values.is_empty() {
        return Err(Error::ZeroVariance);
    }
    let n = T::of(values.len() as f64);
    let mean = values.iter().copied().sum::<T>() / n;
    let sd = (values.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n).sqrt();
    if !(sd > T::zero()) {
        return Err(Error::ZeroVariance);
    }
    Ok(values.iter().map(|&x| (x - mean) / sd).collect())
}

pub fn cmd_scores<T: Real>(
    dtm: &DocumentTermMatrix,
    concept_label: &str,
    spec: &ConceptSpec<T>,
    emb: &EmbeddingMatrix<T>,
    method: CmdMethod,
    cfg: &TransportConfig,
) -> Result<EngagementSeries<T>> {
    let pseudo = make_pseudo_doc(spec, emb)?;
    let space = pseudo.space(emb);
    let mapped = map_dtm::<T>(dtm, emb.vocab(), WeightMode::Normalized);
    if mapped.docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let distances: Vec<T> = match method {
        CmdMethod::Exact => mapped
            .docs
            .par_iter()
            .map(|d| exact_wmd(d, &pseudo.distribution, &space, cfg))
            .collect::<Result<_>>()?,
        CmdMethod::Rwmd => mapped
            .docs
            .par_iter()
            .map(|d| rwmd(d, &pseudo.distribution, &space, cfg, Sidedness::Max))
            .collect::<Result<_>>()?,
        CmdMethod::LcRwmd => {
            let m = lc_rwmd_batch(
                &mapped.docs,
                std::slice::from_ref(&pseudo.distribution),
                &space,
                cfg,
                Sidedness::QueryToCorpus,
            )?;
            m.values.column(0).to_vec()
        }
    };
    let raw: Vec<T> = distances.iter().map(|&d| -d).collect();
    let z = standardize(&raw)?;
    let rows = mapped
        .rows
        .iter()
        .zip(distances.iter().zip(raw.iter().zip(z)))
        .map(|(&r, (&distance, (&raw, standardized)))| EngagementRow {
            doc_id: dtm.docs()[r].id.clone(),
            date: dtm.docs()[r].date,
            distance,
            raw,
            standardized,
        })
        .collect();
    Ok(EngagementSeries {
        concept_label: concept_label.to_string(),
        rows,
        skipped_docs: mapped.skipped_docs,
        oov_terms: mapped.oov_terms,
        skipped_concept_terms: pseudo.skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bucket {
    Month,
    Year,
    Decade,
}

impl Bucket {
    fn key(self, d: NaiveDate) -> (i32, u32) {
        match self {
            Bucket::Month => (d.year(), d.month()),
            Bucket::Year => (d.year(), 0),
            Bucket::Decade => (d.year().div_euclid(10) * 10, 0),
        }
    }

    fn label(self, key: (i32, u32)) -> String {
        match self {
            Bucket::Month => format!("{:04}-{:02}", key.0, key.1),
            Bucket::Year => format!("{:04}", key.0),
            Bucket::Decade => format!("{}s", key.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketRow<T> {
    pub bucket: String,
    pub mean: T,
    pub count: usize,
    /// Change from the previous bucket's mean; `None` for the first bucket or when not requested.
    pub delta: Option<T>,
}

/// Per-bucket means of standardized scores, in chronological order.
pub fn aggregate_series<T: Real>(series: &EngagementSeries<T>, bucket: Bucket, deltas: bool) -> Result<Vec<BucketRow<T>>> {
    let mut acc: BTreeMap<(i32, u32), (T, usize)> = BTreeMap::new();
    for r in &series.rows {
        let date = r.date.ok_or_else(|| Error::MissingDate(r.doc_id.clone()))?;
        let e = acc.entry(bucket.key(date)).or_insert((T::zero(), 0));
        e.0 += r.standardized;
        e.1 += 1;
    }
    let mut out: Vec<BucketRow<T>> = Vec::with_capacity(acc.len());
    for (key, (sum, n)) in acc {
        let mean = sum / T::of(n as f64);
        let delta = match (deltas, out.last()) {
            (true, Some(prev)) => Some(mean - prev.mean),
            _ => None,
        };
        out.push(BucketRow {
            bucket: bucket.label(key),
            mean,
            count: n,
            delta,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtm::build_dtm;
    use crate::semantics::{build_direction, DirectionOptions, TermPairSet};
    use crate::text::{DocMeta, TokenizedDocument};

    fn emb() -> EmbeddingMatrix<f64> {
        EmbeddingMatrix::from_rows(
            vec![
                ("immigration", vec![1.0, 0.0]),
                ("crime", vec![0.8, 0.6]),
                ("border", vec![0.9, -0.2]),
                ("sport", vec![-0.7, 0.7]),
                ("music", vec![-0.9, 0.1]),
            ],
            "toy",
        )
        .unwrap()
    }

    fn doc(id: &str, toks: &[&str], date: Option<(i32, u32, u32)>) -> TokenizedDocument {
        let mut meta = DocMeta::new(id);
        meta.date = date.and_then(|(y, m, d)| NaiveDate::from_ymd_opt(y, m, d));
        TokenizedDocument { meta, tokens: toks.iter().map(|s| s.to_string()).collect() }
    }

    #[test]
    fn pseudo_docs() {
        let e = emb();
        let t = make_pseudo_doc(&ConceptSpec::Term("immigration".into()), &e).unwrap();
        assert_eq!(t.distribution.terms(), [0]);
        assert_eq!(t.distribution.weights(), [1.0]);
        let c = make_pseudo_doc(&ConceptSpec::Compound(vec!["immigration".into(), "crime".into()]), &e).unwrap();
        assert_eq!(c.distribution.weights(), [0.5, 0.5]);
        assert!(make_pseudo_doc(&ConceptSpec::Term("nope".into()), &e).is_err());

        let pairs = TermPairSet::new("imm", "music", vec![("immigration".into(), "music".into())]).unwrap();
        let dir = build_direction(&pairs, &e, DirectionOptions::default()).unwrap();
        let pos = make_pseudo_doc(&ConceptSpec::DirectionPole { direction: dir.clone(), pole: Pole::Positive }, &e).unwrap();
        let neg = make_pseudo_doc(&ConceptSpec::DirectionPole { direction: dir, pole: Pole::Negative }, &e).unwrap();
        assert_eq!(pos.synthetic[0].1, -&neg.synthetic[0].1);
        let ext = pos.extended_matrix(&e).unwrap();
        assert_eq!(ext.len(), e.len() + 1);
        assert_eq!(ext.vectors().row(e.len()), pos.synthetic[0].1.view());
        assert_eq!(pos.space(&e).row(e.len()), pos.synthetic[0].1.view());
    }

    #[test]
    fn concept_only_document_is_most_engaged() {
        let dtm = build_dtm(&[
            doc("a", &["sport", "music"], None),
            doc("b", &["immigration"], None),
            doc("c", &["crime", "music"], None),
        ])
        .unwrap();
        for method in [CmdMethod::Exact, CmdMethod::Rwmd, CmdMethod::LcRwmd] {
            let s = cmd_scores(&dtm, "imm", &ConceptSpec::Term("immigration".into()), &emb(), method, &TransportConfig::default()).unwrap();
            assert_eq!(s.rows[1].distance, 0.0);
            let best = s.rows.iter().max_by(|x, y| x.raw.partial_cmp(&y.raw).unwrap()).unwrap();
            assert_eq!(best.doc_id, "b");
            let mean: f64 = s.rows.iter().map(|r| r.standardized).sum::<f64>() / 3.0;
            assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn empty_documents_skipped() {
        let dtm = build_dtm(&[doc("a", &["sport"], None), doc("b", &["zzz"], None), doc("c", &["crime"], None)]).unwrap();
        let s = cmd_scores(&dtm, "imm", &ConceptSpec::Term("immigration".into()), &emb(), CmdMethod::Exact, &TransportConfig::default()).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert_eq!(s.skipped_docs, vec!["b".to_string()]);
        let none = build_dtm(&[doc("z", &["zzz"], None)]).unwrap();
        assert!(matches!(
            cmd_scores(&none, "imm", &ConceptSpec::Term("immigration".into()), &emb(), CmdMethod::Exact, &TransportConfig::default()),
            Err(Error::EmptyCorpus)
        ));
    }

    fn series(points: &[((i32, u32, u32), f64)]) -> EngagementSeries<f64> {
        EngagementSeries {
            concept_label: "c".into(),
            rows: points
                .iter()
                .enumerate()
                .map(|(i, &((y, m, d), z))| EngagementRow {
                    doc_id: i.to_string(),
                    date: NaiveDate::from_ymd_opt(y, m, d),
                    distance: 0.0,
                    raw: 0.0,
                    standardized: z,
                })
                .collect(),
            skipped_docs: vec![],
            oov_terms: vec![],
            skipped_concept_terms: vec![],
        }
    }

    #[test]
    fn bucket_means_and_deltas() {
        let s = series(&[((2016, 3, 1), 0.4), ((2016, 1, 5), 0.2), ((2016, 2, 9), 0.5)]);
        let b = aggregate_series(&s, Bucket::Month, true).unwrap();
        assert_eq!(b.iter().map(|r| r.bucket.as_str()).collect::<Vec<_>>(), ["2016-01", "2016-02", "2016-03"]);
        assert_eq!(b.iter().map(|r| r.mean).collect::<Vec<_>>(), [0.2, 0.5, 0.4]);
        assert_eq!(b[0].delta, None);
        assert!((b[1].delta.unwrap() - 0.3).abs() < 1e-12);
        assert!((b[2].delta.unwrap() + 0.1).abs() < 1e-12);

        let flat = series(&[((1990, 1, 1), 1.0), ((2001, 1, 1), 1.0), ((2012, 1, 1), 1.0)]);
        let d = aggregate_series(&flat, Bucket::Decade, true).unwrap();
        assert_eq!(d[0].bucket, "1990s");
        assert!(d[1..].iter().all(|r| r.delta == Some(0.0)));

        let yearly = aggregate_series(&s, Bucket::Year, false).unwrap();
        assert_eq!(yearly.len(), 1);
        assert_eq!(yearly[0].count, 3);
        assert_eq!(yearly[0].delta, None);
    }

    #[test]
    fn missing_dates_rejected() {
        let mut s = series(&[((2016, 1, 1), 0.1)]);
        s.rows[0].date = None;
        assert!(matches!(aggregate_series(&s, Bucket::Year, false), Err(Error::MissingDate(_))));
    }
}
