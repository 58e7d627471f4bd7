//! Orthogonal Procrustes alignment of independently trained spaces and
//! term-drift series across them.
//!
//! The rotation (and optional uniform scale) is fitted on anchor rows
//! mean-centered per space. Only the rotation and scale are applied to the
//! full matrix; no translation is added, so every within-space cosine is
//! preserved exactly up to rounding.

use std::collections::{HashMap, HashSet};

use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;

use crate::embedding::{cosine_similarity, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Default)]
pub struct AlignOptions<T> {
    /// Fit a uniform scale factor in addition to the rotation.
    pub scale: bool,
    /// Per-anchor-term weights (e.g. corpus frequencies). Unlisted anchors weigh 0.
    pub anchor_weights: Option<HashMap<String, T>>,
}

#[derive(Debug, Clone)]
pub struct Alignment<T> {
    pub aligned: EmbeddingMatrix<T>,
    /// Orthogonal `d x d` map applied on the right: `aligned = scale * source * rotation`.
    pub rotation: Array2<T>,
    pub scale: T,
    /// Frobenius distance between aligned and target anchor rows.
    pub residual: T,
    pub anchor_size: usize,
}

/// Terms present in every space, in the first space's order.
pub fn shared_vocabulary<T: Real>(spaces: &[&EmbeddingMatrix<T>]) -> Vec<String> {
    let Some(first) = spaces.first() else {
        return Vec::new();
    };
    first
        .vocab()
        .terms()
        .iter()
        .filter(|t| spaces[1..].iter().all(|s| s.vocab().contains(t)))
        .cloned()
        .collect()
}

fn gather<T: Real>(emb: &EmbeddingMatrix<T>, terms: &[String]) -> Array2<T> {
    let ids: Vec<usize> = terms.iter().map(|t| emb.id(t).expect("anchor validated")).collect();
    emb.vectors().select(Axis(0), &ids)
}

fn weighted_center<T: Real>(m: &Array2<T>, w: &Array1<T>) -> Array2<T> {
    let total: T = w.sum();
    let mean = w.dot(m) / total;
    m - &mean
}

pub fn procrustes_align<T: Real>(
    source: &EmbeddingMatrix<T>,
    target: &EmbeddingMatrix<T>,
    anchor: Option<&[String]>,
    opts: &AlignOptions<T>,
) -> Result<Alignment<T>> {
    let d = source.dim();
    if target.dim() != d {
        return Err(Error::DimensionMismatch { expected: target.dim(), found: d });
    }
    let anchor: Vec<String> = match anchor {
        Some(a) => {
            for t in a {
                if !source.vocab().contains(t) || !target.vocab().contains(t) {
                    return Err(Error::UnknownTerm(t.clone()));
                }
            }
            let mut seen = HashSet::new();
            a.iter().filter(|t| seen.insert(t.as_str())).cloned().collect()
        }
        None => shared_vocabulary(&[source, target]),
    };
    if anchor.is_empty() {
        return Err(Error::DisjointVocabularies);
    }
    if anchor.len() < d + 1 {
        return Err(Error::AnchorTooSmall { found: anchor.len(), required: d + 1 });
    }

    let weights: Array1<T> = match &opts.anchor_weights {
        Some(map) => anchor
            .iter()
            .map(|t| map.get(t).copied().unwrap_or_else(T::zero).max(T::zero()))
            .collect(),
        None => Array1::from_elem(anchor.len(), T::one()),
    };
    if weights.iter().filter(|w| **w > T::zero()).count() < d + 1 {
        return Err(Error::AnchorTooSmall {
            found: weights.iter().filter(|w| **w > T::zero()).count(),
            required: d + 1,
        });
    }

    let src = gather(source, &anchor);
    let tgt = gather(target, &anchor);
    let x = weighted_center(&src, &weights);
    let y = weighted_center(&tgt, &weights);
    let wx = &x * &weights.view().insert_axis(Axis(1));

    for m in [&x, &y] {
        let gram = m.t().dot(&(m * &weights.view().insert_axis(Axis(1))));
        let sv = T::thin_svd(gram.view()).singular_values;
        let (max, min) = (sv[0], sv[sv.len() - 1]);
        if max.is_zero() || min <= max * T::of(1e-12) {
            return Err(Error::RankDeficientAnchor);
        }
    }

    let cross = wx.t().dot(&y);
    let svd = T::thin_svd(cross.view());
    let rotation = svd.u.dot(&svd.vt);
    let scale = if opts.scale {
        svd.singular_values.sum() / (&wx * &x).sum()
    } else {
        T::one()
    };

    let aligned_vectors = source.vectors().dot(&rotation) * scale;
    let residual = (&src.dot(&rotation) * scale - &tgt).mapv(|v| v * v).sum().sqrt();
    Ok(Alignment {
        aligned: source.with_vectors(aligned_vectors)?,
        rotation,
        scale,
        residual,
        anchor_size: anchor.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainMode {
    /// Every space is mapped onto the first.
    ToFirst,
    /// Each space is mapped onto its already-aligned predecessor.
    ToPrevious,
    /// Spaces are assumed to share a frame already; nothing is changed.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentReport<T> {
    pub label: String,
    pub anchor_size: usize,
    pub residual: T,
    pub scale: T,
}

#[derive(Debug, Clone)]
pub struct AlignedSpaceSet<T> {
    pub spaces: Vec<EmbeddingMatrix<T>>,
    pub anchor: Vec<String>,
    pub reference_index: usize,
    pub reports: Vec<AlignmentReport<T>>,
}

pub fn chain_align<T: Real>(
    spaces: Vec<EmbeddingMatrix<T>>,
    mode: ChainMode,
    opts: &AlignOptions<T>,
) -> Result<AlignedSpaceSet<T>> {
    if spaces.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 spaces to align, got {}",
            spaces.len()
        )));
    }
    let d = spaces[0].dim();
    if let Some(i) = spaces.iter().position(|s| s.dim() != d) {
        return Err(Error::AlignmentPair {
            source_index: i,
            target_index: if mode == ChainMode::ToPrevious { i - 1 } else { 0 },
            inner: Box::new(Error::DimensionMismatch { expected: d, found: spaces[i].dim() }),
        });
    }
    let anchor = shared_vocabulary(&spaces.iter().collect::<Vec<_>>());
    if anchor.is_empty() {
        return Err(Error::DisjointVocabularies);
    }
    let identity_report = |s: &EmbeddingMatrix<T>| AlignmentReport {
        label: s.label().to_string(),
        anchor_size: anchor.len(),
        residual: T::zero(),
        scale: T::one(),
    };
    let wrap = |i: usize, j: usize| move |e: Error| Error::AlignmentPair {
        source_index: i,
        target_index: j,
        inner: Box::new(e),
    };

    let (aligned, reports) = match mode {
        ChainMode::None => {
            let reports = spaces.iter().map(identity_report).collect();
            (spaces, reports)
        }
        ChainMode::ToFirst => {
            let results: Vec<Alignment<T>> = spaces[1..]
                .par_iter()
                .enumerate()
                .map(|(k, s)| procrustes_align(s, &spaces[0], Some(&anchor), opts).map_err(wrap(k + 1, 0)))
                .collect::<Result<_>>()?;
            let mut out = vec![spaces[0].clone()];
            let mut reports = vec![identity_report(&spaces[0])];
            for a in results {
                reports.push(AlignmentReport {
                    label: a.aligned.label().to_string(),
                    anchor_size: a.anchor_size,
                    residual: a.residual,
                    scale: a.scale,
                });
                out.push(a.aligned);
            }
            (out, reports)
        }
        ChainMode::ToPrevious => {
            let mut out: Vec<EmbeddingMatrix<T>> = vec![spaces[0].clone()];
            let mut reports = vec![identity_report(&spaces[0])];
            for (i, s) in spaces.iter().enumerate().skip(1) {
                let a = procrustes_align(s, &out[i - 1], Some(&anchor), opts).map_err(wrap(i, i - 1))?;
                reports.push(AlignmentReport {
                    label: a.aligned.label().to_string(),
                    anchor_size: a.anchor_size,
                    residual: a.residual,
                    scale: a.scale,
                });
                out.push(a.aligned);
            }
            (out, reports)
        }
    };
    Ok(AlignedSpaceSet {
        spaces: aligned,
        anchor,
        reference_index: 0,
        reports,
    })
}

/// One row per space: cosine of the focal term with each probe, `None`
/// where either vector is missing from that space.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSeries<T> {
    pub term: String,
    pub probes: Vec<String>,
    pub rows: Vec<DriftRow<T>>,
    /// `(space label, term)` pairs that were unavailable.
    pub missing: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftRow<T> {
    pub space: String,
    pub values: Vec<Option<T>>,
}

pub fn term_drift<T: Real>(term: &str, spaces: &[EmbeddingMatrix<T>], probes: &[String]) -> Result<DriftSeries<T>> {
    if !spaces.iter().any(|s| s.vocab().contains(term)) {
        return Err(Error::AbsentEverywhere { term: term.to_string() });
    }
    let mut missing = Vec::new();
    let mut rows = Vec::with_capacity(spaces.len());
    for s in spaces {
        let focal = s.vector(term);
        if focal.is_none() {
            missing.push((s.label().to_string(), term.to_string()));
        }
        let mut values = Vec::with_capacity(probes.len());
        for p in probes {
            let probe = s.vector(p);
            if probe.is_none() && focal.is_some() {
                missing.push((s.label().to_string(), p.clone()));
            }
            values.push(match (focal, probe) {
                (Some(f), Some(q)) => Some(cosine_similarity(f, q)?),
                _ => None,
            });
        }
        rows.push(DriftRow {
            space: s.label().to_string(),
            values,
        });
    }
    Ok(DriftSeries {
        term: term.to_string(),
        probes: probes.to_vec(),
        rows,
        missing,
    })
}

/// Cosine of a term's vector in the reference space with its vector in each
/// space of the set (meaningful only for aligned spaces).
pub fn cross_space_similarity<T: Real>(term: &str, set: &AlignedSpaceSet<T>) -> Result<Vec<Option<T>>> {
    let reference = set.spaces[set.reference_index]
        .vector(term)
        .ok_or_else(|| Error::UnknownTerm(term.to_string()))?;
    set.spaces
        .iter()
        .map(|s| s.vector(term).map(|v| cosine_similarity(reference, v)).transpose())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn emb(rows: &[(&str, [f64; 2])], label: &str) -> EmbeddingMatrix<f64> {
        EmbeddingMatrix::from_rows(rows.iter().map(|(t, v)| (t.to_string(), v.to_vec())).collect(), label).unwrap()
    }

    fn square() -> EmbeddingMatrix<f64> {
        emb(&[("a", [1.0, 0.2]), ("b", [0.1, 1.0]), ("c", [-1.0, 0.4]), ("d", [0.3, -0.8])], "s")
    }

    #[test]
    fn identity_when_target_equals_source() {
        let s = square();
        let a = procrustes_align(&s, &s, None, &AlignOptions::default()).unwrap();
        let eye: Array2<f64> = Array2::eye(2);
        assert!((&a.rotation - &eye).iter().all(|x| x.abs() < 1e-9));
        assert!(a.residual < 1e-9);
    }

    #[test]
    fn recovers_known_rotation_and_scale() {
        let s = square();
        let th: f64 = 0.7;
        let q = array![[th.cos(), -th.sin()], [th.sin(), th.cos()]];
        let t = s.with_vectors(s.vectors().dot(&q) * 2.5).unwrap();
        let opts = AlignOptions { scale: true, anchor_weights: None };
        let a = procrustes_align(&s, &t, None, &opts).unwrap();
        assert!((a.scale - 2.5).abs() < 1e-9);
        assert!((a.aligned.vectors() - t.vectors()).iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn errors() {
        let s = square();
        let other = emb(&[("x", [1.0, 0.0]), ("y", [0.0, 1.0]), ("z", [1.0, 1.0])], "o");
        assert!(matches!(
            procrustes_align(&s, &other, None, &AlignOptions::default()),
            Err(Error::DisjointVocabularies)
        ));
        let anchor = vec!["a".to_string(), "b".to_string()];
        assert!(matches!(
            procrustes_align(&s, &s, Some(&anchor), &AlignOptions::default()),
            Err(Error::AnchorTooSmall { found: 2, required: 3 })
        ));
        let collinear = emb(&[("a", [1.0, 1.0]), ("b", [2.0, 2.0]), ("c", [3.0, 3.0])], "c");
        assert!(matches!(
            procrustes_align(&collinear, &collinear, None, &AlignOptions::default()),
            Err(Error::RankDeficientAnchor)
        ));
        let three = EmbeddingMatrix::from_rows(vec![("a", vec![1.0, 0.0, 0.0])], "3").unwrap();
        assert!(matches!(
            procrustes_align(&s, &three, None, &AlignOptions::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn weighted_anchor_ignores_zero_weight_outlier() {
        let s = square();
        let mut t = s.clone();
        t = t.with_vectors({
            let mut v = t.vectors().clone();
            v[[3, 0]] = 50.0;
            v
        }).unwrap();
        let weights = HashMap::from([("a".to_string(), 1.0), ("b".to_string(), 2.0), ("c".to_string(), 1.0)]);
        let opts = AlignOptions { scale: false, anchor_weights: Some(weights) };
        let a = procrustes_align(&s, &t, None, &opts).unwrap();
        let eye: Array2<f64> = Array2::eye(2);
        assert!((&a.rotation - &eye).iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn chain_identical_and_mismatched() {
        let s = square();
        let set = chain_align(vec![s.clone(), s.clone()], ChainMode::ToFirst, &AlignOptions::default()).unwrap();
        assert!((set.spaces[1].vectors() - s.vectors()).iter().all(|x| x.abs() < 1e-12));
        let three = EmbeddingMatrix::from_rows(vec![("a", vec![1.0, 0.0, 0.0])], "3").unwrap();
        let err = chain_align(vec![s.clone(), three], ChainMode::ToPrevious, &AlignOptions::default()).unwrap_err();
        assert!(matches!(err, Error::AlignmentPair { source_index: 1, target_index: 0, .. }));
        assert!(chain_align(vec![s], ChainMode::ToFirst, &AlignOptions::default()).is_err());
    }

    #[test]
    fn drift_self_probe_and_missing() {
        let s1 = square();
        let mut s2 = emb(&[("a", [1.0, 0.0]), ("b", [0.0, 1.0])], "s2");
        s2.set_label("s2");
        let series = term_drift("a", &[s1, s2], &["a".into(), "c".into()]).unwrap();
        assert_eq!(series.rows[0].values[0], Some(1.0));
        assert_eq!(series.rows[1].values[0], Some(1.0));
        assert_eq!(series.rows[1].values[1], None);
        assert_eq!(series.missing, vec![("s2".to_string(), "c".to_string())]);
        assert!(matches!(
            term_drift("zz", &[square()], &[]),
            Err(Error::AbsentEverywhere { .. })
        ));
    }

    #[test]
    fn drift_reflects_swapped_vectors() {
        let s1 = square();
        let swapped = emb(&[("a", [0.1, 1.0]), ("b", [1.0, 0.2]), ("c", [-1.0, 0.4]), ("d", [0.3, -0.8])], "s2");
        let series = term_drift("a", &[s1.clone(), swapped], &["c".into(), "d".into()]).unwrap();
        let cb = crate::embedding::term_cosine(&s1, "b", "c").unwrap();
        let db = crate::embedding::term_cosine(&s1, "b", "d").unwrap();
        assert_eq!(series.rows[1].values, vec![Some(cb), Some(db)]);
    }
}
