use ndarray::Array1;

use super::{check_ids, euclidean, ground_distance, DocDistribution, GroundMetric, Sidedness, TransportConfig};
use crate::embedding::{norm, Vectors};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Cost of moving all of `from`'s mass, each unit to its nearest term of `to`.
pub fn rwmd_one_sided<T: Real, V: Vectors<T> + ?Sized>(
    from: &DocDistribution<T>,
    to: &DocDistribution<T>,
    emb: &V,
    cfg: &TransportConfig,
) -> Result<T> {
    check_ids(from, emb)?;
    check_ids(to, emb)?;
    Ok(from
        .iter()
        .map(|(i, w)| {
            let nearest = to
                .terms()
                .iter()
                .map(|&j| ground_distance(emb, i, j, cfg))
                .fold(T::infinity(), T::min);
            w * nearest
        })
        .fold(T::zero(), |acc, x| acc + x))
}

/// Relaxed word mover's distance with the requested sidedness
/// (`a` plays the query role).
pub fn rwmd<T: Real, V: Vectors<T> + ?Sized>(
    a: &DocDistribution<T>,
    b: &DocDistribution<T>,
    emb: &V,
    cfg: &TransportConfig,
    sidedness: Sidedness,
) -> Result<T> {
    Ok(match sidedness {
        Sidedness::QueryToCorpus => rwmd_one_sided(a, b, emb, cfg)?,
        Sidedness::CorpusToQuery => rwmd_one_sided(b, a, emb, cfg)?,
        Sidedness::Max => rwmd_one_sided(a, b, emb, cfg)?.max(rwmd_one_sided(b, a, emb, cfg)?),
    })
}

fn centroid<T: Real, V: Vectors<T> + ?Sized>(doc: &DocDistribution<T>, emb: &V, cfg: &TransportConfig) -> Array1<T> {
    let unit = cfg.normalize_vectors && cfg.ground == GroundMetric::Euclidean;
    let mut acc = Array1::zeros(emb.dim());
    for (i, w) in doc.iter() {
        let row = emb.row(i);
        if unit {
            acc.scaled_add(w / norm(row), &row);
        } else {
            acc.scaled_add(w, &row);
        }
    }
    acc / doc.mass()
}

/// Ground distance between the weighted mean vectors of the two documents.
pub fn wcd<T: Real, V: Vectors<T> + ?Sized>(
    a: &DocDistribution<T>,
    b: &DocDistribution<T>,
    emb: &V,
    cfg: &TransportConfig,
) -> Result<T> {
    check_ids(a, emb)?;
    check_ids(b, emb)?;
    if a.terms() == b.terms() && a.weights() == b.weights() {
        return Ok(T::zero());
    }
    let (ca, cb) = (centroid(a, emb, cfg), centroid(b, emb, cfg));
    Ok(match cfg.ground {
        GroundMetric::Euclidean => euclidean(ca.view(), cb.view()),
        GroundMetric::CosineDistance => {
            let (na, nb) = (norm(ca.view()), norm(cb.view()));
            if na.is_zero() || nb.is_zero() {
                return Err(Error::ZeroVector("document centroid".into()));
            }
            (T::one() - ca.dot(&cb) / (na * nb)).max(T::zero()).min(T::of(2.0))
        }
    })
}
