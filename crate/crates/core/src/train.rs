//! Local embedding training: PPMI reweighting followed by truncated SVD.
//!
//! Term vectors are `U_d * diag(S_d)^alpha` with `alpha = 0.5` by default.
//! Each singular vector is oriented so that its largest-magnitude entry is
//! positive, which makes the output independent of the SVD backend's signs.

use ndarray::{Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::scalar::{Real, Svd};
use crate::tcm::TermContextMatrix;

/// Row-major sparse matrix with rows sorted by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub rows: Vec<Vec<(usize, T)>>,
}

impl<T: Real> SparseMatrix<T> {
    pub fn to_dense(&self) -> Array2<T> {
        let mut m = Array2::zeros((self.n_rows, self.n_cols));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[[i, j]] = v;
            }
        }
        m
    }

    /// `self * x`
    pub fn mul_dense(&self, x: &Array2<T>) -> Array2<T> {
        let k = x.ncols();
        let mut out = Array2::zeros((self.n_rows, k));
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .zip(self.rows.par_iter())
            .for_each(|(mut o, row)| {
                for &(j, v) in row {
                    o.scaled_add(v, &x.row(j));
                }
            });
        out
    }

    /// `self^T * x`
    pub fn t_mul_dense(&self, x: &Array2<T>) -> Array2<T> {
        let k = x.ncols();
        let mut out = Array2::zeros((self.n_cols, k));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                let mut o = out.row_mut(j);
                o.scaled_add(v, &x.row(i));
            }
        }
        out
    }
}

/// Positive PMI with shift: `max(ln(w_ij * total / (r_i * r_j)) - shift, 0)`.
pub fn ppmi<T: Real>(tcm: &TermContextMatrix<T>, shift: T) -> Result<SparseMatrix<T>> {
    if shift < T::zero() || !shift.is_finite() {
        return Err(Error::InvalidArgument(format!("ppmi shift {shift} must be a nonnegative real")));
    }
    let row_sums: Vec<T> = tcm
        .rows()
        .iter()
        .map(|r| r.iter().map(|&(_, w)| w).sum())
        .collect();
    if let Some(i) = row_sums.iter().position(|s| s.is_zero()) {
        return Err(Error::IsolatedTerm(tcm.vocab().terms()[i].clone()));
    }
    let total: T = row_sums.iter().copied().sum();
    let rows = tcm
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .filter_map(|&(j, w)| {
                    let pmi = (w * total / (row_sums[i] * row_sums[j])).ln() - shift;
                    (pmi > T::zero()).then_some((j, pmi))
                })
                .collect()
        })
        .collect();
    Ok(SparseMatrix {
        n_rows: tcm.len(),
        n_cols: tcm.len(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SvdSolver {
    /// Dense decomposition up to `dense_limit` rows, randomized beyond.
    Auto { dense_limit: usize },
    Dense,
    /// Randomized range finder with a fixed seed.
    Randomized { oversample: usize, power_iterations: usize, seed: u64 },
}

impl Default for SvdSolver {
    fn default() -> Self {
        SvdSolver::Auto { dense_limit: 3000 }
    }
}

const RANDOMIZED_DEFAULT: SvdSolver = SvdSolver::Randomized {
    oversample: 20,
    power_iterations: 6,
    seed: 0x5eed_cafe,
};

/// Rank-`rank` SVD of `m`, sign-canonicalized.
pub fn truncated_svd<T: Real>(m: &SparseMatrix<T>, rank: usize, solver: SvdSolver) -> Svd<T> {
    let solver = match solver {
        SvdSolver::Auto { dense_limit } if m.n_rows.max(m.n_cols) <= dense_limit => SvdSolver::Dense,
        SvdSolver::Auto { .. } => RANDOMIZED_DEFAULT,
        s => s,
    };
    let full = match solver {
        SvdSolver::Dense => T::thin_svd(m.to_dense().view()),
        SvdSolver::Randomized { oversample, power_iterations, seed } => {
            randomized_svd(m, rank, oversample, power_iterations, seed)
        }
        SvdSolver::Auto { .. } => unreachable!(),
    };
    let k = rank.min(full.singular_values.len());
    let mut svd = Svd {
        u: full.u.slice(ndarray::s![.., ..k]).to_owned(),
        singular_values: full.singular_values.slice(ndarray::s![..k]).to_owned(),
        vt: full.vt.slice(ndarray::s![..k, ..]).to_owned(),
    };
    canonicalize_signs(&mut svd);
    svd
}

fn randomized_svd<T: Real>(m: &SparseMatrix<T>, rank: usize, oversample: usize, iters: usize, seed: u64) -> Svd<T> {
    let l = (rank + oversample).min(m.n_rows.min(m.n_cols));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = Array2::from_shape_fn((m.n_cols, l), |_| {
        let x: f64 = StandardNormal.sample(&mut rng);
        T::of(x)
    });
    let mut q = T::thin_q(m.mul_dense(&omega).view());
    for _ in 0..iters {
        let z = T::thin_q(m.t_mul_dense(&q).view());
        q = T::thin_q(m.mul_dense(&z).view());
    }
    // B = Q^T M, computed as (M^T Q)^T.
    let b = m.t_mul_dense(&q).reversed_axes();
    let small = T::thin_svd(b.view());
    Svd {
        u: q.dot(&small.u),
        singular_values: small.singular_values,
        vt: small.vt,
    }
}

/// Flips each singular pair so the largest-magnitude entry of `u`'s column is positive.
pub fn canonicalize_signs<T: Real>(svd: &mut Svd<T>) {
    for c in 0..svd.u.ncols() {
        let col = svd.u.column(c);
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < T::zero() {
            svd.u.column_mut(c).mapv_inplace(|x| -x);
            svd.vt.row_mut(c).mapv_inplace(|x| -x);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdTrainingConfig<T> {
    pub dim: usize,
    pub ppmi_shift: T,
    /// Exponent applied to singular values when forming term vectors.
    pub alpha: T,
    pub solver: SvdSolver,
}

impl<T: Real> SvdTrainingConfig<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ppmi_shift: T::zero(),
            alpha: T::of(0.5),
            solver: SvdSolver::default(),
        }
    }
}

pub fn train_svd_embeddings<T: Real>(tcm: &TermContextMatrix<T>, d: usize, ppmi_shift: T) -> Result<EmbeddingMatrix<T>> {
    train_with_config(
        tcm,
        &SvdTrainingConfig {
            ppmi_shift,
            ..SvdTrainingConfig::new(d)
        },
    )
}

pub fn train_with_config<T: Real>(tcm: &TermContextMatrix<T>, cfg: &SvdTrainingConfig<T>) -> Result<EmbeddingMatrix<T>> {
    let v = tcm.len();
    if cfg.dim < 2 || cfg.dim + 1 > v {
        return Err(Error::InvalidArgument(format!(
            "dimension {} outside [2, {}] for a vocabulary of {v} terms",
            cfg.dim,
            v.saturating_sub(1)
        )));
    }
    let m = ppmi(tcm, cfg.ppmi_shift)?;
    let svd = truncated_svd(&m, cfg.dim, cfg.solver);
    let weights: Array1<T> = svd.singular_values.mapv(|s| s.max(T::zero()).powf(cfg.alpha));
    let vectors = &svd.u * &weights;
    let label = format!("ppmi-svd d={} window={}", cfg.dim, tcm.window());
    EmbeddingMatrix::new(tcm.vocab().clone(), vectors, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::term_cosine;
    use crate::tcm::{build_tcm, Weighting};

    fn tokens(docs: &[&str]) -> Vec<Vec<String>> {
        docs.iter().map(|d| d.split_whitespace().map(str::to_string).collect()).collect()
    }

    #[test]
    fn ppmi_hand_computed() {
        // a-b weight 1, b-c weight 1: rows a=1, b=2, c=1, total 4.
        let tcm: TermContextMatrix<f64> = build_tcm(&tokens(&["a b c"]), 1, Weighting::Uniform).unwrap();
        let p = ppmi(&tcm, 0.0).unwrap().to_dense();
        let ab = (1.0_f64 * 4.0 / (1.0 * 2.0)).ln();
        assert!((p[[0, 1]] - ab).abs() < 1e-15);
        assert_eq!(p[[0, 2]], 0.0);
        let shifted = ppmi(&tcm, 1.0).unwrap().to_dense();
        assert_eq!(shifted[[0, 1]], 0.0, "ln 2 - 1 < 0 is clipped");
    }

    #[test]
    fn isolated_term_rejected() {
        let tcm: TermContextMatrix<f64> = build_tcm(&tokens(&["a b", "c"]), 1, Weighting::Uniform).unwrap();
        assert!(matches!(ppmi(&tcm, 0.0), Err(Error::IsolatedTerm(t)) if t == "c"));
    }

    #[test]
    fn dimension_range() {
        let tcm: TermContextMatrix<f64> = build_tcm(&tokens(&["a b c d"]), 2, Weighting::Uniform).unwrap();
        assert!(train_svd_embeddings(&tcm, 1, 0.0).is_err());
        assert!(train_svd_embeddings(&tcm, 4, 0.0).is_err());
    }

    fn cluster_corpus() -> Vec<Vec<String>> {
        let a = ["apple", "pear", "plum", "fig", "grape"];
        let b = ["iron", "steel", "zinc", "tin"];
        let mut docs = Vec::new();
        for shift in 0..5 {
            for cluster in [&a[..], &b[..]] {
                let n = cluster.len();
                let doc: Vec<String> = (0..15).map(|i| cluster[(i * (shift + 1) + shift) % n].to_string()).collect();
                docs.push(doc);
            }
        }
        docs
    }

    #[test]
    fn disjoint_clusters_separate() {
        let tcm: TermContextMatrix<f64> = build_tcm(&cluster_corpus(), 2, Weighting::Uniform).unwrap();
        let a = ["apple", "pear", "plum", "fig", "grape"];
        let b = ["iron", "steel", "zinc", "tin"];
        let emb = train_svd_embeddings(&tcm, 2, 0.0).unwrap();
        let mut min_within = f64::INFINITY;
        let mut max_cross = f64::NEG_INFINITY;
        for cluster in [&a[..], &b[..]] {
            for x in cluster.iter() {
                for y in cluster.iter().filter(|y| *y != x) {
                    min_within = min_within.min(term_cosine(&emb, x, y).unwrap());
                }
            }
        }
        for x in &a {
            for y in &b {
                max_cross = max_cross.max(term_cosine(&emb, x, y).unwrap());
            }
        }
        assert!(min_within > max_cross, "within {min_within} vs cross {max_cross}");
    }

    #[test]
    fn full_rank_reconstruction_error_is_dropped_singular_value() {
        let tcm: TermContextMatrix<f64> =
            build_tcm(&tokens(&["a b c d e", "b d a e", "c a e b"]), 2, Weighting::InverseDistance).unwrap();
        let m = ppmi(&tcm, 0.0).unwrap();
        let dense = m.to_dense();
        let v = tcm.len();
        let full = f64::thin_svd(dense.view());
        let svd = truncated_svd(&m, v - 1, SvdSolver::Dense);
        let rec = (&svd.u * &svd.singular_values).dot(&svd.vt);
        let err = (&dense - &rec).mapv(|x| x * x).sum().sqrt();
        assert!((err - full.singular_values[v - 1]).abs() < 1e-9);
    }

    #[test]
    fn retraining_is_bit_identical() {
        let tcm: TermContextMatrix<f64> = build_tcm(&cluster_corpus(), 3, Weighting::InverseDistance).unwrap();
        let a = train_svd_embeddings(&tcm, 3, 0.0).unwrap();
        let b = train_svd_embeddings(&tcm, 3, 0.0).unwrap();
        assert_eq!(a.vectors(), b.vectors());
    }

    #[test]
    fn randomized_matches_dense_geometry() {
        let tcm: TermContextMatrix<f64> = build_tcm(&cluster_corpus(), 3, Weighting::Uniform).unwrap();
        let m = ppmi(&tcm, 0.0).unwrap();
        let dense = truncated_svd(&m, 3, SvdSolver::Dense);
        let rand = truncated_svd(&m, 3, RANDOMIZED_DEFAULT);
        for (a, b) in dense.singular_values.iter().zip(rand.singular_values.iter()) {
            assert!((a - b).abs() < 1e-8 * a.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn sign_canonicalization() {
        let tcm: TermContextMatrix<f64> = build_tcm(&cluster_corpus(), 2, Weighting::Uniform).unwrap();
        let svd = truncated_svd(&ppmi(&tcm, 0.0).unwrap(), 4, SvdSolver::Dense);
        for c in 0..svd.u.ncols() {
            let col = svd.u.column(c);
            let max = col.iter().fold(0.0f64, |m, x| if x.abs() > m.abs() { *x } else { m });
            assert!(max > 0.0);
        }
    }
}
