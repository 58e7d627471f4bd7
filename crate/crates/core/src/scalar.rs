//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All geometry is written against [`Real`], which is implemented for `f32`
//! and `f64`. Dense factorizations are delegated to `nalgebra` through the
//! trait so that generic code never has to name a concrete float type.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2, LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Thin singular value decomposition `A = U diag(S) Vt`, singular values
/// sorted in descending order.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: Array2<T>,
    pub singular_values: Array1<T>,
    pub vt: Array2<T>,
}

/// Floating point scalar usable throughout the crate.
pub trait Real:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + Sum
    + Debug
    + Display
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; used for constants and tolerances.
    fn of(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    /// Dense thin SVD of an arbitrary `m x n` matrix.
    fn thin_svd(m: ArrayView2<'_, Self>) -> Svd<Self>;

    /// Orthonormal basis `Q` (`m x min(m, n)`) of the column space of `m`.
    fn thin_q(m: ArrayView2<'_, Self>) -> Array2<Self>;
}

fn to_nalgebra<T: nalgebra::Scalar + Copy>(m: ArrayView2<'_, T>) -> DMatrix<T> {
    let (rows, cols) = m.dim();
    DMatrix::from_fn(rows, cols, |i, j| m[[i, j]])
}

fn from_nalgebra<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>) -> Array2<T> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn of(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }

            fn thin_svd(m: ArrayView2<'_, Self>) -> Svd<Self> {
                let (rows, cols) = m.dim();
                let k = rows.min(cols);
                if k == 0 {
                    return Svd {
                        u: Array2::zeros((rows, 0)),
                        singular_values: Array1::zeros(0),
                        vt: Array2::zeros((0, cols)),
                    };
                }
                let svd = to_nalgebra(m).svd(true, true);
                let u = svd.u.expect("left singular vectors requested");
                let vt = svd.v_t.expect("right singular vectors requested");
                let s = svd.singular_values;

                let mut order: Vec<usize> = (0..k).collect();
                order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));

                let u_nd = from_nalgebra(&u);
                let vt_nd = from_nalgebra(&vt);
                let u_sorted = Array2::from_shape_fn((rows, k), |(i, j)| u_nd[[i, order[j]]]);
                let vt_sorted = Array2::from_shape_fn((k, cols), |(i, j)| vt_nd[[order[i], j]]);
                let s_sorted = Array1::from_iter(order.iter().map(|&i| s[i]));
                Svd {
                    u: u_sorted,
                    singular_values: s_sorted,
                    vt: vt_sorted,
                }
            }

            fn thin_q(m: ArrayView2<'_, Self>) -> Array2<Self> {
                let q = to_nalgebra(m).qr().q();
                from_nalgebra(&q)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn svd_reconstructs_and_sorts() {
        let a = array![[3.0_f64, 1.0, 0.5], [1.0, 2.0, -1.0], [0.0, 4.0, 1.0], [2.0, 0.0, 0.0]];
        let svd = f64::thin_svd(a.view());
        assert_eq!(svd.u.dim(), (4, 3));
        assert_eq!(svd.vt.dim(), (3, 3));
        for w in svd.singular_values.windows(2) {
            assert!(w[0] >= w[1]);
        }
        let us = &svd.u * &svd.singular_values;
        let rec = us.dot(&svd.vt);
        for (x, y) in rec.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn q_is_orthonormal() {
        let a = array![[1.0_f32, 2.0], [3.0, 4.0], [5.0, 7.0]];
        let q = f32::thin_q(a.view());
        assert_eq!(q.dim(), (3, 2));
        let qtq = q.t().dot(&q);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[[i, j]] - expect).abs() < 1e-5);
            }
        }
    }
}
