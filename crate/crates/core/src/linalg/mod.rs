//! Matrix operators and singular value decompositions.

mod dense;
mod lanczos;

pub use dense::{jacobi_svd, DenseMatrix, DenseSvd};
pub use lanczos::{truncated_svd, truncated_svd_op, SvdMethod, SvdOptions, TruncatedSvd, DENSE_SVD_LIMIT};

use crate::scalar::{dot, Scalar};
use crate::weighting::TermDocMatrix;

/// A real matrix known only through products with vectors.
pub trait LinearOperator<T> {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// y = A x, with `x.len() == ncols()` and `y.len() == nrows()`.
    fn apply(&self, x: &[T], y: &mut [T]);
    /// x = Aᵀ y
    fn apply_transpose(&self, y: &[T], x: &mut [T]);
}

impl<T: Scalar> LinearOperator<T> for TermDocMatrix<T> {
    fn nrows(&self) -> usize {
        self.n_terms()
    }

    fn ncols(&self) -> usize {
        self.n_docs()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.mul_vec(x, y)
    }

    fn apply_transpose(&self, y: &[T], x: &mut [T]) {
        self.mul_vec_transpose(y, x)
    }
}

impl<T: Scalar> LinearOperator<T> for DenseMatrix<T> {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        for (i, out) in y.iter_mut().enumerate() {
            *out = dot(self.row(i), x);
        }
    }

    fn apply_transpose(&self, y: &[T], x: &mut [T]) {
        x.iter_mut().for_each(|v| *v = T::zero());
        for (i, &yi) in y.iter().enumerate() {
            for (out, &a) in x.iter_mut().zip(self.row(i)) {
                *out += a * yi;
            }
        }
    }
}

pub(crate) struct Transposed<'a, Op>(pub &'a Op);

impl<T, Op: LinearOperator<T>> LinearOperator<T> for Transposed<'_, Op> {
    fn nrows(&self) -> usize {
        self.0.ncols()
    }

    fn ncols(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.0.apply_transpose(x, y)
    }

    fn apply_transpose(&self, y: &[T], x: &mut [T]) {
        self.0.apply(y, x)
    }
}

/// `A (I − V Vᵀ)` for an orthonormal set of right vectors `V`.
pub(crate) struct Deflated<'a, T, Op> {
    pub inner: &'a Op,
    pub basis: &'a [Vec<T>],
}

impl<T: Scalar, Op: LinearOperator<T>> Deflated<'_, T, Op> {
    fn project_out(&self, x: &mut [T]) {
        for b in self.basis {
            let c = dot(b, x);
            for (xi, &bi) in x.iter_mut().zip(b) {
                *xi -= c * bi;
            }
        }
    }
}

impl<T: Scalar, Op: LinearOperator<T>> LinearOperator<T> for Deflated<'_, T, Op> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let mut xp = x.to_vec();
        self.project_out(&mut xp);
        self.inner.apply(&xp, y)
    }

    fn apply_transpose(&self, y: &[T], x: &mut [T]) {
        self.inner.apply_transpose(y, x);
        self.project_out(x);
    }
}
