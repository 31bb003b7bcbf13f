use crate::error::{LsaError, Result};
use crate::scalar::{dot, norm, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LsaError::Dimension(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LsaError::Dimension("ragged rows".into()));
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    /// Builds a matrix whose columns are `cols`.
    pub fn from_columns(n_rows: usize, cols: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(n_rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `AᵀA − I` in max-norm; zero for a matrix with orthonormal columns.
    pub fn orthonormality_error(&self) -> T {
        let cols: Vec<Vec<T>> = (0..self.cols).map(|j| self.column(j)).collect();
        let mut worst = T::zero();
        for a in 0..self.cols {
            for b in a..self.cols {
                let target = if a == b { T::one() } else { T::zero() };
                worst = worst.max((dot(&cols[a], &cols[b]) - target).abs());
            }
        }
        worst
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Thin SVD `A = U diag(sigma) Vᵀ` with `min(m, n)` triplets, sigma descending.
#[derive(Debug, Clone)]
pub struct DenseSvd<T> {
    pub u: DenseMatrix<T>,
    pub sigma: Vec<T>,
    pub v: DenseMatrix<T>,
}

const MAX_SWEEPS: usize = 80;

type Columns<T> = Vec<Vec<T>>;

/// One-sided (Hestenes) Jacobi: rotates the columns of `w` until they are mutually
/// orthogonal. Returns the rotated columns and the accumulated rotation.
pub(crate) fn one_sided_jacobi<T: Scalar>(mut w: Columns<T>) -> Result<(Columns<T>, Columns<T>)> {
    let n = w.len();
    let m = w.first().map_or(0, Vec::len);
    let mut y: Vec<Vec<T>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let tol = T::epsilon() * T::of_usize(m.max(1));
    let negligible = w.iter().map(|col| dot(col, col)).sum::<T>() * T::epsilon() * T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let a = dot(&w[i], &w[i]);
                let b = dot(&w[j], &w[j]);
                let c = dot(&w[i], &w[j]);
                if a <= negligible || b <= negligible || c.abs() <= tol * (a * b).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (c + c);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut w, i, j, cs, sn);
                rotate(&mut y, i, j, cs, sn);
            }
        }
        if !rotated {
            return Ok((w, y));
        }
    }
    Err(LsaError::Convergence {
        steps: MAX_SWEEPS,
        residual: f64::NAN,
    })
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], i: usize, j: usize, cs: T, sn: T) {
    let (left, right) = cols.split_at_mut(j);
    for (p, q) in left[i].iter_mut().zip(right[0].iter_mut()) {
        let (a, b) = (*p, *q);
        *p = cs * a - sn * b;
        *q = sn * a + cs * b;
    }
}

/// Triplets `(sigma, left, right)` from rotated columns, sorted by descending sigma.
pub(crate) fn sorted_triplets<T: Scalar>(w: Vec<Vec<T>>, y: Vec<Vec<T>>) -> Vec<(T, Vec<T>, Vec<T>)> {
    let mut out: Vec<(T, Vec<T>, Vec<T>)> = w
        .into_iter()
        .zip(y)
        .map(|(col, right)| {
            let s = norm(&col);
            let left = if s > T::zero() {
                col.iter().map(|&v| v / s).collect()
            } else {
                vec![T::zero(); col.len()]
            };
            (s, left, right)
        })
        .collect();
    out.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Dense SVD by one-sided Jacobi rotations. Accurate but `O(min(m,n)² · max(m,n))`
/// per sweep, so reserved for small matrices.
pub fn jacobi_svd<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseSvd<T>> {
    if a.rows < a.cols {
        let t = jacobi_svd(&a.transpose())?;
        return Ok(DenseSvd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let cols: Vec<Vec<T>> = (0..a.cols).map(|j| a.column(j)).collect();
    let (w, y) = one_sided_jacobi(cols)?;
    let triplets = sorted_triplets(w, y);
    let sigma = triplets.iter().map(|t| t.0).collect();
    let lefts: Vec<Vec<T>> = triplets.iter().map(|t| t.1.clone()).collect();
    let rights: Vec<Vec<T>> = triplets.into_iter().map(|t| t.2).collect();
    Ok(DenseSvd {
        u: DenseMatrix::from_columns(a.rows, &lefts),
        sigma,
        v: DenseMatrix::from_columns(a.cols, &rights),
    })
}
