//! Truncated SVD by Golub–Kahan–Lanczos bidiagonalization.
//!
//! The process keeps every Lanczos vector and reorthogonalizes fully (classical
//! Gram–Schmidt, two passes), so the Krylov bases stay orthonormal to working
//! precision. A breakdown (`α_j` or `β_j` at rounding level) is handled by
//! continuing from a fresh random vector orthogonal to the current basis, which keeps
//! `A V_j = U_j B_j` exact and lets the process reach repeated singular values.
//!
//! When the top-k Ritz triplets converge before the basis is exhausted, one or more
//! verification rounds rerun the process on `A (I − V_k V_kᵀ)`; any singular value
//! the first run missed (a start vector nearly orthogonal to it, or a multiplicity
//! the Krylov space cannot see) surfaces there and is merged in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dense::{jacobi_svd, one_sided_jacobi, sorted_triplets, DenseMatrix};
use super::{Deflated, LinearOperator, Transposed};
use crate::error::{LsaError, Result};
use crate::scalar::{dot, norm, Scalar};
use crate::weighting::{Semantics, TermDocMatrix};

/// Largest dimension accepted by [`SvdMethod::Dense`].
pub const DENSE_SVD_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvdMethod {
    #[default]
    Lanczos,
    /// Densify and run one-sided Jacobi. Limited to matrices smaller than
    /// [`DENSE_SVD_LIMIT`] in both dimensions.
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdOptions {
    pub method: SvdMethod,
    /// Ritz residual bound relative to the largest singular value.
    pub tol: f64,
    /// Singular values at or below `rank_rtol · σ₁` count as zero and are dropped.
    pub rank_rtol: f64,
    /// Cap on Lanczos steps; `None` allows up to `min(m, n)`.
    pub max_steps: Option<usize>,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            method: SvdMethod::Lanczos,
            tol: 1e-10,
            rank_rtol: 1e-12,
            max_steps: None,
            seed: 42,
        }
    }
}

/// Rank-k factors `U_k` (m × k), `σ_k`, `V_k` (n × k).
///
/// `sigma` is strictly positive and non-increasing; each column of `u` has its
/// largest-magnitude entry positive.
#[derive(Debug, Clone)]
pub struct TruncatedSvd<T> {
    pub u: DenseMatrix<T>,
    pub sigma: Vec<T>,
    pub v: DenseMatrix<T>,
    pub requested_k: usize,
    pub lanczos_steps: usize,
    pub verification_rounds: usize,
}

impl<T> TruncatedSvd<T> {
    pub fn effective_k(&self) -> usize {
        self.sigma.len()
    }
}

/// Truncated SVD of a weighted term-document matrix.
pub fn truncated_svd<T: Scalar>(weighted: &TermDocMatrix<T>, k: usize, opts: &SvdOptions) -> Result<TruncatedSvd<T>> {
    if weighted.semantics() != Semantics::Weighted {
        return Err(LsaError::Semantics("SVD expects a weighted matrix".into()));
    }
    if weighted.nnz() == 0 {
        return Err(LsaError::EmptyMatrix);
    }
    match opts.method {
        SvdMethod::Lanczos => truncated_svd_op(weighted, k, opts),
        SvdMethod::Dense => {
            if weighted.n_terms() >= DENSE_SVD_LIMIT || weighted.n_docs() >= DENSE_SVD_LIMIT {
                return Err(LsaError::InvalidArgument(format!(
                    "dense SVD is limited to matrices under {DENSE_SVD_LIMIT}x{DENSE_SVD_LIMIT}; got {}x{}",
                    weighted.n_terms(),
                    weighted.n_docs()
                )));
            }
            let dense = DenseMatrix::from_rows(&weighted.to_dense())?;
            truncated_svd_op(&dense, k, opts)
        }
    }
}

/// Truncated SVD of any linear operator. `k` is clamped to `min(m, n)` and then to the
/// numerical rank.
pub fn truncated_svd_op<T: Scalar, Op: LinearOperator<T>>(
    op: &Op,
    k: usize,
    opts: &SvdOptions,
) -> Result<TruncatedSvd<T>> {
    if k == 0 {
        return Err(LsaError::InvalidArgument("k must be at least 1".into()));
    }
    let (m, n) = (op.nrows(), op.ncols());
    if m == 0 || n == 0 {
        return Err(LsaError::EmptyMatrix);
    }
    let kk = k.min(m).min(n);
    let mut out = if opts.method == SvdMethod::Dense {
        dense_top_k(op, kk)?
    } else if n > m {
        let t = lanczos_top_k(&Transposed(op), kk, opts)?;
        Factors {
            triplets: t.triplets.into_iter().map(|(s, u, v)| (s, v, u)).collect(),
            ..t
        }
    } else {
        lanczos_top_k(op, kk, opts)?
    };

    let sigma_max = out.triplets.first().map_or(T::zero(), |t| t.0);
    if sigma_max <= T::zero() {
        return Err(LsaError::EmptyMatrix);
    }
    let floor = sigma_max * T::of(opts.rank_rtol);
    out.triplets.retain(|t| t.0 > floor);
    for (_, u, v) in &mut out.triplets {
        fix_sign(u, v);
    }
    let us: Vec<Vec<T>> = out.triplets.iter().map(|t| t.1.clone()).collect();
    let vs: Vec<Vec<T>> = out.triplets.iter().map(|t| t.2.clone()).collect();
    Ok(TruncatedSvd {
        u: DenseMatrix::from_columns(m, &us),
        sigma: out.triplets.iter().map(|t| t.0).collect(),
        v: DenseMatrix::from_columns(n, &vs),
        requested_k: k,
        lanczos_steps: out.steps,
        verification_rounds: out.rounds,
    })
}

/// Flips a singular pair so the largest-magnitude entry of `u` is positive.
fn fix_sign<T: Scalar>(u: &mut [T], v: &mut [T]) {
    let mut pivot = T::zero();
    for &x in u.iter() {
        if x.abs() > pivot.abs() {
            pivot = x;
        }
    }
    if pivot < T::zero() {
        u.iter_mut().for_each(|x| *x = -*x);
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

struct Factors<T> {
    triplets: Vec<(T, Vec<T>, Vec<T>)>,
    steps: usize,
    rounds: usize,
}

fn dense_top_k<T: Scalar, Op: LinearOperator<T>>(op: &Op, k: usize) -> Result<Factors<T>> {
    let n = op.ncols();
    let mut dense = DenseMatrix::zeros(op.nrows(), n);
    let mut e = vec![T::zero(); n];
    let mut col = vec![T::zero(); op.nrows()];
    for j in 0..n {
        e[j] = T::one();
        op.apply(&e, &mut col);
        e[j] = T::zero();
        for (i, &v) in col.iter().enumerate() {
            dense[(i, j)] = v;
        }
    }
    let svd = jacobi_svd(&dense)?;
    let triplets = (0..k.min(svd.sigma.len()))
        .map(|i| (svd.sigma[i], svd.u.column(i), svd.v.column(i)))
        .collect();
    Ok(Factors {
        triplets,
        steps: 0,
        rounds: 0,
    })
}

/// Top-k triplets for an operator with `ncols ≤ nrows`.
fn lanczos_top_k<T: Scalar, Op: LinearOperator<T>>(op: &Op, k: usize, opts: &SvdOptions) -> Result<Factors<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let first = bidiagonalize(op, k, opts, &mut rng, &[])?;
    let mut steps = first.steps;
    let mut rounds = 0;
    let floor = first.sigma_max * T::of(opts.rank_rtol);
    let mut found: Vec<_> = first.triplets.into_iter().filter(|t| t.0 > floor).collect();
    let mut exhausted = first.exhausted;

    while !exhausted && found.len() < op.ncols() && rounds <= k {
        rounds += 1;
        let basis: Vec<Vec<T>> = found.iter().map(|t| t.2.clone()).collect();
        let deflated = Deflated {
            inner: op,
            basis: &basis,
        };
        let extra = bidiagonalize(&deflated, k, opts, &mut rng, &basis)?;
        steps += extra.steps;
        exhausted = extra.exhausted;

        let kth = if found.len() >= k { found[k - 1].0 } else { floor };
        let mut added = 0;
        for t in extra.triplets {
            if t.0 > kth && t.0 > floor {
                found.push(t);
                added += 1;
            }
        }
        if added == 0 {
            break;
        }
        found.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        found.truncate(k);
    }
    found.truncate(k);
    Ok(Factors {
        triplets: found,
        steps,
        rounds,
    })
}

struct Bidiagonalization<T> {
    triplets: Vec<(T, Vec<T>, Vec<T>)>,
    sigma_max: T,
    steps: usize,
    exhausted: bool,
}

/// Runs Golub–Kahan–Lanczos until the top-k Ritz triplets meet the residual bound or
/// the right Krylov basis spans the whole column space.
fn bidiagonalize<T: Scalar, Op: LinearOperator<T>>(
    op: &Op,
    k: usize,
    opts: &SvdOptions,
    rng: &mut ChaCha8Rng,
    avoid: &[Vec<T>],
) -> Result<Bidiagonalization<T>> {
    let (m, n) = (op.nrows(), op.ncols());
    debug_assert!(n <= m);
    let max_steps = opts.max_steps.unwrap_or(n).clamp(1, n);
    let grow = k.max(16);
    let mut target = (2 * k).max(k + 16).min(max_steps);

    let mut us: Vec<Vec<T>> = Vec::new();
    let mut vs: Vec<Vec<T>> = vec![random_orthogonal(rng, n, avoid)];
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    let mut norm_est = T::zero();
    let breakdown_scale = T::epsilon() * T::of_usize(m).sqrt() * T::of(8.0);
    let mut scratch_u = vec![T::zero(); m];
    let mut scratch_v = vec![T::zero(); n];

    loop {
        let j = alpha.len();
        op.apply(&vs[j], &mut scratch_u);
        let mut u = scratch_u.clone();
        if j > 0 {
            axpy(-beta[j - 1], &us[j - 1], &mut u);
        }
        reorthogonalize(&mut u, &us);
        let mut a = norm(&u);
        norm_est = norm_est.max(a);
        if a <= norm_est * breakdown_scale {
            a = T::zero();
            u = random_orthogonal(rng, m, &us);
        } else {
            u.iter_mut().for_each(|x| *x /= a);
        }
        alpha.push(a);

        op.apply_transpose(&u, &mut scratch_v);
        us.push(u);
        let mut v = scratch_v.clone();
        axpy(-a, &vs[j], &mut v);
        reorthogonalize(&mut v, &vs);
        let steps = j + 1;
        let exhausted = steps == n;
        let mut b = if exhausted { T::zero() } else { norm(&v) };
        norm_est = norm_est.max(b);

        if exhausted || steps >= target {
            let ritz = ritz_triplets(&alpha, &beta, b, &us, &vs, k)?;
            let sigma_max = ritz.first().map_or(T::zero(), |r| r.sigma);
            let floor = sigma_max * T::of(opts.rank_rtol);
            let bound = sigma_max * T::of(opts.tol);
            let worst = ritz
                .iter()
                .filter(|r| r.sigma > floor)
                .map(|r| r.residual)
                .fold(T::zero(), T::max);
            if exhausted || worst <= bound {
                return Ok(Bidiagonalization {
                    triplets: ritz.into_iter().map(|r| (r.sigma, r.left, r.right)).collect(),
                    sigma_max,
                    steps,
                    exhausted,
                });
            }
            if steps >= max_steps {
                return Err(LsaError::Convergence {
                    steps,
                    residual: worst.as_f64(),
                });
            }
            target = (target + grow).min(max_steps);
        }

        if b <= norm_est * breakdown_scale {
            b = T::zero();
            v = random_orthogonal(rng, n, &vs);
        } else {
            v.iter_mut().for_each(|x| *x /= b);
        }
        beta.push(b);
        vs.push(v);
    }
}

struct Ritz<T> {
    sigma: T,
    residual: T,
    left: Vec<T>,
    right: Vec<T>,
}

/// SVD of the p × p upper bidiagonal `B` (diagonal `alpha`, superdiagonal `beta`),
/// lifted back through the Lanczos bases. The residual of triplet i is
/// `β_p · |x_i[p−1]|`, the norm of `Aᵀu_i − σ_i v_i`.
fn ritz_triplets<T: Scalar>(
    alpha: &[T],
    beta: &[T],
    beta_last: T,
    us: &[Vec<T>],
    vs: &[Vec<T>],
    k: usize,
) -> Result<Vec<Ritz<T>>> {
    let p = alpha.len();
    let cols: Vec<Vec<T>> = (0..p)
        .map(|j| {
            let mut c = vec![T::zero(); p];
            c[j] = alpha[j];
            if j > 0 {
                c[j - 1] = beta[j - 1];
            }
            c
        })
        .collect();
    let (w, y) = one_sided_jacobi(cols)?;
    Ok(sorted_triplets(w, y)
        .into_iter()
        .take(k)
        .map(|(sigma, x, yv)| Ritz {
            sigma,
            residual: beta_last * x[p - 1].abs(),
            left: combine(us, &x),
            right: combine(&vs[..p], &yv),
        })
        .collect())
}

fn combine<T: Scalar>(basis: &[Vec<T>], coeffs: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); basis[0].len()];
    for (b, &c) in basis.iter().zip(coeffs) {
        if c != T::zero() {
            axpy(c, b, &mut out);
        }
    }
    out
}

fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn reorthogonalize<T: Scalar>(x: &mut [T], basis: &[Vec<T>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, x);
            axpy(-c, b, x);
        }
    }
}

/// Unit vector orthogonal to `basis`, drawn from a seeded uniform distribution.
fn random_orthogonal<T: Scalar>(rng: &mut ChaCha8Rng, dim: usize, basis: &[Vec<T>]) -> Vec<T> {
    loop {
        let mut x: Vec<T> = (0..dim).map(|_| T::of(rng.gen_range(-1.0..1.0))).collect();
        reorthogonalize(&mut x, basis);
        let nx = norm(&x);
        if nx > T::of(1e-3) {
            x.iter_mut().for_each(|v| *v /= nx);
            return x;
        }
    }
}
