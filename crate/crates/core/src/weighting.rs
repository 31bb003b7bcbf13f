//! Sparse term-by-document matrices and the log-entropy / TFIDF weighting schemes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Tokenizer, Vocabulary};
use crate::error::{LsaError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    RawCounts,
    Weighted,
}

/// Term-by-document matrix in compressed sparse column form.
///
/// Rows are vocabulary terms, columns are documents in input order. Zero entries are
/// never stored and row indices within a column are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDocMatrix<T> {
    n_terms: usize,
    n_docs: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<T>,
    semantics: Semantics,
}

impl<T: Scalar> TermDocMatrix<T> {
    /// Assembles a matrix from `(term, doc, value)` triplets. Duplicates are summed and
    /// zeros dropped.
    pub fn from_triplets(
        n_terms: usize,
        n_docs: usize,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
        semantics: Semantics,
    ) -> Result<Self> {
        let mut cols: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); n_docs];
        for (i, j, v) in triplets {
            if i >= n_terms || j >= n_docs {
                return Err(LsaError::Dimension(format!(
                    "entry ({i}, {j}) outside {n_terms}x{n_docs}"
                )));
            }
            if !v.is_finite() {
                return Err(LsaError::InvalidArgument(format!("non-finite entry at ({i}, {j})")));
            }
            *cols[j].entry(i).or_insert_with(T::zero) += v;
        }
        let mut m = TermDocMatrix {
            n_terms,
            n_docs,
            col_ptr: Vec::with_capacity(n_docs + 1),
            row_idx: Vec::new(),
            values: Vec::new(),
            semantics,
        };
        m.col_ptr.push(0);
        for col in cols {
            for (i, v) in col {
                if v != T::zero() {
                    m.row_idx.push(i);
                    m.values.push(v);
                }
            }
            m.col_ptr.push(m.row_idx.len());
        }
        Ok(m)
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    /// Stored entries of column `doc` as `(term, value)`, ascending by term.
    pub fn column(&self, doc: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.col_ptr[doc]..self.col_ptr[doc + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All stored entries as `(term, doc, value)` in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n_docs).flat_map(move |j| self.column(j).map(move |(i, v)| (i, j, v)))
    }

    pub fn get(&self, term: usize, doc: usize) -> T {
        self.column(doc).find(|&(i, _)| i == term).map_or(T::zero(), |(_, v)| v)
    }

    /// Row-major dense copy, mostly for tests and small problems.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.n_docs]; self.n_terms];
        for (i, j, v) in self.entries() {
            out[i][j] = v;
        }
        out
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[T], y: &mut [T]) {
        y.iter_mut().for_each(|v| *v = T::zero());
        for (j, &xj) in x.iter().enumerate() {
            if xj == T::zero() {
                continue;
            }
            for (i, v) in self.column(j) {
                y[i] += v * xj;
            }
        }
    }

    /// x = Aᵀ y
    pub fn mul_vec_transpose(&self, y: &[T], x: &mut [T]) {
        for (j, out) in x.iter_mut().enumerate() {
            *out = self.column(j).fold(T::zero(), |acc, (i, v)| acc + v * y[i]);
        }
    }
}

/// Raw count matrix plus the number of tokens that fell outside the vocabulary.
#[derive(Debug, Clone)]
pub struct RawMatrix<T> {
    pub matrix: TermDocMatrix<T>,
    pub oov_tokens: usize,
}

/// Counts every vocabulary term in every document; column order follows `docs`.
pub fn build_raw_matrix<T: Scalar>(
    docs: &[Document],
    vocab: &Vocabulary,
    tokenizer: &Tokenizer,
) -> Result<RawMatrix<T>> {
    if vocab.is_empty() {
        return Err(LsaError::Dimension("vocabulary is empty".into()));
    }
    let mut oov_tokens = 0;
    let mut triplets = Vec::new();
    for (j, doc) in docs.iter().enumerate() {
        let counts = vocab.count(&tokenizer.tokenize(&doc.text));
        oov_tokens += counts.oov;
        triplets.extend(counts.counts.into_iter().map(|(i, c)| (i, j, T::of(c as f64))));
    }
    let matrix = TermDocMatrix::from_triplets(vocab.len(), docs.len(), triplets, Semantics::RawCounts)?;
    Ok(RawMatrix { matrix, oov_tokens })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    #[default]
    LogEntropy,
    Tfidf,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::LogEntropy => "log-entropy",
            SchemeKind::Tfidf => "tfidf",
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "log-entropy" => Ok(SchemeKind::LogEntropy),
            "tfidf" => Ok(SchemeKind::Tfidf),
            other => Err(format!("unknown weighting {other:?}")),
        }
    }
}

/// Global term weights frozen at space-build time.
///
/// `LogEntropy` stores the entropy factor `g_i ∈ [0, 1]`, `Tfidf` stores `ln(n / df_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightingScheme<T> {
    pub kind: SchemeKind,
    pub global_weights: Vec<T>,
}

impl<T: Scalar> WeightingScheme<T> {
    /// Weighted value of `tf` occurrences of `term`.
    #[inline]
    pub fn weight(&self, term: usize, tf: T) -> T {
        let g = self.global_weights[term];
        match self.kind {
            SchemeKind::LogEntropy => g * tf.ln_1p(),
            SchemeKind::Tfidf => tf * g,
        }
    }
}

fn require_raw<T>(raw: &TermDocMatrix<T>) -> Result<()> {
    match raw.semantics {
        Semantics::RawCounts => Ok(()),
        Semantics::Weighted => Err(LsaError::Semantics("expected raw counts, got a weighted matrix".into())),
    }
}

pub fn fit<T: Scalar>(raw: &TermDocMatrix<T>, kind: SchemeKind) -> Result<WeightingScheme<T>> {
    match kind {
        SchemeKind::LogEntropy => fit_log_entropy(raw),
        SchemeKind::Tfidf => fit_tfidf(raw),
    }
}

/// Fits `g_i = 1 + Σ_j p_ij ln p_ij / ln n` with `p_ij = tf_ij / gf_i`.
///
/// A single-document corpus gets `g_i = 1`; terms that never occur get 0.
pub fn fit_log_entropy<T: Scalar>(raw: &TermDocMatrix<T>) -> Result<WeightingScheme<T>> {
    require_raw(raw)?;
    let n = raw.n_terms;
    let mut gf = vec![T::zero(); n];
    for (i, _, v) in raw.entries() {
        gf[i] += v;
    }
    let mut plogp = vec![T::zero(); n];
    for (i, _, v) in raw.entries() {
        let p = v / gf[i];
        plogp[i] += p * p.ln();
    }
    let log_n = T::of_usize(raw.n_docs).ln();
    // absorbs the rounding of an exactly uniform distribution
    let snap = T::epsilon() * T::of(64.0);
    let global_weights = (0..n)
        .map(|i| {
            if gf[i] == T::zero() {
                T::zero()
            } else if raw.n_docs < 2 {
                T::one()
            } else {
                let g = T::one() + plogp[i] / log_n;
                if g.abs() <= snap {
                    T::zero()
                } else {
                    g.max(T::zero()).min(T::one())
                }
            }
        })
        .collect();
    Ok(WeightingScheme {
        kind: SchemeKind::LogEntropy,
        global_weights,
    })
}

/// Fits `idf_i = ln(n / df_i)`; terms that never occur get 0.
pub fn fit_tfidf<T: Scalar>(raw: &TermDocMatrix<T>) -> Result<WeightingScheme<T>> {
    require_raw(raw)?;
    let mut df = vec![0usize; raw.n_terms];
    for (i, _, _) in raw.entries() {
        df[i] += 1;
    }
    let n = T::of_usize(raw.n_docs);
    let global_weights = df
        .into_iter()
        .map(|d| if d == 0 { T::zero() } else { (n / T::of_usize(d)).ln() })
        .collect();
    Ok(WeightingScheme {
        kind: SchemeKind::Tfidf,
        global_weights,
    })
}

/// Applies local × global weighting entrywise. Entries whose global weight is zero
/// are dropped.
pub fn apply_weights<T: Scalar>(raw: &TermDocMatrix<T>, scheme: &WeightingScheme<T>) -> Result<TermDocMatrix<T>> {
    require_raw(raw)?;
    if scheme.global_weights.len() != raw.n_terms {
        return Err(LsaError::Dimension(format!(
            "scheme has {} terms, matrix has {}",
            scheme.global_weights.len(),
            raw.n_terms
        )));
    }
    let weighted = raw.entries().map(|(i, j, tf)| (i, j, scheme.weight(i, tf)));
    TermDocMatrix::from_triplets(raw.n_terms, raw.n_docs, weighted, Semantics::Weighted)
}

/// Weights a query's term counts with the frozen global weights. Indices outside the
/// scheme are ignored; the result is sparse `(term, weight)` ascending by term.
pub fn weight_query_vector<T: Scalar>(counts: &BTreeMap<usize, u32>, scheme: &WeightingScheme<T>) -> Vec<(usize, T)> {
    counts
        .iter()
        .filter(|(&i, _)| i < scheme.global_weights.len())
        .map(|(&i, &c)| (i, scheme.weight(i, T::of(c as f64))))
        .filter(|&(_, w)| w != T::zero())
        .collect()
}
