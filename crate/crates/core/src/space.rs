//! The universal semantic space: weighted term-document matrix reduced by truncated SVD,
//! and folding-in of unseen text as pseudo-documents.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{build_vocabulary, Document, QuIndicator, Source, Tokenizer, Vocabulary};
use crate::error::{LsaError, Result};
use crate::linalg::{truncated_svd, DenseMatrix, SvdOptions};
use crate::scalar::Scalar;
use crate::weighting::{apply_weights, build_raw_matrix, fit, weight_query_vector, SchemeKind, WeightingScheme};

/// Default number of latent dimensions.
pub const DEFAULT_K: usize = 300;

/// Corpora at or above this size drop `V_k` unless asked to keep it.
pub const KEEP_V_DOC_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub k: usize,
    pub weighting: SchemeKind,
    /// `None` keeps `V_k` for corpora under [`KEEP_V_DOC_LIMIT`] documents.
    pub keep_v: Option<bool>,
    pub tokenizer: Tokenizer,
    pub svd: SvdOptions,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig {
            k: DEFAULT_K,
            weighting: SchemeKind::LogEntropy,
            keep_v: None,
            tokenizer: Tokenizer::default(),
            svd: SvdOptions::default(),
        }
    }
}

/// Provenance stored alongside the factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildMeta {
    /// SHA-256 over the ordered document texts.
    pub corpus_fingerprint: String,
    /// Seconds since the epoch; left unset by the builder so rebuilds are byte-identical.
    pub timestamp: Option<u64>,
    pub config: SpaceConfig,
    pub requested_k: usize,
    pub n_docs: usize,
    pub oov_tokens: usize,
    /// Ids of the corpus documents, in `V_k` row order.
    pub doc_ids: Vec<String>,
}

/// Rank-k latent space: `U_k` (terms × k, row-major), `σ_k`, optional `V_k`
/// (documents × k), plus the vocabulary and frozen weighting that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticSpace<T> {
    pub(crate) u: DenseMatrix<T>,
    pub(crate) sigma: Vec<T>,
    pub(crate) v: Option<DenseMatrix<T>>,
    pub(crate) vocab: Vocabulary,
    pub(crate) scheme: WeightingScheme<T>,
    pub(crate) meta: BuildMeta,
}

/// What happened while building, beyond the space itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildReport {
    pub requested_k: usize,
    pub effective_k: usize,
    pub vocab_size: usize,
    pub lanczos_steps: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginKind {
    Scale,
    Review,
    Query,
}

impl From<Source> for OriginKind {
    fn from(s: Source) -> Self {
        match s {
            Source::Scale => OriginKind::Scale,
            Source::Review => OriginKind::Review,
            Source::Corpus => OriginKind::Query,
        }
    }
}

/// Coordinates of a pseudo-document in a particular space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedVector<T> {
    pub coords: Vec<T>,
    pub origin_id: String,
    pub origin_kind: OriginKind,
    pub label: Option<QuIndicator>,
    /// Fingerprint of the space the vector was folded into.
    pub space: String,
}

pub(crate) fn corpus_fingerprint(docs: &[Document]) -> String {
    let mut h = Sha256::new();
    for d in docs {
        h.update((d.text.len() as u64).to_le_bytes());
        h.update(d.text.as_bytes());
    }
    hex(&h.finalize())
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Builds a space: vocabulary → raw counts → weighting → truncated SVD.
///
/// `k` is clamped to the numerical rank of the weighted matrix; the clamp is logged
/// and listed in the report's warnings.
pub fn build_space<T: Scalar>(docs: &[Document], config: &SpaceConfig) -> Result<(SemanticSpace<T>, BuildReport)> {
    if config.k == 0 {
        return Err(LsaError::InvalidArgument("k must be at least 1".into()));
    }
    let vocab = build_vocabulary(docs, &config.tokenizer)?;
    let raw = build_raw_matrix::<T>(docs, &vocab, &config.tokenizer)?;
    let scheme = fit(&raw.matrix, config.weighting)?;
    let weighted = apply_weights(&raw.matrix, &scheme)?;
    let svd = truncated_svd(&weighted, config.k, &config.svd)?;

    let mut warnings = Vec::new();
    if svd.effective_k() < config.k {
        let msg = format!(
            "requested k={} exceeds the rank of the weighted matrix; using k={}",
            config.k,
            svd.effective_k()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let keep_v = config.keep_v.unwrap_or(docs.len() < KEEP_V_DOC_LIMIT);
    let report = BuildReport {
        requested_k: config.k,
        effective_k: svd.effective_k(),
        vocab_size: vocab.len(),
        lanczos_steps: svd.lanczos_steps,
        warnings,
    };
    let meta = BuildMeta {
        corpus_fingerprint: corpus_fingerprint(docs),
        timestamp: None,
        config: config.clone(),
        requested_k: config.k,
        n_docs: docs.len(),
        oov_tokens: raw.oov_tokens,
        doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
    };
    let space = SemanticSpace {
        u: svd.u,
        sigma: svd.sigma,
        v: keep_v.then_some(svd.v),
        vocab,
        scheme,
        meta,
    };
    Ok((space, report))
}

impl<T: Scalar> SemanticSpace<T> {
    /// Reassembles a space from its parts, checking every structural invariant.
    pub fn from_parts(
        u: DenseMatrix<T>,
        sigma: Vec<T>,
        v: Option<DenseMatrix<T>>,
        vocab: Vocabulary,
        scheme: WeightingScheme<T>,
        meta: BuildMeta,
    ) -> Result<Self> {
        let k = sigma.len();
        if k == 0 || u.cols() != k || u.rows() != vocab.len() {
            return Err(LsaError::Dimension(format!(
                "U is {}x{}, expected {}x{k}",
                u.rows(),
                u.cols(),
                vocab.len()
            )));
        }
        if scheme.global_weights.len() != vocab.len() {
            return Err(LsaError::Dimension("scheme and vocabulary sizes differ".into()));
        }
        if let Some(v) = &v {
            if v.cols() != k || v.rows() != meta.n_docs {
                return Err(LsaError::Dimension(format!("V is {}x{}", v.rows(), v.cols())));
            }
        }
        if sigma.iter().any(|s| !(s.is_finite() && *s > T::zero())) || sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(LsaError::InvalidArgument(
                "singular values must be positive and non-increasing".into(),
            ));
        }
        if k > vocab.len().min(meta.n_docs) {
            return Err(LsaError::Dimension(format!("k={k} exceeds matrix dimensions")));
        }
        Ok(SemanticSpace {
            u,
            sigma,
            v,
            vocab,
            scheme,
            meta,
        })
    }

    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    pub fn u(&self) -> &DenseMatrix<T> {
        &self.u
    }

    pub fn v(&self) -> Option<&DenseMatrix<T>> {
        self.v.as_ref()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn scheme(&self) -> &WeightingScheme<T> {
        &self.scheme
    }

    pub fn meta(&self) -> &BuildMeta {
        &self.meta
    }

    /// Identity of the space: SHA-256 over the corpus fingerprint and build config.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.meta.corpus_fingerprint.as_bytes());
        h.update(serde_json::to_vec(&self.meta.config).expect("config serializes"));
        h.update((self.k() as u64).to_le_bytes());
        hex(&h.finalize())
    }

    /// Weighted query vector of `text` in this space's vocabulary.
    pub fn query_vector(&self, text: &str) -> Vec<(usize, T)> {
        let counts = self.vocab.count(&self.meta.config.tokenizer.tokenize(text));
        weight_query_vector(&counts.counts, &self.scheme)
    }

    /// Projects a document as a pseudo-document: `q̂ = qᵀ U_k Σ_k⁻¹`.
    ///
    /// Fails with [`LsaError::EmptyProjection`] when the result would be the zero
    /// vector, e.g. when no token of the text is in the vocabulary.
    pub fn fold_in(&self, doc: &Document) -> Result<ProjectedVector<T>> {
        let q = self.query_vector(&doc.text);
        let k = self.k();
        let mut coords = vec![T::zero(); k];
        for (term, w) in q {
            for (c, &u) in coords.iter_mut().zip(self.u.row(term)) {
                *c += w * u;
            }
        }
        for (c, &s) in coords.iter_mut().zip(&self.sigma) {
            *c /= s;
        }
        if coords.iter().all(|c| *c == T::zero()) {
            return Err(LsaError::EmptyProjection { id: doc.id.clone() });
        }
        Ok(ProjectedVector {
            coords,
            origin_id: doc.id.clone(),
            origin_kind: doc.source.into(),
            label: doc.label,
            space: self.fingerprint(),
        })
    }
}
