//! Latent semantic analysis for classifying software reviews into quality-in-use
//! indicators.
//!
//! A background corpus is weighted (log-entropy or TFIDF) and reduced with a truncated
//! SVD into a k-dimensional space. Labeled measurement scales and unlabeled review
//! sentences are folded in as pseudo-documents, each review is matched against its
//! most similar scales by cosine, and a score-gap / majority-vote rule picks one of
//! effectiveness, efficiency or freedom from risk. Predictions are scored with
//! per-indicator precision, recall and F-measure.
//!
//! The numeric types are generic over [`Scalar`] (`f32` or `f64`); the `*64` / `*32`
//! aliases below name the common instantiations.

pub mod classifier;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod persist;
mod scalar;
pub mod space;
pub mod weighting;

pub use classifier::{
    build_subspace, classify_all, cosine, predict, top_n_neighbors, ClassifierConfig, ExclusionReport, Neighbor,
    Predicted, Prediction, ReviewItem, RulePath, Subspace,
};
pub use corpus::{
    build_vocabulary, load_documents, read_documents, tokenize, Document, DocumentFormat, LabelMode, QuIndicator,
    Source, Tokenizer, Vocabulary,
};
pub use error::{LsaError, Result};
pub use evaluation::{confusion, metrics, ClassMetrics, ConfusionMatrix, IndicatorScores};
pub use linalg::{truncated_svd, truncated_svd_op, DenseMatrix, LinearOperator, SvdMethod, SvdOptions, TruncatedSvd};
pub use persist::{load_space, save_space};
pub use scalar::Scalar;
pub use space::{build_space, BuildMeta, BuildReport, OriginKind, ProjectedVector, SemanticSpace, SpaceConfig};
pub use weighting::{
    apply_weights, build_raw_matrix, fit_log_entropy, fit_tfidf, weight_query_vector, SchemeKind, Semantics,
    TermDocMatrix, WeightingScheme,
};

pub type SemanticSpace64 = SemanticSpace<f64>;
pub type SemanticSpace32 = SemanticSpace<f32>;
pub type ProjectedVector64 = ProjectedVector<f64>;
pub type Subspace64 = Subspace<f64>;
pub type Prediction64 = Prediction<f64>;
pub type Neighbor64 = Neighbor<f64>;
pub type TermDocMatrix64 = TermDocMatrix<f64>;
pub type WeightingScheme64 = WeightingScheme<f64>;
pub type TruncatedSvd64 = TruncatedSvd<f64>;
