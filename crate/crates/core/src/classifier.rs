//! Items subspace of folded measurement scales and reviews, nearest-scale retrieval
//! and the score-gap / majority-vote rule that turns neighbors into an indicator.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, QuIndicator};
use crate::error::{LsaError, Result};
use crate::scalar::{dot, norm, Scalar};
use crate::space::{ProjectedVector, SemanticSpace};

pub const DEFAULT_TOP_N: usize = 6;
pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub top_n: usize,
    /// Minimum gap between the two best scores for the best scale to win outright.
    pub variance_threshold: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            top_n: DEFAULT_TOP_N,
            variance_threshold: DEFAULT_VARIANCE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor<T> {
    pub scale_id: String,
    pub label: QuIndicator,
    pub score: T,
}

/// Which branch of the decision rule produced a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RulePath {
    VarianceGap,
    MajorityVote,
    TieBrokenByScore,
}

impl RulePath {
    pub fn as_str(self) -> &'static str {
        match self {
            RulePath::VarianceGap => "variance_gap",
            RulePath::MajorityVote => "majority_vote",
            RulePath::TieBrokenByScore => "tie_broken_by_score",
        }
    }
}

/// A predicted indicator, or the explicit outcome for reviews that could not be placed
/// in the space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicted {
    Effectiveness,
    Efficiency,
    FreedomFromRisk,
    Unclassifiable,
}

impl Predicted {
    pub fn indicator(self) -> Option<QuIndicator> {
        match self {
            Predicted::Effectiveness => Some(QuIndicator::Effectiveness),
            Predicted::Efficiency => Some(QuIndicator::Efficiency),
            Predicted::FreedomFromRisk => Some(QuIndicator::FreedomFromRisk),
            Predicted::Unclassifiable => None,
        }
    }
}

impl From<QuIndicator> for Predicted {
    fn from(q: QuIndicator) -> Self {
        match q {
            QuIndicator::Effectiveness => Predicted::Effectiveness,
            QuIndicator::Efficiency => Predicted::Efficiency,
            QuIndicator::FreedomFromRisk => Predicted::FreedomFromRisk,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction<T> {
    #[serde(rename = "id")]
    pub review_id: String,
    pub predicted: Predicted,
    /// `None` only for unclassifiable reviews.
    pub rule_path: Option<RulePath>,
    pub neighbors: Vec<Neighbor<T>>,
}

/// A review slot in the subspace; `vector` is `None` when folding-in failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReviewItem<T> {
    pub id: String,
    pub vector: Option<ProjectedVector<T>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExclusionReport {
    pub scales: Vec<String>,
    pub reviews: Vec<String>,
}

/// Labeled scale vectors and review vectors that share one space's basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<T> {
    scales: Vec<ProjectedVector<T>>,
    reviews: Vec<ReviewItem<T>>,
    space_ref: String,
}

impl<T: Scalar> Subspace<T> {
    /// Checks that every scale is labeled, all vectors have one dimension and all
    /// come from the same space.
    pub fn new(scales: Vec<ProjectedVector<T>>, reviews: Vec<ReviewItem<T>>) -> Result<Self> {
        let first = scales.first().ok_or(LsaError::NoScales)?;
        let space_ref = first.space.clone();
        let dim = first.coords.len();
        let vectors = scales.iter().chain(reviews.iter().filter_map(|r| r.vector.as_ref()));
        for v in vectors {
            if v.space != space_ref {
                return Err(LsaError::SpaceMismatch {
                    expected: space_ref,
                    found: v.space.clone(),
                });
            }
            if v.coords.len() != dim {
                return Err(LsaError::Dimension(format!(
                    "{} has {} coordinates, expected {dim}",
                    v.origin_id,
                    v.coords.len()
                )));
            }
        }
        if let Some(s) = scales.iter().find(|s| s.label.is_none()) {
            return Err(LsaError::InvalidArgument(format!("scale {} has no label", s.origin_id)));
        }
        Ok(Subspace {
            scales,
            reviews,
            space_ref,
        })
    }

    pub fn scales(&self) -> &[ProjectedVector<T>] {
        &self.scales
    }

    pub fn reviews(&self) -> &[ReviewItem<T>] {
        &self.reviews
    }

    pub fn space_ref(&self) -> &str {
        &self.space_ref
    }

    pub fn dim(&self) -> usize {
        self.scales[0].coords.len()
    }
}

/// Folds scales and reviews into `space`. Documents with an empty projection are
/// listed in the report: scales are dropped, reviews stay as unclassifiable slots.
pub fn build_subspace<T: Scalar>(
    scales: &[Document],
    reviews: &[Document],
    space: &SemanticSpace<T>,
) -> Result<(Subspace<T>, ExclusionReport)> {
    let mut report = ExclusionReport::default();
    let mut scale_vecs = Vec::with_capacity(scales.len());
    for doc in scales {
        if doc.label.is_none() {
            return Err(LsaError::InvalidArgument(format!("scale {} has no label", doc.id)));
        }
        match space.fold_in(doc) {
            Ok(v) => scale_vecs.push(v),
            Err(LsaError::EmptyProjection { id }) => {
                log::warn!("scale {id} shares no weighted term with the space; excluded");
                report.scales.push(id);
            }
            Err(e) => return Err(e),
        }
    }
    let mut items = Vec::with_capacity(reviews.len());
    for doc in reviews {
        let vector = match space.fold_in(doc) {
            Ok(v) => Some(v),
            Err(LsaError::EmptyProjection { id }) => {
                report.reviews.push(id);
                None
            }
            Err(e) => return Err(e),
        };
        items.push(ReviewItem {
            id: doc.id.clone(),
            vector,
        });
    }
    Ok((Subspace::new(scale_vecs, items)?, report))
}

/// `a·b / (‖a‖‖b‖)`, clamped to [-1, 1].
pub fn cosine<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(LsaError::Dimension(format!("{} vs {} coordinates", a.len(), b.len())));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == T::zero() || nb == T::zero() {
        return Err(LsaError::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).max(-T::one()).min(T::one()))
}

fn by_score_then_id<T: Scalar>(a: &Neighbor<T>, b: &Neighbor<T>) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.scale_id.cmp(&b.scale_id))
}

/// The `n` scales most similar to `review`, best first; equal scores are ordered by
/// scale id.
pub fn top_n_neighbors<T: Scalar>(
    review: &ProjectedVector<T>,
    sub: &Subspace<T>,
    n: usize,
) -> Result<Vec<Neighbor<T>>> {
    if n == 0 {
        return Err(LsaError::InvalidArgument("top_n must be at least 1".into()));
    }
    let mut all = sub
        .scales
        .iter()
        .map(|s| {
            Ok(Neighbor {
                scale_id: s.origin_id.clone(),
                label: s.label.expect("subspace scales are labeled"),
                score: cosine(&review.coords, &s.coords)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    all.sort_by(by_score_then_id);
    all.truncate(n);
    Ok(all)
}

/// Decision rule over neighbors sorted best first.
///
/// 1. One neighbor: its label (`VarianceGap`).
/// 2. `score[0] − score[1] > threshold`: the best neighbor's label (`VarianceGap`).
/// 3. Otherwise the most frequent label over the whole list (`MajorityVote`).
/// 4. A frequency tie goes to the tied label held by the highest-scoring neighbor
///    (`TieBrokenByScore`); equal scores fall back to the smaller scale id.
pub fn predict<T: Scalar>(neighbors: &[Neighbor<T>], variance_threshold: T) -> Result<(QuIndicator, RulePath)> {
    let best = neighbors.first().ok_or(LsaError::EmptyNeighborList)?;
    debug_assert!(neighbors.windows(2).all(|w| w[0].score >= w[1].score));
    if neighbors.len() == 1 {
        return Ok((best.label, RulePath::VarianceGap));
    }
    let score_gap = best.score - neighbors[1].score;
    if score_gap > variance_threshold {
        return Ok((best.label, RulePath::VarianceGap));
    }
    let mut freq = [0usize; 3];
    for nb in neighbors {
        freq[nb.label.index()] += 1;
    }
    let top = *freq.iter().max().expect("three labels");
    let tied: Vec<QuIndicator> = QuIndicator::ALL
        .into_iter()
        .filter(|q| freq[q.index()] == top)
        .collect();
    if let [only] = tied[..] {
        return Ok((only, RulePath::MajorityVote));
    }
    let winner = neighbors
        .iter()
        .filter(|nb| tied.contains(&nb.label))
        .min_by(|a, b| by_score_then_id(a, b))
        .expect("a tied label occurs in the list");
    Ok((winner.label, RulePath::TieBrokenByScore))
}

fn classify_one<T: Scalar>(
    item: &ReviewItem<T>,
    sub: &Subspace<T>,
    config: &ClassifierConfig,
) -> Result<Prediction<T>> {
    let Some(vector) = &item.vector else {
        return Ok(Prediction {
            review_id: item.id.clone(),
            predicted: Predicted::Unclassifiable,
            rule_path: None,
            neighbors: Vec::new(),
        });
    };
    let neighbors = top_n_neighbors(vector, sub, config.top_n)?;
    let (label, path) = predict(&neighbors, T::of(config.variance_threshold))?;
    Ok(Prediction {
        review_id: item.id.clone(),
        predicted: label.into(),
        rule_path: Some(path),
        neighbors,
    })
}

/// One prediction per review, in review order. Reviews are scored in parallel.
pub fn classify_all<T: Scalar>(sub: &Subspace<T>, config: &ClassifierConfig) -> Result<Vec<Prediction<T>>> {
    if sub.scales.is_empty() {
        return Err(LsaError::NoScales);
    }
    sub.reviews
        .par_iter()
        .map(|item| classify_one(item, sub, config))
        .collect()
}
