//! Detection and embedding quality measures.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{DistanceMatrix, Embedding, FilterMask};

/// Distances below this are excluded from [`embedding_score`].
pub const SCORE_MIN_DISTANCE: f64 = 1e-12;

/// Outlier detection viewed as retrieval: an edge is retrieved iff the mask
/// removes it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    /// `TP / (TP + FP)`, or 1 when nothing was retrieved.
    pub precision: f64,
    /// `TP / (TP + FN)`, or 1 when there was nothing to find.
    pub recall: f64,
}

pub fn detection_report(mask: &FilterMask, truth: &[(usize, usize)]) -> Result<DetectionReport> {
    let n = mask.n();
    let mut truth_set = HashSet::with_capacity(truth.len());
    for &(a, b) in truth {
        if a == b || a >= n || b >= n {
            return Err(Error::InvalidParameter(format!("({a}, {b}) is not an edge of a {n}-element mask")));
        }
        truth_set.insert((a.min(b), a.max(b)));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for i in 0..n {
        for j in i + 1..n {
            let retrieved = !mask.keep(i, j);
            let outlier = truth_set.contains(&(i, j));
            match (retrieved, outlier) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    Ok(DetectionReport {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        true_negatives: tn,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingScore {
    /// Mean of `|ln(|x_i - x_j| / D_ij)|` over the scored pairs; lower is better.
    pub score: f64,
    pub scored_pairs: usize,
    /// Pairs skipped because either distance was below [`SCORE_MIN_DISTANCE`].
    pub excluded_pairs: usize,
}

pub fn embedding_score(reference: &DistanceMatrix, x: &Embedding) -> Result<EmbeddingScore> {
    if reference.n() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "reference has {} elements, embedding {}",
            reference.n(),
            x.n()
        )));
    }
    let (mut sum, mut scored, mut excluded) = (0.0, 0usize, 0usize);
    for (i, j) in reference.pairs() {
        let truth = reference.get(i, j);
        let fitted = x.distance(i, j);
        if truth < SCORE_MIN_DISTANCE || fitted < SCORE_MIN_DISTANCE {
            excluded += 1;
            continue;
        }
        sum += (fitted / truth).ln().abs();
        scored += 1;
    }
    if scored == 0 {
        return Err(Error::Degenerate("every pair was excluded from the embedding score".into()));
    }
    Ok(EmbeddingScore { score: sum / scored as f64, scored_pairs: scored, excluded_pairs: excluded })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShepardRow {
    pub i: usize,
    pub j: usize,
    pub input_distance: f64,
    pub embedded_distance: f64,
    pub flagged: bool,
}

/// One row per unordered pair, for a Shepard scatter of input against
/// embedded distance.
pub fn shepard_data(observed: &DistanceMatrix, x: &Embedding, mask: &FilterMask) -> Result<Vec<ShepardRow>> {
    if observed.n() != x.n() || observed.n() != mask.n() {
        return Err(Error::DimensionMismatch(format!(
            "distances have {} elements, embedding {}, mask {}",
            observed.n(),
            x.n(),
            mask.n()
        )));
    }
    Ok(observed
        .pairs()
        .map(|(i, j)| ShepardRow {
            i,
            j,
            input_distance: observed.get(i, j),
            embedded_distance: x.distance(i, j),
            flagged: !mask.keep(i, j),
        })
        .collect())
}
