//! Soft-voting ensemble: the predicted class is the one with the highest
//! summed probability across the member classifiers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Label;

#[derive(Debug, Error, PartialEq)]
pub enum VoteError {
    #[error("ensemble members disagree on the number of prediction rows")]
    HeterogeneousMembers,
    #[error("soft vote needs at least one member")]
    NoMembers,
}

/// Sums per-member (p_neg, p_pos) rows into ensemble labels and normalized
/// probabilities. Exact ties go to Negative: a screening call should not
/// assert disease on a coin flip.
pub fn soft_vote(member_probs: &[Vec<[f64; 2]>]) -> Result<Vec<(Label, [f64; 2])>, VoteError> {
    let Some(first) = member_probs.first() else {
        return Err(VoteError::NoMembers);
    };
    let rows = first.len();
    if member_probs.iter().any(|m| m.len() != rows) {
        return Err(VoteError::HeterogeneousMembers);
    }
    let k = member_probs.len() as f64;
    let mut out = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut sum = [0.0f64; 2];
        for m in member_probs {
            sum[0] += m[r][0];
            sum[1] += m[r][1];
        }
        let label = if sum[1] > sum[0] { Label::Positive } else { Label::Negative };
        out.push((label, [sum[0] / k, sum[1] / k]));
    }
    Ok(out)
}

/// Serializable record of which members an ensemble carries, in vote order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub members: Vec<super::ModelKind>,
}
