//! One-vs-one multi-class decomposition with Max-Wins voting.

use rayon::prelude::*;

use super::svm::{train_pairwise, Kernel, PairwiseSvm};
use crate::{Error, Result};

/// How one class pair votes.
#[derive(Debug, Clone, PartialEq)]
pub enum PairModel {
    /// Both classes present: `members` index the full training set, the
    /// first class of the pair is the positive side.
    Trained {
        svm: PairwiseSvm,
        members: Vec<usize>,
    },
    /// Only one class present; every vote goes to it.
    Default(usize),
    /// Neither class present; the pair casts no vote.
    Abstain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OvoModel<L> {
    classes: Vec<L>,
    /// `(i, j, model)` for every class-index pair `i < j`.
    pairs: Vec<(usize, usize, PairModel)>,
}

/// Train one classifier per unordered class pair. `classes` fixes both the
/// pair order and the tie-break order of [`OvoModel::predict`].
pub fn train_ovo<L>(
    points: &[Vec<f64>],
    labels: &[L],
    classes: &[L],
    penalty: f64,
    kernel: Kernel,
) -> Result<OvoModel<L>>
where
    L: Copy + PartialEq + Send + Sync + std::fmt::Debug,
{
    if classes.len() < 2 {
        return Err(Error::domain("one-vs-one needs at least two classes"));
    }
    if points.len() != labels.len() {
        return Err(Error::domain("one label per training point is required"));
    }
    let index: Vec<usize> = labels
        .iter()
        .map(|l| {
            classes
                .iter()
                .position(|c| c == l)
                .ok_or_else(|| Error::domain(format!("label {l:?} is not among the classes")))
        })
        .collect::<Result<_>>()?;

    let combos: Vec<(usize, usize)> = (0..classes.len())
        .flat_map(|i| (i + 1..classes.len()).map(move |j| (i, j)))
        .collect();
    let pairs = combos
        .into_par_iter()
        .map(|(i, j)| {
            let members: Vec<usize> = (0..points.len())
                .filter(|&t| index[t] == i || index[t] == j)
                .collect();
            let has_i = members.iter().any(|&t| index[t] == i);
            let has_j = members.iter().any(|&t| index[t] == j);
            let model = match (has_i, has_j) {
                (true, true) => {
                    let x: Vec<Vec<f64>> = members.iter().map(|&t| points[t].clone()).collect();
                    let y: Vec<f64> = members
                        .iter()
                        .map(|&t| if index[t] == i { 1.0 } else { -1.0 })
                        .collect();
                    PairModel::Trained {
                        svm: train_pairwise(&x, &y, penalty, kernel)?,
                        members,
                    }
                }
                (true, false) | (false, true) => {
                    let (present, missing) = if has_i { (i, j) } else { (j, i) };
                    log::warn!(
                        "no training samples of class {:?}; pair ({:?}, {:?}) votes {:?}",
                        classes[missing],
                        classes[i],
                        classes[j],
                        classes[present]
                    );
                    PairModel::Default(present)
                }
                (false, false) => PairModel::Abstain,
            };
            Ok((i, j, model))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OvoModel {
        classes: classes.to_vec(),
        pairs,
    })
}

/// Index of the class with the most votes; ties go to the earliest class.
pub fn max_wins(votes: &[usize]) -> usize {
    let mut best = 0;
    for (k, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = k;
        }
    }
    best
}

impl<L: Copy> OvoModel<L> {
    pub fn classes(&self) -> &[L] {
        &self.classes
    }

    pub fn pairs(&self) -> impl Iterator<Item = (L, L, &PairModel)> {
        self.pairs
            .iter()
            .map(|(i, j, m)| (self.classes[*i], self.classes[*j], m))
    }

    pub fn trained_count(&self) -> usize {
        self.pairs
            .iter()
            .filter(|(_, _, m)| matches!(m, PairModel::Trained { .. }))
            .count()
    }

    /// Votes per class, in class order.
    pub fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut votes = vec![0; self.classes.len()];
        for (i, j, model) in &self.pairs {
            match model {
                PairModel::Trained { svm, .. } => {
                    // A zero decision value sits on the boundary; it counts
                    // for the positive class like sign(0) = +1.
                    if svm.decision(x) >= 0.0 {
                        votes[*i] += 1;
                    } else {
                        votes[*j] += 1;
                    }
                }
                PairModel::Default(k) => votes[*k] += 1,
                PairModel::Abstain => {}
            }
        }
        votes
    }

    pub fn predict(&self, x: &[f64]) -> L {
        self.classes[max_wins(&self.votes(x))]
    }

    /// Whether each of `n` training points is a support vector of some
    /// trained pair.
    pub fn support_flags(&self, n: usize) -> Vec<bool> {
        let mut flags = vec![false; n];
        for (_, _, model) in &self.pairs {
            if let PairModel::Trained { svm, members } = model {
                for k in svm.support_indices() {
                    flags[members[k]] = true;
                }
            }
        }
        flags
    }
}
