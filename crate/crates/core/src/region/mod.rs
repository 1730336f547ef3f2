//! Region labelling: the exact labels every sensing SU can work out for
//! itself, and a per-band multi-class SVM that predicts them from position.

mod ovo;
mod svm;

pub use ovo::{max_wins, train_ovo, OvoModel, PairModel};
pub use svm::{train_pairwise, train_pairwise_to, Kernel, PairwiseSvm, KKT_TOLERANCE};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::Position;
use crate::{Error, Result};

/// Region of an SU with respect to one band. The declaration order is the
/// tie-break order of Max-Wins voting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    /// Enough received power to run the harvester.
    HR,
    /// Too weak to harvest, strong enough to detect the PU.
    IR,
    /// Cannot detect the PU at the required probabilities.
    CR,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 3] = [RegionLabel::HR, RegionLabel::IR, RegionLabel::CR];

    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::HR => "HR",
            RegionLabel::IR => "IR",
            RegionLabel::CR => "CR",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "HR" => Ok(RegionLabel::HR),
            "IR" => Ok(RegionLabel::IR),
            "CR" => Ok(RegionLabel::CR),
            other => Err(Error::domain(format!("unknown region label `{other}`"))),
        }
    }
}

/// Exact label of one (SU, band): HR when the received power reaches the
/// harvesting threshold, otherwise CR when the detector targets cannot be
/// met within a slot, otherwise IR.
pub fn label_ground_truth(
    avg_rx_power: f64,
    harvest_threshold: f64,
    detectable: bool,
) -> RegionLabel {
    if avg_rx_power >= harvest_threshold {
        RegionLabel::HR
    } else if !detectable {
        RegionLabel::CR
    } else {
        RegionLabel::IR
    }
}

/// Fraction of positions where the two labelings disagree.
pub fn classification_error(predicted: &[RegionLabel], truth: &[RegionLabel]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::domain(format!(
            "{} predictions for {} true labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let wrong = predicted.iter().zip(truth).filter(|(p, t)| p != t).count();
    Ok(wrong as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    Linear,
    /// RBF whose length scale is half the median pairwise distance between
    /// standardized training positions.
    #[default]
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Slack penalty.
    pub penalty: f64,
    pub kernel: KernelChoice,
    /// Draw a fresh training subset every slot instead of once per run.
    pub redraw_each_slot: bool,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            penalty: 10.0,
            kernel: KernelChoice::Rbf,
            redraw_each_slot: false,
        }
    }
}

/// Per-band region classifier on standardized SU positions.
#[derive(Debug, Clone)]
pub struct RegionClassifier {
    mean: [f64; 2],
    scale: [f64; 2],
    training_size: usize,
    model: OvoModel<RegionLabel>,
}

impl RegionClassifier {
    pub fn train(positions: &[Position], labels: &[RegionLabel], cfg: &SvmConfig) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::domain(
                "region classifier needs at least one training SU",
            ));
        }
        let n = positions.len() as f64;
        let mean = [
            positions.iter().map(|p| p.x).sum::<f64>() / n,
            positions.iter().map(|p| p.y).sum::<f64>() / n,
        ];
        let spread = |f: fn(&Position) -> f64, m: f64| {
            let sd = (positions.iter().map(|p| (f(p) - m).powi(2)).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        };
        let scale = [spread(|p| p.x, mean[0]), spread(|p| p.y, mean[1])];
        let features: Vec<Vec<f64>> = positions
            .iter()
            .map(|p| vec![(p.x - mean[0]) / scale[0], (p.y - mean[1]) / scale[1]])
            .collect();
        let kernel = match cfg.kernel {
            KernelChoice::Linear => Kernel::Linear,
            KernelChoice::Rbf => Kernel::Rbf {
                length_scale: 0.5 * median_distance(&features).unwrap_or(2.0),
            },
        };
        let model = train_ovo(&features, labels, &RegionLabel::ALL, cfg.penalty, kernel)?;
        Ok(Self {
            mean,
            scale,
            training_size: positions.len(),
            model,
        })
    }

    fn features(&self, p: &Position) -> [f64; 2] {
        [
            (p.x - self.mean[0]) / self.scale[0],
            (p.y - self.mean[1]) / self.scale[1],
        ]
    }

    pub fn predict(&self, p: &Position) -> RegionLabel {
        self.model.predict(&self.features(p))
    }

    pub fn model(&self) -> &OvoModel<RegionLabel> {
        &self.model
    }

    /// Support-vector flag for each training SU, in training order.
    pub fn support_flags(&self) -> Vec<bool> {
        self.model.support_flags(self.training_size)
    }
}

/// Median of the pairwise Euclidean distances, ignoring coincident points.
fn median_distance(points: &[Vec<f64>]) -> Option<f64> {
    let mut d: Vec<f64> = Vec::new();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let v = a
                .iter()
                .zip(b)
                .map(|(p, q)| (p - q).powi(2))
                .sum::<f64>()
                .sqrt();
            if v > 0.0 {
                d.push(v);
            }
        }
    }
    if d.is_empty() {
        return None;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len() / 2;
    Some(if d.len() % 2 == 1 {
        d[m]
    } else {
        0.5 * (d[m - 1] + d[m])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{channel_gain, hr_radius, ChannelParams};

    #[test]
    fn ground_truth_examples() {
        let params = ChannelParams::default();
        let rx = channel_gain(5.0, 0.9e9, &params).unwrap();
        assert!((rx - 2.81e-5).abs() < 1e-7);
        assert_eq!(label_ground_truth(rx, 1e-5, true), RegionLabel::HR);

        let r = hr_radius(1.0, 0.9e9, 1e-5, &params);
        assert!((r - 8.388).abs() < 1e-3);
        assert_eq!(label_ground_truth(1e-5, 1e-5, true), RegionLabel::HR);
        let inside = channel_gain(r * (1.0 - 1e-12), 0.9e9, &params).unwrap();
        let outside = channel_gain(r * (1.0 + 1e-9), 0.9e9, &params).unwrap();
        assert_eq!(label_ground_truth(inside, 1e-5, true), RegionLabel::HR);
        assert_eq!(label_ground_truth(outside, 1e-5, true), RegionLabel::IR);
        assert_eq!(label_ground_truth(1e-9, 1e-5, false), RegionLabel::CR);
        assert_eq!(label_ground_truth(1e-9, 1e-5, true), RegionLabel::IR);
    }

    #[test]
    fn error_fraction() {
        use RegionLabel::*;
        assert_eq!(
            classification_error(&[HR, IR, CR], &[HR, IR, CR]).unwrap(),
            0.0
        );
        assert_eq!(
            classification_error(&[IR, CR, HR], &[HR, IR, CR]).unwrap(),
            1.0
        );
        assert_eq!(classification_error(&[HR, HR], &[HR, CR]).unwrap(), 0.5);
        assert!(classification_error(&[HR], &[]).is_err());
    }

    #[test]
    fn label_strings_and_order() {
        for l in RegionLabel::ALL {
            assert_eq!(l.as_str().parse::<RegionLabel>().unwrap(), l);
        }
        assert!(RegionLabel::HR < RegionLabel::IR && RegionLabel::IR < RegionLabel::CR);
    }

    #[test]
    fn concentric_regions_are_learned() {
        // HR disc, IR ring, CR outside, on a grid.
        let mut pos = Vec::new();
        let mut lab = Vec::new();
        for i in 0..15 {
            for j in 0..15 {
                let p = Position::new(i as f64 * 40.0 / 14.0, j as f64 * 40.0 / 14.0);
                let r = p.distance(&Position::new(20.0, 20.0));
                pos.push(p);
                lab.push(if r <= 8.0 {
                    RegionLabel::HR
                } else if r <= 16.0 {
                    RegionLabel::IR
                } else {
                    RegionLabel::CR
                });
            }
        }
        let clf = RegionClassifier::train(&pos, &lab, &SvmConfig::default()).unwrap();
        let predicted: Vec<RegionLabel> = pos.iter().map(|p| clf.predict(p)).collect();
        assert!(classification_error(&predicted, &lab).unwrap() < 0.05);
        assert_eq!(clf.predict(&Position::new(20.0, 20.0)), RegionLabel::HR);
        assert_eq!(clf.predict(&Position::new(1.0, 1.0)), RegionLabel::CR);
        let flags = clf.support_flags();
        assert!(flags.iter().any(|&f| f) && !flags.iter().all(|&f| f));
    }

    #[test]
    fn single_class_training_predicts_it() {
        let pos = vec![Position::new(1.0, 2.0), Position::new(3.0, 4.0)];
        let clf =
            RegionClassifier::train(&pos, &[RegionLabel::IR; 2], &SvmConfig::default()).unwrap();
        assert_eq!(clf.predict(&Position::new(30.0, 30.0)), RegionLabel::IR);
        assert_eq!(clf.model().trained_count(), 0);
    }
}
