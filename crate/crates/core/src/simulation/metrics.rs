use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::EdgeMatrix;

/// Confusion counts over the upper off-diagonal triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn between(estimate: &EdgeMatrix, truth: &EdgeMatrix) -> Result<Self> {
        if estimate.p() != truth.p() {
            return Err(Error::Argument(format!(
                "estimated graph has {} nodes, true graph {}",
                estimate.p(),
                truth.p()
            )));
        }
        let mut c = ConfusionCounts::default();
        for i in 0..truth.p() {
            for j in i + 1..truth.p() {
                match (estimate.has_edge(i, j), truth.has_edge(i, j)) {
                    (true, true) => c.tp += 1,
                    (false, false) => c.tn += 1,
                    (true, false) => c.fp += 1,
                    (false, true) => c.fn_ += 1,
                }
            }
        }
        Ok(c)
    }

    /// TN / (TN + FP); 1 when the true graph has no non-edges.
    pub fn specificity(&self) -> f64 {
        ratio_or_one(self.tn, self.tn + self.fp)
    }

    /// TP / (TP + FN); 1 when the true graph has no edges.
    pub fn sensitivity(&self) -> f64 {
        ratio_or_one(self.tp, self.tp + self.fn_)
    }

    /// Matthews correlation coefficient; 0 when any marginal sum is 0.
    pub fn mcc(&self) -> f64 {
        let (tp, tn, fp, fn_) = (
            self.tp as f64,
            self.tn as f64,
            self.fp as f64,
            self.fn_ as f64,
        );
        let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        if denom == 0.0 {
            0.0
        } else {
            (tp * tn - fp * fn_) / denom.sqrt()
        }
    }
}

fn ratio_or_one(num: u64, den: u64) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureScores {
    pub sp: f64,
    pub se: f64,
    pub mcc: f64,
    pub counts: ConfusionCounts,
}

/// Structure recovery plus parameter error of one fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub sp: f64,
    pub se: f64,
    pub mcc: f64,
    pub scaled_l1: f64,
}

impl MetricsReport {
    pub fn compute(
        estimate: &EdgeMatrix,
        truth: &EdgeMatrix,
        estimate_matrix: &DMatrix<f64>,
        truth_matrix: &DMatrix<f64>,
    ) -> Result<Self> {
        let s = score_structure(estimate, truth)?;
        Ok(Self {
            sp: s.sp,
            se: s.se,
            mcc: s.mcc,
            scaled_l1: scaled_l1(estimate_matrix, truth_matrix)?,
        })
    }
}

pub fn score_structure(estimate: &EdgeMatrix, truth: &EdgeMatrix) -> Result<StructureScores> {
    let counts = ConfusionCounts::between(estimate, truth)?;
    Ok(StructureScores {
        sp: counts.specificity(),
        se: counts.sensitivity(),
        mcc: counts.mcc(),
        counts,
    })
}

/// (1/p²) Σ_kd |est_kd − truth_kd|, summed row by row.
pub fn scaled_l1(estimate: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    if estimate.shape() != truth.shape() || !truth.is_square() {
        return Err(Error::Argument(format!(
            "matrices differ in shape: {:?} vs {:?}",
            estimate.shape(),
            truth.shape()
        )));
    }
    let p = truth.nrows();
    let mut total = 0.0;
    for k in 0..p {
        for d in 0..p {
            total += (estimate[(k, d)] - truth[(k, d)]).abs();
        }
    }
    Ok(total / (p * p) as f64)
}
