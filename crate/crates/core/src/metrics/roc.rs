use std::fmt::Write as _;

use super::ScoredFrame;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are predicted positive. The first point uses
    /// `+inf` (nothing predicted positive).
    pub threshold: f64,
}

/// ROC polyline swept from threshold `+inf` down to the lowest score.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

/// Operating point where false-positive and false-negative rates meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EerPoint {
    pub rate: f64,
    pub fpr: f64,
    pub fnr: f64,
    /// Threshold linearly interpolated along the crossing segment.
    pub threshold: f64,
}

impl RocCurve {
    /// `threshold,fpr,tpr` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.threshold, p.fpr, p.tpr);
        }
        out
    }

    /// Trapezoidal area under the polyline.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
            .sum()
    }
}

/// Builds the ROC curve and its trapezoidal AUC.
///
/// Tied scores enter the sweep together, which makes the area equal to the
/// Mann-Whitney statistic with ties counted as one half.
pub fn roc_auc(scored: &[ScoredFrame]) -> Result<(RocCurve, f64)> {
    if scored.iter().any(|s| !s.score.is_finite()) {
        return Err(Error::InvalidInput("ROC needs finite scores".into()));
    }
    let pos = scored.iter().filter(|s| s.label).count();
    let neg = scored.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidInput(format!(
            "ROC needs both classes, got {pos} positives and {neg} negatives"
        )));
    }
    let mut sorted: Vec<&ScoredFrame> = scored.iter().collect();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));

    let (p, n) = (pos as f64, neg as f64);
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].score;
        while i < sorted.len() && sorted[i].score == threshold {
            if sorted[i].label {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / n,
            tpr: tp as f64 / p,
            threshold,
        });
    }
    let curve = RocCurve { points };
    let auc = curve.area();
    Ok((curve, auc))
}

/// Equal error rate by linear interpolation on the ROC polyline.
pub fn eer(curve: &RocCurve) -> Result<EerPoint> {
    let pts = &curve.points;
    if pts.len() < 2 {
        return Err(Error::InvalidInput("ROC curve needs at least two points".into()));
    }
    // d = fpr - fnr runs from -1 at (0,0) to +1 at (1,1) and is nondecreasing.
    let d = |p: &RocPoint| p.fpr - (1.0 - p.tpr);
    for w in pts.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (da, db) = (d(a), d(b));
        if da == 0.0 {
            return Ok(EerPoint {
                rate: a.fpr,
                fpr: a.fpr,
                fnr: 1.0 - a.tpr,
                threshold: a.threshold,
            });
        }
        if da < 0.0 && db >= 0.0 {
            let s = -da / (db - da);
            let fpr = a.fpr + s * (b.fpr - a.fpr);
            let fnr = (1.0 - a.tpr) + s * (a.tpr - b.tpr);
            let threshold = if a.threshold.is_finite() {
                a.threshold + s * (b.threshold - a.threshold)
            } else {
                b.threshold
            };
            return Ok(EerPoint {
                rate: (fpr + fnr) / 2.0,
                fpr,
                fnr,
                threshold,
            });
        }
    }
    Err(Error::InvalidInput("ROC curve never crosses fpr = fnr".into()))
}
