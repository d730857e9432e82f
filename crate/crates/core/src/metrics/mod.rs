//! Frame-level evaluation: confusion counts, accuracy, F1, ROC/AUC, EER,
//! and one-dimensional modality projections for plotting.

mod pca;
mod roc;

pub use pca::{principal_component, project_modality_1d, Modality, PcaResult};
pub use roc::{eer, roc_auc, EerPoint, RocCurve, RocPoint};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredFrame {
    pub score: f64,
    pub label: bool,
}

impl ScoredFrame {
    pub fn new(score: f64, label: bool) -> Self {
        Self { score, label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// F1 and whether it hit the degenerate convention (no predicted or no
    /// actual positives, or zero precision and recall), which yields 0.
    pub fn f1(&self) -> (f64, bool) {
        if self.tp + self.fp == 0 || self.tp + self.fn_ == 0 {
            return (0.0, true);
        }
        let p = self.tp as f64 / (self.tp + self.fp) as f64;
        let r = self.tp as f64 / (self.tp + self.fn_) as f64;
        if p + r == 0.0 {
            return (0.0, true);
        }
        (2.0 * p * r / (p + r), false)
    }
}

fn nonempty(scored: &[ScoredFrame]) -> Result<()> {
    if scored.is_empty() {
        return Err(Error::InvalidInput("no scored frames".into()));
    }
    Ok(())
}

/// Counts at `threshold`; a score equal to the threshold predicts positive.
pub fn confusion(scored: &[ScoredFrame], threshold: f64) -> Result<Confusion> {
    nonempty(scored)?;
    let mut c = Confusion::default();
    for s in scored {
        match (s.score >= threshold, s.label) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

pub fn accuracy(scored: &[ScoredFrame], threshold: f64) -> Result<f64> {
    Ok(confusion(scored, threshold)?.accuracy())
}

pub fn f1(scored: &[ScoredFrame], threshold: f64) -> Result<f64> {
    Ok(confusion(scored, threshold)?.f1().0)
}

/// How the decision threshold for accuracy/F1 is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    Fixed(f64),
    /// Threshold picked on the dev split by [`select_threshold`].
    DevSelected(f64),
}

impl ThresholdPolicy {
    pub fn threshold(self) -> f64 {
        match self {
            ThresholdPolicy::Fixed(t) | ThresholdPolicy::DevSelected(t) => t,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ThresholdPolicy::Fixed(_) => "fixed",
            ThresholdPolicy::DevSelected(_) => "dev",
        }
    }
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::Fixed(0.5)
    }
}

/// Threshold maximising F1 over the distinct scores of `dev`; ties go to the
/// highest threshold.
pub fn select_threshold(dev: &[ScoredFrame]) -> Result<f64> {
    nonempty(dev)?;
    let mut sorted: Vec<&ScoredFrame> = dev.iter().collect();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));
    let positives = dev.iter().filter(|s| s.label).count();
    let (mut tp, mut fp) = (0usize, 0usize);
    let (mut best, mut best_f1) = (sorted[0].score, -1.0);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].score;
        while i < sorted.len() && sorted[i].score == t {
            if sorted[i].label {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let c = Confusion {
            tp,
            fp,
            tn: 0,
            fn_: positives - tp,
        };
        let f = c.f1().0;
        if f > best_f1 {
            best_f1 = f;
            best = t;
        }
    }
    Ok(best)
}

/// One row of results.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub accuracy: f64,
    pub auc: f64,
    pub eer: f64,
    pub f1: f64,
    /// F1 fell back to 0 under the degenerate-case convention.
    pub f1_degenerate: bool,
    pub confusion: Confusion,
    pub threshold_used: f64,
    pub policy: ThresholdPolicy,
}

pub fn report(scored: &[ScoredFrame], policy: ThresholdPolicy) -> Result<MetricReport> {
    nonempty(scored)?;
    let threshold = policy.threshold();
    let c = confusion(scored, threshold)?;
    let (f1, f1_degenerate) = c.f1();
    let (curve, auc) = roc_auc(scored)?;
    let e = eer(&curve)?;
    Ok(MetricReport {
        accuracy: c.accuracy(),
        auc,
        eer: e.rate,
        f1,
        f1_degenerate,
        confusion: c,
        threshold_used: threshold,
        policy,
    })
}

pub const REPORT_CSV_HEADER: &str = "model,modalities,acc,auc,eer,f1";

impl MetricReport {
    /// `model,modalities,acc,auc,eer,f1` with four decimals.
    pub fn csv_row(&self, model: &str, modalities: &str) -> String {
        format!(
            "{model},{modalities},{:.4},{:.4},{:.4},{:.4}",
            self.accuracy, self.auc, self.eer, self.f1
        )
    }
}
