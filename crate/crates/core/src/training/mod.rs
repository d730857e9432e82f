//! Mini-batch training with Adam, a step learning-rate schedule and
//! dev-AUC model selection, plus the full ablation table.

mod ablate;
mod adam;

pub use ablate::{ablate, ablation_rows, table_csv, AblationRow, RowSpec};
pub use adam::{adam_step, AdamConfig, AdamState};

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diffcore::{softplus, Parameters, Tape};
use crate::error::{Error, Result};
use crate::fusion::graph::{record_loss, LossKind};
use crate::fusion::{dropout_mask, predict_proba, ModalityMask, ModelBody, ModelParams, ModelSpec, Variant};
use crate::metrics::{report, select_threshold, MetricReport, ScoredFrame, ThresholdPolicy};
use crate::par::{self, derive_seed, Execution};
use crate::traindata::{Dataset, FeatureDims, FeatureFrame, Split};

/// Frames per gradient work unit. Fixed so the reduction order, and with it
/// every bit of the result, does not depend on the thread count.
const GRAD_CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub lr_step_every: usize,
    pub lr_decay: f64,
    pub dropout_rate: f64,
    pub hidden: usize,
    pub head_width: usize,
    pub variant: Variant,
    pub mask: ModalityMask,
    pub adam: AdamConfig,
    /// Loss weight of positive frames under cross-entropy.
    pub pos_weight: f64,
    /// L2 penalty on the hinge classifier's weights.
    pub hinge_l2: f64,
    pub execution: Execution,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            epochs: 30,
            batch_size: 256,
            lr0: 1e-3,
            lr_step_every: 10,
            lr_decay: 0.5,
            dropout_rate: 0.3,
            hidden: 16,
            head_width: 8,
            variant: Variant::Mpf,
            mask: ModalityMask::ALL,
            adam: AdamConfig::default(),
            pos_weight: 1.0,
            hinge_l2: 1e-4,
            execution: Execution::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return bad(format!("lr0 must be positive, got {}", self.lr0));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad(format!("lr_decay must lie in (0, 1], got {}", self.lr_decay));
        }
        if self.lr_step_every == 0 || self.batch_size == 0 {
            return bad("lr_step_every and batch_size must be positive".into());
        }
        if self.hidden == 0 || self.head_width == 0 {
            return bad("hidden and head_width must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad(format!("dropout_rate must lie in [0, 1), got {}", self.dropout_rate));
        }
        let a = self.adam;
        if !((0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.eps >= 0.0) {
            return bad("adam betas must lie in [0, 1) and eps must be nonnegative".into());
        }
        if !(self.pos_weight > 0.0) || !(self.hinge_l2 >= 0.0) {
            return bad("pos_weight must be positive and hinge_l2 nonnegative".into());
        }
        Ok(())
    }

    pub fn model_spec(&self, dims: FeatureDims) -> ModelSpec {
        ModelSpec {
            hidden: self.hidden,
            head_width: self.head_width,
            dropout: self.dropout_rate,
            ..ModelSpec::new(self.variant, self.mask, dims)
        }
    }

    fn loss_kind(&self) -> LossKind {
        match self.variant {
            Variant::LinearHinge => LossKind::Hinge,
            _ => LossKind::Bce {
                pos_weight: self.pos_weight,
            },
        }
    }
}

/// `lr0 · decay^⌊epoch / step_every⌋`.
pub fn step_lr(epoch: usize, cfg: &TrainConfig) -> f64 {
    cfg.lr0 * cfg.lr_decay.powi((epoch / cfg.lr_step_every) as i32)
}

/// `ln(1 + exp(-(2y - 1)·z))`.
pub fn bce_loss(logit: f64, label: bool) -> f64 {
    softplus(if label { -logit } else { logit })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub dev: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
    /// Epoch whose parameters were returned.
    pub selected: Option<usize>,
}

impl TrainLog {
    pub const CSV_HEADER: &'static str = "epoch,lr,train_loss,dev_acc,dev_auc,dev_eer,dev_f1,selected";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for e in &self.epochs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                e.epoch,
                e.lr,
                e.train_loss,
                e.dev.accuracy,
                e.dev.auc,
                e.dev.eer,
                e.dev.f1,
                u8::from(self.selected == Some(e.epoch))
            );
        }
        out
    }

    pub fn best_dev_auc(&self) -> Option<f64> {
        self.epochs.iter().map(|e| e.dev.auc).reduce(f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub log: TrainLog,
}

/// Summed loss and summed per-slot gradients over `batch`.
///
/// `dropout_seed(i)` seeds the dropout mask of the `i`-th frame of the batch;
/// `None` disables dropout.
pub fn batch_gradient(
    params: &ModelParams,
    batch: &[&FeatureFrame],
    loss: LossKind,
    dropout_seed: Option<&(dyn Fn(usize) -> u64 + Sync)>,
    exec: Execution,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let lens = params.slot_lens();
    let head_width = params.head().map(|h| (h.width(), h.dropout_rate));
    let parts = par::map_chunks(exec, batch, GRAD_CHUNK, |ci, chunk| -> Result<(f64, Vec<Vec<f64>>)> {
        let mut acc: Vec<Vec<f64>> = lens.iter().map(|&n| vec![0.0; n]).collect();
        let mut total = 0.0;
        for (j, frame) in chunk.iter().enumerate() {
            let mask = match (dropout_seed, head_width) {
                (Some(seed), Some((width, rate))) if rate > 0.0 => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed(ci * GRAD_CHUNK + j));
                    Some(dropout_mask(width, rate, &mut rng))
                }
                _ => None,
            };
            let mut tape = Tape::new();
            let out = record_loss(&mut tape, frame, params, mask.as_deref(), loss)?;
            total += tape.value(out)[0];
            tape.backward(out)?.accumulate_into(&mut acc);
        }
        Ok((total, acc))
    });
    let mut total = 0.0;
    let mut grads: Vec<Vec<f64>> = lens.iter().map(|&n| vec![0.0; n]).collect();
    for part in parts {
        let (l, g) = part?;
        total += l;
        for (dst, src) in grads.iter_mut().zip(&g) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
    Ok((total, grads))
}

/// Inference-mode probabilities for `frames`, in order.
pub fn score_frames(params: &ModelParams, frames: &[&FeatureFrame], exec: Execution) -> Result<Vec<ScoredFrame>> {
    par::map_chunks(exec, frames, 256, |_, chunk| {
        chunk
            .iter()
            .map(|f| Ok(ScoredFrame::new(predict_proba(f, params)?, f.label)))
            .collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()
    .map(|v| v.concat())
}

/// How the accuracy/F1 threshold is chosen at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ThresholdMode {
    #[default]
    Fixed,
    /// Maximise F1 on the dev split.
    Dev,
}

impl std::str::FromStr for ThresholdMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fixed" | "0.5" => Ok(ThresholdMode::Fixed),
            "dev" => Ok(ThresholdMode::Dev),
            other => Err(Error::Config(format!("unknown threshold mode '{other}'"))),
        }
    }
}

/// Metrics on `split`, with the threshold picked according to `mode`.
pub fn evaluate(
    params: &ModelParams,
    dataset: &Dataset,
    split: Split,
    mode: ThresholdMode,
    exec: Execution,
) -> Result<MetricReport> {
    let frames = nonempty_split(dataset, split)?;
    let policy = match mode {
        ThresholdMode::Fixed => ThresholdPolicy::default(),
        ThresholdMode::Dev => {
            let dev = nonempty_split(dataset, Split::Dev)?;
            ThresholdPolicy::DevSelected(select_threshold(&score_frames(params, &dev, exec)?)?)
        }
    };
    report(&score_frames(params, &frames, exec)?, policy)
}

fn nonempty_split(dataset: &Dataset, split: Split) -> Result<Vec<&FeatureFrame>> {
    let frames = dataset.frames(split);
    if frames.is_empty() {
        return Err(Error::InvalidInput(format!("{split} split has no frames")));
    }
    Ok(frames)
}

/// Trains `cfg.variant` on the train split and returns the parameters of
/// the epoch with the best dev AUC (earliest on ties).
pub fn train(cfg: &TrainConfig, dataset: &Dataset) -> Result<TrainOutcome> {
    cfg.validate()?;
    let train_frames = nonempty_split(dataset, Split::Train)?;
    let dev_frames = nonempty_split(dataset, Split::Dev)?;
    let spec = cfg.model_spec(dataset.dims);
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[0]));
    let mut params = ModelParams::init(spec, &mut init_rng)?;

    if let ModelBody::Majority { positive_rate } = &mut params.body {
        let pos = train_frames.iter().filter(|f| f.label).count();
        *positive_rate = pos as f64 / train_frames.len() as f64;
        return Ok(TrainOutcome {
            params,
            log: TrainLog::default(),
        });
    }

    let loss = cfg.loss_kind();
    let exec = cfg.execution;
    let mut adam = AdamState::new(&params);
    let mut log = TrainLog::default();
    let mut best: Option<(f64, ModelParams)> = None;
    let mut order: Vec<usize> = (0..train_frames.len()).collect();

    for epoch in 0..cfg.epochs {
        let lr = step_lr(epoch, cfg);
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[1, epoch as u64]));
        order.sort_unstable();
        order.shuffle(&mut shuffle_rng);

        let mut epoch_loss = 0.0;
        for (b, idx) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&FeatureFrame> = idx.iter().map(|&i| train_frames[i]).collect();
            let seed = |i: usize| derive_seed(cfg.seed, &[2, epoch as u64, b as u64, i as u64]);
            let (batch_loss, mut grads) = batch_gradient(&params, &batch, loss, Some(&seed), exec)?;
            epoch_loss += batch_loss;
            let n = batch.len() as f64;
            grads.iter_mut().flatten().for_each(|g| *g /= n);
            if let ModelBody::LinearHinge { linear } = &params.body {
                for (g, w) in grads[0].iter_mut().zip(linear.weights.iter()) {
                    *g += cfg.hinge_l2 * w;
                }
            }
            adam_step(&mut params, &grads, &mut adam, lr, cfg.adam)?;
        }

        let dev = report(&score_frames(&params, &dev_frames, exec)?, ThresholdPolicy::default())?;
        if best.as_ref().is_none_or(|(auc, _)| dev.auc > *auc) {
            best = Some((dev.auc, params.clone()));
            log.selected = Some(epoch);
        }
        log.epochs.push(EpochLog {
            epoch,
            lr,
            train_loss: epoch_loss / train_frames.len() as f64,
            dev,
        });
    }

    if let Some((_, snapshot)) = best {
        params = snapshot;
    }
    Ok(TrainOutcome { params, log })
}
