use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, EventSpan, FeatureFrame, Split};
use crate::error::{Error, Result};

/// Averages consecutive blocks of three 30 Hz samples into one 10 Hz value.
/// A trailing partial block is averaged over the samples it has.
pub fn resample_30hz_to_10hz(stream: &[f64]) -> Result<Vec<f64>> {
    if stream.is_empty() {
        return Err(Error::InvalidInput("cannot resample an empty stream".into()));
    }
    Ok(stream
        .chunks(3)
        .map(|b| b.iter().sum::<f64>() / b.len() as f64)
        .collect())
}

/// Frame labels from closed event intervals; overlapping events union.
pub fn label_frames(events: &[EventSpan], n_frames: usize) -> Result<Vec<bool>> {
    let mut labels = vec![false; n_frames];
    for e in events {
        if e.start_t > e.end_t || e.end_t >= n_frames {
            return Err(Error::InvalidInput(format!(
                "event [{}, {}] outside {n_frames} frames",
                e.start_t, e.end_t
            )));
        }
        labels[e.start_t..=e.end_t].iter_mut().for_each(|l| *l = true);
    }
    Ok(labels)
}

/// Seeded subject-level partition in the ratio 20:5:5.
///
/// Dev and test each receive `round(n / 6)` subjects (at least one); train
/// takes the remainder. Ids are sorted before shuffling, so the assignment
/// depends only on the id set and the seed.
pub fn split_subjects(subject_ids: &[u32], seed: u64) -> Result<BTreeMap<u32, Split>> {
    let mut ids = subject_ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != subject_ids.len() {
        return Err(Error::InvalidInput("duplicate subject ids".into()));
    }
    let n = ids.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 subjects to split, got {n}"
        )));
    }
    let held_out = ((n as f64 / 6.0).round() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    Ok(ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| {
            let split = if i < held_out {
                Split::Dev
            } else if i < 2 * held_out {
                Split::Test
            } else {
                Split::Train
            };
            (id, split)
        })
        .collect())
}

/// Per-subject statistics over the concatenated `face ‖ speech ‖ car` vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectStats {
    pub subject_id: u32,
    pub mean: Vec<f64>,
    /// Population standard deviation.
    pub std: Vec<f64>,
    /// Coordinates with zero variance; they standardize to 0.
    pub degenerate: Vec<bool>,
}

impl SubjectStats {
    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|d| **d).count()
    }
}

fn subject_stats(subject_id: u32, frames: &[FeatureFrame]) -> SubjectStats {
    let d = frames.first().map(|f| f.dims().total()).unwrap_or(0);
    let n = frames.len().max(1) as f64;
    let mut mean = vec![0.0; d];
    for f in frames {
        for (m, v) in mean.iter_mut().zip(frame_values(f)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for f in frames {
        for ((acc, m), v) in var.iter_mut().zip(&mean).zip(frame_values(f)) {
            let dv = v - m;
            *acc += dv * dv;
        }
    }
    let std: Vec<f64> = var.iter().map(|v| (v / n).sqrt()).collect();
    let degenerate = std
        .iter()
        .zip(&mean)
        .map(|(s, m)| *s <= 1e-12 * m.abs().max(1.0))
        .collect();
    SubjectStats {
        subject_id,
        mean,
        std,
        degenerate,
    }
}

fn frame_values(f: &FeatureFrame) -> impl Iterator<Item = f64> + '_ {
    f.face.iter().chain(f.speech.iter()).chain(f.car.iter()).copied()
}

/// Scales every feature coordinate of every subject to zero mean and unit
/// (population) variance using that subject's own statistics.
pub fn standardize_per_subject(dataset: &Dataset) -> (Dataset, Vec<SubjectStats>) {
    let mut out = dataset.clone();
    let mut all_stats = Vec::with_capacity(out.subjects.len());
    for subject in &mut out.subjects {
        let stats = subject_stats(subject.subject_id, &subject.frames);
        for f in &mut subject.frames {
            let mut k = 0;
            for vec in [&mut f.face, &mut f.speech, &mut f.car] {
                for v in vec.as_mut_slice() {
                    *v = if stats.degenerate[k] {
                        0.0
                    } else {
                        (*v - stats.mean[k]) / stats.std[k]
                    };
                    k += 1;
                }
            }
        }
        all_stats.push(stats);
    }
    (out, all_stats)
}
