//! Multimodal frame data: schema, synthetic generation, subject splits,
//! per-subject standardization and the on-disk dataset format.

mod generate;
mod io;
mod prep;

pub use generate::{generate_corpus, generate_subject, CorpusConfig, GeneratorMode, ModalityResponse, SubjectProfile};
pub use io::{read_dataset, write_dataset, MANIFEST_FILE};
pub use prep::{label_frames, resample_30hz_to_10hz, split_subjects, standardize_per_subject, SubjectStats};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::diffcore::Vector;
use crate::error::{Error, Result};

/// Frames per second after synchronisation to the speech feature rate.
pub const FRAME_RATE_HZ: f64 = 10.0;

/// Facial feature layout: 68 landmarks in 3-D, gaze vectors and angles,
/// 2 × 28 eye-region landmarks in 2-D and 3-D, 18 action units (intensity and
/// presence), head translation and rotation.
pub const FACE_LANDMARK_DIMS: usize = 204;
pub const FACE_GAZE_DIMS: usize = 8 + 280;
pub const FACE_AU_DIMS: usize = 36;
pub const FACE_POSE_DIMS: usize = 6;
pub const FACE_DIMS: usize = FACE_LANDMARK_DIMS + FACE_GAZE_DIMS + FACE_AU_DIMS + FACE_POSE_DIMS;

/// Pitch, loudness, jitter, shimmer, creaky voice, frame energy, VAD, F0,
/// syllables per second, and three aggregate prosody statistics.
pub const SPEECH_DIMS: usize = 12;

/// Speed (km/h), steering in [-1, 1], gas in [0, 1], brake in [0, 1].
pub const CAR_DIMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureDims {
    pub face: usize,
    pub speech: usize,
    pub car: usize,
}

impl Default for FeatureDims {
    fn default() -> Self {
        Self {
            face: FACE_DIMS,
            speech: SPEECH_DIMS,
            car: CAR_DIMS,
        }
    }
}

impl FeatureDims {
    pub fn total(&self) -> usize {
        self.face + self.speech + self.car
    }

    pub fn validate(&self) -> Result<()> {
        if self.face == 0 || self.speech == 0 || self.car == 0 {
            return Err(Error::Config(format!(
                "every modality needs at least one feature, got {}/{}/{}",
                self.face, self.speech, self.car
            )));
        }
        Ok(())
    }
}

/// One synchronised 10 Hz time step.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame {
    pub subject_id: u32,
    /// Frame index in 10 Hz ticks from the start of the recording.
    pub t: usize,
    pub face: Vector,
    pub speech: Vector,
    pub car: Vector,
    pub label: bool,
}

impl FeatureFrame {
    pub fn new(subject_id: u32, t: usize, face: Vector, speech: Vector, car: Vector, label: bool) -> Result<Self> {
        if face.is_empty() || speech.is_empty() || car.is_empty() {
            return Err(Error::InvalidInput(format!(
                "subject {subject_id} frame {t}: every modality needs at least one value"
            )));
        }
        Ok(Self {
            subject_id,
            t,
            face,
            speech,
            car,
            label,
        })
    }

    pub fn dims(&self) -> FeatureDims {
        FeatureDims {
            face: self.face.len(),
            speech: self.speech.len(),
            car: self.car.len(),
        }
    }
}

/// Closed frame interval annotated as distracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventSpan {
    pub start_t: usize,
    pub end_t: usize,
}

impl EventSpan {
    pub fn new(start_t: usize, end_t: usize) -> Result<Self> {
        if start_t > end_t {
            return Err(Error::InvalidInput(format!(
                "event starts after it ends: [{start_t}, {end_t}]"
            )));
        }
        Ok(Self { start_t, end_t })
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start_t <= t && t <= self.end_t
    }
}

/// A generated distraction episode with the latent responses behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct DistractionEvent {
    pub span: EventSpan,
    /// Peak latent amplitude per modality (face, speech, car); zero when the
    /// modality did not react.
    pub amplitudes: [f64; 3],
    /// Response delay per modality in frames.
    pub lags: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidInput(format!("unknown split '{other}'"))),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// All frames of one driver.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub subject_id: u32,
    pub frames: Vec<FeatureFrame>,
    pub events: Vec<EventSpan>,
}

impl SubjectRecord {
    pub fn positive_count(&self) -> usize {
        self.frames.iter().filter(|f| f.label).count()
    }
}

/// Subject-partitioned frame collection.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dims: FeatureDims,
    pub subjects: Vec<SubjectRecord>,
    pub splits: BTreeMap<u32, Split>,
    pub seed: u64,
    /// Hash of the generator profile that produced the corpus.
    pub profile_hash: String,
}

impl Dataset {
    pub fn subject(&self, id: u32) -> Option<&SubjectRecord> {
        self.subjects.iter().find(|s| s.subject_id == id)
    }

    pub fn subject_ids(&self) -> Vec<u32> {
        self.subjects.iter().map(|s| s.subject_id).collect()
    }

    pub fn split_of(&self, id: u32) -> Option<Split> {
        self.splits.get(&id).copied()
    }

    /// Frames of every subject assigned to `split`, in subject order.
    pub fn frames(&self, split: Split) -> Vec<&FeatureFrame> {
        self.subjects
            .iter()
            .filter(|s| self.split_of(s.subject_id) == Some(split))
            .flat_map(|s| s.frames.iter())
            .collect()
    }

    pub fn split_sizes(&self) -> (usize, usize, usize) {
        let count = |sp| self.splits.values().filter(|&&s| s == sp).count();
        (count(Split::Train), count(Split::Dev), count(Split::Test))
    }

    pub fn frame_count(&self) -> usize {
        self.subjects.iter().map(|s| s.frames.len()).sum()
    }

    pub fn positive_fraction(&self) -> f64 {
        let pos: usize = self.subjects.iter().map(|s| s.positive_count()).sum();
        pos as f64 / self.frame_count().max(1) as f64
    }

    /// Checks that every subject has exactly one split, every frame matches
    /// the declared dims, and labels agree with the event spans.
    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        if self.splits.len() != self.subjects.len() {
            return Err(Error::Integrity(format!(
                "{} subjects but {} split assignments",
                self.subjects.len(),
                self.splits.len()
            )));
        }
        for s in &self.subjects {
            if !self.splits.contains_key(&s.subject_id) {
                return Err(Error::Integrity(format!("subject {} has no split", s.subject_id)));
            }
            for f in &s.frames {
                if f.dims() != self.dims {
                    return Err(Error::Integrity(format!(
                        "subject {} frame {} has dims {:?}, dataset declares {:?}",
                        s.subject_id,
                        f.t,
                        f.dims(),
                        self.dims
                    )));
                }
            }
        }
        Ok(())
    }
}
