//! Synthetic face/speech/car recordings with annotated distraction events.
//!
//! Each modality is driven by one scalar latent signal. The latent is a slow
//! AR(1) baseline plus, in [`GeneratorMode::Events`], a plateau bump inside
//! every distraction window for each modality that reacts to that event
//! (head turn, utterance, steering correction), plus unlabelled "confound"
//! bumps. Feature vectors are fixed loadings of the latent plus nuisance
//! structure and noise; the loadings are shared across a corpus so that
//! models generalise across subjects.
//!
//! In [`GeneratorMode::Interaction`] the label is `u_F · u_S · u_C > τ` for
//! three independent latent processes, so only a multiplicative combination
//! of the modality signals predicts it.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use sha2::{Digest, Sha256};

use super::prep::{label_frames, resample_30hz_to_10hz, split_subjects};
use super::{Dataset, DistractionEvent, EventSpan, FeatureDims, FeatureFrame, SubjectRecord, FACE_DIMS, FRAME_RATE_HZ};
use crate::diffcore::Vector;
use crate::error::{Error, Result};
use crate::par::{self, derive_seed, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorMode {
    /// Annotated event windows with correlated per-modality bumps.
    Events,
    /// Label driven by the product of the three modality latents.
    Interaction,
}

impl GeneratorMode {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorMode::Events => "events",
            GeneratorMode::Interaction => "interaction",
        }
    }
}

impl std::str::FromStr for GeneratorMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "events" => Ok(GeneratorMode::Events),
            "interaction" => Ok(GeneratorMode::Interaction),
            other => Err(Error::Config(format!("unknown generator mode '{other}'"))),
        }
    }
}

/// How one modality reacts to distraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalityResponse {
    /// Chance the modality reacts to a given event.
    pub probability: f64,
    /// Mean bump height in latent units.
    pub amplitude: f64,
    /// Delay between event onset and the response, in frames.
    pub lag_frames: usize,
    /// Unlabelled bumps per minute (mirror checks, chatting, lane changes).
    pub confound_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectProfile {
    pub subject_id: u32,
    pub seed: u64,
    /// Seed of the feature loadings; equal for every subject of a corpus.
    pub loading_seed: u64,
    pub duration_s: f64,
    /// Distraction events per minute.
    pub event_rate: f64,
    pub mean_event_s: f64,
    pub face: ModalityResponse,
    pub speech: ModalityResponse,
    pub car: ModalityResponse,
    pub face_noise: f64,
    pub speech_noise: f64,
    pub car_noise: f64,
    pub speech_dims: usize,
    pub mode: GeneratorMode,
    /// Synthesise the face stream at 30 Hz and block-average it to 10 Hz.
    pub face_at_30hz: bool,
    /// Product threshold for [`GeneratorMode::Interaction`].
    pub interaction_threshold: f64,
}

impl Default for SubjectProfile {
    fn default() -> Self {
        Self {
            subject_id: 0,
            seed: 0,
            loading_seed: 0,
            duration_s: 900.0,
            // 6 s events 2.5 times a minute: ~25% distracted frames.
            event_rate: 2.5,
            mean_event_s: 6.0,
            face: ModalityResponse {
                probability: 0.7,
                amplitude: 1.5,
                lag_frames: 0,
                confound_rate: 1.0,
            },
            speech: ModalityResponse {
                probability: 0.7,
                amplitude: 2.0,
                lag_frames: 3,
                confound_rate: 1.0,
            },
            car: ModalityResponse {
                probability: 0.7,
                amplitude: 1.0,
                lag_frames: 5,
                confound_rate: 1.5,
            },
            face_noise: 4.0,
            speech_noise: 1.0,
            car_noise: 1.0,
            speech_dims: super::SPEECH_DIMS,
            mode: GeneratorMode::Events,
            face_at_30hz: false,
            // Upper quartile of a product of three independent N(0, 1).
            interaction_threshold: 0.1948,
        }
    }
}

impl SubjectProfile {
    pub fn n_frames(&self) -> usize {
        (self.duration_s * FRAME_RATE_HZ).round() as usize
    }

    pub fn dims(&self) -> FeatureDims {
        FeatureDims {
            face: FACE_DIMS,
            speech: self.speech_dims,
            car: super::CAR_DIMS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.duration_s > 0.0) || self.n_frames() < 2 {
            return bad(format!(
                "duration must give at least 2 frames, got {} s",
                self.duration_s
            ));
        }
        if !(self.event_rate >= 0.0) || !(self.mean_event_s > 0.0) {
            return bad("event rate must be >= 0 and mean event length > 0".into());
        }
        for (name, r) in [("face", self.face), ("speech", self.speech), ("car", self.car)] {
            if !(0.0..=1.0).contains(&r.probability) || !(r.confound_rate >= 0.0) || !r.amplitude.is_finite() {
                return bad(format!("invalid {name} response {r:?}"));
            }
        }
        if self.speech_dims == 0 {
            return bad("speech needs at least one feature".into());
        }
        if [self.face_noise, self.speech_noise, self.car_noise]
            .iter()
            .any(|n| !(*n >= 0.0))
        {
            return bad("noise scales must be >= 0".into());
        }
        Ok(())
    }

    /// Key-value rendering of every knob except the per-subject id and seed;
    /// two corpora with the same canonical text come from the same profile.
    pub fn canonical(&self) -> String {
        let r =
            |m: &ModalityResponse| format!("{},{},{},{}", m.probability, m.amplitude, m.lag_frames, m.confound_rate);
        format!(
            "loading_seed={}\nduration_s={}\nevent_rate={}\nmean_event_s={}\nface={}\nspeech={}\ncar={}\n\
             noise={},{},{}\nspeech_dims={}\nmode={}\nface_at_30hz={}\ninteraction_threshold={}\n",
            self.loading_seed,
            self.duration_s,
            self.event_rate,
            self.mean_event_s,
            r(&self.face),
            r(&self.speech),
            r(&self.car),
            self.face_noise,
            self.speech_noise,
            self.car_noise,
            self.speech_dims,
            self.mode.name(),
            self.face_at_30hz,
            self.interaction_threshold,
        )
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(&digest[..8])
    }
}

/// Corpus-level generation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub n_subjects: usize,
    pub seed: u64,
    /// Per-subject `subject_id`, `seed` and `loading_seed` are overwritten.
    pub template: SubjectProfile,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            n_subjects: 30,
            seed: 0,
            template: SubjectProfile::default(),
        }
    }
}

impl CorpusConfig {
    pub fn profile_for(&self, subject_id: u32) -> SubjectProfile {
        SubjectProfile {
            subject_id,
            seed: derive_seed(self.seed, &[1, subject_id as u64]),
            loading_seed: derive_seed(self.seed, &[2]),
            ..self.template.clone()
        }
    }
}

/// Generates every subject (in parallel when enabled) and assigns splits.
pub fn generate_corpus(cfg: &CorpusConfig, exec: Execution) -> Result<Dataset> {
    cfg.template.validate()?;
    let ids: Vec<u32> = (0..cfg.n_subjects as u32).collect();
    let splits = split_subjects(&ids, derive_seed(cfg.seed, &[3]))?;
    let generated = par::map(exec, &ids, |_, &id| generate_subject(&cfg.profile_for(id)));
    let mut subjects = Vec::with_capacity(ids.len());
    for (id, g) in ids.iter().zip(generated) {
        let (frames, events) = g?;
        subjects.push(SubjectRecord {
            subject_id: *id,
            frames,
            events: events.into_iter().map(|e| e.span).collect(),
        });
    }
    Ok(Dataset {
        dims: cfg.template.dims(),
        subjects,
        splits,
        seed: cfg.seed,
        profile_hash: cfg.profile_for(0).hash(),
    })
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Unit-variance AR(1) series with lag-one correlation `phi`.
fn ar1(n: usize, phi: f64, rng: &mut impl Rng) -> Vec<f64> {
    let innov = (1.0 - phi * phi).sqrt();
    let mut x = normal(rng);
    (0..n)
        .map(|_| {
            let cur = x;
            x = phi * x + innov * normal(rng);
            cur
        })
        .collect()
}

const RAMP_FRAMES: usize = 5;

/// Adds `height` over `[start, end]` with raised-cosine shoulders outside it.
fn add_plateau(signal: &mut [f64], start: usize, end: usize, height: f64) {
    let n = signal.len();
    if start >= n {
        return;
    }
    let end = end.min(n - 1);
    for v in &mut signal[start..=end] {
        *v += height;
    }
    for k in 1..=RAMP_FRAMES {
        let w = 0.5 * (1.0 + (std::f64::consts::PI * k as f64 / (RAMP_FRAMES + 1) as f64).cos());
        if start >= k {
            signal[start - k] += height * w;
        }
        if end + k < n {
            signal[end + k] += height * w;
        }
    }
}

/// Loadings with unit root-mean-square, shared corpus-wide, then perturbed
/// per subject.
fn loadings(dim: usize, shared: &mut impl Rng, own: &mut impl Rng, jitter: f64) -> Vec<f64> {
    let base: Vec<f64> = (0..dim).map(|_| normal(shared)).collect();
    let rms = (base.iter().map(|v| v * v).sum::<f64>() / dim as f64).sqrt().max(1e-12);
    base.iter().map(|v| v / rms + jitter * normal(own)).collect()
}

struct Latents {
    face: Vec<f64>,
    speech: Vec<f64>,
    car: Vec<f64>,
    /// Steering direction of the active car response (+1 / -1).
    steer_sign: Vec<f64>,
    events: Vec<DistractionEvent>,
}

fn sample_events(p: &SubjectProfile, n: usize, rng: &mut ChaCha8Rng) -> Vec<DistractionEvent> {
    let mut events = Vec::new();
    if p.event_rate <= 0.0 {
        return events;
    }
    let mean_len = p.mean_event_s * FRAME_RATE_HZ;
    let cycle = 60.0 * FRAME_RATE_HZ / p.event_rate;
    let mean_gap = (cycle - mean_len).max(FRAME_RATE_HZ);
    let gap = Exp::new(1.0 / mean_gap).expect("positive rate");
    let min_gap = FRAME_RATE_HZ as usize;
    let mut t = min_gap + gap.sample(rng).round() as usize;
    while t < n {
        let len = ((mean_len * rng.random_range(0.5..1.5)).round() as usize).max(1);
        let end = (t + len - 1).min(n - 1);
        let mut amplitudes = [0.0; 3];
        for (a, r) in amplitudes.iter_mut().zip([p.face, p.speech, p.car]) {
            if rng.random::<f64>() < r.probability {
                *a = r.amplitude * rng.random_range(0.6..1.4);
            }
        }
        events.push(DistractionEvent {
            span: EventSpan { start_t: t, end_t: end },
            amplitudes,
            lags: [p.face.lag_frames, p.speech.lag_frames, p.car.lag_frames],
        });
        t = end + 1 + min_gap + gap.sample(rng).round() as usize;
    }
    events
}

fn event_latents(p: &SubjectProfile, n: usize, rng: &mut ChaCha8Rng) -> Latents {
    let events = sample_events(p, n, rng);
    let mut face: Vec<f64> = ar1(n, 0.97, rng).into_iter().map(|v| 0.35 * v).collect();
    let mut speech: Vec<f64> = ar1(n, 0.9, rng).into_iter().map(|v| 0.35 * v).collect();
    let mut car: Vec<f64> = ar1(n, 0.98, rng).into_iter().map(|v| 0.3 * v).collect();
    let mut steer_sign = vec![1.0; n];

    for e in &events {
        let s = e.span;
        let [af, asp, ac] = e.amplitudes;
        let [lf, ls, lc] = e.lags;
        if af != 0.0 {
            add_plateau(&mut face, s.start_t + lf, s.end_t + lf, af);
        }
        if asp != 0.0 {
            add_plateau(&mut speech, s.start_t + ls, s.end_t + ls, asp);
        }
        if ac != 0.0 {
            add_plateau(&mut car, s.start_t + lc, s.end_t + lc, ac);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let hi = (s.end_t + lc + RAMP_FRAMES).min(n - 1);
            let lo = (s.start_t + lc).saturating_sub(RAMP_FRAMES).min(hi);
            steer_sign[lo..=hi].iter_mut().for_each(|v| *v = sign);
        }
    }

    // Unlabelled look-alike bumps.
    for (signal, r) in [(&mut face, p.face), (&mut speech, p.speech), (&mut car, p.car)] {
        if r.confound_rate <= 0.0 {
            continue;
        }
        let count = (r.confound_rate * n as f64 / (60.0 * FRAME_RATE_HZ)).round() as usize;
        for _ in 0..count {
            let len = rng.random_range(20..80usize);
            let start = rng.random_range(0..n);
            let height = r.amplitude * rng.random_range(0.6..1.4);
            add_plateau(signal, start, start + len, height);
        }
    }

    Latents {
        face,
        speech,
        car,
        steer_sign,
        events,
    }
}

fn interaction_latents(p: &SubjectProfile, n: usize, rng: &mut ChaCha8Rng) -> Result<Latents> {
    let face = ar1(n, 0.97, rng);
    let speech = ar1(n, 0.97, rng);
    let car = ar1(n, 0.98, rng);
    let mut events = Vec::new();
    let mut t = 0;
    while t < n {
        let on = |t: usize| face[t] * speech[t] * car[t] > p.interaction_threshold;
        if on(t) {
            let start = t;
            while t + 1 < n && on(t + 1) {
                t += 1;
            }
            let mean = |v: &[f64]| v[start..=t].iter().sum::<f64>() / (t - start + 1) as f64;
            events.push(DistractionEvent {
                span: EventSpan::new(start, t)?,
                amplitudes: [mean(&face), mean(&speech), mean(&car)],
                lags: [0; 3],
            });
        }
        t += 1;
    }
    Ok(Latents {
        face,
        speech,
        car,
        steer_sign: vec![1.0; n],
        events,
    })
}

/// Generates one subject's frames and events. Deterministic in the profile.
pub fn generate_subject(p: &SubjectProfile) -> Result<(Vec<FeatureFrame>, Vec<DistractionEvent>)> {
    p.validate()?;
    let n = p.n_frames();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut shared = ChaCha8Rng::seed_from_u64(p.loading_seed);

    let lat = match p.mode {
        GeneratorMode::Events => event_latents(p, n, &mut rng),
        GeneratorMode::Interaction => interaction_latents(p, n, &mut rng)?,
    };
    let spans: Vec<EventSpan> = lat.events.iter().map(|e| e.span).collect();
    let labels = label_frames(&spans, n)?;

    // Face: signal loading + a nuisance head-motion factor + per-dim offsets and noise.
    let face_load = loadings(FACE_DIMS, &mut shared, &mut rng, 0.3);
    let face_nuisance_load = loadings(FACE_DIMS, &mut shared, &mut rng, 0.3);
    let face_offset: Vec<f64> = (0..FACE_DIMS).map(|_| 2.0 * normal(&mut rng)).collect();
    let nuisance = ar1(n, 0.95, &mut rng);
    let face_rows = face_features(
        p,
        &lat.face,
        &nuisance,
        &face_load,
        &face_nuisance_load,
        &face_offset,
        &mut rng,
    )?;

    let speech_load = loadings(p.speech_dims, &mut shared, &mut rng, 0.2);
    let speech_offset: Vec<f64> = (0..p.speech_dims).map(|_| normal(&mut rng)).collect();
    let vad_index = 6.min(p.speech_dims - 1);
    let drive = ar1(n, 0.99, &mut rng);
    let wander = ar1(n, 0.9, &mut rng);

    let mut frames = Vec::with_capacity(n);
    for t in 0..n {
        let zs = lat.speech[t];
        let speech: Vec<f64> = (0..p.speech_dims)
            .map(|j| {
                if j == vad_index && p.speech_dims > 1 {
                    let voiced = zs + 0.5 * p.speech_noise * normal(&mut rng);
                    if voiced > 0.6 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    speech_offset[j] + speech_load[j] * zs + p.speech_noise * normal(&mut rng)
                }
            })
            .collect();

        let zc = lat.car[t];
        let cn = p.car_noise;
        let speed = (80.0 + 8.0 * drive[t] - 20.0 * zc + 2.0 * cn * normal(&mut rng)).max(0.0);
        let steering =
            (0.15 * wander[t] + 0.5 * zc * lat.steer_sign[t] + 0.05 * cn * normal(&mut rng)).clamp(-1.0, 1.0);
        let gas = (0.45 + 0.1 * drive[t] - 0.3 * zc + 0.03 * cn * normal(&mut rng)).clamp(0.0, 1.0);
        let brake = (0.5 * zc - 0.15 + 0.03 * cn * normal(&mut rng)).clamp(0.0, 1.0);

        frames.push(FeatureFrame::new(
            p.subject_id,
            t,
            Vector::new(face_rows[t].clone()),
            Vector::new(speech),
            Vector::new(vec![speed, steering, gas, brake]),
            labels[t],
        )?);
    }
    Ok((frames, lat.events))
}

fn face_features(
    p: &SubjectProfile,
    signal: &[f64],
    nuisance: &[f64],
    load: &[f64],
    nuisance_load: &[f64],
    offset: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let n = signal.len();
    if !p.face_at_30hz {
        return Ok((0..n)
            .map(|t| {
                (0..FACE_DIMS)
                    .map(|j| {
                        offset[j] + load[j] * signal[t] + nuisance_load[j] * nuisance[t] + p.face_noise * normal(rng)
                    })
                    .collect()
            })
            .collect());
    }
    // 30 Hz path: latents held across each 10 Hz tick, independent noise per
    // 30 Hz sample (scaled so the block mean has the 10 Hz noise level).
    let noise = p.face_noise * 3f64.sqrt();
    let mut rows = vec![vec![0.0; FACE_DIMS]; n];
    let mut stream = vec![0.0; 3 * n];
    for j in 0..FACE_DIMS {
        for (k, s) in stream.iter_mut().enumerate() {
            let t = k / 3;
            *s = offset[j] + load[j] * signal[t] + nuisance_load[j] * nuisance[t] + noise * normal(rng);
        }
        for (t, v) in resample_30hz_to_10hz(&stream)?.into_iter().enumerate() {
            rows[t][j] = v;
        }
    }
    Ok(rows)
}
