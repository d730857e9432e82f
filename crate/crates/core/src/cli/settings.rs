use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fusion::{ModalityMask, Variant};
use crate::par::Execution;
use crate::traindata::{CorpusConfig, GeneratorMode, SubjectProfile};
use crate::training::{AdamConfig, ThresholdMode, TrainConfig};

const GEN: &[&str] = &["generate"];
const FIT: &[&str] = &["train", "ablate"];
const TRAIN: &[&str] = &["train"];
const SCORE: &[&str] = &["train", "ablate", "eval", "roc"];
const THRESHOLD: &[&str] = &["ablate", "eval"];
const ALL: &[&str] = &["generate", "train", "ablate", "eval", "roc"];

/// Every setting key with the commands that read it.
pub const KEYS: &[(&str, &[&str])] = &[
    ("subjects", GEN),
    ("seed", &["generate", "train", "ablate"]),
    ("duration_s", GEN),
    ("mode", GEN),
    ("face_30hz", GEN),
    ("event_rate", GEN),
    ("mean_event_s", GEN),
    ("speech_dims", GEN),
    ("face_noise", GEN),
    ("speech_noise", GEN),
    ("car_noise", GEN),
    ("interaction_threshold", GEN),
    ("variant", TRAIN),
    ("mask", TRAIN),
    ("epochs", FIT),
    ("batch_size", FIT),
    ("lr0", FIT),
    ("lr_step_every", FIT),
    ("lr_decay", FIT),
    ("dropout", FIT),
    ("hidden", FIT),
    ("head_width", FIT),
    ("beta1", FIT),
    ("beta2", FIT),
    ("eps", FIT),
    ("pos_weight", FIT),
    ("hinge_l2", FIT),
    ("standardize", SCORE),
    ("threshold", THRESHOLD),
    ("split", &["roc"]),
    ("execution", ALL),
];

/// Resolved `key = value` settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    command: String,
    values: BTreeMap<&'static str, String>,
}

fn exec_name(e: Execution) -> &'static str {
    match e {
        Execution::Parallel => "parallel",
        Execution::Sequential => "sequential",
    }
}

impl Settings {
    pub fn defaults(command: &str) -> Self {
        let t = TrainConfig::default();
        let p = SubjectProfile::default();
        let c = CorpusConfig::default();
        let seed = if command == "generate" { c.seed } else { t.seed };
        let default = |key: &str| -> String {
            match key {
                "subjects" => c.n_subjects.to_string(),
                "seed" => seed.to_string(),
                "duration_s" => p.duration_s.to_string(),
                "mode" => p.mode.name().into(),
                "face_30hz" => p.face_at_30hz.to_string(),
                "event_rate" => p.event_rate.to_string(),
                "mean_event_s" => p.mean_event_s.to_string(),
                "speech_dims" => p.speech_dims.to_string(),
                "face_noise" => p.face_noise.to_string(),
                "speech_noise" => p.speech_noise.to_string(),
                "car_noise" => p.car_noise.to_string(),
                "interaction_threshold" => p.interaction_threshold.to_string(),
                "variant" => t.variant.name().into(),
                "mask" => t.mask.code(),
                "epochs" => t.epochs.to_string(),
                "batch_size" => t.batch_size.to_string(),
                "lr0" => t.lr0.to_string(),
                "lr_step_every" => t.lr_step_every.to_string(),
                "lr_decay" => t.lr_decay.to_string(),
                "dropout" => t.dropout_rate.to_string(),
                "hidden" => t.hidden.to_string(),
                "head_width" => t.head_width.to_string(),
                "beta1" => t.adam.beta1.to_string(),
                "beta2" => t.adam.beta2.to_string(),
                "eps" => t.adam.eps.to_string(),
                "pos_weight" => t.pos_weight.to_string(),
                "hinge_l2" => t.hinge_l2.to_string(),
                "standardize" => "true".into(),
                "threshold" => "fixed".into(),
                "split" => "test".into(),
                "execution" => exec_name(t.execution).into(),
                other => unreachable!("no default for {other}"),
            }
        };
        let values = KEYS
            .iter()
            .filter(|(_, cmds)| cmds.contains(&command))
            .map(|(k, _)| (*k, default(k)))
            .collect();
        Self {
            command: command.to_string(),
            values,
        }
    }

    /// Overrides `key`. Keys another command reads are accepted and ignored,
    /// so one config file can serve every command.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let Some((k, cmds)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(Error::Config(format!("unknown setting '{key}'")));
        };
        if cmds.contains(&self.command.as_str()) {
            self.values.insert(k, value.trim().to_string());
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Config(format!("setting '{key}' does not apply to {}", self.command)))
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<T> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| Error::Config(format!("invalid value '{v}' for {key}")))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        self.parse(key)
    }

    pub fn execution(&self) -> Result<Execution> {
        match self.get("execution")? {
            "parallel" => Ok(Execution::Parallel),
            "sequential" => Ok(Execution::Sequential),
            other => Err(Error::Config(format!("invalid value '{other}' for execution"))),
        }
    }

    pub fn threshold(&self) -> Result<ThresholdMode> {
        self.get("threshold")?.parse()
    }

    pub fn corpus_config(&self) -> Result<CorpusConfig> {
        let mode: GeneratorMode = self.get("mode")?.parse()?;
        let template = SubjectProfile {
            duration_s: self.parse("duration_s")?,
            mode,
            face_at_30hz: self.bool("face_30hz")?,
            event_rate: self.parse("event_rate")?,
            mean_event_s: self.parse("mean_event_s")?,
            speech_dims: self.parse("speech_dims")?,
            face_noise: self.parse("face_noise")?,
            speech_noise: self.parse("speech_noise")?,
            car_noise: self.parse("car_noise")?,
            interaction_threshold: self.parse("interaction_threshold")?,
            ..SubjectProfile::default()
        };
        template.validate()?;
        Ok(CorpusConfig {
            n_subjects: self.parse("subjects")?,
            seed: self.parse("seed")?,
            template,
        })
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let d = TrainConfig::default();
        let cfg = TrainConfig {
            seed: self.parse("seed")?,
            epochs: self.parse("epochs")?,
            batch_size: self.parse("batch_size")?,
            lr0: self.parse("lr0")?,
            lr_step_every: self.parse("lr_step_every")?,
            lr_decay: self.parse("lr_decay")?,
            dropout_rate: self.parse("dropout")?,
            hidden: self.parse("hidden")?,
            head_width: self.parse("head_width")?,
            variant: match self.get("variant") {
                Ok(v) => v.parse::<Variant>()?,
                Err(_) => d.variant,
            },
            mask: match self.get("mask") {
                Ok(m) => m.parse::<ModalityMask>()?,
                Err(_) => d.mask,
            },
            adam: AdamConfig {
                beta1: self.parse("beta1")?,
                beta2: self.parse("beta2")?,
                eps: self.parse("eps")?,
            },
            pos_weight: self.parse("pos_weight")?,
            hinge_l2: self.parse("hinge_l2")?,
            execution: self.execution()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The effective settings as a config file.
    pub fn echo(&self, command: &str) -> String {
        let mut out = format!("# mpfusion {command}\n");
        for (k, _) in KEYS {
            if let Some(v) = self.values.get(k) {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }
}

/// `(line, key, value)` for every non-blank, non-comment line.
pub fn parse_config_text(text: &str, origin: &Path) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            file: origin.to_path_buf(),
            line: i + 1,
            msg: format!("expected 'key = value', got '{line}'"),
        })?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
