//! Command-line front end.
//!
//! Every command resolves its settings as defaults, then `--config FILE`
//! (`key = value` lines, `#` comments), then flags, and writes the result to
//! `config.echo` in its output directory. `config.echo` is itself a valid
//! config file.

mod settings;

pub use settings::{parse_config_text, Settings, KEYS};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::fusion::{load_checkpoint, save_checkpoint, ModalityMask, ModelParams, Variant};
use crate::metrics::{project_modality_1d, roc_auc, Modality, REPORT_CSV_HEADER};
use crate::traindata::{generate_corpus, read_dataset, standardize_per_subject, write_dataset, Dataset, Split};
use crate::training::{ablate, ablation_rows, evaluate, score_frames, table_csv, train};

pub const CONFIG_ECHO: &str = "config.echo";
pub const CHECKPOINT: &str = "checkpoint";
pub const TRAIN_LOG: &str = "trainlog.csv";
pub const METRICS: &str = "metrics.csv";
pub const ROC: &str = "roc.csv";

#[derive(Debug, Parser)]
#[command(
    name = "mpfusion",
    version,
    about = "Multimodal polynomial fusion for driver distraction detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus directory.
    Generate(GenerateArgs),
    /// Train one model and write its checkpoint and training log.
    Train(TrainArgs),
    /// Score a checkpoint on the test split.
    Eval(EvalArgs),
    /// Train and test all twelve comparison rows.
    Ablate(AblateArgs),
    /// Export the ROC sweep of a checkpoint.
    Roc(RocArgs),
    /// Export one subject's per-modality 1-D projections.
    Viz1d(VizArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Extra setting, repeatable: `--set lr0=0.01`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub subjects: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Recording length per subject in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// `events` or `interaction`.
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainFlags {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Run data-parallel loops on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub train: TrainFlags,
    /// mpf, nn-cube, nn-tc, nn-early, svm or majority.
    #[arg(long)]
    pub variant: Option<String>,
    /// Modality letters, e.g. `FSC`, `FC`, `S`.
    #[arg(long)]
    pub mask: Option<String>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub train: TrainFlags,
    /// `fixed` (0.5) or `dev` (F1-optimal on the dev split).
    #[arg(long)]
    pub threshold: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub threshold: Option<String>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// train, dev or test.
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Args)]
pub struct VizArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub subject: u32,
}

fn flag<T: ToString>(out: &mut Vec<(String, String)>, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        out.push((key.to_string(), v.to_string()));
    }
}

fn set_pairs(common: &Common) -> Result<Vec<(String, String)>> {
    common
        .set
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))
        })
        .collect()
}

fn train_flag_pairs(t: &TrainFlags, out: &mut Vec<(String, String)>) {
    flag(out, "seed", &t.seed);
    flag(out, "epochs", &t.epochs);
    flag(out, "batch_size", &t.batch_size);
    flag(out, "lr0", &t.lr);
    flag(out, "dropout", &t.dropout);
    if t.sequential {
        out.push(("execution".into(), "sequential".into()));
    }
}

/// Defaults, then the config file, then `--set`, then the typed flags.
fn resolve(command: &str, common: &Common, flags: Vec<(String, String)>) -> Result<Settings> {
    let mut s = Settings::defaults(command);
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (line, key, value) in parse_config_text(&text, path)? {
            s.apply(&key, &value).map_err(|e| Error::Parse {
                file: path.clone(),
                line,
                msg: e.to_string(),
            })?;
        }
    }
    for (k, v) in set_pairs(common)?.into_iter().chain(flags) {
        s.apply(&k, &v)?;
    }
    Ok(s)
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

fn load_data(data: &Path, settings: &Settings) -> Result<Dataset> {
    let ds = read_dataset(data)?;
    Ok(if settings.bool("standardize")? {
        standardize_per_subject(&ds).0
    } else {
        ds
    })
}

fn load_model(path: &Path, ds: &Dataset) -> Result<ModelParams> {
    let params = load_checkpoint(path)?;
    if params.spec.dims != ds.dims {
        return Err(Error::Config(format!(
            "checkpoint expects dims {}/{}/{} but the dataset has {}/{}/{}",
            params.spec.dims.face,
            params.spec.dims.speech,
            params.spec.dims.car,
            ds.dims.face,
            ds.dims.speech,
            ds.dims.car
        )));
    }
    Ok(params)
}

/// Table name of a trained model: MPF-1 / MPF-2 for masked MPF.
pub fn model_label(variant: Variant, mask: ModalityMask) -> String {
    match (variant, mask.count()) {
        (Variant::Mpf, 1) => "MPF-1".into(),
        (Variant::Mpf, 2) => "MPF-2".into(),
        _ => variant.display_name().into(),
    }
}

/// Runs one command; the returned text is what the command prints.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Roc(a) => cmd_roc(a),
        Command::Viz1d(a) => cmd_viz1d(a),
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<String> {
    let mut flags = Vec::new();
    flag(&mut flags, "subjects", &a.subjects);
    flag(&mut flags, "seed", &a.seed);
    flag(&mut flags, "duration_s", &a.duration);
    flag(&mut flags, "mode", &a.mode);
    let s = resolve("generate", &a.common, flags)?;
    let cfg = s.corpus_config()?;
    let ds = generate_corpus(&cfg, s.execution()?)?;
    let out = &a.common.out;
    write_dataset(&ds, out)?;
    write(out, CONFIG_ECHO, &s.echo("generate"))?;
    let (tr, dv, te) = ds.split_sizes();
    Ok(format!(
        "generated {} subjects ({tr}/{dv}/{te} train/dev/test), {} frames, positive fraction {:.4}",
        ds.subjects.len(),
        ds.frame_count(),
        ds.positive_fraction()
    ))
}

fn cmd_train(a: TrainArgs) -> Result<String> {
    let mut flags = Vec::new();
    train_flag_pairs(&a.train, &mut flags);
    flag(&mut flags, "variant", &a.variant);
    flag(&mut flags, "mask", &a.mask);
    let s = resolve("train", &a.common, flags)?;
    let cfg = s.train_config()?;
    let ds = load_data(&a.train.data, &s)?;
    let out = &a.common.out;
    create_out(out)?;
    let outcome = train(&cfg, &ds)?;
    save_checkpoint(&outcome.params, &out.join(CHECKPOINT))?;
    write(out, TRAIN_LOG, &outcome.log.to_csv())?;
    write(out, CONFIG_ECHO, &s.echo("train"))?;
    let mut msg = format!("trained {} ({})", model_label(cfg.variant, cfg.mask), cfg.mask.label());
    if let (Some(e), Some(auc)) = (outcome.log.selected, outcome.log.best_dev_auc()) {
        let _ = write!(msg, ", selected epoch {e} with dev AUC {auc:.4}");
    }
    Ok(msg)
}

fn cmd_eval(a: EvalArgs) -> Result<String> {
    let mut flags = Vec::new();
    flag(&mut flags, "threshold", &a.threshold);
    let s = resolve("eval", &a.common, flags)?;
    let ds = load_data(&a.data, &s)?;
    let params = load_model(&a.checkpoint, &ds)?;
    let report = evaluate(&params, &ds, Split::Test, s.threshold()?, s.execution()?)?;
    let row = report.csv_row(
        &model_label(params.spec.variant, params.spec.mask),
        &params.spec.mask.label(),
    );
    let out = &a.common.out;
    create_out(out)?;
    write(out, METRICS, &format!("{REPORT_CSV_HEADER}\n{row}\n"))?;
    write(out, CONFIG_ECHO, &s.echo("eval"))?;
    Ok(format!("{REPORT_CSV_HEADER}\n{row}"))
}

fn cmd_ablate(a: AblateArgs) -> Result<String> {
    let mut flags = Vec::new();
    train_flag_pairs(&a.train, &mut flags);
    flag(&mut flags, "threshold", &a.threshold);
    let s = resolve("ablate", &a.common, flags)?;
    let cfg = s.train_config()?;
    let ds = load_data(&a.train.data, &s)?;
    let out = &a.common.out;
    create_out(out)?;
    let rows = ablate(&cfg, &ds, &ablation_rows(), s.threshold()?)?;
    let table = table_csv(&rows);
    write(out, METRICS, &table)?;
    write(out, CONFIG_ECHO, &s.echo("ablate"))?;
    Ok(format!(
        "{}\nnote: the SVM row is a linear classifier trained on hinge loss with L2, not a kernel SVM",
        table.trim_end()
    ))
}

fn cmd_roc(a: RocArgs) -> Result<String> {
    let mut flags = Vec::new();
    flag(&mut flags, "split", &a.split);
    let s = resolve("roc", &a.common, flags)?;
    let ds = load_data(&a.data, &s)?;
    let params = load_model(&a.checkpoint, &ds)?;
    let split: Split = s.get("split")?.parse()?;
    let frames = ds.frames(split);
    let (curve, auc) = roc_auc(&score_frames(&params, &frames, s.execution()?)?)?;
    let out = &a.common.out;
    create_out(out)?;
    write(out, ROC, &curve.to_csv())?;
    write(out, CONFIG_ECHO, &s.echo("roc"))?;
    Ok(format!(
        "{} ROC points on the {split} split, AUC {auc:.4}",
        curve.points.len()
    ))
}

fn cmd_viz1d(a: VizArgs) -> Result<String> {
    let s = resolve("viz1d", &a.common, Vec::new())?;
    let ds = read_dataset(&a.data)?;
    let subject = ds
        .subject(a.subject)
        .ok_or_else(|| Error::InvalidInput(format!("subject {} not in dataset", a.subject)))?;
    let series = Modality::ALL
        .iter()
        .map(|m| project_modality_1d(&subject.frames, *m))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("t,face_1d,speech_1d,car_1d,label\n");
    for (i, f) in subject.frames.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            f.t,
            series[0][i],
            series[1][i],
            series[2][i],
            u8::from(f.label)
        );
    }
    let out = &a.common.out;
    create_out(out)?;
    let name = format!("viz1d_subject{}.csv", a.subject);
    write(out, &name, &csv)?;
    write(out, CONFIG_ECHO, &s.echo("viz1d"))?;
    Ok(format!("wrote {} frames to {name}", subject.frames.len()))
}
