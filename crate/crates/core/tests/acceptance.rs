//! Acceptance gate: every criterion runs in order and prints one
//! PASS/FAIL line. The process exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mpfusion::diffcore::{finite_diff_grad, linear_map, max_relative_error, Parameters, Tape, Vector};
use mpfusion::fusion::graph::{record_loss, LossKind};
use mpfusion::fusion::{
    cube_fuse, fuse, load_checkpoint, mpf_fuse, save_checkpoint, ModalityMask, ModelBody, ModelParams, ModelSpec,
    MpfParams, Variant,
};
use mpfusion::metrics::{eer, roc_auc, ScoredFrame};
use mpfusion::par::Execution;
use mpfusion::traindata::{
    generate_corpus, read_dataset, standardize_per_subject, write_dataset, CorpusConfig, Dataset, FeatureDims,
    FeatureFrame, GeneratorMode, Split, SubjectProfile,
};
use mpfusion::training::{ablate, ablation_rows, evaluate, train, ThresholdMode, TrainConfig};

type Verdict = Result<String, String>;
type Check = fn() -> Verdict;

const REFERENCE_SEED: u64 = 7;
const REFERENCE_DURATION_S: f64 = 180.0;

fn ensure(cond: bool, detail: String) -> Verdict {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reference_corpus(mode: GeneratorMode) -> Dataset {
    let cfg = CorpusConfig {
        n_subjects: 30,
        seed: REFERENCE_SEED,
        template: SubjectProfile {
            duration_s: REFERENCE_DURATION_S,
            mode,
            ..SubjectProfile::default()
        },
    };
    generate_corpus(&cfg, Execution::Parallel).expect("reference corpus")
}

fn standardized(mode: GeneratorMode) -> Dataset {
    standardize_per_subject(&reference_corpus(mode)).0
}

// 1 ---------------------------------------------------------------------

/// Draws from the 2^-24 grid in [-1, 1] so the expanded sum can be formed
/// exactly in integers.
fn grid_draw(rng: &mut impl Rng) -> (f64, i128) {
    let k: i64 = rng.random_range(-(1 << 24)..=(1 << 24));
    (k as f64 / (1u64 << 24) as f64, k as i128)
}

fn cube_expansion() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let mut vals = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        let mut ints = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for (v, k) in vals.iter_mut().zip(ints.iter_mut()) {
            for _ in 0..n {
                let (x, i) = grid_draw(&mut rng);
                v.push(x);
                k.push(i);
            }
        }
        let [f, s, c, b] = vals.map(Vector::new);
        let out = cube_fuse(&f, &s, &c, &b).map_err(|e| e.to_string())?;
        for d in 0..n {
            let terms = [ints[0][d], ints[1][d], ints[2][d], ints[3][d]];
            let mut exact: i128 = 0;
            for &x in &terms {
                for &y in &terms {
                    for &z in &terms {
                        exact += x * y * z;
                    }
                }
            }
            let oracle = exact as f64 / 2f64.powi(72);
            let err = if oracle == 0.0 {
                out[d].abs()
            } else {
                (out[d] - oracle).abs() / oracle.abs()
            };
            worst = worst.max(err);
        }
    }
    ensure(
        worst < 1e-10,
        format!("100 instances, max relative error {worst:.2e} (< 1e-10)"),
    )
}

// 2 ---------------------------------------------------------------------

fn random_frame(dims: FeatureDims, rng: &mut impl Rng) -> FeatureFrame {
    let mut draw = |n| Vector::new((0..n).map(|_| rng.random_range(-1.5..1.5)).collect());
    let (f, s, c) = (draw(dims.face), draw(dims.speech), draw(dims.car));
    FeatureFrame::new(0, 0, f, s, c, rng.random::<bool>()).unwrap()
}

/// Fresh parameters with every bias and alpha moved off its initial value.
fn randomized(variant: Variant, rng: &mut impl Rng) -> ModelParams {
    let spec = ModelSpec::new(variant, ModalityMask::ALL, FeatureDims::default());
    let mut params = ModelParams::init(spec, rng).unwrap();
    match &mut params.body {
        ModelBody::Mpf { mpf, .. } => {
            mpf.alphas.iter_mut().for_each(|a| *a = rng.random_range(-1.0..1.0));
            mpf.bias
                .as_mut_slice()
                .iter_mut()
                .for_each(|b| *b = rng.random_range(-0.5..0.5));
        }
        ModelBody::Cube { bias, .. } | ModelBody::TanhCube { bias, .. } => {
            bias.as_mut_slice()
                .iter_mut()
                .for_each(|b| *b = rng.random_range(-0.5..0.5));
        }
        _ => {}
    }
    if let Some(head) = params.head_mut() {
        head.bias1
            .as_mut_slice()
            .iter_mut()
            .for_each(|b| *b = rng.random_range(-0.5..0.5));
        head.bias2 = rng.random_range(-0.5..0.5);
    }
    params
}

fn gradient_check() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let loss = LossKind::Bce { pos_weight: 1.0 };
    let mut lines = Vec::new();
    let mut ok = true;
    for variant in [Variant::Mpf, Variant::NnCube, Variant::NnTanhCube, Variant::NnEarly] {
        let params = randomized(variant, &mut rng);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let frame = random_frame(params.spec.dims, &mut rng);
            let mut tape = Tape::new();
            let out = record_loss(&mut tape, &frame, &params, None, loss).unwrap();
            let analytic = tape.backward(out).unwrap().param_grads(&params.slot_lens());
            let numeric = finite_diff_grad(
                |p: &ModelParams| {
                    let mut t = Tape::new();
                    let o = record_loss(&mut t, &frame, p, None, loss).unwrap();
                    t.value(o)[0]
                },
                &params,
                1e-5,
            )
            .unwrap();
            worst = worst.max(max_relative_error(&analytic, &numeric, 1e-6));
        }
        ok &= worst < 1e-4;
        lines.push(format!("{} {worst:.1e}", variant.name()));
    }
    ensure(
        ok,
        format!("|h|=16, head 8, 10 frames; max rel err {} (< 1e-4)", lines.join(", ")),
    )
}

// 3 ---------------------------------------------------------------------

fn structural_properties() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let n = 16;
    let draw = |rng: &mut ChaCha8Rng| Vector::new((0..n).map(|_| rng.random_range(-2.0..2.0)).collect());
    let mut mismatches = 0usize;
    let trials = 1000;
    for _ in 0..trials {
        let (f, s, c, b) = (draw(&mut rng), draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let a: [f64; 7] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let m = MpfParams {
            alphas: a,
            bias: b.clone(),
        };
        let z = Vector::zeros(n);
        let no_c = mpf_fuse(&f, &s, &z, &m).unwrap();
        let no_f = mpf_fuse(&z, &s, &c, &m).unwrap();
        let no_s = mpf_fuse(&f, &z, &c, &m).unwrap();
        let additive = mpf_fuse(
            &f,
            &s,
            &c,
            &MpfParams {
                alphas: [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
                bias: b.clone(),
            },
        )
        .unwrap();
        for i in 0..n {
            let expect = [
                (a[1] * (f[i] * s[i]) + (a[4] * f[i] + a[5] * s[i])) + b[i],
                ((a[3] * (s[i] * c[i]) + a[5] * s[i]) + a[6] * c[i]) + b[i],
                ((a[2] * (f[i] * c[i]) + a[4] * f[i]) + a[6] * c[i]) + b[i],
                ((f[i] + s[i]) + c[i]) + b[i],
            ];
            let got = [no_c[i], no_f[i], no_s[i], additive[i]];
            mismatches += got.iter().zip(&expect).filter(|(g, e)| g != e).count();
        }
    }

    // Through the model: a zero face projection leaves the S/C residual.
    let mut model_mismatches = 0usize;
    for _ in 0..50 {
        let mut params = randomized(Variant::Mpf, &mut rng);
        let frame = random_frame(params.spec.dims, &mut rng);
        let ModelBody::Mpf { projections, mpf, .. } = &mut params.body else {
            unreachable!()
        };
        projections.face.as_mut_slice().iter_mut().for_each(|w| *w = 0.0);
        let hs = linear_map(&projections.speech, &frame.speech).unwrap();
        let hc = linear_map(&projections.car, &frame.car).unwrap();
        let a = mpf.alphas;
        let h = fuse(&frame, &params).unwrap();
        let ModelBody::Mpf { mpf, .. } = &params.body else {
            unreachable!()
        };
        for i in 0..h.len() {
            let residual = ((a[3] * (hs[i] * hc[i]) + a[5] * hs[i]) + a[6] * hc[i]) + mpf.bias[i];
            model_mismatches += (h[i] != residual.tanh()) as usize;
        }
    }
    ensure(
        mismatches == 0 && model_mismatches == 0,
        format!("{trials} layer instances x 4 identities, 50 model instances; {mismatches} + {model_mismatches} bit mismatches"),
    )
}

// 4 ---------------------------------------------------------------------

fn mann_whitney(scored: &[ScoredFrame]) -> f64 {
    let pos: Vec<f64> = scored.iter().filter(|s| s.label).map(|s| s.score).collect();
    let neg: Vec<f64> = scored.iter().filter(|s| !s.label).map(|s| s.score).collect();
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

fn random_scored(rng: &mut impl Rng, n: usize, grid: Option<f64>) -> Vec<ScoredFrame> {
    loop {
        let rate = rng.random_range(0.1..0.9);
        let out: Vec<ScoredFrame> = (0..n)
            .map(|_| {
                let label = rng.random_bool(rate);
                let raw: f64 = rng.random::<f64>() * 0.7 + if label { 0.3 } else { 0.0 };
                let score = match grid {
                    Some(g) => (raw / g).round() * g,
                    None => raw,
                };
                ScoredFrame::new(score, label)
            })
            .collect();
        if out.iter().any(|s| s.label) && out.iter().any(|s| !s.label) {
            return out;
        }
    }
}

/// EER from a sweep over 10^5 thresholds placed between the 1e-3 grid
/// points, interpolated across the sweep step where fpr - fnr changes sign.
fn brute_force_eer(scored: &[ScoredFrame]) -> f64 {
    let mut pos: Vec<f64> = scored.iter().filter(|s| s.label).map(|s| s.score).collect();
    let mut neg: Vec<f64> = scored.iter().filter(|s| !s.label).map(|s| s.score).collect();
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    let rates = |t: f64| {
        let tp = pos.len() - pos.partition_point(|&x| x < t);
        let fp = neg.len() - neg.partition_point(|&x| x < t);
        (fp as f64 / neg.len() as f64, 1.0 - tp as f64 / pos.len() as f64)
    };
    let mut thresholds = vec![2.0];
    thresholds.extend((0..100_000).rev().map(|k| (k as f64 + 0.5) * 1e-5));
    thresholds.push(-1.0);
    let mut prev = rates(thresholds[0]);
    for &t in &thresholds[1..] {
        let cur = rates(t);
        let (da, db) = (prev.0 - prev.1, cur.0 - cur.1);
        if da == 0.0 {
            return prev.0;
        }
        if da < 0.0 && db >= 0.0 {
            let s = -da / (db - da);
            let fpr = prev.0 + s * (cur.0 - prev.0);
            let fnr = prev.1 + s * (cur.1 - prev.1);
            return (fpr + fnr) / 2.0;
        }
        prev = cur;
    }
    f64::NAN
}

fn metric_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut auc_err = 0.0f64;
    for k in 0..100 {
        let n = rng.random_range(2..=1000);
        let grid = (k % 2 == 0).then_some(0.05);
        let scored = random_scored(&mut rng, n, grid);
        let (_, auc) = roc_auc(&scored).map_err(|e| e.to_string())?;
        auc_err = auc_err.max((auc - mann_whitney(&scored)).abs());
    }
    let mut eer_err = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(50..=1000);
        let scored = random_scored(&mut rng, n, Some(1e-3));
        let (curve, _) = roc_auc(&scored).map_err(|e| e.to_string())?;
        let rate = eer(&curve).map_err(|e| e.to_string())?.rate;
        eer_err = eer_err.max((rate - brute_force_eer(&scored)).abs());
    }
    let hand: Vec<ScoredFrame> = [(0.1, false), (0.4, false), (0.35, true), (0.8, true)]
        .iter()
        .map(|&(s, l)| ScoredFrame::new(s, l))
        .collect();
    let (_, hand_auc) = roc_auc(&hand).map_err(|e| e.to_string())?;
    ensure(
        auc_err < 1e-12 && eer_err < 1e-4 && hand_auc == 0.75,
        format!("AUC vs Mann-Whitney {auc_err:.1e} (< 1e-12), EER vs sweep {eer_err:.1e} (< 1e-4), hand case AUC {hand_auc}"),
    )
}

// 5 ---------------------------------------------------------------------

fn majority_case(ds: &Dataset) -> Result<(f64, f64, f64), String> {
    let cfg = TrainConfig {
        variant: Variant::Majority,
        ..TrainConfig::default()
    };
    let out = train(&cfg, ds).map_err(|e| e.to_string())?;
    let r =
        evaluate(&out.params, ds, Split::Test, ThresholdMode::Fixed, Execution::Parallel).map_err(|e| e.to_string())?;
    let test = ds.frames(Split::Test);
    let p = test.iter().filter(|f| f.label).count() as f64 / test.len() as f64;
    Ok((r.auc, r.accuracy, p.max(1.0 - p)))
}

fn majority_baseline() -> Verdict {
    let mut sets = vec![("reference".to_string(), standardized(GeneratorMode::Events))];
    for seed in [1, 2, 3] {
        let cfg = CorpusConfig {
            n_subjects: 10,
            seed,
            template: SubjectProfile {
                duration_s: 60.0,
                ..SubjectProfile::default()
            },
        };
        sets.push((
            format!("seed {seed}"),
            generate_corpus(&cfg, Execution::Parallel).unwrap(),
        ));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, ds) in &sets {
        let (auc, acc, prior) = majority_case(ds)?;
        ok &= auc == 0.5 && acc == prior;
        parts.push(format!("{name}: AUC {auc}, acc {acc:.4} = prior {prior:.4}"));
    }
    ensure(ok, parts.join("; "))
}

// 6 ---------------------------------------------------------------------

fn end_to_end() -> Verdict {
    let ds = standardized(GeneratorMode::Events);
    let rows: Vec<_> = ablation_rows()
        .into_iter()
        .filter(|r| r.variant == Variant::Mpf)
        .collect();
    let table = ablate(&TrainConfig::default(), &ds, &rows, ThresholdMode::Fixed).map_err(|e| e.to_string())?;
    let best = |k: usize| {
        table
            .iter()
            .filter(|r| r.spec.mask.count() == k)
            .map(|r| r.report.auc)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (m3, m2, m1) = (best(3), best(2), best(1));
    let all: Vec<String> = table
        .iter()
        .map(|r| format!("{} {:.4}", r.spec.mask, r.report.auc))
        .collect();
    ensure(
        m3 >= 0.85 && m3 >= m2 && m2 >= m1,
        format!(
            "seed {REFERENCE_SEED}: MPF {m3:.4} (>= 0.85) >= MPF-2 {m2:.4} >= MPF-1 {m1:.4} [{}]",
            all.join(", ")
        ),
    )
}

// 7 ---------------------------------------------------------------------

fn interaction_advantage() -> Verdict {
    let ds = standardized(GeneratorMode::Interaction);
    let rows: Vec<_> = ablation_rows()
        .into_iter()
        .filter(|r| r.mask.is_all() && matches!(r.variant, Variant::Mpf | Variant::NnEarly))
        .collect();
    let table = ablate(&TrainConfig::default(), &ds, &rows, ThresholdMode::Fixed).map_err(|e| e.to_string())?;
    let auc = |v: Variant| {
        table
            .iter()
            .find(|r| r.spec.variant == v)
            .map(|r| r.report.auc)
            .unwrap()
    };
    let (mpf, early) = (auc(Variant::Mpf), auc(Variant::NnEarly));
    ensure(
        mpf - early >= 0.03,
        format!("MPF {mpf:.4} - NN-Early {early:.4} = {:.4} (>= 0.03)", mpf - early),
    )
}

// 8 ---------------------------------------------------------------------

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn mpfusion(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mpfusion"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn cli_determinism() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for run in ["a", "b"] {
        let root = tmp.path().join(run);
        let p = |s: &str| root.join(s).to_string_lossy().into_owned();
        let (data, trained, ablated) = (p("data"), p("train"), p("ablate"));
        mpfusion(&[
            "generate",
            "--out",
            &data,
            "--subjects",
            "6",
            "--seed",
            "11",
            "--duration",
            "30",
        ])?;
        mpfusion(&[
            "train", "--out", &trained, "--data", &data, "--epochs", "2", "--seed", "5",
        ])?;
        mpfusion(&[
            "ablate", "--out", &ablated, "--data", &data, "--epochs", "1", "--seed", "5",
        ])?;
        runs.push([
            snapshot(Path::new(&data)),
            snapshot(Path::new(&trained)),
            snapshot(Path::new(&ablated)),
        ]);
    }
    let files: usize = runs[0].iter().map(BTreeMap::len).sum();
    let same = runs[0] == runs[1];
    ensure(
        same && files > 0,
        format!("generate/train/ablate twice: {files} files, identical = {same}"),
    )
}

// 9 ---------------------------------------------------------------------

fn standardization() -> Verdict {
    let mut raw = reference_corpus(GeneratorMode::Events);
    // A constant coordinate must come out as zeros.
    raw.subjects[0]
        .frames
        .iter_mut()
        .for_each(|f| f.face.as_mut_slice()[0] = 3.0);
    let (ds, stats) = standardize_per_subject(&raw);
    let (mut worst_mean, mut worst_var, mut degenerate_ok) = (0.0f64, 0.0f64, true);
    for (subject, st) in ds.subjects.iter().zip(&stats) {
        let n = subject.frames.len() as f64;
        let cols: Vec<Vec<f64>> = subject
            .frames
            .iter()
            .map(|f| {
                f.face
                    .iter()
                    .chain(f.speech.iter())
                    .chain(f.car.iter())
                    .copied()
                    .collect()
            })
            .collect();
        for k in 0..cols[0].len() {
            let mean = cols.iter().map(|r| r[k]).sum::<f64>() / n;
            let var = cols.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / n;
            if st.degenerate[k] {
                degenerate_ok &= cols.iter().all(|r| r[k] == 0.0);
            } else {
                worst_mean = worst_mean.max(mean.abs());
                worst_var = worst_var.max((var - 1.0).abs());
            }
        }
    }
    degenerate_ok &= stats[0].degenerate[0];
    ensure(
        worst_mean < 1e-10 && worst_var <= 1e-8 && degenerate_ok,
        format!("max |mean| {worst_mean:.1e} (< 1e-10), max |var - 1| {worst_var:.1e} (<= 1e-8), constant coordinate zeroed = {degenerate_ok}"),
    )
}

// 10 --------------------------------------------------------------------

fn frame_bits(ds: &Dataset) -> Vec<u64> {
    ds.subjects
        .iter()
        .flat_map(|s| &s.frames)
        .flat_map(|f| f.face.iter().chain(f.speech.iter()).chain(f.car.iter()))
        .map(|x| x.to_bits())
        .collect()
}

fn param_bits(p: &ModelParams) -> Vec<u64> {
    let mut bits: Vec<u64> = (0..p.slot_count())
        .flat_map(|s| p.slot(s).to_vec())
        .map(f64::to_bits)
        .collect();
    if let ModelBody::Majority { positive_rate } = p.body {
        bits.push(positive_rate.to_bits());
    }
    bits
}

fn round_trips() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ds = standardized(GeneratorMode::Events);
    let dir = tmp.path().join("data");
    write_dataset(&ds, &dir).map_err(|e| e.to_string())?;
    let back = read_dataset(&dir).map_err(|e| e.to_string())?;
    let data_ok = back == ds && frame_bits(&back) == frame_bits(&ds);

    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut ckpt_ok = true;
    for variant in Variant::ALL {
        let mut params = randomized(variant, &mut rng);
        if let ModelBody::Majority { positive_rate } = &mut params.body {
            *positive_rate = rng.random::<f64>();
        }
        let path = tmp.path().join(format!("{}.ckpt", variant.name()));
        save_checkpoint(&params, &path).map_err(|e| e.to_string())?;
        let loaded = load_checkpoint(&path).map_err(|e| e.to_string())?;
        ckpt_ok &= loaded == params && param_bits(&loaded) == param_bits(&params);
    }
    ensure(
        data_ok && ckpt_ok,
        format!(
            "dataset ({} frames) bit-exact = {data_ok}, checkpoints (6 variants) bit-exact = {ckpt_ok}",
            ds.frame_count()
        ),
    )
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("cube expansion identity", cube_expansion),
        ("gradient correctness", gradient_check),
        ("MPF structural properties", structural_properties),
        ("metric oracles", metric_oracles),
        ("majority baseline", majority_baseline),
        ("end-to-end learning", end_to_end),
        ("interaction advantage", interaction_advantage),
        ("CLI determinism", cli_determinism),
        ("standardization", standardization),
        ("format round-trip", round_trips),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
