//! Fusion layers and the classifier head.
//!
//! Every fused representation is built from per-modality projections
//! `h_m = W_m · x_m` that share the width `|h|`:
//!
//! * MPF: `tanh(α0·hF⊙hS⊙hC + α1·hF⊙hS + α2·hF⊙hC + α3·hS⊙hC + α4·hF + α5·hS + α6·hC + β0)`
//! * NN-Cube: `(hF + hS + hC + β0)^3`
//! * NN-TC: `tanh((hF + hS + hC + β0)^3)`
//! * NN-Early: the raw concatenation `xF ‖ xS ‖ xC`
//!
//! The fused vector then goes through `layer2 · dropout(relu(layer1 · h + b1)) + b2`.
//! The pure functions here and the tape recorder in [`graph`] evaluate in
//! the same order, so both produce bit-identical values.

mod checkpoint;
pub mod graph;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::diffcore::{activate, check_len, hadamard, linear_map, Activation, Matrix, Parameters, Vector};
use crate::error::{Error, Result};
use crate::traindata::{FeatureDims, FeatureFrame};

/// Subset of {face, speech, car} a model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModalityMask {
    pub face: bool,
    pub speech: bool,
    pub car: bool,
}

impl ModalityMask {
    pub const ALL: ModalityMask = ModalityMask {
        face: true,
        speech: true,
        car: true,
    };

    pub fn new(face: bool, speech: bool, car: bool) -> Result<Self> {
        let m = ModalityMask { face, speech, car };
        if m.count() == 0 {
            return Err(Error::Config("modality mask must select at least one modality".into()));
        }
        Ok(m)
    }

    pub fn count(self) -> usize {
        self.face as usize + self.speech as usize + self.car as usize
    }

    pub fn is_all(self) -> bool {
        self.count() == 3
    }

    /// Compact letter form used in files and flags: `F`, `SC`, `FSC`.
    pub fn code(self) -> String {
        let mut s = String::new();
        if self.face {
            s.push('F');
        }
        if self.speech {
            s.push('S');
        }
        if self.car {
            s.push('C');
        }
        s
    }

    /// Table label: `F`, `F + S`, or `All` when every modality is used.
    pub fn label(self) -> String {
        if self.is_all() {
            return "All".into();
        }
        let parts: Vec<String> = self.code().chars().map(String::from).collect();
        parts.join(" + ")
    }
}

impl FromStr for ModalityMask {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(Self::ALL);
        }
        let (mut f, mut sp, mut c) = (false, false, false);
        for ch in s.chars() {
            match ch.to_ascii_uppercase() {
                'F' => f = true,
                'S' => sp = true,
                'C' => c = true,
                '+' | ' ' | ',' => {}
                other => {
                    return Err(Error::Config(format!("unknown modality '{other}' in mask '{s}'")));
                }
            }
        }
        ModalityMask::new(f, sp, c)
    }
}

impl fmt::Display for ModalityMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

/// Model families compared in the ablation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Mpf,
    NnCube,
    NnTanhCube,
    NnEarly,
    /// Linear classifier trained with hinge loss, standing in for the SVM row.
    LinearHinge,
    Majority,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Mpf,
        Variant::NnCube,
        Variant::NnTanhCube,
        Variant::NnEarly,
        Variant::LinearHinge,
        Variant::Majority,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Mpf => "mpf",
            Variant::NnCube => "nn-cube",
            Variant::NnTanhCube => "nn-tc",
            Variant::NnEarly => "nn-early",
            Variant::LinearHinge => "svm",
            Variant::Majority => "majority",
        }
    }

    /// Row name in result tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Variant::Mpf => "MPF",
            Variant::NnCube => "NN-Cube",
            Variant::NnTanhCube => "NN-TC",
            Variant::NnEarly => "NN-Early",
            Variant::LinearHinge => "SVM",
            Variant::Majority => "Majority",
        }
    }

    pub fn uses_projections(self) -> bool {
        matches!(self, Variant::Mpf | Variant::NnCube | Variant::NnTanhCube)
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mpf" => Ok(Variant::Mpf),
            "nn-cube" | "cube" => Ok(Variant::NnCube),
            "nn-tc" | "tc" | "tanh-cube" => Ok(Variant::NnTanhCube),
            "nn-early" | "early" => Ok(Variant::NnEarly),
            "svm" | "linear-hinge" | "hinge" => Ok(Variant::LinearHinge),
            "majority" => Ok(Variant::Majority),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape-level description of a model; everything except the learned values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub variant: Variant,
    pub mask: ModalityMask,
    pub dims: FeatureDims,
    /// Fused representation width `|h|`.
    pub hidden: usize,
    pub head_width: usize,
    pub dropout: f64,
}

impl ModelSpec {
    pub fn new(variant: Variant, mask: ModalityMask, dims: FeatureDims) -> Self {
        Self {
            variant,
            mask,
            dims,
            hidden: 16,
            head_width: 8,
            dropout: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mask.count() == 0 {
            return Err(Error::Config("empty modality mask".into()));
        }
        if self.hidden == 0 || self.head_width == 0 {
            return Err(Error::Config("hidden and head widths must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout rate {} outside [0, 1)", self.dropout)));
        }
        self.dims.validate()
    }

    /// Width of the early-fusion concatenation under this mask.
    pub fn early_width(&self) -> usize {
        let d = self.dims;
        self.mask.face as usize * d.face + self.mask.speech as usize * d.speech + self.mask.car as usize * d.car
    }

    /// Width of the vector entering the classifier head.
    pub fn fused_width(&self) -> usize {
        if self.variant.uses_projections() {
            self.hidden
        } else {
            self.early_width()
        }
    }
}

/// `W_F`, `W_S`, `W_C`; all three map into `|h|` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionParams {
    pub face: Matrix,
    pub speech: Matrix,
    pub car: Matrix,
}

impl ProjectionParams {
    pub fn new(face: Matrix, speech: Matrix, car: Matrix) -> Result<Self> {
        check_len("projection rows", face.rows(), speech.rows())?;
        check_len("projection rows", face.rows(), car.rows())?;
        Ok(Self { face, speech, car })
    }

    pub fn hidden(&self) -> usize {
        self.face.rows()
    }
}

/// The seven interaction weights `α0..α6` and the bias `β0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MpfParams {
    /// Order: FSC, FS, FC, SC, F, S, C.
    pub alphas: [f64; 7],
    pub bias: Vector,
}

impl MpfParams {
    /// Every interaction active with unit weight, zero bias.
    pub fn unit(hidden: usize) -> Self {
        Self {
            alphas: [1.0; 7],
            bias: Vector::zeros(hidden),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub layer1: Matrix,
    pub bias1: Vector,
    /// `1 × width` output row.
    pub layer2: Matrix,
    pub bias2: f64,
    pub dropout_rate: f64,
}

impl HeadParams {
    pub fn zeros(input: usize, width: usize, dropout_rate: f64) -> Self {
        Self {
            layer1: Matrix::zeros(width, input),
            bias1: Vector::zeros(width),
            layer2: Matrix::zeros(1, width),
            bias2: 0.0,
            dropout_rate,
        }
    }

    pub fn width(&self) -> usize {
        self.layer1.rows()
    }

    pub fn input_width(&self) -> usize {
        self.layer1.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearParams {
    pub weights: Vector,
    pub bias: f64,
}

/// Learned values, one shape per variant.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelBody {
    Mpf {
        projections: ProjectionParams,
        mpf: MpfParams,
        head: HeadParams,
    },
    Cube {
        projections: ProjectionParams,
        bias: Vector,
        head: HeadParams,
    },
    TanhCube {
        projections: ProjectionParams,
        bias: Vector,
        head: HeadParams,
    },
    Early {
        head: HeadParams,
    },
    LinearHinge {
        linear: LinearParams,
    },
    Majority {
        positive_rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub spec: ModelSpec,
    pub body: ModelBody,
}

fn uniform_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    let bound = 1.0 / (cols as f64).sqrt();
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-bound..bound))
}

fn init_head(input: usize, spec: &ModelSpec, rng: &mut impl Rng) -> HeadParams {
    HeadParams {
        layer1: uniform_matrix(spec.head_width, input, rng),
        bias1: Vector::zeros(spec.head_width),
        layer2: uniform_matrix(1, spec.head_width, rng),
        bias2: 0.0,
        dropout_rate: spec.dropout,
    }
}

fn init_projections(spec: &ModelSpec, rng: &mut impl Rng) -> ProjectionParams {
    ProjectionParams {
        face: uniform_matrix(spec.hidden, spec.dims.face, rng),
        speech: uniform_matrix(spec.hidden, spec.dims.speech, rng),
        car: uniform_matrix(spec.hidden, spec.dims.car, rng),
    }
}

impl ModelParams {
    /// Fresh parameters: fan-in uniform weights, zero biases, unit alphas.
    pub fn init(spec: ModelSpec, rng: &mut impl Rng) -> Result<Self> {
        spec.validate()?;
        let body = match spec.variant {
            Variant::Mpf => {
                let projections = init_projections(&spec, rng);
                let head = init_head(spec.hidden, &spec, rng);
                ModelBody::Mpf {
                    projections,
                    mpf: MpfParams::unit(spec.hidden),
                    head,
                }
            }
            Variant::NnCube | Variant::NnTanhCube => {
                let projections = init_projections(&spec, rng);
                let head = init_head(spec.hidden, &spec, rng);
                let bias = Vector::zeros(spec.hidden);
                if spec.variant == Variant::NnCube {
                    ModelBody::Cube {
                        projections,
                        bias,
                        head,
                    }
                } else {
                    ModelBody::TanhCube {
                        projections,
                        bias,
                        head,
                    }
                }
            }
            Variant::NnEarly => ModelBody::Early {
                head: init_head(spec.early_width(), &spec, rng),
            },
            Variant::LinearHinge => ModelBody::LinearHinge {
                linear: LinearParams {
                    weights: Vector::zeros(spec.early_width()),
                    bias: 0.0,
                },
            },
            Variant::Majority => ModelBody::Majority { positive_rate: 0.0 },
        };
        Ok(Self { spec, body })
    }

    /// Same shapes as [`ModelParams::init`] with every value zero.
    pub fn zeros(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let proj = || ProjectionParams {
            face: Matrix::zeros(spec.hidden, spec.dims.face),
            speech: Matrix::zeros(spec.hidden, spec.dims.speech),
            car: Matrix::zeros(spec.hidden, spec.dims.car),
        };
        let head = |input| HeadParams::zeros(input, spec.head_width, spec.dropout);
        let body = match spec.variant {
            Variant::Mpf => ModelBody::Mpf {
                projections: proj(),
                mpf: MpfParams {
                    alphas: [0.0; 7],
                    bias: Vector::zeros(spec.hidden),
                },
                head: head(spec.hidden),
            },
            Variant::NnCube => ModelBody::Cube {
                projections: proj(),
                bias: Vector::zeros(spec.hidden),
                head: head(spec.hidden),
            },
            Variant::NnTanhCube => ModelBody::TanhCube {
                projections: proj(),
                bias: Vector::zeros(spec.hidden),
                head: head(spec.hidden),
            },
            Variant::NnEarly => ModelBody::Early {
                head: head(spec.early_width()),
            },
            Variant::LinearHinge => ModelBody::LinearHinge {
                linear: LinearParams {
                    weights: Vector::zeros(spec.early_width()),
                    bias: 0.0,
                },
            },
            Variant::Majority => ModelBody::Majority { positive_rate: 0.0 },
        };
        Ok(Self { spec, body })
    }

    pub fn variant(&self) -> Variant {
        self.spec.variant
    }

    pub fn head(&self) -> Option<&HeadParams> {
        match &self.body {
            ModelBody::Mpf { head, .. }
            | ModelBody::Cube { head, .. }
            | ModelBody::TanhCube { head, .. }
            | ModelBody::Early { head } => Some(head),
            _ => None,
        }
    }

    pub fn head_mut(&mut self) -> Option<&mut HeadParams> {
        match &mut self.body {
            ModelBody::Mpf { head, .. }
            | ModelBody::Cube { head, .. }
            | ModelBody::TanhCube { head, .. }
            | ModelBody::Early { head } => Some(head),
            _ => None,
        }
    }

    /// Named slots in canonical order: `(name, rows, cols, values)`.
    pub fn slots(&self) -> Vec<(&'static str, usize, usize, &[f64])> {
        let mut out = Vec::new();
        type Slot<'a> = (&'static str, usize, usize, &'a [f64]);
        fn proj<'a>(p: &'a ProjectionParams, out: &mut Vec<Slot<'a>>) {
            out.push(("proj.face", p.face.rows(), p.face.cols(), p.face.as_slice()));
            out.push(("proj.speech", p.speech.rows(), p.speech.cols(), p.speech.as_slice()));
            out.push(("proj.car", p.car.rows(), p.car.cols(), p.car.as_slice()));
        }
        fn head<'a>(h: &'a HeadParams, out: &mut Vec<Slot<'a>>) {
            out.push(("head.w1", h.layer1.rows(), h.layer1.cols(), h.layer1.as_slice()));
            out.push(("head.b1", h.bias1.len(), 1, h.bias1.as_slice()));
            out.push(("head.w2", h.layer2.rows(), h.layer2.cols(), h.layer2.as_slice()));
            out.push(("head.b2", 1, 1, std::slice::from_ref(&h.bias2)));
        }
        match &self.body {
            ModelBody::Mpf {
                projections,
                mpf,
                head: h,
            } => {
                proj(projections, &mut out);
                out.push(("mpf.alpha", 7, 1, &mpf.alphas[..]));
                out.push(("mpf.bias", mpf.bias.len(), 1, mpf.bias.as_slice()));
                head(h, &mut out);
            }
            ModelBody::Cube {
                projections,
                bias,
                head: h,
            }
            | ModelBody::TanhCube {
                projections,
                bias,
                head: h,
            } => {
                proj(projections, &mut out);
                out.push(("fusion.bias", bias.len(), 1, bias.as_slice()));
                head(h, &mut out);
            }
            ModelBody::Early { head: h } => head(h, &mut out),
            ModelBody::LinearHinge { linear } => {
                out.push(("linear.w", 1, linear.weights.len(), linear.weights.as_slice()));
                out.push(("linear.b", 1, 1, std::slice::from_ref(&linear.bias)));
            }
            ModelBody::Majority { positive_rate } => {
                out.push(("prior", 1, 1, std::slice::from_ref(positive_rate)));
            }
        }
        out
    }

    fn slots_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        fn proj<'a>(p: &'a mut ProjectionParams, out: &mut Vec<&'a mut [f64]>) {
            out.push(p.face.as_mut_slice());
            out.push(p.speech.as_mut_slice());
            out.push(p.car.as_mut_slice());
        }
        fn head<'a>(h: &'a mut HeadParams, out: &mut Vec<&'a mut [f64]>) {
            out.push(h.layer1.as_mut_slice());
            out.push(h.bias1.as_mut_slice());
            out.push(h.layer2.as_mut_slice());
            out.push(std::slice::from_mut(&mut h.bias2));
        }
        match &mut self.body {
            ModelBody::Mpf {
                projections,
                mpf,
                head: h,
            } => {
                proj(projections, &mut out);
                out.push(&mut mpf.alphas[..]);
                out.push(mpf.bias.as_mut_slice());
                head(h, &mut out);
            }
            ModelBody::Cube {
                projections,
                bias,
                head: h,
            }
            | ModelBody::TanhCube {
                projections,
                bias,
                head: h,
            } => {
                proj(projections, &mut out);
                out.push(bias.as_mut_slice());
                head(h, &mut out);
            }
            ModelBody::Early { head: h } => head(h, &mut out),
            ModelBody::LinearHinge { linear } => {
                out.push(linear.weights.as_mut_slice());
                out.push(std::slice::from_mut(&mut linear.bias));
            }
            ModelBody::Majority { positive_rate } => out.push(std::slice::from_mut(positive_rate)),
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.slots().iter().map(|s| s.3.len()).sum()
    }
}

impl Parameters for ModelParams {
    fn slot_count(&self) -> usize {
        self.slots().len()
    }

    fn slot(&self, index: usize) -> &[f64] {
        self.slots().swap_remove(index).3
    }

    fn slot_mut(&mut self, index: usize) -> &mut [f64] {
        self.slots_mut().swap_remove(index)
    }
}

fn check_frame(frame: &FeatureFrame, dims: FeatureDims) -> Result<()> {
    check_len("face features", dims.face, frame.face.len())?;
    check_len("speech features", dims.speech, frame.speech.len())?;
    check_len("car features", dims.car, frame.car.len())?;
    Ok(())
}

/// `(h_F, h_S, h_C)`; modalities outside `mask` map to the zero vector.
pub fn project_modalities(
    frame: &FeatureFrame,
    p: &ProjectionParams,
    mask: ModalityMask,
) -> Result<(Vector, Vector, Vector)> {
    let h = p.hidden();
    let project = |on: bool, w: &Matrix, x: &Vector| {
        if on {
            linear_map(w, x)
        } else {
            Ok(Vector::zeros(h))
        }
    };
    Ok((
        project(mask.face, &p.face, &frame.face)?,
        project(mask.speech, &p.speech, &frame.speech)?,
        project(mask.car, &p.car, &frame.car)?,
    ))
}

/// The polynomial fusion layer, before the tanh bound.
///
/// Summation order is `(((FSC + FS) + (FC + SC)) + (F + S)) + C + β0`; the
/// pairings keep the result bit-identical when face and speech are swapped
/// together with their weights.
pub fn mpf_fuse(hf: &Vector, hs: &Vector, hc: &Vector, m: &MpfParams) -> Result<Vector> {
    let n = m.bias.len();
    check_len("mpf_fuse face", n, hf.len())?;
    check_len("mpf_fuse speech", n, hs.len())?;
    check_len("mpf_fuse car", n, hc.len())?;
    let a = &m.alphas;
    let out = (0..n)
        .map(|i| {
            let (f, s, c) = (hf[i], hs[i], hc[i]);
            let fs = f * s;
            let tri = a[0] * (fs * c);
            let bi_fs = a[1] * fs;
            let bi_fc = a[2] * (f * c);
            let bi_sc = a[3] * (s * c);
            let uni_f = a[4] * f;
            let uni_s = a[5] * s;
            let uni_c = a[6] * c;
            (tri + bi_fs) + (bi_fc + bi_sc) + (uni_f + uni_s) + uni_c + m.bias[i]
        })
        .collect();
    Ok(Vector::new(out))
}

/// `(hF + hS + hC + β0)^3`, elementwise.
pub fn cube_fuse(hf: &Vector, hs: &Vector, hc: &Vector, bias: &Vector) -> Result<Vector> {
    let z = hf.add(hs)?.add(hc)?.add(bias)?;
    Ok(activate(&z, Activation::Cube))
}

pub fn tanh_cube_fuse(hf: &Vector, hs: &Vector, hc: &Vector, bias: &Vector) -> Result<Vector> {
    Ok(activate(&cube_fuse(hf, hs, hc, bias)?, Activation::Tanh))
}

/// Raw concatenation in F, S, C order restricted to `mask`.
pub fn early_fuse(xf: &Vector, xs: &Vector, xc: &Vector, mask: ModalityMask) -> Vector {
    let mut out = Vec::with_capacity(xf.len() + xs.len() + xc.len());
    if mask.face {
        out.extend_from_slice(xf.as_slice());
    }
    if mask.speech {
        out.extend_from_slice(xs.as_slice());
    }
    if mask.car {
        out.extend_from_slice(xc.as_slice());
    }
    Vector::new(out)
}

/// The fused representation `h_fusion` fed to the classifier head.
pub fn fuse(frame: &FeatureFrame, params: &ModelParams) -> Result<Vector> {
    let spec = &params.spec;
    check_frame(frame, spec.dims)?;
    match &params.body {
        ModelBody::Mpf { projections, mpf, .. } => {
            let (f, s, c) = project_modalities(frame, projections, spec.mask)?;
            Ok(activate(&mpf_fuse(&f, &s, &c, mpf)?, Activation::Tanh))
        }
        ModelBody::Cube { projections, bias, .. } => {
            let (f, s, c) = project_modalities(frame, projections, spec.mask)?;
            cube_fuse(&f, &s, &c, bias)
        }
        ModelBody::TanhCube { projections, bias, .. } => {
            let (f, s, c) = project_modalities(frame, projections, spec.mask)?;
            tanh_cube_fuse(&f, &s, &c, bias)
        }
        ModelBody::Early { .. } | ModelBody::LinearHinge { .. } => {
            Ok(early_fuse(&frame.face, &frame.speech, &frame.car, spec.mask))
        }
        ModelBody::Majority { .. } => Err(Error::Config(
            "the majority baseline has no fused representation".into(),
        )),
    }
}

/// Inverted dropout mask: each unit kept with probability `1 - rate` and
/// scaled by `1 / (1 - rate)`.
pub fn dropout_mask(width: usize, rate: f64, rng: &mut impl Rng) -> Vec<f64> {
    let keep = 1.0 / (1.0 - rate);
    (0..width)
        .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
        .collect()
}

/// Raw logit of the two-layer head. Dropout applies only when `training`.
pub fn classify(h: &Vector, head: &HeadParams, training: bool, rng: &mut impl Rng) -> Result<f64> {
    let mask = (training && head.dropout_rate > 0.0).then(|| dropout_mask(head.width(), head.dropout_rate, rng));
    classify_with_mask(h, head, mask.as_deref())
}

pub(crate) fn classify_with_mask(h: &Vector, head: &HeadParams, mask: Option<&[f64]>) -> Result<f64> {
    let pre = linear_map(&head.layer1, h)?.add(&head.bias1)?;
    let mut a = activate(&pre, Activation::Relu);
    if let Some(mask) = mask {
        a = hadamard(&a, &Vector::new(mask.to_vec()))?;
    }
    Ok(linear_map(&head.layer2, &a)?[0] + head.bias2)
}

/// Inference-mode score. Majority returns the log-odds of its prior.
pub fn logit(frame: &FeatureFrame, params: &ModelParams) -> Result<f64> {
    match &params.body {
        ModelBody::Majority { positive_rate } => Ok((positive_rate / (1.0 - positive_rate)).ln()),
        ModelBody::LinearHinge { linear } => {
            let x = fuse(frame, params)?;
            Ok(linear.weights.dot(&x)? + linear.bias)
        }
        _ => {
            let h = fuse(frame, params)?;
            let head = params.head().expect("neural variants carry a head");
            classify_with_mask(&h, head, None)
        }
    }
}

pub use crate::diffcore::sigmoid;

/// Probability of distraction for one frame.
///
/// Majority returns its constant training prior; the hinge classifier's
/// margin is squashed through the same sigmoid, which is monotone and so
/// leaves its ROC unchanged.
pub fn predict_proba(frame: &FeatureFrame, params: &ModelParams) -> Result<f64> {
    match &params.body {
        ModelBody::Majority { positive_rate } => Ok(*positive_rate),
        _ => Ok(sigmoid(logit(frame, params)?)),
    }
}
