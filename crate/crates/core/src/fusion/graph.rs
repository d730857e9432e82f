//! Records a model's forward pass on a [`Tape`] for training.
//!
//! Parameter leaves are registered in [`ModelParams::slots`] order, so slot
//! `i` on the tape is slot `i` of the model.

use std::borrow::Cow;

use super::{early_fuse, ModelBody, ModelParams};
use crate::diffcore::{Activation, NodeId, Tape};
use crate::error::{Error, Result};
use crate::traindata::FeatureFrame;

/// Loss attached by [`record_loss`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    /// Binary cross-entropy on the logit; positives weighted by `pos_weight`.
    Bce { pos_weight: f64 },
    /// `max(0, 1 - y·margin)`.
    Hinge,
}

fn register<'a>(tape: &mut Tape<'a>, params: &'a ModelParams) -> Result<Vec<NodeId>> {
    params
        .slots()
        .into_iter()
        .enumerate()
        .map(|(i, (_, rows, cols, values))| tape.param(i, values, rows, cols))
        .collect()
}

/// Records the logit (or hinge margin) for `frame`.
///
/// `dropout` is the per-unit mask of the head's hidden layer; `None`
/// records the inference path.
pub fn record_logit<'a>(
    tape: &mut Tape<'a>,
    frame: &'a FeatureFrame,
    params: &'a ModelParams,
    dropout: Option<&[f64]>,
) -> Result<NodeId> {
    let spec = &params.spec;
    let slots = register(tape, params)?;
    let hidden = spec.hidden;

    // Projections h_m = W_m x_m; masked modalities are constant zeros.
    let project = |tape: &mut Tape<'a>, on: bool, w: NodeId, x: &'a [f64]| -> Result<NodeId> {
        if on {
            let xn = tape.constant(Cow::Borrowed(x));
            tape.linear_map(w, xn)
        } else {
            Ok(tape.constant(vec![0.0; hidden]))
        }
    };

    let (fused, head_at) = match &params.body {
        ModelBody::Mpf { .. } => {
            let f = project(tape, spec.mask.face, slots[0], frame.face.as_slice())?;
            let s = project(tape, spec.mask.speech, slots[1], frame.speech.as_slice())?;
            let c = project(tape, spec.mask.car, slots[2], frame.car.as_slice())?;
            let (alpha, bias) = (slots[3], slots[4]);
            let fs = tape.hadamard(f, s)?;
            let fsc = tape.hadamard(fs, c)?;
            let fc = tape.hadamard(f, c)?;
            let sc = tape.hadamard(s, c)?;
            let t0 = tape.scale(fsc, alpha, 0)?;
            let t1 = tape.scale(fs, alpha, 1)?;
            let t2 = tape.scale(fc, alpha, 2)?;
            let t3 = tape.scale(sc, alpha, 3)?;
            let t4 = tape.scale(f, alpha, 4)?;
            let t5 = tape.scale(s, alpha, 5)?;
            let t6 = tape.scale(c, alpha, 6)?;
            let tri_bi = tape.add(t0, t1)?;
            let bi = tape.add(t2, t3)?;
            let uni = tape.add(t4, t5)?;
            let acc = tape.add(tri_bi, bi)?;
            let acc = tape.add(acc, uni)?;
            let acc = tape.add(acc, t6)?;
            let acc = tape.add(acc, bias)?;
            (tape.activate(acc, Activation::Tanh), 5)
        }
        ModelBody::Cube { .. } | ModelBody::TanhCube { .. } => {
            let f = project(tape, spec.mask.face, slots[0], frame.face.as_slice())?;
            let s = project(tape, spec.mask.speech, slots[1], frame.speech.as_slice())?;
            let c = project(tape, spec.mask.car, slots[2], frame.car.as_slice())?;
            let z = tape.add(f, s)?;
            let z = tape.add(z, c)?;
            let z = tape.add(z, slots[3])?;
            let cube = tape.activate(z, Activation::Cube);
            let out = if matches!(params.body, ModelBody::TanhCube { .. }) {
                tape.activate(cube, Activation::Tanh)
            } else {
                cube
            };
            (out, 4)
        }
        ModelBody::Early { .. } => {
            let x = early_fuse(&frame.face, &frame.speech, &frame.car, spec.mask);
            (tape.constant(x.into_vec()), 0)
        }
        ModelBody::LinearHinge { .. } => {
            let x = early_fuse(&frame.face, &frame.speech, &frame.car, spec.mask);
            let xn = tape.constant(x.into_vec());
            let m = tape.linear_map(slots[0], xn)?;
            return tape.add(m, slots[1]);
        }
        ModelBody::Majority { .. } => {
            return Err(Error::Config("the majority baseline is not trained by gradient".into()));
        }
    };

    let (w1, b1, w2, b2) = (
        slots[head_at],
        slots[head_at + 1],
        slots[head_at + 2],
        slots[head_at + 3],
    );
    let pre = tape.linear_map(w1, fused)?;
    let pre = tape.add(pre, b1)?;
    let mut a = tape.activate(pre, Activation::Relu);
    if let Some(mask) = dropout {
        let m = tape.constant(mask.to_vec());
        a = tape.hadamard(a, m)?;
    }
    let out = tape.linear_map(w2, a)?;
    tape.add(out, b2)
}

/// Records the per-frame loss for `frame`'s label.
pub fn record_loss<'a>(
    tape: &mut Tape<'a>,
    frame: &'a FeatureFrame,
    params: &'a ModelParams,
    dropout: Option<&[f64]>,
    loss: LossKind,
) -> Result<NodeId> {
    let z = record_logit(tape, frame, params, dropout)?;
    match loss {
        LossKind::Bce { pos_weight } => {
            let w = if frame.label { pos_weight } else { 1.0 };
            tape.bce_with_logits(z, frame.label, w)
        }
        LossKind::Hinge => tape.hinge(z, frame.label),
    }
}
