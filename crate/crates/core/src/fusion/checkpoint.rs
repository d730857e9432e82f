//! Text checkpoint format.
//!
//! ```text
//! mpfusion-checkpoint 1
//! variant = mpf
//! mask = FSC
//! dims = 534,12,4
//! hidden = 16
//! head_width = 8
//! dropout = 0.3
//! slots = 9
//! slot proj.face 16 534
//! <rows*cols comma-separated values>
//! ...
//! ```
//!
//! Slots appear in [`ModelParams::slots`] order. Values use Rust's shortest
//! round-trip float formatting, so save followed by load is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{ModalityMask, ModelParams, ModelSpec, Variant};
use crate::diffcore::Parameters;
use crate::error::{Error, Result};
use crate::traindata::FeatureDims;

const MAGIC: &str = "mpfusion-checkpoint 1";

pub fn write_checkpoint(params: &ModelParams) -> String {
    let s = &params.spec;
    let mut out = String::new();
    let slots = params.slots();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "variant = {}", s.variant);
    let _ = writeln!(out, "mask = {}", s.mask);
    let _ = writeln!(out, "dims = {},{},{}", s.dims.face, s.dims.speech, s.dims.car);
    let _ = writeln!(out, "hidden = {}", s.hidden);
    let _ = writeln!(out, "head_width = {}", s.head_width);
    let _ = writeln!(out, "dropout = {}", s.dropout);
    let _ = writeln!(out, "slots = {}", slots.len());
    for (name, rows, cols, values) in slots {
        let _ = writeln!(out, "slot {name} {rows} {cols}");
        let line: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn save_checkpoint(params: &ModelParams, path: &Path) -> Result<()> {
    fs::write(path, write_checkpoint(params)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&text, path)
}

pub fn read_checkpoint(text: &str, origin: &Path) -> Result<ModelParams> {
    let err = |line: usize, msg: String| Error::Parse {
        file: origin.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| err(0, format!("unexpected end of checkpoint, expected {what}")))
    };

    let (ln, magic) = next("header")?;
    if magic.trim() != MAGIC {
        return Err(err(ln, format!("bad header '{magic}'")));
    }
    let mut header = |key: &str| -> Result<(usize, String)> {
        let (ln, l) = next(key)?;
        match l.split_once('=') {
            Some((k, v)) if k.trim() == key => Ok((ln, v.trim().to_string())),
            _ => Err(err(ln, format!("expected '{key} = ...', got '{l}'"))),
        }
    };
    let num = |ln: usize, v: &str| v.parse::<usize>().map_err(|e| err(ln, format!("'{v}': {e}")));

    let (_, variant) = header("variant")?;
    let variant: Variant = variant.parse()?;
    let (_, mask) = header("mask")?;
    let mask: ModalityMask = mask.parse()?;
    let (ln, dims) = header("dims")?;
    let d: Vec<&str> = dims.split(',').collect();
    if d.len() != 3 {
        return Err(err(ln, format!("dims needs three entries, got '{dims}'")));
    }
    let dims = FeatureDims {
        face: num(ln, d[0])?,
        speech: num(ln, d[1])?,
        car: num(ln, d[2])?,
    };
    let (ln, hidden) = header("hidden")?;
    let hidden = num(ln, &hidden)?;
    let (ln, head_width) = header("head_width")?;
    let head_width = num(ln, &head_width)?;
    let (ln, dropout) = header("dropout")?;
    let dropout: f64 = dropout.parse().map_err(|e| err(ln, format!("dropout: {e}")))?;
    let (ln, count) = header("slots")?;
    let count = num(ln, &count)?;

    let spec = ModelSpec {
        variant,
        mask,
        dims,
        hidden,
        head_width,
        dropout,
    };
    let mut params = ModelParams::zeros(spec)?;
    let expected: Vec<(&'static str, usize, usize)> = params.slots().iter().map(|s| (s.0, s.1, s.2)).collect();
    if count != expected.len() {
        return Err(err(
            ln,
            format!("{variant} has {} slots, file declares {count}", expected.len()),
        ));
    }

    for (i, (name, rows, cols)) in expected.into_iter().enumerate() {
        let (ln, l) = next("slot header")?;
        let want = format!("slot {name} {rows} {cols}");
        if l.trim() != want {
            return Err(err(ln, format!("expected '{want}', got '{l}'")));
        }
        let (ln, l) = next("slot values")?;
        let dst = params.slot_mut(i);
        let mut n = 0;
        for (k, tok) in l.split(',').enumerate() {
            if k >= dst.len() {
                return Err(err(ln, format!("slot {name}: more than {} values", dst.len())));
            }
            dst[k] = tok
                .trim()
                .parse()
                .map_err(|e| err(ln, format!("slot {name} value {k} '{tok}': {e}")))?;
            n += 1;
        }
        if n != dst.len() {
            return Err(err(
                ln,
                format!("slot {name}: expected {} values, found {n}", dst.len()),
            ));
        }
    }
    if let Some(head) = params.head_mut() {
        head.dropout_rate = dropout;
    }
    Ok(params)
}
