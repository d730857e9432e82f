//! Multimodal polynomial fusion (MPF) for frame-level driver distraction
//! detection.
//!
//! The crate is organised bottom-up:
//!
//! * [`diffcore`]: dense vectors/matrices and a reverse-mode operation tape.
//! * [`fusion`]: the polynomial fusion layer, the cube / tanh-cube / early
//!   fusion baselines and the two-layer classifier head.
//! * [`traindata`]: synthetic face/speech/car corpus generation, subject
//!   splits, per-subject standardization and the on-disk dataset format.
//! * [`training`]: loss, Adam, step schedule, the epoch loop and the
//!   ablation table.
//! * [`metrics`]: accuracy, F1, ROC/AUC, EER and 1-D modality projections.
//! * [`cli`]: the `mpfusion` command-line entry point.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and runs sequentially otherwise. Both paths
//! reduce in a fixed order, so results never depend on the thread count.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diffcore;
pub mod error;
pub mod fusion;
pub mod metrics;
pub mod par;
pub mod traindata;
pub mod training;

pub use error::{Error, Result};
