//! Dense 64-bit vector/matrix math and reverse-mode differentiation.
//!
//! The eager functions here ([`linear_map`], [`hadamard`], [`activate`]) are
//! used for inference. Training records the same primitives on a [`Tape`]
//! and replays it backward.

mod fd;
mod tape;

pub use fd::{finite_diff_grad, max_relative_error, relative_error};
pub use tape::{sigmoid, softplus, Gradients, NodeId, Tape};

use crate::error::{Error, Result};

/// A dense column vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn zeros(len: usize) -> Self {
        Self { data: vec![0.0; len] }
    }

    pub fn filled(len: usize, value: f64) -> Self {
        Self { data: vec![value; len] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Elementwise sum, evaluated left to right.
    pub fn add(&self, other: &Vector) -> Result<Vector> {
        check_len("add", self.len(), other.len())?;
        Ok(Vector::new(
            self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector::new(self.data.iter().map(|x| s * x).collect())
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        check_len("dot", self.len(), other.len())?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Self::new(data)
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// A dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims("Matrix::new", rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix by evaluating `f(row, col)` in row-major order.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

/// Elementwise nonlinearities available to every model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    /// `max(0, x)`; the derivative at exactly 0 is taken to be 0.
    Relu,
    Cube,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Cube => x * x * x,
        }
    }

    /// Derivative given the input `x` and the output `y = apply(x)`.
    #[inline]
    pub(crate) fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Cube => 3.0 * x * x,
        }
    }
}

pub(crate) fn check_len(op: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::dims(op, expected, got));
    }
    Ok(())
}

pub(crate) fn matvec_into(w: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    for (r, o) in out.iter_mut().enumerate().take(rows) {
        let row = &w[r * cols..(r + 1) * cols];
        *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// `W·x`.
pub fn linear_map(w: &Matrix, x: &Vector) -> Result<Vector> {
    check_len("linear_map", w.cols, x.len())?;
    let mut out = vec![0.0; w.rows];
    matvec_into(&w.data, w.rows, w.cols, x.as_slice(), &mut out);
    Ok(Vector::new(out))
}

/// Elementwise (Hadamard) product.
pub fn hadamard(a: &Vector, b: &Vector) -> Result<Vector> {
    check_len("hadamard", a.len(), b.len())?;
    Ok(Vector::new(a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect()))
}

pub fn activate(x: &Vector, kind: Activation) -> Vector {
    Vector::new(x.data.iter().map(|&v| kind.apply(v)).collect())
}

/// Flat, ordered access to a model's learnable arrays ("slots").
///
/// Optimizers, gradient checks and checkpoints all walk slots in the same
/// canonical order.
pub trait Parameters {
    fn slot_count(&self) -> usize;
    fn slot(&self, index: usize) -> &[f64];
    fn slot_mut(&mut self, index: usize) -> &mut [f64];

    fn slot_lens(&self) -> Vec<usize> {
        (0..self.slot_count()).map(|i| self.slot(i).len()).collect()
    }

    fn zeros_like(&self) -> Vec<Vec<f64>> {
        self.slot_lens().into_iter().map(|n| vec![0.0; n]).collect()
    }
}

impl Parameters for Vec<f64> {
    fn slot_count(&self) -> usize {
        1
    }
    fn slot(&self, _index: usize) -> &[f64] {
        self
    }
    fn slot_mut(&mut self, _index: usize) -> &mut [f64] {
        self
    }
}

impl Parameters for Vec<Vec<f64>> {
    fn slot_count(&self) -> usize {
        self.len()
    }
    fn slot(&self, index: usize) -> &[f64] {
        &self[index]
    }
    fn slot_mut(&mut self, index: usize) -> &mut [f64] {
        &mut self[index]
    }
}
