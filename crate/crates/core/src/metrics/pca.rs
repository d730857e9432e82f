use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::traindata::FeatureFrame;

const TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 1000;
const START_SEED: u64 = 0x5EED1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Face,
    Speech,
    Car,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Face, Modality::Speech, Modality::Car];

    pub fn values(self, f: &FeatureFrame) -> &[f64] {
        match self {
            Modality::Face => f.face.as_slice(),
            Modality::Speech => f.speech.as_slice(),
            Modality::Car => f.car.as_slice(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// Unit-norm leading eigenvector of the sample covariance.
    pub direction: Vec<f64>,
    /// Projection of each centered row onto `direction`.
    pub scores: Vec<f64>,
    pub eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Leading principal component of `rows` by power iteration on the implicit
/// covariance `Xᵀ X / n` of the column-centered data.
pub fn principal_component(rows: &[Vec<f64>]) -> Result<PcaResult> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("PCA needs at least 2 rows, got {n}")));
    }
    let d = rows[0].len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidInput("PCA rows must share a nonzero width".into()));
    }
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let x: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();

    let project = |v: &[f64]| -> Vec<f64> { x.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect() };

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let len = norm(&v);
    v.iter_mut().for_each(|e| *e /= len);

    let mut eigenvalue = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let xv = project(&v);
        let mut w = vec![0.0; d];
        for (r, s) in x.iter().zip(&xv) {
            for (acc, a) in w.iter_mut().zip(r) {
                *acc += a * s;
            }
        }
        w.iter_mut().for_each(|e| *e /= n as f64);
        eigenvalue = norm(&w);
        if eigenvalue <= f64::MIN_POSITIVE {
            return Err(Error::InvalidInput("PCA input has zero variance".into()));
        }
        w.iter_mut().for_each(|e| *e /= eigenvalue);
        let delta = w.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        v = w;
        if delta < TOLERANCE {
            converged = true;
            break;
        }
    }
    let scores = project(&v);
    Ok(PcaResult {
        direction: v,
        scores,
        eigenvalue,
        iterations,
        converged,
    })
}

/// One subject's modality reduced to a single time series in `[-1, 1]`.
///
/// Features are standardized per coordinate, projected onto their first
/// principal component, scaled so the largest magnitude is 1, and signed so
/// that largest-magnitude entry is positive.
pub fn project_modality_1d(frames: &[FeatureFrame], modality: Modality) -> Result<Vec<f64>> {
    let n = frames.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 frames, got {n}")));
    }
    let d = modality.values(&frames[0]).len();
    let mut cols_mean = vec![0.0; d];
    for f in frames {
        for (m, v) in cols_mean.iter_mut().zip(modality.values(f)) {
            *m += v;
        }
    }
    cols_mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cols_std = vec![0.0; d];
    for f in frames {
        for ((s, m), v) in cols_std.iter_mut().zip(&cols_mean).zip(modality.values(f)) {
            *s += (v - m) * (v - m);
        }
    }
    cols_std.iter_mut().for_each(|s| *s = (*s / n as f64).sqrt());
    let live: Vec<bool> = cols_std
        .iter()
        .zip(&cols_mean)
        .map(|(s, m)| *s > 1e-12 * m.abs().max(1.0))
        .collect();
    if !live.iter().any(|l| *l) {
        return Err(Error::InvalidInput(format!("{modality:?} features have zero variance")));
    }
    let rows: Vec<Vec<f64>> = frames
        .iter()
        .map(|f| {
            modality
                .values(f)
                .iter()
                .enumerate()
                .map(|(j, v)| if live[j] { (v - cols_mean[j]) / cols_std[j] } else { 0.0 })
                .collect()
        })
        .collect();

    let pc = principal_component(&rows)?;
    let peak = pc
        .scores
        .iter()
        .fold(0.0f64, |best, &v| if v.abs() > best.abs() { v } else { best });
    if peak == 0.0 {
        return Err(Error::InvalidInput(format!(
            "{modality:?} projection is identically zero"
        )));
    }
    Ok(pc.scores.iter().map(|s| (s / peak).clamp(-1.0, 1.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::Vector;
    use rand::Rng;

    #[test]
    fn rank_one_direction_is_recovered() {
        let u = [0.3, -1.2, 0.8, 2.0];
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let c = (i as f64 * 0.7).sin() * 3.0 + 1.0;
                u.iter().map(|x| c * x).collect()
            })
            .collect();
        let pc = principal_component(&rows).unwrap();
        let cos = pc.direction.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() / norm(&u);
        assert!(cos.abs() > 1.0 - 1e-8, "cos = {cos}");
        assert!(pc.converged);
    }

    #[test]
    fn projection_is_normalised_and_signed() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let frames: Vec<FeatureFrame> = (0..50)
            .map(|t| {
                let z: f64 = rng.random_range(-1.0..1.0);
                FeatureFrame::new(
                    0,
                    t,
                    Vector::new(vec![z, 2.0 * z + 0.1 * rng.random::<f64>(), 5.0]),
                    Vector::new(vec![1.0]),
                    Vector::new(vec![0.0]),
                    false,
                )
                .unwrap()
            })
            .collect();
        let s = project_modality_1d(&frames, Modality::Face).unwrap();
        let peak = s
            .iter()
            .cloned()
            .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        assert_eq!(peak, 1.0);
        assert!(s.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!(project_modality_1d(&frames, Modality::Speech).is_err());
        assert!(project_modality_1d(&frames[..1], Modality::Face).is_err());
    }
}
