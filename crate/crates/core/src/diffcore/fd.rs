use super::Parameters;
use crate::error::{Error, Result};

/// Central-difference gradient of `f` at `params`, one coordinate at a time.
///
/// Used as the independent oracle for [`super::Tape::backward`].
pub fn finite_diff_grad<P, F>(f: F, params: &P, step: f64) -> Result<Vec<Vec<f64>>>
where
    P: Parameters + Clone,
    F: Fn(&P) -> f64,
{
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!(
            "finite-difference step must be > 0, got {step}"
        )));
    }
    let mut probe = params.clone();
    let mut grads = params.zeros_like();
    for (s, grad) in grads.iter_mut().enumerate() {
        for (k, g) in grad.iter_mut().enumerate() {
            let orig = probe.slot(s)[k];
            probe.slot_mut(s)[k] = orig + step;
            let up = f(&probe);
            probe.slot_mut(s)[k] = orig - step;
            let down = f(&probe);
            probe.slot_mut(s)[k] = orig;
            *g = (up - down) / (2.0 * step);
        }
    }
    Ok(grads)
}

/// `|a - b| / max(|a|, |b|, floor)`. The floor keeps coordinates whose true
/// gradient is ~0 from dividing finite-difference noise by nothing.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

pub fn max_relative_error(a: &[Vec<f64>], b: &[Vec<f64>], floor: f64) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| relative_error(*x, *y, floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::{Activation, Tape};

    #[test]
    fn quadratic_derivative() {
        let g = finite_diff_grad(|p: &Vec<f64>| p[0] * p[0], &vec![3.0], 1e-5).unwrap();
        assert!((g[0][0] - 6.0).abs() < 1e-8);
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let g = finite_diff_grad(|_: &Vec<f64>| 4.2, &vec![1.0, -2.0, 0.5], 1e-5).unwrap();
        assert!(g[0].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_bad_step() {
        assert!(finite_diff_grad(|p: &Vec<f64>| p[0], &vec![1.0], 0.0).is_err());
        assert!(finite_diff_grad(|p: &Vec<f64>| p[0], &vec![1.0], f64::NAN).is_err());
    }

    // Toy model: loss = tanh(a * b) * c + c^3, three scalar parameters.
    fn toy_tape_grad(p: &[f64]) -> Vec<Vec<f64>> {
        let params: Vec<Vec<f64>> = p.iter().map(|v| vec![*v]).collect();
        let mut tape = Tape::new();
        let a = tape.param(0, &params[0], 1, 1).unwrap();
        let b = tape.param(1, &params[1], 1, 1).unwrap();
        let c = tape.param(2, &params[2], 1, 1).unwrap();
        let ab = tape.hadamard(a, b).unwrap();
        let t = tape.activate(ab, Activation::Tanh);
        let tc = tape.hadamard(t, c).unwrap();
        let c3 = tape.activate(c, Activation::Cube);
        let loss = tape.add(tc, c3).unwrap();
        tape.backward(loss).unwrap().param_grads(&[1, 1, 1])
    }

    #[test]
    fn agrees_with_backward_on_toy_model() {
        let p = vec![vec![0.4], vec![-0.7], vec![1.3]];
        let f = |q: &Vec<Vec<f64>>| (q[0][0] * q[1][0]).tanh() * q[2][0] + q[2][0].powi(3);
        let fd = finite_diff_grad(f, &p, 1e-5).unwrap();
        let bw = toy_tape_grad(&[0.4, -0.7, 1.3]);
        assert!(max_relative_error(&fd, &bw, 1e-8) < 1e-6);
    }
}
