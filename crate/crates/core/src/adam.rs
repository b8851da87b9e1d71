//! Bias-corrected Adam over a list of parameter buffers.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates, one buffer per parameter buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: u64,
}

impl AdamState {
    pub fn new(sizes: impl IntoIterator<Item = usize>) -> Self {
        let (m, v) = sizes
            .into_iter()
            .map(|n| (vec![0.0; n], vec![0.0; n]))
            .unzip();
        AdamState { m, v, t: 0 }
    }
}

pub fn adam_step(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    cfg: &AdamConfig,
    lr: f64,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Dimension {
            expected: state.m.len(),
            actual: params.len().max(grads.len()),
            context: "adam parameter buffers",
        });
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || p.len() != state.m[i].len() {
            return Err(Error::Dimension {
                expected: state.m[i].len(),
                actual: p.len().max(g.len()),
                context: "adam buffer length",
            });
        }
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let (m, v) = (&mut state.m[i], &mut state.v[i]);
        for j in 0..p.len() {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            p[j] -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_from_fresh_state_is_a_no_op() {
        let mut x = vec![1.5, -2.0];
        let mut st = AdamState::new([2]);
        adam_step(
            &mut [&mut x],
            &[&[0.0, 0.0]],
            &mut st,
            &AdamConfig::default(),
            0.1,
        )
        .unwrap();
        assert_eq!(x, vec![1.5, -2.0]);
        assert_eq!(st.t, 1);
    }

    #[test]
    fn moments_decay_under_zero_gradient() {
        let cfg = AdamConfig::default();
        let mut x = vec![0.0];
        let mut st = AdamState::new([1]);
        adam_step(&mut [&mut x], &[&[1.0]], &mut st, &cfg, 0.01).unwrap();
        let (m, v) = (st.m[0][0], st.v[0][0]);
        adam_step(&mut [&mut x], &[&[0.0]], &mut st, &cfg, 0.01).unwrap();
        assert!((st.m[0][0] - 0.9 * m).abs() < 1e-15);
        assert!((st.v[0][0] - 0.999 * v).abs() < 1e-15);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut x = vec![0.0];
        let mut st = AdamState::new([1]);
        adam_step(
            &mut [&mut x],
            &[&[1.0]],
            &mut st,
            &AdamConfig::default(),
            0.001,
        )
        .unwrap();
        assert!((x[0] + 0.001).abs() < 1e-9);
    }

    #[test]
    fn minimizes_a_parabola() {
        // textbook recurrence, written out independently
        let (b1, b2, eps, lr) = (0.9f64, 0.999f64, 1e-8, 0.1);
        let (mut xr, mut m, mut v) = (1.0f64, 0.0f64, 0.0f64);
        for t in 1..=100 {
            let g = 2.0 * xr;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            xr -= lr * (m / (1.0 - b1.powi(t))) / ((v / (1.0 - b2.powi(t))).sqrt() + eps);
        }

        let mut x = vec![1.0];
        let mut st = AdamState::new([1]);
        for _ in 0..100 {
            let g = [2.0 * x[0]];
            adam_step(&mut [&mut x], &[&g], &mut st, &AdamConfig::default(), lr).unwrap();
        }
        assert_eq!(x[0], xr);
        assert!(x[0].abs() < 0.1, "{}", x[0]);
    }

    #[test]
    fn shape_mismatch() {
        let mut x = vec![0.0; 2];
        let mut st = AdamState::new([2]);
        let cfg = AdamConfig::default();
        assert!(adam_step(&mut [&mut x], &[&[1.0]], &mut st, &cfg, 0.1).is_err());
        let mut st = AdamState::new([2, 1]);
        assert!(adam_step(&mut [&mut x], &[&[1.0, 1.0]], &mut st, &cfg, 0.1).is_err());
    }
}
