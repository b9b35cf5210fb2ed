use super::{Gradients, Mlp, NnError};

/// First and second moment estimates with the bias-correction step count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdamState {
    pub first_moments: Vec<Vec<f64>>,
    pub second_moments: Vec<Vec<f64>>,
    pub step_count: u64,
}

impl AdamState {
    /// Zeroed moments shaped like `net`'s parameters (weights then biases,
    /// one tensor each per layer).
    pub fn new(net: &Mlp) -> Self {
        let shapes: Vec<Vec<f64>> = net
            .layers()
            .iter()
            .flat_map(|l| [vec![0.0; l.weights().len()], vec![0.0; l.biases().len()]])
            .collect();
        Self {
            first_moments: shapes.clone(),
            second_moments: shapes,
            step_count: 0,
        }
    }
}

impl Mlp {
    /// One bias-corrected ADAM update.
    pub fn adam_step(&mut self, grads: &Gradients) -> Result<(), NnError> {
        if !grads.matches(self) {
            return Err(NnError::GradientShape);
        }
        if !grads.is_finite() {
            return Err(NnError::NonFiniteGradient);
        }
        let cfg = self.config.clone();
        let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
        self.adam.step_count += 1;
        let t = self.adam.step_count as i32;
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);

        let tensors = self.layers.iter_mut().zip(&grads.layers).flat_map(|(l, g)| {
            [
                (&mut l.weights, &g.weights),
                (&mut l.biases, &g.biases),
            ]
        });
        for ((params, g), (m, v)) in tensors.zip(
            self.adam
                .first_moments
                .iter_mut()
                .zip(self.adam.second_moments.iter_mut()),
        ) {
            for (((p, &gi), mi), vi) in params.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = flush_subnormal(b1 * *mi + (1.0 - b1) * gi);
                *vi = flush_subnormal(b2 * *vi + (1.0 - b2) * gi * gi);
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
            }
        }
        Ok(())
    }
}

/// Moments of parameters with no gradient decay geometrically; subnormal
/// arithmetic is very slow, so they are cut to zero at the normal range.
fn flush_subnormal(x: f64) -> f64 {
    if x.abs() < f64::MIN_POSITIVE {
        0.0
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::super::{LayerGradients, NetConfig};
    use super::*;

    fn scalar_net(w: f64, lr: f64) -> Mlp {
        let cfg = NetConfig {
            layer_sizes: vec![1, 1],
            dropout: 0.0,
            learning_rate: lr,
            l2_weight: 0.0,
            ..NetConfig::default()
        };
        let layer = Mlp::layer(1, 1, vec![w], vec![0.0]).unwrap();
        Mlp::from_layers(cfg, vec![layer]).unwrap()
    }

    fn grad(w: f64, b: f64) -> Gradients {
        Gradients {
            layers: vec![LayerGradients {
                weights: vec![w],
                biases: vec![b],
            }],
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut net = scalar_net(0.7, 1e-3);
        net.adam_step(&grad(0.0, 0.0)).unwrap();
        assert_eq!(net.flat_params(), vec![0.7, 0.0]);
        assert_eq!(net.adam_state().step_count, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m = 0.1 g, v = 0.001 g^2; m_hat = g, v_hat = g^2, so the step is
        // lr * g / (|g| + eps).
        let g = 2.5;
        let mut net = scalar_net(1.0, 1e-3);
        net.adam_step(&grad(g, -g)).unwrap();
        let expected = 1e-3 * g / (g + 1e-8);
        let p = net.flat_params();
        assert!((1.0 - p[0] - expected).abs() < 1e-15);
        assert!((p[1] - expected).abs() < 1e-15);
        assert!(net.adam_state().second_moments.iter().flatten().all(|&v| v >= 0.0));
    }

    #[test]
    fn rejects_non_finite() {
        let mut net = scalar_net(1.0, 1e-3);
        assert_eq!(net.adam_step(&grad(f64::NAN, 0.0)), Err(NnError::NonFiniteGradient));
        assert_eq!(net.adam_state().step_count, 0);
    }

    #[test]
    fn three_steps_on_quadratic_match_reference_loop() {
        // f(w) = (w - 3)^2, gradient 2 (w - 3). Reference loop coded
        // independently of the tensor plumbing above.
        let (lr, b1, b2, eps) = (0.1, 0.9, 0.999, 1e-8);
        let mut w_ref = 0.5f64;
        let (mut m, mut v) = (0.0f64, 0.0f64);
        for t in 1..=3 {
            let g = 2.0 * (w_ref - 3.0);
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t));
            let vh = v / (1.0 - b2.powi(t));
            w_ref -= lr * mh / (vh.sqrt() + eps);
        }

        let mut net = scalar_net(0.5, lr);
        for _ in 0..3 {
            let w = net.flat_params()[0];
            net.adam_step(&grad(2.0 * (w - 3.0), 0.0)).unwrap();
        }
        assert!((net.flat_params()[0] - w_ref).abs() < 1e-12);
        assert_eq!(net.adam_state().step_count, 3);
    }
}
