use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Example, Mlp, NnError, DIVERGENCE_LOSS};

/// Outcome of one call to [`Mlp::train`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Mean mini-batch loss of the final epoch.
    pub final_loss: f64,
    /// Mean mini-batch loss of every epoch, in order.
    pub epoch_losses: Vec<f64>,
}

impl Mlp {
    /// Mini-batch ADAM over `train_epochs` shuffled passes.
    ///
    /// ADAM moments are reset first. When `warm_start` is off the parameters
    /// are re-initialised as well. Each example in each batch gets fresh
    /// dropout masks.
    pub fn train<R: Rng + ?Sized>(
        &mut self,
        data: &[Example],
        rng: &mut R,
    ) -> Result<TrainReport, NnError> {
        if data.is_empty() {
            return Err(NnError::EmptyDataset);
        }
        self.check_batch(data)?;
        if !self.config.warm_start {
            self.reinitialize(rng);
        }
        self.reset_optimizer();

        let epochs = self.config.train_epochs;
        let batch_size = self.config.batch_size;
        let dropout = self.config.dropout > 0.0;
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut batch: Vec<Example> = Vec::with_capacity(batch_size);
        let mut epoch_losses = Vec::with_capacity(epochs);

        for _ in 0..epochs {
            order.shuffle(rng);
            let mut total = 0.0;
            let mut batches = 0usize;
            for chunk in order.chunks(batch_size) {
                batch.clear();
                batch.extend(chunk.iter().map(|&i| data[i]));
                let masks = dropout.then(|| {
                    (0..batch.len())
                        .map(|_| self.sample_masks(rng))
                        .collect::<Vec<_>>()
                });
                let (grads, loss) = self.gradients(&batch, masks.as_deref())?;
                if !loss.is_finite() || loss > DIVERGENCE_LOSS {
                    return Err(NnError::Diverged { loss });
                }
                self.adam_step(&grads)?;
                total += loss;
                batches += 1;
            }
            epoch_losses.push(total / batches as f64);
        }

        Ok(TrainReport {
            epochs_run: epochs,
            final_loss: *epoch_losses.last().unwrap(),
            epoch_losses,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::NetConfig;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn learns_linear_map() {
        // Least squares on exact y = 2x data has the closed-form solution
        // w = 2, b = 0.
        let xs: Vec<[f64; 1]> = (0..512).map(|i| [i as f64 / 256.0 - 1.0]).collect();
        let ys: Vec<[f64; 1]> = xs.iter().map(|x| [2.0 * x[0]]).collect();
        let data: Vec<Example> = xs.iter().zip(&ys).map(|(x, y)| (&x[..], &y[..])).collect();
        let cfg = NetConfig {
            layer_sizes: vec![1, 1],
            dropout: 0.0,
            l2_weight: 0.0,
            learning_rate: 1e-2,
            ..NetConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut net = Mlp::new(cfg, &mut rng).unwrap();
        let report = net.train(&data, &mut rng).unwrap();
        assert_eq!(report.epochs_run, 100);
        for (x, y) in &data {
            let p = net.forward_deterministic(x).unwrap()[0];
            assert!((p - y[0]).abs() < 1e-2, "x={} p={p}", x[0]);
        }
    }

    #[test]
    fn repeated_pair_loss_decreases() {
        let x = [0.5, -0.25, 1.0];
        let y = [0.8];
        let data = vec![(&x[..], &y[..]); 64];
        let cfg = NetConfig {
            layer_sizes: vec![3, 8, 1],
            dropout: 0.0,
            train_epochs: 10,
            ..NetConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut net = Mlp::new(cfg, &mut rng).unwrap();
        let mut prev = net.loss(&data).unwrap();
        let report = net.train(&data, &mut rng).unwrap();
        let mut decreases = 0;
        for &l in &report.epoch_losses {
            if l < prev {
                decreases += 1;
            }
            prev = l;
        }
        assert!(decreases >= 9, "{:?}", report.epoch_losses);
    }

    #[test]
    fn deterministic_given_seed() {
        let xs: Vec<[f64; 2]> = (0..50).map(|i| [i as f64 * 0.1, (i % 7) as f64]).collect();
        let ys: Vec<[f64; 1]> = xs.iter().map(|x| [x[0] - 0.3 * x[1]]).collect();
        let data: Vec<Example> = xs.iter().zip(&ys).map(|(x, y)| (&x[..], &y[..])).collect();
        let run = || {
            let cfg = NetConfig {
                layer_sizes: vec![2, 6, 1],
                dropout: 0.0,
                train_epochs: 5,
                ..NetConfig::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let mut net = Mlp::new(cfg, &mut rng).unwrap();
            net.train(&data, &mut rng).unwrap();
            net.flat_params()
        };
        let (a, b) = (run(), run());
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = Mlp::new(NetConfig::novice(2, 1), &mut rng).unwrap();
        assert_eq!(net.train(&[], &mut rng), Err(NnError::EmptyDataset));
    }

    #[test]
    fn divergence_is_reported() {
        let x = [1e5];
        let y = [1e5];
        let data = vec![(&x[..], &y[..])];
        let cfg = NetConfig {
            layer_sizes: vec![1, 1],
            dropout: 0.0,
            ..NetConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut net = Mlp::zeros(cfg).unwrap();
        assert!(matches!(net.train(&data, &mut rng), Err(NnError::Diverged { .. })));
    }
}
