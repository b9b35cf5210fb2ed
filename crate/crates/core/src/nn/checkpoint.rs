//! Plain-text network checkpoints.
//!
//! ```text
//! dims 3 4 1
//! weights 0 <row-major values of layer 0>
//! weights 1 <row-major values of layer 1>
//! biases 0 <values>
//! biases 1 <values>
//! ```
//!
//! Values are written in shortest round-trip exponent form, so a dump and
//! restore reproduces every bit.

use std::fmt::Write as _;

use super::{Layer, Mlp, NetConfig, NnError};

/// Parameters of a network detached from its optimiser state.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

fn bad(msg: impl Into<String>) -> NnError {
    NnError::Checkpoint(msg.into())
}

impl Checkpoint {
    pub fn from_net(net: &Mlp) -> Self {
        Self {
            layer_sizes: net.config().layer_sizes.clone(),
            weights: net.layers().iter().map(|l| l.weights().to_vec()).collect(),
            biases: net.layers().iter().map(|l| l.biases().to_vec()).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("dims");
        for d in &self.layer_sizes {
            write!(out, " {d}").unwrap();
        }
        out.push('\n');
        for (tag, tensors) in [("weights", &self.weights), ("biases", &self.biases)] {
            for (i, values) in tensors.iter().enumerate() {
                write!(out, "{tag} {i}").unwrap();
                for v in values {
                    write!(out, " {v:e}").unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, NnError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let dims_line = lines.next().ok_or_else(|| bad("empty checkpoint"))?;
        let mut fields = dims_line.split_whitespace();
        if fields.next() != Some("dims") {
            return Err(bad("first line must start with `dims`"));
        }
        let layer_sizes = fields
            .map(|f| f.parse::<usize>().map_err(|_| bad(format!("bad dim `{f}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if layer_sizes.len() < 2 {
            return Err(bad("need at least two dims"));
        }
        let n_layers = layer_sizes.len() - 1;

        let mut read_block = |tag: &str, expected_len: &dyn Fn(usize) -> usize| {
            (0..n_layers)
                .map(|i| {
                    let line = lines.next().ok_or_else(|| bad(format!("missing {tag} {i}")))?;
                    let mut f = line.split_whitespace();
                    if f.next() != Some(tag) || f.next() != Some(i.to_string().as_str()) {
                        return Err(bad(format!("expected `{tag} {i}`")));
                    }
                    let values = f
                        .map(|v| v.parse::<f64>().map_err(|_| bad(format!("bad value `{v}`"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    if values.len() != expected_len(i) {
                        return Err(bad(format!("{tag} {i} has {} values", values.len())));
                    }
                    if values.iter().any(|v| !v.is_finite()) {
                        return Err(bad("non-finite parameter"));
                    }
                    Ok(values)
                })
                .collect::<Result<Vec<_>, NnError>>()
        };
        let weights = read_block("weights", &|i| layer_sizes[i] * layer_sizes[i + 1])?;
        let biases = read_block("biases", &|i| layer_sizes[i + 1])?;
        if lines.next().is_some() {
            return Err(bad("trailing content"));
        }
        Ok(Self {
            layer_sizes,
            weights,
            biases,
        })
    }

    /// Rebuilds a network; `config.layer_sizes` must match the checkpoint.
    pub fn into_net(self, config: NetConfig) -> Result<Mlp, NnError> {
        if config.layer_sizes != self.layer_sizes {
            return Err(bad("checkpoint dims differ from config layer_sizes"));
        }
        let layers = self
            .weights
            .into_iter()
            .zip(self.biases)
            .enumerate()
            .map(|(i, (w, b))| {
                let mut l = Layer::zeros(self.layer_sizes[i], self.layer_sizes[i + 1]);
                l.weights = w;
                l.biases = b;
                l
            })
            .collect();
        Mlp::from_layers(config, layers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), scale in -300i32..300) {
            let cfg = NetConfig { layer_sizes: vec![3, 4, 2], ..NetConfig::default() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut net = Mlp::new(cfg.clone(), &mut rng).unwrap();
            let factor = 10f64.powi(scale);
            let scaled: Vec<f64> = net.flat_params().iter().map(|p| p * factor).collect();
            net.set_flat_params(&scaled).unwrap();
            let text = Checkpoint::from_net(&net).to_text();
            let back = Checkpoint::parse(&text).unwrap().into_net(cfg).unwrap();
            let a: Vec<u64> = net.flat_params().iter().map(|p| p.to_bits()).collect();
            let b: Vec<u64> = back.flat_params().iter().map(|p| p.to_bits()).collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_wrong_lengths() {
        let text = "dims 2 1\nweights 0 1.0\nbiases 0 0.0\n";
        assert!(matches!(Checkpoint::parse(text), Err(NnError::Checkpoint(_))));
    }

    #[test]
    fn rejects_mismatched_config() {
        let text = "dims 2 1\nweights 0 1e0 2e0\nbiases 0 0e0\n";
        let ck = Checkpoint::parse(text).unwrap();
        let cfg = NetConfig { layer_sizes: vec![3, 1], ..NetConfig::default() };
        assert!(ck.into_net(cfg).is_err());
    }
}
