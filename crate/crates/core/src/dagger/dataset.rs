use std::fmt::Write as _;

use super::DaggerError;
use crate::nn::Example;
use crate::policy::{Action, Observation};

/// Ordered (observation, expert label) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    obs_dim: usize,
    act_dim: usize,
    observations: Vec<Observation>,
    labels: Vec<Action>,
}

impl Dataset {
    pub fn new(obs_dim: usize, act_dim: usize) -> Self {
        Self {
            obs_dim,
            act_dim,
            observations: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn push(&mut self, obs: Observation, label: Action) -> Result<(), DaggerError> {
        if obs.len() != self.obs_dim || label.len() != self.act_dim {
            return Err(DaggerError::Dimension {
                expected: (self.obs_dim, self.act_dim),
                got: (obs.len(), label.len()),
            });
        }
        self.observations.push(obs);
        self.labels.push(label);
        Ok(())
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn labels(&self) -> &[Action] {
        &self.labels
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Observation, &Action)> {
        self.observations.iter().zip(&self.labels)
    }

    /// Appends `other` after the existing pairs.
    pub fn append(&mut self, other: &Dataset) -> Result<(), DaggerError> {
        if (other.obs_dim, other.act_dim) != (self.obs_dim, self.act_dim) {
            return Err(DaggerError::Dimension {
                expected: (self.obs_dim, self.act_dim),
                got: (other.obs_dim, other.act_dim),
            });
        }
        self.observations.extend_from_slice(&other.observations);
        self.labels.extend_from_slice(&other.labels);
        Ok(())
    }

    /// Scaled copies of the observations, kept alive for [`Dataset::examples`].
    pub fn scaled_inputs(&self, scale: f64) -> Vec<Vec<f64>> {
        self.observations
            .iter()
            .map(|o| o.values().iter().map(|v| v * scale).collect())
            .collect()
    }

    /// Training examples pairing `inputs` (one per stored pair) with labels.
    pub fn examples<'a>(&'a self, inputs: &'a [Vec<f64>]) -> Vec<Example<'a>> {
        inputs
            .iter()
            .zip(&self.labels)
            .map(|(x, y)| (x.as_slice(), y.values()))
            .collect()
    }

    /// FNV-1a over dimensions and value bits.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        feed(self.obs_dim as u64);
        feed(self.act_dim as u64);
        for (o, a) in self.pairs() {
            o.values().iter().chain(a.values()).for_each(|v| feed(v.to_bits()));
        }
        h
    }

    /// One pair per line: observation values then label values,
    /// comma-separated, after a `dims` header.
    pub fn to_text(&self) -> String {
        let mut out = format!("dims {} {}\n", self.obs_dim, self.act_dim);
        for (o, a) in self.pairs() {
            let mut first = true;
            for v in o.values().iter().chain(a.values()) {
                if !first {
                    out.push(',');
                }
                first = false;
                write!(out, "{v:e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, DaggerError> {
        let bad = |line: usize, msg: &str| DaggerError::Parse(format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
        let dims: Vec<usize> = header
            .strip_prefix("dims ")
            .ok_or_else(|| bad(1, "expected `dims`"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(1, "bad dimension")))
            .collect::<Result<_, _>>()?;
        let [obs_dim, act_dim] = dims[..] else {
            return Err(bad(1, "expected two dimensions"));
        };
        let mut data = Dataset::new(obs_dim, act_dim);
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let values: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| bad(i + 1, "bad number")))
                .collect::<Result<_, _>>()?;
            if values.len() != obs_dim + act_dim {
                return Err(bad(i + 1, "wrong number of values"));
            }
            let (o, a) = values.split_at(obs_dim);
            data.push(Observation(o.to_vec()), Action(a.to_vec()))?;
        }
        Ok(data)
    }
}

/// `d` followed by `d_i`; duplicates are kept.
pub fn aggregate(d: &Dataset, d_i: &Dataset) -> Result<Dataset, DaggerError> {
    let mut out = d.clone();
    out.append(d_i)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn filled(n: usize, offset: f64) -> Dataset {
        let mut d = Dataset::new(2, 1);
        for i in 0..n {
            let x = i as f64 + offset;
            d.push(Observation(vec![x, -x]), Action::scalar(x * 0.5)).unwrap();
        }
        d
    }

    #[test]
    fn aggregate_with_empty_sides() {
        let empty = Dataset::new(2, 1);
        let d = filled(4, 0.0);
        assert_eq!(aggregate(&empty, &d).unwrap(), d);
        assert_eq!(aggregate(&d, &empty).unwrap(), d);
    }

    #[test]
    fn aggregate_appends_in_order() {
        let (a, b) = (filled(10, 0.0), filled(7, 100.0));
        let c = aggregate(&a, &b).unwrap();
        assert_eq!(c.len(), 17);
        assert_eq!(&c.observations()[..10], a.observations());
        assert_eq!(&c.labels()[10..], b.labels());
    }

    #[test]
    fn duplicates_are_retained() {
        let a = filled(3, 0.0);
        assert_eq!(aggregate(&a, &a).unwrap().len(), 6);
    }

    #[test]
    fn dimension_mismatch() {
        let mut d = Dataset::new(2, 1);
        assert!(d.push(Observation(vec![1.0]), Action::scalar(0.0)).is_err());
        assert!(aggregate(&d, &Dataset::new(3, 1)).is_err());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Dataset::parse("").is_err());
        assert!(Dataset::parse("dims 2 1\n1,2\n").is_err());
        assert!(Dataset::parse("dims 2 1\n1,x,3\n").is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(
            rows in proptest::collection::vec(proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3), 0..20)
        ) {
            let mut d = Dataset::new(2, 1);
            for r in &rows {
                d.push(Observation(r[..2].to_vec()), Action(r[2..].to_vec())).unwrap();
            }
            let back = Dataset::parse(&d.to_text()).unwrap();
            prop_assert_eq!(back.checksum(), d.checksum());
        }
    }
}
