use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::dagger::EpochMetrics;

pub const RESULTS_HEADER: &str =
    "algorithm,epoch,safety_mean,safety_std,learning_mean,learning_std,expert_action_fraction";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algorithm: String,
    pub epoch: u32,
    pub safety_mean: f64,
    pub safety_std: f64,
    pub learning_mean: f64,
    pub learning_std: f64,
    pub expert_action_fraction: f64,
}

impl ResultRow {
    pub fn from_metrics(algorithm: &str, m: &EpochMetrics) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            epoch: m.epoch,
            safety_mean: m.safety_mean,
            safety_std: m.safety_std,
            learning_mean: m.learning_mean,
            learning_std: m.learning_std,
            expert_action_fraction: m.expert_action_fraction,
        }
    }

    fn values(&self) -> [f64; 5] {
        [
            self.safety_mean,
            self.safety_std,
            self.learning_mean,
            self.learning_std,
            self.expert_action_fraction,
        ]
    }
}

/// Rows in algorithm-then-epoch order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

impl ResultsTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Algorithm labels in first-appearance order.
    pub fn algorithms(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.algorithm.as_str()) {
                out.push(&r.algorithm);
            }
        }
        out
    }

    pub fn rows_for<'a>(&'a self, algorithm: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.algorithm == algorithm)
    }

    /// Numbers are written with 17 significant digits so that parsing the
    /// text recovers every value bit for bit.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(RESULTS_HEADER);
        out.push('\n');
        for r in &self.rows {
            write!(out, "{},{}", r.algorithm, r.epoch).unwrap();
            for v in r.values() {
                write!(out, ",{v:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self, ExperimentError> {
        let bad = |line: usize, msg: String| ExperimentError::Parse(format!("results line {line}: {msg}"));
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim_end() == RESULTS_HEADER => {}
            _ => return Err(bad(1, "missing or unexpected header".into())),
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let n = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(bad(n, format!("expected 7 fields, found {}", fields.len())));
            }
            let num = |k: usize| {
                fields[k]
                    .parse::<f64>()
                    .map_err(|_| bad(n, format!("bad number {:?}", fields[k])))
            };
            rows.push(ResultRow {
                algorithm: fields[0].to_string(),
                epoch: fields[1].parse().map_err(|_| bad(n, format!("bad epoch {:?}", fields[1])))?,
                safety_mean: num(2)?,
                safety_std: num(3)?,
                learning_mean: num(4)?,
                learning_std: num(5)?,
                expert_action_fraction: num(6)?,
            });
        }
        Ok(Self { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn finite() -> impl Strategy<Value = f64> {
        any::<f64>().prop_filter("finite", |v| v.is_finite())
    }

    proptest! {
        #[test]
        fn parse_inverts_emit(
            rows in proptest::collection::vec(
                ("[A-Za-z*][A-Za-z0-9*_.-]{0,12}", 0u32..100, finite(), finite(), finite(), finite(), finite()),
                0..12,
            )
        ) {
            let table = ResultsTable {
                rows: rows
                    .into_iter()
                    .map(|(algorithm, epoch, a, b, c, d, e)| ResultRow {
                        algorithm,
                        epoch,
                        safety_mean: a,
                        safety_std: b,
                        learning_mean: c,
                        learning_std: d,
                        expert_action_fraction: e,
                    })
                    .collect(),
            };
            let text = table.to_csv();
            let back = ResultsTable::parse_csv(&text).unwrap();
            prop_assert_eq!(&back, &table);
            prop_assert_eq!(back.to_csv(), text);
        }
    }

    #[test]
    fn format_is_fixed_width_scientific() {
        let t = ResultsTable {
            rows: vec![ResultRow {
                algorithm: "BehaviorCloning".into(),
                epoch: 0,
                safety_mean: 1.0,
                safety_std: 0.0,
                learning_mean: -0.5,
                learning_std: 0.1,
                expert_action_fraction: 1.0,
            }],
        };
        let line = t.to_csv().lines().nth(1).unwrap().to_string();
        assert_eq!(
            line,
            "BehaviorCloning,0,1.0000000000000000e0,0.0000000000000000e0,-5.0000000000000000e-1,\
             1.0000000000000001e-1,1.0000000000000000e0"
        );
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(ResultsTable::parse_csv("").is_err());
        let h = RESULTS_HEADER;
        assert!(ResultsTable::parse_csv(&format!("{h}\nA,0,1,2\n")).is_err());
        assert!(ResultsTable::parse_csv(&format!("{h}\nA,x,1,2,3,4,5\n")).is_err());
    }
}
