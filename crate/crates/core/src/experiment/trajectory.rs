use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::dagger::Rollout;

pub const TRAJECTORY_HEADER: &str = "t,x,y,theta,u,actor,reward";

/// One row of a trajectory dump. The last row of an episode holds the
/// terminal pose with actor `end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub u: f64,
    pub actor: String,
    pub reward: f64,
}

pub fn trajectory_rows<S>(rollout: &Rollout<S>, dt: f64) -> Vec<TrajectoryRow> {
    let mut rows: Vec<TrajectoryRow> = rollout
        .steps
        .iter()
        .map(|s| TrajectoryRow {
            t: s.t as f64 * dt,
            x: s.pose.x,
            y: s.pose.y,
            theta: s.pose.theta,
            u: s.executed.values().first().copied().unwrap_or(0.0),
            actor: s.actor.as_str().to_string(),
            reward: s.reward,
        })
        .collect();
    let p = rollout.final_pose;
    rows.push(TrajectoryRow {
        t: rollout.steps.len() as f64 * dt,
        x: p.x,
        y: p.y,
        theta: p.theta,
        u: 0.0,
        actor: "end".into(),
        reward: 0.0,
    });
    rows
}

pub fn trajectory_to_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            r.t, r.x, r.y, r.theta, r.u, r.actor, r.reward
        )
        .unwrap();
    }
    out
}

pub fn parse_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRow>, ExperimentError> {
    let bad = |line: usize, msg: &str| ExperimentError::Parse(format!("trajectory line {line}: {msg}"));
    let mut lines = text.lines();
    if lines.next().map(str::trim_end) != Some(TRAJECTORY_HEADER) {
        return Err(bad(1, "missing or unexpected header"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad(i + 2, "expected 7 fields"));
        }
        let num = |k: usize| f[k].trim().parse::<f64>().map_err(|_| bad(i + 2, "bad number"));
        rows.push(TrajectoryRow {
            t: num(0)?,
            x: num(1)?,
            y: num(2)?,
            theta: num(3)?,
            u: num(4)?,
            actor: f[5].trim().to_string(),
            reward: num(6)?,
        });
    }
    if rows.is_empty() {
        return Err(ExperimentError::EmptyTable);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dagger::rollout_combined;
    use crate::env::{DubinsEnv, DubinsExpert, DubinsRoomConfig};
    use crate::rules::DecisionRule;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn expert_episode_round_trips() {
        let cfg = DubinsRoomConfig::default();
        let expert = DubinsExpert::new(&cfg);
        let mut env = DubinsEnv::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = rollout_combined(&mut env, &expert, None, &DecisionRule::BehaviorCloning, 0, 3, 300, &mut rng).unwrap();
        let rows = trajectory_rows(&r, 0.1);
        assert_eq!(rows.len(), r.steps.len() + 1);
        assert_eq!(rows.last().unwrap().actor, "end");
        assert_eq!(rows.iter().map(|r| r.reward).sum::<f64>(), 1.0);
        let back = parse_trajectory_csv(&trajectory_to_csv(&rows)).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_trajectory_csv("").is_err());
        assert!(parse_trajectory_csv(TRAJECTORY_HEADER).is_err());
        assert!(parse_trajectory_csv(&format!("{TRAJECTORY_HEADER}\n0,1,2\n")).is_err());
    }
}
