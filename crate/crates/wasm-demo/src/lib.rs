//! Browser bindings for the demo page. Every export returns a JSON string
//! so the page stays plain JavaScript.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use dagger_core::env::{corrupt, DubinsEnv, DubinsExpert, DubinsRoomConfig, Environment, ExpertMode, Outcome, Pose};
use dagger_core::nn::{Mlp, NetConfig};
use dagger_core::policy::{novice_sample, Action, Observation};
use dagger_core::rules::{dr_dropout, ActionNorm, DropoutRuleParams};

fn to_js<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serialises")
}

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[derive(Serialize)]
struct Ray {
    angle: f64,
    range: f64,
    noisy: f64,
}

#[derive(Serialize)]
struct Scan {
    size: f64,
    walls: Vec<[f64; 4]>,
    rays: Vec<Ray>,
}

/// True and corrupted lidar ranges from a pose in the default room.
#[wasm_bindgen]
pub fn scan(x: f64, y: f64, theta: f64, sigma1: f64, sigma2: f64, seed: u64) -> Result<String, JsValue> {
    let config = DubinsRoomConfig {
        sigma1,
        sigma2,
        ..DubinsRoomConfig::default()
    };
    config.validate().map_err(err)?;
    let room = config.room();
    let noise = config.noise();
    let pose = Pose::new(x, y, theta);
    if !room.contains(x, y) {
        return Err(err("pose lies outside the room"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rays = room
        .scan(&pose)
        .into_iter()
        .enumerate()
        .map(|(i, range)| Ray {
            angle: room.ray_angle(&pose, i),
            range,
            noisy: corrupt(range, &noise, &mut rng),
        })
        .collect();
    let walls = room.walls().iter().map(|&((ax, ay), (bx, by))| [ax, ay, bx, by]).collect();
    Ok(to_js(&Scan {
        size: room.size,
        walls,
        rays,
    }))
}

#[derive(Serialize)]
struct Drive {
    outcome: &'static str,
    steps: usize,
    poses: Vec<[f64; 3]>,
    plan: Vec<[f64; 2]>,
}

/// Expert-only episode from a chosen start pose, plus the Dubins plan made
/// at that pose.
#[wasm_bindgen]
pub fn expert_drive(x: f64, y: f64, theta: f64, open_loop: bool) -> Result<String, JsValue> {
    let config = DubinsRoomConfig {
        expert_mode: if open_loop { ExpertMode::OpenLoop } else { ExpertMode::Replan },
        ..DubinsRoomConfig::default()
    };
    if !config.room().contains(x, y) {
        return Err(err("pose lies outside the room"));
    }
    let expert = DubinsExpert::new(&config);
    let mut env = DubinsEnv::new(config).map_err(err)?;
    let start = Pose::new(x, y, theta);
    env.reset_to(start, 0);

    let plan = expert
        .plan(&start)
        .map(|path| {
            let n = (path.length() / 0.5).ceil().max(1.0) as usize;
            (0..=n)
                .map(|k| {
                    let p = path.sample(path.length() * k as f64 / n as f64);
                    [p.x, p.y]
                })
                .collect()
        })
        .unwrap_or_default();

    let mut poses = vec![[start.x, start.y, start.theta]];
    let mut outcome = Outcome::Running;
    while !outcome.is_done() {
        let u = expert.command(env.state());
        outcome = env.step(&Action::scalar(u)).map_err(err)?.outcome;
        let p = env.pose();
        poses.push([p.x, p.y, p.theta]);
    }
    Ok(to_js(&Drive {
        outcome: match outcome {
            Outcome::Exited => "exited",
            Outcome::Collided => "collided",
            _ => "timed out",
        },
        steps: poses.len() - 1,
        poses,
        plan,
    }))
}

/// Small 1-D regressor trained on a noisy sine with a hole in the data,
/// used to show MC-dropout spread and the resulting decision.
#[wasm_bindgen]
pub struct Regressor {
    net: Mlp,
    data: Vec<(f64, f64)>,
    rng: ChaCha8Rng,
}

fn target(x: f64) -> f64 {
    (1.5 * x).sin()
}

#[derive(Serialize)]
struct Band {
    data: Vec<(f64, f64)>,
    xs: Vec<f64>,
    truth: Vec<f64>,
    mean: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Serialize)]
struct Verdict {
    expert: f64,
    samples: Vec<f64>,
    mean: f64,
    p_hat: f64,
    actor: &'static str,
}

#[wasm_bindgen]
impl Regressor {
    #[wasm_bindgen(constructor)]
    pub fn new(dropout: f64, seed: u64) -> Result<Regressor, JsValue> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = NetConfig {
            layer_sizes: vec![1, 48, 48, 1],
            dropout,
            learning_rate: 5e-3,
            train_epochs: 300,
            batch_size: 16,
            ..NetConfig::default()
        };
        let mut net = Mlp::new(config, &mut rng).map_err(err)?;
        // Points on [-3, 3] except the gap (0.5, 1.5).
        let data: Vec<(f64, f64)> = (0..60)
            .map(|i| -3.0 + 6.0 * i as f64 / 59.0)
            .filter(|x| !(0.5..1.5).contains(x))
            .map(|x| (x, target(x)))
            .collect();
        let inputs: Vec<[f64; 1]> = data.iter().map(|&(x, _)| [x]).collect();
        let labels: Vec<[f64; 1]> = data.iter().map(|&(_, y)| [y]).collect();
        let examples: Vec<(&[f64], &[f64])> = inputs
            .iter()
            .zip(&labels)
            .map(|(i, l)| (i.as_slice(), l.as_slice()))
            .collect();
        net.train(&examples, &mut rng).map_err(err)?;
        Ok(Regressor { net, data, rng })
    }

    /// Mean and two-standard-deviation band over `samples` dropout passes.
    pub fn band(&mut self, samples: usize) -> Result<String, JsValue> {
        let samples = samples.max(2);
        let xs: Vec<f64> = (0..=120).map(|i| -4.0 + 8.0 * i as f64 / 120.0).collect();
        let (mut mean, mut lo, mut hi) = (Vec::new(), Vec::new(), Vec::new());
        for &x in &xs {
            let set = novice_sample(&self.net, &Observation(vec![x]), samples, &mut self.rng).map_err(err)?;
            let m = set.mean().values()[0];
            let var = set.samples().iter().map(|a| (a.values()[0] - m).powi(2)).sum::<f64>() / samples as f64;
            mean.push(m);
            lo.push(m - 2.0 * var.sqrt());
            hi.push(m + 2.0 * var.sqrt());
        }
        Ok(to_js(&Band {
            data: self.data.clone(),
            truth: xs.iter().map(|&x| target(x)).collect(),
            xs,
            mean,
            lo,
            hi,
        }))
    }

    /// Dropout decision rule at input `x`, with the true function as expert.
    pub fn decide(&mut self, x: f64, tau: f64, p: f64, samples: usize) -> Result<String, JsValue> {
        let params = DropoutRuleParams { tau, p, n: samples };
        params.validate().map_err(err)?;
        let set = novice_sample(&self.net, &Observation(vec![x]), samples, &mut self.rng).map_err(err)?;
        let expert = Action::scalar(target(x));
        let decision = dr_dropout(&expert, &set, &params, ActionNorm::Euclidean);
        Ok(to_js(&Verdict {
            expert: target(x),
            samples: set.samples().iter().map(|a| a.values()[0]).collect(),
            mean: set.mean().values()[0],
            p_hat: decision.diagnostics.p_hat.unwrap_or(0.0),
            actor: decision.actor.as_str(),
        }))
    }
}
