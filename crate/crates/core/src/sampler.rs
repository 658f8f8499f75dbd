//! Random interview orders and Monte Carlo play.
//!
//! Trials are split into `workers` contiguous shares. Worker `w` draws from
//! ChaCha8 seeded with `seed` on stream `w`, so a result depends only on the
//! seed, the worker count and the configuration, never on scheduling.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::permutation::Permutation;
use crate::tree_solver::StrikeSet;

pub const RNG_NAME: &str = "ChaCha8Rng";
pub const DEFAULT_WORKERS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("workers must be at least 1")]
    NoWorkers,
    #[error("game size must be at least 1")]
    EmptyGame,
    #[error("θ must be positive and finite, got {0}")]
    BadTheta(f64),
    #[error("k = {k} out of range for N = {n}")]
    KOutOfRange { n: usize, k: usize },
    #[error("unknown model {0:?} (expected ewens, mallows or uniform)")]
    UnknownModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimModel {
    Ewens,
    Mallows,
    Uniform,
}

impl FromStr for SimModel {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ewens" | "lrmax" => Ok(SimModel::Ewens),
            "mallows" | "inversions" => Ok(SimModel::Mallows),
            "uniform" => Ok(SimModel::Uniform),
            _ => Err(SimError::UnknownModel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    /// Reject the first k candidates, then accept the next left-to-right maximum.
    Positional(usize),
    StrikeSet(StrikeSet),
}

impl Strategy {
    pub fn wins(&self, pi: &Permutation) -> bool {
        match self {
            Strategy::Positional(k) => pi.is_k_winnable(*k),
            Strategy::StrikeSet(set) => set.wins(pi),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub model: SimModel,
    pub n: usize,
    pub theta: f64,
    pub strategy: Strategy,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(
        model: SimModel,
        n: usize,
        theta: f64,
        strategy: Strategy,
        trials: u64,
        seed: u64,
    ) -> Self {
        SimConfig {
            model,
            n,
            theta,
            strategy,
            trials,
            seed,
            workers: DEFAULT_WORKERS,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.trials == 0 {
            return Err(SimError::NoTrials);
        }
        if self.workers == 0 {
            return Err(SimError::NoWorkers);
        }
        if self.n == 0 {
            return Err(SimError::EmptyGame);
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(SimError::BadTheta(self.theta));
        }
        if let Strategy::Positional(k) = self.strategy {
            if k >= self.n {
                return Err(SimError::KOutOfRange { n: self.n, k });
            }
        }
        Ok(())
    }

    fn share(&self, worker: usize) -> u64 {
        let w = self.workers as u64;
        self.trials / w + u64::from((worker as u64) < self.trials % w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub wins: u64,
    pub trials: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub rng: &'static str,
    pub seed: u64,
    pub workers: usize,
}

impl SimResult {
    fn new(wins: u64, cfg: &SimConfig) -> Self {
        let estimate = wins as f64 / cfg.trials as f64;
        SimResult {
            wins,
            trials: cfg.trials,
            estimate,
            std_error: (estimate * (1.0 - estimate) / cfg.trials as f64).sqrt(),
            rng: RNG_NAME,
            seed: cfg.seed,
            workers: cfg.workers,
        }
    }

    /// |estimate − exact| in units of the exact binomial standard deviation.
    pub fn z_score(&self, exact: f64) -> f64 {
        let sigma = (exact * (1.0 - exact) / self.trials as f64).sqrt();
        if sigma == 0.0 {
            if self.estimate == exact {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.estimate - exact).abs() / sigma
        }
    }
}

/// The generator for one worker.
pub fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    rng
}

/// Index `d ∈ 0..m` drawn with probability ∝ θ^d.
fn geometric_index<R: Rng + ?Sized>(m: usize, theta: f64, rng: &mut R) -> usize {
    // Weights relative to the largest one, so none overflow.
    let (ratio, reversed) = if theta > 1.0 {
        (1.0 / theta, true)
    } else {
        (theta, false)
    };
    let total: f64 = if ratio == 1.0 {
        m as f64
    } else {
        (1.0 - ratio.powi(m as i32)) / (1.0 - ratio)
    };
    let mut u = rng.random::<f64>() * total;
    let mut w = 1.0;
    let mut d = m - 1;
    for i in 0..m {
        if u < w {
            d = i;
            break;
        }
        u -= w;
        w *= ratio;
    }
    if reversed {
        m - 1 - d
    } else {
        d
    }
}

/// π with probability θ^{inv(π)}/[N]!_θ. At step m the last entry receives
/// relative rank `i` among `m`, creating `m − i` inversions, with weight
/// θ^{m−i}.
pub fn sample_mallows<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> Permutation {
    let mut word: Vec<usize> = Vec::with_capacity(n);
    for m in 1..=n {
        let i = m - geometric_index(m, theta, rng);
        for x in word.iter_mut() {
            if *x >= i {
                *x += 1;
            }
        }
        word.push(i);
    }
    Permutation::new(word).expect("insertion keeps a permutation")
}

/// π with probability θ^{lrmax(π)}/⟨N⟩!. A Chinese-restaurant process builds
/// a permutation with θ^{#cycles} weight; writing each cycle from its maximum
/// and listing cycles by increasing maximum turns cycles into left-to-right
/// maxima.
pub fn sample_ewens<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> Permutation {
    // succ[v] is the image of v under the cycle permutation (1-based values).
    let mut succ = vec![0usize; n + 1];
    for j in 1..=n {
        let seated = (j - 1) as f64;
        if rng.random::<f64>() * (theta + seated) < theta {
            succ[j] = j;
        } else {
            let e = rng.random_range(1..j);
            succ[j] = succ[e];
            succ[e] = j;
        }
    }
    let mut seen = vec![false; n + 1];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for start in 1..=n {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            cycle.push(v);
            v = succ[v];
        }
        let top = (0..cycle.len())
            .max_by_key(|&i| cycle[i])
            .expect("nonempty");
        cycle.rotate_left(top);
        cycles.push(cycle);
    }
    cycles.sort_by_key(|c| c[0]);
    Permutation::new(cycles.concat()).expect("cycles partition 1..=n")
}

pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut word: Vec<usize> = (1..=n).collect();
    word.shuffle(rng);
    Permutation::new(word).expect("shuffle keeps a permutation")
}

pub fn sample<R: Rng + ?Sized>(model: SimModel, n: usize, theta: f64, rng: &mut R) -> Permutation {
    match model {
        SimModel::Ewens => sample_ewens(n, theta, rng),
        SimModel::Mallows => sample_mallows(n, theta, rng),
        SimModel::Uniform => sample_uniform(n, rng),
    }
}

fn run_worker(cfg: &SimConfig, worker: usize, observe: &mut dyn FnMut(&Permutation)) -> u64 {
    let mut rng = worker_rng(cfg.seed, worker);
    let mut wins = 0;
    for _ in 0..cfg.share(worker) {
        let pi = sample(cfg.model, cfg.n, cfg.theta, &mut rng);
        observe(&pi);
        wins += u64::from(cfg.strategy.wins(&pi));
    }
    wins
}

/// Plays the strategy on `trials` sampled orders, workers in parallel.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimResult, SimError> {
    cfg.validate()?;
    let wins = (0..cfg.workers)
        .into_par_iter()
        .map(|w| run_worker(cfg, w, &mut |_| {}))
        .sum();
    Ok(SimResult::new(wins, cfg))
}

/// [`run_simulation`] run sequentially, handing every sampled order to
/// `observe` in worker order. Returns the same result.
pub fn run_simulation_observed(
    cfg: &SimConfig,
    mut observe: impl FnMut(&Permutation),
) -> Result<SimResult, SimError> {
    cfg.validate()?;
    let wins = (0..cfg.workers)
        .map(|w| run_worker(cfg, w, &mut observe))
        .sum();
    Ok(SimResult::new(wins, cfg))
}
