//! Seeded runs of the memetic algorithm and of the two repeated-multilevel
//! baselines under a wall-clock budget.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use super::events::ImprovementEvent;
use crate::error::{Error, Result};
use crate::evolution::{evolve, EvoConfig, OperatorCounts, Recombination};
use crate::hypergraph::Hypergraph;
use crate::metrics::Partition;
use crate::multilevel::Engine;

/// V-cycles applied to each fresh partition in [`Mode::VCycle`].
pub const V_CYCLES_PER_CALL: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Memetic loop with two-point recombination.
    EvoC,
    /// Memetic loop with two-point and edge-frequency recombination.
    EvoCEr,
    /// Independent multilevel runs, best kept.
    Restart,
    /// Fresh multilevel runs each followed by up to 100 V-cycles.
    VCycle,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::EvoC, Mode::EvoCEr, Mode::Restart, Mode::VCycle];

    pub fn name(self) -> &'static str {
        match self {
            Mode::EvoC => "evo-c",
            Mode::EvoCEr => "evo-c-er",
            Mode::Restart => "restart",
            Mode::VCycle => "vcycle",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown mode {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub k: usize,
    pub epsilon: f64,
    pub time_limit: Duration,
    pub seed: u64,
    pub mutation_chance: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl RunConfig {
    pub fn new(mode: Mode, k: usize, epsilon: f64, time_limit: Duration, seed: u64) -> Self {
        let evo = EvoConfig::new(k, epsilon, time_limit, seed);
        Self {
            mode,
            k,
            epsilon,
            time_limit,
            seed,
            mutation_chance: evo.mutation_chance,
            delta: evo.delta,
            gamma: evo.gamma,
        }
    }

    pub fn evo_config(&self) -> EvoConfig {
        let mut cfg = EvoConfig::new(self.k, self.epsilon, self.time_limit, self.seed);
        cfg.mutation_chance = self.mutation_chance;
        cfg.delta = self.delta;
        cfg.gamma = self.gamma;
        cfg.recombination = match self.mode {
            Mode::EvoC => Recombination::TwoPoint,
            _ => Recombination::WithEdgeFrequency,
        };
        cfg
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub partition: Partition,
    pub events: Vec<ImprovementEvent>,
    /// Multilevel runs (baselines) or generations (memetic modes).
    pub iterations: u64,
    pub counters: Option<OperatorCounts>,
}

/// Runs `cfg.mode` on `h`; every mode completes at least one multilevel run
/// even when the budget is smaller.
pub fn run(h: &mut Hypergraph, cfg: &RunConfig) -> Result<RunOutcome> {
    match cfg.mode {
        Mode::EvoC | Mode::EvoCEr => {
            let mut events = Vec::new();
            let out = evolve(h, &cfg.evo_config(), &mut |e| events.push(*e))?;
            Ok(RunOutcome {
                partition: out.best.into_partition(),
                events,
                iterations: out.generations,
                counters: Some(out.counters),
            })
        }
        Mode::Restart | Mode::VCycle => repeated_multilevel(h, cfg),
    }
}

fn repeated_multilevel(h: &mut Hypergraph, cfg: &RunConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut rng = crate::rng_from_seed(cfg.seed);
    let mut engine = Engine::new(h, cfg.k, cfg.epsilon)?;
    let mut best: Option<Partition> = None;
    let mut events = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut p = engine.partition(h, &mut rng)?;
        if cfg.mode == Mode::VCycle {
            for _ in 0..V_CYCLES_PER_CALL {
                if start.elapsed() >= cfg.time_limit {
                    break;
                }
                p = engine.v_cycle(h, p.blocks(), &mut rng)?;
            }
        }
        if best.as_ref().map_or(true, |b| p.objective() < b.objective()) {
            events.push(ImprovementEvent {
                time: start.elapsed().as_secs_f64(),
                seed: cfg.seed,
                value: p.objective(),
            });
            best = Some(p);
        }
        if start.elapsed() >= cfg.time_limit {
            break;
        }
    }
    Ok(RunOutcome {
        partition: best.expect("at least one iteration"),
        events,
        iterations,
        counters: None,
    })
}
