//! Steady-state memetic search over multilevel partitions.

use std::time::{Duration, Instant};

use rand::Rng as _;

use crate::coarsening::{
    contraction_limit, ContractionConstraint, EdgeFrequency, HeavyEdge, StopRule,
};
use crate::error::{Error, Result};
use crate::harness::ImprovementEvent;
use crate::hypergraph::{Hypergraph, Weight};
use crate::metrics::{connectivity_metric, edge_frequencies, similarity_distance, CutMultiset, Partition};
use crate::multilevel::{CoarsestInit, Engine};
use crate::Rng;

pub const MIN_POPULATION: usize = 3;
pub const MAX_POPULATION: usize = 50;

/// Which recombination operators the loop may schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recombination {
    /// Two-point recombination only.
    TwoPoint,
    /// Two-point plus edge-frequency multi-recombination.
    WithEdgeFrequency,
}

#[derive(Clone, Debug)]
pub struct EvoConfig {
    pub k: usize,
    pub epsilon: f64,
    pub time_limit: Duration,
    /// Fraction of the time limit spent on the initial population.
    pub delta: f64,
    /// Damping of edge frequencies in the multi-recombination rating.
    pub gamma: f64,
    pub mutation_chance: f64,
    pub seed: u64,
    pub recombination: Recombination,
    /// Share of recombinations that use multi-recombination when enabled.
    pub multi_recombine_share: f64,
    /// Stop after this many generations without a strict improvement.
    pub stall_generations: Option<u64>,
}

impl EvoConfig {
    pub fn new(k: usize, epsilon: f64, time_limit: Duration, seed: u64) -> Self {
        Self {
            k,
            epsilon,
            time_limit,
            delta: 0.15,
            gamma: 0.5,
            mutation_chance: 0.5,
            seed,
            recombination: Recombination::WithEdgeFrequency,
            multi_recombine_share: 0.2,
            stall_generations: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::usage(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(0.0..=1.0).contains(&self.mutation_chance) {
            return Err(Error::usage(format!(
                "mutation chance must lie in [0, 1], got {}",
                self.mutation_chance
            )));
        }
        if !(0.0..=1.0).contains(&self.multi_recombine_share) {
            return Err(Error::usage("multi-recombine share must lie in [0, 1]"));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::usage(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.k == 0 {
            return Err(Error::usage("k must be at least 1"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::usage(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// `max(3, min(50, ⌊δ·t/t_I⌋))`.
pub fn population_size(t: f64, t_i: f64, delta: f64) -> Result<usize> {
    if !(t_i > 0.0) {
        return Err(Error::usage("t_I must be positive"));
    }
    if !(t > 0.0) {
        return Err(Error::usage("time limit must be positive"));
    }
    // the small slack keeps products like 0.15 * 200 from landing on 29.999..
    let raw = (delta * (t / t_i) + 1e-9).floor();
    Ok((raw.min(MAX_POPULATION as f64) as usize).max(MIN_POPULATION))
}

/// Number of elite members feeding edge frequencies: `⌈√|P|⌉`.
pub fn elite_count(population: usize) -> usize {
    let mut t = (population as f64).sqrt() as usize;
    while t * t < population {
        t += 1;
    }
    while t > 0 && (t - 1) * (t - 1) >= population {
        t -= 1;
    }
    t
}

#[derive(Clone, Debug)]
pub struct Individual {
    partition: Partition,
    fitness: Weight,
    signature: CutMultiset,
    birth: u64,
}

impl Individual {
    pub fn new(h: &Hypergraph, partition: Partition, birth: u64) -> Self {
        let signature = partition.cut_multiset(h);
        Self { fitness: partition.objective(), partition, signature, birth }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn into_partition(self) -> Partition {
        self.partition
    }

    pub fn fitness(&self) -> Weight {
        self.fitness
    }

    pub fn signature(&self) -> &CutMultiset {
        &self.signature
    }

    pub fn birth(&self) -> u64 {
        self.birth
    }

    /// Recomputes fitness and signature from scratch.
    pub fn check(&self, h: &Hypergraph) -> Result<()> {
        let fitness = connectivity_metric(h, &self.partition)?;
        if fitness != self.fitness || self.partition.cut_multiset(h) != self.signature {
            return Err(Error::Internal(format!(
                "individual {} caches fitness {} but recomputes to {fitness}",
                self.birth, self.fitness
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Population {
    members: Vec<Individual>,
    capacity: usize,
    lmax: Weight,
    next_birth: u64,
}

impl Population {
    pub fn new(capacity: usize, lmax: Weight) -> Self {
        Self { members: Vec::with_capacity(capacity), capacity, lmax, next_birth: 0 }
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn lmax(&self) -> Weight {
        self.lmax
    }

    pub fn shrink_capacity(&mut self) {
        self.capacity = self.members.len();
    }

    /// Wraps `partition` as the next-born individual.
    pub fn individual(&mut self, h: &Hypergraph, partition: Partition) -> Individual {
        let birth = self.next_birth;
        self.next_birth += 1;
        Individual::new(h, partition, birth)
    }

    pub fn push(&mut self, individual: Individual) -> Result<()> {
        if self.members.len() >= self.capacity {
            return Err(Error::Internal("population is full".into()));
        }
        if !self.is_feasible(&individual) {
            return Err(Error::Infeasible(format!(
                "individual {} exceeds L_max = {}",
                individual.birth, self.lmax
            )));
        }
        self.members.push(individual);
        Ok(())
    }

    pub fn is_feasible(&self, individual: &Individual) -> bool {
        individual.partition.max_block_weight() <= self.lmax
    }

    /// Fittest member; ties go to the older one.
    pub fn best(&self) -> Option<&Individual> {
        self.members.iter().min_by_key(|i| (i.fitness, i.birth))
    }

    /// Members ordered by fitness, older first among equals.
    pub fn ranked(&self) -> Vec<&Individual> {
        let mut ranked: Vec<&Individual> = self.members.iter().collect();
        ranked.sort_by_key(|i| (i.fitness, i.birth));
        ranked
    }
}

/// One binary tournament: two distinct members drawn uniformly, the fitter
/// wins and ties go to the first drawn. Returns the winner's index.
pub fn tournament_select(pop: &Population, rng: &mut Rng) -> Result<usize> {
    let n = pop.len();
    if n < 2 {
        return Err(Error::usage(format!("tournament needs two members, population has {n}")));
    }
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let m = pop.members();
    Ok(if m[b].fitness < m[a].fitness { b } else { a })
}

/// Two tournaments; when both pick the same member the second one is
/// redrawn once. Returns `(fitter, other)`.
pub fn select_parents(pop: &Population, rng: &mut Rng) -> Result<(usize, usize)> {
    let first = tournament_select(pop, rng)?;
    let mut second = tournament_select(pop, rng)?;
    if second == first {
        second = tournament_select(pop, rng)?;
    }
    let m = pop.members();
    Ok(if m[second].fitness < m[first].fitness { (second, first) } else { (first, second) })
}

/// Coarsens while both parents agree, seeds the coarsest level with `p1`
/// and refines on every level. Never worse than `p1`.
pub fn two_point_recombine(
    h: &mut Hypergraph,
    engine: &mut Engine,
    p1: &Individual,
    p2: &Individual,
    rng: &mut Rng,
) -> Result<Partition> {
    let (a, b) = (p1.partition.blocks(), p2.partition.blocks());
    engine.run(
        h,
        &HeavyEdge,
        &ContractionConstraint::BothParentsAgree(a, b),
        StopRule::Fixpoint,
        CoarsestInit::Project(a),
        rng,
    )
}

/// Fresh multilevel run whose rating discourages contracting nets that are
/// frequently cut among the `⌈√|P|⌉` best members.
pub fn multi_recombine(
    h: &mut Hypergraph,
    engine: &mut Engine,
    pop: &Population,
    gamma: f64,
    rng: &mut Rng,
) -> Result<Partition> {
    if pop.is_empty() {
        return Err(Error::usage("multi-recombination needs a non-empty population"));
    }
    let t = elite_count(pop.len());
    let ranked = pop.ranked();
    let elite: Vec<&CutMultiset> = ranked.iter().map(|i| &i.signature).collect();
    let frequencies = edge_frequencies(h.num_nets(), &elite, t)?;
    let rating = EdgeFrequency { frequencies: &frequencies, gamma };
    let k = engine.k();
    engine.run(
        h,
        &rating,
        &ContractionConstraint::Unrestricted,
        StopRule::VertexLimit(contraction_limit(k)),
        CoarsestInit::Portfolio,
        rng,
    )
}

/// V-cycle that keeps the individual's partition on the coarsest level.
pub fn mutate_keep_partition(
    h: &mut Hypergraph,
    engine: &mut Engine,
    individual: &Individual,
    rng: &mut Rng,
) -> Result<Partition> {
    engine.v_cycle(h, individual.partition.blocks(), rng)
}

/// V-cycle that repartitions the coarsest level from scratch. Coarsening
/// stays within blocks but stops at the usual vertex limit: run to a fixpoint
/// under the L_max cap, every block would shrink to its connected pieces and
/// the portfolio could only rediscover the parent. Falls back to
/// [`mutate_keep_partition`] when the portfolio finds no feasible partition;
/// the flag reports whether that happened.
pub fn mutate_new_ip(
    h: &mut Hypergraph,
    engine: &mut Engine,
    individual: &Individual,
    rng: &mut Rng,
) -> Result<(Partition, bool)> {
    let blocks = individual.partition.blocks();
    match engine.run(
        h,
        &HeavyEdge,
        &ContractionConstraint::SameBlock(blocks),
        StopRule::VertexLimit(contraction_limit(engine.k())),
        CoarsestInit::Portfolio,
        rng,
    ) {
        Ok(p) => Ok((p, false)),
        Err(Error::Infeasible(_)) => Ok((mutate_keep_partition(h, engine, individual, rng)?, true)),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvictionReport {
    /// No member is at most as fit as the offspring.
    Discarded,
    /// The offspring violates the balance bound.
    Rejected,
    Replaced { index: usize, evicted_birth: u64, distance: u64 },
}

/// Evicts the member most similar to `offspring` among those with fitness
/// equal or worse; ties go to the worse member, then the older one.
pub fn replace(pop: &mut Population, offspring: Individual) -> EvictionReport {
    if !pop.is_feasible(&offspring) {
        return EvictionReport::Rejected;
    }
    let victim = pop
        .members
        .iter()
        .enumerate()
        .filter(|(_, m)| m.fitness >= offspring.fitness)
        .map(|(i, m)| (similarity_distance(&m.signature, &offspring.signature), -m.fitness, m.birth, i))
        .min();
    match victim {
        None => EvictionReport::Discarded,
        Some((distance, _, evicted_birth, index)) => {
            pop.members[index] = offspring;
            EvictionReport::Replaced { index, evicted_birth, distance }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OperatorCounts {
    pub two_point: u64,
    pub multi: u64,
    pub keep_partition: u64,
    pub new_ip: u64,
    pub new_ip_fallbacks: u64,
    pub replaced: u64,
    pub discarded: u64,
}

#[derive(Clone, Debug)]
pub struct EvolutionOutcome {
    pub best: Individual,
    pub counters: OperatorCounts,
    pub generations: u64,
    pub capacity: usize,
    pub initial_time: Duration,
    pub population_time: Duration,
}

struct Tracker<'a> {
    start: Instant,
    seed: u64,
    best: Option<Weight>,
    sink: &'a mut dyn FnMut(&ImprovementEvent),
}

impl Tracker<'_> {
    fn offer(&mut self, fitness: Weight) -> bool {
        if self.best.map_or(true, |b| fitness < b) {
            self.best = Some(fitness);
            let event = ImprovementEvent {
                time: self.start.elapsed().as_secs_f64(),
                seed: self.seed,
                value: fitness,
            };
            (self.sink)(&event);
            true
        } else {
            false
        }
    }
}

/// Builds the initial population from independent multilevel runs. The first
/// run's duration `t_I` sizes the population; filling stops early once `δ·t`
/// has elapsed and at least three members exist, or when `t` has elapsed.
pub fn create_initial_population(
    h: &mut Hypergraph,
    engine: &mut Engine,
    cfg: &EvoConfig,
    rng: &mut Rng,
) -> Result<(Population, Duration)> {
    create_population_tracked(h, engine, cfg, rng, Instant::now(), &mut |_| {})
}

fn create_population_tracked(
    h: &mut Hypergraph,
    engine: &mut Engine,
    cfg: &EvoConfig,
    rng: &mut Rng,
    start: Instant,
    on_member: &mut dyn FnMut(Weight),
) -> Result<(Population, Duration)> {
    let t0 = Instant::now();
    let first = engine.partition(h, rng)?;
    let t_i = t0.elapsed().max(Duration::from_nanos(1));
    let capacity = population_size(cfg.time_limit.as_secs_f64().max(1e-9), t_i.as_secs_f64(), cfg.delta)?;
    let mut pop = Population::new(capacity, engine.lmax());
    let first = pop.individual(h, first);
    on_member(first.fitness);
    pop.push(first)?;
    let budget = cfg.time_limit.mul_f64(cfg.delta);
    while pop.len() < capacity {
        let elapsed = start.elapsed();
        if elapsed >= cfg.time_limit || (elapsed >= budget && pop.len() >= MIN_POPULATION) {
            break;
        }
        let p = engine.partition(h, rng)?;
        let member = pop.individual(h, p);
        on_member(member.fitness);
        pop.push(member)?;
    }
    pop.shrink_capacity();
    Ok((pop, t_i))
}

/// Runs the memetic loop until the time limit (or the optional stall limit)
/// and returns the best individual seen. `sink` receives one event per strict
/// improvement of the best fitness.
pub fn evolve(
    h: &mut Hypergraph,
    cfg: &EvoConfig,
    sink: &mut dyn FnMut(&ImprovementEvent),
) -> Result<EvolutionOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let mut rng = crate::rng_from_seed(cfg.seed);
    let mut engine = Engine::new(h, cfg.k, cfg.epsilon)?;
    let mut tracker = Tracker { start, seed: cfg.seed, best: None, sink };
    let (mut pop, t_i) =
        create_population_tracked(h, &mut engine, cfg, &mut rng, start, &mut |f| {
            tracker.offer(f);
        })?;
    let population_time = start.elapsed();
    let mut best = pop.best().expect("population holds the first run").clone();
    let mut counters = OperatorCounts::default();
    let mut generations = 0u64;
    let mut stall = 0u64;

    while pop.len() >= 2 && start.elapsed() < cfg.time_limit {
        if cfg.stall_generations.is_some_and(|limit| stall >= limit) {
            break;
        }
        generations += 1;
        let child = if rng.gen_bool(cfg.mutation_chance) {
            let i = rng.gen_range(0..pop.len());
            let parent = pop.members()[i].clone();
            if rng.gen_bool(0.5) {
                counters.keep_partition += 1;
                let child = mutate_keep_partition(h, &mut engine, &parent, &mut rng)?;
                debug_assert!(child.objective() <= parent.fitness);
                child
            } else {
                counters.new_ip += 1;
                let (child, fell_back) = mutate_new_ip(h, &mut engine, &parent, &mut rng)?;
                counters.new_ip_fallbacks += fell_back as u64;
                child
            }
        } else if cfg.recombination == Recombination::WithEdgeFrequency
            && rng.gen_bool(cfg.multi_recombine_share)
        {
            counters.multi += 1;
            match multi_recombine(h, &mut engine, &pop, cfg.gamma, &mut rng) {
                Ok(child) => child,
                Err(Error::Infeasible(_)) => {
                    stall += 1;
                    continue;
                }
                Err(e) => return Err(e),
            }
        } else {
            counters.two_point += 1;
            let (a, b) = select_parents(&pop, &mut rng)?;
            let (p1, p2) = (pop.members()[a].clone(), pop.members()[b].clone());
            let child = two_point_recombine(h, &mut engine, &p1, &p2, &mut rng)?;
            debug_assert!(child.objective() <= p1.fitness.min(p2.fitness));
            child
        };
        let child = pop.individual(h, child);
        #[cfg(debug_assertions)]
        child.check(h)?;
        if tracker.offer(child.fitness) {
            best = child.clone();
            stall = 0;
        } else {
            stall += 1;
        }
        match replace(&mut pop, child) {
            EvictionReport::Replaced { .. } => counters.replaced += 1,
            EvictionReport::Discarded | EvictionReport::Rejected => counters.discarded += 1,
        }
    }
    log::debug!(
        "evolve: {generations} generations, population {}, best {}, {counters:?}",
        pop.capacity(),
        best.fitness()
    );
    Ok(EvolutionOutcome {
        best,
        counters,
        generations,
        capacity: pop.capacity(),
        initial_time: t_i,
        population_time,
    })
}
