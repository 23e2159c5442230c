//! The multilevel cycle: coarsen, initialize the coarsest hypergraph, then
//! undo one contraction per level with localized FM after each.

use crate::coarsening::{
    coarsen, contraction_limit, ContractionConstraint, HeavyEdge, Hierarchy, RatingFunction,
    StopRule,
};
use crate::error::Result;
use crate::hypergraph::{Hypergraph, Weight};
use crate::initial::{portfolio_initial_partition, PORTFOLIO_RUNS};
use crate::metrics::{lmax, BlockId, Partition};
use crate::refinement::{FmConfig, FmRefiner};
use crate::Rng;

/// How the coarsest hypergraph receives its partition.
#[derive(Clone, Copy, Debug)]
pub enum CoarsestInit<'a> {
    /// Reuse a fine-level assignment; the coarsening constraint must keep it
    /// constant on every coarse vertex.
    Project(&'a [BlockId]),
    /// Run the initial-partitioning portfolio.
    Portfolio,
}

/// Reusable multilevel machinery for one hypergraph, `k` and `ε`.
#[derive(Clone, Debug)]
pub struct Engine {
    k: usize,
    epsilon: f64,
    lmax: Weight,
    fm_config: FmConfig,
    local_fm_config: FmConfig,
    initial_runs: usize,
    fm: FmRefiner,
}

impl Engine {
    pub fn new(h: &Hypergraph, k: usize, epsilon: f64) -> Result<Self> {
        let lmax = lmax(h.total_weight(), k, epsilon)?;
        Ok(Self {
            k,
            epsilon,
            lmax,
            fm_config: FmConfig::default(),
            local_fm_config: FmConfig::localized(),
            initial_runs: PORTFOLIO_RUNS,
            fm: FmRefiner::new(h.num_vertices(), k),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lmax(&self) -> Weight {
        self.lmax
    }

    /// Overrides the FM settings for the coarsest level (`full`) and for the
    /// search after each uncontraction (`local`).
    pub fn with_fm_configs(mut self, full: FmConfig, local: FmConfig) -> Self {
        self.fm_config = full;
        self.local_fm_config = local;
        self
    }

    /// A fresh partition: heavy-edge coarsening down to the contraction
    /// limit, portfolio initial partitioning, FM during uncoarsening.
    pub fn partition(&mut self, h: &mut Hypergraph, rng: &mut Rng) -> Result<Partition> {
        self.run(
            h,
            &HeavyEdge,
            &ContractionConstraint::Unrestricted,
            StopRule::VertexLimit(contraction_limit(self.k)),
            CoarsestInit::Portfolio,
            rng,
        )
    }

    /// One full multilevel cycle. `h` is restored to its input state before
    /// returning, also on error.
    pub fn run(
        &mut self,
        h: &mut Hypergraph,
        rating: &dyn RatingFunction,
        constraint: &ContractionConstraint<'_>,
        stop: StopRule,
        init: CoarsestInit<'_>,
        rng: &mut Rng,
    ) -> Result<Partition> {
        let hierarchy = coarsen(h, rating, constraint, stop, self.lmax, rng);
        let coarse = match init {
            CoarsestInit::Project(blocks) => Partition::new(h, self.k, blocks.to_vec()),
            CoarsestInit::Portfolio => {
                portfolio_initial_partition(h, self.k, self.epsilon, self.initial_runs, rng)
            }
        };
        let mut p = match coarse {
            Ok(p) => p,
            Err(e) => {
                hierarchy.undo_all(h)?;
                return Err(e);
            }
        };
        let border = p.border_vertices(h);
        self.fm.refine(h, &mut p, self.lmax, &border, &self.fm_config, rng);
        self.uncoarsen(h, hierarchy, &mut p, rng)?;
        Ok(p)
    }

    /// Projects `p` through every level, refining around each restored pair.
    pub fn uncoarsen(
        &mut self,
        h: &mut Hypergraph,
        mut hierarchy: Hierarchy,
        p: &mut Partition,
        rng: &mut Rng,
    ) -> Result<()> {
        while let Some(m) = hierarchy.project_one(h, p)? {
            self.fm.refine(h, p, self.lmax, &[m.u, m.v], &self.local_fm_config, rng);
        }
        Ok(())
    }

    /// Same-block V-cycle on an existing partition; never worsens it.
    pub fn v_cycle(&mut self, h: &mut Hypergraph, blocks: &[BlockId], rng: &mut Rng) -> Result<Partition> {
        self.run(
            h,
            &HeavyEdge,
            &ContractionConstraint::SameBlock(blocks),
            StopRule::Fixpoint,
            CoarsestInit::Project(blocks),
            rng,
        )
    }
}
