//! n-level coarsening: rating functions, contraction constraints and the
//! contraction hierarchy.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::Result;
use crate::hypergraph::{ContractionMemento, Hypergraph, NetId, VertexId, Weight};
use crate::metrics::{BlockId, Partition};
use crate::Rng;

/// Scores a vertex pair as the sum of per-net contributions over the nets
/// both share, with an optional final normalization by the vertex weights.
pub trait RatingFunction {
    /// Contribution of a shared net `e`; only called for nets with `|e| ≥ 2`.
    fn net_score(&self, h: &Hypergraph, e: NetId) -> f64;

    fn finalize(&self, sum: f64, _weight_u: Weight, _weight_v: Weight) -> f64 {
        sum
    }

    /// Direct evaluation for a single pair.
    fn rate(&self, h: &Hypergraph, u: VertexId, v: VertexId) -> f64 {
        let sum: f64 = h
            .incident_nets(u)
            .iter()
            .filter(|&&e| h.net_size(e) >= 2 && h.pins(e).contains(&v))
            .map(|&e| self.net_score(h, e))
            .sum();
        self.finalize(sum, h.vertex_weight(u), h.vertex_weight(v))
    }
}

/// `r(u,v) = Σ_{e ∈ I(u)∩I(v)} ω(e)/(|e| − 1)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HeavyEdge;

impl RatingFunction for HeavyEdge {
    fn net_score(&self, h: &Hypergraph, e: NetId) -> f64 {
        h.net_weight(e) as f64 / (h.net_size(e) - 1) as f64
    }
}

/// `r(u,v) = 1/(c(u)·c(v)) · Σ_{e ∈ I(u)∩I(v)} exp(−γ·f(e))/|e|`.
///
/// Favors pairs sharing many small nets that are rarely cut in good
/// solutions.
#[derive(Clone, Copy, Debug)]
pub struct EdgeFrequency<'a> {
    pub frequencies: &'a [u32],
    pub gamma: f64,
}

impl RatingFunction for EdgeFrequency<'_> {
    fn net_score(&self, h: &Hypergraph, e: NetId) -> f64 {
        (-self.gamma * self.frequencies[e] as f64).exp() / h.net_size(e) as f64
    }

    fn finalize(&self, sum: f64, weight_u: Weight, weight_v: Weight) -> f64 {
        sum / (weight_u as f64 * weight_v as f64)
    }
}

pub fn heavy_edge_rating(h: &Hypergraph, u: VertexId, v: VertexId) -> f64 {
    HeavyEdge.rate(h, u, v)
}

pub fn edge_frequency_rating(
    h: &Hypergraph,
    u: VertexId,
    v: VertexId,
    frequencies: &[u32],
    gamma: f64,
) -> f64 {
    EdgeFrequency { frequencies, gamma }.rate(h, u, v)
}

/// Which vertex pairs may be contracted.
#[derive(Clone, Copy, Debug)]
pub enum ContractionConstraint<'a> {
    Unrestricted,
    /// `b[u] = b[v]`.
    SameBlock(&'a [BlockId]),
    /// `b1[u] = b1[v] ∧ b2[u] = b2[v]`.
    BothParentsAgree(&'a [BlockId], &'a [BlockId]),
}

impl ContractionConstraint<'_> {
    pub fn allows(&self, u: VertexId, v: VertexId) -> bool {
        match *self {
            Self::Unrestricted => true,
            Self::SameBlock(b) => b[u] == b[v],
            Self::BothParentsAgree(b1, b2) => b1[u] == b1[v] && b2[u] == b2[v],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopRule {
    /// Stop once at most this many vertices are enabled.
    VertexLimit(usize),
    /// Contract until no eligible pair is left.
    Fixpoint,
}

/// Coarsening threshold for fresh partitioning: `max(160·k, 2k)`.
pub fn contraction_limit(k: usize) -> usize {
    (160 * k).max(2 * k)
}

/// LIFO contraction history; every memento is one level.
#[derive(Clone, Debug, Default)]
pub struct Hierarchy {
    mementos: Vec<ContractionMemento>,
}

impl Hierarchy {
    pub fn num_levels(&self) -> usize {
        self.mementos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mementos.is_empty()
    }

    pub fn mementos(&self) -> &[ContractionMemento] {
        &self.mementos
    }

    /// Undoes the most recent contraction on `h` and extends `p` over the
    /// restored vertex. Returns the memento, or `None` at the finest level.
    pub fn project_one(
        &mut self,
        h: &mut Hypergraph,
        p: &mut Partition,
    ) -> Result<Option<ContractionMemento>> {
        let Some(m) = self.mementos.pop() else {
            return Ok(None);
        };
        if let Err(e) = h.uncontract(&m) {
            self.mementos.push(m);
            return Err(e);
        }
        p.project_uncontraction(&m);
        Ok(Some(m))
    }

    /// Undoes every contraction without a partition.
    pub fn undo_all(mut self, h: &mut Hypergraph) -> Result<()> {
        while let Some(m) = self.mementos.pop() {
            h.uncontract(&m)?;
        }
        Ok(())
    }

    /// For every vertex id, the enabled coarse vertex it was merged into.
    pub fn representatives(&self, num_vertices: usize) -> Vec<VertexId> {
        let mut rep: Vec<VertexId> = (0..num_vertices).collect();
        // u may itself be contracted later; in reverse order rep[u] is final.
        for m in self.mementos.iter().rev() {
            rep[m.v] = rep[m.u];
        }
        rep
    }
}

/// Projects a coarse partition through every level of `hierarchy`.
pub fn project_partition(
    h: &mut Hypergraph,
    mut hierarchy: Hierarchy,
    p: &mut Partition,
) -> Result<()> {
    while hierarchy.project_one(h, p)?.is_some() {}
    Ok(())
}

/// Visits enabled vertices in random order and contracts each with its
/// highest-rated eligible neighbor, pass after pass, until `stop` fires or a
/// pass makes no contraction. Pairs whose combined weight exceeds
/// `weight_cap` are never contracted; rating ties are broken uniformly.
pub fn coarsen(
    h: &mut Hypergraph,
    rating: &dyn RatingFunction,
    constraint: &ContractionConstraint<'_>,
    stop: StopRule,
    weight_cap: Weight,
    rng: &mut Rng,
) -> Hierarchy {
    let mut hierarchy = Hierarchy::default();
    let limit = match stop {
        StopRule::VertexLimit(l) => l,
        StopRule::Fixpoint => 0,
    };
    let mut score = vec![0.0f64; h.num_vertices()];
    let mut touched: Vec<VertexId> = Vec::new();
    let mut order: Vec<VertexId> = Vec::new();

    'passes: loop {
        order.clear();
        order.extend(h.enabled_vertices());
        order.shuffle(rng);
        let mut contracted = false;
        for &u in &order {
            if h.num_enabled_vertices() <= limit {
                break 'passes;
            }
            if !h.is_enabled(u) {
                continue;
            }
            let Some(v) = best_neighbor(h, rating, constraint, weight_cap, u, &mut score, &mut touched, rng)
            else {
                continue;
            };
            let m = h
                .contract(u, v)
                .expect("coarsening only contracts distinct enabled vertices");
            hierarchy.mementos.push(m);
            contracted = true;
        }
        if !contracted {
            break;
        }
    }
    hierarchy
}

#[allow(clippy::too_many_arguments)]
fn best_neighbor(
    h: &Hypergraph,
    rating: &dyn RatingFunction,
    constraint: &ContractionConstraint<'_>,
    weight_cap: Weight,
    u: VertexId,
    score: &mut [f64],
    touched: &mut Vec<VertexId>,
    rng: &mut Rng,
) -> Option<VertexId> {
    for &e in h.incident_nets(u) {
        let pins = h.pins(e);
        if pins.len() < 2 {
            continue;
        }
        let s = rating.net_score(h, e);
        for &w in pins {
            if w == u {
                continue;
            }
            if score[w] == 0.0 {
                touched.push(w);
            }
            score[w] += s;
        }
    }
    let cu = h.vertex_weight(u);
    let mut best = None;
    let mut best_score = f64::NEG_INFINITY;
    let mut ties = 0u32;
    for &w in touched.iter() {
        let raw = score[w];
        score[w] = 0.0;
        let cw = h.vertex_weight(w);
        if cu + cw > weight_cap || !constraint.allows(u, w) {
            continue;
        }
        let s = rating.finalize(raw, cu, cw);
        if s > best_score {
            best_score = s;
            best = Some(w);
            ties = 1;
        } else if s == best_score {
            ties += 1;
            if rng.gen_range(0..ties) == 0 {
                best = Some(w);
            }
        }
    }
    touched.clear();
    best
}

/// Checks that `blocks` is constant on every coarse vertex of `hierarchy`.
pub fn is_homogeneous(hierarchy: &Hierarchy, num_vertices: usize, blocks: &[BlockId]) -> bool {
    let rep = hierarchy.representatives(num_vertices);
    (0..num_vertices).all(|v| blocks[v] == blocks[rep[v]])
}

#[cfg(test)]
pub(crate) fn check_weight_cap(h: &Hypergraph, cap: Weight) -> Result<()> {
    match h.enabled_vertices().find(|&v| h.vertex_weight(v) > cap) {
        Some(v) => Err(crate::error::Error::Internal(format!(
            "coarse vertex {v} weighs {} > cap {cap}",
            h.vertex_weight(v)
        ))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::tests::random_hypergraph;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn heavy_edge_examples() {
        let h = Hypergraph::unweighted(3, vec![vec![0, 1]]).unwrap();
        assert!(close(heavy_edge_rating(&h, 0, 1), 1.0));
        assert!(close(heavy_edge_rating(&h, 0, 2), 0.0));
        // {u,v,w} with ω=2 and {u,v} with ω=1: 2/2 + 1/1
        let h = Hypergraph::new(vec![1; 3], vec![2, 1], vec![vec![0, 1, 2], vec![0, 1]]).unwrap();
        assert!(close(heavy_edge_rating(&h, 0, 1), 2.0));
    }

    #[test]
    fn edge_frequency_examples() {
        let h = Hypergraph::unweighted(3, vec![vec![0, 1]]).unwrap();
        assert!(close(edge_frequency_rating(&h, 0, 1, &[0], 0.7), 0.5));
        assert!(close(edge_frequency_rating(&h, 0, 2, &[0], 0.5), 0.0));
        let r = edge_frequency_rating(&h, 0, 1, &[2], 0.5);
        assert!(close(r, (-1.0f64).exp() / 2.0));
        assert!((r - 0.1839).abs() < 1e-4);
        // weight normalization
        let h = Hypergraph::new(vec![2, 3], vec![1], vec![vec![0, 1]]).unwrap();
        assert!(close(edge_frequency_rating(&h, 0, 1, &[0], 0.5), 0.5 / 6.0));
    }

    #[test]
    fn single_pin_nets_ignored_in_ratings() {
        let mut h = Hypergraph::unweighted(3, vec![vec![0, 1], vec![0, 1, 2]]).unwrap();
        h.contract(0, 1).unwrap();
        // net 0 is now {0}; net 1 is {0, 2}
        assert!(close(heavy_edge_rating(&h, 0, 2), 1.0));
    }

    #[test]
    fn two_cliques_collapse_to_two_vertices() {
        // {0,1,2} and {3,4,5} joined internally by nets, no net between them
        let h0 = Hypergraph::unweighted(
            6,
            vec![vec![0, 1], vec![1, 2], vec![0, 2], vec![3, 4], vec![4, 5], vec![3, 4, 5]],
        )
        .unwrap();
        for seed in 0..10 {
            let mut h = h0.clone();
            let mut rng = crate::rng_from_seed(seed);
            let hier = coarsen(
                &mut h,
                &HeavyEdge,
                &ContractionConstraint::Unrestricted,
                StopRule::Fixpoint,
                100,
                &mut rng,
            );
            assert_eq!(h.num_enabled_vertices(), 2);
            assert_eq!(hier.num_levels(), 4);
            hier.undo_all(&mut h).unwrap();
            assert_eq!(h.canonical(), h0.canonical());
        }
    }

    #[test]
    fn disagreeing_parents_give_empty_hierarchy() {
        let mut rng = crate::rng_from_seed(3);
        let mut h = random_hypergraph(&mut rng, 8, 12);
        let b1: Vec<_> = (0..8).collect();
        let b2 = vec![0; 8];
        let hier = coarsen(
            &mut h,
            &HeavyEdge,
            &ContractionConstraint::BothParentsAgree(&b1, &b2),
            StopRule::Fixpoint,
            1000,
            &mut rng,
        );
        assert!(hier.is_empty());
    }

    #[test]
    fn same_block_coarsening_is_homogeneous() {
        let mut rng = crate::rng_from_seed(8);
        for _ in 0..30 {
            let mut h = random_hypergraph(&mut rng, 40, 60);
            let blocks: Vec<_> = (0..40).map(|_| rng.gen_range(0..3)).collect();
            let cap = 12;
            let hier = coarsen(
                &mut h,
                &HeavyEdge,
                &ContractionConstraint::SameBlock(&blocks),
                StopRule::Fixpoint,
                cap,
                &mut rng,
            );
            assert!(is_homogeneous(&hier, 40, &blocks));
            check_weight_cap(&h, cap).unwrap();
            h.check_consistency().unwrap();
        }
    }

    #[test]
    fn vertex_limit_is_respected() {
        let mut rng = crate::rng_from_seed(4);
        let mut h = random_hypergraph(&mut rng, 200, 400);
        coarsen(
            &mut h,
            &HeavyEdge,
            &ContractionConstraint::Unrestricted,
            StopRule::VertexLimit(50),
            1_000,
            &mut rng,
        );
        assert!(h.num_enabled_vertices() >= 50);
        assert!(h.num_enabled_vertices() <= 60);
    }

    #[test]
    fn projection_preserves_objective_per_level() {
        let mut rng = crate::rng_from_seed(6);
        for _ in 0..10 {
            let mut h = random_hypergraph(&mut rng, 50, 80);
            let original = h.canonical();
            let mut hier = coarsen(
                &mut h,
                &HeavyEdge,
                &ContractionConstraint::Unrestricted,
                StopRule::VertexLimit(10),
                1_000,
                &mut rng,
            );
            let blocks: Vec<_> = (0..50).map(|_| rng.gen_range(0..4)).collect();
            let mut p = Partition::new(&h, 4, blocks).unwrap();
            let value = p.objective();
            while hier.project_one(&mut h, &mut p).unwrap().is_some() {
                p.check_consistency(&h).unwrap();
                assert_eq!(p.objective(), value);
            }
            assert_eq!(h.canonical(), original);
        }
    }

    #[test]
    fn k1_projection_is_all_zero() {
        let mut rng = crate::rng_from_seed(2);
        let mut h = random_hypergraph(&mut rng, 30, 40);
        let hier = coarsen(
            &mut h,
            &HeavyEdge,
            &ContractionConstraint::Unrestricted,
            StopRule::Fixpoint,
            1_000,
            &mut rng,
        );
        let mut p = Partition::new(&h, 1, vec![0; 30]).unwrap();
        project_partition(&mut h, hier, &mut p).unwrap();
        assert!(p.blocks().iter().all(|&b| b == 0));
        assert_eq!(p.objective(), 0);
    }

    #[test]
    fn same_block_projection_reproduces_guide() {
        let mut rng = crate::rng_from_seed(10);
        let mut h = random_hypergraph(&mut rng, 40, 60);
        let blocks: Vec<_> = (0..40).map(|_| rng.gen_range(0..3)).collect();
        let hier = coarsen(
            &mut h,
            &HeavyEdge,
            &ContractionConstraint::SameBlock(&blocks),
            StopRule::Fixpoint,
            1_000,
            &mut rng,
        );
        let mut p = Partition::new(&h, 3, blocks.clone()).unwrap();
        project_partition(&mut h, hier, &mut p).unwrap();
        assert_eq!(p.blocks(), &blocks[..]);
    }

    #[test]
    fn accumulated_scores_match_pairwise_rating() {
        let mut rng = crate::rng_from_seed(14);
        let h = random_hypergraph(&mut rng, 15, 25);
        let f: Vec<u32> = (0..25).map(|_| rng.gen_range(0..4)).collect();
        let ef = EdgeFrequency { frequencies: &f, gamma: 0.5 };
        for u in 0..15 {
            let mut score = vec![0.0; 15];
            let mut touched = Vec::new();
            for &e in h.incident_nets(u) {
                if h.net_size(e) < 2 {
                    continue;
                }
                for &w in h.pins(e) {
                    if w != u {
                        if score[w] == 0.0 {
                            touched.push(w);
                        }
                        score[w] += ef.net_score(&h, e);
                    }
                }
            }
            for w in touched {
                let acc = ef.finalize(score[w], h.vertex_weight(u), h.vertex_weight(w));
                assert!(close(acc, edge_frequency_rating(&h, u, w, &f, 0.5)));
            }
        }
    }
}
