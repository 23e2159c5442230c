//! Flat initial partitioning of the coarsest hypergraph.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, VertexId, Weight};
use crate::metrics::{lmax, BlockId, Partition};
use crate::refinement::{FmConfig, FmRefiner};
use crate::Rng;

/// Runs per portfolio member.
pub const PORTFOLIO_RUNS: usize = 5;

const UNASSIGNED: BlockId = BlockId::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialAlgorithm {
    Random,
    BfsGrowing,
}

pub const PORTFOLIO: [InitialAlgorithm; 2] = [InitialAlgorithm::Random, InitialAlgorithm::BfsGrowing];

impl InitialAlgorithm {
    pub fn run(self, h: &Hypergraph, k: usize, epsilon: f64, rng: &mut Rng) -> Result<Partition> {
        match self {
            Self::Random => random_partition(h, k, epsilon, rng),
            Self::BfsGrowing => bfs_growing_partition(h, k, epsilon, rng),
        }
    }
}

fn lightest(weights: &[Weight]) -> BlockId {
    (0..weights.len())
        .min_by_key(|&b| weights[b])
        .expect("k >= 1")
}

/// Puts vertices, in random order, into the currently lightest block.
pub fn random_partition(h: &Hypergraph, k: usize, epsilon: f64, rng: &mut Rng) -> Result<Partition> {
    let bound = lmax(h.total_weight(), k, epsilon)?;
    let mut order: Vec<VertexId> = h.enabled_vertices().collect();
    order.shuffle(rng);
    let mut blocks = vec![0; h.num_vertices()];
    let mut weights = vec![0; k];
    for v in order {
        let b = lightest(&weights);
        let c = h.vertex_weight(v);
        if weights[b] + c > bound {
            return Err(Error::Infeasible(format!(
                "vertex {v} of weight {c} fits no block (L_max = {bound})"
            )));
        }
        weights[b] += c;
        blocks[v] = b;
    }
    Partition::new(h, k, blocks)
}

/// Farthest unassigned vertex from `start` in a BFS restricted to
/// unassigned vertices.
fn peripheral(h: &Hypergraph, blocks: &[BlockId], start: VertexId, seen: &mut [u32], stamp: u32) -> VertexId {
    let mut queue = VecDeque::from([start]);
    seen[start] = stamp;
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &e in h.incident_nets(v) {
            for &w in h.pins(e) {
                if seen[w] != stamp && blocks[w] == UNASSIGNED {
                    seen[w] = stamp;
                    queue.push_back(w);
                }
            }
        }
    }
    last
}

/// Grows blocks `0..k−1` one after another by BFS over nets until each
/// reaches `⌈c(V)/k⌉`; the rest goes to block `k−1`. A repair pass then moves
/// vertices out of overloaded blocks.
///
/// Each block starts at a pseudo-peripheral vertex of the unassigned part,
/// found by a BFS from a random unassigned vertex.
pub fn bfs_growing_partition(
    h: &Hypergraph,
    k: usize,
    epsilon: f64,
    rng: &mut Rng,
) -> Result<Partition> {
    let bound = lmax(h.total_weight(), k, epsilon)?;
    let target = (h.total_weight() + k as Weight - 1) / k as Weight;
    let mut blocks = vec![UNASSIGNED; h.num_vertices()];
    let mut weights = vec![0; k];
    let mut unassigned: Vec<VertexId> = h.enabled_vertices().collect();
    unassigned.shuffle(rng);
    let mut seen = vec![0u32; h.num_vertices()];
    let mut stamp = 0u32;
    let mut queued = vec![false; h.num_vertices()];

    for b in 0..k.saturating_sub(1) {
        let mut queue = VecDeque::new();
        'grow: while weights[b] < target {
            if queue.is_empty() {
                unassigned.retain(|&v| blocks[v] == UNASSIGNED);
                let Some(&start) = unassigned.get(rng.gen_range(0..unassigned.len().max(1))) else {
                    break 'grow;
                };
                stamp += 1;
                let seed = peripheral(h, &blocks, start, &mut seen, stamp);
                queued[seed] = true;
                queue.push_back(seed);
            }
            while let Some(v) = queue.pop_front() {
                if blocks[v] != UNASSIGNED {
                    continue;
                }
                blocks[v] = b;
                weights[b] += h.vertex_weight(v);
                if weights[b] >= target {
                    break 'grow;
                }
                for &e in h.incident_nets(v) {
                    for &w in h.pins(e) {
                        if blocks[w] == UNASSIGNED && !queued[w] {
                            queued[w] = true;
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        for v in queue {
            queued[v] = false;
        }
    }
    for v in h.enabled_vertices() {
        if blocks[v] == UNASSIGNED {
            blocks[v] = k - 1;
            weights[k - 1] += h.vertex_weight(v);
        }
    }

    // repair: move vertices from overloaded blocks into the lightest block that fits
    for b in 0..k {
        if weights[b] <= bound {
            continue;
        }
        let mut members: Vec<VertexId> = h.enabled_vertices().filter(|&v| blocks[v] == b).collect();
        members.shuffle(rng);
        for v in members {
            if weights[b] <= bound {
                break;
            }
            let c = h.vertex_weight(v);
            let to = lightest(&weights);
            if to != b && weights[to] + c <= bound {
                weights[b] -= c;
                weights[to] += c;
                blocks[v] = to;
            }
        }
        if weights[b] > bound {
            return Err(Error::Infeasible(format!(
                "block {b} stays at weight {} > L_max = {bound} after repair",
                weights[b]
            )));
        }
    }
    Partition::new(h, k, blocks)
}

/// Runs every portfolio member `runs` times, polishes each candidate with one
/// FM pass over its border vertices and returns the best; ties go to the
/// first candidate found.
pub fn portfolio_initial_partition(
    h: &Hypergraph,
    k: usize,
    epsilon: f64,
    runs: usize,
    rng: &mut Rng,
) -> Result<Partition> {
    portfolio_with(h, k, epsilon, &PORTFOLIO, runs, rng)
}

pub fn portfolio_with(
    h: &Hypergraph,
    k: usize,
    epsilon: f64,
    members: &[InitialAlgorithm],
    runs: usize,
    rng: &mut Rng,
) -> Result<Partition> {
    if runs == 0 || members.is_empty() {
        return Err(Error::usage("portfolio needs at least one member and one run"));
    }
    let bound = lmax(h.total_weight(), k, epsilon)?;
    let mut fm = FmRefiner::new(h.num_vertices(), k);
    let mut best: Option<Partition> = None;
    let mut last_err = None;
    for &member in members {
        for _ in 0..runs {
            let mut candidate = match member.run(h, k, epsilon, rng) {
                Ok(p) => p,
                Err(e @ Error::Infeasible(_)) => {
                    last_err = Some(e);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let border = candidate.border_vertices(h);
            fm.refine(h, &mut candidate, bound, &border, &FmConfig::single_pass(), rng);
            if best.as_ref().map_or(true, |b| candidate.objective() < b.objective()) {
                best = Some(candidate);
            }
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::Infeasible("no candidate".into())))
}
