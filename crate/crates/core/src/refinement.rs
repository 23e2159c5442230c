//! Localized k-way Fiduccia–Mattheyses refinement of the `(λ−1)` objective.
//!
//! A pass starts from a set of seed vertices, repeatedly applies the
//! highest-gain balance-respecting move, locks the moved vertex, activates
//! the neighbors whose gains may have changed, and finally rolls back to the
//! best prefix of the move sequence. Passes repeat while they improve.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng as _;

use crate::error::Result;
use crate::hypergraph::{Hypergraph, VertexId, Weight};
use crate::metrics::{lmax, BlockId, Partition};
use crate::Rng;

/// Consecutive non-improving moves after which a pass ends.
pub const FRUITLESS_MOVE_LIMIT: usize = 350;

/// Window for the search around a single uncontracted pair. Every level runs
/// one such search, so the full window would dominate the running time.
pub const LOCAL_FRUITLESS_MOVE_LIMIT: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FmConfig {
    pub fruitless_limit: usize,
    /// `None` repeats passes while they improve.
    pub max_passes: Option<usize>,
}

impl Default for FmConfig {
    fn default() -> Self {
        Self {
            fruitless_limit: FRUITLESS_MOVE_LIMIT,
            max_passes: None,
        }
    }
}

impl FmConfig {
    pub fn localized() -> Self {
        Self {
            fruitless_limit: LOCAL_FRUITLESS_MOVE_LIMIT,
            ..Self::default()
        }
    }

    pub fn single_pass() -> Self {
        Self {
            max_passes: Some(1),
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoveGain {
    pub vertex: VertexId,
    pub from: BlockId,
    pub to: BlockId,
    /// Decrease of `(λ−1)` if the move is applied.
    pub gain: Weight,
}

/// `gain(v, a→b) = Σ_{e∈I(v)} ω(e)·([Φ(e,a)=1] − [Φ(e,b)=0])`.
pub fn compute_gain(h: &Hypergraph, p: &Partition, v: VertexId, to: BlockId) -> Weight {
    let from = p.block(v);
    if from == to {
        return 0;
    }
    h.incident_nets(v)
        .iter()
        .map(|&e| {
            let w = h.net_weight(e);
            let leaves = if p.pin_count(e, from) == 1 { w } else { 0 };
            let enters = if p.pin_count(e, to) == 0 { w } else { 0 };
            leaves - enters
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Entry {
    gain: Weight,
    /// Negated block weight after the move: lighter targets first.
    lightness: Weight,
    tie: u32,
    vertex: VertexId,
    to: BlockId,
    version: u32,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.gain, self.lightness, self.tie).cmp(&(other.gain, other.lightness, other.tie))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable FM workspace sized for one hypergraph and block count.
#[derive(Clone, Debug)]
pub struct FmRefiner {
    conn: Vec<Weight>,
    conn_blocks: Vec<BlockId>,
    locked: Vec<u32>,
    activated: Vec<u32>,
    version: Vec<u32>,
    epoch: u32,
    stamp: u32,
    heap: BinaryHeap<Entry>,
    moves: Vec<(VertexId, BlockId)>,
}

impl FmRefiner {
    pub fn new(num_vertices: usize, k: usize) -> Self {
        Self {
            conn: vec![0; k],
            conn_blocks: Vec::with_capacity(k),
            locked: vec![0; num_vertices],
            activated: vec![0; num_vertices],
            version: vec![0; num_vertices],
            epoch: 0,
            stamp: 0,
            heap: BinaryHeap::new(),
            moves: Vec::new(),
        }
    }

    /// Best feasible move of `v` into a block adjacent through a cut net:
    /// `(gain, target, target weight after the move)`.
    fn best_move(
        &mut self,
        h: &Hypergraph,
        p: &Partition,
        lmax: Weight,
        v: VertexId,
        rng: &mut Rng,
    ) -> Option<(Weight, BlockId, Weight)> {
        let from = p.block(v);
        let mut benefit = 0;
        let mut total = 0;
        for &e in h.incident_nets(v) {
            if h.net_size(e) < 2 {
                continue;
            }
            let w = h.net_weight(e);
            total += w;
            for (b, count) in p.pin_counts(e) {
                if b == from {
                    if count == 1 {
                        benefit += w;
                    }
                } else {
                    if self.conn[b] == 0 {
                        self.conn_blocks.push(b);
                    }
                    self.conn[b] += w;
                }
            }
        }
        let cv = h.vertex_weight(v);
        let mut best: Option<(Weight, BlockId, Weight)> = None;
        let mut ties = 0u32;
        for &b in &self.conn_blocks {
            let after = p.block_weight(b) + cv;
            let conn = std::mem::take(&mut self.conn[b]);
            if after > lmax {
                continue;
            }
            let gain = benefit - total + conn;
            let better = match best {
                None => true,
                Some((g, _, w)) => (gain, -after) > (g, -w),
            };
            if better {
                best = Some((gain, b, after));
                ties = 1;
            } else if let Some((g, _, w)) = best {
                if (gain, after) == (g, w) {
                    ties += 1;
                    if rng.gen_range(0..ties) == 0 {
                        best = Some((gain, b, after));
                    }
                }
            }
        }
        self.conn_blocks.clear();
        best
    }

    fn activate(&mut self, h: &Hypergraph, p: &Partition, lmax: Weight, v: VertexId, rng: &mut Rng) {
        self.version[v] = self.version[v].wrapping_add(1);
        if let Some((gain, to, after)) = self.best_move(h, p, lmax, v, rng) {
            self.heap.push(Entry {
                gain,
                lightness: -after,
                tie: rng.gen(),
                vertex: v,
                to,
                version: self.version[v],
            });
        }
    }

    /// Runs FM passes seeded with `seeds`. Returns the decrease of `(λ−1)`
    /// (never negative).
    pub fn refine(
        &mut self,
        h: &Hypergraph,
        p: &mut Partition,
        lmax: Weight,
        seeds: &[VertexId],
        config: &FmConfig,
        rng: &mut Rng,
    ) -> Weight {
        let start = p.objective();
        let mut current: Vec<VertexId> = seeds.to_vec();
        let mut passes = 0;
        loop {
            passes += 1;
            let kept = self.pass(h, p, lmax, &current, config, rng);
            if kept.is_empty() || config.max_passes.is_some_and(|m| passes >= m) {
                break;
            }
            current.truncate(seeds.len());
            current.extend(kept);
        }
        debug_assert!(p.objective() <= start);
        start - p.objective()
    }

    /// One pass; returns the vertices moved in the kept prefix, empty if
    /// the pass did not improve.
    fn pass(
        &mut self,
        h: &Hypergraph,
        p: &mut Partition,
        lmax: Weight,
        seeds: &[VertexId],
        config: &FmConfig,
        rng: &mut Rng,
    ) -> Vec<VertexId> {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.locked.iter_mut().for_each(|x| *x = 0);
            self.epoch = 1;
        }
        self.heap.clear();
        self.moves.clear();
        for &v in seeds {
            if h.is_enabled(v) && self.locked[v] != self.epoch {
                self.activate(h, p, lmax, v, rng);
            }
        }

        let start = p.objective();
        let mut best = start;
        let mut best_len = 0;
        let mut fruitless = 0;
        while let Some(entry) = self.heap.pop() {
            let v = entry.vertex;
            if self.locked[v] == self.epoch || self.version[v] != entry.version {
                continue;
            }
            // Block weights may have changed since the entry was pushed.
            let Some((gain, to, after)) = self.best_move(h, p, lmax, v, rng) else {
                continue;
            };
            if (gain, -after) < (entry.gain, entry.lightness) {
                self.version[v] = self.version[v].wrapping_add(1);
                self.heap.push(Entry {
                    gain,
                    lightness: -after,
                    tie: rng.gen(),
                    vertex: v,
                    to,
                    version: self.version[v],
                });
                continue;
            }

            let from = p.block(v);
            p.move_vertex(h, v, to);
            self.locked[v] = self.epoch;
            self.moves.push((v, from));
            if p.objective() < best {
                best = p.objective();
                best_len = self.moves.len();
                fruitless = 0;
            } else {
                fruitless += 1;
                if fruitless >= config.fruitless_limit {
                    break;
                }
            }

            self.stamp = self.stamp.wrapping_add(1);
            if self.stamp == 0 {
                self.activated.iter_mut().for_each(|x| *x = 0);
                self.stamp = 1;
            }
            for &e in h.incident_nets(v) {
                if h.net_size(e) < 2 {
                    continue;
                }
                // Other pins' gains only change on these transitions.
                if p.pin_count(e, from) > 1 && p.pin_count(e, to) > 2 {
                    continue;
                }
                for &w in h.pins(e) {
                    if w != v && self.locked[w] != self.epoch && self.activated[w] != self.stamp {
                        self.activated[w] = self.stamp;
                        self.activate(h, p, lmax, w, rng);
                    }
                }
            }
        }

        while self.moves.len() > best_len {
            let (v, from) = self.moves.pop().expect("len checked");
            p.move_vertex(h, v, from);
        }
        debug_assert_eq!(p.objective(), best);
        if best < start {
            self.moves.iter().map(|&(v, _)| v).collect()
        } else {
            Vec::new()
        }
    }
}

/// One-shot FM refinement; allocates a fresh workspace.
pub fn fm_refine(
    h: &Hypergraph,
    p: &mut Partition,
    epsilon: f64,
    touched: &[VertexId],
    config: &FmConfig,
    rng: &mut Rng,
) -> Result<Weight> {
    let bound = lmax(h.total_weight(), p.k(), epsilon)?;
    let mut fm = FmRefiner::new(h.num_vertices(), p.k());
    Ok(fm.refine(h, p, bound, touched, config, rng))
}
