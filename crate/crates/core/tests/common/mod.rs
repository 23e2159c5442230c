#![allow(dead_code)]

use hypart::{BlockId, Hypergraph, Rng, Weight};
use rand::seq::index::sample;
use rand::Rng as _;

/// Random hypergraph; nets have 2..=max_net distinct pins (capped at n).
pub fn random_hypergraph(rng: &mut Rng, n: usize, m: usize, max_net: usize, max_weight: Weight) -> Hypergraph {
    let pins = (0..m)
        .map(|_| {
            let size = rng.gen_range(2..=max_net.min(n).max(2));
            sample(rng, n, size).into_vec()
        })
        .collect();
    let vw = (0..n).map(|_| rng.gen_range(1..=max_weight)).collect();
    let nw = (0..m).map(|_| rng.gen_range(1..=max_weight)).collect();
    Hypergraph::new(vw, nw, pins).unwrap()
}

pub fn unit_hypergraph(rng: &mut Rng, n: usize, m: usize, max_net: usize) -> Hypergraph {
    random_hypergraph(rng, n, m, max_net, 1)
}

pub fn random_blocks(rng: &mut Rng, n: usize, k: usize) -> Vec<BlockId> {
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

/// `(λ−1)` straight from the definition.
pub fn lambda_minus_one(h: &Hypergraph, blocks: &[BlockId]) -> Weight {
    h.nets()
        .map(|e| {
            let mut seen: Vec<BlockId> = h.pins(e).iter().map(|&v| blocks[v]).collect();
            seen.sort_unstable();
            seen.dedup();
            (seen.len() as Weight - 1) * h.net_weight(e)
        })
        .sum()
}

pub fn connectivity(h: &Hypergraph, blocks: &[BlockId], e: usize) -> usize {
    let mut seen: Vec<BlockId> = h.pins(e).iter().map(|&v| blocks[v]).collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

pub fn block_weights(h: &Hypergraph, blocks: &[BlockId], k: usize) -> Vec<Weight> {
    let mut w = vec![0; k];
    for v in h.enabled_vertices() {
        w[blocks[v]] += h.vertex_weight(v);
    }
    w
}
