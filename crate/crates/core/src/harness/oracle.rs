use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Weight};
use crate::metrics::{lmax, BlockId};

/// Largest `k^n` the oracle agrees to enumerate.
pub const MAX_ENUMERATION: u64 = 10_000_000;

/// Exhaustive minimum of `λ−1` over all balanced assignments of the enabled
/// vertices. The first optimal assignment in lexicographic order is returned.
pub fn brute_force_optimum(h: &Hypergraph, k: usize, epsilon: f64) -> Result<(Weight, Vec<BlockId>)> {
    let bound = lmax(h.total_weight(), k, epsilon)?;
    if k > 128 {
        return Err(Error::usage("oracle supports k <= 128"));
    }
    let vertices: Vec<usize> = h.enabled_vertices().collect();
    let n = vertices.len();
    let mut count = 1u64;
    for _ in 0..n {
        count = count.saturating_mul(k as u64);
        if count > MAX_ENUMERATION {
            return Err(Error::usage(format!(
                "{k}^{n} assignments exceed the enumeration limit of {MAX_ENUMERATION}"
            )));
        }
    }
    let nets: Vec<usize> = h.nets().collect();
    let mut digits = vec![0usize; n];
    let mut blocks = vec![0; h.num_vertices()];
    let mut best: Option<(Weight, Vec<BlockId>)> = None;
    let mut weights = vec![0; k];
    for _ in 0..count {
        weights.iter_mut().for_each(|w| *w = 0);
        for (i, &v) in vertices.iter().enumerate() {
            blocks[v] = digits[i];
            weights[digits[i]] += h.vertex_weight(v);
        }
        if weights.iter().all(|&w| w <= bound) {
            let value: Weight = nets
                .iter()
                .map(|&e| {
                    let mask = h.pins(e).iter().fold(0u128, |m, &v| m | 1 << blocks[v]);
                    (mask.count_ones() as Weight - 1) * h.net_weight(e)
                })
                .sum();
            if best.as_ref().map_or(true, |b| value < b.0) {
                best = Some((value, blocks.clone()));
            }
        }
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < k {
                break;
            }
            *d = 0;
        }
    }
    best.ok_or_else(|| Error::Infeasible(format!("no balanced {k}-way assignment exists")))
}
