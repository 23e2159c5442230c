//! Partitions, objectives, the balance bound and the cut-multiset similarity.

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::hypergraph::{ContractionMemento, Hypergraph, NetId, VertexId, Weight};

pub type BlockId = usize;

/// Sparse `(block, pin count)` entries of one net; entries with count 0 are removed.
type PinCounts = SmallVec<[(u32, u32); 2]>;

/// A k-way block assignment of the enabled vertices of a hypergraph, with
/// per-net pin counts `Φ(e, i)`, block weights and the cached `(λ−1)` value.
///
/// A partition is tied to the state of the hypergraph it was built against.
/// During uncoarsening, [`Partition::project_uncontraction`] keeps the two in
/// step.
#[derive(Clone, Debug)]
pub struct Partition {
    k: usize,
    blocks: Vec<BlockId>,
    pin_counts: Vec<PinCounts>,
    block_weights: Vec<Weight>,
    objective: Weight,
}

impl Partition {
    /// Builds pin counts from scratch. Only the entries of enabled vertices
    /// are validated and used; the others are carried along untouched.
    pub fn new(h: &Hypergraph, k: usize, blocks: Vec<BlockId>) -> Result<Self> {
        if k == 0 {
            return Err(Error::usage("k must be at least 1"));
        }
        if blocks.len() != h.num_vertices() {
            return Err(Error::usage(format!(
                "{} block ids for {} vertices",
                blocks.len(),
                h.num_vertices()
            )));
        }
        let mut block_weights = vec![0; k];
        for v in h.enabled_vertices() {
            let b = blocks[v];
            if b >= k {
                return Err(Error::usage(format!("vertex {v} in block {b}, k = {k}")));
            }
            block_weights[b] += h.vertex_weight(v);
        }
        let mut pin_counts = vec![PinCounts::new(); h.num_nets()];
        let mut objective = 0;
        for e in h.nets() {
            let counts = &mut pin_counts[e];
            for &v in h.pins(e) {
                increment(counts, blocks[v]);
            }
            objective += (counts.len() as Weight - 1) * h.net_weight(e);
        }
        Ok(Self {
            k,
            blocks,
            pin_counts,
            block_weights,
            objective,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn block(&self, v: VertexId) -> BlockId {
        self.blocks[v]
    }

    pub fn blocks(&self) -> &[BlockId] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<BlockId> {
        self.blocks
    }

    pub fn block_weight(&self, b: BlockId) -> Weight {
        self.block_weights[b]
    }

    pub fn block_weights(&self) -> &[Weight] {
        &self.block_weights
    }

    pub fn max_block_weight(&self) -> Weight {
        self.block_weights.iter().copied().max().unwrap_or(0)
    }

    /// Cached `(λ−1)` value.
    pub fn objective(&self) -> Weight {
        self.objective
    }

    /// `Φ(e, b)`.
    pub fn pin_count(&self, e: NetId, b: BlockId) -> usize {
        self.pin_counts[e]
            .iter()
            .find(|&&(blk, _)| blk as usize == b)
            .map_or(0, |&(_, c)| c as usize)
    }

    /// `(block, Φ(e, block))` for every block in `Λ(e)`, in no particular order.
    pub fn pin_counts(&self, e: NetId) -> impl Iterator<Item = (BlockId, usize)> + '_ {
        self.pin_counts[e].iter().map(|&(b, c)| (b as usize, c as usize))
    }

    /// `Λ(e)`, sorted.
    pub fn connectivity_set(&self, e: NetId) -> Vec<BlockId> {
        let mut s: Vec<_> = self.pin_counts[e].iter().map(|&(b, _)| b as usize).collect();
        s.sort_unstable();
        s
    }

    /// `λ(e)`.
    pub fn connectivity(&self, e: NetId) -> usize {
        self.pin_counts[e].len()
    }

    /// True if some incident net of `v` is cut.
    pub fn is_border(&self, h: &Hypergraph, v: VertexId) -> bool {
        h.incident_nets(v).iter().any(|&e| self.pin_counts[e].len() > 1)
    }

    pub fn border_vertices(&self, h: &Hypergraph) -> Vec<VertexId> {
        h.enabled_vertices().filter(|&v| self.is_border(h, v)).collect()
    }

    /// Moves `v` to block `to`, updating pin counts, block weights and the
    /// objective. Returns the change of `(λ−1)` (negative = improvement).
    pub fn move_vertex(&mut self, h: &Hypergraph, v: VertexId, to: BlockId) -> Weight {
        let from = self.blocks[v];
        if from == to {
            return 0;
        }
        debug_assert!(to < self.k);
        let mut delta = 0;
        for &e in h.incident_nets(v) {
            let counts = &mut self.pin_counts[e];
            if decrement(counts, from) == 0 {
                delta -= h.net_weight(e);
            }
            if increment(counts, to) == 1 {
                delta += h.net_weight(e);
            }
        }
        let c = h.vertex_weight(v);
        self.block_weights[from] -= c;
        self.block_weights[to] += c;
        self.blocks[v] = to;
        self.objective += delta;
        delta
    }

    /// Extends the partition over a vertex that `h.uncontract(memento)` just
    /// re-enabled: `v` joins `u`'s block. The objective is unchanged.
    pub fn project_uncontraction(&mut self, memento: &ContractionMemento) {
        let b = self.blocks[memento.u];
        self.blocks[memento.v] = b;
        for &e in &memento.dropped_nets {
            increment(&mut self.pin_counts[e], b);
        }
    }

    /// Compares every cached quantity against a from-scratch rebuild.
    pub fn check_consistency(&self, h: &Hypergraph) -> Result<()> {
        let fresh = Partition::new(h, self.k, self.blocks.clone())?;
        if fresh.block_weights != self.block_weights {
            return Err(Error::Internal(format!(
                "block weights {:?} != recomputed {:?}",
                self.block_weights, fresh.block_weights
            )));
        }
        if fresh.objective != self.objective {
            return Err(Error::Internal(format!(
                "cached objective {} != recomputed {}",
                self.objective, fresh.objective
            )));
        }
        for e in h.nets() {
            let mut a = self.pin_counts[e].to_vec();
            let mut b = fresh.pin_counts[e].to_vec();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(Error::Internal(format!("pin counts of net {e} out of sync")));
            }
        }
        Ok(())
    }

    /// The multiset `D` of cut nets, each with multiplicity `λ(e) − 1`.
    pub fn cut_multiset(&self, h: &Hypergraph) -> CutMultiset {
        CutMultiset::from_entries(
            h.nets()
                .filter(|&e| self.pin_counts[e].len() > 1)
                .map(|e| (e, self.pin_counts[e].len() as u32 - 1))
                .collect(),
        )
    }
}

fn increment(counts: &mut PinCounts, b: BlockId) -> u32 {
    let b = b as u32;
    match counts.iter_mut().find(|(blk, _)| *blk == b) {
        Some((_, c)) => {
            *c += 1;
            *c
        }
        None => {
            counts.push((b, 1));
            1
        }
    }
}

fn decrement(counts: &mut PinCounts, b: BlockId) -> u32 {
    let b = b as u32;
    let pos = counts
        .iter()
        .position(|&(blk, _)| blk == b)
        .expect("decrementing a block absent from the net");
    counts[pos].1 -= 1;
    let left = counts[pos].1;
    if left == 0 {
        counts.swap_remove(pos);
    }
    left
}

fn checked_sum(h: &Hypergraph, p: &Partition, per_net: impl Fn(usize) -> Weight) -> Result<Weight> {
    let mut total = 0;
    for e in h.nets() {
        let pins: usize = p.pin_counts(e).map(|(_, c)| c).sum();
        if pins != h.net_size(e) {
            return Err(Error::Internal(format!(
                "net {e}: pin counts sum to {pins}, net has {} pins",
                h.net_size(e)
            )));
        }
        total += per_net(p.connectivity(e)) * h.net_weight(e);
    }
    Ok(total)
}

/// `Σ (λ(e) − 1)·ω(e)` evaluated from the partition's pin-count tables.
pub fn connectivity_metric(h: &Hypergraph, p: &Partition) -> Result<Weight> {
    let value = checked_sum(h, p, |lambda| lambda as Weight - 1)?;
    if value != p.objective() {
        return Err(Error::Internal(format!(
            "cached objective {} != evaluated {value}",
            p.objective()
        )));
    }
    Ok(value)
}

/// `Σ ω(e)` over cut nets.
pub fn cut_metric(h: &Hypergraph, p: &Partition) -> Result<Weight> {
    checked_sum(h, p, |lambda| Weight::from(lambda > 1))
}

const PPM: i128 = 1_000_000;

/// `L_max = (1+ε)·⌈c(V)/k⌉`, rounded down to an integer weight.
///
/// ε is taken at micro-unit resolution so that the scaling is exact integer
/// arithmetic.
pub fn lmax(total_weight: Weight, k: usize, epsilon: f64) -> Result<Weight> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::usage(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if k == 0 {
        return Err(Error::usage("k must be at least 1"));
    }
    let eps_ppm = (epsilon * PPM as f64).round() as i128;
    let ceil = (total_weight as i128 + k as i128 - 1) / k as i128;
    Ok(((PPM + eps_ppm) * ceil / PPM) as Weight)
}

pub fn is_balanced(h: &Hypergraph, p: &Partition, epsilon: f64) -> Result<bool> {
    let bound = lmax(h.total_weight(), p.k(), epsilon)?;
    Ok(p.block_weights().iter().all(|&w| w <= bound))
}

/// Multiset of cut nets; net `e` appears `λ(e) − 1` times.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CutMultiset {
    /// `(net, multiplicity)`, sorted by net, multiplicities ≥ 1.
    entries: Vec<(NetId, u32)>,
}

impl CutMultiset {
    /// Entries with multiplicity 0 are dropped; duplicates are summed.
    pub fn from_entries(mut entries: Vec<(NetId, u32)>) -> Self {
        entries.sort_unstable();
        let mut merged: Vec<(NetId, u32)> = Vec::with_capacity(entries.len());
        for (e, m) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 += m,
                _ => merged.push((e, m)),
            }
        }
        merged.retain(|&(_, m)| m > 0);
        Self { entries: merged }
    }

    pub fn entries(&self) -> &[(NetId, u32)] {
        &self.entries
    }

    pub fn multiplicity(&self, e: NetId) -> u32 {
        self.entries
            .binary_search_by_key(&e, |&(net, _)| net)
            .map_or(0, |i| self.entries[i].1)
    }

    /// Number of distinct cut nets.
    pub fn num_cut_nets(&self) -> usize {
        self.entries.len()
    }
}

/// `|D_a ⊖ D_b| = Σ_e |m_a(e) − m_b(e)|`.
pub fn similarity_distance(a: &CutMultiset, b: &CutMultiset) -> u64 {
    let (a, b) = (&a.entries, &b.entries);
    let (mut i, mut j, mut d) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                d += a[i].1 as u64;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                d += b[j].1 as u64;
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                d += a[i].1.abs_diff(b[j].1) as u64;
                i += 1;
                j += 1;
            }
        }
    }
    d += a[i..].iter().map(|&(_, m)| m as u64).sum::<u64>();
    d += b[j..].iter().map(|&(_, m)| m as u64).sum::<u64>();
    d
}

/// `f(e)`: in how many of the first `t` signatures net `e` is cut.
/// `best` must be sorted by fitness, best first.
pub fn edge_frequencies(num_nets: usize, best: &[&CutMultiset], t: usize) -> Result<Vec<u32>> {
    if t == 0 {
        return Err(Error::usage("edge frequencies need t >= 1"));
    }
    if t > best.len() {
        return Err(Error::usage(format!(
            "t = {t} exceeds the {} available individuals",
            best.len()
        )));
    }
    let mut f = vec![0u32; num_nets];
    for d in &best[..t] {
        for &(e, _) in d.entries() {
            f[e] += 1;
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::tests::random_hypergraph;
    use proptest::prelude::*;
    use rand::Rng as _;
    use std::collections::{BTreeMap, BTreeSet};

    /// λ(e) per net from the block array alone.
    fn lambdas(h: &Hypergraph, blocks: &[BlockId]) -> Vec<usize> {
        (0..h.num_nets())
            .map(|e| h.pins(e).iter().map(|&v| blocks[v]).collect::<BTreeSet<_>>().len())
            .collect()
    }

    fn oracle_connectivity(h: &Hypergraph, blocks: &[BlockId]) -> Weight {
        lambdas(h, blocks)
            .iter()
            .enumerate()
            .map(|(e, &l)| (l as Weight - 1) * h.net_weight(e))
            .sum()
    }

    fn oracle_cut(h: &Hypergraph, blocks: &[BlockId]) -> Weight {
        lambdas(h, blocks)
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 1)
            .map(|(e, _)| h.net_weight(e))
            .sum()
    }

    fn random_blocks(rng: &mut crate::Rng, n: usize, k: usize) -> Vec<BlockId> {
        (0..n).map(|_| rng.gen_range(0..k)).collect()
    }

    #[test]
    fn connectivity_worked_example() {
        // e1 = {a,b,c}, e2 = {c,d}; blocks {a,b}, {c,d}
        let h = Hypergraph::unweighted(4, vec![vec![0, 1, 2], vec![2, 3]]).unwrap();
        let p = Partition::new(&h, 2, vec![0, 0, 1, 1]).unwrap();
        assert_eq!(p.connectivity(0), 2);
        assert_eq!(p.connectivity(1), 1);
        assert_eq!(connectivity_metric(&h, &p).unwrap(), 1);
        assert_eq!(cut_metric(&h, &p).unwrap(), 1);
    }

    #[test]
    fn single_block_has_no_cut() {
        let mut rng = crate::rng_from_seed(1);
        let h = random_hypergraph(&mut rng, 10, 12);
        let p = Partition::new(&h, 1, vec![0; 10]).unwrap();
        assert_eq!(connectivity_metric(&h, &p).unwrap(), 0);
        assert_eq!(cut_metric(&h, &p).unwrap(), 0);
    }

    #[test]
    fn every_net_cut_bisection() {
        let h = Hypergraph::new(vec![1; 4], vec![2, 3], vec![vec![0, 1], vec![2, 3]]).unwrap();
        let p = Partition::new(&h, 2, vec![0, 1, 0, 1]).unwrap();
        assert_eq!(cut_metric(&h, &p).unwrap(), 5);
        assert_eq!(connectivity_metric(&h, &p).unwrap(), 5);
    }

    #[test]
    fn metrics_match_oracle_on_random_instances() {
        let mut rng = crate::rng_from_seed(2);
        for _ in 0..200 {
            let h = random_hypergraph(&mut rng, 6, 5);
            let blocks = random_blocks(&mut rng, 6, 3);
            let p = Partition::new(&h, 3, blocks.clone()).unwrap();
            assert_eq!(connectivity_metric(&h, &p).unwrap(), oracle_connectivity(&h, &blocks));
            assert_eq!(cut_metric(&h, &p).unwrap(), oracle_cut(&h, &blocks));
            assert!(p.objective() >= cut_metric(&h, &p).unwrap());
        }
    }

    #[test]
    fn bisection_connectivity_equals_cut() {
        let mut rng = crate::rng_from_seed(4);
        for _ in 0..100 {
            let h = random_hypergraph(&mut rng, 9, 12);
            let p = Partition::new(&h, 2, random_blocks(&mut rng, 9, 2)).unwrap();
            assert_eq!(p.objective(), cut_metric(&h, &p).unwrap());
        }
    }

    #[test]
    fn incremental_moves_match_rebuild() {
        let mut rng = crate::rng_from_seed(9);
        let h = random_hypergraph(&mut rng, 30, 40);
        let mut p = Partition::new(&h, 4, random_blocks(&mut rng, 30, 4)).unwrap();
        for _ in 0..500 {
            let v = rng.gen_range(0..30);
            let to = rng.gen_range(0..4);
            let before = p.objective();
            let delta = p.move_vertex(&h, v, to);
            assert_eq!(p.objective(), before + delta);
            p.check_consistency(&h).unwrap();
            assert_eq!(p.objective(), oracle_connectivity(&h, p.blocks()));
        }
    }

    #[test]
    fn projection_keeps_objective() {
        let mut rng = crate::rng_from_seed(12);
        let mut h = random_hypergraph(&mut rng, 20, 30);
        let blocks = random_blocks(&mut rng, 20, 3);
        let mut mementos = Vec::new();
        for _ in 0..10 {
            let enabled: Vec<_> = h.enabled_vertices().collect();
            let u = enabled[rng.gen_range(0..enabled.len())];
            let same: Vec<_> = enabled
                .iter()
                .copied()
                .filter(|&w| w != u && blocks[w] == blocks[u])
                .collect();
            if let Some(&v) = same.first() {
                mementos.push(h.contract(u, v).unwrap());
            }
        }
        let mut p = Partition::new(&h, 3, blocks.clone()).unwrap();
        while let Some(m) = mementos.pop() {
            let before = p.objective();
            h.uncontract(&m).unwrap();
            p.project_uncontraction(&m);
            assert_eq!(p.objective(), before);
            p.check_consistency(&h).unwrap();
        }
        assert_eq!(p.blocks(), &blocks[..]);
    }

    #[test]
    fn lmax_examples() {
        assert_eq!(lmax(10, 2, 0.03).unwrap(), 5);
        assert_eq!(lmax(100 * 32, 32, 0.03).unwrap(), 103);
        assert_eq!(lmax(7, 1, 0.0).unwrap(), 7);
        assert!(lmax(10, 2, -0.1).is_err());
        assert!(lmax(10, 2, f64::NAN).is_err());

        let h = Hypergraph::new(vec![5, 5], vec![1], vec![vec![0, 1]]).unwrap();
        let p = Partition::new(&h, 2, vec![0, 1]).unwrap();
        assert!(is_balanced(&h, &p, 0.03).unwrap());
        let h = Hypergraph::new(vec![6, 4], vec![1], vec![vec![0, 1]]).unwrap();
        let p = Partition::new(&h, 2, vec![0, 1]).unwrap();
        assert!(!is_balanced(&h, &p, 0.03).unwrap());

        let h = Hypergraph::unweighted(4, vec![vec![0, 1, 2, 3]]).unwrap();
        let p = Partition::new(&h, 2, vec![0, 1, 0, 1]).unwrap();
        assert!(is_balanced(&h, &p, 0.0).unwrap());
        let p = Partition::new(&h, 1, vec![0; 4]).unwrap();
        assert!(is_balanced(&h, &p, 0.0).unwrap());
    }

    #[test]
    fn similarity_examples() {
        let a = CutMultiset::from_entries(vec![(1, 1)]);
        let b = CutMultiset::from_entries(vec![(1, 2), (2, 1)]);
        assert_eq!(similarity_distance(&a, &b), 2);
        assert_eq!(similarity_distance(&a, &a), 0);
        assert_eq!(b.multiplicity(2), 1);
        assert_eq!(b.multiplicity(3), 0);
    }

    fn oracle_distance(a: &CutMultiset, b: &CutMultiset) -> u64 {
        let mut m: BTreeMap<NetId, (i64, i64)> = BTreeMap::new();
        for &(e, x) in a.entries() {
            m.entry(e).or_default().0 += x as i64;
        }
        for &(e, x) in b.entries() {
            m.entry(e).or_default().1 += x as i64;
        }
        m.values().map(|(x, y)| (x - y).unsigned_abs()).sum()
    }

    #[test]
    fn cut_multiset_tracks_lambda() {
        let mut rng = crate::rng_from_seed(21);
        let h = random_hypergraph(&mut rng, 12, 20);
        let blocks = random_blocks(&mut rng, 12, 4);
        let p = Partition::new(&h, 4, blocks.clone()).unwrap();
        let d = p.cut_multiset(&h);
        let lam = lambdas(&h, &blocks);
        for e in 0..h.num_nets() {
            assert_eq!(d.multiplicity(e) as usize, lam[e] - 1);
        }
    }

    #[test]
    fn edge_frequency_examples() {
        let mut rng = crate::rng_from_seed(31);
        let h = random_hypergraph(&mut rng, 10, 15);
        let parts: Vec<_> = (0..5)
            .map(|_| Partition::new(&h, 3, random_blocks(&mut rng, 10, 3)).unwrap())
            .collect();
        let sigs: Vec<_> = parts.iter().map(|p| p.cut_multiset(&h)).collect();
        let refs: Vec<_> = sigs.iter().collect();

        let f1 = edge_frequencies(h.num_nets(), &refs, 1).unwrap();
        for e in 0..h.num_nets() {
            assert_eq!(f1[e], u32::from(parts[0].connectivity(e) > 1));
        }
        let f3 = edge_frequencies(h.num_nets(), &refs, 3).unwrap();
        for e in 0..h.num_nets() {
            let expected = parts[..3].iter().filter(|p| p.connectivity(e) > 1).count();
            assert_eq!(f3[e] as usize, expected);
        }
        let same = vec![&sigs[0]; 4];
        let f = edge_frequencies(h.num_nets(), &same, 4).unwrap();
        assert!(f.iter().all(|&x| x == 0 || x == 4));
        assert!(edge_frequencies(h.num_nets(), &refs, 0).is_err());
        assert!(edge_frequencies(h.num_nets(), &refs, 6).is_err());
    }

    #[test]
    fn partition_rejects_out_of_range_blocks() {
        let h = Hypergraph::unweighted(2, vec![vec![0, 1]]).unwrap();
        assert!(Partition::new(&h, 2, vec![0, 2]).is_err());
        assert!(Partition::new(&h, 2, vec![0]).is_err());
        assert!(Partition::new(&h, 0, vec![0, 0]).is_err());
    }

    fn multiset_strategy() -> impl Strategy<Value = CutMultiset> {
        proptest::collection::vec((0usize..12, 0u32..4), 0..10).prop_map(CutMultiset::from_entries)
    }

    proptest! {
        #[test]
        fn similarity_is_a_metric(a in multiset_strategy(), b in multiset_strategy(), c in multiset_strategy()) {
            let ab = similarity_distance(&a, &b);
            prop_assert_eq!(ab, oracle_distance(&a, &b));
            prop_assert_eq!(similarity_distance(&a, &a), 0);
            prop_assert_eq!(ab, similarity_distance(&b, &a));
            prop_assert!(similarity_distance(&a, &c) <= ab + similarity_distance(&b, &c));
        }
    }
}
