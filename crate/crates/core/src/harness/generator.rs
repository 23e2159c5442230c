//! Synthetic netlist-like instances: vertices on a square grid, mostly
//! small nets over nearby vertices plus a few long-range pins.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, VertexId};

#[derive(Clone, Copy, Debug)]
pub struct NetlistSpec {
    pub vertices: usize,
    /// Nets per vertex.
    pub net_ratio: f64,
    /// Probability that a pin is drawn from the whole grid.
    pub global_pin_chance: f64,
}

impl NetlistSpec {
    pub fn new(vertices: usize) -> Self {
        Self { vertices, net_ratio: 1.07, global_pin_chance: 0.03 }
    }
}

/// Net sizes with mean around 3.7: mostly two-pin nets and a long tail.
fn net_size(rng: &mut crate::Rng) -> usize {
    let x: f64 = rng.gen();
    match x {
        x if x < 0.56 => 2,
        x if x < 0.76 => 3,
        x if x < 0.86 => 4,
        x if x < 0.95 => rng.gen_range(5..=8),
        x if x < 0.99 => rng.gen_range(9..=20),
        _ => rng.gen_range(21..=60),
    }
}

pub fn generate_netlist(spec: &NetlistSpec, seed: u64) -> Result<Hypergraph> {
    let n = spec.vertices;
    if n < 2 {
        return Err(Error::usage("a netlist needs at least two vertices"));
    }
    let mut rng = crate::rng_from_seed(seed);
    let width = (n as f64).sqrt().ceil() as usize;
    let height = n.div_ceil(width);
    let m = ((n as f64) * spec.net_ratio).round().max(1.0) as usize;
    let mut pins = Vec::with_capacity(m);
    let mut net: Vec<VertexId> = Vec::new();
    for _ in 0..m {
        let size = net_size(&mut rng).min(n);
        let source = rng.gen_range(0..n);
        let (sx, sy) = ((source % width) as i64, (source / width) as i64);
        let radius = (size as f64).sqrt().ceil() as i64 + 1;
        net.clear();
        net.push(source);
        let mut attempts = 0;
        while net.len() < size && attempts < 20 * size {
            attempts += 1;
            let v = if rng.gen_bool(spec.global_pin_chance) {
                rng.gen_range(0..n)
            } else {
                let x = (sx + rng.gen_range(-radius..=radius)).clamp(0, width as i64 - 1);
                let y = (sy + rng.gen_range(-radius..=radius)).clamp(0, height as i64 - 1);
                let v = y as usize * width + x as usize;
                if v >= n {
                    continue;
                }
                v
            };
            if !net.contains(&v) {
                net.push(v);
            }
        }
        net.shuffle(&mut rng);
        pins.push(net.clone());
    }
    Hypergraph::unweighted(n, pins)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_is_plausible() {
        let h = generate_netlist(&NetlistSpec::new(5000), 1).unwrap();
        assert_eq!(h.num_vertices(), 5000);
        assert_eq!(h.num_nets(), 5350);
        let mean = h.num_pins() as f64 / h.num_nets() as f64;
        assert!((3.0..4.5).contains(&mean), "mean net size {mean}");
        h.check_consistency().unwrap();
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_netlist(&NetlistSpec::new(300), 4).unwrap();
        let b = generate_netlist(&NetlistSpec::new(300), 4).unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }
}
