//! Weighted hypergraph with bidirectional incidence and reversible
//! vertex-pair contraction.
//!
//! Contracting `(u, v)` merges `v` into `u`: `u` takes over `v`'s weight,
//! replaces `v` in every net not already containing `u`, and `v` is removed
//! from the nets the two share. Every contraction returns a
//! [`ContractionMemento`] holding exactly the deltas needed to undo it.
//! Uncontraction is strictly LIFO over the whole contraction history.

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type NetId = usize;
pub type Weight = i64;

#[derive(Clone, Debug)]
pub struct Hypergraph {
    vertex_weight: Vec<Weight>,
    net_weight: Vec<Weight>,
    pins: Vec<Vec<VertexId>>,
    incident: Vec<Vec<NetId>>,
    vertex_enabled: Vec<bool>,
    net_enabled: Vec<bool>,
    num_enabled: usize,
    total_weight: Weight,
    /// `(u, v)` of every un-reverted contraction, oldest first.
    history: Vec<(VertexId, VertexId)>,
}

/// Record of a single contraction, consumed by [`Hypergraph::uncontract`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionMemento {
    pub u: VertexId,
    pub v: VertexId,
    /// Nets in which `v` was replaced by `u`.
    pub moved_nets: Vec<NetId>,
    /// Nets from which `v` was removed because `u` already was a pin.
    pub dropped_nets: Vec<NetId>,
    pub prior_weight_u: Weight,
    depth: usize,
}

impl ContractionMemento {
    /// Position of this contraction in the history (0 = first).
    pub fn depth(&self) -> usize {
        self.depth
    }
}

/// Order-independent snapshot used to compare hypergraph states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub vertex_weight: Vec<Option<Weight>>,
    pub nets: Vec<Option<(Weight, Vec<VertexId>)>>,
    pub incident: Vec<Option<Vec<NetId>>>,
}

impl Hypergraph {
    /// Builds a hypergraph from pin lists. Weights must be positive, nets
    /// non-empty and free of duplicate pins.
    pub fn new(
        vertex_weight: Vec<Weight>,
        net_weight: Vec<Weight>,
        pins: Vec<Vec<VertexId>>,
    ) -> Result<Self> {
        let n = vertex_weight.len();
        if net_weight.len() != pins.len() {
            return Err(Error::usage(format!(
                "{} net weights for {} nets",
                net_weight.len(),
                pins.len()
            )));
        }
        if let Some(v) = vertex_weight.iter().position(|&c| c <= 0) {
            return Err(Error::usage(format!("vertex {v} has non-positive weight")));
        }
        if let Some(e) = net_weight.iter().position(|&w| w <= 0) {
            return Err(Error::usage(format!("net {e} has non-positive weight")));
        }
        let mut incident = vec![Vec::new(); n];
        let mut seen = vec![usize::MAX; n];
        for (e, net) in pins.iter().enumerate() {
            if net.is_empty() {
                return Err(Error::usage(format!("net {e} has no pins")));
            }
            for &v in net {
                if v >= n {
                    return Err(Error::usage(format!("net {e} has pin {v} out of range")));
                }
                if seen[v] == e {
                    return Err(Error::usage(format!("net {e} contains pin {v} twice")));
                }
                seen[v] = e;
                incident[v].push(e);
            }
        }
        let total_weight = vertex_weight.iter().sum();
        Ok(Self {
            vertex_enabled: vec![true; n],
            net_enabled: vec![true; pins.len()],
            num_enabled: n,
            total_weight,
            vertex_weight,
            net_weight,
            pins,
            incident,
            history: Vec::new(),
        })
    }

    /// Unit vertex and net weights.
    pub fn unweighted(num_vertices: usize, pins: Vec<Vec<VertexId>>) -> Result<Self> {
        let m = pins.len();
        Self::new(vec![1; num_vertices], vec![1; m], pins)
    }

    /// Total number of vertex ids, enabled or not.
    pub fn num_vertices(&self) -> usize {
        self.vertex_weight.len()
    }

    pub fn num_nets(&self) -> usize {
        self.net_weight.len()
    }

    pub fn num_enabled_vertices(&self) -> usize {
        self.num_enabled
    }

    pub fn num_pins(&self) -> usize {
        self.pins.iter().map(Vec::len).sum()
    }

    /// `c(V)`; invariant under contraction.
    pub fn total_weight(&self) -> Weight {
        self.total_weight
    }

    pub fn vertex_weight(&self, v: VertexId) -> Weight {
        self.vertex_weight[v]
    }

    pub fn net_weight(&self, e: NetId) -> Weight {
        self.net_weight[e]
    }

    pub fn pins(&self, e: NetId) -> &[VertexId] {
        &self.pins[e]
    }

    pub fn net_size(&self, e: NetId) -> usize {
        self.pins[e].len()
    }

    pub fn incident_nets(&self, v: VertexId) -> &[NetId] {
        &self.incident[v]
    }

    pub fn is_enabled(&self, v: VertexId) -> bool {
        self.vertex_enabled[v]
    }

    pub fn is_net_enabled(&self, e: NetId) -> bool {
        self.net_enabled[e]
    }

    pub fn enabled_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.num_vertices()).filter(move |&v| self.vertex_enabled[v])
    }

    pub fn nets(&self) -> impl Iterator<Item = NetId> + '_ {
        (0..self.num_nets()).filter(move |&e| self.net_enabled[e])
    }

    pub fn vertex_weights(&self) -> &[Weight] {
        &self.vertex_weight
    }

    pub fn net_weights(&self) -> &[Weight] {
        &self.net_weight
    }

    /// Number of un-reverted contractions.
    pub fn contraction_depth(&self) -> usize {
        self.history.len()
    }

    /// `Γ(v)`: every other pin of a net incident to `v`, without duplicates.
    pub fn neighbors(&self, v: VertexId) -> Result<Vec<VertexId>> {
        self.check_enabled(v)?;
        let mut out: Vec<VertexId> = self.incident[v]
            .iter()
            .flat_map(|&e| self.pins[e].iter().copied())
            .filter(|&w| w != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Merges `v` into `u`.
    pub fn contract(&mut self, u: VertexId, v: VertexId) -> Result<ContractionMemento> {
        if u == v {
            return Err(Error::usage(format!("cannot contract vertex {u} with itself")));
        }
        self.check_enabled(u)?;
        self.check_enabled(v)?;

        let mut moved_nets = Vec::new();
        let mut dropped_nets = Vec::new();
        for &e in &self.incident[v] {
            let pins = &mut self.pins[e];
            let mut v_pos = usize::MAX;
            let mut has_u = false;
            for (i, &p) in pins.iter().enumerate() {
                if p == v {
                    v_pos = i;
                } else if p == u {
                    has_u = true;
                }
            }
            debug_assert!(v_pos != usize::MAX, "incidence of {v} out of sync on net {e}");
            if has_u {
                pins.swap_remove(v_pos);
                dropped_nets.push(e);
            } else {
                pins[v_pos] = u;
                moved_nets.push(e);
            }
        }
        self.incident[u].extend_from_slice(&moved_nets);

        let prior_weight_u = self.vertex_weight[u];
        self.vertex_weight[u] += self.vertex_weight[v];
        self.vertex_enabled[v] = false;
        self.num_enabled -= 1;
        let depth = self.history.len();
        self.history.push((u, v));
        Ok(ContractionMemento {
            u,
            v,
            moved_nets,
            dropped_nets,
            prior_weight_u,
            depth,
        })
    }

    /// Reverts `memento`, which must be the most recent un-reverted contraction.
    pub fn uncontract(&mut self, memento: &ContractionMemento) -> Result<()> {
        let top = self.history.len().checked_sub(1);
        if top != Some(memento.depth) || self.history[memento.depth] != (memento.u, memento.v) {
            return Err(Error::usage(format!(
                "out-of-order uncontraction of ({}, {}) at depth {}, history depth {}",
                memento.u,
                memento.v,
                memento.depth,
                self.history.len()
            )));
        }
        let (u, v) = (memento.u, memento.v);
        self.history.pop();

        let keep = self.incident[u].len() - memento.moved_nets.len();
        debug_assert_eq!(&self.incident[u][keep..], &memento.moved_nets[..]);
        self.incident[u].truncate(keep);
        for &e in &memento.moved_nets {
            let pins = &mut self.pins[e];
            let pos = pins
                .iter()
                .position(|&p| p == u)
                .expect("representative missing from moved net");
            pins[pos] = v;
        }
        for &e in &memento.dropped_nets {
            self.pins[e].push(v);
        }
        self.vertex_weight[u] = memento.prior_weight_u;
        self.vertex_enabled[v] = true;
        self.num_enabled += 1;
        Ok(())
    }

    /// Sorted pins, sorted incidence and weights of every enabled entity.
    pub fn canonical(&self) -> CanonicalForm {
        let vertex_weight = (0..self.num_vertices())
            .map(|v| self.vertex_enabled[v].then_some(self.vertex_weight[v]))
            .collect();
        let nets = (0..self.num_nets())
            .map(|e| {
                self.net_enabled[e].then(|| {
                    let mut p = self.pins[e].clone();
                    p.sort_unstable();
                    (self.net_weight[e], p)
                })
            })
            .collect();
        let incident = (0..self.num_vertices())
            .map(|v| {
                self.vertex_enabled[v].then(|| {
                    let mut i = self.incident[v].clone();
                    i.sort_unstable();
                    i
                })
            })
            .collect();
        CanonicalForm {
            vertex_weight,
            nets,
            incident,
        }
    }

    /// Full cross-scan of the incidence structure; `Err` describes the first
    /// inconsistency found.
    pub fn check_consistency(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Internal(msg));
        let mut enabled_weight = 0;
        for v in self.enabled_vertices() {
            if self.vertex_weight[v] <= 0 {
                return bad(format!("vertex {v} has weight {}", self.vertex_weight[v]));
            }
            enabled_weight += self.vertex_weight[v];
            for &e in &self.incident[v] {
                if !self.pins[e].contains(&v) {
                    return bad(format!("net {e} in I({v}) but {v} not a pin"));
                }
            }
        }
        if enabled_weight != self.total_weight {
            return bad(format!(
                "enabled weight {enabled_weight} != total {}",
                self.total_weight
            ));
        }
        for e in self.nets() {
            let pins = &self.pins[e];
            if pins.is_empty() {
                return bad(format!("net {e} is empty"));
            }
            let mut sorted = pins.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return bad(format!("net {e} has duplicate pins"));
            }
            for &v in pins {
                if !self.vertex_enabled[v] {
                    return bad(format!("net {e} has disabled pin {v}"));
                }
                if !self.incident[v].contains(&e) {
                    return bad(format!("pin {v} of net {e} lacks the incidence"));
                }
            }
        }
        Ok(())
    }

    fn check_enabled(&self, v: VertexId) -> Result<()> {
        if v >= self.num_vertices() {
            return Err(Error::usage(format!("vertex {v} out of range")));
        }
        if !self.vertex_enabled[v] {
            return Err(Error::usage(format!("vertex {v} is disabled")));
        }
        Ok(())
    }
}
