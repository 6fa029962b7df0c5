//! Initial placement and swap-based routing over an augmented graph.
//!
//! A CX is executable when its two physical qubits share any edge of the
//! augmented graph; it is tagged with the kind of that edge (standard wins
//! when both exist). Otherwise swaps are inserted on standard edges only,
//! chosen by a lookahead heuristic over the fidelity-weighted distances.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, EdgeKind, Gate, GateKind, Provenance};
use crate::dag::build_dag;
use crate::device::{AugmentedGraph, DistanceMatrix, Weight};
use crate::error::RouteError;

/// Injective map from virtual qubits to physical data qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    v2p: Vec<usize>,
    p2v: Vec<Option<usize>>,
}

impl Layout {
    pub fn new(v2p: Vec<usize>, n_physical: usize) -> Result<Self, RouteError> {
        let mut p2v = vec![None; n_physical];
        for (v, &p) in v2p.iter().enumerate() {
            if p >= n_physical {
                return Err(RouteError::Layout(format!("virtual {v} mapped to {p} outside {n_physical} qubits")));
            }
            if let Some(other) = p2v[p] {
                return Err(RouteError::Layout(format!("virtuals {other} and {v} both mapped to {p}")));
            }
            p2v[p] = Some(v);
        }
        Ok(Layout { v2p, p2v })
    }

    pub fn identity(n: usize) -> Self {
        Layout { v2p: (0..n).collect(), p2v: (0..n).map(Some).collect() }
    }

    pub fn physical(&self, virt: usize) -> usize {
        self.v2p[virt]
    }

    pub fn virtual_at(&self, phys: usize) -> Option<usize> {
        self.p2v.get(phys).copied().flatten()
    }

    pub fn v2p(&self) -> &[usize] {
        &self.v2p
    }

    pub fn n_virtual(&self) -> usize {
        self.v2p.len()
    }

    pub fn n_physical(&self) -> usize {
        self.p2v.len()
    }

    /// Exchanges the contents of two physical qubits.
    pub fn swap_physical(&mut self, a: usize, b: usize) {
        let (va, vb) = (self.p2v[a], self.p2v[b]);
        self.p2v[a] = vb;
        self.p2v[b] = va;
        if let Some(v) = va {
            self.v2p[v] = b;
        }
        if let Some(v) = vb {
            self.v2p[v] = a;
        }
    }

    /// Checks that every image lies on a data qubit of `graph`.
    pub fn check_against(&self, graph: &AugmentedGraph) -> Result<(), RouteError> {
        if self.n_physical() != graph.n_nodes() {
            return Err(RouteError::Layout(format!(
                "layout covers {} physical qubits, device has {}",
                self.n_physical(),
                graph.n_nodes()
            )));
        }
        match self.v2p.iter().find(|&&p| !graph.is_data(p)) {
            Some(p) => Err(RouteError::Layout(format!("physical {p} is not a data qubit"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouterParams {
    pub lookahead_size: usize,
    pub lookahead_weight: f64,
    pub decay: f64,
}

impl Default for RouterParams {
    fn default() -> Self {
        RouterParams { lookahead_size: 20, lookahead_weight: 0.5, decay: 0.001 }
    }
}

/// Decay values reset after this many swap rounds.
const DECAY_RESET_INTERVAL: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedCircuit {
    /// Circuit over physical qubits; every CX carries an edge-kind tag.
    pub circuit: Circuit,
    pub initial_layout: Layout,
    pub final_layout: Layout,
    pub swaps: usize,
}

/// Data qubits in the largest component of the standard-edge subgraph.
/// Ties go to the component holding the lowest index.
pub fn mobile_nodes(graph: &AugmentedGraph) -> Vec<usize> {
    let mut seen = vec![false; graph.n_nodes()];
    let mut best: Vec<usize> = Vec::new();
    for start in graph.data_nodes() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in graph.standard_neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best.sort_unstable();
    best
}

/// Greedy interaction-aware placement.
///
/// Virtual qubits are placed in order of descending CX-weighted degree.
/// The first goes to the candidate with the smallest eccentricity; each
/// later one to the free candidate minimising the CX-weighted distance to
/// its already-placed partners. Candidates are the largest
/// standard-connected set of data qubits when it is big enough (qubits
/// elsewhere could never be swapped), otherwise all data qubits. Ties
/// follow the candidate order `(eccentricity, index)`.
pub fn initial_layout(
    circuit: &Circuit,
    graph: &AugmentedGraph,
    dist: &DistanceMatrix,
) -> Result<Layout, RouteError> {
    let data = graph.data_nodes();
    let n = circuit.n_qubits;
    if n > data.len() {
        return Err(RouteError::TooLarge { needed: n, available: data.len() });
    }
    let mobile = mobile_nodes(graph);
    let mut candidates = if n <= mobile.len() { mobile } else { data.clone() };
    candidates.sort_by_key(|&p| (dist.eccentricity(p, &data), p));

    let interactions = circuit.interaction_counts();
    let mut partners: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    for (&(a, b), &count) in &interactions {
        partners[a].push((b, count as u64));
        partners[b].push((a, count as u64));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (core::cmp::Reverse(partners[v].iter().map(|&(_, w)| w).sum::<u64>()), v));

    let mut v2p: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; graph.n_nodes()];
    for v in order {
        let mut best: Option<(u128, usize)> = None;
        for &p in candidates.iter().filter(|&&p| !used[p]) {
            let cost: u128 = partners[v]
                .iter()
                .filter_map(|&(u, w)| v2p[u].map(|pu| w as u128 * dist.weight(p, pu).0 as u128))
                .sum();
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, p));
            }
        }
        let (_, p) = best.expect("enough candidates");
        v2p[v] = Some(p);
        used[p] = true;
    }
    Layout::new(v2p.into_iter().map(|p| p.expect("placed")).collect(), graph.n_nodes())
}

struct Router<'a> {
    circuit: &'a Circuit,
    graph: &'a AugmentedGraph,
    dist: &'a DistanceMatrix,
    params: RouterParams,
    layout: Layout,
    decay: Vec<f64>,
    out: Vec<Gate>,
    swaps: usize,
}

impl Router<'_> {
    fn edge_for(&self, gate: &Gate) -> Option<EdgeKind> {
        let (a, b) = (self.layout.physical(gate.qubits[0]), self.layout.physical(gate.qubits[1]));
        self.graph.edge_kind_between(a, b)
    }

    fn executable(&self, gate: &Gate) -> bool {
        gate.kind != GateKind::Cx || self.edge_for(gate).is_some()
    }

    fn emit(&mut self, gate: &Gate) {
        let mut mapped = gate.clone();
        mapped.qubits = gate.qubits.iter().map(|&q| self.layout.physical(q)).collect();
        if gate.kind == GateKind::Cx {
            mapped.edge_kind = self.edge_for(gate);
        }
        self.out.push(mapped);
    }

    fn apply_swap(&mut self, a: usize, b: usize) {
        for (c, t) in [(a, b), (b, a), (a, b)] {
            self.out.push(
                Gate::cx(c, t).with_edge_kind(EdgeKind::Standard).with_provenance(Provenance::Swap),
            );
        }
        self.layout.swap_physical(a, b);
        self.decay[a] += self.params.decay;
        self.decay[b] += self.params.decay;
        self.swaps += 1;
        if self.swaps.is_multiple_of(DECAY_RESET_INTERVAL) {
            self.decay.iter_mut().for_each(|d| *d = 1.0);
        }
    }

    fn pair_distance(&self, gate: usize, a: usize, b: usize) -> u64 {
        let g = &self.circuit.gates[gate];
        let map = |p: usize| if p == a { b } else if p == b { a } else { p };
        let pc = map(self.layout.physical(g.qubits[0]));
        let pt = map(self.layout.physical(g.qubits[1]));
        self.dist.weight(pc, pt).0
    }

    fn swap_cost(&self, front: &[usize], lookahead: &[usize], a: usize, b: usize) -> f64 {
        let front_sum: u64 = front.iter().map(|&g| self.pair_distance(g, a, b)).sum();
        let mut cost = front_sum as f64;
        if !lookahead.is_empty() {
            let la_sum: u64 = lookahead.iter().map(|&g| self.pair_distance(g, a, b)).sum();
            cost += self.params.lookahead_weight * (la_sum as f64 / lookahead.len() as f64);
        }
        cost / Weight::SCALE * self.decay[a].max(self.decay[b])
    }

    /// Shortest standard-edge path moving `mover` next to `fixed`,
    /// avoiding `fixed` itself.
    fn path_towards(&self, mover: usize, fixed: usize) -> Option<Vec<usize>> {
        let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = VecDeque::from([mover]);
        prev.insert(mover, mover);
        while let Some(u) = queue.pop_front() {
            if u != mover && self.graph.edge_kind_between(u, fixed).is_some() {
                let mut path = vec![u];
                let mut cur = u;
                while cur != mover {
                    cur = prev[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for v in self.graph.standard_neighbors(u) {
                if v != fixed && !prev.contains_key(&v) {
                    prev.insert(v, u);
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Forces progress on the closest front gate by walking one endpoint
    /// along a shortest standard path.
    fn release_valve(&mut self, front: &[usize]) -> Result<(), RouteError> {
        let &gate = front
            .iter()
            .min_by_key(|&&g| (self.pair_distance(g, usize::MAX, usize::MAX), g))
            .expect("non-empty front");
        let g = &self.circuit.gates[gate];
        let (pc, pt) = (self.layout.physical(g.qubits[0]), self.layout.physical(g.qubits[1]));
        let path = self
            .path_towards(pc, pt)
            .or_else(|| self.path_towards(pt, pc))
            .ok_or(RouteError::Stuck(gate))?;
        for w in path.windows(2) {
            self.apply_swap(w[0], w[1]);
        }
        Ok(())
    }

    fn run(mut self) -> Result<RoutedCircuit, RouteError> {
        let dag = build_dag(self.circuit)?;
        let mut remaining = dag.in_degrees();
        let mut front: BTreeSet<usize> = (0..dag.len()).filter(|&i| remaining[i] == 0).collect();
        let initial_layout = self.layout.clone();
        let stall_limit = 2 * self.graph.data_nodes().len() + 10;
        let mut stalled = 0usize;

        loop {
            let mut progressed = true;
            while progressed {
                progressed = false;
                let ready: Vec<usize> =
                    front.iter().copied().filter(|&g| self.executable(&self.circuit.gates[g])).collect();
                for g in ready {
                    front.remove(&g);
                    self.emit(&self.circuit.gates[g]);
                    for &s in dag.successors(g) {
                        remaining[s] -= 1;
                        if remaining[s] == 0 {
                            front.insert(s);
                        }
                    }
                    progressed = true;
                    stalled = 0;
                }
            }
            if front.is_empty() {
                break;
            }
            let blocked: Vec<usize> = front.iter().copied().collect();

            if stalled >= stall_limit {
                self.release_valve(&blocked)?;
                stalled = 0;
                continue;
            }

            // Extended set: upcoming two-qubit gates reachable from the front.
            let mut lookahead = Vec::new();
            let mut visited: BTreeSet<usize> = front.clone();
            let mut queue: VecDeque<usize> = front.iter().copied().collect();
            'bfs: while let Some(g) = queue.pop_front() {
                for &s in dag.successors(g) {
                    if visited.insert(s) {
                        if self.circuit.gates[s].kind.is_two_qubit() {
                            lookahead.push(s);
                            if lookahead.len() >= self.params.lookahead_size {
                                break 'bfs;
                            }
                        }
                        queue.push_back(s);
                    }
                }
            }

            let mut candidates = BTreeSet::new();
            for &g in &blocked {
                for &v in &self.circuit.gates[g].qubits {
                    let p = self.layout.physical(v);
                    for q in self.graph.standard_neighbors(p) {
                        candidates.insert((p.min(q), p.max(q)));
                    }
                }
            }
            let mut best: Option<(f64, (usize, usize))> = None;
            for &(a, b) in &candidates {
                let cost = self.swap_cost(&blocked, &lookahead, a, b);
                if best.is_none_or(|(c, _)| cost < c) {
                    best = Some((cost, (a, b)));
                }
            }
            match best {
                Some((_, (a, b))) => {
                    self.apply_swap(a, b);
                    stalled += 1;
                }
                None => {
                    self.release_valve(&blocked)?;
                    stalled = 0;
                }
            }
        }

        let mut circuit = Circuit::new(self.circuit.name.clone(), self.graph.n_nodes(), self.circuit.n_clbits);
        circuit.metadata = self.circuit.metadata.clone();
        circuit.gates = self.out;
        Ok(RoutedCircuit { circuit, initial_layout, final_layout: self.layout, swaps: self.swaps })
    }
}

/// Routes `circuit` starting from `layout`.
pub fn route(
    circuit: &Circuit,
    graph: &AugmentedGraph,
    dist: &DistanceMatrix,
    layout: Layout,
    params: RouterParams,
) -> Result<RoutedCircuit, RouteError> {
    circuit.validate()?;
    if let Some(pos) = circuit.gates.iter().position(|g| g.kind == GateKind::RemoteCx) {
        return Err(RouteError::CompositeInput(pos));
    }
    if layout.n_virtual() != circuit.n_qubits {
        return Err(RouteError::Layout(format!(
            "layout maps {} virtual qubits, circuit has {}",
            layout.n_virtual(),
            circuit.n_qubits
        )));
    }
    layout.check_against(graph)?;
    Router {
        circuit,
        graph,
        dist,
        params,
        layout,
        decay: vec![1.0; graph.n_nodes()],
        out: Vec::new(),
        swaps: 0,
    }
    .run()
}

/// A routed two-qubit gate that does not sit on an edge of its tagged kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub position: usize,
    pub qubits: (usize, usize),
    pub tag: Option<EdgeKind>,
}

/// Every violation of the routing contract in `circuit`: each two-qubit
/// gate must carry a tag, lie on an edge of that kind, and only use the
/// augmented tag where no standard edge exists.
pub fn check_routing(circuit: &Circuit, graph: &AugmentedGraph) -> Vec<Violation> {
    circuit
        .gates
        .iter()
        .enumerate()
        .filter(|(_, g)| g.kind.is_two_qubit())
        .filter_map(|(position, g)| {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            let ok = match g.edge_kind {
                Some(kind) => {
                    graph.edge(a, b, kind).is_some()
                        && (kind == EdgeKind::Standard || graph.edge(a, b, EdgeKind::Standard).is_none())
                }
                None => false,
            };
            (!ok).then_some(Violation { position, qubits: (a, b), tag: g.edge_kind })
        })
        .collect()
}
