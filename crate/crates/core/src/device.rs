//! Square-grid devices with border EPR ancillas and their augmented
//! coupling graphs.
//!
//! Physical qubits are numbered row-major on a `side × side` grid. Ancillas
//! sit on the border at odd offsets (never corners) and are paired with the
//! ancilla at the opposite end of the same row or column. The augmented
//! graph drops ancillas and connects every pair of data qubits that can run
//! a remote CX through some EPR pair.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use serde::{Deserialize, Serialize};

use crate::circuit::EdgeKind;
use crate::error::DeviceError;

pub const DEFAULT_FIDELITY_STANDARD: f64 = 0.9;
pub const DEFAULT_FIDELITY_AUGMENTED: f64 = 0.8;

/// Fixed-point edge weights in units of 1e-9, so path sums are exact and
/// independent of summation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Weight(pub u64);

impl Weight {
    pub const SCALE: f64 = 1e9;
    pub const INFINITE: Weight = Weight(u64::MAX);

    /// Edge weight `1 - fidelity`.
    pub fn from_fidelity(fidelity: f64) -> Self {
        Weight(libm::round((1.0 - fidelity) * Self::SCALE) as u64)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / Self::SCALE
    }

    pub fn saturating_add(self, other: Weight) -> Weight {
        Weight(self.0.saturating_add(other.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Data,
    Ancilla,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub side: usize,
    pub roles: Vec<Role>,
    /// EPR pairs as ancilla node pairs; the pair id is the index.
    pub epr_pairs: Vec<(usize, usize)>,
    pub fidelity_standard: f64,
    pub fidelity_augmented: f64,
}

/// Number of data qubits on a `side × side` grid with the border-ancilla
/// placement.
pub fn data_count(side: usize) -> usize {
    side * side - 4 * (side.saturating_sub(1) / 2)
}

/// Smallest grid whose data-qubit count reaches `min_data_qubits`, with an
/// EPR pair at every odd border offset.
pub fn build_grid_device(min_data_qubits: usize) -> Device {
    let mut side = 2;
    while data_count(side) < min_data_qubits.max(1) {
        side += 1;
    }
    grid_device_with_side(side)
}

/// Full border-ancilla device of the given side.
pub fn grid_device_with_side(side: usize) -> Device {
    let mut pairs = Vec::new();
    // Columns first (top/bottom rows), then rows (left/right columns).
    for col in (1..side.saturating_sub(1)).step_by(2) {
        pairs.push((col, (side - 1) * side + col));
    }
    for row in (1..side.saturating_sub(1)).step_by(2) {
        pairs.push((row * side, row * side + side - 1));
    }
    Device::new(side, pairs, DEFAULT_FIDELITY_STANDARD, DEFAULT_FIDELITY_AUGMENTED)
        .expect("border placement is valid")
}

impl Device {
    /// Builds a device from an explicit EPR-pair list, validating placement.
    pub fn new(
        side: usize,
        epr_pairs: Vec<(usize, usize)>,
        fidelity_standard: f64,
        fidelity_augmented: f64,
    ) -> Result<Self, DeviceError> {
        if side < 2 {
            return Err(DeviceError::Invalid(format!("grid side must be at least 2, got {side}")));
        }
        let n = side * side;
        let mut roles = vec![Role::Data; n];
        for &(a, b) in &epr_pairs {
            for node in [a, b] {
                if node >= n {
                    return Err(DeviceError::Invalid(format!("ancilla {node} outside {side}x{side} grid")));
                }
                if roles[node] == Role::Ancilla {
                    return Err(DeviceError::Invalid(format!("ancilla {node} is in more than one EPR pair")));
                }
                roles[node] = Role::Ancilla;
            }
            let ((ra, ca), (rb, cb)) = ((a / side, a % side), (b / side, b % side));
            let same_column = ca == cb && ra.min(rb) == 0 && ra.max(rb) == side - 1;
            let same_row = ra == rb && ca.min(cb) == 0 && ca.max(cb) == side - 1;
            if !(same_column || same_row) {
                return Err(DeviceError::Invalid(format!(
                    "pair ({a},{b}) is not at the two ends of a row or column"
                )));
            }
            let corner = |r: usize, c: usize| (r == 0 || r == side - 1) && (c == 0 || c == side - 1);
            if corner(ra, ca) || corner(rb, cb) {
                return Err(DeviceError::Invalid(format!("pair ({a},{b}) uses a corner node")));
            }
        }
        for f in [fidelity_standard, fidelity_augmented] {
            if !(0.0..=1.0).contains(&f) {
                return Err(DeviceError::Invalid(format!("fidelity {f} outside [0, 1]")));
            }
        }
        Ok(Device { side, roles, epr_pairs, fidelity_standard, fidelity_augmented })
    }

    /// Plain grid with every node a data qubit, used for the swap-only
    /// baseline.
    pub fn plain_grid(side: usize) -> Device {
        Device::new(side, Vec::new(), DEFAULT_FIDELITY_STANDARD, DEFAULT_FIDELITY_AUGMENTED)
            .expect("plain grid is valid")
    }

    pub fn with_fidelities(mut self, standard: f64, augmented: f64) -> Result<Self, DeviceError> {
        self.fidelity_standard = standard;
        self.fidelity_augmented = augmented;
        Device::new(self.side, self.epr_pairs, standard, augmented)
    }

    pub fn n_nodes(&self) -> usize {
        self.side * self.side
    }

    pub fn is_data(&self, node: usize) -> bool {
        self.roles[node] == Role::Data
    }

    pub fn data_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&n| self.is_data(n)).collect()
    }

    pub fn ancillas(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&n| !self.is_data(n)).collect()
    }

    /// 4-neighbours of `node` in the raw grid.
    pub fn grid_neighbors(&self, node: usize) -> Vec<usize> {
        let (r, c, k) = (node / self.side, node % self.side, self.side);
        let mut out = Vec::with_capacity(4);
        if r > 0 {
            out.push(node - k);
        }
        if c > 0 {
            out.push(node - 1);
        }
        if c + 1 < k {
            out.push(node + 1);
        }
        if r + 1 < k {
            out.push(node + k);
        }
        out
    }

    pub fn grid_adjacent(&self, u: usize, v: usize) -> bool {
        let (ru, cu, rv, cv) = (u / self.side, u % self.side, v / self.side, v % self.side);
        ru.abs_diff(rv) + cu.abs_diff(cv) == 1
    }

    /// All 4-neighbour adjacencies as `(min, max)` pairs.
    pub fn standard_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for u in 0..self.n_nodes() {
            for v in self.grid_neighbors(u) {
                if u < v {
                    edges.push((u, v));
                }
            }
        }
        edges
    }

    /// Pair id of an ancilla pair, in either orientation.
    pub fn pair_id(&self, pair: (usize, usize)) -> Option<usize> {
        self.epr_pairs.iter().position(|&(a, b)| (a, b) == pair || (b, a) == pair)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub kind: EdgeKind,
    /// Smaller endpoint.
    pub u: usize,
    pub v: usize,
    pub weight: Weight,
    /// EPR pair ids able to realise the edge; empty for standard edges.
    pub serving_pairs: Vec<usize>,
}

/// Routable graph over data qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedGraph {
    n_nodes: usize,
    data: Vec<bool>,
    edges: Vec<GraphEdge>,
    index: BTreeMap<(usize, usize, EdgeKind), usize>,
    adjacency: Vec<Vec<usize>>,
}

impl AugmentedGraph {
    /// Physical index space size (includes removed ancillas).
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn is_data(&self, node: usize) -> bool {
        self.data.get(node).copied().unwrap_or(false)
    }

    pub fn data_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes).filter(|&n| self.data[n]).collect()
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn edges_of_kind(&self, kind: EdgeKind) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    pub fn edge(&self, u: usize, v: usize, kind: EdgeKind) -> Option<&GraphEdge> {
        self.index.get(&(u.min(v), u.max(v), kind)).map(|&i| &self.edges[i])
    }

    /// Kind of the edge joining `u` and `v`, preferring standard edges.
    pub fn edge_kind_between(&self, u: usize, v: usize) -> Option<EdgeKind> {
        [EdgeKind::Standard, EdgeKind::Augmented]
            .into_iter()
            .find(|&k| self.index.contains_key(&(u.min(v), u.max(v), k)))
    }

    /// Edges incident to `node`.
    pub fn incident(&self, node: usize) -> impl Iterator<Item = &GraphEdge> {
        self.adjacency[node].iter().map(|&i| &self.edges[i])
    }

    /// Standard-edge neighbours of `node`, ascending.
    pub fn standard_neighbors(&self, node: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .incident(node)
            .filter(|e| e.kind == EdgeKind::Standard)
            .map(|e| if e.u == node { e.v } else { e.u })
            .collect();
        out.sort_unstable();
        out
    }
}

/// Builds the augmented coupling graph of `device`.
pub fn augment(device: &Device) -> AugmentedGraph {
    let n = device.n_nodes();
    let data: Vec<bool> = (0..n).map(|i| device.is_data(i)).collect();
    let standard_weight = Weight::from_fidelity(device.fidelity_standard);
    let augmented_weight = Weight::from_fidelity(device.fidelity_augmented);

    let mut edges: Vec<GraphEdge> = device
        .standard_edges()
        .into_iter()
        .filter(|&(u, v)| data[u] && data[v])
        .map(|(u, v)| GraphEdge {
            kind: EdgeKind::Standard,
            u,
            v,
            weight: standard_weight,
            serving_pairs: Vec::new(),
        })
        .collect();

    let mut augmented: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (pair_id, &(a, b)) in device.epr_pairs.iter().enumerate() {
        let near_a: Vec<usize> = device.grid_neighbors(a).into_iter().filter(|&x| data[x]).collect();
        let near_b: Vec<usize> = device.grid_neighbors(b).into_iter().filter(|&x| data[x]).collect();
        for &u in &near_a {
            for &v in &near_b {
                if u == v {
                    continue;
                }
                let serving = augmented.entry((u.min(v), u.max(v))).or_default();
                if !serving.contains(&pair_id) {
                    serving.push(pair_id);
                }
            }
        }
    }
    edges.extend(augmented.into_iter().map(|((u, v), serving_pairs)| GraphEdge {
        kind: EdgeKind::Augmented,
        u,
        v,
        weight: augmented_weight,
        serving_pairs,
    }));

    let mut index = BTreeMap::new();
    let mut adjacency = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        index.insert((e.u, e.v, e.kind), i);
        adjacency[e.u].push(i);
        adjacency[e.v].push(i);
    }
    AugmentedGraph { n_nodes: n, data, edges, index, adjacency }
}

/// All-pairs weighted shortest-path distances between data qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n_nodes: usize,
    dist: Vec<Weight>,
}

impl DistanceMatrix {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Exact fixed-point distance; [`Weight::INFINITE`] for non-data nodes.
    pub fn weight(&self, u: usize, v: usize) -> Weight {
        self.dist[u * self.n_nodes + v]
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.weight(u, v).as_f64()
    }

    /// Largest distance from `u` to any node in `nodes`.
    pub fn eccentricity(&self, u: usize, nodes: &[usize]) -> Weight {
        nodes.iter().map(|&v| self.weight(u, v)).max().unwrap_or_default()
    }
}

pub fn weighted_distances(graph: &AugmentedGraph) -> Result<DistanceMatrix, DeviceError> {
    let n = graph.n_nodes();
    let mut dist = vec![Weight::INFINITE; n * n];
    for source in graph.data_nodes() {
        let row = &mut dist[source * n..(source + 1) * n];
        row[source] = Weight(0);
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((Weight(0), source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > row[u] {
                continue;
            }
            for e in graph.incident(u) {
                let v = if e.u == u { e.v } else { e.u };
                let nd = d.saturating_add(e.weight);
                if nd < row[v] {
                    row[v] = nd;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
    }
    let matrix = DistanceMatrix { n_nodes: n, dist };

    let data = graph.data_nodes();
    if let Some(&first) = data.first() {
        if data.iter().any(|&v| matrix.weight(first, v) == Weight::INFINITE) {
            return Err(DeviceError::Disconnected(components(&matrix, &data)));
        }
    }
    Ok(matrix)
}

fn components(matrix: &DistanceMatrix, data: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; matrix.n_nodes()];
    let mut out = Vec::new();
    for &u in data {
        if seen[u] {
            continue;
        }
        let comp: Vec<usize> = data.iter().copied().filter(|&v| matrix.weight(u, v) != Weight::INFINITE).collect();
        for &v in &comp {
            seen[v] = true;
        }
        out.push(comp);
    }
    out
}
