//! Statevector simulation with mid-circuit measurement branching, and
//! equivalence checking of compiled circuits against their sources.
//!
//! Qubit 0 is the least significant bit of a basis index.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind, Provenance};
use crate::error::SimError;
use crate::router::Layout;

pub const MAX_QUBITS: usize = 16;
/// Outcomes less likely than this are not followed.
pub const BRANCH_EPSILON: f64 = 1e-12;
/// Minimum fidelity for two circuits to count as equivalent.
pub const EQUIVALENCE_THRESHOLD: f64 = 1.0 - 1e-9;
const MAX_BRANCHES: usize = 1 << 16;

type Matrix2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// 2x2 unitary of a single-qubit gate kind.
pub fn gate_matrix(kind: GateKind) -> Option<Matrix2> {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let h = c(FRAC_1_SQRT_2, 0.0);
    let u3 = |theta: f64, phi: f64, lambda: f64| {
        let (s, co) = (libm::sin(theta / 2.0), libm::cos(theta / 2.0));
        [[c(co, 0.0), -phase(lambda) * s], [phase(phi) * s, phase(phi + lambda) * co]]
    };
    Some(match kind {
        GateKind::X => [[zero, one], [one, zero]],
        GateKind::Y => [[zero, c(0.0, -1.0)], [c(0.0, 1.0), zero]],
        GateKind::Z => [[one, zero], [zero, -one]],
        GateKind::H => [[h, h], [h, -h]],
        GateKind::S => [[one, zero], [zero, c(0.0, 1.0)]],
        GateKind::Sdg => [[one, zero], [zero, c(0.0, -1.0)]],
        GateKind::T => [[one, zero], [zero, phase(core::f64::consts::FRAC_PI_4)]],
        GateKind::Tdg => [[one, zero], [zero, phase(-core::f64::consts::FRAC_PI_4)]],
        GateKind::Rx(t) => {
            let (s, co) = (libm::sin(t / 2.0), libm::cos(t / 2.0));
            [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
        }
        GateKind::Ry(t) => {
            let (s, co) = (libm::sin(t / 2.0), libm::cos(t / 2.0));
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        }
        GateKind::Rz(t) => [[phase(-t / 2.0), zero], [zero, phase(t / 2.0)]],
        GateKind::U1(l) => [[one, zero], [zero, phase(l)]],
        GateKind::U2(p, l) => u3(core::f64::consts::FRAC_PI_2, p, l),
        GateKind::U3(t, p, l) => u3(t, p, l),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![c(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = c(1.0, 0.0);
        StateVector { n_qubits, amplitudes }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        let n = amplitudes.len().trailing_zeros() as usize;
        if amplitudes.len() != 1 << n {
            return Err(SimError::Layout(format!("{} amplitudes is not a power of two", amplitudes.len())));
        }
        Ok(StateVector { n_qubits: n, amplitudes })
    }

    /// Tensor product of single-qubit states; `qubits[i]` is qubit `i`.
    pub fn product(qubits: &[[Complex64; 2]]) -> Self {
        let mut amplitudes = vec![c(1.0, 0.0)];
        for (q, state) in qubits.iter().enumerate() {
            let mut next = vec![c(0.0, 0.0); amplitudes.len() * 2];
            for (i, &a) in amplitudes.iter().enumerate() {
                next[i] = a * state[0];
                next[i | (1 << q)] = a * state[1];
            }
            amplitudes = next;
        }
        StateVector { n_qubits: qubits.len(), amplitudes }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn apply_single(&mut self, m: &Matrix2, q: usize) {
        let mask = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | mask]);
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let (cm, tm) = (1usize << control, 1usize << target);
        for i in 0..self.amplitudes.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
    }

    /// Probability of reading 1 on qubit `q`.
    pub fn prob_one(&self, q: usize) -> f64 {
        let mask = 1usize << q;
        self.amplitudes.iter().enumerate().filter(|(i, _)| i & mask != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projects qubit `q` onto `outcome` and renormalises by `prob`.
    fn project(&mut self, q: usize, outcome: bool, prob: f64) {
        let mask = 1usize << q;
        let scale = 1.0 / libm::sqrt(prob);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if (i & mask != 0) == outcome {
                *a *= scale;
            } else {
                *a = c(0.0, 0.0);
            }
        }
    }

    /// Moves a qubit known to be in basis state `|1⟩` back to `|0⟩`.
    fn flip_to_zero(&mut self, q: usize) {
        let mask = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & mask != 0 {
                self.amplitudes.swap(i, i ^ mask);
            }
        }
    }
}

/// One measurement branch: classical record, probability and the
/// normalised post-measurement state.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutcome {
    pub clbits: Vec<bool>,
    pub probability: f64,
    pub state: StateVector,
}

/// Inserts explicit EPR preparation before every remote block that has
/// none, so each block starts from a fresh `|Φ+⟩`.
pub fn with_explicit_prep(circuit: &Circuit) -> Circuit {
    let prepared: BTreeSet<usize> = circuit
        .gates
        .iter()
        .filter_map(|g| match g.provenance {
            Some(Provenance::EprPrep { block, .. }) => Some(block),
            _ => None,
        })
        .collect();
    let mut seen = BTreeSet::new();
    let mut out = Circuit { gates: Vec::with_capacity(circuit.gates.len()), ..circuit.clone() };
    for g in &circuit.gates {
        if let Some(Provenance::RemoteBlock { block, epr_pair: (a, b) }) = g.provenance {
            if !prepared.contains(&block) && seen.insert(block) {
                let prep = Provenance::EprPrep { block, epr_pair: (a, b) };
                for p in [
                    Gate::single(GateKind::Reset, a),
                    Gate::single(GateKind::Reset, b),
                    Gate::single(GateKind::H, a),
                    Gate::cx(a, b),
                ] {
                    out.gates.push(p.with_provenance(prep));
                }
            }
        }
        out.gates.push(g.clone());
    }
    out
}

#[derive(Clone)]
struct Branch {
    clbits: Vec<bool>,
    probability: f64,
    state: StateVector,
}

/// Simulation bookkeeping that lets equal branches merge: classical bits
/// nobody reads again are cleared, and measured qubits whose next use is a
/// reset are returned to `|0⟩` immediately.
struct Liveness {
    last_read: Vec<Option<usize>>,
    reset_next: Vec<bool>,
}

impl Liveness {
    fn new(circuit: &Circuit) -> Self {
        let mut last_read = vec![None; circuit.n_clbits];
        for (i, g) in circuit.gates.iter().enumerate() {
            if let Some(cond) = g.condition {
                last_read[cond.clbit] = Some(i);
            }
        }
        // reset_next[i]: gate i is a measurement and the next gate on its
        // qubit is a reset, or there is none.
        let mut reset_next = vec![false; circuit.gates.len()];
        let mut next_is_reset = vec![true; circuit.n_qubits];
        for (i, g) in circuit.gates.iter().enumerate().rev() {
            if g.kind == GateKind::Measure {
                reset_next[i] = next_is_reset[g.qubits[0]];
            }
            for &q in &g.qubits {
                next_is_reset[q] = g.kind == GateKind::Reset;
            }
        }
        Liveness { last_read, reset_next }
    }
}

fn run(circuit: &Circuit, input: &StateVector, merge: bool) -> Result<Vec<Branch>, SimError> {
    circuit.validate()?;
    if circuit.n_qubits > MAX_QUBITS {
        return Err(SimError::TooManyQubits { needed: circuit.n_qubits, limit: MAX_QUBITS });
    }
    if input.n_qubits != circuit.n_qubits {
        return Err(SimError::Layout(format!(
            "input has {} qubits, circuit has {}",
            input.n_qubits, circuit.n_qubits
        )));
    }
    if let Some(pos) = circuit.gates.iter().position(|g| g.kind == GateKind::RemoteCx) {
        return Err(SimError::Composite(pos));
    }
    let circuit = with_explicit_prep(circuit);
    let liveness = Liveness::new(&circuit);
    let mut branches =
        vec![Branch { clbits: vec![false; circuit.n_clbits], probability: 1.0, state: input.clone() }];

    for (i, gate) in circuit.gates.iter().enumerate() {
        let mut next = Vec::with_capacity(branches.len());
        for mut br in branches {
            if let Some(cond) = gate.condition {
                if br.clbits[cond.clbit] != cond.value {
                    next.push(br);
                    continue;
                }
            }
            match gate.kind {
                GateKind::Barrier => next.push(br),
                GateKind::Cx => {
                    br.state.apply_cx(gate.qubits[0], gate.qubits[1]);
                    next.push(br);
                }
                GateKind::Measure | GateKind::Reset => {
                    let q = gate.qubits[0];
                    let p1 = br.state.prob_one(q);
                    for (outcome, p) in [(false, 1.0 - p1), (true, p1)] {
                        if p <= BRANCH_EPSILON {
                            continue;
                        }
                        let mut b = br.clone();
                        b.state.project(q, outcome, p);
                        b.probability *= p;
                        if gate.kind == GateKind::Measure {
                            b.clbits[gate.clbits[0]] = outcome;
                        }
                        let clear = gate.kind == GateKind::Reset || (merge && liveness.reset_next[i]);
                        if clear && outcome {
                            b.state.flip_to_zero(q);
                        }
                        next.push(b);
                    }
                }
                kind => {
                    let m = gate_matrix(kind).expect("single-qubit kind");
                    br.state.apply_single(&m, gate.qubits[0]);
                    next.push(br);
                }
            }
        }
        if merge && next.len() > 1 {
            for (c, last) in liveness.last_read.iter().enumerate() {
                if last.is_none_or(|l| l <= i) {
                    next.iter_mut().for_each(|b| b.clbits[c] = false);
                }
            }
            next = merge_branches(next);
        }
        if next.len() > MAX_BRANCHES {
            return Err(SimError::BranchLimit(MAX_BRANCHES));
        }
        branches = next;
    }
    Ok(branches)
}

fn merge_branches(branches: Vec<Branch>) -> Vec<Branch> {
    let mut out: Vec<Branch> = Vec::with_capacity(branches.len());
    for b in branches {
        match out
            .iter_mut()
            .find(|o| o.clbits == b.clbits && o.state.fidelity(&b.state) >= 1.0 - BRANCH_EPSILON)
        {
            Some(o) => o.probability += b.probability,
            None => out.push(b),
        }
    }
    out
}

/// Exact branch enumeration. Remote blocks without explicit preparation
/// start from a fresh `|Φ+⟩` on their pair. Branches are ordered with
/// outcome 0 first at every measurement.
pub fn simulate(circuit: &Circuit, input: &StateVector) -> Result<Vec<BranchOutcome>, SimError> {
    Ok(run(circuit, input, false)?
        .into_iter()
        .map(|b| BranchOutcome { clbits: b.clbits, probability: b.probability, state: b.state })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub pass: bool,
    pub min_fidelity: f64,
    pub trials: usize,
    pub seed: u64,
    /// Branches compared across all trials.
    pub branches: usize,
}

/// Haar-random single-qubit state.
fn random_qubit(rng: &mut ChaCha8Rng) -> [Complex64; 2] {
    let mut v = [0.0f64; 4];
    v.iter_mut().for_each(|x| *x = StandardNormal.sample(rng));
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    [c(v[0] / norm, v[1] / norm), c(v[2] / norm, v[3] / norm)]
}

/// Haar-random state on `n_qubits` qubits.
pub fn random_state(n_qubits: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps: Vec<Complex64> =
        (0..1usize << n_qubits).map(|_| c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))).collect();
    let norm = libm::sqrt(amps.iter().map(|a| a.norm_sqr()).sum::<f64>());
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector { n_qubits, amplitudes: amps }
}

/// `⟨ψ|ρ|ψ⟩` where `ρ` is the reduced state of `full` on the qubits
/// `positions[v]` (virtual `v` of `psi`), tracing out everything else.
pub fn reduced_fidelity(psi: &StateVector, full: &StateVector, positions: &[usize]) -> f64 {
    let n = full.n_qubits;
    let mut virt_of = vec![None; n];
    for (v, &p) in positions.iter().enumerate() {
        virt_of[p] = Some(v);
    }
    let rest: Vec<usize> = (0..n).filter(|&q| virt_of[q].is_none()).collect();
    let mut overlap = vec![c(0.0, 0.0); 1 << rest.len()];
    for (idx, amp) in full.amplitudes.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let x = positions.iter().enumerate().fold(0usize, |x, (v, &p)| x | (((idx >> p) & 1) << v));
        let r = rest.iter().enumerate().fold(0usize, |r, (k, &p)| r | (((idx >> p) & 1) << k));
        overlap[r] += psi.amplitudes[x].conj() * amp;
    }
    overlap.iter().map(|o| o.norm_sqr()).sum()
}

/// Restricts `circuit` to the qubits it touches plus `keep`, returning the
/// compact circuit and the physical index of each compact qubit.
fn compact(circuit: &Circuit, keep: &[usize]) -> (Circuit, Vec<usize>) {
    let mut used: BTreeSet<usize> = keep.iter().copied().collect();
    for g in &circuit.gates {
        used.extend(g.qubits.iter().copied());
    }
    let physical: Vec<usize> = used.into_iter().collect();
    let mut index = vec![usize::MAX; circuit.n_qubits.max(physical.last().map_or(0, |&p| p + 1))];
    for (i, &p) in physical.iter().enumerate() {
        index[p] = i;
    }
    let mut out = Circuit { n_qubits: physical.len(), gates: Vec::with_capacity(circuit.gates.len()), ..circuit.clone() };
    for g in &circuit.gates {
        let mut g = g.clone();
        g.qubits.iter_mut().for_each(|q| *q = index[*q]);
        if let Some(Provenance::RemoteBlock { epr_pair, .. } | Provenance::EprPrep { epr_pair, .. }) =
            g.provenance.as_mut()
        {
            *epr_pair = (index[epr_pair.0], index[epr_pair.1]);
        }
        out.gates.push(g);
    }
    (out, physical)
}

/// Checks that `compiled` acts like `source` on `trials` random product
/// states, for every measurement branch, after relabelling qubits with the
/// initial and final layouts.
pub fn check_equivalence(
    source: &Circuit,
    compiled: &Circuit,
    initial_layout: &Layout,
    final_layout: &Layout,
    trials: usize,
    seed: u64,
) -> Result<EquivalenceReport, SimError> {
    if let Some(pos) = source.gates.iter().position(|g| g.kind == GateKind::Measure) {
        return Err(SimError::SourceMeasured(pos));
    }
    let n = source.n_qubits;
    if n > MAX_QUBITS {
        return Err(SimError::TooManyQubits { needed: n, limit: MAX_QUBITS });
    }
    for (name, layout) in [("initial", initial_layout), ("final", final_layout)] {
        if layout.n_virtual() != n {
            return Err(SimError::Layout(format!(
                "{name} layout maps {} qubits, source has {n}",
                layout.n_virtual()
            )));
        }
        if layout.v2p().iter().any(|&p| p >= compiled.n_qubits) {
            return Err(SimError::Layout(format!("{name} layout exceeds the compiled register")));
        }
    }
    let compiled = with_explicit_prep(compiled);
    let keep: Vec<usize> = initial_layout.v2p().iter().chain(final_layout.v2p()).copied().collect();
    let (compact_circuit, physical) = compact(&compiled, &keep);
    if physical.len() > MAX_QUBITS {
        return Err(SimError::TooManyQubits { needed: physical.len(), limit: MAX_QUBITS });
    }
    let to_compact = |p: usize| physical.binary_search(&p).expect("kept");
    let start: Vec<usize> = initial_layout.v2p().iter().map(|&p| to_compact(p)).collect();
    let end: Vec<usize> = final_layout.v2p().iter().map(|&p| to_compact(p)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_fidelity = f64::INFINITY;
    let mut n_branches = 0;
    for _ in 0..trials {
        let qubits: Vec<[Complex64; 2]> = (0..n).map(|_| random_qubit(&mut rng)).collect();
        let src_in = StateVector::product(&qubits);
        let expected = run(source, &src_in, false)?.remove(0).state;

        let zero = [c(1.0, 0.0), c(0.0, 0.0)];
        let mut embedded = vec![zero; compact_circuit.n_qubits];
        for (v, &q) in start.iter().enumerate() {
            embedded[q] = qubits[v];
        }
        let branches = run(&compact_circuit, &StateVector::product(&embedded), true)?;
        n_branches += branches.len();
        for b in &branches {
            min_fidelity = min_fidelity.min(reduced_fidelity(&expected, &b.state, &end));
        }
    }
    if trials == 0 {
        min_fidelity = 1.0;
    }
    Ok(EquivalenceReport {
        pass: min_fidelity >= EQUIVALENCE_THRESHOLD,
        min_fidelity,
        trials,
        seed,
        branches: n_branches,
    })
}
