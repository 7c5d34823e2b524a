use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::floquet::DisjointSet;
use crate::linalg::Complex64;

/// Largest number of unpinned spins [`partition_function`] enumerates.
pub const MAX_FREE_SPINS: usize = 24;

/// Spin variable for the state of qubit `row` after its `position`-th
/// non-diagonal gate (counted across all repetitions).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinNode {
    pub row: usize,
    pub position: usize,
}

/// Classical spin model whose complex partition function equals a circuit
/// amplitude:
///
/// `A = 2^(-G/2) sum_s exp(i pi/4 E(s))`, with
/// `E(s) = offset + sum_i h_i s_i + sum_(i<j) J_ij s_i s_j`.
///
/// Fields and the offset are half-integers and couplings integers, so every
/// phase is a multiple of `pi/8`. Internally fields and the offset are kept
/// in units of `1/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsingGraph {
    nodes: Vec<SpinNode>,
    pins: Vec<Option<i8>>,
    h_half: Vec<i64>,
    couplings: BTreeMap<(usize, usize), i64>,
    gate_count: usize,
    offset_half: i64,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    #[serde(rename = "G")]
    gate_count: usize,
    edges: Vec<(usize, usize, f64)>,
    h: Vec<f64>,
    nodes: Vec<SpinNode>,
    offset: f64,
    pins: Vec<(usize, i8)>,
}

impl IsingGraph {
    pub fn nodes(&self) -> &[SpinNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn pin(&self, node: usize) -> Option<i8> {
        self.pins[node]
    }

    pub fn field(&self, node: usize) -> f64 {
        self.h_half[node] as f64 / 2.0
    }

    pub fn fields(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.field(i)).collect()
    }

    /// `(i, j, J_ij)` with `i < j`, nonzero couplings only.
    pub fn couplings(&self) -> Vec<(usize, usize, i64)> {
        self.couplings.iter().map(|(&(i, j), &c)| (i, j, c)).collect()
    }

    /// Number of non-diagonal gates, `G`.
    pub fn gate_count(&self) -> usize {
        self.gate_count
    }

    pub fn offset(&self) -> f64 {
        self.offset_half as f64 / 2.0
    }

    pub fn free_spins(&self) -> usize {
        self.pins.iter().filter(|p| p.is_none()).count()
    }

    /// `E(s)` in units of `pi/4` for a full assignment of `+-1` spins.
    pub fn phase_exponent(&self, spins: &[i8]) -> f64 {
        self.energy_half(spins) as f64 / 2.0
    }

    fn energy_half(&self, spins: &[i8]) -> i64 {
        let mut e = self.offset_half;
        for (i, &s) in spins.iter().enumerate() {
            e += self.h_half[i] * s as i64;
        }
        for (&(i, j), &c) in &self.couplings {
            e += 2 * c * (spins[i] * spins[j]) as i64;
        }
        e
    }

    /// Adds `delta` (a half-integer) to the field of a node.
    pub fn shift_field(&mut self, node: usize, delta: f64) -> Result<()> {
        self.h_half[node] += half_units(delta, "field shift")?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            gate_count: self.gate_count,
            edges: self
                .couplings
                .iter()
                .map(|(&(i, j), &c)| (i, j, c as f64))
                .collect(),
            h: self.fields(),
            nodes: self.nodes.clone(),
            offset: self.offset(),
            pins: self
                .pins
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.map(|s| (i, s)))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<IsingGraph> {
        let file: GraphFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        let n = file.nodes.len();
        if file.h.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} fields for {n} nodes",
                file.h.len()
            )));
        }
        let h_half = file
            .h
            .iter()
            .map(|&h| half_units(h, "field"))
            .collect::<Result<Vec<_>>>()?;
        let mut couplings = BTreeMap::new();
        for &(i, j, c) in &file.edges {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidParameter(format!("bad edge ({i}, {j})")));
            }
            if c.fract() != 0.0 {
                return Err(Error::InvalidParameter(format!("non-integer coupling {c}")));
            }
            *couplings.entry((i.min(j), i.max(j))).or_insert(0) += c as i64;
        }
        couplings.retain(|_, c| *c != 0);
        let mut pins = vec![None; n];
        for &(i, s) in &file.pins {
            if i >= n || (s != 1 && s != -1) {
                return Err(Error::InvalidParameter(format!("bad pin ({i}, {s})")));
            }
            pins[i] = Some(s);
        }
        Ok(IsingGraph {
            nodes: file.nodes,
            pins,
            h_half,
            couplings,
            gate_count: file.gate_count,
            offset_half: half_units(file.offset, "offset")?,
        })
    }
}

fn half_units(x: f64, what: &str) -> Result<i64> {
    let twice = 2.0 * x;
    if !twice.is_finite() || twice.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!("{what} {x} is not a half-integer")));
    }
    Ok(twice as i64)
}

fn spin_of_bit(b: u8) -> i8 {
    1 - 2 * b as i8
}

fn check_bits(bits: &[u8], n: usize, what: &str) -> Result<()> {
    if bits.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{what} has {} bits, circuit has {n} qubits",
            bits.len()
        )));
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::InvalidParameter(format!("{what} must contain only 0 and 1")));
    }
    Ok(())
}

#[derive(Default)]
struct Builder {
    nodes: Vec<SpinNode>,
    h_half: Vec<i64>,
    edges: Vec<(usize, usize, i64)>,
    offset_half: i64,
    gate_count: usize,
}

impl Builder {
    fn node(&mut self, row: usize, position: usize) -> usize {
        self.nodes.push(SpinNode { row, position });
        self.h_half.push(0);
        self.nodes.len() - 1
    }

    /// Adds the phase function `offset + a s_i + b s_j + c s_i s_j` (units of
    /// `pi/4`, integers).
    fn bilinear(&mut self, i: usize, j: usize, offset: i64, a: i64, b: i64, c: i64) {
        self.offset_half += 2 * offset;
        self.h_half[i] += 2 * a;
        self.h_half[j] += 2 * b;
        self.edges.push((i, j, c));
    }
}

/// Maps `cycles` repetitions of `circuit` with input bits `z0` and output
/// bits `z` onto an [`IsingGraph`] whose partition function is the amplitude
/// `<z| C^cycles |z0>`.
///
/// Bit `0` is spin `+1`. Each repetition gets its own nodes; the boundary
/// nodes of consecutive repetitions are identified afterwards.
pub fn map_to_ising(circuit: &Circuit, z0: &[u8], z: &[u8], cycles: usize) -> Result<IsingGraph> {
    let n = circuit.n_qubits();
    check_bits(z0, n, "input")?;
    check_bits(z, n, "output")?;
    if cycles == 0 {
        return Err(Error::InvalidParameter("need at least one repetition".into()));
    }

    let mut b = Builder::default();
    let mut position = vec![0usize; n];
    let mut identify = Vec::new();
    let first: Vec<usize> = (0..n).map(|q| b.node(q, 0)).collect();
    let mut current = first.clone();
    for rep in 0..cycles {
        if rep > 0 {
            for q in 0..n {
                let fresh = b.node(q, position[q]);
                identify.push((current[q], fresh));
                current[q] = fresh;
            }
        }
        for gate in circuit.gates() {
            match *gate {
                Gate::T(q) => {
                    // (1 - s) / 2
                    b.offset_half += 1;
                    b.h_half[current[q]] -= 1;
                }
                Gate::CZ(p, q) => {
                    // (1 - s_p)(1 - s_q)
                    b.bilinear(current[p], current[q], 1, -1, -1, 1);
                }
                Gate::H(q) | Gate::SX(q) | Gate::SY(q) | Gate::SYT(q) => {
                    position[q] += 1;
                    let old = current[q];
                    let new = b.node(q, position[q]);
                    match gate {
                        // (1 - s_old)(1 - s_new)
                        Gate::H(_) => b.bilinear(old, new, 1, -1, -1, 1),
                        // 1 + s_old s_new
                        Gate::SX(_) => b.bilinear(old, new, 1, 0, 0, 1),
                        // 1 - s_old + s_new - s_old s_new
                        Gate::SY(_) => b.bilinear(old, new, 1, -1, 1, -1),
                        // 1 + s_old - s_new - s_old s_new
                        _ => b.bilinear(old, new, 1, 1, -1, -1),
                    }
                    b.gate_count += 1;
                    current[q] = new;
                }
            }
        }
    }

    // Collapse identified nodes onto their representatives.
    let total = b.nodes.len();
    let mut sets = DisjointSet::new(total);
    for &(a, c) in &identify {
        sets.union(a, c);
    }
    let mut index = vec![usize::MAX; total];
    let mut nodes = Vec::new();
    for i in 0..total {
        let r = sets.find(i);
        if index[r] == usize::MAX {
            index[r] = nodes.len();
            nodes.push(b.nodes[r]);
        }
        index[i] = index[r];
    }
    let mut h_half = vec![0i64; nodes.len()];
    for i in 0..total {
        h_half[index[i]] += b.h_half[i];
    }
    let mut offset_half = b.offset_half;
    let mut couplings = BTreeMap::new();
    for &(i, j, c) in &b.edges {
        let (i, j) = (index[i], index[j]);
        if i == j {
            // s^2 = 1
            offset_half += 2 * c;
        } else {
            *couplings.entry((i.min(j), i.max(j))).or_insert(0) += c;
        }
    }
    couplings.retain(|_, c| *c != 0);

    let mut pins = vec![None; nodes.len()];
    for q in 0..n {
        pins[index[first[q]]] = Some(spin_of_bit(z0[q]));
    }
    for q in 0..n {
        let node = index[current[q]];
        let s = spin_of_bit(z[q]);
        match pins[node] {
            Some(prev) if prev != s => {
                return Err(Error::Mapping(format!(
                    "qubit {q} has no non-diagonal gate; input and output pins disagree"
                )))
            }
            _ => pins[node] = Some(s),
        }
    }

    let graph = IsingGraph {
        nodes,
        pins,
        h_half,
        couplings,
        gate_count: b.gate_count,
        offset_half,
    };
    if graph.free_spins() > MAX_FREE_SPINS {
        return Err(Error::SizeLimit(format!(
            "{} free spins exceed the enumeration limit {MAX_FREE_SPINS}",
            graph.free_spins()
        )));
    }
    Ok(graph)
}

/// `2^(-G/2) sum_s exp(i pi/4 E(s))` over all free spins, by Gray-code
/// enumeration. Configurations are tallied by their phase in units of
/// `pi/8` with integer counts, so the result does not depend on the
/// enumeration order.
pub fn partition_function(graph: &IsingGraph) -> Result<Complex64> {
    let free: Vec<usize> = (0..graph.len()).filter(|&i| graph.pins[i].is_none()).collect();
    let f = free.len();
    if f > MAX_FREE_SPINS {
        return Err(Error::SizeLimit(format!(
            "{f} free spins exceed the enumeration limit {MAX_FREE_SPINS}"
        )));
    }
    let mut slot = vec![usize::MAX; graph.len()];
    for (k, &i) in free.iter().enumerate() {
        slot[i] = k;
    }

    // Fold pinned spins into a constant and effective fields (units of 1/2).
    let mut constant = graph.offset_half;
    let mut base: Vec<i64> = free.iter().map(|&i| graph.h_half[i]).collect();
    for (i, p) in graph.pins.iter().enumerate() {
        if let Some(s) = p {
            constant += graph.h_half[i] * *s as i64;
        }
    }
    let mut adjacency: Vec<Vec<(usize, i64)>> = vec![Vec::new(); f];
    for (&(i, j), &c) in &graph.couplings {
        let c2 = 2 * c;
        match (graph.pins[i], graph.pins[j]) {
            (Some(si), Some(sj)) => constant += c2 * (si * sj) as i64,
            (Some(si), None) => base[slot[j]] += c2 * si as i64,
            (None, Some(sj)) => base[slot[i]] += c2 * sj as i64,
            (None, None) => {
                adjacency[slot[i]].push((slot[j], c2));
                adjacency[slot[j]].push((slot[i], c2));
            }
        }
    }

    // Start from all spins +1.
    let mut spins = vec![1i64; f];
    let mut local: Vec<i64> = (0..f)
        .map(|k| base[k] + adjacency[k].iter().map(|&(_, c2)| c2).sum::<i64>())
        .collect();
    let mut energy = constant + base.iter().sum::<i64>();
    for (k, adj) in adjacency.iter().enumerate() {
        for &(m, c2) in adj {
            if k < m {
                energy += c2;
            }
        }
    }

    let mut counts = [0u64; 16];
    counts[energy.rem_euclid(16) as usize] += 1;
    for step in 1u64..(1u64 << f) {
        let k = step.trailing_zeros() as usize;
        let s = spins[k];
        energy -= 2 * s * local[k];
        spins[k] = -s;
        for &(m, c2) in &adjacency[k] {
            local[m] -= 2 * c2 * s;
        }
        counts[energy.rem_euclid(16) as usize] += 1;
    }

    let mut sum = Complex64::new(0.0, 0.0);
    for (k, &c) in counts.iter().enumerate() {
        if c > 0 {
            sum += Complex64::from_polar(c as f64, k as f64 * std::f64::consts::PI / 8.0);
        }
    }
    Ok(sum * 0.5f64.powf(graph.gate_count as f64 / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn single(layers: &str) -> Circuit {
        Circuit::parse(1, layers).unwrap()
    }

    #[test]
    fn hadamard_amplitude() {
        let g = map_to_ising(&single("H 0"), &[0], &[0], 1).unwrap();
        assert_eq!(g.gate_count(), 1);
        assert_eq!(g.free_spins(), 0);
        let a = partition_function(&g).unwrap();
        assert!(close(a, Complex64::new(FRAC_1_SQRT_2, 0.0)));
        let a = partition_function(&map_to_ising(&single("H 0"), &[1], &[1], 1).unwrap()).unwrap();
        assert!(close(a, Complex64::new(-FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn hadamard_t_hadamard() {
        let g = map_to_ising(&single("H 0\nT 0\nH 0"), &[0], &[0], 1).unwrap();
        assert_eq!(g.free_spins(), 1);
        let expected = (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, PI / 4.0)) / 2.0;
        assert!(close(partition_function(&g).unwrap(), expected));
    }

    #[test]
    fn sqrt_y_lookup() {
        // sqrt(Y) = [[1, -1], [1, 1]] / sqrt 2, entry (out, in).
        let c = single("SY 0");
        for (z0, z, v) in [(0, 0, 1.0), (1, 0, -1.0), (0, 1, 1.0), (1, 1, 1.0)] {
            let a = partition_function(&map_to_ising(&c, &[z0], &[z], 1).unwrap()).unwrap();
            assert!(close(a, Complex64::new(v * FRAC_1_SQRT_2, 0.0)), "{z0}{z}: {a}");
        }
    }

    #[test]
    fn two_t_gates_accumulate_negative_field() {
        // Each T contributes (1 - s) / 2, i.e. field -1/2 and offset +1/2.
        let g = map_to_ising(&single("H 0\nT 0\nT 0\nH 0"), &[0], &[0], 1).unwrap();
        // The middle node also gets -1 from each neighbouring H.
        let middle = g.nodes().iter().position(|n| n.position == 1).unwrap();
        assert_eq!(g.field(middle), -3.0);
        let g = map_to_ising(&single("T 0\nT 0"), &[1], &[1], 1).unwrap();
        assert_eq!(g.field(0), -1.0);
        assert_eq!(g.offset(), 1.0);
        // T^2 = S: <1|S|1> = i.
        assert!(close(partition_function(&g).unwrap(), Complex64::new(0.0, 1.0)));
    }

    #[test]
    fn phases_are_multiples_of_pi_over_eight() {
        let c = super::super::build_coe_circuit(3, 4, 17).unwrap();
        let g = map_to_ising(&c, &[0, 1, 0], &[1, 1, 0], 1).unwrap();
        for h in g.fields() {
            assert_eq!((2.0 * h).fract(), 0.0);
        }
        assert_eq!((2.0 * g.offset()).fract(), 0.0);
        let spins: Vec<i8> = (0..g.len()).map(|i| g.pin(i).unwrap_or(if i % 3 == 0 { 1 } else { -1 })).collect();
        let e = g.phase_exponent(&spins);
        assert_eq!((2.0 * e).fract(), 0.0);
    }

    #[test]
    fn pinned_field_shift_only_changes_global_phase() {
        let c = super::super::build_coe_circuit(2, 3, 4).unwrap();
        let g = map_to_ising(&c, &[0, 1], &[1, 0], 1).unwrap();
        let a = partition_function(&g).unwrap();
        let mut shifted = g.clone();
        for i in 0..g.len() {
            if g.pin(i).is_some() {
                shifted.shift_field(i, 1.5).unwrap();
            }
        }
        let b = partition_function(&shifted).unwrap();
        assert!((a.norm() - b.norm()).abs() < 1e-12);
        assert!(shifted.shift_field(0, 0.3).is_err());
    }

    #[test]
    fn gate_and_node_bookkeeping() {
        let c = super::super::build_coe_circuit(3, 2, 2).unwrap();
        let per_cycle = c.non_diagonal_count();
        for m in 1..=2 {
            let g = map_to_ising(&c, &[0; 3], &[0; 3], m).unwrap();
            assert_eq!(g.gate_count(), m * per_cycle);
            // One initial node per qubit plus one per non-diagonal gate.
            assert_eq!(g.len(), 3 + m * per_cycle);
            assert_eq!(g.free_spins(), g.len() - 6);
        }
    }

    #[test]
    fn identity_at_zero_depth() {
        let c = super::super::build_coe_circuit(1, 0, 0).unwrap();
        for (z0, z, v) in [(0, 0, 1.0), (0, 1, 0.0), (1, 1, 1.0)] {
            let a = partition_function(&map_to_ising(&c, &[z0], &[z], 1).unwrap()).unwrap();
            assert!(close(a, Complex64::new(v, 0.0)));
        }
    }

    #[test]
    fn diagonal_only_row_with_conflicting_pins() {
        let c = single("T 0");
        assert!(matches!(map_to_ising(&c, &[0], &[1], 1), Err(Error::Mapping(_))));
        let a = partition_function(&map_to_ising(&c, &[1], &[1], 2).unwrap()).unwrap();
        assert!(close(a, Complex64::from_polar(1.0, PI / 2.0)));
    }

    #[test]
    fn input_validation() {
        let c = single("H 0");
        assert!(map_to_ising(&c, &[0, 0], &[0], 1).is_err());
        assert!(map_to_ising(&c, &[2], &[0], 1).is_err());
        assert!(map_to_ising(&c, &[0], &[0], 0).is_err());
    }

    #[test]
    fn free_spin_guard() {
        let deep = vec!["H 0"; MAX_FREE_SPINS + 2].join("\n");
        assert!(matches!(
            map_to_ising(&single(&deep), &[0], &[0], 1),
            Err(Error::SizeLimit(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let c = super::super::build_coe_circuit(2, 2, 9).unwrap();
        let g = map_to_ising(&c, &[1, 0], &[0, 0], 2).unwrap();
        let text = g.to_json();
        assert!(text.contains("\"G\""));
        let back = IsingGraph::from_json(&text).unwrap();
        assert_eq!(back, g);
        assert!(IsingGraph::from_json("{").is_err());
    }
}
