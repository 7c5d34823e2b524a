//! Spin-model partition functions against state-vector amplitudes.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use floquet_coe::circuit::{
    amplitude_oracle, build_coe_circuit, circuit_unitary, map_to_ising, partition_function,
    verify_mapping, Circuit, Gate, IsingGraph, MAX_FREE_SPINS,
};
use floquet_coe::linalg::{self, Complex64};
use floquet_coe::Error;
use proptest::prelude::*;

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() < tol
}

#[test]
fn hadamard_row_gives_equal_magnitudes() {
    let c = Circuit::parse(1, "H 0").unwrap();
    for z in [0, 1] {
        let g = map_to_ising(&c, &[0], &[z], 1).unwrap();
        assert_eq!(g.free_spins(), 0);
        assert_eq!(g.len(), 2);
        let a = partition_function(&g).unwrap();
        assert!(close(a, Complex64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
    }
}

#[test]
fn oracle_gate_examples() {
    let all_h = Circuit::parse(3, "H 0; H 1; H 2").unwrap();
    for z in 0..8u8 {
        let bits = [(z >> 2) & 1, (z >> 1) & 1, z & 1];
        let a = amplitude_oracle(&all_h, &[0, 0, 0], &bits, 1).unwrap();
        assert!(close(a, Complex64::new(2f64.powf(-1.5), 0.0), 1e-15));
    }
    let t = Circuit::parse(1, "T 0").unwrap();
    let a = amplitude_oracle(&t, &[1], &[1], 1).unwrap();
    assert!(close(a, Complex64::from_polar(1.0, PI / 4.0), 1e-15));
    let cz = Circuit::parse(2, "CZ 0 1").unwrap();
    assert!(close(amplitude_oracle(&cz, &[1, 1], &[1, 1], 1).unwrap(), Complex64::new(-1.0, 0.0), 1e-15));
    assert!(close(amplitude_oracle(&cz, &[0, 1], &[0, 1], 1).unwrap(), Complex64::new(1.0, 0.0), 1e-15));
}

#[test]
fn sqrt_y_coupling_and_fields() {
    let c = Circuit::parse(1, "SY 0").unwrap();
    let g = map_to_ising(&c, &[0], &[0], 1).unwrap();
    assert_eq!(g.couplings(), vec![(0, 1, -1)]);
    assert_eq!(g.fields(), vec![-1.0, 1.0]);
    let c = Circuit::parse(1, "SYT 0").unwrap();
    let g = map_to_ising(&c, &[0], &[0], 1).unwrap();
    assert_eq!(g.fields(), vec![1.0, -1.0]);
}

#[test]
fn cz_adds_a_cross_row_edge() {
    let c = Circuit::parse(2, "H 0; H 1\nCZ 0 1\nH 0; H 1").unwrap();
    let g = map_to_ising(&c, &[0, 0], &[1, 0], 1).unwrap();
    let cross: Vec<_> = g
        .couplings()
        .into_iter()
        .filter(|&(i, j, _)| g.nodes()[i].row != g.nodes()[j].row)
        .collect();
    assert_eq!(cross.len(), 1);
    assert_eq!(cross[0].2, 1);
}

#[test]
fn two_qubit_repetitions_match() {
    for seed in 0..20 {
        let c = build_coe_circuit(2, 1 + (seed as usize % 4), seed).unwrap();
        assert!(verify_mapping(&c, 2, 8, seed).unwrap() < 1e-10);
    }
}

#[test]
fn iqp_circuit_matches() {
    // H . diagonal . H is a symmetric commuting-gate circuit.
    let c = Circuit::parse(3, "H 0; H 1; H 2\nT 0; CZ 1 2\nCZ 0 1; T 2\nT 1\nH 0; H 1; H 2").unwrap();
    assert!(linalg::symmetry_residual(&circuit_unitary(&c).unwrap()) < 1e-14);
    assert!(verify_mapping(&c, 1, 16, 0).unwrap() < 1e-12);
    assert!(verify_mapping(&c, 3, 16, 1).unwrap() < 1e-12);
}

#[test]
fn verification_is_deterministic() {
    let c = build_coe_circuit(3, 3, 5).unwrap();
    assert_eq!(verify_mapping(&c, 1, 10, 9).unwrap(), verify_mapping(&c, 1, 10, 9).unwrap());
}

#[test]
fn json_interchange() {
    let c = build_coe_circuit(2, 2, 3).unwrap();
    let g = map_to_ising(&c, &[0, 1], &[1, 1], 1).unwrap();
    let value: serde_json::Value = serde_json::from_str(&g.to_json()).unwrap();
    for key in ["nodes", "h", "edges", "pins", "G", "offset"] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
    assert_eq!(value["G"], c.non_diagonal_count());
    let back = IsingGraph::from_json(&g.to_json()).unwrap();
    assert_eq!(partition_function(&back).unwrap(), partition_function(&g).unwrap());
    assert!(matches!(
        IsingGraph::from_json(r#"{"G":0,"edges":[],"h":[0.3],"nodes":[{"row":0,"position":0}],"offset":0,"pins":[]}"#),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn size_guards() {
    let deep = vec!["SX 0"; MAX_FREE_SPINS + 3].join("\n");
    let c = Circuit::parse(1, &deep).unwrap();
    assert!(matches!(map_to_ising(&c, &[0], &[0], 1), Err(Error::SizeLimit(_))));
}

fn arbitrary_circuit() -> impl Strategy<Value = Circuit> {
    (1usize..=3, 1usize..=6).prop_flat_map(|(n, depth)| {
        let gate = (0usize..6, 0..n).prop_map(move |(kind, q)| match kind {
            0 => Gate::H(q),
            1 => Gate::SX(q),
            2 => Gate::SY(q),
            3 => Gate::SYT(q),
            4 => Gate::T(q),
            _ if n > 1 => Gate::CZ(q, (q + 1) % n),
            _ => Gate::T(q),
        });
        prop::collection::vec(gate, depth)
            .prop_map(move |gates| Circuit::new(n, gates.into_iter().map(|g| vec![g]).collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_small_circuit_maps_exactly(c in arbitrary_circuit(), m in 1usize..=2, seed in any::<u64>()) {
        let n = c.n_qubits();
        let mut state = seed;
        let mut bit = || { state = state.rotate_left(7) ^ 0x9E37_79B9; (state & 1) as u8 };
        let z0: Vec<u8> = (0..n).map(|_| bit()).collect();
        let z: Vec<u8> = (0..n).map(|_| bit()).collect();
        let oracle = amplitude_oracle(&c, &z0, &z, m).unwrap();
        match map_to_ising(&c, &z0, &z, m) {
            Ok(g) => {
                prop_assert_eq!(g.gate_count(), m * c.non_diagonal_count());
                prop_assert!((partition_function(&g).unwrap() - oracle).norm() < 1e-12);
                // Every configuration's phase is a multiple of pi/8.
                let spins: Vec<i8> = (0..g.len()).map(|i| g.pin(i).unwrap_or(if (seed >> (i % 64)) & 1 == 1 { 1 } else { -1 })).collect();
                prop_assert_eq!((2.0 * g.phase_exponent(&spins)).fract(), 0.0);
            }
            Err(Error::Mapping(_)) => prop_assert!(oracle.norm() < 1e-15),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}
