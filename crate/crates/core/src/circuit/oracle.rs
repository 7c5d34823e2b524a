use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{map_to_ising, partition_function, Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Complex64};

/// Largest register the dense state-vector simulator accepts.
pub const MAX_ORACLE_QUBITS: usize = 12;

fn single_qubit_matrix(g: &Gate) -> [[Complex64; 2]; 2] {
    let r = |x: f64| Complex64::new(x * FRAC_1_SQRT_2, 0.0);
    let i = Complex64::new(0.0, FRAC_1_SQRT_2);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match g {
        Gate::H(_) => [[r(1.0), r(1.0)], [r(1.0), r(-1.0)]],
        Gate::SX(_) => [[i, r(1.0)], [r(1.0), i]],
        Gate::SY(_) => [[r(1.0), r(-1.0)], [r(1.0), r(1.0)]],
        Gate::SYT(_) => [[r(1.0), r(1.0)], [r(-1.0), r(1.0)]],
        Gate::T(_) => [[one, zero], [zero, Complex64::from_polar(1.0, PI / 4.0)]],
        Gate::CZ(..) => unreachable!("two-qubit gate"),
    }
}

fn apply(state: &mut [Complex64], n: usize, gate: &Gate) {
    let bit = |q: usize| 1usize << (n - 1 - q);
    match *gate {
        Gate::CZ(a, b) => {
            let mask = bit(a) | bit(b);
            for (k, amp) in state.iter_mut().enumerate() {
                if k & mask == mask {
                    *amp = -*amp;
                }
            }
        }
        ref g => {
            let m = single_qubit_matrix(g);
            let b = bit(g.qubits()[0]);
            for k in 0..state.len() {
                if k & b == 0 {
                    let (a0, a1) = (state[k], state[k | b]);
                    state[k] = m[0][0] * a0 + m[0][1] * a1;
                    state[k | b] = m[1][0] * a0 + m[1][1] * a1;
                }
            }
        }
    }
}

fn index_of(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

fn check_register(circuit: &Circuit) -> Result<()> {
    if circuit.n_qubits() > MAX_ORACLE_QUBITS {
        return Err(Error::SizeLimit(format!(
            "state-vector oracle is limited to {MAX_ORACLE_QUBITS} qubits"
        )));
    }
    Ok(())
}

/// `C^cycles |z0>` by direct state-vector simulation.
fn evolve(circuit: &Circuit, z0: &[u8], cycles: usize) -> Vec<Complex64> {
    let n = circuit.n_qubits();
    let mut state = vec![Complex64::new(0.0, 0.0); 1 << n];
    state[index_of(z0)] = Complex64::new(1.0, 0.0);
    for _ in 0..cycles {
        for g in circuit.gates() {
            apply(&mut state, n, g);
        }
    }
    state
}

/// `<z| C^cycles |z0>` by direct state-vector simulation.
pub fn amplitude_oracle(circuit: &Circuit, z0: &[u8], z: &[u8], cycles: usize) -> Result<Complex64> {
    check_register(circuit)?;
    let n = circuit.n_qubits();
    if z0.len() != n || z.len() != n || z0.iter().chain(z).any(|&b| b > 1) {
        return Err(Error::InvalidParameter("bit strings must match the register".into()));
    }
    Ok(evolve(circuit, z0, cycles)[index_of(z)])
}

/// Full unitary of one application of the circuit.
pub fn circuit_unitary(circuit: &Circuit) -> Result<CMatrix> {
    check_register(circuit)?;
    let n = circuit.n_qubits();
    let dim = 1 << n;
    let mut u = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let bits: Vec<u8> = (0..n).map(|q| ((col >> (n - 1 - q)) & 1) as u8).collect();
        for (row, amp) in evolve(circuit, &bits, 1).into_iter().enumerate() {
            u[(row, col)] = amp;
        }
    }
    Ok(u)
}

/// Largest `|Z - A|` between the spin-model partition function and the
/// simulated amplitude over `trials` random input/output bit strings.
pub fn verify_mapping(circuit: &Circuit, cycles: usize, trials: usize, seed: u64) -> Result<f64> {
    let n = circuit.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let z0: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let z: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let graph = map_to_ising(circuit, &z0, &z, cycles)?;
        let dev = (partition_function(&graph)? - amplitude_oracle(circuit, &z0, &z, cycles)?).norm();
        worst = worst.max(dev);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_coe_circuit;
    use crate::linalg;

    #[test]
    fn gates_are_unitary() {
        let c = Circuit::parse(2, "H 0; SX 1\nSY 0; T 1\nSYT 0\nCZ 0 1").unwrap();
        assert!(linalg::unitarity_residual(&circuit_unitary(&c).unwrap()) < 1e-14);
    }

    #[test]
    fn sqrt_gates_square_correctly() {
        let x = circuit_unitary(&Circuit::parse(1, "SX 0\nSX 0").unwrap()).unwrap();
        // sqrt(X)^2 = iX
        assert!((x[(0, 1)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(x[(0, 0)].norm() < 1e-15);
        let y = circuit_unitary(&Circuit::parse(1, "SY 0\nSY 0").unwrap()).unwrap();
        // sqrt(Y)^2 = [[0, -1], [1, 0]]
        assert!((y[(0, 1)] + 1.0).norm() < 1e-15 && (y[(1, 0)] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn coe_circuits_are_symmetric() {
        for seed in 0..5 {
            let c = build_coe_circuit(3, 6, seed).unwrap();
            let u = circuit_unitary(&c).unwrap();
            assert!(linalg::symmetry_residual(&u) < 1e-13);
        }
    }

    #[test]
    fn mapping_matches_simulation_on_small_circuits() {
        for seed in 0..6 {
            let c = build_coe_circuit(2, 3, seed).unwrap();
            for m in 1..=2 {
                assert!(verify_mapping(&c, m, 6, seed).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn oracle_guard() {
        let c = Circuit::new(MAX_ORACLE_QUBITS + 1, vec![]).unwrap();
        let zeros = vec![0; MAX_ORACLE_QUBITS + 1];
        assert!(matches!(amplitude_oracle(&c, &zeros, &zeros, 1), Err(Error::SizeLimit(_))));
    }
}
