//! Shared test oracles.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

use multiq::ansatz::{Angle, Circuit, Gate, GateKind};

type Mat = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect()
}

fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect()
}

fn pauli(which: char) -> Mat {
    match which {
        'X' => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        'Y' => vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]],
        'Z' => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]],
        _ => unreachable!(),
    }
}

/// `exp(−iθP/2) = cos(θ/2) I − i sin(θ/2) P`.
fn rotation(p: char, theta: f64) -> Mat {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let pm = pauli(p);
    let id = identity(2);
    (0..2).map(|i| (0..2).map(|j| id[i][j] * co + pm[i][j] * c(0.0, -si)).collect()).collect()
}

fn single_block(g: &Gate, bindings: &[f64]) -> Mat {
    let theta = match g.angle {
        Some(Angle::Fixed(v)) => v,
        Some(Angle::Slot(s)) => bindings[s],
        None => 0.0,
    };
    match g.kind {
        GateKind::Rx | GateKind::Crx => rotation('X', theta),
        GateKind::Ry => rotation('Y', theta),
        GateKind::Rz => rotation('Z', theta),
        GateKind::Cnot => pauli('X'),
        GateKind::H => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            add(&pauli('X'), &pauli('Z')).iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
        }
    }
}

/// Kronecker product of per-qubit operators, qubit `n−1` leftmost so that
/// qubit `q` is bit `q` of the basis index.
fn embed(ops: &[Mat]) -> Mat {
    ops.iter().rev().fold(identity(1), |acc, m| kron(&acc, m))
}

/// Full `2ⁿ × 2ⁿ` matrix of one gate.
pub fn gate_unitary(g: &Gate, n: usize, bindings: &[f64]) -> Mat {
    let u = single_block(g, bindings);
    match g.control {
        None => embed(&(0..n).map(|q| if q == g.target { u.clone() } else { identity(2) }).collect::<Vec<_>>()),
        Some(ctl) => {
            let p0 = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]];
            let p1 = vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
            let off: Vec<Mat> = (0..n).map(|q| if q == ctl { p0.clone() } else { identity(2) }).collect();
            let on: Vec<Mat> = (0..n)
                .map(|q| if q == ctl { p1.clone() } else if q == g.target { u.clone() } else { identity(2) })
                .collect();
            add(&embed(&off), &embed(&on))
        }
    }
}

/// Statevector of `circuit` from `|0…0⟩` by dense matrix products.
pub fn kron_oracle(circuit: &Circuit, bindings: &[f64]) -> Vec<Complex64> {
    let dim = 1 << circuit.n_qubits;
    let mut state = vec![c(0.0, 0.0); dim];
    state[0] = c(1.0, 0.0);
    for g in &circuit.gates {
        let m = gate_unitary(g, circuit.n_qubits, bindings);
        state = (0..dim).map(|i| (0..dim).map(|j| m[i][j] * state[j]).sum()).collect();
    }
    state
}

/// Random circuit over every gate kind with a mix of fixed and slot
/// angles; returns it with its bindings. Measures qubit 0 and
/// post-selects the rest.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize, n_gates: usize) -> (Circuit, Vec<f64>) {
    let n_slots = 8;
    let bindings: Vec<f64> = (0..n_slots).map(|_| rng.gen_range(-7.0..7.0)).collect();
    let mut circuit = Circuit::new(n);
    for _ in 0..n_gates {
        let angle = if rng.gen_bool(0.5) {
            Angle::Slot(rng.gen_range(0..n_slots))
        } else {
            Angle::Fixed(rng.gen_range(-7.0..7.0))
        };
        let t = rng.gen_range(0..n);
        let kinds = if n > 1 { 6 } else { 4 };
        let g = match rng.gen_range(0..kinds) {
            0 => Gate::ry(t, angle),
            1 => Gate::rx(t, angle),
            2 => Gate::rz(t, angle),
            3 => Gate::h(t),
            k => {
                let mut ctl = rng.gen_range(0..n - 1);
                if ctl >= t {
                    ctl += 1;
                }
                if k == 4 {
                    Gate::crx(ctl, t, angle)
                } else {
                    Gate::cnot(ctl, t)
                }
            }
        };
        circuit.gates.push(g);
    }
    circuit.postselect = (1..n).collect();
    (circuit, bindings)
}
