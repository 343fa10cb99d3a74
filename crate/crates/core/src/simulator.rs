//! Dense statevector simulation with post-selection.
//!
//! Amplitudes are stored little-endian: bit `q` of a basis index is the
//! state of qubit `q`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use thiserror::Error;

use crate::ansatz::{Angle, Circuit, Gate, GateKind};

/// Largest register `evaluate` accepts.
pub const MAX_QUBITS: usize = 24;

/// Post-selection weights below this are treated as vanished.
pub const VANISHING_WEIGHT: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("parameter slot {0} has no binding")]
    UnboundSlot(usize),
    #[error("{0} qubits exceeds the simulator cap of {MAX_QUBITS}")]
    QubitCapExceeded(usize),
    #[error("qubit {qubit} out of range for a {n}-qubit state")]
    Index { qubit: usize, n: usize },
}

pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len().is_power_of_two(), "amplitude count must be a power of two");
        StateVector { n: amps.len().trailing_zeros() as usize, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `m` to `target`, restricted to basis states where `control`
    /// (if any) is 1. Only the strided amplitude pairs are touched.
    pub fn apply_matrix(&mut self, m: &Matrix2, target: usize, control: Option<usize>) -> Result<(), SimError> {
        for q in std::iter::once(target).chain(control) {
            if q >= self.n {
                return Err(SimError::Index { qubit: q, n: self.n });
            }
        }
        let stride = 1usize << target;
        let cmask = control.map_or(0, |c| 1usize << c);
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for i in base..base + stride {
                if i & cmask != cmask {
                    continue;
                }
                let j = i | stride;
                let (a0, a1) = (self.amps[i], self.amps[j]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += stride << 1;
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: &Gate, bindings: &[f64]) -> Result<(), SimError> {
        let m = gate_matrix(gate, bindings)?;
        self.apply_matrix(&m, gate.target, gate.control)
    }

    /// Zeroes every amplitude where `qubit` is 1. No renormalisation.
    pub fn project_zero(&mut self, qubit: usize) -> Result<(), SimError> {
        if qubit >= self.n {
            return Err(SimError::Index { qubit, n: self.n });
        }
        let mask = 1usize << qubit;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask != 0 {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(())
    }

    /// Unnormalised weight of the branch where `qubit` is 1.
    pub fn weight_one(&self, qubit: usize) -> f64 {
        let mask = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

fn resolve(angle: Angle, bindings: &[f64]) -> Result<f64, SimError> {
    match angle {
        Angle::Fixed(v) => Ok(v),
        Angle::Slot(s) => bindings.get(s).copied().ok_or(SimError::UnboundSlot(s)),
    }
}

/// The single-qubit block of `gate` (the controlled block for CRX/CNOT).
pub fn gate_matrix(gate: &Gate, bindings: &[f64]) -> Result<Matrix2, SimError> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let theta = match gate.angle {
        Some(a) => resolve(a, bindings)?,
        None => 0.0,
    };
    let (cos, sin) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    Ok(match gate.kind {
        GateKind::Ry => [[c(cos, 0.0), c(-sin, 0.0)], [c(sin, 0.0), c(cos, 0.0)]],
        GateKind::Rx | GateKind::Crx => [[c(cos, 0.0), c(0.0, -sin)], [c(0.0, -sin), c(cos, 0.0)]],
        GateKind::Rz => [[c(cos, -sin), c(0.0, 0.0)], [c(0.0, 0.0), c(cos, sin)]],
        GateKind::Cnot => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        GateKind::H => [
            [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
            [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
        ],
    })
}

/// By-value form of [`StateVector::apply`].
pub fn apply_gate(mut state: StateVector, gate: &Gate, bindings: &[f64]) -> Result<StateVector, SimError> {
    state.apply(gate, bindings)?;
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    /// Probability that the measured qubit reads 1, given post-selection.
    pub p_match: f64,
    pub postselect_weight: f64,
    /// Post-selection weight fell below [`VANISHING_WEIGHT`]; `p_match` is
    /// then 0.5.
    pub vanished: bool,
}

/// Runs `circuit` from `|0…0⟩` and returns the state before
/// post-selection.
pub fn run(circuit: &Circuit, bindings: &[f64]) -> Result<StateVector, SimError> {
    if circuit.n_qubits > MAX_QUBITS {
        return Err(SimError::QubitCapExceeded(circuit.n_qubits));
    }
    let mut state = StateVector::zero(circuit.n_qubits);
    for g in &circuit.gates {
        state.apply(g, bindings)?;
    }
    Ok(state)
}

pub fn evaluate(circuit: &Circuit, bindings: &[f64]) -> Result<EvalResult, SimError> {
    let mut state = run(circuit, bindings)?;
    for &q in &circuit.postselect {
        state.project_zero(q)?;
    }
    if circuit.measure >= state.n {
        return Err(SimError::Index { qubit: circuit.measure, n: state.n });
    }
    let weight = state.norm_sqr();
    if weight < VANISHING_WEIGHT {
        return Ok(EvalResult { p_match: 0.5, postselect_weight: weight, vanished: true });
    }
    let p = (state.weight_one(circuit.measure) / weight).clamp(0.0, 1.0);
    Ok(EvalResult { p_match: p, postselect_weight: weight, vanished: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circuit(n: usize, gates: Vec<Gate>, postselect: Vec<usize>, measure: usize) -> Circuit {
        Circuit { n_qubits: n, gates, postselect, measure }
    }

    #[test]
    fn empty_circuit_reads_zero() {
        let r = evaluate(&circuit(1, vec![], vec![], 0), &[]).unwrap();
        assert_eq!(r.p_match, 0.0);
        assert_eq!(r.postselect_weight, 1.0);
        assert!(!r.vanished);
    }

    #[test]
    fn ry_pi_flips() {
        let r = evaluate(&circuit(1, vec![Gate::ry(0, Angle::Fixed(PI))], vec![], 0), &[]).unwrap();
        assert!((r.p_match - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_postselection() {
        let c = circuit(2, vec![Gate::h(0), Gate::cnot(0, 1)], vec![0], 1);
        let r = evaluate(&c, &[]).unwrap();
        assert!((r.postselect_weight - 0.5).abs() < 1e-15);
        assert!(r.p_match.abs() < 1e-15);
    }

    #[test]
    fn vanishing_branch_reports_half() {
        let c = circuit(2, vec![Gate::ry(0, Angle::Fixed(PI))], vec![0], 1);
        let r = evaluate(&c, &[]).unwrap();
        assert!(r.vanished);
        assert_eq!(r.p_match, 0.5);
    }

    #[test]
    fn rz_only_changes_phase() {
        let mut s = StateVector::zero(1);
        s.apply(&Gate::rz(0, Angle::Fixed(1.3)), &[]).unwrap();
        assert!((s.amplitudes()[0].norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(s.amplitudes()[1].norm_sqr(), 0.0);
    }

    #[test]
    fn cnot_is_an_involution() {
        let mut s = StateVector::zero(3);
        for (q, t) in [(0, 0.3), (1, 1.1), (2, 2.9)] {
            s.apply(&Gate::ry(q, Angle::Fixed(t)), &[]).unwrap();
        }
        let before = s.clone();
        s.apply(&Gate::cnot(2, 0), &[]).unwrap();
        s.apply(&Gate::cnot(2, 0), &[]).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn errors() {
        let c = circuit(1, vec![Gate::ry(0, Angle::Slot(3))], vec![], 0);
        assert_eq!(evaluate(&c, &[0.0]), Err(SimError::UnboundSlot(3)));
        let big = circuit(MAX_QUBITS + 1, vec![], vec![], 0);
        assert_eq!(evaluate(&big, &[]), Err(SimError::QubitCapExceeded(MAX_QUBITS + 1)));
        let s = StateVector::zero(2);
        assert_eq!(
            apply_gate(s, &Gate::h(2), &[]),
            Err(SimError::Index { qubit: 2, n: 2 })
        );
    }
}
