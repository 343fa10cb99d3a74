mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{gate_unitary, kron_oracle, random_circuit};
use multiq::ansatz::{sim14_layer, Angle, Circuit, Gate, GateKind};
use multiq::simulator::{evaluate, gate_matrix, run, StateVector};

fn circuit_strategy() -> impl Strategy<Value = (Circuit, Vec<f64>)> {
    (any::<u64>(), 1usize..=5, 0usize..=30).prop_map(|(seed, n, gates)| {
        random_circuit(&mut ChaCha8Rng::seed_from_u64(seed), n, gates)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statevector_matches_kron_oracle((c, b) in circuit_strategy()) {
        let fast = run(&c, &b).unwrap();
        for (x, y) in fast.amplitudes().iter().zip(kron_oracle(&c, &b)) {
            prop_assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn norm_is_conserved((c, b) in circuit_strategy()) {
        prop_assert!((run(&c, &b).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn post_selecting_more_qubits_never_adds_weight((c, b) in circuit_strategy()) {
        let mut state = run(&c, &b).unwrap();
        let mut last = state.norm_sqr();
        for q in 1..c.n_qubits {
            state.project_zero(q).unwrap();
            let w = state.norm_sqr();
            prop_assert!(w <= last + 1e-15);
            last = w;
        }
        let r = evaluate(&c, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.p_match));
    }

    #[test]
    fn gate_blocks_are_unitary(kind in 0usize..6, theta in -20.0f64..20.0) {
        let g = match kind {
            0 => Gate::ry(0, Angle::Fixed(theta)),
            1 => Gate::rx(0, Angle::Fixed(theta)),
            2 => Gate::rz(0, Angle::Fixed(theta)),
            3 => Gate::crx(1, 0, Angle::Fixed(theta)),
            4 => Gate::cnot(1, 0),
            _ => Gate::h(0),
        };
        let m = gate_matrix(&g, &[]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let dot: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - Complex64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }
}

/// The oracle itself must notice a wrong rotation sign.
#[test]
fn oracle_detects_a_wrong_gate() {
    let c = Circuit { n_qubits: 1, gates: vec![Gate::ry(0, Angle::Fixed(0.7))], postselect: vec![], measure: 0 };
    let flipped = Circuit { gates: vec![Gate::ry(0, Angle::Fixed(-0.7))], ..c.clone() };
    let a = kron_oracle(&c, &[]);
    let b = run(&flipped, &[]).unwrap();
    assert!((a[1] - b.amplitudes()[1]).norm() > 0.1);
}

#[test]
fn controlled_gate_oracle_acts_only_on_control_one() {
    let g = Gate::cnot(1, 0);
    let u = gate_unitary(&g, 2, &[]);
    // |q1 q0⟩: |10⟩ (index 2) ↔ |11⟩ (index 3); |00⟩, |01⟩ fixed.
    assert_eq!(u[0][0], Complex64::new(1.0, 0.0));
    assert_eq!(u[1][1], Complex64::new(1.0, 0.0));
    assert_eq!(u[3][2], Complex64::new(1.0, 0.0));
    assert_eq!(u[2][3], Complex64::new(1.0, 0.0));
}

/// For a single RY slot the probability is a sinusoid in the angle, so
/// the parameter-shift rule and a central difference must agree.
#[test]
fn parameter_shift_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..40 {
        let n = rng.gen_range(2..=4);
        let (mut c, mut b) = random_circuit(&mut rng, n, 12);
        let slot = b.len();
        let at = rng.gen_range(0..=c.gates.len());
        c.gates.insert(at, Gate::ry(rng.gen_range(0..n), Angle::Slot(slot)));
        c.postselect.clear();
        b.push(rng.gen_range(-PI..PI));
        let p = |theta: f64| {
            let mut bb = b.clone();
            bb[slot] = theta;
            evaluate(&c, &bb).unwrap().p_match
        };
        let t = b[slot];
        let h = 1e-5;
        let fd = (p(t + h) - p(t - h)) / (2.0 * h);
        let shift = (p(t + FRAC_PI_2) - p(t - FRAC_PI_2)) / 2.0;
        assert!((fd - shift).abs() < 1e-6, "fd {fd} vs shift {shift}");
    }
}

#[test]
fn sim14_gate_counts() {
    for q in 1..=5 {
        let slots: Vec<Angle> = (0..4 * q).map(Angle::Slot).collect();
        let qubits: Vec<usize> = (0..q).collect();
        let gates = sim14_layer(&qubits, &slots, 1).unwrap();
        assert_eq!(gates.len(), 4 * q);
        let controlled = gates.iter().filter(|g| g.kind == GateKind::Crx).count();
        assert_eq!(controlled, if q == 1 { 0 } else { 2 * q });
    }
}

#[test]
fn trace_matches_stepwise_application() {
    let (c, b) = random_circuit(&mut ChaCha8Rng::seed_from_u64(5), 3, 20);
    let mut s = StateVector::zero(3);
    for g in &c.gates {
        s.apply(g, &b).unwrap();
    }
    assert_eq!(s, run(&c, &b).unwrap());
}
