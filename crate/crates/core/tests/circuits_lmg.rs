mod common;

use lipkin_core::circuits::*;
use lipkin_core::lmg::{ground_state, order_parameters, LmgParams, Parity};
use lipkin_core::sim::{run_circuit, Gate};
use lipkin_core::tomography::{order_parameters_from_paulis, Expectations};
use lipkin_core::lmg::Source;

fn lambdas() -> Vec<f64> {
    (0..20).map(|i| -25.0 + 50.0 * i as f64 / 19.0).collect()
}

#[test]
fn noninteracting_targets_are_all_down() {
    let t = exact_coefficients(&LmgParams::new(1.0, 0.0, 3).unwrap()).unwrap();
    assert!((t.coefficients[0b111] - 1.0).abs() < 1e-12);
    assert_eq!(t.weight_parity, Parity::Odd);
    let t = exact_coefficients(&LmgParams::new(1.0, 0.0, 4).unwrap()).unwrap();
    assert!((t.coefficients[0b1111] - 1.0).abs() < 1e-12);
}

#[test]
fn zero_angles_give_all_down_for_three_qubits() {
    let c = build_circuit(3, &[0.0; 3]).unwrap();
    let s = run_circuit(&c, None).unwrap();
    assert!((s.probabilities()[0b111] - 1.0).abs() < 1e-15);
    let t = exact_coefficients(&LmgParams::new(1.0, 0.0, 3).unwrap()).unwrap();
    let angles = solve_angles(&t).unwrap();
    assert!(angles.iter().all(|a| a.abs() < 1e-12));
}

#[test]
fn permutation_symmetric_amplitudes_match_oracle() {
    let p = LmgParams::new(1.0, 1.0, 3).unwrap();
    let t = exact_coefficients(&p).unwrap();
    let (a1, a2, a3) = (t.coefficients[0b001], t.coefficients[0b010], t.coefficients[0b100]);
    assert!((a1 - a2).abs() < 1e-10 && (a2 - a3).abs() < 1e-10);
    let reference = common::ground(3, 1.0, 1.0);
    let overlap: f64 = t.coefficients.iter().zip(reference.vector.iter()).map(|(a, b)| a * b).sum();
    assert!((overlap.abs() - 1.0).abs() < 1e-10);
    for n in [3u32, 4] {
        for &l in &lambdas() {
            let t = exact_coefficients(&LmgParams::new(-1.0, l, n).unwrap()).unwrap();
            for k in 0..=n {
                let vals: Vec<f64> = (0..1usize << n)
                    .filter(|i| i.count_ones() == k)
                    .map(|i| t.coefficients[i])
                    .collect();
                assert!(vals.iter().all(|v| (v - vals[0]).abs() < 1e-10));
            }
        }
    }
}

#[test]
fn round_trip_fidelity_over_grid() {
    for n in [3u32, 4] {
        for eps in [1.0, -1.0] {
            for &l in &lambdas() {
                let p = LmgParams::new(eps, l, n).unwrap();
                let prep = prepare_ground_state(&p).unwrap();
                let state = run_circuit(&prep.circuit, None).unwrap();
                let f = state.fidelity_with(&prep.target.complex());
                assert!(f >= 1.0 - 1e-8, "N={n} eps={eps} l={l} F={f}");
                let exp = Expectations::exact(&state).unwrap();
                let est = order_parameters_from_paulis(&exp, &p, Source::SimIdeal).unwrap();
                let exact = order_parameters(&ground_state(&p).unwrap()).unwrap();
                assert!((est.point.jz - exact.jz).abs() < 1e-9);
                assert!((est.point.jz2 - exact.jz2).abs() < 1e-9);
                assert!((est.point.jpm2 - exact.jpm2).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn solved_circuits_reproduce_observables() {
    let p = LmgParams::new(1.0, 5.0, 3).unwrap();
    let prep = prepare_ground_state(&p).unwrap();
    let st = run_circuit(&prep.circuit, None).unwrap();
    let est = order_parameters_from_paulis(&Expectations::exact(&st).unwrap(), &p, Source::SimIdeal).unwrap();
    let exact = order_parameters(&ground_state(&p).unwrap()).unwrap();
    assert!((est.point.jz - exact.jz).abs() < 1e-6);

    let p = LmgParams::new(1.0, 1.0, 4).unwrap();
    let prep = prepare_ground_state(&p).unwrap();
    let st = run_circuit(&prep.circuit, None).unwrap();
    let est = order_parameters_from_paulis(&Expectations::exact(&st).unwrap(), &p, Source::SimIdeal).unwrap();
    assert!((est.point.energy() - ground_state(&p).unwrap().energy).abs() < 1e-6);
}

#[test]
fn circuits_use_only_template_gates_on_coupled_pairs() {
    for n in [3u32, 4] {
        let prep = prepare_ground_state(&LmgParams::new(1.0, 2.0, n).unwrap()).unwrap();
        let cm = &prep.template.coupling_map;
        for g in &prep.circuit.ops {
            match *g {
                Gate::X(_) | Gate::U(..) => {}
                Gate::Cnot { control, target } => assert!(cm
                    .iter()
                    .any(|e| (e[0] == control && e[1] == target) || (e[1] == control && e[0] == target))),
                other => panic!("unexpected gate {other:?}"),
            }
        }
        let budget = if n == 3 { MAX_CNOTS_3 } else { MAX_CNOTS_4 };
        assert!(prep.circuit.cnot_count() <= budget);
    }
}

#[test]
fn near_degenerate_limit_reaches_a_plane_vertex() {
    // eps -> 0+ at the largest coupling: one of the four degenerate corners.
    let p = LmgParams::new(1e-6, 25.0, 3).unwrap();
    let prep = prepare_ground_state(&p).unwrap();
    let st = run_circuit(&prep.circuit, None).unwrap();
    let est = order_parameters_from_paulis(&Expectations::exact(&st).unwrap(), &p, Source::SimIdeal).unwrap();
    assert!((est.point.jz + 0.5).abs() < 1e-6);
    assert!((est.point.jz2 - 1.25).abs() < 1e-6);
    assert!((est.point.jpm2 + 2.0 * 3f64.sqrt()).abs() < 1e-6);
}

#[test]
fn numeric_solver_handles_custom_template() {
    // Same gates as the odd 3-qubit template but with slots permuted.
    let text = r#"{"name": "custom", "n_qubits": 3, "coupling_map": [[0,1],[1,2]],
      "ops": [
        {"kind": "x", "qubits": [0]}, {"kind": "x", "qubits": [1]}, {"kind": "x", "qubits": [2]},
        {"kind": "u", "qubits": [0], "angle_slot": 2},
        {"kind": "u", "qubits": [1], "angle_slot": 0},
        {"kind": "cnot", "qubits": [0, 1]},
        {"kind": "u", "qubits": [1], "angle_slot": 1},
        {"kind": "cnot", "qubits": [1, 2]},
        {"kind": "cnot", "qubits": [0, 1]}
      ]}"#;
    let tpl = CircuitTemplate::from_json(text).unwrap();
    let target = exact_coefficients(&LmgParams::new(1.0, 3.0, 3).unwrap()).unwrap();
    let solved = solve_angles_for(&tpl, &target).unwrap();
    assert!(solved.fidelity >= 1.0 - 1e-8);
}

#[test]
fn unreachable_target_reports_infeasible() {
    // A single U on qubit 0 cannot entangle.
    let text = r#"{"name": "weak", "n_qubits": 3, "coupling_map": [],
      "ops": [{"kind": "x", "qubits": [2]}, {"kind": "u", "qubits": [0], "angle_slot": 0}]}"#;
    let tpl = CircuitTemplate::from_json(text).unwrap();
    let target = exact_coefficients(&LmgParams::new(1.0, 3.0, 3).unwrap()).unwrap();
    match solve_angles_for(&tpl, &target) {
        Err(lipkin_core::Error::Infeasible { best_fidelity }) => assert!(best_fidelity < 1.0 - 1e-8),
        other => panic!("expected infeasible, got {other:?}"),
    }
}
