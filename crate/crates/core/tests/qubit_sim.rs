use lipkin_core::pauli::{Pauli, PauliString};
use lipkin_core::sim::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type M2 = [[Complex64; 2]; 2];

fn conj_by(u: &M2, m: &M2) -> M2 {
    mat2_mul(&mat2_mul(&mat2_adjoint(u), m), u)
}

fn max_diff(a: &M2, b: &M2) -> f64 {
    let mut d = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

#[test]
fn decomposed_u_has_rotation_conjugation_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut thetas = vec![0.0, std::f64::consts::PI, 0.7321];
    thetas.extend((0..20).map(|_| rng.random_range(-10.0..10.0)));
    for t in thetas {
        let u = compose(&u_gate_decomposed(0, t)).unwrap();
        let r = rotation(t);
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let m = p.matrix();
            assert!(max_diff(&conj_by(&u, &m), &conj_by(&r, &m)) <= 1e-12, "theta={t} {p:?}");
        }
    }
}

#[test]
fn rotation_pi_is_quarter_turn_squared() {
    let r = rotation(std::f64::consts::PI);
    assert!((r[0][1].re + 1.0).abs() < 1e-15 && (r[1][0].re - 1.0).abs() < 1e-15);
    assert!(r[0][0].norm() < 1e-15);
}

#[test]
fn u_zero_is_identity() {
    let s = QuantumState::from_real_amplitudes(&[0.6, 0.8]).unwrap();
    let out = apply_gate(&s, &Gate::U(0, 0.0)).unwrap();
    assert!(out.fidelity_with(&[Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)]) > 1.0 - 1e-15);
}

#[test]
fn empty_circuit_is_all_zero() {
    let s = run_circuit(&Circuit::new(2), None).unwrap();
    assert_eq!(s.probabilities(), vec![1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn sampling_is_deterministic_and_exact_on_basis_states() {
    let mut c = Circuit::new(2);
    c.push(Gate::X(0)).push(Gate::X(1));
    let s = run_circuit(&c, None).unwrap();
    let counts = sample_counts(&s, 100, 5).unwrap();
    assert_eq!(counts.len(), 1);
    assert_eq!(counts["11"], 100);
    assert!(sample_counts(&s, 0, 5).is_err());

    let mut c = Circuit::new(1);
    c.push(Gate::H(0));
    let s = run_circuit(&c, None).unwrap();
    let shots = 1u64 << 13;
    let a = sample_counts(&s, shots, 42).unwrap();
    assert_eq!(a, sample_counts(&s, shots, 42).unwrap());
    let p0 = a.get("0").copied().unwrap_or(0) as f64 / shots as f64;
    let sigma = 0.5 / (shots as f64).sqrt();
    assert!((p0 - 0.5).abs() < 3.0 * sigma);
}

fn random_circuit(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for _ in 0..len {
        let q = rng.random_range(0..n);
        let g = match rng.random_range(0..7) {
            0 => Gate::X(q),
            1 => Gate::SqrtX(q),
            2 => Gate::Rz(q, rng.random_range(-3.0..3.0)),
            3 => Gate::U(q, rng.random_range(-3.0..3.0)),
            4 => Gate::H(q),
            5 => Gate::Sdg(q),
            _ => {
                let t = (q + rng.random_range(1..n)) % n;
                Gate::Cnot { control: q, target: t }
            }
        };
        c.push(g);
    }
    c
}

fn all_strings(n: usize) -> Vec<PauliString> {
    let mut out = Vec::new();
    for code in 1..4usize.pow(n as u32) {
        let mut ops = Vec::new();
        let mut k = code;
        for q in 0..n {
            match k % 4 {
                1 => ops.push((q, Pauli::X)),
                2 => ops.push((q, Pauli::Y)),
                3 => ops.push((q, Pauli::Z)),
                _ => {}
            }
            k /= 4;
        }
        out.push(PauliString::new(ops).unwrap());
    }
    out
}

#[test]
fn statevector_and_density_modes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 1..=3 {
        let c = random_circuit(&mut rng, n.max(2), 25);
        let sv = run_circuit_in(&c, None, Mode::Statevector).unwrap();
        let dm = run_circuit_in(&c, None, Mode::DensityMatrix).unwrap();
        dm.check_invariants(1e-12).unwrap();
        for s in all_strings(c.n_qubits) {
            assert!((sv.expectation(&s).unwrap() - dm.expectation(&s).unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn noisy_runs_keep_density_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let c = random_circuit(&mut rng, 4, 40);
    let s = run_circuit(&c, Some(&NoiseModel::per_gate(0.05))).unwrap();
    assert_eq!(s.mode(), Mode::DensityMatrix);
    s.check_invariants(1e-12).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gates_preserve_norm(seed in 0u64..10_000, n in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(&mut rng, n, 30);
        let s = run_circuit(&c, None).unwrap();
        prop_assert!(s.check_invariants(1e-12).is_ok());
    }

    #[test]
    fn damping_preserves_trace_and_raises_sigma_z(seed in 0u64..10_000, p in 0.0f64..1.0, q in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(&mut rng, 3, 20);
        let rho = run_circuit_in(&c, None, Mode::DensityMatrix).unwrap();
        let out = apply_amplitude_damping(&rho, q, p).unwrap();
        prop_assert!(out.check_invariants(1e-12).is_ok());
        for k in 0..3 {
            let z = PauliString::single(k, Pauli::Z);
            prop_assert!(out.expectation(&z).unwrap() >= rho.expectation(&z).unwrap() - 1e-12);
        }
    }
}

#[test]
fn zero_damping_is_identity() {
    let mut c = Circuit::new(2);
    c.push(Gate::H(0)).push(Gate::Cnot { control: 0, target: 1 });
    let rho = run_circuit_in(&c, None, Mode::DensityMatrix).unwrap();
    assert_eq!(apply_amplitude_damping(&rho, 1, 0.0).unwrap(), rho);
}
