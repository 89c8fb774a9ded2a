//! Statevector and density-matrix simulation with amplitude damping and
//! seeded shot sampling.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

pub const MAX_DENSITY_QUBITS: usize = 6;
pub const MAX_STATEVECTOR_QUBITS: usize = 20;

type C = Complex64;
type Mat2 = [[C; 2]; 2];

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Statevector,
    DensityMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateData {
    Vector(DVector<C>),
    Density(DMatrix<C>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub n_qubits: usize,
    pub data: StateData,
}

impl QuantumState {
    /// |0...0> in the requested representation.
    pub fn zero(n_qubits: usize, mode: Mode) -> Result<Self> {
        check_size(n_qubits, mode)?;
        let dim = 1usize << n_qubits;
        let data = match mode {
            Mode::Statevector => {
                let mut v = DVector::zeros(dim);
                v[0] = c(1.0, 0.0);
                StateData::Vector(v)
            }
            Mode::DensityMatrix => {
                let mut m = DMatrix::zeros(dim, dim);
                m[(0, 0)] = c(1.0, 0.0);
                StateData::Density(m)
            }
        };
        Ok(Self { n_qubits, data })
    }

    pub fn from_amplitudes(amps: Vec<C>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Domain(format!("amplitude length {dim} is not 2^n")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_size(n_qubits, Mode::Statevector)?;
        Ok(Self {
            n_qubits,
            data: StateData::Vector(DVector::from_vec(amps)),
        })
    }

    pub fn from_real_amplitudes(amps: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amps.iter().map(|&a| c(a, 0.0)).collect())
    }

    pub fn mode(&self) -> Mode {
        match self.data {
            StateData::Vector(_) => Mode::Statevector,
            StateData::Density(_) => Mode::DensityMatrix,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn to_density(&self) -> Result<Self> {
        check_size(self.n_qubits, Mode::DensityMatrix)?;
        let rho = match &self.data {
            StateData::Vector(v) => v * v.adjoint(),
            StateData::Density(m) => m.clone(),
        };
        Ok(Self {
            n_qubits: self.n_qubits,
            data: StateData::Density(rho),
        })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        match &self.data {
            StateData::Vector(v) => v.iter().map(|a| a.norm_sqr()).collect(),
            StateData::Density(m) => (0..self.dim()).map(|i| m[(i, i)].re.max(0.0)).collect(),
        }
    }

    pub fn expectation(&self, s: &PauliString) -> Result<f64> {
        s.validate(self.n_qubits)?;
        Ok(match &self.data {
            StateData::Vector(v) => s.expectation_statevector(v.as_slice(), self.n_qubits),
            StateData::Density(m) => s.expectation_density(m, self.n_qubits),
        })
    }

    /// |<target|psi>|^2, or <target|rho|target> for mixed states.
    pub fn fidelity_with(&self, target: &[C]) -> f64 {
        match &self.data {
            StateData::Vector(v) => v
                .iter()
                .zip(target)
                .map(|(a, t)| t.conj() * a)
                .sum::<C>()
                .norm_sqr(),
            StateData::Density(m) => {
                let t = DVector::from_column_slice(target);
                (t.adjoint() * m * &t)[(0, 0)].re
            }
        }
    }

    /// Norm (statevector) or Hermiticity, unit trace and PSD floor (density).
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        match &self.data {
            StateData::Vector(v) => {
                let n = v.norm_squared();
                if (n - 1.0).abs() > tol {
                    return Err(Error::Contract(format!("statevector norm^2 {n}")));
                }
            }
            StateData::Density(m) => {
                let tr = m.trace();
                if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
                    return Err(Error::Contract(format!("density trace {tr}")));
                }
                let herm = (m - m.adjoint()).iter().fold(0.0_f64, |a, x| a.max(x.norm()));
                if herm > tol {
                    return Err(Error::Contract(format!("density non-Hermitian by {herm}")));
                }
                let floor = m
                    .clone()
                    .symmetric_eigenvalues()
                    .iter()
                    .fold(f64::INFINITY, |a, &x| a.min(x));
                if floor < -1e-10 {
                    return Err(Error::Contract(format!("density eigenvalue {floor}")));
                }
            }
        }
        Ok(())
    }
}

fn check_size(n_qubits: usize, mode: Mode) -> Result<()> {
    let cap = match mode {
        Mode::Statevector => MAX_STATEVECTOR_QUBITS,
        Mode::DensityMatrix => MAX_DENSITY_QUBITS,
    };
    if n_qubits == 0 || n_qubits > cap {
        return Err(Error::UnsupportedMode(format!(
            "{n_qubits} qubits in {mode:?} mode (limit {cap})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    X,
    SqrtX,
    Rz,
    U,
    H,
    Sdg,
    Cnot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    SqrtX(usize),
    Rz(usize, f64),
    /// Real rotation R(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]].
    U(usize, f64),
    H(usize),
    Sdg(usize),
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::X(_) => GateKind::X,
            Gate::SqrtX(_) => GateKind::SqrtX,
            Gate::Rz(..) => GateKind::Rz,
            Gate::U(..) => GateKind::U,
            Gate::H(_) => GateKind::H,
            Gate::Sdg(_) => GateKind::Sdg,
            Gate::Cnot { .. } => GateKind::Cnot,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q) | Gate::SqrtX(q) | Gate::Rz(q, _) | Gate::U(q, _) | Gate::H(q) | Gate::Sdg(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    /// 2x2 unitary of a single-qubit gate; None for CNOT.
    pub fn matrix(&self) -> Option<Mat2> {
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        Some(match *self {
            Gate::X(_) => [[o, l], [l, o]],
            Gate::SqrtX(_) => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
            Gate::Rz(_, t) => [[C::from_polar(1.0, -t / 2.0), o], [o, C::from_polar(1.0, t / 2.0)]],
            Gate::U(_, t) => rotation(t),
            Gate::H(_) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]]
            }
            Gate::Sdg(_) => [[l, o], [o, c(0.0, -1.0)]],
            Gate::Cnot { .. } => return None,
        })
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
        }
        if let Gate::Cnot { control, target } = *self {
            if control == target {
                return Err(Error::Domain(format!("CNOT control equals target ({control})")));
            }
        }
        Ok(())
    }
}

pub fn rotation(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
}

/// Native-gate form of U(theta), in application order. The product equals
/// R(theta) up to a global phase, so both induce the same conjugation map.
pub fn u_gate_decomposed(qubit: usize, theta: f64) -> Vec<Gate> {
    vec![
        Gate::SqrtX(qubit),
        Gate::Rz(qubit, theta + PI),
        Gate::SqrtX(qubit),
        Gate::Rz(qubit, 3.0 * PI),
    ]
}

/// Product of single-qubit gates applied in order (later gates multiply on the left).
pub fn compose(gates: &[Gate]) -> Option<Mat2> {
    let mut acc = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    for g in gates {
        acc = mat2_mul(&g.matrix()?, &acc);
    }
    Some(acc)
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn bit(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - 1 - q)
}

fn apply_1q_vec(v: &mut DVector<C>, mask: usize, u: &Mat2) {
    for i in 0..v.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (a, b) = (v[i], v[j]);
            v[i] = u[0][0] * a + u[0][1] * b;
            v[j] = u[1][0] * a + u[1][1] * b;
        }
    }
}

fn apply_1q_density(m: &mut DMatrix<C>, mask: usize, u: &Mat2) {
    let dim = m.nrows();
    for col in 0..dim {
        for i in 0..dim {
            if i & mask == 0 {
                let j = i | mask;
                let (a, b) = (m[(i, col)], m[(j, col)]);
                m[(i, col)] = u[0][0] * a + u[0][1] * b;
                m[(j, col)] = u[1][0] * a + u[1][1] * b;
            }
        }
    }
    for row in 0..dim {
        for i in 0..dim {
            if i & mask == 0 {
                let j = i | mask;
                let (a, b) = (m[(row, i)], m[(row, j)]);
                m[(row, i)] = u[0][0].conj() * a + u[0][1].conj() * b;
                m[(row, j)] = u[1][0].conj() * a + u[1][1].conj() * b;
            }
        }
    }
}

pub fn apply_gate(state: &QuantumState, gate: &Gate) -> Result<QuantumState> {
    let mut out = state.clone();
    apply_gate_in_place(&mut out, gate)?;
    Ok(out)
}

pub fn apply_gate_in_place(state: &mut QuantumState, gate: &Gate) -> Result<()> {
    let n = state.n_qubits;
    gate.validate(n)?;
    match *gate {
        Gate::Cnot { control, target } => {
            let cm = bit(n, control);
            let tm = bit(n, target);
            let perm = |i: usize| if i & cm != 0 { i ^ tm } else { i };
            match &mut state.data {
                StateData::Vector(v) => {
                    for i in 0..v.len() {
                        let j = perm(i);
                        if j > i {
                            v.swap_rows(i, j);
                        }
                    }
                }
                StateData::Density(m) => {
                    let dim = m.nrows();
                    let old = m.clone();
                    for r in 0..dim {
                        for col in 0..dim {
                            m[(perm(r), perm(col))] = old[(r, col)];
                        }
                    }
                }
            }
        }
        _ => {
            let u = gate.matrix().expect("single-qubit gate");
            let mask = bit(n, gate.qubits()[0]);
            match &mut state.data {
                StateData::Vector(v) => apply_1q_vec(v, mask, &u),
                StateData::Density(m) => apply_1q_density(m, mask, &u),
            }
        }
    }
    Ok(())
}

/// Kraus channel K0 = diag(1, sqrt(1-p)), K1 = sqrt(p)|0><1| on one qubit.
pub fn apply_amplitude_damping(state: &QuantumState, qubit: usize, p: f64) -> Result<QuantumState> {
    let mut out = state.clone();
    damp_in_place(&mut out, qubit, p)?;
    Ok(out)
}

fn damp_in_place(state: &mut QuantumState, qubit: usize, p: f64) -> Result<()> {
    let n = state.n_qubits;
    if qubit >= n {
        return Err(Error::QubitOutOfRange { index: qubit, n_qubits: n });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("damping probability {p} outside [0, 1]")));
    }
    let m = match &mut state.data {
        StateData::Density(m) => m,
        StateData::Vector(_) => {
            return Err(Error::UnsupportedMode(
                "amplitude damping requires density-matrix mode".into(),
            ))
        }
    };
    let mask = bit(n, qubit);
    let s = (1.0 - p).sqrt();
    let dim = m.nrows();
    for r in 0..dim {
        if r & mask != 0 {
            continue;
        }
        for col in 0..dim {
            if col & mask != 0 {
                continue;
            }
            let (r1, c1) = (r | mask, col | mask);
            let p11 = m[(r1, c1)];
            m[(r, col)] += p11 * p;
            m[(r1, c1)] = p11 * (1.0 - p);
            m[(r, c1)] *= s;
            m[(r1, col)] *= s;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(default)]
    pub t1_per_qubit: Vec<f64>,
    #[serde(default)]
    pub gate_durations: BTreeMap<GateKind, f64>,
    /// Replaces the T1-derived probability for every gate when set.
    #[serde(default)]
    pub extra_damping_per_gate: Option<f64>,
}

impl NoiseModel {
    pub fn per_gate(p: f64) -> Self {
        Self {
            extra_damping_per_gate: Some(p),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.extra_damping_per_gate {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("per-gate damping {p} outside [0, 1]")));
            }
            return Ok(());
        }
        if self.t1_per_qubit.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::Domain("T1 values must be positive and finite".into()));
        }
        if self.gate_durations.values().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::Domain("gate durations must be non-negative".into()));
        }
        Ok(())
    }

    /// p = 1 - exp(-duration/T1); gates without a duration, or qubits
    /// without a T1, are noiseless.
    pub fn damping_probability(&self, kind: GateKind, qubit: usize) -> f64 {
        if let Some(p) = self.extra_damping_per_gate {
            return p;
        }
        match (self.gate_durations.get(&kind), self.t1_per_qubit.get(qubit)) {
            (Some(&d), Some(&t1)) => 1.0 - (-d / t1).exp(),
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<Gate>,
    pub measured_qubits: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
            measured_qubits: (0..n_qubits).collect(),
        }
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.ops.push(g);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.ops {
            g.validate(self.n_qubits)?;
        }
        if let Some(&index) = self.measured_qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::QubitOutOfRange {
                index,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    pub fn cnot_count(&self) -> usize {
        self.ops.iter().filter(|g| g.kind() == GateKind::Cnot).count()
    }
}

/// Statevector without noise, density matrix with noise.
pub fn run_circuit(circuit: &Circuit, noise: Option<&NoiseModel>) -> Result<QuantumState> {
    let mode = if noise.is_some() {
        Mode::DensityMatrix
    } else {
        Mode::Statevector
    };
    run_circuit_in(circuit, noise, mode)
}

pub fn run_circuit_in(circuit: &Circuit, noise: Option<&NoiseModel>, mode: Mode) -> Result<QuantumState> {
    circuit.validate()?;
    if let Some(nm) = noise {
        nm.validate()?;
    }
    let mut state = QuantumState::zero(circuit.n_qubits, mode)?;
    for g in &circuit.ops {
        apply_gate_in_place(&mut state, g)?;
        if let Some(nm) = noise {
            for q in g.qubits() {
                let p = nm.damping_probability(g.kind(), q);
                if p > 0.0 {
                    damp_in_place(&mut state, q, p)?;
                }
            }
        }
    }
    Ok(state)
}

/// Bitstring histogram, qubit 0 leftmost.
pub type Counts = BTreeMap<String, u64>;

pub fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if index & bit(n_qubits, q) != 0 { '1' } else { '0' })
        .collect()
}

/// Multinomial computational-basis sample, reproducible for a fixed seed.
pub fn sample_counts(state: &QuantumState, shots: u64, seed: u64) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::Domain("shots must be at least 1".into()));
    }
    let probs = state.probabilities();
    let total: f64 = probs.iter().sum();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p / total;
        cdf.push(acc);
    }
    let last_nonzero = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let k = cdf.partition_point(|&x| x <= u).min(last_nonzero);
        hist[k] += 1;
    }
    Ok(hist
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(i, &n)| (bitstring(i, state.n_qubits), n))
        .collect())
}
