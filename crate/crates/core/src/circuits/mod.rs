//! Ground-state preparation circuits for 3 and 4 qubits.
//!
//! Templates are JSON data. The built-in ones have closed-form angle solvers;
//! any other template goes through a seeded Levenberg-Marquardt search.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lmg::{ground_state, LmgParams, Parity};
use crate::sim::{run_circuit, Circuit, Gate, GateKind};

pub const MAX_CNOTS_3: usize = 4;
pub const MAX_CNOTS_4: usize = 8;

/// Fidelity floor that every prepared state must reach.
pub const FIDELITY_TOL: f64 = 1e-8;

const LMG3_ODD: &str = include_str!("templates/lmg3_odd.json");
const LMG3_EVEN: &str = include_str!("templates/lmg3_even.json");
const LMG4_TEE: &str = include_str!("templates/lmg4_tee.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateOp {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_slot: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitTemplate {
    #[serde(default)]
    pub name: String,
    pub n_qubits: usize,
    pub ops: Vec<TemplateOp>,
    pub coupling_map: Vec<[usize; 2]>,
}

impl CircuitTemplate {
    pub fn from_json(text: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(text).map_err(|e| Error::Template(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn lmg3_odd() -> Self {
        Self::from_json(LMG3_ODD).expect("built-in template")
    }

    pub fn lmg3_even() -> Self {
        Self::from_json(LMG3_EVEN).expect("built-in template")
    }

    pub fn lmg4_tee() -> Self {
        Self::from_json(LMG4_TEE).expect("built-in template")
    }

    pub fn validate(&self) -> Result<()> {
        let mut slots = Vec::new();
        for op in &self.ops {
            let want = match op.kind {
                GateKind::Cnot => 2,
                _ => 1,
            };
            if op.qubits.len() != want {
                return Err(Error::Template(format!("{:?} needs {want} qubit(s)", op.kind)));
            }
            if let Some(&q) = op.qubits.iter().find(|&&q| q >= self.n_qubits) {
                return Err(Error::Template(format!("qubit {q} outside register")));
            }
            let angled = matches!(op.kind, GateKind::U | GateKind::Rz);
            match (angled, op.angle_slot) {
                (true, Some(s)) => slots.push(s),
                (true, None) => return Err(Error::Template(format!("{:?} without angle_slot", op.kind))),
                (false, Some(_)) => return Err(Error::Template(format!("{:?} takes no angle", op.kind))),
                (false, None) => {}
            }
            if op.kind == GateKind::Cnot {
                let (a, b) = (op.qubits[0], op.qubits[1]);
                if a == b {
                    return Err(Error::Template("CNOT control equals target".into()));
                }
                let coupled = self
                    .coupling_map
                    .iter()
                    .any(|e| (e[0] == a && e[1] == b) || (e[0] == b && e[1] == a));
                if !coupled {
                    return Err(Error::Template(format!("CNOT ({a},{b}) not in coupling map")));
                }
            }
        }
        slots.sort_unstable();
        slots.dedup();
        if slots.iter().enumerate().any(|(i, &s)| i != s) {
            return Err(Error::Template("angle slots must be 0..k without gaps".into()));
        }
        Ok(())
    }

    pub fn n_angles(&self) -> usize {
        self.ops
            .iter()
            .filter_map(|o| o.angle_slot)
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn cnot_count(&self) -> usize {
        self.ops.iter().filter(|o| o.kind == GateKind::Cnot).count()
    }

    pub fn instantiate(&self, angles: &[f64]) -> Result<Circuit> {
        if angles.len() != self.n_angles() {
            return Err(Error::AngleCount {
                expected: self.n_angles(),
                got: angles.len(),
            });
        }
        let mut c = Circuit::new(self.n_qubits);
        for op in &self.ops {
            let q = op.qubits[0];
            let a = op.angle_slot.map(|s| angles[s]).unwrap_or(0.0);
            c.push(match op.kind {
                GateKind::X => Gate::X(q),
                GateKind::SqrtX => Gate::SqrtX(q),
                GateKind::Rz => Gate::Rz(q, a),
                GateKind::U => Gate::U(q, a),
                GateKind::H => Gate::H(q),
                GateKind::Sdg => Gate::Sdg(q),
                GateKind::Cnot => Gate::Cnot {
                    control: q,
                    target: op.qubits[1],
                },
            });
        }
        Ok(c)
    }
}

/// Default-template circuit: odd-weight for 3 qubits, T-shaped for 4.
pub fn build_circuit(n_qubits: usize, angles: &[f64]) -> Result<Circuit> {
    match n_qubits {
        3 => CircuitTemplate::lmg3_odd().instantiate(angles),
        4 => CircuitTemplate::lmg4_tee().instantiate(angles),
        n => Err(Error::Domain(format!("no built-in template for {n} qubits"))),
    }
}

/// Exact ground state written over the full 2^N qubit basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzTarget {
    pub n_qubits: usize,
    pub coefficients: Vec<f64>,
    pub params: LmgParams,
    /// Parity of the number of 1s (spin-down qubits) on the support.
    pub weight_parity: Parity,
}

impl AnsatzTarget {
    pub fn new(coefficients: Vec<f64>, params: LmgParams) -> Result<Self> {
        let dim = coefficients.len();
        let n_qubits = match dim {
            8 => 3,
            16 => 4,
            _ => return Err(Error::Domain(format!("ansatz needs 8 or 16 coefficients, got {dim}"))),
        };
        let norm: f64 = coefficients.iter().map(|x| x * x).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Contract(format!("target norm^2 {norm}")));
        }
        let max = coefficients.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let weights: Vec<u32> = (0..dim)
            .filter(|&i| coefficients[i].abs() > 1e-14 * max)
            .map(|i| (i as u32).count_ones() % 2)
            .collect();
        let odd = weights.iter().all(|&w| w == 1);
        let even = weights.iter().all(|&w| w == 0);
        let weight_parity = match (n_qubits, odd, even) {
            (4, _, true) => Parity::Even,
            (3, true, _) => Parity::Odd,
            (3, _, true) => Parity::Even,
            _ => {
                return Err(Error::Domain(
                    "target support is outside the ansatz subspace".into(),
                ))
            }
        };
        Ok(Self {
            n_qubits,
            coefficients,
            params,
            weight_parity,
        })
    }

    pub fn template(&self) -> CircuitTemplate {
        match (self.n_qubits, self.weight_parity) {
            (3, Parity::Odd) => CircuitTemplate::lmg3_odd(),
            (3, Parity::Even) => CircuitTemplate::lmg3_even(),
            _ => CircuitTemplate::lmg4_tee(),
        }
    }

    pub fn complex(&self) -> Vec<Complex64> {
        self.coefficients.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |c, i| c * (n - i) as f64 / (i + 1) as f64)
}

/// Spreads each |N/2, m> amplitude uniformly over the C(N, N/2-m) bitstrings
/// with N/2-m ones.
pub fn exact_coefficients(params: &LmgParams) -> Result<AnsatzTarget> {
    let n = params.n_particles as usize;
    if n != 3 && n != 4 {
        return Err(Error::Domain(format!("state preparation supports N=3 or 4, got {n}")));
    }
    let gs = ground_state(params)?;
    if gs.sector.two_j as usize != n {
        return Err(Error::Domain("ground state outside the symmetric j=N/2 sector".into()));
    }
    let mut coeffs = vec![0.0; 1 << n];
    for (&tm, &a) in gs.two_ms.iter().zip(&gs.amplitudes) {
        let k = ((n as i64 - tm) / 2) as usize;
        let share = a / binomial(n, k).sqrt();
        for (i, c) in coeffs.iter_mut().enumerate() {
            if i.count_ones() as usize == k {
                *c = share;
            }
        }
    }
    AnsatzTarget::new(coeffs, *params)
}

fn solve_lmg3_odd(a: &[f64]) -> Vec<f64> {
    let phi = |x: usize, z: usize| a[(x << 2) | ((z ^ x) << 1) | (1 ^ z)];
    let n1 = phi(1, 0).hypot(phi(1, 1));
    let n0 = phi(0, 0).hypot(phi(0, 1));
    let th0 = 2.0 * (-n0).atan2(n1);
    let psi1 = if n1 > 1e-15 {
        2.0 * phi(1, 1).atan2(phi(1, 0))
    } else {
        0.0
    };
    let psi0 = if n0 > 1e-15 {
        2.0 * (-phi(0, 0)).atan2(phi(0, 1))
    } else {
        psi1
    };
    vec![th0, (psi0 - psi1) / 2.0, (psi0 + psi1) / 2.0]
}

fn solve_lmg3_even(a: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; 8];
    for (i, &x) in a.iter().enumerate() {
        b[i ^ 1] = x;
    }
    solve_lmg3_odd(&b)
}

fn solve_lmg4_tee(a: &[f64]) -> Vec<f64> {
    let phi = |l1: usize, e: usize, l2: usize| a[(l1 << 3) | ((e ^ l1 ^ l2) << 2) | (l2 << 1) | e];
    let norm = |x: usize| {
        (0..2)
            .flat_map(|e| (0..2).map(move |l| (e, l)))
            .map(|(e, l)| phi(x, e, l).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let n = [norm(0), norm(1)];
    let th0 = 2.0 * (-n[0]).atan2(n[1]);
    let b = |x: usize, l: usize| {
        if n[x] > 1e-15 {
            phi(x, 0, l).hypot(phi(x, 1, l)) / n[x]
        } else if l == 0 {
            1.0
        } else {
            0.0
        }
    };
    let psi1 = 2.0 * (-b(1, 0)).atan2(b(1, 1));
    let psi0 = 2.0 * b(0, 1).atan2(b(0, 0));
    let th2 = (psi1 + psi0) / 2.0;
    let th1 = (psi1 - psi0) / 2.0;
    let ang = |x: usize, l: usize| {
        let den = n[x] * b(x, l);
        let (c0, c1) = if den > 1e-15 {
            (phi(x, 0, l) / den, phi(x, 1, l) / den)
        } else {
            (1.0, 0.0)
        };
        if (x, l) == (0, 0) || (x, l) == (1, 1) {
            2.0 * (-c0).atan2(c1)
        } else {
            2.0 * c1.atan2(c0)
        }
    };
    let (aa, bb, cc, dd) = (ang(0, 0), ang(1, 0), ang(0, 1), ang(1, 1));
    vec![
        th0,
        th1,
        th2,
        (aa + bb - cc - dd) / 4.0,
        (aa - bb - cc + dd) / 4.0,
        (aa - bb + cc - dd) / 4.0,
        (aa + bb + cc + dd) / 4.0,
    ]
}

/// Noiseless fidelity of a template with a target state.
pub fn template_fidelity(template: &CircuitTemplate, angles: &[f64], target: &[Complex64]) -> Result<f64> {
    let state = run_circuit(&template.instantiate(angles)?, None)?;
    Ok(state.fidelity_with(target))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvedAngles {
    pub angles: Vec<f64>,
    pub fidelity: f64,
}

/// Closed form for the built-in templates, numeric search as fallback.
pub fn solve_angles(target: &AnsatzTarget) -> Result<Vec<f64>> {
    Ok(solve_angles_for(&target.template(), target)?.angles)
}

pub fn solve_angles_for(template: &CircuitTemplate, target: &AnsatzTarget) -> Result<SolvedAngles> {
    if template.n_qubits != target.n_qubits {
        return Err(Error::Template("template and target sizes differ".into()));
    }
    let amps = target.complex();
    let closed = match template.name.as_str() {
        "lmg3_odd" if target.weight_parity == Parity::Odd => Some(solve_lmg3_odd(&target.coefficients)),
        "lmg3_even" if target.weight_parity == Parity::Even => Some(solve_lmg3_even(&target.coefficients)),
        "lmg4_tee" => Some(solve_lmg4_tee(&target.coefficients)),
        _ => None,
    };
    let mut best = SolvedAngles {
        angles: vec![0.0; template.n_angles()],
        fidelity: 0.0,
    };
    if let Some(angles) = closed {
        let fidelity = template_fidelity(template, &angles, &amps)?;
        best = SolvedAngles { angles, fidelity };
    }
    if 1.0 - best.fidelity > FIDELITY_TOL {
        let numeric = solve_angles_numeric(template, &amps, 32, 0x4c4d_4721)?;
        if numeric.fidelity > best.fidelity {
            best = numeric;
        }
    }
    if 1.0 - best.fidelity > FIDELITY_TOL {
        return Err(Error::Infeasible {
            best_fidelity: best.fidelity,
        });
    }
    Ok(best)
}

fn residual(template: &CircuitTemplate, angles: &[f64], target: &[Complex64], phase: Complex64) -> Result<DVector<f64>> {
    let state = run_circuit(&template.instantiate(angles)?, None)?;
    let amps = match &state.data {
        crate::sim::StateData::Vector(v) => v.clone(),
        crate::sim::StateData::Density(_) => unreachable!("noiseless runs are statevectors"),
    };
    let dim = target.len();
    let mut r = DVector::zeros(2 * dim);
    for i in 0..dim {
        let d = amps[i] - phase * target[i];
        r[2 * i] = d.re;
        r[2 * i + 1] = d.im;
    }
    Ok(r)
}

fn overlap_phase(template: &CircuitTemplate, angles: &[f64], target: &[Complex64]) -> Result<(Complex64, f64)> {
    let state = run_circuit(&template.instantiate(angles)?, None)?;
    let amps = match &state.data {
        crate::sim::StateData::Vector(v) => v.clone(),
        crate::sim::StateData::Density(_) => unreachable!("noiseless runs are statevectors"),
    };
    let ov: Complex64 = target.iter().zip(amps.iter()).map(|(t, a)| t.conj() * a).sum();
    let phase = if ov.norm() > 1e-300 { ov / ov.norm() } else { Complex64::new(1.0, 0.0) };
    Ok((phase, ov.norm_sqr()))
}

/// Levenberg-Marquardt on |psi(theta) - e^{i phi} target| from seeded random starts.
pub fn solve_angles_numeric(
    template: &CircuitTemplate,
    target: &[Complex64],
    restarts: usize,
    seed: u64,
) -> Result<SolvedAngles> {
    let k = template.n_angles();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = SolvedAngles {
        angles: vec![0.0; k],
        fidelity: 0.0,
    };
    for restart in 0..restarts.max(1) {
        let mut theta: Vec<f64> = if restart == 0 {
            vec![0.0; k]
        } else {
            (0..k).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
        };
        let mut mu = 1e-3;
        let (mut phase, mut fid) = overlap_phase(template, &theta, target)?;
        for _ in 0..300 {
            if 1.0 - fid < 1e-15 {
                break;
            }
            let r0 = residual(template, &theta, target, phase)?;
            let h = 1e-7;
            let mut jac = DMatrix::zeros(r0.len(), k);
            for j in 0..k {
                let mut tp = theta.clone();
                tp[j] += h;
                let mut tm = theta.clone();
                tm[j] -= h;
                let d = (residual(template, &tp, target, phase)? - residual(template, &tm, target, phase)?) / (2.0 * h);
                jac.set_column(j, &d);
            }
            let jt = jac.transpose();
            let g = &jt * &r0;
            let a = &jt * &jac;
            let mut improved = false;
            for _ in 0..12 {
                let mut damped = a.clone();
                for i in 0..k {
                    damped[(i, i)] += mu * (1.0 + a[(i, i)]);
                }
                let step = match damped.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => break,
                };
                let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
                let (tphase, tfid) = overlap_phase(template, &trial, target)?;
                if tfid > fid {
                    theta = trial;
                    phase = tphase;
                    fid = tfid;
                    mu = (mu * 0.3).max(1e-12);
                    improved = true;
                    break;
                }
                mu *= 10.0;
            }
            if !improved {
                break;
            }
        }
        if fid > best.fidelity {
            best = SolvedAngles {
                angles: theta,
                fidelity: fid,
            };
        }
        if 1.0 - best.fidelity < 1e-14 {
            break;
        }
    }
    Ok(best)
}

/// Everything needed to prepare one exact ground state on qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedState {
    pub target: AnsatzTarget,
    pub template: CircuitTemplate,
    pub angles: Vec<f64>,
    pub circuit: Circuit,
    pub fidelity: f64,
}

pub fn prepare_ground_state(params: &LmgParams) -> Result<PreparedState> {
    let target = exact_coefficients(params)?;
    let template = target.template();
    let solved = solve_angles_for(&template, &target)?;
    let circuit = template.instantiate(&solved.angles)?;
    Ok(PreparedState {
        target,
        template,
        angles: solved.angles,
        circuit,
        fidelity: solved.fidelity,
    })
}
