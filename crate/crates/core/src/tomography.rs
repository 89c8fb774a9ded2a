//! Pauli tomography of the LMG order parameters.
//!
//! Three basis settings (all-Z, all-X, all-Y) cover every required string.
//! Composite observables are evaluated shot by shot inside a setting, which
//! carries the within-group covariance; separate settings add in quadrature.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lmg::{LmgParams, RdmPoint, Source};
use crate::pauli::{lmg_required_strings, Pauli, PauliString};
use crate::seeds::SeedSplitter;
use crate::sim::{run_circuit, sample_counts, Circuit, Counts, Gate, NoiseModel, QuantumState};

/// Gates that rotate `axis` onto Z before a computational-basis readout.
pub fn basis_rotation_gates(axis: Pauli, qubit: usize) -> Vec<Gate> {
    match axis {
        Pauli::Z => vec![],
        Pauli::X => vec![Gate::H(qubit)],
        Pauli::Y => vec![Gate::Sdg(qubit), Gate::H(qubit)],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementGroup {
    /// Measurement axis per qubit.
    pub setting: Vec<Pauli>,
    pub strings: Vec<PauliString>,
}

impl MeasurementGroup {
    pub fn label(&self) -> String {
        self.setting.iter().map(Pauli::symbol).collect()
    }

    pub fn covers(&self, s: &PauliString) -> bool {
        s.ops.iter().all(|(&q, &p)| self.setting.get(q) == Some(&p))
    }

    /// Base circuit followed by the readout rotations of this setting.
    pub fn measurement_circuit(&self, base: &Circuit) -> Circuit {
        let mut c = base.clone();
        for (q, &axis) in self.setting.iter().enumerate() {
            c.ops.extend(basis_rotation_gates(axis, q));
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyPlan {
    pub n_qubits: usize,
    pub groups: Vec<MeasurementGroup>,
    pub shots_per_group: u64,
    pub repetitions: u32,
}

impl TomographyPlan {
    pub fn lmg(n_qubits: usize, shots_per_group: u64, repetitions: u32) -> Self {
        let groups = [Pauli::Z, Pauli::X, Pauli::Y]
            .into_iter()
            .map(|axis| MeasurementGroup {
                setting: vec![axis; n_qubits],
                strings: lmg_required_strings(n_qubits)
                    .into_iter()
                    .filter(|s| s.ops.values().all(|&p| p == axis))
                    .collect(),
            })
            .collect();
        Self {
            n_qubits,
            groups,
            shots_per_group,
            repetitions,
        }
    }

    /// Paper budgets: 5 x 2^14 shots for 3 qubits, 5 x 2^13 for 4.
    pub fn default_shots(n_qubits: usize) -> (u64, u32) {
        match n_qubits {
            3 => (1 << 14, 5),
            _ => (1 << 13, 5),
        }
    }

    pub fn group_for(&self, s: &PauliString) -> Result<&MeasurementGroup> {
        self.groups
            .iter()
            .find(|g| g.covers(s))
            .ok_or_else(|| Error::Uncovered(s.label(self.n_qubits)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots_per_group == 0 || self.repetitions == 0 {
            return Err(Error::Domain("shots and repetitions must be positive".into()));
        }
        for s in lmg_required_strings(self.n_qubits) {
            self.group_for(&s)?;
        }
        for g in &self.groups {
            if g.setting.len() != self.n_qubits {
                return Err(Error::Domain("setting width differs from register".into()));
            }
            if let Some(s) = g.strings.iter().find(|s| !g.covers(s)) {
                return Err(Error::Domain(format!("{s} not diagonal in {}", g.label())));
            }
        }
        Ok(())
    }
}

/// One persisted histogram: a JSON line of the raw-counts file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub basis_setting: String,
    pub shots: u64,
    pub seed: u64,
    pub counts: Counts,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedValue {
    pub mean: f64,
    pub std_error: f64,
    pub shots: u64,
}

impl EstimatedValue {
    pub fn exact(mean: f64) -> Self {
        Self {
            mean,
            std_error: 0.0,
            shots: 0,
        }
    }
}

/// Simulates every (group, repetition) histogram of a plan.
pub fn measure(
    base: &Circuit,
    noise: Option<&NoiseModel>,
    plan: &TomographyPlan,
    seeds: &SeedSplitter,
    point: u64,
) -> Result<Vec<CountsRecord>> {
    plan.validate()?;
    let mut out = Vec::new();
    for (gi, g) in plan.groups.iter().enumerate() {
        let state = run_circuit(&g.measurement_circuit(base), noise)?;
        for rep in 0..plan.repetitions {
            let seed = seeds.seed(point, rep as u64, gi as u64);
            out.push(CountsRecord {
                basis_setting: g.label(),
                shots: plan.shots_per_group,
                seed,
                counts: sample_counts(&state, plan.shots_per_group, seed)?,
            });
        }
    }
    Ok(out)
}

fn bits_of(s: &str) -> Vec<u8> {
    s.bytes().map(|b| b - b'0').collect()
}

/// Pooled mean and (n-1) standard error of a per-shot observable.
fn pooled<F: Fn(&[u8]) -> f64>(records: &[&CountsRecord], f: F) -> Result<EstimatedValue> {
    let mut n = 0u64;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for r in records {
        for (bits, &k) in &r.counts {
            let v = f(&bits_of(bits));
            n += k;
            sum += v * k as f64;
            sum2 += v * v * k as f64;
        }
    }
    if n == 0 {
        return Err(Error::Domain("no shots recorded".into()));
    }
    let mean = sum / n as f64;
    let var = if n > 1 {
        ((sum2 - n as f64 * mean * mean) / (n - 1) as f64).max(0.0)
    } else {
        0.0
    };
    Ok(EstimatedValue {
        mean,
        std_error: (var / n as f64).sqrt(),
        shots: n,
    })
}

fn records_for<'a>(records: &'a [CountsRecord], label: &str) -> Result<Vec<&'a CountsRecord>> {
    let v: Vec<&CountsRecord> = records.iter().filter(|r| r.basis_setting == label).collect();
    if v.is_empty() {
        return Err(Error::MissingExpectation(format!("counts for setting {label}")));
    }
    Ok(v)
}

pub fn estimate_pauli(records: &[CountsRecord], plan: &TomographyPlan, s: &PauliString) -> Result<EstimatedValue> {
    let g = plan.group_for(s)?;
    let recs = records_for(records, &g.label())?;
    pooled(&recs, |bits| s.parity_of_bits(bits))
}

/// Expectation values keyed by Pauli string.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Expectations {
    pub n_qubits: usize,
    pub values: BTreeMap<PauliString, EstimatedValue>,
}

impl Expectations {
    /// Operator averages on a state (the infinite-shot limit).
    pub fn exact(state: &QuantumState) -> Result<Self> {
        let n = state.n_qubits;
        let mut values = BTreeMap::new();
        for s in lmg_required_strings(n) {
            values.insert(s.clone(), EstimatedValue::exact(state.expectation(&s)?));
        }
        Ok(Self { n_qubits: n, values })
    }

    pub fn from_counts(records: &[CountsRecord], plan: &TomographyPlan) -> Result<Self> {
        let mut values = BTreeMap::new();
        for s in lmg_required_strings(plan.n_qubits) {
            let v = estimate_pauli(records, plan, &s)?;
            values.insert(s, v);
        }
        Ok(Self {
            n_qubits: plan.n_qubits,
            values,
        })
    }

    pub fn get(&self, s: &PauliString) -> Result<EstimatedValue> {
        self.values
            .get(s)
            .copied()
            .ok_or_else(|| Error::MissingExpectation(s.label(self.n_qubits)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdmElements {
    /// 1D_p^p = <Z_p>.
    pub one_rdm_diag: Vec<EstimatedValue>,
    /// 2D_pq^pq = <X_p X_q> - <Y_p Y_q> for p < q.
    pub two_rdm: BTreeMap<(usize, usize), EstimatedValue>,
}

pub fn rdm_elements(exp: &Expectations) -> Result<RdmElements> {
    let n = exp.n_qubits;
    let one_rdm_diag = (0..n)
        .map(|p| exp.get(&PauliString::single(p, Pauli::Z)))
        .collect::<Result<Vec<_>>>()?;
    let mut two_rdm = BTreeMap::new();
    for p in 0..n {
        for q in p + 1..n {
            let xx = exp.get(&PauliString::pair(p, q, Pauli::X))?;
            let yy = exp.get(&PauliString::pair(p, q, Pauli::Y))?;
            two_rdm.insert(
                (p, q),
                EstimatedValue {
                    mean: xx.mean - yy.mean,
                    std_error: xx.std_error.hypot(yy.std_error),
                    shots: xx.shots.min(yy.shots),
                },
            );
        }
    }
    Ok(RdmElements { one_rdm_diag, two_rdm })
}

/// <H> = eps/2 sum_p 1D_p + lambda/2 sum_{p<q} 2D_pq under |0> = spin up.
pub fn energy_from_rdm(el: &RdmElements, params: &LmgParams) -> f64 {
    let one: f64 = el.one_rdm_diag.iter().map(|v| v.mean).sum();
    let two: f64 = el.two_rdm.values().map(|v| v.mean).sum();
    0.5 * params.epsilon * one + 0.5 * params.lambda * two
}

/// Order parameters with one standard error per component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedRdm {
    pub point: RdmPoint,
    pub jz_err: f64,
    pub jz2_err: f64,
    pub jpm2_err: f64,
}

impl EstimatedRdm {
    pub fn energy_err(&self) -> f64 {
        let p = &self.point.params;
        (p.epsilon * self.jz_err).hypot(0.5 * p.lambda * self.jpm2_err)
    }

    pub fn max_err(&self) -> f64 {
        self.jz_err.max(self.jz2_err).max(self.jpm2_err)
    }
}

/// Aggregates string expectations; errors of distinct strings add in quadrature.
pub fn order_parameters_from_paulis(
    exp: &Expectations,
    params: &LmgParams,
    source: Source,
) -> Result<EstimatedRdm> {
    let n = exp.n_qubits;
    let (mut jz, mut jz_var) = (0.0, 0.0);
    for p in 0..n {
        let z = exp.get(&PauliString::single(p, Pauli::Z))?;
        jz += 0.5 * z.mean;
        jz_var += 0.25 * z.std_error.powi(2);
    }
    // Diagonal terms of sum_pq Z_p Z_q are 1.
    let (mut jz2, mut jz2_var) = (0.25 * n as f64, 0.0);
    let (mut jpm2, mut jpm2_var) = (0.0, 0.0);
    for p in 0..n {
        for q in p + 1..n {
            let zz = exp.get(&PauliString::pair(p, q, Pauli::Z))?;
            let xx = exp.get(&PauliString::pair(p, q, Pauli::X))?;
            let yy = exp.get(&PauliString::pair(p, q, Pauli::Y))?;
            jz2 += 0.5 * zz.mean;
            jz2_var += 0.25 * zz.std_error.powi(2);
            jpm2 += xx.mean - yy.mean;
            jpm2_var += xx.std_error.powi(2) + yy.std_error.powi(2);
        }
    }
    let shots = exp.values.values().map(|v| v.shots).min().filter(|&s| s > 0);
    Ok(EstimatedRdm {
        point: RdmPoint {
            jz,
            jz2,
            jpm2,
            params: *params,
            source,
            shots,
            seed: None,
        },
        jz_err: jz_var.sqrt(),
        jz2_err: jz2_var.sqrt(),
        jpm2_err: jpm2_var.sqrt(),
    })
}

fn z_value(b: u8) -> f64 {
    1.0 - 2.0 * b as f64
}

/// Order parameters straight from histograms, composite observables per shot.
pub fn estimate_order_parameters(
    records: &[CountsRecord],
    plan: &TomographyPlan,
    params: &LmgParams,
    source: Source,
) -> Result<EstimatedRdm> {
    plan.validate()?;
    let n = plan.n_qubits;
    let label = |axis: Pauli| -> String { std::iter::repeat_n(axis.symbol(), n).collect() };
    let zr = records_for(records, &label(Pauli::Z))?;
    let xr = records_for(records, &label(Pauli::X))?;
    let yr = records_for(records, &label(Pauli::Y))?;
    let jz = pooled(&zr, |b| 0.5 * b.iter().map(|&x| z_value(x)).sum::<f64>())?;
    let jz2 = pooled(&zr, |b| {
        let s: f64 = b.iter().map(|&x| z_value(x)).sum();
        0.25 * s * s
    })?;
    // sum_{p<q} s_p s_q = ((sum s)^2 - n) / 2
    let pair_sum = |b: &[u8]| {
        let s: f64 = b.iter().map(|&x| z_value(x)).sum();
        0.5 * (s * s - n as f64)
    };
    let xx = pooled(&xr, pair_sum)?;
    let yy = pooled(&yr, pair_sum)?;
    let shots = zr.iter().chain(&xr).chain(&yr).map(|r| r.shots).sum::<u64>();
    Ok(EstimatedRdm {
        point: RdmPoint {
            jz: jz.mean,
            jz2: jz2.mean,
            jpm2: xx.mean - yy.mean,
            params: *params,
            source,
            shots: Some(shots),
            seed: None,
        },
        jz_err: jz.std_error,
        jz2_err: jz2.std_error,
        jpm2_err: xx.std_error.hypot(yy.std_error),
    })
}
