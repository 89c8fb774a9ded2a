//! Exact LMG ground states in the quasi-spin basis.
//!
//! H = eps*Jz + lambda/2 * (J+^2 + J-^2) commutes with J^2 and with the parity
//! of j+m, so it splits into tridiagonal blocks labelled by (j, parity).
//! Quasi-spin values are stored doubled (`two_j`, `two_m`) to stay integral.

mod tridiag;

pub use tridiag::SymTridiag;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmgParams {
    pub epsilon: f64,
    pub lambda: f64,
    pub n_particles: u32,
}

impl LmgParams {
    pub fn new(epsilon: f64, lambda: f64, n_particles: u32) -> Result<Self> {
        let p = Self {
            epsilon,
            lambda,
            n_particles,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::Domain("n_particles must be at least 1".into()));
        }
        if !self.epsilon.is_finite() || !self.lambda.is_finite() {
            return Err(Error::Domain(format!(
                "non-finite parameters eps={} lambda={}",
                self.epsilon, self.lambda
            )));
        }
        Ok(())
    }

    /// Energy of an order-parameter triple under these parameters.
    pub fn energy_of(&self, jz: f64, jpm2: f64) -> f64 {
        self.epsilon * jz + 0.5 * self.lambda * jpm2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn of(k: i64) -> Self {
        if k.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// One invariant block: fixed j and fixed parity of j+m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpinSector {
    pub two_j: u32,
    pub parity: Parity,
}

impl SpinSector {
    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Doubled m values of the block, ascending.
    pub fn two_ms(&self) -> Vec<i64> {
        let tj = self.two_j as i64;
        (0..=tj)
            .filter(|k| Parity::of(*k) == self.parity)
            .map(|k| 2 * k - tj)
            .collect()
    }

    pub fn dim(&self) -> usize {
        let states = self.two_j as usize + 1;
        match self.parity {
            Parity::Even => states.div_ceil(2),
            Parity::Odd => states / 2,
        }
    }

    pub fn validate(&self, n_particles: u32) -> Result<()> {
        if self.two_j > n_particles || (n_particles - self.two_j) % 2 != 0 {
            return Err(Error::Domain(format!(
                "j={} is not a valid quasi-spin for N={}",
                self.j(),
                n_particles
            )));
        }
        if self.dim() == 0 {
            return Err(Error::Domain(format!(
                "sector j={} {:?} is empty",
                self.j(),
                self.parity
            )));
        }
        Ok(())
    }
}

/// Non-empty sectors for N particles, largest j first, Even before Odd.
pub fn sectors(n_particles: u32) -> Vec<SpinSector> {
    let mut out = Vec::new();
    let mut tj = n_particles as i64;
    while tj >= 0 {
        for parity in [Parity::Even, Parity::Odd] {
            let s = SpinSector {
                two_j: tj as u32,
                parity,
            };
            if s.dim() > 0 {
                out.push(s);
            }
        }
        tj -= 2;
    }
    out
}

fn binomial_f64(n: u32, k: i64) -> f64 {
    if k < 0 || k > n as i64 {
        return 0.0;
    }
    let k = k.min(n as i64 - k) as u32;
    let mut c = 1.0_f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Number of copies of the spin-j irrep among N spin-1/2 particles.
pub fn irrep_multiplicity(n_particles: u32, two_j: u32) -> f64 {
    let k = (n_particles as i64 - two_j as i64) / 2;
    binomial_f64(n_particles, k) - binomial_f64(n_particles, k - 1)
}

/// <j, m+2 | J+^2 | j, m> for doubled quantum numbers.
pub fn ladder2(two_j: u32, two_m: i64) -> f64 {
    let tj = two_j as i64;
    let jm = (tj - two_m) / 2;
    let jp = (tj + two_m) / 2;
    if jm < 2 {
        return 0.0;
    }
    let prod = jm as f64 * (jp + 1) as f64 * (jm - 1) as f64 * (jp + 2) as f64;
    prod.sqrt()
}

/// Block Hamiltonian in tridiagonal form, basis ordered by ascending m.
pub fn block_tridiagonal(params: &LmgParams, sector: SpinSector) -> Result<SymTridiag> {
    params.validate()?;
    sector.validate(params.n_particles)?;
    Ok(tridiag_unchecked(params, sector))
}

fn tridiag_unchecked(params: &LmgParams, sector: SpinSector) -> SymTridiag {
    let ms = sector.two_ms();
    let diag = ms
        .iter()
        .map(|&tm| params.epsilon * tm as f64 / 2.0)
        .collect();
    let off = ms
        .windows(2)
        .map(|w| 0.5 * params.lambda * ladder2(sector.two_j, w[0]))
        .collect();
    SymTridiag::new(diag, off)
}

/// Dense symmetric block matrix, basis ordered by ascending m.
pub fn build_block_hamiltonian(params: &LmgParams, sector: SpinSector) -> Result<DMatrix<f64>> {
    let t = block_tridiagonal(params, sector)?;
    let n = t.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = t.diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = t.off[i];
            m[(i + 1, i)] = t.off[i];
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateOptions {
    /// Relative to max(1, |E_min|).
    pub degeneracy_tol: f64,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self {
            degeneracy_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult {
    pub params: LmgParams,
    pub energy: f64,
    pub sector: SpinSector,
    /// Doubled m labels matching `amplitudes`.
    pub two_ms: Vec<i64>,
    pub amplitudes: Vec<f64>,
    pub degenerate: bool,
}

pub fn ground_state(params: &LmgParams) -> Result<GroundStateResult> {
    ground_state_with(params, &GroundStateOptions::default())
}

/// Global minimum over every sector. Blocks whose Sturm count at the running
/// minimum is zero are skipped, so the scan stays O(N^2) per point.
pub fn ground_state_with(params: &LmgParams, opts: &GroundStateOptions) -> Result<GroundStateResult> {
    params.validate()?;
    let n = params.n_particles;
    let secs = sectors(n);

    let mut e_min = f64::INFINITY;
    for &s in &secs {
        let t = tridiag_unchecked(params, s);
        if e_min.is_finite() && t.count_below(e_min) == 0 {
            continue;
        }
        e_min = e_min.min(t.lowest_eigenvalue());
    }

    let tol = opts.degeneracy_tol * e_min.abs().max(1.0);
    let mut weight = 0.0;
    let mut chosen: Option<(SpinSector, SymTridiag)> = None;
    for &s in &secs {
        let t = tridiag_unchecked(params, s);
        let c = t.count_below(e_min + tol);
        if c == 0 {
            continue;
        }
        weight += c as f64 * irrep_multiplicity(n, s.two_j);
        let better = match &chosen {
            None => true,
            Some((cur, _)) => s < *cur,
        };
        if better {
            chosen = Some((s, t));
        }
    }
    let (sector, t) = chosen.ok_or_else(|| Error::Contract("no sector holds the minimum".into()))?;

    let shift = t.lowest_eigenvalue();
    let mut amplitudes = t.eigenvector(shift);
    fix_phase(&mut amplitudes);
    let two_ms = sector.two_ms();
    let (jz, _, jpm2) = moments(sector.two_j, &two_ms, &amplitudes);
    Ok(GroundStateResult {
        params: *params,
        energy: params.energy_of(jz, jpm2),
        sector,
        two_ms,
        amplitudes,
        degenerate: weight >= 2.0,
    })
}

/// First amplitude above numerical noise is made positive.
fn fix_phase(a: &mut [f64]) {
    let max = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(first) = a.iter().find(|x| x.abs() > 1e-12 * max) {
        if *first < 0.0 {
            a.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn moments(two_j: u32, two_ms: &[i64], a: &[f64]) -> (f64, f64, f64) {
    let mut jz = 0.0;
    let mut jz2 = 0.0;
    for (&tm, &x) in two_ms.iter().zip(a) {
        let m = tm as f64 / 2.0;
        jz += m * x * x;
        jz2 += m * m * x * x;
    }
    let jpm2 = 2.0
        * two_ms
            .windows(2)
            .zip(a.windows(2))
            .map(|(m, x)| x[1] * x[0] * ladder2(two_j, m[0]))
            .sum::<f64>();
    (jz, jz2, jpm2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Exact,
    SimIdeal,
    SimNoisy,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Exact => "exact",
            Source::SimIdeal => "sim_ideal",
            Source::SimNoisy => "sim_noisy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(Source::Exact),
            "sim_ideal" => Some(Source::SimIdeal),
            "sim_noisy" => Some(Source::SimNoisy),
            _ => None,
        }
    }
}

/// The (<Jz>, <Jz^2>, <J+^2 + J-^2>) triple that fixes the LMG 2-RDM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdmPoint {
    pub jz: f64,
    pub jz2: f64,
    pub jpm2: f64,
    pub params: LmgParams,
    pub source: Source,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

impl RdmPoint {
    pub fn coords(&self) -> [f64; 3] {
        [self.jz, self.jz2, self.jpm2]
    }

    pub fn energy(&self) -> f64 {
        self.params.energy_of(self.jz, self.jpm2)
    }

    /// Physical bounds with slack `tol`.
    pub fn check_bounds(&self, tol: f64) -> Result<()> {
        let half = self.params.n_particles as f64 / 2.0;
        let ok = self.jz.abs() <= half + tol
            && self.jz2 >= -tol
            && self.jz2 <= half * half + tol
            && self.jz2 >= self.jz * self.jz - tol;
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "order parameters out of bounds: ({}, {}, {})",
                self.jz, self.jz2, self.jpm2
            )))
        }
    }
}

pub fn order_parameters(gs: &GroundStateResult) -> Result<RdmPoint> {
    order_parameters_of(&gs.params, gs.sector, &gs.amplitudes)
}

/// Order parameters of any real block vector.
pub fn order_parameters_of(params: &LmgParams, sector: SpinSector, amplitudes: &[f64]) -> Result<RdmPoint> {
    sector.validate(params.n_particles)?;
    let two_ms = sector.two_ms();
    if amplitudes.len() != two_ms.len() {
        return Err(Error::Contract(format!(
            "expected {} amplitudes, got {}",
            two_ms.len(),
            amplitudes.len()
        )));
    }
    let norm2: f64 = amplitudes.iter().map(|x| x * x).sum();
    if (norm2 - 1.0).abs() > 1e-10 {
        return Err(Error::Contract(format!("state norm^2 is {norm2}, expected 1")));
    }
    let (jz, jz2, jpm2) = moments(sector.two_j, &two_ms, amplitudes);
    Ok(RdmPoint {
        jz,
        jz2,
        jpm2,
        params: *params,
        source: Source::Exact,
        shots: None,
        seed: None,
    })
}

/// Ground states of every grid entry, evaluated in parallel, returned in order.
pub fn solve_grid(grid: &[LmgParams], opts: &GroundStateOptions) -> Result<Vec<GroundStateResult>> {
    if grid.is_empty() {
        return Err(Error::Domain("empty parameter grid".into()));
    }
    grid.par_iter()
        .enumerate()
        .map(|(i, p)| ground_state_with(p, opts).map_err(|e| e.at_point(i)))
        .collect()
}

pub fn sweep_ground_states(grid: &[LmgParams]) -> Result<Vec<RdmPoint>> {
    solve_grid(grid, &GroundStateOptions::default())?
        .iter()
        .map(order_parameters)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_dimensions_partition_the_multiplet() {
        for n in 1..12 {
            for s in sectors(n) {
                assert_eq!(s.dim(), s.two_ms().len());
            }
            let total: f64 = sectors(n)
                .iter()
                .map(|s| s.dim() as f64 * irrep_multiplicity(n, s.two_j))
                .sum();
            assert_eq!(total, 2f64.powi(n as i32));
        }
    }

    #[test]
    fn j_zero_has_only_an_even_block() {
        let secs = sectors(2);
        assert_eq!(secs.len(), 3);
        assert!(SpinSector { two_j: 0, parity: Parity::Odd }.validate(2).is_err());
    }

    #[test]
    fn invalid_sector_is_a_domain_error() {
        let p = LmgParams::new(1.0, 1.0, 3).unwrap();
        let bad = SpinSector { two_j: 2, parity: Parity::Even };
        assert!(matches!(build_block_hamiltonian(&p, bad), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_particles_rejected() {
        assert!(LmgParams::new(1.0, 0.0, 0).is_err());
        assert!(LmgParams::new(f64::NAN, 0.0, 2).is_err());
    }
}
