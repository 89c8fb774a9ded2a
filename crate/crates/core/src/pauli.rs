//! Pauli strings and their expectation values.
//!
//! Qubit 0 is the most significant bit of a basis index and the leftmost
//! character of a bitstring.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(&self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// Tensor product of single-qubit Paulis; identity on unlisted qubits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub ops: BTreeMap<usize, Pauli>,
}

impl PauliString {
    pub fn new(ops: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let ops: BTreeMap<usize, Pauli> = ops.into_iter().collect();
        if ops.is_empty() {
            return Err(Error::Domain("Pauli string must act on at least one qubit".into()));
        }
        Ok(Self { ops })
    }

    pub fn single(q: usize, p: Pauli) -> Self {
        Self {
            ops: BTreeMap::from([(q, p)]),
        }
    }

    pub fn pair(p: usize, q: usize, op: Pauli) -> Self {
        assert_ne!(p, q, "pair string needs two distinct qubits");
        Self {
            ops: BTreeMap::from([(p, op), (q, op)]),
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.ops.is_empty() {
            return Err(Error::Domain("empty Pauli string".into()));
        }
        match self.ops.keys().find(|&&q| q >= n_qubits) {
            Some(&index) => Err(Error::QubitOutOfRange { index, n_qubits }),
            None => Ok(()),
        }
    }

    /// Dense label such as "XIX" over `n_qubits`.
    pub fn label(&self, n_qubits: usize) -> String {
        (0..n_qubits)
            .map(|q| self.ops.get(&q).map_or('I', Pauli::symbol))
            .collect()
    }

    fn masks(&self, n_qubits: usize) -> (usize, usize, usize) {
        let mut flip = 0;
        let mut zmask = 0;
        let mut ny = 0;
        for (&q, &p) in &self.ops {
            let bit = 1usize << (n_qubits - 1 - q);
            match p {
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    zmask |= bit;
                    ny += 1;
                }
                Pauli::Z => zmask |= bit,
            }
        }
        (flip, zmask, ny)
    }

    /// Applies the string to basis state |i>: returns (phase, target index).
    fn act(&self, i: usize, flip: usize, zmask: usize, ny: usize) -> (Complex64, usize) {
        let sign = if (i & zmask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        // Y|b> = i(-1)^b |1-b>, so each Y contributes a factor i.
        let phase = Complex64::new(sign, 0.0) * Complex64::i().powu(ny as u32);
        (phase, i ^ flip)
    }

    pub fn expectation_statevector(&self, amps: &[Complex64], n_qubits: usize) -> f64 {
        let (flip, zmask, ny) = self.masks(n_qubits);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in amps.iter().enumerate() {
            let (phase, j) = self.act(i, flip, zmask, ny);
            acc += amps[j].conj() * phase * a;
        }
        acc.re
    }

    pub fn expectation_density(&self, rho: &DMatrix<Complex64>, n_qubits: usize) -> f64 {
        let (flip, zmask, ny) = self.masks(n_qubits);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..rho.nrows() {
            let (phase, j) = self.act(i, flip, zmask, ny);
            acc += phase * rho[(i, j)];
        }
        acc.re
    }

    pub fn to_matrix(&self, n_qubits: usize) -> DMatrix<Complex64> {
        let dim = 1usize << n_qubits;
        let (flip, zmask, ny) = self.masks(n_qubits);
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let (phase, j) = self.act(i, flip, zmask, ny);
            m[(j, i)] = phase;
        }
        m
    }

    /// Eigenvalue (+1 or -1) read off a bitstring measured in the string's own basis.
    pub fn parity_of_bits(&self, bits: &[u8]) -> f64 {
        let ones = self.ops.keys().filter(|&&q| bits[q] == 1).count();
        if ones % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .ops
            .iter()
            .map(|(q, p)| format!("{}{}", p.symbol(), q))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Z on each qubit plus ZZ, XX and YY on every unordered pair.
pub fn lmg_required_strings(n_qubits: usize) -> Vec<PauliString> {
    let mut out: Vec<PauliString> = (0..n_qubits).map(|q| PauliString::single(q, Pauli::Z)).collect();
    for op in [Pauli::Z, Pauli::X, Pauli::Y] {
        for p in 0..n_qubits {
            for q in p + 1..n_qubits {
                out.push(PauliString::pair(p, q, op));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_qubit_matrices_match_definitions() {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let m = PauliString::single(0, p).to_matrix(1);
            let r = p.matrix();
            for a in 0..2 {
                for b in 0..2 {
                    assert_eq!(m[(a, b)], r[a][b]);
                }
            }
        }
    }

    #[test]
    fn bell_state_correlations() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [c(s), c(0.0), c(0.0), c(s)];
        let xx = PauliString::pair(0, 1, Pauli::X);
        let yy = PauliString::pair(0, 1, Pauli::Y);
        let zz = PauliString::pair(0, 1, Pauli::Z);
        assert!((xx.expectation_statevector(&bell, 2) - 1.0).abs() < 1e-15);
        assert!((yy.expectation_statevector(&bell, 2) + 1.0).abs() < 1e-15);
        assert!((zz.expectation_statevector(&bell, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        // |10>: qubit 0 in |1>.
        let st = [c(0.0), c(0.0), c(1.0), c(0.0)];
        assert_eq!(PauliString::single(0, Pauli::Z).expectation_statevector(&st, 2), -1.0);
        assert_eq!(PauliString::single(1, Pauli::Z).expectation_statevector(&st, 2), 1.0);
        assert_eq!(PauliString::pair(0, 1, Pauli::Z).label(3), "ZZI");
    }

    #[test]
    fn required_strings_count() {
        assert_eq!(lmg_required_strings(3).len(), 3 + 9);
        assert_eq!(lmg_required_strings(4).len(), 4 + 18);
    }
}
