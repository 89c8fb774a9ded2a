//! Brute-force 2^N reference built from single-spin raising operators,
//! sharing no code with the quasi-spin solver.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

pub struct Collective {
    pub n: usize,
    pub jz: DMatrix<f64>,
    pub jz2: DMatrix<f64>,
    pub jpm2: DMatrix<f64>,
}

/// |0> = spin up, qubit 0 is the most significant bit.
pub fn collective(n: usize) -> Collective {
    let dim = 1usize << n;
    let mut jp = DMatrix::<f64>::zeros(dim, dim);
    let mut jz = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for p in 0..n {
            let bit = 1 << (n - 1 - p);
            if i & bit != 0 {
                jp[(i & !bit, i)] += 1.0;
                jz[(i, i)] -= 0.5;
            } else {
                jz[(i, i)] += 0.5;
            }
        }
    }
    let jp2 = &jp * &jp;
    let jpm2 = &jp2 + jp2.transpose();
    let jz2 = &jz * &jz;
    Collective { n, jz, jz2, jpm2 }
}

pub struct Reference {
    pub energy: f64,
    pub gap: f64,
    pub jz: f64,
    pub jz2: f64,
    pub jpm2: f64,
    pub vector: DVector<f64>,
}

pub fn ground(n: usize, eps: f64, lam: f64) -> Reference {
    let c = collective(n);
    let h = &c.jz * eps + &c.jpm2 * (0.5 * lam);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let v = eig.eigenvectors.column(order[0]).into_owned();
    let ex = |m: &DMatrix<f64>| (v.transpose() * m * &v)[(0, 0)];
    Reference {
        energy: eig.eigenvalues[order[0]],
        gap: eig.eigenvalues[order[1]] - eig.eigenvalues[order[0]],
        jz: ex(&c.jz),
        jz2: ex(&c.jz2),
        jpm2: ex(&c.jpm2),
        vector: v,
    }
}
