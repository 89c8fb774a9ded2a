//! Symmetric tridiagonal eigen-solving: Sturm-count bisection for eigenvalues
//! and inverse iteration with a pivoted LU for eigenvectors.

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            diag.is_empty() && off.is_empty() || off.len() + 1 == diag.len(),
            "off-diagonal length must be one less than the diagonal"
        );
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            let r = left + right;
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    fn pivmin(&self) -> f64 {
        let m = self.off.iter().fold(1.0_f64, |acc, &b| acc.max(b * b));
        f64::MIN_POSITIVE * m
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.len();
        if n == 0 {
            return 0;
        }
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut d = self.diag[0] - x;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let b = self.off[i - 1];
            d = self.diag[i] - x - b * b / d;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Smallest eigenvalue, bisected to a few ulps of the spectral radius.
    pub fn lowest_eigenvalue(&self) -> f64 {
        assert!(!self.is_empty(), "empty matrix has no eigenvalues");
        if self.len() == 1 {
            return self.diag[0];
        }
        let (glo, ghi) = self.gershgorin();
        let pad = 2.0 * f64::EPSILON * self.norm_bound() + self.pivmin();
        let mut lo = glo - pad;
        let mut hi = ghi + pad;
        let abs_tol = 2.0 * self.pivmin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + abs_tol {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit eigenvector for an eigenvalue estimate `shift`.
    pub fn eigenvector(&self, shift: f64) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            return vec![1.0];
        }
        let lu = ShiftedLu::factor(self, shift);
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i as f64).sin()).collect();
        normalize(&mut v);
        for _ in 0..3 {
            lu.solve(&mut v);
            normalize(&mut v);
        }
        v
    }

    /// v^T T v for a unit vector v.
    pub fn rayleigh(&self, v: &[f64]) -> f64 {
        let n = self.len();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.diag[i] * v[i] * v[i];
            if i + 1 < n {
                acc += 2.0 * self.off[i] * v[i] * v[i + 1];
            }
        }
        acc
    }
}

fn normalize(v: &mut [f64]) {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return;
    }
    v.iter_mut().for_each(|x| *x /= scale);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// LU factors of T - shift*I with partial pivoting; zero pivots are replaced
/// by a perturbation of relative size eps so the solve never divides by zero.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiag, shift: f64) -> Self {
        let n = t.len();
        let mut dl = t.off.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - shift).collect();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        let tiny = f64::EPSILON * t.norm_bound();
        for x in d.iter_mut() {
            if x.abs() < tiny {
                *x = if *x < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense(t: &SymTridiag) -> DMatrix<f64> {
        let n = t.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = t.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = t.off[i];
                m[(i + 1, i)] = t.off[i];
            }
        }
        m
    }

    #[test]
    fn matches_dense_solver() {
        let t = SymTridiag::new(
            vec![2.0, -1.0, 0.5, 3.0, -2.5],
            vec![1.0, 0.3, -2.0, 0.7],
        );
        let eig = dense(&t).symmetric_eigen();
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((t.lowest_eigenvalue() - min).abs() < 1e-13);
        let v = t.eigenvector(t.lowest_eigenvalue());
        assert!((t.rayleigh(&v) - min).abs() < 1e-13);
    }

    #[test]
    fn sturm_counts_are_monotone() {
        let t = SymTridiag::new(vec![0.0; 6], vec![1.0; 5]);
        let mut last = 0;
        for k in -30..=30 {
            let c = t.count_below(k as f64 * 0.1);
            assert!(c >= last);
            last = c;
        }
        assert_eq!(last, 6);
    }

    #[test]
    fn decoupled_blocks_pick_isolated_minimum() {
        let t = SymTridiag::new(vec![1.0, -3.0, 2.0], vec![0.0, 0.0]);
        let e = t.lowest_eigenvalue();
        assert!((e + 3.0).abs() < 1e-14);
        let v = t.eigenvector(e);
        assert!((v[1].abs() - 1.0).abs() < 1e-12);
    }
}
