//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative pivot floor used by the positive-definiteness test.
pub const PD_PIVOT_FLOOR: f64 = 1e-12;

/// Lower Cholesky factor of a symmetric matrix, or `None` when some pivot
/// falls below `PD_PIVOT_FLOOR * max_i X_ii`.
pub fn cholesky_pd(x: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = x.nrows();
    if n == 0 || x.ncols() != n {
        return None;
    }
    let max_diag = (0..n).map(|i| x[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    if !(max_diag > 0.0) || !max_diag.is_finite() {
        return None;
    }
    let floor = PD_PIVOT_FLOOR * max_diag;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = x[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = x[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

pub fn is_positive_definite(x: &DMatrix<f64>) -> bool {
    cholesky_pd(x).is_some()
}

/// Eigendecomposition `X = Q diag(lambda) Q^T` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectral {
    pub fn new(x: &DMatrix<f64>) -> Self {
        let sym = symmetrize(x);
        let eig = SymmetricEigen::new(sym);
        Spectral {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    /// `X^e`; only meaningful for negative or fractional `e` when all
    /// eigenvalues are positive.
    pub fn power(&self, e: f64) -> DMatrix<f64> {
        self.map(|l| l.powf(e))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for a in 0..n {
            let s = f(self.values[a]);
            scaled.column_mut(a).scale_mut(s);
        }
        symmetrize(&(scaled * self.vectors.transpose()))
    }

    pub fn trace_power(&self, e: f64) -> f64 {
        self.values.iter().map(|l| l.powf(e)).sum()
    }
}

pub fn symmetrize(x: &DMatrix<f64>) -> DMatrix<f64> {
    (x + x.transpose()) * 0.5
}

pub fn max_eigenvalue(x: &DMatrix<f64>) -> f64 {
    Spectral::new(x).max()
}

pub fn min_eigenvalue(x: &DMatrix<f64>) -> f64 {
    Spectral::new(x).min()
}

/// Largest singular value by power iteration on `A^T A`, stopped at
/// relative change 1e-10.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let gram = a.transpose() * a;
    // Deterministic start with no exact orthogonality to the top singular vector in practice.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * (i as f64 + 1.0).sqrt());
    v /= v.norm();
    let mut sigma2 = 0.0;
    for _ in 0..10_000 {
        let w = &gram * &v;
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        v = w / next;
        if (next - sigma2).abs() <= 1e-10 * next {
            sigma2 = next;
            break;
        }
        sigma2 = next;
    }
    // Rayleigh quotient is more accurate than the last norm ratio.
    let rq = v.dot(&(&gram * &v));
    rq.max(sigma2).sqrt()
}

pub fn singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    a.clone().svd(false, false).singular_values
}

/// Numerical rank with the relative threshold `sigma > tol * sigma_max`.
pub fn numerical_rank(a: &DMatrix<f64>, tol: f64) -> usize {
    let sv = singular_values(a);
    let smax = sv.max();
    if smax <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Greedy column-pivoted Gram-Schmidt over the rows of `a` restricted to
/// `candidates`. Returns up to `a.ncols()` row indices whose rows are linearly
/// independent, in pivot order.
pub fn independent_rows(a: &DMatrix<f64>, candidates: &[usize]) -> Vec<usize> {
    let n = a.ncols();
    let mut residual: Vec<(usize, DVector<f64>)> = candidates
        .iter()
        .map(|&i| (i, a.row(i).transpose()))
        .collect();
    let scale = residual
        .iter()
        .map(|(_, r)| r.norm())
        .fold(0.0_f64, f64::max);
    let mut chosen = Vec::with_capacity(n);
    while chosen.len() < n && !residual.is_empty() {
        let (pos, best) = residual
            .iter()
            .enumerate()
            .map(|(p, (_, r))| (p, r.norm()))
            .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        let (idx, q) = residual.swap_remove(pos);
        let q = q / best;
        for (_, r) in residual.iter_mut() {
            let c = q.dot(r);
            r.axpy(-c, &q, 1.0);
        }
        chosen.push(idx);
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_rejects_singular() {
        let x = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        assert!(cholesky_pd(&x).is_none());
        let y = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0]);
        let l = cholesky_pd(&y).unwrap();
        assert!((&l * l.transpose() - y).abs().max() < 1e-14);
    }

    #[test]
    fn power_of_diagonal() {
        let x = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]));
        let s = Spectral::new(&x);
        let p = s.power(-0.5);
        assert!((p[(1, 1)] - 0.5).abs() < 1e-14);
        assert!((s.trace_power(-1.0) - 1.25).abs() < 1e-14);
    }

    #[test]
    fn spectral_norm_matches_svd() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -0.5, 0.3, 4.0, 1.0]);
        let sv = singular_values(&a).max();
        assert!((spectral_norm(&a) - sv).abs() < 1e-8 * sv);
    }

    #[test]
    fn independent_rows_skips_duplicates() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let rows = independent_rows(&a, &[0, 1, 2]);
        assert_eq!(rows.len(), 2);
        assert!(rows.contains(&2));
    }
}
