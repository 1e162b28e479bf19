//! Symmetric sparse matrices stored as the compressed lower triangle, and a
//! preconditioned conjugate-gradient solver.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric matrix in compressed-row storage of its lower triangle
/// (column index ≤ row index, columns sorted within each row).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetricMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Accumulates entries of a symmetric matrix; entries above the diagonal are
/// dropped, so callers may add full element matrices.
#[derive(Debug, Clone)]
pub struct SymmetricBuilder {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymmetricBuilder {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        if j <= i {
            self.entries.push((i, j, v));
        }
    }

    pub fn merge(&mut self, other: SymmetricBuilder) {
        debug_assert_eq!(self.dim, other.dim);
        self.entries.extend(other.entries);
    }

    pub fn build(mut self) -> SparseSymmetricMatrix {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSymmetricMatrix { dim: self.dim, row_ptr, cols, vals }
    }
}

impl SparseSymmetricMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz_lower(&self) -> usize {
        self.vals.len()
    }

    pub fn is_symmetric(&self) -> bool {
        true
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if j <= i { (i, j) } else { (j, i) };
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// Lower-triangle entries of row `i` as `(column, value)` pairs.
    pub fn lower_row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let v = self.vals[k];
                acc += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
            y[i] += acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Principal submatrix on `keep` (in that order).
    pub fn restrict(&self, keep: &[usize]) -> SparseSymmetricMatrix {
        let mut map = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut b = SymmetricBuilder::new(keep.len());
        for i in 0..self.dim {
            if map[i] == usize::MAX {
                continue;
            }
            for (j, v) in self.lower_row(i) {
                if map[j] != usize::MAX {
                    let (a, c) = (map[i], map[j]);
                    if c <= a {
                        b.add(a, c, v);
                    } else {
                        b.add(c, a, v);
                    }
                }
            }
        }
        b.build()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.lower_row(i) {
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        d
    }

    /// Direct solve through a dense Cholesky factorization.
    pub fn solve_dense(&self, b: &[f64]) -> Result<Vec<f64>> {
        let chol = self.to_dense().cholesky().ok_or_else(|| {
            Error::InvalidArgument("matrix is not positive definite".into())
        })?;
        Ok(chol.solve(&DVector::from_column_slice(b)).as_slice().to_vec())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Linear solver selection for SPD systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolver {
    /// Jacobi-preconditioned conjugate gradient with a relative tolerance.
    Cg { rel_tol: f64, max_iter: usize },
    /// Dense Cholesky; intended for small systems and cross-checks.
    DenseCholesky,
}

impl Default for LinearSolver {
    fn default() -> Self {
        LinearSolver::Cg { rel_tol: 1e-12, max_iter: 20_000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned CG for `A x = b`, starting from `x`.
///
/// `project`, when given, is applied to the residual and search directions;
/// it makes the iteration usable on consistent singular systems (Neumann).
pub fn pcg(
    a: &SparseSymmetricMatrix,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
    project: Option<&dyn Fn(&mut [f64])>,
) -> Result<CgReport> {
    let n = a.dim();
    let inv_diag: Vec<f64> =
        a.diagonal().iter().map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgReport { iterations: 0, relative_residual: 0.0 });
    }
    let mut r = a.mul_vec(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    if let Some(p) = project {
        p(&mut r);
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    if let Some(p) = project {
        p(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = norm(&r) / b_norm;
    for it in 0..max_iter {
        if res <= rel_tol {
            return Ok(CgReport { iterations: it, relative_residual: res });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::SolverNotConverged { iterations: it, residual: res });
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        if let Some(pr) = project {
            pr(&mut r);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        if let Some(pr) = project {
            pr(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = norm(&r) / b_norm;
    }
    if res <= rel_tol {
        Ok(CgReport { iterations: max_iter, relative_residual: res })
    } else {
        Err(Error::SolverNotConverged { iterations: max_iter, residual: res })
    }
}

/// Solves `A x = b` with the selected solver.
pub fn solve_spd(a: &SparseSymmetricMatrix, b: &[f64], solver: LinearSolver) -> Result<Vec<f64>> {
    match solver {
        LinearSolver::Cg { rel_tol, max_iter } => {
            let mut x = vec![0.0; a.dim()];
            pcg(a, b, &mut x, rel_tol, max_iter, None)?;
            Ok(x)
        }
        LinearSolver::DenseCholesky => a.solve_dense(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseSymmetricMatrix {
        let mut b = SymmetricBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i + 1 < n {
                b.add(i + 1, i, -1.0);
                b.add(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn builder_merges_duplicates_and_drops_upper() {
        let mut b = SymmetricBuilder::new(2);
        b.add(0, 0, 1.0);
        b.add(0, 0, 2.0);
        b.add(1, 0, 0.5);
        b.add(0, 1, 0.5);
        let m = b.build();
        assert_eq!(m.nnz_lower(), 2);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn symmetric_matvec_matches_dense() {
        let a = laplace_1d(6);
        let x: Vec<f64> = (0..6).map(|i| (i as f64).sin()).collect();
        let dense = a.to_dense() * DVector::from_column_slice(&x);
        let y = a.mul_vec(&x);
        for i in 0..6 {
            assert!((y[i] - dense[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn cg_and_cholesky_agree() {
        let a = laplace_1d(50);
        let b: Vec<f64> = (0..50).map(|i| 1.0 + i as f64 * 0.1).collect();
        let x1 = solve_spd(&a, &b, LinearSolver::default()).unwrap();
        let x2 = solve_spd(&a, &b, LinearSolver::DenseCholesky).unwrap();
        for i in 0..50 {
            assert!((x1[i] - x2[i]).abs() < 1e-9 * x2[i].abs().max(1.0));
        }
    }

    #[test]
    fn cg_reports_non_convergence() {
        let a = laplace_1d(200);
        let b = vec![1.0; 200];
        let mut x = vec![0.0; 200];
        let err = pcg(&a, &b, &mut x, 1e-14, 3, None).unwrap_err();
        assert!(matches!(err, Error::SolverNotConverged { iterations: 3, .. }));
    }

    #[test]
    fn restriction_keeps_principal_block() {
        let a = laplace_1d(5);
        let r = a.restrict(&[1, 2, 3]);
        assert_eq!(r.dim(), 3);
        assert_eq!(r.get(0, 0), 2.0);
        assert_eq!(r.get(2, 1), -1.0);
        assert_eq!(r.get(2, 0), 0.0);
    }
}
