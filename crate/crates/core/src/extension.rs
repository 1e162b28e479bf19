//! Truncated Caffarelli–Silvestre extension on `Ω × (0, Y)` with weight
//! `y^α`, `α = 1 − 2s`, discretized by P1(triangle) ⊗ P1(interval) prisms.
//!
//! The weighted stiffness of a tensor-product space is the Kronecker sum
//! `A_Ω ⊗ M_y^α + M_Ω ⊗ A_y^α`. The default solver diagonalizes the base
//! pencil `(A_Ω, M_Ω)` and solves one tridiagonal system per eigenmode; the
//! assembled sparse matrix is kept for the iterative and dense routes.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{check_order, Error, Result};
use crate::fem2d::{element_mass, element_stiffness, load_vector, P1Space};
use crate::functions::Field;
use crate::mesh::{
    default_truncation_height, graded_interval, tensor_cylinder, uniform_square_mesh, CylinderMesh,
    GradedInterval,
};
use crate::sparse::{pcg, CgReport, SparseSymmetricMatrix, SymmetricBuilder};
use crate::spectral::{BasisKind, EigenBasis};

/// Γ(x) for x > 0 by the Lanczos approximation (g = 7, 9 terms), with
/// reflection below 1/2.
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// `d_s = 2^{1−2s} Γ(1−s) / Γ(s)`
pub fn ds_constant(s: f64) -> Result<f64> {
    check_order(s)?;
    Ok(2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s))
}

/// `∫_a^b y^α p_i p_j` and `∫_a^b y^α p_i' p_j'` for the two linear hat
/// functions of `[a, b]`, integrated in closed form.
pub fn weighted_cell_matrices(a: f64, b: f64, alpha: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let h = b - a;
    let moment = |n: i32| {
        let p = alpha + n as f64 + 1.0;
        (b.powf(p) - if a > 0.0 { a.powf(p) } else { 0.0 }) / p
    };
    let (i0, i1, i2) = (moment(0), moment(1), moment(2));
    let h2 = h * h;
    let m00 = (b * b * i0 - 2.0 * b * i1 + i2) / h2;
    let m01 = (-a * b * i0 + (a + b) * i1 - i2) / h2;
    let m11 = (a * a * i0 - 2.0 * a * i1 + i2) / h2;
    let k = i0 / h2;
    ([[m00, m01], [m01, m11]], [[k, -k], [-k, k]])
}

/// Zero-boundary fractional problem `(-Δ_{D,0})^s w = f` posed through the
/// extension on a truncated cylinder.
#[derive(Clone)]
pub struct ExtensionProblem {
    s: f64,
    alpha: f64,
    ds: f64,
    cylinder: Arc<CylinderMesh>,
    load: Field,
}

impl ExtensionProblem {
    pub fn new(s: f64, cylinder: Arc<CylinderMesh>, load: Field) -> Result<Self> {
        let ds = ds_constant(s)?;
        Ok(Self { s, alpha: 1.0 - 2.0 * s, ds, cylinder, load })
    }

    /// Overrides `d_s`; used by sensitivity probes.
    pub fn with_ds(mut self, ds: f64) -> Self {
        self.ds = ds;
        self
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn cylinder(&self) -> &CylinderMesh {
        &self.cylinder
    }

    pub fn load(&self) -> &Field {
        &self.load
    }

    /// `∫_Ω f φ_i` on the base mesh (without the `d_s` factor).
    pub fn base_load(&self) -> Vec<f64> {
        load_vector(self.cylinder.base(), self.load.as_ref())
    }
}

/// Cylinder for the unit square with `m` cells per side and `m` graded
/// cells in `y`; `height` defaults to [`default_truncation_height`].
pub fn square_cylinder(m: usize, s: f64, safety: f64, height: Option<f64>) -> Result<CylinderMesh> {
    let base = uniform_square_mesh(m)?;
    let prisms = base.triangle_count() * m;
    let y = height.unwrap_or_else(|| default_truncation_height(prisms));
    let axis = graded_interval(m, s, y, safety)?;
    Ok(tensor_cylinder(base, axis))
}

fn axis_matrices(axis: &GradedInterval, alpha: f64) -> (Vec<[[f64; 2]; 2]>, Vec<[[f64; 2]; 2]>) {
    axis.breakpoints().windows(2).map(|w| weighted_cell_matrices(w[0], w[1], alpha)).unzip()
}

/// Weighted stiffness `∫ y^α ∇W·∇Φ` over all cylinder dofs (constraints not
/// applied).
pub fn assemble_weighted_stiffness(cyl: &CylinderMesh, alpha: f64) -> Result<SparseSymmetricMatrix> {
    if !(alpha > -1.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("weight exponent α = {alpha} must lie in (-1, 1)")));
    }
    let base = cyl.base();
    let (my, ay) = axis_matrices(cyl.axis(), alpha);
    let n = base.node_count();
    let dofs = cyl.dof_count();
    let builders: Vec<SymmetricBuilder> = (0..base.triangle_count())
        .collect::<Vec<_>>()
        .par_chunks(256)
        .map(|ts| {
            let mut b = SymmetricBuilder::new(dofs);
            for &t in ts {
                let kx = element_stiffness(base, t);
                let mx = element_mass(base, t);
                let nodes = base.triangles()[t];
                for (k, (myk, ayk)) in my.iter().zip(&ay).enumerate() {
                    for i in 0..2 {
                        for j in 0..2 {
                            for a in 0..3 {
                                for c in 0..3 {
                                    let v = kx[a][c] * myk[i][j] + mx[a][c] * ayk[i][j];
                                    b.add((k + i) * n + nodes[a], (k + j) * n + nodes[c], v);
                                }
                            }
                        }
                    }
                }
            }
            b
        })
        .collect();
    let mut all = SymmetricBuilder::new(dofs);
    for b in builders {
        all.merge(b);
    }
    Ok(all.build())
}

/// Free (unconstrained) cylinder dofs in increasing order.
pub fn free_dofs(cyl: &CylinderMesh) -> Vec<usize> {
    (0..cyl.dof_count()).filter(|&d| !cyl.is_constrained(d)).collect()
}

/// How the discrete extension problem is solved.
#[derive(Clone)]
pub enum ExtensionMethod {
    /// Diagonalization in `x` with a full discrete Dirichlet eigenbasis of
    /// the base mesh (all interior modes), tridiagonal solves in `y`.
    Modal(Arc<EigenBasis>),
    /// Jacobi-preconditioned CG on the assembled system.
    Pcg { rel_tol: f64, max_iter: usize },
    /// Dense Cholesky of the assembled system.
    DenseCholesky,
}

impl ExtensionMethod {
    pub const DEFAULT_PCG: ExtensionMethod = ExtensionMethod::Pcg { rel_tol: 1e-10, max_iter: 200_000 };
}

#[derive(Debug, Clone)]
pub struct ExtensionSolution {
    /// `W_h` at every cylinder dof (constrained dofs are zero).
    pub values: Vec<f64>,
    /// `W_h(·, 0)` as base nodal values.
    pub trace: Vec<f64>,
    /// `d_s ⟨f, W_h(·,0)⟩`, which equals `a_α(W_h, W_h)` for the Galerkin solution.
    pub energy: f64,
    pub report: Option<CgReport>,
}

/// Galerkin solution of `∫ y^α ∇W·∇Φ = d_s ⟨f, Φ(·,0)⟩` on the cylinder.
pub fn solve_truncated_extension(p: &ExtensionProblem, method: &ExtensionMethod) -> Result<ExtensionSolution> {
    let cyl = p.cylinder();
    let n = cyl.base().node_count();
    let mut rhs_base = p.base_load();
    rhs_base.iter_mut().for_each(|v| *v *= p.ds());
    for i in 0..n {
        if cyl.base().is_boundary(i) {
            rhs_base[i] = 0.0;
        }
    }
    let (values, report) = match method {
        ExtensionMethod::Modal(basis) => (solve_modal(p, basis, &rhs_base)?, None),
        ExtensionMethod::Pcg { rel_tol, max_iter } => {
            let (a, free) = reduced_system(p)?;
            let rhs: Vec<f64> = free.iter().map(|&d| if d < n { rhs_base[d] } else { 0.0 }).collect();
            let mut x = vec![0.0; free.len()];
            let report = pcg(&a, &rhs, &mut x, *rel_tol, *max_iter, None)?;
            (scatter(cyl.dof_count(), &free, &x), Some(report))
        }
        ExtensionMethod::DenseCholesky => {
            let (a, free) = reduced_system(p)?;
            let rhs: Vec<f64> = free.iter().map(|&d| if d < n { rhs_base[d] } else { 0.0 }).collect();
            let x = a.solve_dense(&rhs)?;
            (scatter(cyl.dof_count(), &free, &x), None)
        }
    };
    let trace = values[..n].to_vec();
    let energy = trace.iter().zip(&rhs_base).map(|(a, b)| a * b).sum();
    Ok(ExtensionSolution { values, trace, energy, report })
}

fn reduced_system(p: &ExtensionProblem) -> Result<(SparseSymmetricMatrix, Vec<usize>)> {
    let a = assemble_weighted_stiffness(p.cylinder(), p.alpha())?;
    let free = free_dofs(p.cylinder());
    Ok((a.restrict(&free), free))
}

fn scatter(len: usize, idx: &[usize], x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (k, &i) in idx.iter().enumerate() {
        out[i] = x[k];
    }
    out
}

fn solve_modal(p: &ExtensionProblem, basis: &EigenBasis, rhs_base: &[f64]) -> Result<Vec<f64>> {
    let cyl = p.cylinder();
    let base = cyl.base();
    let interior_count = base.interior_nodes().len();
    let modes = basis
        .discrete()
        .filter(|d| basis.kind() == BasisKind::Dirichlet && d.vectors.nrows() == base.node_count())
        .ok_or_else(|| Error::InvalidArgument("modal extension solver needs a discrete Dirichlet basis of the base mesh".into()))?;
    if basis.len() != interior_count {
        return Err(Error::InvalidArgument(format!(
            "modal extension solver needs all {interior_count} interior modes, basis has {}",
            basis.len()
        )));
    }
    let (my, ay) = axis_matrices(cyl.axis(), p.alpha());
    let levels = cyl.axis().cells();
    let n = base.node_count();
    // modal load b_k = φ_kᵀ F
    let loads: Vec<f64> = (0..basis.len())
        .map(|k| modes.vectors.column(k).iter().zip(rhs_base).map(|(a, b)| a * b).sum())
        .collect();
    // per mode: (λ_k M_y + A_y) c = b_k e_0 on levels 0..levels-1
    let profiles: Vec<Vec<f64>> = basis
        .eigenvalues()
        .par_iter()
        .zip(loads.par_iter())
        .map(|(&lambda, &b)| {
            let mut diag = vec![0.0; levels];
            let mut off = vec![0.0; levels.saturating_sub(1)];
            for k in 0..levels {
                let m = my[k];
                let a = ay[k];
                diag[k] += lambda * m[0][0] + a[0][0];
                if k + 1 < levels {
                    diag[k + 1] += lambda * m[1][1] + a[1][1];
                    off[k] = lambda * m[0][1] + a[0][1];
                }
            }
            let mut rhs = vec![0.0; levels];
            rhs[0] = b;
            solve_tridiagonal(&diag, &off, &rhs)
        })
        .collect();
    let mut values = vec![0.0; cyl.dof_count()];
    for (k, profile) in profiles.iter().enumerate() {
        let col = modes.vectors.column(k);
        for (level, &c) in profile.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let slice = &mut values[level * n..(level + 1) * n];
            for (v, &phi) in slice.iter_mut().zip(col.iter()) {
                *v += c * phi;
            }
        }
    }
    Ok(values)
}

/// Symmetric tridiagonal solve (Thomas algorithm); `off[k]` couples `k` and `k+1`.
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if n > 1 {
        c[0] = off[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// `d_s ∫_Ω f (w − w_h)`, equal to `‖∇(W − W_h)‖²_{L²(y^α)}` by Galerkin
/// orthogonality up to truncation and quadrature.
///
/// `∫ f w` uses the 7-point rule on every element split into 16
/// sub-triangles; `∫ f w_h` uses the load vector, matching the discrete
/// right-hand side.
pub fn energy_error_identity(p: &ExtensionProblem, exact: &dyn Fn(f64, f64) -> f64, trace: &[f64]) -> f64 {
    let base = p.cylinder().base();
    let f = p.load();
    let mut fw = 0.0;
    base.for_each_quadrature_point(4, |_, _, x, y, w| fw += w * f(x, y) * exact(x, y));
    let fwh: f64 = p.base_load().iter().zip(trace).map(|(a, b)| a * b).sum();
    p.ds() * (fw - fwh)
}

/// Prolongates a cylinder function from `coarse` to `fine`; exact when the
/// meshes are nested.
pub fn prolongate(coarse: &CylinderMesh, values: &[f64], fine: &CylinderMesh) -> Vec<f64> {
    let cb = coarse.base();
    let ys = coarse.axis().breakpoints();
    let nc = cb.node_count();
    let fb = fine.base();
    let nf = fb.node_count();
    let located: Vec<(usize, [f64; 3])> = fb.nodes().iter().map(|&p| cb.locate(p)).collect();
    let mut out = vec![0.0; fine.dof_count()];
    for (level, &y) in fine.axis().breakpoints().iter().enumerate() {
        let k = match ys.iter().position(|&b| b >= y) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => ys.len() - 2,
        };
        let (y0, y1) = (ys[k], ys[k + 1]);
        let theta = ((y - y0) / (y1 - y0)).clamp(0.0, 1.0);
        let lower = &values[k * nc..(k + 1) * nc];
        let upper = &values[(k + 1) * nc..(k + 2) * nc];
        for (node, &(t, bary)) in located.iter().enumerate() {
            let v0 = cb.eval_p1(lower, t, bary);
            let v1 = cb.eval_p1(upper, t, bary);
            out[level * nf + node] = (1.0 - theta) * v0 + theta * v1;
        }
    }
    out
}

/// Base P1 space shared by the extension and the lifting.
pub fn base_space(cyl: &CylinderMesh) -> P1Space {
    P1Space::new(cyl.base().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::field;
    use crate::mesh::GradedInterval;
    use crate::spectral::fem_eigenbasis;

    /// Γ by recurrence shift plus Stirling series, as a cross-check on the
    /// Lanczos approximation.
    fn stirling_gamma(z: f64) -> f64 {
        let shift = 20;
        let mut prod = 1.0;
        let mut x = z;
        for _ in 0..shift {
            prod *= x;
            x += 1.0;
        }
        let ln = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5))
            - 1.0 / (1680.0 * x.powi(7));
        ln.exp() / prod
    }

    #[test]
    fn ds_values() {
        assert!((ds_constant(0.5).unwrap() - 1.0).abs() < 1e-14);
        let oracle = 2f64.sqrt() * stirling_gamma(0.75) / stirling_gamma(0.25);
        assert!((ds_constant(0.25).unwrap() - oracle).abs() < 1e-12);
        for k in 1..10 {
            let s = k as f64 / 10.0;
            let oracle = 2f64.powf(1.0 - 2.0 * s) * stirling_gamma(1.0 - s) / stirling_gamma(s);
            let v = ds_constant(s).unwrap();
            assert!(v > 0.0 && (v - oracle).abs() < 1e-12 * oracle);
        }
        assert!(ds_constant(0.0).is_err());
        assert!(ds_constant(1.0).is_err());
    }

    #[test]
    fn weighted_cell_integrals() {
        let h = 0.3;
        let alpha = -0.6;
        let (m, k) = weighted_cell_matrices(0.0, h, alpha);
        let total = m[0][0] + 2.0 * m[0][1] + m[1][1];
        assert!((total - h.powf(alpha + 1.0) / (alpha + 1.0)).abs() < 1e-14);
        assert!((k[0][0] * h * h - h.powf(alpha + 1.0) / (alpha + 1.0)).abs() < 1e-14);
        // α = 0 gives the standard 1D matrices
        let (m, k) = weighted_cell_matrices(0.7, 1.1, 0.0);
        let h = 0.4;
        assert!((m[0][0] - h / 3.0).abs() < 1e-14);
        assert!((m[0][1] - h / 6.0).abs() < 1e-14);
        assert!((k[0][1] + 1.0 / h).abs() < 1e-13);
    }

    #[test]
    fn weighted_cell_mass_matches_fine_quadrature() {
        let (a, b, alpha) = (0.05, 0.4, 0.6);
        let (m, _) = weighted_cell_matrices(a, b, alpha);
        let rule = crate::quadrature::composite_rule(a, b, 400, 8);
        let q01: f64 = rule.iter().map(|&(y, w)| w * y.powf(alpha) * (b - y) * (y - a)).sum::<f64>() / (b - a).powi(2);
        assert!((m[0][1] - q01).abs() < 1e-13);
    }

    #[test]
    fn tridiagonal_solver() {
        let diag = [4.0, 5.0, 6.0];
        let off = [1.0, 2.0];
        let x = solve_tridiagonal(&diag, &off, &[1.0, 2.0, 3.0]);
        let r = [4.0 * x[0] + x[1], x[0] + 5.0 * x[1] + 2.0 * x[2], 2.0 * x[1] + 6.0 * x[2]];
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    fn small_cylinder(m: usize, s: f64) -> Arc<CylinderMesh> {
        Arc::new(square_cylinder(m, s, 1.1, Some(1.5)).unwrap())
    }

    #[test]
    fn alpha_zero_matches_unweighted_tensor_assembly() {
        let base = uniform_square_mesh(3).unwrap();
        let axis = GradedInterval::with_exponent(3, 2.0, 1.0).unwrap();
        let cyl = tensor_cylinder(base.clone(), axis.clone());
        let a = assemble_weighted_stiffness(&cyl, 0.0).unwrap();
        // unweighted reference: standard 1D matrices
        let kx = crate::fem2d::assemble_stiffness(&base).to_dense();
        let mx = crate::fem2d::assemble_mass(&base).to_dense();
        let y = axis.breakpoints();
        let levels = y.len();
        let mut my = nalgebra::DMatrix::zeros(levels, levels);
        let mut ky = nalgebra::DMatrix::zeros(levels, levels);
        for k in 0..levels - 1 {
            let h = y[k + 1] - y[k];
            my[(k, k)] += h / 3.0;
            my[(k + 1, k + 1)] += h / 3.0;
            my[(k, k + 1)] += h / 6.0;
            my[(k + 1, k)] += h / 6.0;
            ky[(k, k)] += 1.0 / h;
            ky[(k + 1, k + 1)] += 1.0 / h;
            ky[(k, k + 1)] -= 1.0 / h;
            ky[(k + 1, k)] -= 1.0 / h;
        }
        let reference = my.kronecker(&kx) + ky.kronecker(&mx);
        let dense = a.to_dense();
        for i in 0..dense.nrows() {
            for j in 0..dense.ncols() {
                let r = reference[(i, j)];
                assert!((dense[(i, j)] - r).abs() <= 1e-12 * r.abs().max(1.0), "({i},{j})");
            }
        }
    }

    #[test]
    fn reduced_weighted_stiffness_is_spd() {
        let cyl = small_cylinder(3, 0.3);
        let a = assemble_weighted_stiffness(&cyl, 1.0 - 0.6).unwrap();
        let free = free_dofs(&cyl);
        let reduced = a.restrict(&free).to_dense();
        let eig = reduced.symmetric_eigen();
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
        assert!(assemble_weighted_stiffness(&cyl, 1.0).is_err());
    }

    #[test]
    fn zero_load_gives_zero_solution() {
        let cyl = small_cylinder(4, 0.5);
        let p = ExtensionProblem::new(0.5, cyl, field(|_, _| 0.0)).unwrap();
        let sol = solve_truncated_extension(&p, &ExtensionMethod::DEFAULT_PCG).unwrap();
        assert!(sol.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn solvers_agree_and_energy_identity_holds() {
        for s in [0.2, 0.5, 0.8] {
            let cyl = small_cylinder(4, s);
            let space = Arc::new(base_space(&cyl));
            let interior = space.interior().len();
            let basis = Arc::new(fem_eigenbasis(Arc::clone(&space), BasisKind::Dirichlet, interior).unwrap());
            let f = field(|x, y| (x * y).exp() * x * (1.0 - y));
            let p = ExtensionProblem::new(s, Arc::clone(&cyl), f).unwrap();
            let modal = solve_truncated_extension(&p, &ExtensionMethod::Modal(basis)).unwrap();
            let dense = solve_truncated_extension(&p, &ExtensionMethod::DenseCholesky).unwrap();
            let iterative = solve_truncated_extension(&p, &ExtensionMethod::DEFAULT_PCG).unwrap();
            let scale = dense.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
            for i in 0..dense.values.len() {
                assert!((modal.values[i] - dense.values[i]).abs() < 1e-9 * scale, "s={s} modal dof {i}");
                assert!((iterative.values[i] - dense.values[i]).abs() < 1e-7 * scale, "s={s} pcg dof {i}");
            }
            let a = assemble_weighted_stiffness(&cyl, p.alpha()).unwrap();
            let energy = a.bilinear(&modal.values, &modal.values);
            assert!((energy - modal.energy).abs() < 1e-10 * energy, "s={s}: {energy} vs {}", modal.energy);
            // constrained dofs stay zero
            for d in 0..cyl.dof_count() {
                if cyl.is_constrained(d) {
                    assert_eq!(modal.values[d], 0.0);
                }
            }
        }
    }

    #[test]
    fn prolongation_is_exact_on_nested_meshes() {
        let coarse = square_cylinder(2, 0.4, 1.1, Some(1.0)).unwrap();
        let fine = square_cylinder(4, 0.4, 1.1, Some(1.0)).unwrap();
        // tensor-linear function of (x, y) on each cell is reproduced at coarse dofs
        let n = coarse.base().node_count();
        let mut values = vec![0.0; coarse.dof_count()];
        for (level, &y) in coarse.axis().breakpoints().iter().enumerate() {
            for (i, p) in coarse.base().nodes().iter().enumerate() {
                values[level * n + i] = (1.0 + p[0] - 2.0 * p[1]) * (3.0 - y);
            }
        }
        let fine_values = prolongate(&coarse, &values, &fine);
        let nf = fine.base().node_count();
        for (level, &y) in fine.axis().breakpoints().iter().enumerate() {
            for (i, p) in fine.base().nodes().iter().enumerate() {
                let exact = (1.0 + p[0] - 2.0 * p[1]) * (3.0 - y);
                assert!((fine_values[level * nf + i] - exact).abs() < 1e-12);
            }
        }
    }
}
