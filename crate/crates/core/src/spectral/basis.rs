use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem2d::P1Space;
use crate::sparse::SparseSymmetricMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Dirichlet,
    Neumann,
}

/// Relative eigenvalue gap below which two discrete eigenpairs are treated
/// as one cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;

/// Maximum relative eigen-residual accepted from the dense eigen-solver.
pub const EIGEN_RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Eigenfunctions backing an [`EigenBasis`].
#[derive(Debug, Clone)]
pub enum Modes {
    /// `√2 sin(kπx)` on (0, 1).
    Interval(Vec<usize>),
    /// Unit square: `2 sin(kπx) sin(lπy)` (Dirichlet) or
    /// `c_k c_l cos(kπx) cos(lπy)` with `c_0 = 1`, `c_k = √2` (Neumann).
    Square(Vec<(usize, usize)>),
    Discrete(DiscreteModes),
}

/// Mass-orthonormal nodal eigenvectors on a P1 space.
#[derive(Debug, Clone)]
pub struct DiscreteModes {
    pub space: Arc<P1Space>,
    /// One column per mode, one row per mesh node. Dirichlet modes vanish on
    /// boundary nodes.
    pub vectors: DMatrix<f64>,
    /// Largest relative residual `‖Aφ − λMφ‖ / (‖Aφ‖ + max(λ, 1)‖Mφ‖)`.
    pub max_residual: f64,
}

/// Ordered eigenpairs of the Dirichlet or Neumann Laplacian.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    kind: BasisKind,
    eigenvalues: Vec<f64>,
    modes: Modes,
}

impl EigenBasis {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn modes(&self) -> &Modes {
        &self.modes
    }

    /// `|Ω|`
    pub fn domain_measure(&self) -> f64 {
        match &self.modes {
            Modes::Interval(_) | Modes::Square(_) => 1.0,
            Modes::Discrete(d) => d.space.mesh().domain_area(),
        }
    }

    pub fn discrete(&self) -> Option<&DiscreteModes> {
        match &self.modes {
            Modes::Discrete(d) => Some(d),
            _ => None,
        }
    }

    /// Keeps the first `m` eigenpairs.
    pub fn truncate(&self, m: usize) -> EigenBasis {
        let m = m.min(self.len());
        let modes = match &self.modes {
            Modes::Interval(k) => Modes::Interval(k[..m].to_vec()),
            Modes::Square(kl) => Modes::Square(kl[..m].to_vec()),
            Modes::Discrete(d) => Modes::Discrete(DiscreteModes {
                space: Arc::clone(&d.space),
                vectors: d.vectors.columns(0, m).into_owned(),
                max_residual: d.max_residual,
            }),
        };
        EigenBasis { kind: self.kind, eigenvalues: self.eigenvalues[..m].to_vec(), modes }
    }

    /// Value of mode `j` at `(x, y)`; `y` is ignored on the interval.
    /// Discrete bases are not point-evaluable here and return `None`.
    pub fn eval_mode(&self, j: usize, x: f64, y: f64) -> Option<f64> {
        match &self.modes {
            Modes::Interval(ks) => Some(2f64.sqrt() * (ks[j] as f64 * PI * x).sin()),
            Modes::Square(kl) => {
                let (k, l) = kl[j];
                Some(match self.kind {
                    BasisKind::Dirichlet => 2.0 * (k as f64 * PI * x).sin() * (l as f64 * PI * y).sin(),
                    BasisKind::Neumann => {
                        cosine_weight(k) * cosine_weight(l) * (k as f64 * PI * x).cos() * (l as f64 * PI * y).cos()
                    }
                })
            }
            Modes::Discrete(_) => None,
        }
    }

    /// Outward normal derivative of analytic Dirichlet mode `j` on the given
    /// side of the unit square (or interval endpoint).
    pub fn normal_derivative(&self, j: usize, side: Side, t: f64) -> Option<f64> {
        if self.kind != BasisKind::Dirichlet {
            return None;
        }
        match &self.modes {
            Modes::Interval(ks) => {
                let kpi = ks[j] as f64 * PI;
                Some(match side {
                    Side::Left => -2f64.sqrt() * kpi,
                    Side::Right => 2f64.sqrt() * kpi * (kpi).cos(),
                    _ => return None,
                })
            }
            Modes::Square(kl) => {
                let (k, l) = kl[j];
                let (kpi, lpi) = (k as f64 * PI, l as f64 * PI);
                Some(match side {
                    Side::Bottom => -2.0 * lpi * (kpi * t).sin(),
                    Side::Top => 2.0 * lpi * sign(l) * (kpi * t).sin(),
                    Side::Left => -2.0 * kpi * (lpi * t).sin(),
                    Side::Right => 2.0 * kpi * sign(k) * (lpi * t).sin(),
                })
            }
            Modes::Discrete(_) => None,
        }
    }

    /// Nodal values of `Σ_j c_j φ_j` for a discrete basis.
    pub fn synthesize(&self, coefficients: &[f64]) -> Option<Vec<f64>> {
        let d = self.discrete()?;
        let m = coefficients.len().min(self.len());
        let mut out = vec![0.0; d.vectors.nrows()];
        for j in 0..m {
            let c = coefficients[j];
            if c != 0.0 {
                for (o, v) in out.iter_mut().zip(d.vectors.column(j).iter()) {
                    *o += c * v;
                }
            }
        }
        Some(out)
    }

    /// `Σ_j c_j φ_j(x, y)` for an analytic basis.
    pub fn evaluate(&self, coefficients: &[f64], x: f64, y: f64) -> Option<f64> {
        let mut acc = 0.0;
        for (j, &c) in coefficients.iter().enumerate().take(self.len()) {
            acc += c * self.eval_mode(j, x, y)?;
        }
        Some(acc)
    }
}

/// Sides of the unit square; `Left`/`Right` double as the interval
/// endpoints. `t` parametrizes a side by the coordinate running along it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    /// Point of the unit square at parameter `t` along this side.
    pub fn point(self, t: f64) -> (f64, f64) {
        match self {
            Side::Bottom => (t, 0.0),
            Side::Top => (t, 1.0),
            Side::Left => (0.0, t),
            Side::Right => (1.0, t),
        }
    }
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn cosine_weight(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        2f64.sqrt()
    }
}

/// `λ_k = k²π²`, `φ_k = √2 sin(kπx)` on (0, 1).
pub fn analytic_interval_dirichlet_basis(m: usize) -> EigenBasis {
    let ks: Vec<usize> = (1..=m).collect();
    let eigenvalues = ks.iter().map(|&k| (k as f64 * PI).powi(2)).collect();
    EigenBasis { kind: BasisKind::Dirichlet, eigenvalues, modes: Modes::Interval(ks) }
}

fn sorted_square_modes(pairs: impl Iterator<Item = (usize, usize)>) -> (Vec<(usize, usize)>, Vec<f64>) {
    let mut pairs: Vec<(usize, usize)> = pairs.collect();
    // λ ∝ k² + l² is an exact integer, so the sort key has no rounding ties
    pairs.sort_by_key(|&(k, l)| (k * k + l * l, k, l));
    let eigenvalues = pairs.iter().map(|&(k, l)| PI * PI * (k * k + l * l) as f64).collect();
    (pairs, eigenvalues)
}

/// All modes `1 ≤ k, l ≤ kmax` of the Dirichlet Laplacian on `(0,1)²`,
/// sorted by eigenvalue and then lexicographically by `(k, l)`.
pub fn analytic_square_dirichlet_basis(kmax: usize) -> EigenBasis {
    let (pairs, eigenvalues) =
        sorted_square_modes((1..=kmax).flat_map(|k| (1..=kmax).map(move |l| (k, l))));
    EigenBasis { kind: BasisKind::Dirichlet, eigenvalues, modes: Modes::Square(pairs) }
}

/// All modes `0 ≤ k, l < kmax` of the Neumann Laplacian on `(0,1)²`.
pub fn analytic_square_neumann_basis(kmax: usize) -> EigenBasis {
    let (pairs, eigenvalues) =
        sorted_square_modes((0..kmax).flat_map(|k| (0..kmax).map(move |l| (k, l))));
    EigenBasis { kind: BasisKind::Neumann, eigenvalues, modes: Modes::Square(pairs) }
}

/// The `m` smallest Dirichlet modes of the unit square; the index range is
/// chosen so no mode below the cut is missing.
pub fn square_dirichlet_modes(m: usize) -> EigenBasis {
    let mut kmax = ((4.0 * m as f64 / PI).sqrt().ceil() as usize).max(1);
    loop {
        let basis = analytic_square_dirichlet_basis(kmax);
        // every mode outside the index box has k² + l² ≥ (kmax+1)² + 1
        let bound = PI * PI * (((kmax + 1) * (kmax + 1) + 1) as f64);
        if basis.len() >= m && basis.eigenvalues()[m - 1] < bound {
            return basis.truncate(m);
        }
        kmax += 2;
    }
}

/// The `m` smallest Neumann modes of the unit square.
pub fn square_neumann_modes(m: usize) -> EigenBasis {
    let mut kmax = ((4.0 * m as f64 / PI).sqrt().ceil() as usize).max(1) + 1;
    loop {
        let basis = analytic_square_neumann_basis(kmax);
        let bound = PI * PI * ((kmax * kmax) as f64);
        if basis.len() >= m && basis.eigenvalues()[m - 1] < bound {
            return basis.truncate(m);
        }
        kmax += 2;
    }
}

/// Smallest `m` eigenpairs of `A x = λ M x` on the P1 space, Dirichlet
/// nodes eliminated for [`BasisKind::Dirichlet`]. Eigenvectors are
/// M-orthonormal and returned as full nodal vectors.
///
/// The pencil is reduced to a standard symmetric problem through the
/// Cholesky factor of the mass matrix and solved densely.
pub fn fem_eigenbasis(space: Arc<P1Space>, kind: BasisKind, m: usize) -> Result<EigenBasis> {
    let free: Vec<usize> = match kind {
        BasisKind::Dirichlet => space.interior().to_vec(),
        BasisKind::Neumann => (0..space.mesh().node_count()).collect(),
    };
    if m == 0 || m > free.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {m} eigenpairs but only {} free degrees of freedom",
            free.len()
        )));
    }
    let a = space.stiffness().restrict(&free);
    let mass = space.mass().restrict(&free);
    let (values, vectors) = dense_generalized_eigen(&a, &mass)?;
    let n_nodes = space.mesh().node_count();
    let mut full = DMatrix::zeros(n_nodes, m);
    for j in 0..m {
        for (r, &node) in free.iter().enumerate() {
            full[(node, j)] = vectors[(r, j)];
        }
    }
    let eigenvalues: Vec<f64> = values[..m].to_vec();
    orthonormalize_clusters(&space.mass().restrict(&free), &free, &eigenvalues, &mut full);
    let max_residual = eigen_residual(space.stiffness(), space.mass(), &eigenvalues, &full, &free);
    if !(max_residual < EIGEN_RESIDUAL_TOLERANCE) {
        return Err(Error::EigenNotConverged {
            reason: "eigen-residual above tolerance".into(),
            residual: max_residual,
        });
    }
    Ok(EigenBasis {
        kind,
        eigenvalues,
        modes: Modes::Discrete(DiscreteModes { space, vectors: full, max_residual }),
    })
}

/// All eigenpairs of `A x = λ M x`, ascending, with `Xᵀ M X = I`.
pub fn dense_generalized_eigen(
    a: &SparseSymmetricMatrix,
    mass: &SparseSymmetricMatrix,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.dim();
    let chol = mass.to_dense().cholesky().ok_or_else(|| Error::EigenNotConverged {
        reason: "mass matrix is not positive definite".into(),
        residual: f64::NAN,
    })?;
    let l = chol.l();
    let a_dense = a.to_dense();
    let left = l
        .solve_lower_triangular(&a_dense)
        .ok_or_else(|| Error::EigenNotConverged { reason: "singular Cholesky factor".into(), residual: f64::NAN })?;
    let mut reduced = l
        .solve_lower_triangular(&left.transpose())
        .ok_or_else(|| Error::EigenNotConverged { reason: "singular Cholesky factor".into(), residual: f64::NAN })?;
    // restore exact symmetry lost to round-off
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (reduced[(i, j)] + reduced[(j, i)]);
            reduced[(i, j)] = v;
            reduced[(j, i)] = v;
        }
    }
    let eig = reduced.try_symmetric_eigen(1e-15, 0).ok_or_else(|| Error::EigenNotConverged {
        reason: "symmetric QR iteration did not converge".into(),
        residual: f64::NAN,
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut y = DMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        y.set_column(new, &eig.eigenvectors.column(old));
    }
    let x = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::EigenNotConverged { reason: "singular Cholesky factor".into(), residual: f64::NAN })?;
    Ok((values, x))
}

/// Modified Gram-Schmidt in the M-inner product within each cluster of
/// (nearly) equal eigenvalues.
fn orthonormalize_clusters(mass_free: &SparseSymmetricMatrix, free: &[usize], eigenvalues: &[f64], vectors: &mut DMatrix<f64>) {
    let m = eigenvalues.len();
    let gather = |v: &DMatrix<f64>, j: usize| -> Vec<f64> { free.iter().map(|&n| v[(n, j)]).collect() };
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m
            && (eigenvalues[end] - eigenvalues[end - 1]).abs() < CLUSTER_TOLERANCE * eigenvalues[end].abs().max(1.0)
        {
            end += 1;
        }
        for j in start..end {
            let mut vj = gather(vectors, j);
            for i in start..j {
                let vi = gather(vectors, i);
                let proj = mass_free.bilinear(&vi, &vj);
                for (a, b) in vj.iter_mut().zip(&vi) {
                    *a -= proj * b;
                }
            }
            let nrm = mass_free.bilinear(&vj, &vj).sqrt();
            for (r, &node) in free.iter().enumerate() {
                vectors[(node, j)] = vj[r] / nrm;
            }
        }
        start = end;
    }
}

fn eigen_residual(
    a: &SparseSymmetricMatrix,
    mass: &SparseSymmetricMatrix,
    eigenvalues: &[f64],
    vectors: &DMatrix<f64>,
    free: &[usize],
) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        let v: Vec<f64> = vectors.column(j).iter().copied().collect();
        let av = a.mul_vec(&v);
        let mv = mass.mul_vec(&v);
        let mut num = 0.0;
        let mut den_a = 0.0;
        let mut den_m = 0.0;
        for &i in free {
            num += (av[i] - lambda * mv[i]).powi(2);
            den_a += av[i] * av[i];
            den_m += mv[i] * mv[i];
        }
        let den = den_a.sqrt() + lambda.abs().max(1.0) * den_m.sqrt();
        if den > 0.0 {
            worst = worst.max(num.sqrt() / den);
        }
    }
    worst
}
