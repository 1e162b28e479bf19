use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::basis::{cosine_weight, BasisKind, DiscreteModes, EigenBasis, Modes, Side};
use super::SpectralCoefficients;
use crate::error::{Error, Result};
use crate::fem2d::{assemble_boundary_mass, boundary_load_vector, load_vector};
use crate::quadrature::resolving_rule;

/// A function to expand: closed form, or nodal values on the mesh of a
/// discrete basis. On the interval the second coordinate is always 0.
#[derive(Clone, Copy)]
pub enum Sample<'a> {
    Function(&'a dyn Fn(f64, f64) -> f64),
    Nodal(&'a [f64]),
}

/// Boundary data: the trace for Dirichlet bases, the conormal derivative for
/// Neumann bases.
#[derive(Clone, Copy)]
pub enum BoundaryInput<'a> {
    Function(&'a dyn Fn(f64, f64) -> f64),
    Nodal(&'a [f64]),
}

/// Expands `u` in `basis`.
///
/// Analytic bases integrate with composite 8-point Gauss-Legendre resolving
/// the highest mode; discrete bases use the 7-point triangle rule (closed
/// form input) or the mass matrix (nodal input). The Dirichlet boundary part
/// of a discrete basis uses the variational normal derivative
/// `∫_∂Ω ∂_ν φ_k v = ∫_Ω ∇φ_k·∇v − λ_k ∫_Ω φ_k v`.
///
/// For Dirichlet bases `boundary` overrides the trace of `u`; for Neumann
/// bases it is the conormal derivative and defaults to zero.
pub fn expand(u: Sample<'_>, basis: &EigenBasis, boundary: Option<BoundaryInput<'_>>) -> Result<SpectralCoefficients> {
    let (interior, bnd) = match basis.modes() {
        Modes::Interval(ks) => expand_interval(u, ks, boundary)?,
        Modes::Square(kl) => expand_square(u, basis.kind(), kl, boundary)?,
        Modes::Discrete(d) => expand_discrete(u, basis, d, boundary)?,
    };
    SpectralCoefficients::new(basis, interior, bnd)
}

fn closed_form<'a>(u: Sample<'a>) -> Result<&'a dyn Fn(f64, f64) -> f64> {
    match u {
        Sample::Function(f) => Ok(f),
        Sample::Nodal(_) => Err(Error::InvalidArgument("analytic bases need closed-form input".into())),
    }
}

fn closed_form_boundary<'a>(b: BoundaryInput<'a>) -> Result<&'a dyn Fn(f64, f64) -> f64> {
    match b {
        BoundaryInput::Function(f) => Ok(f),
        BoundaryInput::Nodal(_) => Err(Error::InvalidArgument("analytic bases need closed-form boundary data".into())),
    }
}

fn expand_interval(u: Sample<'_>, ks: &[usize], boundary: Option<BoundaryInput<'_>>) -> Result<(Vec<f64>, Vec<f64>)> {
    let f = closed_form(u)?;
    let kmax = ks.iter().copied().max().unwrap_or(1);
    let rule = resolving_rule(kmax);
    let values: Vec<(f64, f64)> = rule.iter().map(|&(x, w)| (x, w * f(x, 0.0))).collect();
    let sq2 = 2f64.sqrt();
    let interior = ks
        .iter()
        .map(|&k| sq2 * values.iter().map(|&(x, fw)| fw * (k as f64 * PI * x).sin()).sum::<f64>())
        .collect();
    let trace: &dyn Fn(f64, f64) -> f64 = match boundary {
        Some(b) => closed_form_boundary(b)?,
        None => f,
    };
    let (u0, u1) = (trace(0.0, 0.0), trace(1.0, 0.0));
    let bnd = ks
        .iter()
        .map(|&k| {
            let kpi = k as f64 * PI;
            sq2 * kpi * (-u0 + u1 * if k % 2 == 0 { 1.0 } else { -1.0 })
        })
        .collect();
    Ok((interior, bnd))
}

/// Weighted mode tables `w_i · b_k(x_i)` for `k = 0..=kmax`, `b` sine or cosine.
fn mode_table(rule: &[(f64, f64)], kmax: usize, sine: bool) -> DMatrix<f64> {
    DMatrix::from_fn(kmax + 1, rule.len(), |k, i| {
        let (x, w) = rule[i];
        let arg = k as f64 * PI * x;
        w * if sine { arg.sin() } else { arg.cos() }
    })
}

fn expand_square(
    u: Sample<'_>,
    kind: BasisKind,
    kl: &[(usize, usize)],
    boundary: Option<BoundaryInput<'_>>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let f = closed_form(u)?;
    let kmax = kl.iter().map(|&(k, l)| k.max(l)).max().unwrap_or(1);
    let rule = resolving_rule(kmax.max(1));
    let q = rule.len();
    let sine = kind == BasisKind::Dirichlet;
    let table = mode_table(&rule, kmax, sine);
    let values = DMatrix::from_fn(q, q, |i, j| f(rule[i].0, rule[j].0));
    // C[k][l] = Σ_ij w_i w_j b_k(x_i) u(x_i, y_j) b_l(y_j)
    let c = &table * values * table.transpose();
    let scale = |k: usize, l: usize| match kind {
        BasisKind::Dirichlet => 2.0,
        BasisKind::Neumann => cosine_weight(k) * cosine_weight(l),
    };
    let interior = kl.iter().map(|&(k, l)| scale(k, l) * c[(k, l)]).collect();

    // one-dimensional side integrals of the boundary function against the modes
    let side_integrals = |g: &dyn Fn(f64, f64) -> f64, side: Side| -> Vec<f64> {
        let gv: Vec<f64> = rule
            .iter()
            .map(|&(t, _)| {
                let (x, y) = side.point(t);
                g(x, y)
            })
            .collect();
        (0..=kmax).map(|k| table.row(k).iter().zip(&gv).map(|(a, b)| a * b).sum()).collect()
    };
    let sgn = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let bnd = match kind {
        BasisKind::Dirichlet => {
            let g: &dyn Fn(f64, f64) -> f64 = match boundary {
                Some(b) => closed_form_boundary(b)?,
                None => f,
            };
            let [bot, right, top, left] = Side::ALL.map(|s| side_integrals(g, s));
            kl.iter()
                .map(|&(k, l)| {
                    let (kf, lf) = (k as f64, l as f64);
                    2.0 * PI * (-lf * bot[k] + lf * sgn(l) * top[k] - kf * left[l] + kf * sgn(k) * right[l])
                })
                .collect()
        }
        BasisKind::Neumann => match boundary {
            None => vec![0.0; kl.len()],
            Some(b) => {
                let h = closed_form_boundary(b)?;
                let [bot, right, top, left] = Side::ALL.map(|s| side_integrals(h, s));
                kl.iter()
                    .map(|&(k, l)| {
                        let w = cosine_weight(k) * cosine_weight(l);
                        w * (bot[k] + sgn(l) * top[k] + left[l] + sgn(k) * right[l])
                    })
                    .collect()
            }
        },
    };
    Ok((interior, bnd))
}

/// Variational normal derivatives `(Aφ_k − λ_k Mφ_k)` as nodal vectors; only
/// boundary rows are nonzero.
pub(crate) fn discrete_normal_derivatives(basis: &EigenBasis, d: &DiscreteModes) -> Vec<Vec<f64>> {
    let mesh = d.space.mesh();
    (0..basis.len())
        .map(|j| {
            let v: Vec<f64> = d.vectors.column(j).iter().copied().collect();
            let av = d.space.stiffness().mul_vec(&v);
            let mv = d.space.mass().mul_vec(&v);
            let lambda = basis.eigenvalues()[j];
            (0..mesh.node_count())
                .map(|i| if mesh.is_boundary(i) { av[i] - lambda * mv[i] } else { 0.0 })
                .collect()
        })
        .collect()
}

fn project_columns(d: &DiscreteModes, m: usize, weights: &[f64]) -> Vec<f64> {
    (0..m).map(|j| d.vectors.column(j).iter().zip(weights).map(|(a, b)| a * b).sum()).collect()
}

fn expand_discrete(
    u: Sample<'_>,
    basis: &EigenBasis,
    d: &DiscreteModes,
    boundary: Option<BoundaryInput<'_>>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mesh = d.space.mesh();
    let n = mesh.node_count();
    let m = basis.len();
    let check = |v: &[f64]| {
        if v.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("nodal input has {} values for {n} nodes", v.len())))
        }
    };
    let weights = match u {
        Sample::Function(f) => load_vector(mesh, f),
        Sample::Nodal(v) => {
            check(v)?;
            d.space.mass().mul_vec(v)
        }
    };
    let interior = project_columns(d, m, &weights);
    let bnd = match basis.kind() {
        BasisKind::Dirichlet => {
            let trace: Vec<f64> = match (boundary, u) {
                (Some(BoundaryInput::Nodal(v)), _) | (None, Sample::Nodal(v)) => {
                    check(v)?;
                    v.to_vec()
                }
                (Some(BoundaryInput::Function(g)), _) | (None, Sample::Function(g)) => mesh.interpolate(g),
            };
            discrete_normal_derivatives(basis, d)
                .iter()
                .map(|r| mesh.boundary_nodes().iter().map(|&i| r[i] * trace[i]).sum())
                .collect()
        }
        BasisKind::Neumann => match boundary {
            None => vec![0.0; m],
            Some(BoundaryInput::Function(h)) => project_columns(d, m, &boundary_load_vector(mesh, h)),
            Some(BoundaryInput::Nodal(h)) => {
                check(h)?;
                project_columns(d, m, &assemble_boundary_mass(mesh).mul_vec(h))
            }
        },
    };
    Ok((interior, bnd))
}

/// `∫_∂Ω u ∂_ν w` for `w = Σ_k w_k φ_k`, evaluating `∂_ν w` pointwise on the
/// boundary (analytic bases) or variationally (discrete bases).
pub fn boundary_pairing(basis: &EigenBasis, u: &dyn Fn(f64, f64) -> f64, w: &[f64]) -> Result<f64> {
    if basis.kind() != BasisKind::Dirichlet {
        return Err(Error::InvalidArgument("boundary pairing needs a Dirichlet basis".into()));
    }
    let m = w.len().min(basis.len());
    match basis.modes() {
        Modes::Interval(_) => {
            let mut acc = 0.0;
            for (side, x) in [(Side::Left, 0.0), (Side::Right, 1.0)] {
                let dw: f64 = (0..m).map(|j| w[j] * basis.normal_derivative(j, side, x).unwrap()).sum();
                acc += u(x, 0.0) * dw;
            }
            Ok(acc)
        }
        Modes::Square(kl) => {
            let kmax = kl[..m].iter().map(|&(k, l)| k.max(l)).max().unwrap_or(1);
            let rule = resolving_rule(kmax);
            let mut acc = 0.0;
            for side in Side::ALL {
                for &(t, wt) in &rule {
                    let dw: f64 = (0..m).map(|j| w[j] * basis.normal_derivative(j, side, t).unwrap()).sum();
                    let (x, y) = side.point(t);
                    acc += wt * u(x, y) * dw;
                }
            }
            Ok(acc)
        }
        Modes::Discrete(d) => {
            let mesh = d.space.mesh();
            let normals = discrete_normal_derivatives(&basis.truncate(m), d);
            let trace = mesh.interpolate(u);
            let mut acc = 0.0;
            for (j, r) in normals.iter().enumerate() {
                acc += w[j] * mesh.boundary_nodes().iter().map(|&i| r[i] * trace[i]).sum::<f64>();
            }
            Ok(acc)
        }
    }
}
