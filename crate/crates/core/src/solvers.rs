//! Full solves with nonzero boundary data: `u_h = w_h + v_h` where `v_h`
//! carries the boundary condition and `w_h` solves a zero-boundary problem.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_order, Error, Result};
use crate::extension::{
    solve_truncated_extension, square_cylinder, ExtensionMethod, ExtensionProblem, ExtensionSolution,
};
use crate::fem2d::{boundary_load_vector, load_vector, lift_from_trace, l2_boundary_projection, solve_neumann_lift, P1Space};
use crate::functions::{BoundaryDatum, Field, FunctionSpec};
use crate::mesh::{uniform_square_mesh, CylinderMesh, DEFAULT_GRADING_SAFETY};
use crate::sparse::{pcg, LinearSolver};
use crate::spectral::{fem_eigenbasis, BasisKind, EigenBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    Dirichlet,
    Neumann,
}

pub const DEFAULT_SPECTRAL_MODES: usize = 200;

/// Tail indicator above which a Neumann solve reports a warning.
pub const TAIL_TOLERANCE: f64 = 1e-6;

fn default_safety() -> f64 {
    DEFAULT_GRADING_SAFETY
}

fn default_modes() -> usize {
    DEFAULT_SPECTRAL_MODES
}

/// A problem file: `(-Δ)^s u = f` in the unit square with Dirichlet trace or
/// Neumann flux `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractionalProblemSpec {
    pub kind: ProblemKind,
    pub s: f64,
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    /// Cells per side of the base mesh.
    #[serde(rename = "M")]
    pub level: usize,
    #[serde(default = "default_safety")]
    pub gamma_safety: f64,
    #[serde(rename = "Y", default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    /// Number of Neumann eigenpairs used by the spectral solve.
    #[serde(default = "default_modes")]
    pub m: usize,
}

impl FractionalProblemSpec {
    pub fn validate(&self) -> Result<()> {
        check_order(self.s)?;
        if self.level < 2 {
            return Err(Error::Config(format!("M = {} must be at least 2", self.level)));
        }
        if !(self.gamma_safety > 1.0) {
            return Err(Error::Config(format!("gamma_safety = {} must exceed 1", self.gamma_safety)));
        }
        if let Some(y) = self.height {
            if !(y > 0.0) {
                return Err(Error::Config(format!("Y = {y} must be positive")));
            }
        }
        if self.kind == ProblemKind::Neumann && self.m < 2 {
            return Err(Error::Config(format!("m = {} must be at least 2", self.m)));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone)]
pub struct DirichletSolution {
    pub problem: ExtensionProblem,
    pub extension: ExtensionSolution,
    /// Discrete harmonic lifting `v_h` with trace `Πg`.
    pub lift: Vec<f64>,
    /// `u_h = W_h(·,0) + v_h` at the base nodes.
    pub values: Vec<f64>,
}

impl DirichletSolution {
    pub fn cylinder(&self) -> &CylinderMesh {
        self.problem.cylinder()
    }
}

/// Solves the Dirichlet problem on a prepared cylinder; `space` must be the
/// P1 space of the cylinder base.
pub fn solve_dirichlet_composite(
    s: f64,
    f: Field,
    g: &BoundaryDatum,
    space: &P1Space,
    cylinder: Arc<CylinderMesh>,
    method: &ExtensionMethod,
) -> Result<DirichletSolution> {
    if cylinder.base().node_count() != space.mesh().node_count() {
        return Err(Error::InvalidArgument("cylinder base and P1 space differ".into()));
    }
    let problem = ExtensionProblem::new(s, cylinder, f)?;
    let extension = solve_truncated_extension(&problem, method)?;
    let trace = l2_boundary_projection(g, space.mesh())?;
    let lift = lift_from_trace(space, &trace, LinearSolver::default())?.values;
    let values = extension.trace.iter().zip(&lift).map(|(a, b)| a + b).collect();
    Ok(DirichletSolution { problem, extension, lift, values })
}

/// Builds the mesh, the eigenbasis for the modal extension solver and solves.
pub fn solve_dirichlet_problem(spec: &FractionalProblemSpec) -> Result<DirichletSolution> {
    spec.validate()?;
    if spec.kind != ProblemKind::Dirichlet {
        return Err(Error::Config("expected a Dirichlet problem".into()));
    }
    let cylinder = Arc::new(square_cylinder(spec.level, spec.s, spec.gamma_safety, spec.height)?);
    let space = Arc::new(P1Space::new(cylinder.base().clone()));
    let interior = space.interior().len();
    let basis = fem_eigenbasis(space.clone(), BasisKind::Dirichlet, interior)?;
    let g = BoundaryDatum::function(spec.g.to_field());
    solve_dirichlet_composite(
        spec.s,
        spec.f.to_field(),
        &g,
        &space,
        cylinder,
        &ExtensionMethod::Modal(Arc::new(basis)),
    )
}

#[derive(Debug, Clone)]
pub struct NeumannSolution {
    /// Zero-mean part `w_h`.
    pub zero_mean: Vec<f64>,
    /// Lifting `v_h` with `-Δv = |Ω|⁻¹∫f`, `∂_ν v = g`.
    pub lift: Vec<f64>,
    pub values: Vec<f64>,
    /// Coefficients `μ_k^{-s} f̃_k` of `w_h`; the first entry (constant mode) is zero.
    pub coefficients: Vec<f64>,
    /// `μ_m^{-s} ‖f̃_tail‖`, bounding the L² truncation error of `w_h`.
    pub tail_indicator: f64,
    pub warning: Option<String>,
}

/// Solves the Neumann problem with the first `basis.len()` discrete Neumann
/// eigenpairs of `space`.
pub fn solve_neumann_composite(
    s: f64,
    f: &dyn Fn(f64, f64) -> f64,
    g: &dyn Fn(f64, f64) -> f64,
    space: &P1Space,
    basis: &EigenBasis,
) -> Result<NeumannSolution> {
    check_order(s)?;
    let modes = basis
        .discrete()
        .filter(|d| basis.kind() == BasisKind::Neumann && d.vectors.nrows() == space.mesh().node_count())
        .ok_or_else(|| Error::InvalidArgument("Neumann solve needs a discrete Neumann basis of the mesh".into()))?;
    let mesh = space.mesh();
    let area = mesh.domain_area();
    let mut load = load_vector(mesh, f);
    let f_integral: f64 = load.iter().sum();
    let g_integral: f64 = boundary_load_vector(mesh, g).iter().sum();
    let lift = solve_neumann_lift(space, g, f_integral / area)?;

    // right-hand side f + |Ω|⁻¹∫g tested against the hat functions
    let ones = vec![1.0; mesh.node_count()];
    let lumped = space.mass().mul_vec(&ones);
    for (l, w) in load.iter_mut().zip(&lumped) {
        *l += g_integral / area * w;
    }
    let m = basis.len();
    let projections: Vec<f64> =
        (0..m).map(|k| modes.vectors.column(k).iter().zip(&load).map(|(a, b)| a * b).sum()).collect();
    let coefficients: Vec<f64> = basis
        .eigenvalues()
        .iter()
        .zip(&projections)
        .enumerate()
        .map(|(k, (&mu, &c))| if k == 0 || mu <= 0.0 { 0.0 } else { mu.powf(-s) * c })
        .collect();
    let mut zero_mean = vec![0.0; mesh.node_count()];
    for (k, &c) in coefficients.iter().enumerate() {
        if c != 0.0 {
            for (z, &phi) in zero_mean.iter_mut().zip(modes.vectors.column(k).iter()) {
                *z += c * phi;
            }
        }
    }

    // ‖f̃‖² = Fᵀ M⁻¹ F over the whole discrete space
    let mut mf = vec![0.0; load.len()];
    pcg(space.mass(), &load, &mut mf, 1e-14, 10 * load.len() + 100, None)?;
    let total: f64 = load.iter().zip(&mf).map(|(a, b)| a * b).sum();
    let captured: f64 = projections.iter().map(|c| c * c).sum();
    let tail = (total - captured).max(0.0).sqrt();
    let mu_m = basis.eigenvalues()[m - 1];
    let tail_indicator = if m == mesh.node_count() { 0.0 } else { mu_m.powf(-s) * tail };
    let warning = (tail_indicator > TAIL_TOLERANCE).then(|| {
        format!("spectral tail indicator {tail_indicator:.3e} exceeds {TAIL_TOLERANCE:e}; increase m")
    });
    let values = zero_mean.iter().zip(&lift).map(|(a, b)| a + b).collect();
    Ok(NeumannSolution { zero_mean, lift, values, coefficients, tail_indicator, warning })
}

pub fn solve_neumann_problem(spec: &FractionalProblemSpec) -> Result<(Arc<P1Space>, NeumannSolution)> {
    spec.validate()?;
    if spec.kind != ProblemKind::Neumann {
        return Err(Error::Config("expected a Neumann problem".into()));
    }
    let space = Arc::new(P1Space::new(uniform_square_mesh(spec.level)?));
    let m = spec.m.min(space.mesh().node_count());
    let basis = fem_eigenbasis(space.clone(), BasisKind::Neumann, m)?;
    let f = spec.f.to_field();
    let g = spec.g.to_field();
    let solution = solve_neumann_composite(spec.s, f.as_ref(), g.as_ref(), &space, &basis)?;
    Ok((space, solution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::field;
    use std::f64::consts::PI;

    fn spec(kind: ProblemKind, f: FunctionSpec, g: FunctionSpec, level: usize) -> FractionalProblemSpec {
        FractionalProblemSpec { kind, s: 0.5, f, g, level, gamma_safety: 1.1, height: None, m: 200 }
    }

    #[test]
    fn parses_problem_file() {
        let text = r#"{"kind":"Dirichlet","s":0.3,"f":{"type":"sine_product","amplitude":1.0,"k":2,"l":2},
            "g":{"type":"affine","c":0.0,"ax":1.0,"ay":1.0},"M":4}"#;
        let p = FractionalProblemSpec::from_json(text).unwrap();
        assert_eq!(p.level, 4);
        assert_eq!(p.m, 200);
        assert_eq!(p.gamma_safety, DEFAULT_GRADING_SAFETY);
        assert!(matches!(
            FractionalProblemSpec::from_json(&text.replace("0.3", "1.3")),
            Err(Error::InvalidOrder(_))
        ));
        assert!(matches!(FractionalProblemSpec::from_json("{}"), Err(Error::Config(_))));
    }

    #[test]
    fn affine_harmonic_data_is_reproduced() {
        let p = spec(ProblemKind::Dirichlet, FunctionSpec::Zero, FunctionSpec::Affine { c: 0.0, ax: 1.0, ay: 1.0 }, 6);
        let sol = solve_dirichlet_problem(&p).unwrap();
        let mesh = sol.cylinder().base();
        for (i, &[x, y]) in mesh.nodes().iter().enumerate() {
            assert!((sol.values[i] - (x + y)).abs() < 1e-10);
        }
    }

    #[test]
    fn boundary_values_equal_projected_datum() {
        let f = FunctionSpec::SineProduct { amplitude: 1.0, k: 2, l: 2 };
        let g = FunctionSpec::Polynomial { terms: vec![(1.0, 2, 0), (-1.0, 0, 2), (0.5, 1, 1)] };
        let p = spec(ProblemKind::Dirichlet, f, g.clone(), 6);
        let sol = solve_dirichlet_problem(&p).unwrap();
        let mesh = sol.cylinder().base();
        let proj = l2_boundary_projection(&BoundaryDatum::function(g.to_field()), mesh).unwrap();
        for i in mesh.boundary_nodes() {
            assert_eq!(sol.values[i], proj[i]);
        }
    }

    #[test]
    fn neumann_zero_data_gives_zero() {
        let p = spec(ProblemKind::Neumann, FunctionSpec::Zero, FunctionSpec::Zero, 4);
        let (_, sol) = solve_neumann_problem(&p).unwrap();
        assert!(sol.values.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn neumann_incompatible_data_is_rejected() {
        let p = spec(ProblemKind::Neumann, FunctionSpec::Constant { value: 1.0 }, FunctionSpec::Zero, 4);
        assert!(matches!(solve_neumann_problem(&p), Err(Error::CompatibilityViolation { .. })));
    }

    #[test]
    fn neumann_zero_mean_part_has_zero_mean() {
        let space = Arc::new(P1Space::new(uniform_square_mesh(8).unwrap()));
        let basis = fem_eigenbasis(space.clone(), BasisKind::Neumann, 40).unwrap();
        let f = field(|x, y| x * x - y + 1.0 / 6.0);
        let sol = solve_neumann_composite(0.4, f.as_ref(), &|_, _| 0.0, &space, &basis).unwrap();
        assert!(space.integral(&sol.zero_mean).abs() < 1e-12);
    }

    #[test]
    fn neumann_cosine_mode() {
        let s = 0.6;
        let space = Arc::new(P1Space::new(uniform_square_mesh(16).unwrap()));
        let basis = fem_eigenbasis(space.clone(), BasisKind::Neumann, 50).unwrap();
        let f = |x: f64, _: f64| 2.0 * (PI * x).cos();
        let sol = solve_neumann_composite(s, &f, &|_, _| 0.0, &space, &basis).unwrap();
        let scale = (PI * PI).powf(-s);
        let err = space
            .mesh()
            .nodes()
            .iter()
            .zip(&sol.values)
            .map(|(&[x, y], &u)| (u - scale * f(x, y)).abs())
            .fold(0.0, f64::max);
        assert!(err < 5e-3, "max nodal error {err}");
    }
}
