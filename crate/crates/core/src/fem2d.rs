//! P1 finite elements on the base domain: assembly, the L²-projected
//! Dirichlet lifting and the mean-zero Neumann lifting.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functions::{BoundaryDatum, BoundaryValues, Field};
use crate::mesh::TriMesh;
use crate::quadrature::edge_rule;
use crate::sparse::{pcg, solve_spd, CgReport, LinearSolver, SparseSymmetricMatrix, SymmetricBuilder};

const ASSEMBLY_CHUNK: usize = 512;

fn assemble_elementwise(
    mesh: &TriMesh,
    local: impl Fn(usize) -> [[f64; 3]; 3] + Sync,
) -> SparseSymmetricMatrix {
    let n = mesh.node_count();
    let nt = mesh.triangle_count();
    let chunks: Vec<SymmetricBuilder> = (0..nt)
        .collect::<Vec<_>>()
        .par_chunks(ASSEMBLY_CHUNK)
        .map(|ts| {
            let mut b = SymmetricBuilder::new(n);
            for &t in ts {
                let ke = local(t);
                let nodes = mesh.triangles()[t];
                for a in 0..3 {
                    for c in 0..3 {
                        b.add(nodes[a], nodes[c], ke[a][c]);
                    }
                }
            }
            b
        })
        .collect();
    // merge in chunk order so the result does not depend on scheduling
    let mut all = SymmetricBuilder::new(n);
    for c in chunks {
        all.merge(c);
    }
    all.build()
}

/// Element stiffness `area · ∇φ_a · ∇φ_c`.
pub fn element_stiffness(mesh: &TriMesh, t: usize) -> [[f64; 3]; 3] {
    let g = mesh.hat_gradients(t);
    let area = mesh.signed_area(t);
    let mut ke = [[0.0; 3]; 3];
    for a in 0..3 {
        for c in 0..3 {
            ke[a][c] = area * (g[a][0] * g[c][0] + g[a][1] * g[c][1]);
        }
    }
    ke
}

/// Element mass `area/12 · (1 + δ_ac)`.
pub fn element_mass(mesh: &TriMesh, t: usize) -> [[f64; 3]; 3] {
    let area = mesh.signed_area(t);
    let mut me = [[area / 12.0; 3]; 3];
    for (a, row) in me.iter_mut().enumerate() {
        row[a] = area / 6.0;
    }
    me
}

pub fn assemble_stiffness(mesh: &TriMesh) -> SparseSymmetricMatrix {
    assemble_elementwise(mesh, |t| element_stiffness(mesh, t))
}

pub fn assemble_mass(mesh: &TriMesh) -> SparseSymmetricMatrix {
    assemble_elementwise(mesh, |t| element_mass(mesh, t))
}

/// Load vector `∫_Ω f φ_i` with the 7-point rule.
pub fn load_vector(mesh: &TriMesh, f: &dyn Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut b = vec![0.0; mesh.node_count()];
    mesh.for_each_quadrature_point(1, |t, bary, x, y, w| {
        let fv = f(x, y) * w;
        let nodes = mesh.triangles()[t];
        for a in 0..3 {
            b[nodes[a]] += fv * bary[a];
        }
    });
    b
}

/// Boundary load `∫_∂Ω g φ_i` with 4-point Gauss per edge.
pub fn boundary_load_vector(mesh: &TriMesh, g: &dyn Fn(f64, f64) -> f64) -> Vec<f64> {
    let rule = edge_rule();
    let mut b = vec![0.0; mesh.node_count()];
    for &[p, q] in mesh.boundary_edges() {
        let (a, c) = (mesh.nodes()[p], mesh.nodes()[q]);
        let len = ((c[0] - a[0]).powi(2) + (c[1] - a[1]).powi(2)).sqrt();
        for &(t, w) in &rule {
            let x = a[0] + t * (c[0] - a[0]);
            let y = a[1] + t * (c[1] - a[1]);
            let gv = g(x, y) * w * len;
            b[p] += gv * (1.0 - t);
            b[q] += gv * t;
        }
    }
    b
}

/// Mass matrix of the P1 trace space on the boundary loop, indexed by mesh
/// node (rows of interior nodes are empty).
pub fn assemble_boundary_mass(mesh: &TriMesh) -> SparseSymmetricMatrix {
    let mut b = SymmetricBuilder::new(mesh.node_count());
    for &[p, q] in mesh.boundary_edges() {
        let (a, c) = (mesh.nodes()[p], mesh.nodes()[q]);
        let len = ((c[0] - a[0]).powi(2) + (c[1] - a[1]).powi(2)).sqrt();
        b.add(p, p, len / 3.0);
        b.add(q, q, len / 3.0);
        b.add(p, q, len / 6.0);
        b.add(q, p, len / 6.0);
    }
    b.build()
}

/// P1 discretization of the base domain with its assembled forms.
#[derive(Debug, Clone)]
pub struct P1Space {
    mesh: TriMesh,
    stiffness: SparseSymmetricMatrix,
    mass: SparseSymmetricMatrix,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    stiffness_interior: SparseSymmetricMatrix,
}

impl P1Space {
    pub fn new(mesh: TriMesh) -> Self {
        let stiffness = assemble_stiffness(&mesh);
        let mass = assemble_mass(&mesh);
        let interior = mesh.interior_nodes();
        let boundary = mesh.boundary_nodes();
        let stiffness_interior = stiffness.restrict(&interior);
        Self { mesh, stiffness, mass, interior, boundary, stiffness_interior }
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn stiffness(&self) -> &SparseSymmetricMatrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &SparseSymmetricMatrix {
        &self.mass
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn stiffness_interior(&self) -> &SparseSymmetricMatrix {
        &self.stiffness_interior
    }

    /// `∫_Ω u_h` for nodal values `u`.
    pub fn integral(&self, u: &[f64]) -> f64 {
        self.mass.mul_vec(u).iter().sum()
    }

    /// Largest Galerkin residual `|∫ ∇u_h·∇φ_i|` over interior hat functions.
    pub fn interior_residual(&self, u: &[f64]) -> f64 {
        let r = self.stiffness.mul_vec(u);
        self.interior.iter().map(|&i| r[i].abs()).fold(0.0, f64::max)
    }
}

/// L²(∂Ω) projection of `g` onto the P1 trace space. Returns a full nodal
/// vector whose interior entries are zero.
pub fn l2_boundary_projection(g: &BoundaryDatum, mesh: &TriMesh) -> Result<Vec<f64>> {
    match &g.values {
        BoundaryValues::Nodal(values) => {
            if values.len() != mesh.node_count() {
                return Err(Error::InvalidArgument(format!(
                    "nodal boundary datum has {} values for {} nodes",
                    values.len(),
                    mesh.node_count()
                )));
            }
            Ok((0..mesh.node_count())
                .map(|i| if mesh.is_boundary(i) { values[i] } else { 0.0 })
                .collect())
        }
        BoundaryValues::Function(f) => project_function(f, mesh),
    }
}

fn project_function(g: &Field, mesh: &TriMesh) -> Result<Vec<f64>> {
    let boundary = mesh.boundary_nodes();
    let mass = assemble_boundary_mass(mesh).restrict(&boundary);
    let load = boundary_load_vector(mesh, g.as_ref());
    let rhs: Vec<f64> = boundary.iter().map(|&i| load[i]).collect();
    let mut x = vec![0.0; boundary.len()];
    pcg(&mass, &rhs, &mut x, 1e-14, 10 * boundary.len() + 100, None)?;
    let mut out = vec![0.0; mesh.node_count()];
    for (k, &i) in boundary.iter().enumerate() {
        out[i] = x[k];
    }
    Ok(out)
}

/// Discrete harmonic lifting with the projected trace.
#[derive(Debug, Clone)]
pub struct LiftSolution {
    pub values: Vec<f64>,
    pub report: Option<CgReport>,
}

/// Finds `v_h ∈ V` with `v_h|∂Ω = Π g` and `∫ ∇v_h·∇φ = 0` for all
/// `φ ∈ V₀`.
pub fn solve_dirichlet_lift(space: &P1Space, g: &BoundaryDatum, solver: LinearSolver) -> Result<LiftSolution> {
    let trace = l2_boundary_projection(g, space.mesh())?;
    lift_from_trace(space, &trace, solver)
}

/// Harmonic lifting of a given nodal trace (interior entries ignored).
pub fn lift_from_trace(space: &P1Space, trace: &[f64], solver: LinearSolver) -> Result<LiftSolution> {
    let mut full = trace.to_vec();
    for &i in space.interior() {
        full[i] = 0.0;
    }
    let coupling = space.stiffness().mul_vec(&full);
    let rhs: Vec<f64> = space.interior().iter().map(|&i| -coupling[i]).collect();
    let (x, report) = match solver {
        LinearSolver::Cg { rel_tol, max_iter } => {
            let mut x = vec![0.0; rhs.len()];
            let report = pcg(space.stiffness_interior(), &rhs, &mut x, rel_tol, max_iter, None)?;
            (x, Some(report))
        }
        LinearSolver::DenseCholesky => (solve_spd(space.stiffness_interior(), &rhs, solver)?, None),
    };
    for (k, &i) in space.interior().iter().enumerate() {
        full[i] = x[k];
    }
    Ok(LiftSolution { values: full, report })
}

pub const COMPATIBILITY_TOLERANCE: f64 = 1e-10;

/// Weak solution of `-Δv = fbar` in Ω, `∂_ν v = g` on ∂Ω with `∫_Ω v = 0`.
///
/// Fails with [`Error::CompatibilityViolation`] unless
/// `|Ω|·fbar + ∫_∂Ω g` vanishes to [`COMPATIBILITY_TOLERANCE`].
pub fn solve_neumann_lift(space: &P1Space, g: &dyn Fn(f64, f64) -> f64, fbar: f64) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let mut rhs = boundary_load_vector(mesh, g);
    let ones = vec![1.0; mesh.node_count()];
    let lumped = space.mass().mul_vec(&ones);
    for (r, m) in rhs.iter_mut().zip(&lumped) {
        *r += fbar * m;
    }
    let residual: f64 = rhs.iter().sum();
    if residual.abs() > COMPATIBILITY_TOLERANCE {
        return Err(Error::CompatibilityViolation { residual, tolerance: COMPATIBILITY_TOLERANCE });
    }
    // remove the round-off component along the kernel
    let n = rhs.len() as f64;
    rhs.iter_mut().for_each(|r| *r -= residual / n);
    let project = |v: &mut [f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    };
    let mut x = vec![0.0; mesh.node_count()];
    pcg(space.stiffness(), &rhs, &mut x, 1e-12, 20_000, Some(&project))?;
    let mean = space.integral(&x) / mesh.domain_area();
    x.iter_mut().for_each(|v| *v -= mean);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{corner_singular, field};
    use crate::mesh::{rectangle_mesh, uniform_square_mesh};

    #[test]
    fn reference_triangle_stiffness() {
        let mesh = rectangle_mesh([0.0, 1.0, 0.0, 1.0], 1, 1).unwrap();
        // triangle (0,0),(1,0),(1,1) is a right triangle with legs 1, right angle at (1,0)
        let ke = element_stiffness(&mesh, 0);
        let expected = [[0.5, -0.5, 0.0], [-0.5, 1.0, -0.5], [0.0, -0.5, 0.5]];
        for a in 0..3 {
            for c in 0..3 {
                assert!((ke[a][c] - expected[a][c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn right_angle_vertex_ordering_matches_hand_integration() {
        // the hand-integrated matrix ½[[2,-1,-1],[-1,1,0],[-1,0,1]] has the right
        // angle at the first vertex; permute the mesh triangle to that ordering
        let mesh = rectangle_mesh([0.0, 1.0, 0.0, 1.0], 1, 1).unwrap();
        let ke = element_stiffness(&mesh, 0);
        let perm = [1, 2, 0];
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for a in 0..3 {
            for c in 0..3 {
                assert!((ke[perm[a]][perm[c]] - expected[a][c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn stiffness_kernel_and_mass_total() {
        let mesh = uniform_square_mesh(6).unwrap();
        let a = assemble_stiffness(&mesh);
        let m = assemble_mass(&mesh);
        let ones = vec![1.0; mesh.node_count()];
        assert!(a.mul_vec(&ones).iter().all(|v| v.abs() < 1e-13));
        let total: f64 = m.mul_vec(&ones).iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projection_reproduces_traces() {
        let mesh = uniform_square_mesh(5).unwrap();
        let affine = BoundaryDatum::function(field(|x, y| x + y));
        let p = l2_boundary_projection(&affine, &mesh).unwrap();
        for i in mesh.boundary_nodes() {
            let [x, y] = mesh.nodes()[i];
            assert!((p[i] - (x + y)).abs() < 1e-12);
        }
        let one = BoundaryDatum::function(field(|_, _| 1.0));
        let p = l2_boundary_projection(&one, &mesh).unwrap();
        assert!(mesh.boundary_nodes().iter().all(|&i| (p[i] - 1.0).abs() < 1e-12));
    }

    fn boundary_l2_error(mesh: &TriMesh, p: &[f64], g: &dyn Fn(f64, f64) -> f64) -> f64 {
        // fine composite Gauss on each edge, independent of the 4-point rule
        let rule = crate::quadrature::composite_rule(0.0, 1.0, 16, 8);
        let mut err = 0.0;
        for &[a, b] in mesh.boundary_edges() {
            let (pa, pb) = (mesh.nodes()[a], mesh.nodes()[b]);
            let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
            for &(t, w) in &rule {
                let x = pa[0] + t * (pb[0] - pa[0]);
                let y = pa[1] + t * (pb[1] - pa[1]);
                let d = g(x, y) - ((1.0 - t) * p[a] + t * p[b]);
                err += w * len * d * d;
            }
        }
        err.sqrt()
    }

    #[test]
    fn rough_trace_projection_error_decays() {
        let g = |x: f64, y: f64| corner_singular(0.4999, x, y);
        let datum = BoundaryDatum::rough(field(g));
        let errs: Vec<f64> = [4, 8, 16, 32]
            .iter()
            .map(|&m| {
                let mesh = uniform_square_mesh(m).unwrap();
                let p = l2_boundary_projection(&datum, &mesh).unwrap();
                boundary_l2_error(&mesh, &p, &g)
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn affine_lift_is_exact() {
        let space = P1Space::new(uniform_square_mesh(8).unwrap());
        let g = BoundaryDatum::function(field(|x, y| x + y));
        let v = solve_dirichlet_lift(&space, &g, LinearSolver::default()).unwrap();
        for (i, p) in space.mesh().nodes().iter().enumerate() {
            assert!((v.values[i] - (p[0] + p[1])).abs() < 1e-10);
        }
        assert!(space.interior_residual(&v.values) < 1e-10);
        let z = solve_dirichlet_lift(&space, &BoundaryDatum::zero(), LinearSolver::default()).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lift_obeys_discrete_maximum_principle() {
        let space = P1Space::new(uniform_square_mesh(12).unwrap());
        let g = BoundaryDatum::function(field(|x, y| (5.0 * x).sin() + y * y - (3.0 * y).cos()));
        let v = solve_dirichlet_lift(&space, &g, LinearSolver::default()).unwrap();
        let trace = l2_boundary_projection(&g, space.mesh()).unwrap();
        let b = space.boundary();
        let lo = b.iter().map(|&i| trace[i]).fold(f64::INFINITY, f64::min);
        let hi = b.iter().map(|&i| trace[i]).fold(f64::NEG_INFINITY, f64::max);
        assert!(v.values.iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
        for &i in b {
            assert_eq!(v.values[i], trace[i]);
        }
    }

    #[test]
    fn lift_solvers_agree() {
        let space = P1Space::new(uniform_square_mesh(6).unwrap());
        let g = BoundaryDatum::function(field(|x, y| (x * y).exp()));
        let a = solve_dirichlet_lift(&space, &g, LinearSolver::default()).unwrap();
        let b = solve_dirichlet_lift(&space, &g, LinearSolver::DenseCholesky).unwrap();
        for i in 0..a.values.len() {
            assert!((a.values[i] - b.values[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn neumann_lift_zero_data() {
        let space = P1Space::new(uniform_square_mesh(4).unwrap());
        let v = solve_neumann_lift(&space, &|_, _| 0.0, 0.0).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn neumann_lift_with_balanced_flux() {
        let space = P1Space::new(uniform_square_mesh(16).unwrap());
        // x - 1/2 on the bottom edge integrates to zero on its own
        let g = |x: f64, y: f64| if y == 0.0 { x - 0.5 } else { 0.0 };
        let v = solve_neumann_lift(&space, &g, 0.0).unwrap();
        assert!(space.integral(&v).abs() < 1e-12);
        assert!(v.iter().any(|x| x.abs() > 1e-3));
        // weak residual against every hat function
        let r = space.stiffness().mul_vec(&v);
        let load = boundary_load_vector(space.mesh(), &g);
        assert!(r.iter().zip(&load).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn neumann_lift_rejects_incompatible_data() {
        let space = P1Space::new(uniform_square_mesh(4).unwrap());
        let err = solve_neumann_lift(&space, &|_, _| 0.25, 0.0).unwrap_err();
        match err {
            Error::CompatibilityViolation { residual, .. } => assert!((residual - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        // interior source balancing the flux is accepted
        assert!(solve_neumann_lift(&space, &|_, _| 0.25, -1.0).is_ok());
    }
}
