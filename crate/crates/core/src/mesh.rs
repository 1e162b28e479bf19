//! Structured triangulations of rectangles, graded meshes of `[0, Y]` and
//! their tensor-product prism meshes of the truncated cylinder.

use std::io::Write;

use crate::error::{check_order, Error, Result};
use crate::quadrature::{triangle_rule_degree5, TriPoint};

pub type Point = [f64; 2];

/// Conforming triangulation of a rectangle.
#[derive(Debug, Clone)]
pub struct TriMesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<[usize; 2]>,
    boundary_node: Vec<bool>,
    h: f64,
    bounds: [f64; 4],
    cells: [usize; 2],
}

/// Structured right-triangle mesh of `(0,1)²` with `m` cells per side.
pub fn uniform_square_mesh(m: usize) -> Result<TriMesh> {
    rectangle_mesh([0.0, 1.0, 0.0, 1.0], m, m)
}

/// Structured mesh of `[x0,x1]×[y0,y1]`; every cell is split along the
/// diagonal from its lower-left to its upper-right corner.
pub fn rectangle_mesh(bounds: [f64; 4], nx: usize, ny: usize) -> Result<TriMesh> {
    let [x0, x1, y0, y1] = bounds;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument("mesh needs at least one cell per side".into()));
    }
    if !(x1 > x0 && y1 > y0) {
        return Err(Error::InvalidArgument(format!("degenerate rectangle {bounds:?}")));
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let hx = (x1 - x0) / nx as f64;
    let hy = (y1 - y0) / ny as f64;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut boundary_node = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // pin the last row/column so the boundary is hit exactly
            let x = if i == nx { x1 } else { x0 + i as f64 * hx };
            let y = if j == ny { y1 } else { y0 + j as f64 * hy };
            nodes.push([x, y]);
            boundary_node.push(i == 0 || j == 0 || i == nx || j == ny);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary_edges.push([idx(i, 0), idx(i + 1, 0)]);
    }
    for j in 0..ny {
        boundary_edges.push([idx(nx, j), idx(nx, j + 1)]);
    }
    for i in (0..nx).rev() {
        boundary_edges.push([idx(i + 1, ny), idx(i, ny)]);
    }
    for j in (0..ny).rev() {
        boundary_edges.push([idx(0, j + 1), idx(0, j)]);
    }
    let h = (hx * hx + hy * hy).sqrt();
    Ok(TriMesh { nodes, triangles, boundary_edges, boundary_node, h, bounds, cells: [nx, ny] })
}

impl TriMesh {
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Boundary edges, counter-clockwise so that the outward normal of
    /// `p → q` is `(q - p)` rotated by -90°.
    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary_edges
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary_node[node]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary_node
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Maximum element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn bounds(&self) -> [f64; 4] {
        self.bounds
    }

    /// Cells per side `[nx, ny]` of the structured layout.
    pub fn cells(&self) -> [usize; 2] {
        self.cells
    }

    pub fn domain_area(&self) -> f64 {
        let [x0, x1, y0, y1] = self.bounds;
        (x1 - x0) * (y1 - y0)
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| self.boundary_node[i]).collect()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| !self.boundary_node[i]).collect()
    }

    pub fn vertices(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    /// Signed area, positive for counter-clockwise triangles.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.vertices(t);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangle_count()).map(|t| self.signed_area(t)).sum()
    }

    /// Constant gradients of the three local hat functions on triangle `t`.
    pub fn hat_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [p, q, r] = self.vertices(t);
        let two_area = 2.0 * self.signed_area(t);
        [
            [(q[1] - r[1]) / two_area, (r[0] - q[0]) / two_area],
            [(r[1] - p[1]) / two_area, (p[0] - r[0]) / two_area],
            [(p[1] - q[1]) / two_area, (q[0] - p[0]) / two_area],
        ]
    }

    /// Max element diameter over min inscribed-circle diameter.
    pub fn quasi_uniformity(&self) -> f64 {
        let mut max_diam: f64 = 0.0;
        let mut min_inscribed = f64::INFINITY;
        for t in 0..self.triangle_count() {
            let [p, q, r] = self.vertices(t);
            let a = dist(q, r);
            let b = dist(p, r);
            let c = dist(p, q);
            max_diam = max_diam.max(a.max(b).max(c));
            let inradius = self.signed_area(t) / (0.5 * (a + b + c));
            min_inscribed = min_inscribed.min(2.0 * inradius);
        }
        max_diam / min_inscribed
    }

    /// Largest interior angle over all triangles, in radians.
    pub fn max_angle(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for t in 0..self.triangle_count() {
            let v = self.vertices(t);
            for k in 0..3 {
                let p = v[k];
                let q = v[(k + 1) % 3];
                let r = v[(k + 2) % 3];
                let u = [q[0] - p[0], q[1] - p[1]];
                let w = [r[0] - p[0], r[1] - p[1]];
                let cos = (u[0] * w[0] + u[1] * w[1]) / (dist(p, q) * dist(p, r));
                worst = worst.max(cos.clamp(-1.0, 1.0).acos());
            }
        }
        worst
    }

    /// Element containing `p` and the barycentric coordinates of `p` in it.
    /// Points outside the rectangle are clamped to the nearest cell.
    pub fn locate(&self, p: Point) -> (usize, [f64; 3]) {
        let [x0, x1, y0, y1] = self.bounds;
        let [nx, ny] = self.cells;
        let fx = ((p[0] - x0) / (x1 - x0) * nx as f64).clamp(0.0, nx as f64);
        let fy = ((p[1] - y0) / (y1 - y0) * ny as f64).clamp(0.0, ny as f64);
        let i = (fx.floor() as usize).min(nx - 1);
        let j = (fy.floor() as usize).min(ny - 1);
        let (sx, sy) = (fx - i as f64, fy - j as f64);
        let cell = j * nx + i;
        if sx >= sy {
            // lower triangle (i,j),(i+1,j),(i+1,j+1)
            (2 * cell, [1.0 - sx, sx - sy, sy])
        } else {
            // upper triangle (i,j),(i+1,j+1),(i,j+1)
            (2 * cell + 1, [1.0 - sy, sx, sy - sx])
        }
    }

    /// Evaluates the P1 function with nodal values `u` at an arbitrary point.
    pub fn eval_at(&self, u: &[f64], p: Point) -> f64 {
        let (t, bary) = self.locate(p);
        self.eval_p1(u, t, bary)
    }

    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|p| f(p[0], p[1])).collect()
    }

    /// Calls `visit(t, bary, x, y, weight)` at every quadrature point of the
    /// 7-point rule on each element, after splitting every element into
    /// `refine²` congruent sub-triangles. `weight` already carries the area.
    pub fn for_each_quadrature_point(
        &self,
        refine: usize,
        mut visit: impl FnMut(usize, [f64; 3], f64, f64, f64),
    ) {
        let rule = triangle_rule_degree5();
        let subs = reference_subdivision(refine.max(1));
        for t in 0..self.triangle_count() {
            let [p, q, r] = self.vertices(t);
            let area = self.signed_area(t);
            for sub in &subs {
                let sub_area = area / (refine.max(1) * refine.max(1)) as f64;
                for &TriPoint { bary, weight } in &rule {
                    // reference coordinates of the quadrature point
                    let xi = bary[0] * sub[0][0] + bary[1] * sub[1][0] + bary[2] * sub[2][0];
                    let eta = bary[0] * sub[0][1] + bary[1] * sub[1][1] + bary[2] * sub[2][1];
                    let lam = [1.0 - xi - eta, xi, eta];
                    let x = lam[0] * p[0] + lam[1] * q[0] + lam[2] * r[0];
                    let y = lam[0] * p[1] + lam[1] * q[1] + lam[2] * r[1];
                    visit(t, lam, x, y, weight * sub_area);
                }
            }
        }
    }

    /// Value of the P1 function with nodal values `u` at barycentric point
    /// `bary` of element `t`.
    pub fn eval_p1(&self, u: &[f64], t: usize, bary: [f64; 3]) -> f64 {
        let [a, b, c] = self.triangles[t];
        bary[0] * u[a] + bary[1] * u[b] + bary[2] * u[c]
    }

    /// Writes nodes as `x y` lines, then a blank line, then elements as
    /// `i j k` lines.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for p in &self.nodes {
            writeln!(out, "{} {}", p[0], p[1])?;
        }
        writeln!(out)?;
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

fn dist(p: Point, q: Point) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Sub-triangles of the reference triangle in `(ξ, η)` coordinates.
fn reference_subdivision(r: usize) -> Vec<[[f64; 2]; 3]> {
    let h = 1.0 / r as f64;
    let mut out = Vec::with_capacity(r * r);
    for j in 0..r {
        for i in 0..(r - j) {
            let (x, y) = (i as f64 * h, j as f64 * h);
            out.push([[x, y], [x + h, y], [x, y + h]]);
            if i + j + 1 < r {
                out.push([[x + h, y], [x + h, y + h], [x, y + h]]);
            }
        }
    }
    out
}

/// Graded partition `y_k = (k/M)^γ · Y` of `[0, Y]`.
#[derive(Debug, Clone)]
pub struct GradedInterval {
    gamma: f64,
    height: f64,
    breakpoints: Vec<f64>,
}

pub const DEFAULT_GRADING_SAFETY: f64 = 1.1;

/// Graded mesh for order `s` with `γ = safety · 3/(2s)`.
pub fn graded_interval(cells: usize, s: f64, height: f64, safety: f64) -> Result<GradedInterval> {
    check_order(s)?;
    if !(safety > 1.0) {
        return Err(Error::InvalidArgument(format!("grading safety factor {safety} must exceed 1")));
    }
    GradedInterval::with_exponent(cells, safety * 3.0 / (2.0 * s), height)
}

impl GradedInterval {
    /// Graded mesh with an explicit exponent, bypassing the `γ > 3/(2s)` rule.
    pub fn with_exponent(cells: usize, gamma: f64, height: f64) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidArgument("graded interval needs at least one cell".into()));
        }
        if !(height > 0.0) || !(gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "graded interval needs Y > 0 and γ > 0 (got Y={height}, γ={gamma})"
            )));
        }
        let m = cells as f64;
        let mut breakpoints: Vec<f64> =
            (0..=cells).map(|k| (k as f64 / m).powf(gamma) * height).collect();
        breakpoints[cells] = height;
        Ok(Self { gamma, height, breakpoints })
    }

    pub fn cells(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

/// `Y = max(1, log(#T_Y) / √λ₁)` with `λ₁ = 2π²`, the first Dirichlet
/// eigenvalue of the unit square.
pub fn default_truncation_height(num_prisms: usize) -> f64 {
    let sqrt_lambda1 = (2.0 * std::f64::consts::PI * std::f64::consts::PI).sqrt();
    ((num_prisms as f64).ln() / sqrt_lambda1).max(1.0)
}

/// Tensor-product prism mesh of `Ω × (0, Y)`.
///
/// Degrees of freedom are numbered level by level: `dof = level · n + node`
/// with `n` the number of base nodes and level 0 at `y = 0`.
#[derive(Debug, Clone)]
pub struct CylinderMesh {
    base: TriMesh,
    axis: GradedInterval,
}

pub fn tensor_cylinder(base: TriMesh, axis: GradedInterval) -> CylinderMesh {
    CylinderMesh { base, axis }
}

impl CylinderMesh {
    pub fn base(&self) -> &TriMesh {
        &self.base
    }

    pub fn axis(&self) -> &GradedInterval {
        &self.axis
    }

    pub fn prism_count(&self) -> usize {
        self.base.triangle_count() * self.axis.cells()
    }

    /// Prisms as `(triangle, interval)` pairs.
    pub fn prisms(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cells = self.axis.cells();
        (0..self.base.triangle_count()).flat_map(move |t| (0..cells).map(move |k| (t, k)))
    }

    pub fn dof_count(&self) -> usize {
        self.base.node_count() * (self.axis.cells() + 1)
    }

    pub fn dof(&self, node: usize, level: usize) -> usize {
        level * self.base.node_count() + node
    }

    /// A dof is constrained on the lateral boundary `∂Ω × [0, Y]` and on the
    /// top face `Ω × {Y}`.
    pub fn is_constrained(&self, dof: usize) -> bool {
        let n = self.base.node_count();
        let (level, node) = (dof / n, dof % n);
        level == self.axis.cells() || self.base.is_boundary(node)
    }

    pub fn constrained_flags(&self) -> Vec<bool> {
        (0..self.dof_count()).map(|d| self.is_constrained(d)).collect()
    }
}
