//! Convergence sweeps for the two model problems on the unit square.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::error_metrics::{hs_error_via_eigen, l2_error_refined, ConvergenceRecord};
use crate::extension::{energy_error_identity, square_cylinder, ExtensionMethod};
use crate::fem2d::P1Space;
use crate::functions::{corner_singular, field, BoundaryDatum, Field};
use crate::mesh::{uniform_square_mesh, DEFAULT_GRADING_SAFETY};
use crate::solvers::solve_dirichlet_composite;
use crate::spectral::{fem_eigenbasis, BasisKind, EigenBasis};

/// Exponent of the corner-singular boundary datum.
pub const CORNER_EXPONENT: f64 = 0.4999;

pub const DEFAULT_ORDERS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
pub const DEFAULT_LEVELS: [usize; 3] = [8, 16, 32];
pub const LARGE_LEVEL: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    /// `f = sin(2πx)sin(2πy)`, `g = x + y`.
    Smooth,
    /// Same `f`, `g = r^a sin(aθ)` with `a` = [`CORNER_EXPONENT`].
    CornerSingular,
}

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Example::Smooth => "example1",
            Example::CornerSingular => "example2",
        }
    }

    pub fn load(self) -> Field {
        field(|x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).sin())
    }

    /// Harmonic lifting of the boundary datum, which is also the datum.
    pub fn lifting(self) -> Field {
        match self {
            Example::Smooth => field(|x, y| x + y),
            Example::CornerSingular => field(|x, y| corner_singular(CORNER_EXPONENT, x, y)),
        }
    }

    /// Zero-boundary part `w = λ_{2,2}^{-s} f`.
    pub fn zero_boundary_part(self, s: f64) -> Field {
        let scale = (8.0 * PI * PI).powf(-s);
        field(move |x, y| scale * (2.0 * PI * x).sin() * (2.0 * PI * y).sin())
    }
}

/// Per-level data shared across orders and examples.
pub struct LevelCache {
    pub level: usize,
    pub space: Arc<P1Space>,
    /// All interior Dirichlet modes, for the modal extension solver.
    pub dirichlet: Arc<EigenBasis>,
    /// All Neumann modes (every node), for the `H^s` error of the lifting.
    pub neumann: Arc<EigenBasis>,
}

impl LevelCache {
    pub fn new(level: usize) -> Result<Self> {
        let space = Arc::new(P1Space::new(uniform_square_mesh(level)?));
        let interior = space.interior().len();
        let nodes = space.mesh().node_count();
        let (dirichlet, neumann) = rayon::join(
            || fem_eigenbasis(space.clone(), BasisKind::Dirichlet, interior),
            || fem_eigenbasis(space.clone(), BasisKind::Neumann, nodes),
        );
        Ok(Self { level, space, dirichlet: Arc::new(dirichlet?), neumann: Arc::new(neumann?) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub orders: Vec<f64>,
    pub levels: Vec<usize>,
    pub gamma_safety: f64,
    pub height: Option<f64>,
    /// Record wall time; when false the `seconds` column is zero and the
    /// output is reproducible byte for byte.
    pub timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            orders: DEFAULT_ORDERS.to_vec(),
            levels: DEFAULT_LEVELS.to_vec(),
            gamma_safety: DEFAULT_GRADING_SAFETY,
            height: None,
            timing: true,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() || self.levels.is_empty() {
            return Err(Error::Config("need at least one order and one level".into()));
        }
        if let Some(&s) = self.orders.iter().find(|&&s| !(s > 0.0 && s < 1.0)) {
            return Err(Error::Config(format!("order {s} outside (0, 1)")));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("levels must be strictly ascending".into()));
        }
        if self.levels[0] < 2 {
            return Err(Error::Config("levels must be at least 2".into()));
        }
        if !(self.gamma_safety > 1.0) {
            return Err(Error::Config(format!("grading safety {} must exceed 1", self.gamma_safety)));
        }
        Ok(())
    }
}

/// A convergence record with the two parts of the combined `H^s` error.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub record: ConvergenceRecord,
    /// `‖v − v_h‖_{H^s}` by the eigen formula.
    pub lifting_hs: f64,
    /// `(d_s ∫ f (w − w_h))^{1/2}`
    pub extension_energy: f64,
}

pub fn run_case(example: Example, s: f64, cache: &LevelCache, cfg: &SweepConfig) -> Result<CaseResult> {
    let start = Instant::now();
    let cylinder = Arc::new(square_cylinder(cache.level, s, cfg.gamma_safety, cfg.height)?);
    let lifting = example.lifting();
    let g = BoundaryDatum::function(lifting.clone());
    let sol = solve_dirichlet_composite(
        s,
        example.load(),
        &g,
        &cache.space,
        cylinder.clone(),
        &ExtensionMethod::Modal(cache.dirichlet.clone()),
    )?;
    let mesh = cache.space.mesh();
    let w = example.zero_boundary_part(s);
    let energy = energy_error_identity(&sol.problem, w.as_ref(), &sol.extension.trace).max(0.0);
    let v_nodal = mesh.interpolate(lifting.as_ref());
    let e: Vec<f64> = v_nodal.iter().zip(&sol.lift).map(|(a, b)| a - b).collect();
    let lifting_hs = hs_error_via_eigen(&e, &cache.neumann, s)?;
    let exact = |x: f64, y: f64| w(x, y) + lifting(x, y);
    let refine = match example {
        Example::Smooth => 1,
        Example::CornerSingular => 4,
    };
    let l2 = l2_error_refined(mesh, &sol.values, &exact, refine);
    let extension_energy = energy.sqrt();
    let record = ConvergenceRecord {
        kind: example.name().to_string(),
        s,
        level: cache.level,
        num_prisms: cylinder.prism_count(),
        hs_error: lifting_hs + extension_energy,
        l2_error: l2,
        energy_error: energy,
        seconds: if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 },
    };
    Ok(CaseResult { record, lifting_hs, extension_energy })
}

/// Builds the level caches for `levels`, in order.
pub fn prepare_levels(levels: &[usize]) -> Result<Vec<LevelCache>> {
    levels.par_iter().map(|&m| LevelCache::new(m)).collect()
}

/// Runs every `(s, level)` pair; results are ordered by `s`, then level,
/// independent of scheduling.
pub fn run_sweep_with(example: Example, cfg: &SweepConfig, caches: &[LevelCache]) -> Result<Vec<CaseResult>> {
    cfg.validate()?;
    let jobs: Vec<(f64, &LevelCache)> = cfg
        .orders
        .iter()
        .flat_map(|&s| {
            cfg.levels.iter().map(move |m| (s, *m))
        })
        .map(|(s, m)| {
            caches
                .iter()
                .find(|c| c.level == m)
                .map(|c| (s, c))
                .ok_or_else(|| Error::InvalidArgument(format!("no cache for level {m}")))
        })
        .collect::<Result<_>>()?;
    jobs.par_iter().map(|&(s, cache)| run_case(example, s, cache, cfg)).collect()
}

pub fn run_sweep(example: Example, cfg: &SweepConfig) -> Result<Vec<CaseResult>> {
    cfg.validate()?;
    let caches = prepare_levels(&cfg.levels)?;
    run_sweep_with(example, cfg, &caches)
}
