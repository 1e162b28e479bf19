//! Eigenbases of the Dirichlet and Neumann Laplacians and the spectral
//! fractional operators with nonzero boundary data.
//!
//! A function `u` is represented by [`SpectralCoefficients`]: the interior
//! part `u_{Ω,k} = ∫_Ω u φ_k` and a boundary part, which for Dirichlet bases
//! is `∫_∂Ω u ∂_ν φ_k` and for Neumann bases is `∫_∂Ω ∂_ν u ψ_k`.

mod basis;
mod expand;
mod operators;

pub use basis::{
    analytic_interval_dirichlet_basis, analytic_square_dirichlet_basis, analytic_square_neumann_basis,
    dense_generalized_eigen, fem_eigenbasis, square_dirichlet_modes, square_neumann_modes, BasisKind,
    DiscreteModes, EigenBasis, Modes, Side, CLUSTER_TOLERANCE, EIGEN_RESIDUAL_TOLERANCE,
};
pub use expand::{boundary_pairing, expand, BoundaryInput, Sample};
pub use operators::{
    apply_frac_dirichlet, apply_frac_dirichlet_zero, apply_frac_neumann, divergent_norm_partial_sums,
    hs_seminorm, integration_by_parts_terms, semigroup_compose, IntegrationByParts,
};

use std::io::Write;

use crate::error::{Error, Result};

/// Expansion of a function (or operator output) in an [`EigenBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    kind: BasisKind,
    eigenvalues: Vec<f64>,
    domain_measure: f64,
    interior: Vec<f64>,
    boundary: Vec<f64>,
    offset: f64,
}

impl SpectralCoefficients {
    pub fn new(basis: &EigenBasis, interior: Vec<f64>, boundary: Vec<f64>) -> Result<Self> {
        if interior.len() != basis.len() || boundary.len() != basis.len() {
            return Err(Error::InvalidArgument(format!(
                "coefficient lengths {}/{} do not match basis size {}",
                interior.len(),
                boundary.len(),
                basis.len()
            )));
        }
        Ok(Self {
            kind: basis.kind(),
            eigenvalues: basis.eigenvalues().to_vec(),
            domain_measure: basis.domain_measure(),
            interior,
            boundary,
            offset: 0.0,
        })
    }

    /// Zero-trace input: boundary part identically zero.
    pub fn interior_only(basis: &EigenBasis, interior: Vec<f64>) -> Result<Self> {
        let m = interior.len();
        Self::new(basis, interior, vec![0.0; m])
    }

    pub(crate) fn with_parts(&self, interior: Vec<f64>, boundary: Vec<f64>, offset: f64) -> Self {
        Self {
            kind: self.kind,
            eigenvalues: self.eigenvalues.clone(),
            domain_measure: self.domain_measure,
            interior,
            boundary,
            offset,
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn interior(&self) -> &[f64] {
        &self.interior
    }

    pub fn boundary(&self) -> &[f64] {
        &self.boundary
    }

    /// Constant term added to the series (Neumann normalization).
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn domain_measure(&self) -> f64 {
        self.domain_measure
    }

    /// `λ_k u_{Ω,k} + u_{∂Ω,k}`: the expansion of `-Δu` for Dirichlet bases.
    pub fn laplacian_coefficients(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(self.interior.iter().zip(&self.boundary))
            .map(|(&l, (&a, &b))| l * a + b)
            .collect()
    }

    /// Writes `k,lambda,interior,boundary` rows with a header; `k` is 1-based.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,lambda,interior,boundary")?;
        for k in 0..self.len() {
            writeln!(
                out,
                "{},{:e},{:e},{:e}",
                k + 1,
                self.eigenvalues[k],
                self.interior[k],
                self.boundary[k]
            )?;
        }
        Ok(())
    }
}
