use std::f64::consts::PI;

use super::basis::BasisKind;
use super::SpectralCoefficients;
use crate::error::{Error, Result};

fn check_closed_order(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidOrder(s))
    }
}

fn require(c: &SpectralCoefficients, kind: BasisKind) -> Result<()> {
    if c.kind() == kind {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("operator needs a {kind:?} expansion, got {:?}", c.kind())))
    }
}

/// `(-Δ_D)^s u = Σ_k (λ_k^s u_{Ω,k} + λ_k^{s−1} u_{∂Ω,k}) φ_k` for `0 < s ≤ 1`.
///
/// Evaluated as `λ_k^{s−1} (λ_k u_{Ω,k} + u_{∂Ω,k})` so that the per-mode
/// cancellation for harmonic input happens before the power is applied.
pub fn apply_frac_dirichlet(c: &SpectralCoefficients, s: f64) -> Result<SpectralCoefficients> {
    check_closed_order(s)?;
    require(c, BasisKind::Dirichlet)?;
    let out = c
        .eigenvalues()
        .iter()
        .zip(c.interior().iter().zip(c.boundary()))
        .map(|(&l, (&a, &b))| l.powf(s - 1.0) * (l * a + b))
        .collect();
    Ok(c.with_parts(out, vec![0.0; c.len()], 0.0))
}

/// Zero-trace operator `(-Δ_{D,0})^s u = Σ_k λ_k^s u_k φ_k`; the boundary
/// part of the input is ignored.
pub fn apply_frac_dirichlet_zero(c: &SpectralCoefficients, s: f64) -> Result<SpectralCoefficients> {
    check_closed_order(s)?;
    require(c, BasisKind::Dirichlet)?;
    let out = c.eigenvalues().iter().zip(c.interior()).map(|(&l, &a)| l.powf(s) * a).collect();
    Ok(c.with_parts(out, vec![0.0; c.len()], 0.0))
}

/// `(-Δ_N)^s u = Σ_{k≥2} (μ_k^s u_{Ω,k} − μ_k^{s−1} u_{∂Ω,k}) ψ_k − |Ω|^{-1} ∫_∂Ω ∂_ν u`.
///
/// The first mode (the constant) is excluded; the constant term is carried
/// as the offset of the result.
pub fn apply_frac_neumann(c: &SpectralCoefficients, s: f64, conormal_integral: f64) -> Result<SpectralCoefficients> {
    check_closed_order(s)?;
    require(c, BasisKind::Neumann)?;
    let mut out: Vec<f64> = c
        .eigenvalues()
        .iter()
        .zip(c.interior().iter().zip(c.boundary()))
        .map(|(&mu, (&a, &b))| if mu > 0.0 { mu.powf(s) * a - mu.powf(s - 1.0) * b } else { 0.0 })
        .collect();
    if let Some(first) = out.first_mut() {
        *first = 0.0;
    }
    let offset = -conormal_integral / c.domain_measure();
    Ok(c.with_parts(out, vec![0.0; c.len()], offset))
}

/// `(-Δ_D)^s (-Δ_D)^{1−s} u`: the inner application produces a zero-trace
/// function, so the outer one is the zero-trace operator.
pub fn semigroup_compose(c: &SpectralCoefficients, s: f64) -> Result<SpectralCoefficients> {
    crate::error::check_order(s)?;
    let inner = apply_frac_dirichlet(c, 1.0 - s)?;
    apply_frac_dirichlet_zero(&inner, s)
}

/// Partial sums `S_l = 4π^{2t−2} Σ_{k=1..l} (2k−1)^{2t−2}` of the squared
/// `ℍ^{t−2s}` norm of `(-Δ_{D,0})^s 1` on (0, 1), for `l = 1..=terms`.
pub fn divergent_norm_partial_sums(t: f64, terms: usize) -> Result<Vec<f64>> {
    if !(t >= 0.5) {
        return Err(Error::InvalidArgument(format!("smoothness t = {t} must be at least 1/2")));
    }
    let scale = 4.0 * PI.powf(2.0 * t - 2.0);
    let mut acc = 0.0;
    Ok((1..=terms)
        .map(|k| {
            acc += ((2 * k - 1) as f64).powf(2.0 * t - 2.0);
            scale * acc
        })
        .collect())
}

/// `(Σ_k λ_k^s u_{Ω,k}²)^{1/2}`
///
/// The constant Neumann mode is skipped.
pub fn hs_seminorm(c: &SpectralCoefficients, s: f64) -> f64 {
    let skip = usize::from(c.kind() == BasisKind::Neumann);
    c.eigenvalues()
        .iter()
        .zip(c.interior())
        .skip(skip)
        .map(|(&l, &a)| if l > 0.0 { l.powf(s) * a * a } else { 0.0 })
        .sum::<f64>()
        .sqrt()
}

/// Terms of the truncated Dirichlet integration-by-parts identity
/// `⟨(-Δ_D)^s u, v⟩ = ⟨u, (-Δ_{D,0})^s v⟩ + ∫_∂Ω u ∂_ν w_v`.
#[derive(Debug, Clone)]
pub struct IntegrationByParts {
    /// `Σ_k coeff_k((-Δ_D)^s u) v_k`
    pub lhs: f64,
    /// `Σ_k u_{Ω,k} λ_k^s v_k`
    pub volume: f64,
    /// `Σ_k u_{∂Ω,k} λ_k^{s−1} v_k`
    pub boundary: f64,
    /// Coefficients `λ_k^{s−1} v_k` of `w_v`, which solves `(-Δ_{D,0})^{1−s} w_v = v`.
    pub w_v: Vec<f64>,
}

pub fn integration_by_parts_terms(u: &SpectralCoefficients, v: &[f64], s: f64) -> Result<IntegrationByParts> {
    if v.len() != u.len() {
        return Err(Error::InvalidArgument("coefficient vectors differ in length".into()));
    }
    let applied = apply_frac_dirichlet(u, s)?;
    let lhs = applied.interior().iter().zip(v).map(|(a, b)| a * b).sum();
    let mut volume = 0.0;
    let mut boundary = 0.0;
    let mut w_v = Vec::with_capacity(v.len());
    for k in 0..v.len() {
        let l = u.eigenvalues()[k];
        volume += u.interior()[k] * l.powf(s) * v[k];
        boundary += u.boundary()[k] * l.powf(s - 1.0) * v[k];
        w_v.push(l.powf(s - 1.0) * v[k]);
    }
    Ok(IntegrationByParts { lhs, volume, boundary, w_v })
}
