//! Error measures and log-log rate fitting for convergence studies.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{assemble_weighted_stiffness, prolongate};
use crate::mesh::{CylinderMesh, TriMesh};
use crate::spectral::{BasisKind, EigenBasis};

pub const CSV_HEADER: &str = "kind,s,M,num_prisms,hs_error,l2_error,energy_error,seconds";

/// One data point of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub kind: String,
    pub s: f64,
    #[serde(rename = "M")]
    pub level: usize,
    pub num_prisms: usize,
    /// Combined bound `‖v − v_h‖_{H^s} + energy_error^{1/2}`.
    pub hs_error: f64,
    pub l2_error: f64,
    /// `d_s ∫ f (w − w_h)`, the squared weighted energy error of the extension.
    pub energy_error: f64,
    pub seconds: f64,
}

impl ConvergenceRecord {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hs_error", self.hs_error), ("l2_error", self.l2_error), ("energy_error", self.energy_error)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} = {v} is not a finite nonnegative number")));
            }
        }
        Ok(())
    }
}

/// `(‖e‖²_{L²} + Σ_k λ_k^s (φ_kᵀ M e)²)^{1/2}` with the modes of a discrete
/// basis on the mesh of `e`. For a Neumann basis the constant mode is left
/// out of the sum.
pub fn hs_error_via_eigen(e: &[f64], basis: &EigenBasis, s: f64) -> Result<f64> {
    let d = basis
        .discrete()
        .ok_or_else(|| Error::InvalidArgument("H^s error needs a discrete eigenbasis".into()))?;
    if e.len() != d.vectors.nrows() {
        return Err(Error::InvalidArgument(format!(
            "error vector has {} entries for {} nodes",
            e.len(),
            d.vectors.nrows()
        )));
    }
    let me = d.space.mass().mul_vec(e);
    let l2_sq: f64 = e.iter().zip(&me).map(|(a, b)| a * b).sum();
    // the constant Neumann mode carries a round-off eigenvalue, not λ = 0
    let skip = usize::from(basis.kind() == BasisKind::Neumann);
    let seminorm_sq: f64 = basis
        .eigenvalues()
        .iter()
        .enumerate()
        .skip(skip)
        .map(|(k, &lambda)| {
            let c: f64 = d.vectors.column(k).iter().zip(&me).map(|(a, b)| a * b).sum();
            if lambda > 0.0 {
                lambda.powf(s) * c * c
            } else {
                0.0
            }
        })
        .sum();
    Ok((l2_sq.max(0.0) + seminorm_sq).sqrt())
}

/// `‖u − u_h‖_{L²}` by the degree-5 rule on every element.
pub fn l2_error(mesh: &TriMesh, u_h: &[f64], exact: &dyn Fn(f64, f64) -> f64) -> f64 {
    l2_error_refined(mesh, u_h, exact, 1)
}

/// As [`l2_error`] with every element split into `refine²` sub-triangles,
/// for integrands with corner singularities.
pub fn l2_error_refined(mesh: &TriMesh, u_h: &[f64], exact: &dyn Fn(f64, f64) -> f64, refine: usize) -> f64 {
    let mut acc = 0.0;
    mesh.for_each_quadrature_point(refine, |t, bary, x, y, w| {
        let d = exact(x, y) - mesh.eval_p1(u_h, t, bary);
        acc += w * d * d;
    });
    acc.sqrt()
}

/// Weighted energy `a_α(R − P W_h, R − P W_h)` of the difference between a
/// reference solution on `fine` and a prolongated solution on `coarse`.
pub fn energy_error_direct(
    fine: &CylinderMesh,
    reference: &[f64],
    coarse: &CylinderMesh,
    values: &[f64],
    alpha: f64,
) -> Result<f64> {
    let a = assemble_weighted_stiffness(fine, alpha)?;
    let p = prolongate(coarse, values, fine);
    let diff: Vec<f64> = reference.iter().zip(&p).map(|(r, q)| r - q).collect();
    Ok(a.bilinear(&diff, &diff))
}

/// Least-squares slope of `log(error)` against `log(num_prisms)`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!("rate fit needs at least two points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::InvalidArgument(format!("rate fit needs positive finite values, got ({x}, {y})")));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("rate fit needs at least two distinct abscissae".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// Which error column a rate is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorColumn {
    Hs,
    L2,
    Energy,
}

impl ErrorColumn {
    pub fn of(self, r: &ConvergenceRecord) -> f64 {
        match self {
            ErrorColumn::Hs => r.hs_error,
            ErrorColumn::L2 => r.l2_error,
            ErrorColumn::Energy => r.energy_error,
        }
    }
}

/// Fitted slope per `(kind, s)` group, in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSummary {
    pub kind: String,
    pub s: f64,
    pub levels: Vec<usize>,
    pub hs_rate: f64,
    pub l2_rate: f64,
}

pub fn summarize_rates(records: &[ConvergenceRecord]) -> Result<Vec<RateSummary>> {
    let mut groups: Vec<(String, f64, Vec<&ConvergenceRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|g| g.0 == r.kind && g.1 == r.s) {
            Some(g) => g.2.push(r),
            None => groups.push((r.kind.clone(), r.s, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(kind, s, rs)| {
            let fit = |col: ErrorColumn| {
                let pts: Vec<(f64, f64)> = rs.iter().map(|r| (r.num_prisms as f64, col.of(r))).collect();
                fit_rate(&pts)
            };
            Ok(RateSummary {
                levels: rs.iter().map(|r| r.level).collect(),
                hs_rate: fit(ErrorColumn::Hs)?,
                l2_rate: fit(ErrorColumn::L2)?,
                kind,
                s,
            })
        })
        .collect()
}

pub fn write_records<W: Write>(out: W, records: &[ConvergenceRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        r.validate()?;
        w.write_record(&[
            r.kind.clone(),
            format!("{}", r.s),
            r.level.to_string(),
            r.num_prisms.to_string(),
            format!("{:.12e}", r.hs_error),
            format!("{:.12e}", r.l2_error),
            format!("{:.12e}", r.energy_error),
            format!("{:.3}", r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<ConvergenceRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header '{}'", header.join(","))));
    }
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let r: ConvergenceRecord = row?;
        r.validate()?;
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem2d::P1Space;
    use crate::mesh::uniform_square_mesh;
    use crate::spectral::fem_eigenbasis;
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn basis(m: usize) -> EigenBasis {
        let space = Arc::new(P1Space::new(uniform_square_mesh(6).unwrap()));
        fem_eigenbasis(space, BasisKind::Dirichlet, m).unwrap()
    }

    fn column(b: &EigenBasis, k: usize) -> Vec<f64> {
        b.discrete().unwrap().vectors.column(k).iter().copied().collect()
    }

    #[test]
    fn hs_error_of_modes() {
        let b = basis(10);
        let s = 0.3;
        let zero = vec![0.0; 49];
        assert_eq!(hs_error_via_eigen(&zero, &b, s).unwrap(), 0.0);
        let l = b.eigenvalues();
        let e1 = column(&b, 0);
        assert!((hs_error_via_eigen(&e1, &b, s).unwrap() - (1.0 + l[0].powf(s)).sqrt()).abs() < 1e-12);
        let (a, c) = (0.7, -1.3);
        let e: Vec<f64> = e1.iter().zip(column(&b, 1)).map(|(x, y)| a * x + c * y).collect();
        let expected = (a * a + c * c + a * a * l[0].powf(s) + c * c * l[1].powf(s)).sqrt();
        assert!((hs_error_via_eigen(&e, &b, s).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn hs_error_at_zero_order_counts_l2_twice() {
        let b = basis(10);
        let e = column(&b, 3);
        assert!((hs_error_via_eigen(&e, &b, 0.0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn l2_error_cases() {
        let mesh = uniform_square_mesh(8).unwrap();
        let x = mesh.interpolate(&|x, _| x);
        assert!(l2_error(&mesh, &x, &|x, _| x) < 1e-14);
        let zero = vec![0.0; mesh.node_count()];
        let u = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
        assert!((l2_error_refined(&mesh, &zero, &u, 2) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn interpolation_error_decays_quadratically() {
        let u = |x: f64, y: f64| (PI * x).sin() * (PI * y).cos() + x * y * y;
        let pts: Vec<(f64, f64)> = [8, 16, 32]
            .iter()
            .map(|&m| {
                let mesh = uniform_square_mesh(m).unwrap();
                let ui = mesh.interpolate(&u);
                (1.0 / m as f64, l2_error(&mesh, &ui, &u))
            })
            .collect();
        let rate = fit_rate(&pts).unwrap();
        assert!((rate - 2.0).abs() < 0.05, "rate {rate}");
    }

    #[test]
    fn rate_examples() {
        assert!((fit_rate(&[(1.0, 1.0), (10.0, 0.1), (100.0, 0.01)]).unwrap() + 1.0).abs() < 1e-14);
        assert_eq!(fit_rate(&[(1.0, 1.0), (100.0, 1.0)]).unwrap(), 0.0);
        assert!(fit_rate(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(fit_rate(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![
            ConvergenceRecord {
                kind: "example1".into(),
                s: 0.4,
                level: 8,
                num_prisms: 1024,
                hs_error: 0.125,
                l2_error: 1.5e-3,
                energy_error: 1.0 / 3.0,
                seconds: 0.0,
            },
            ConvergenceRecord { level: 16, num_prisms: 8192, hs_error: 0.0625, ..Default::default() },
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().count(), 3);
        let back = read_records(text.as_bytes()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].level, 8);
        assert!((back[0].energy_error - 1.0 / 3.0).abs() < 1e-12);
    }

    impl Default for ConvergenceRecord {
        fn default() -> Self {
            Self {
                kind: "example1".into(),
                s: 0.4,
                level: 8,
                num_prisms: 1024,
                hs_error: 1.0,
                l2_error: 1.0,
                energy_error: 1.0,
                seconds: 0.0,
            }
        }
    }

    proptest! {
        #[test]
        fn rate_is_scale_invariant(
            errs in proptest::collection::vec(1e-6f64..1.0, 3..6),
            c in 1e-3f64..1e3,
        ) {
            let pts: Vec<(f64, f64)> = errs.iter().enumerate().map(|(i, &e)| (8f64.powi(i as i32 + 1), e)).collect();
            let scaled: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, c * y)).collect();
            let a = fit_rate(&pts).unwrap();
            let b = fit_rate(&scaled).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn hs_error_nondecreasing_in_order(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 6),
            s1 in 0.0f64..1.0,
            s2 in 0.0f64..1.0,
        ) {
            let b = basis(6);
            let mut e = vec![0.0; 49];
            for (k, &c) in coeffs.iter().enumerate() {
                for (x, y) in e.iter_mut().zip(column(&b, k)) {
                    *x += c * y;
                }
            }
            let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
            prop_assert!(hs_error_via_eigen(&e, &b, lo).unwrap() <= hs_error_via_eigen(&e, &b, hi).unwrap() + 1e-12);
        }
    }
}
