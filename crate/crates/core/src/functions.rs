//! Closed-form scalar fields and their serializable descriptors.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A scalar function of the plane.
pub type Field = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub fn field(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Field {
    Arc::new(f)
}

/// Serializable description of a closed-form field, as used in problem
/// files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionSpec {
    Zero,
    Constant { value: f64 },
    /// `c + ax·x + ay·y`
    Affine { c: f64, ax: f64, ay: f64 },
    /// Sum of `coef · x^px · y^py`.
    Polynomial { terms: Vec<(f64, i32, i32)> },
    /// `amplitude · sin(kπx) sin(lπy)`
    SineProduct { amplitude: f64, k: u32, l: u32 },
    /// `amplitude · cos(kπx) cos(lπy)`
    CosineProduct { amplitude: f64, k: u32, l: u32 },
    /// `r^a sin(a θ)` with polar coordinates about the corner (0, 0).
    CornerSingular { exponent: f64 },
    /// Sum of other descriptors.
    Sum { parts: Vec<FunctionSpec> },
}

impl FunctionSpec {
    pub fn to_field(&self) -> Field {
        match self.clone() {
            FunctionSpec::Zero => field(|_, _| 0.0),
            FunctionSpec::Constant { value } => field(move |_, _| value),
            FunctionSpec::Affine { c, ax, ay } => field(move |x, y| c + ax * x + ay * y),
            FunctionSpec::Polynomial { terms } => field(move |x, y| {
                terms.iter().map(|&(c, px, py)| c * x.powi(px) * y.powi(py)).sum()
            }),
            FunctionSpec::SineProduct { amplitude, k, l } => field(move |x, y| {
                amplitude * (k as f64 * PI * x).sin() * (l as f64 * PI * y).sin()
            }),
            FunctionSpec::CosineProduct { amplitude, k, l } => field(move |x, y| {
                amplitude * (k as f64 * PI * x).cos() * (l as f64 * PI * y).cos()
            }),
            FunctionSpec::CornerSingular { exponent } => field(move |x, y| corner_singular(exponent, x, y)),
            FunctionSpec::Sum { parts } => {
                let fields: Vec<Field> = parts.iter().map(|p| p.to_field()).collect();
                field(move |x, y| fields.iter().map(|f| f(x, y)).sum())
            }
        }
    }

    /// Whether the field is harmonic and affine, in which case P1 reproduces it.
    pub fn is_affine(&self) -> bool {
        matches!(self, FunctionSpec::Zero | FunctionSpec::Constant { .. } | FunctionSpec::Affine { .. })
    }
}

/// `r^a sin(a θ)`, `r, θ` measured from the origin with `θ ∈ [0, π/2]` on
/// the unit square.
pub fn corner_singular(a: f64, x: f64, y: f64) -> f64 {
    let r = x.hypot(y);
    if r == 0.0 {
        return 0.0;
    }
    r.powf(a) * (a * y.atan2(x)).sin()
}

/// Smoothness classification of boundary data, reported alongside results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    /// Trace in `H^{1/2}(∂Ω)`: the weak form is well posed.
    Smooth,
    /// Only the very-weak form is meaningful.
    Rough,
}

/// Boundary data `g`, either closed form or per-node values.
#[derive(Clone)]
pub enum BoundaryValues {
    Function(Field),
    /// Indexed by mesh node; interior entries are ignored.
    Nodal(Vec<f64>),
}

#[derive(Clone)]
pub struct BoundaryDatum {
    pub values: BoundaryValues,
    pub smoothness: Smoothness,
}

impl BoundaryDatum {
    pub fn function(f: Field) -> Self {
        Self { values: BoundaryValues::Function(f), smoothness: Smoothness::Smooth }
    }

    pub fn rough(f: Field) -> Self {
        Self { values: BoundaryValues::Function(f), smoothness: Smoothness::Rough }
    }

    pub fn nodal(values: Vec<f64>) -> Self {
        Self { values: BoundaryValues::Nodal(values), smoothness: Smoothness::Smooth }
    }

    pub fn zero() -> Self {
        Self::function(field(|_, _| 0.0))
    }
}

impl fmt::Debug for BoundaryDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.values {
            BoundaryValues::Function(_) => "function".to_string(),
            BoundaryValues::Nodal(v) => format!("nodal[{}]", v.len()),
        };
        f.debug_struct("BoundaryDatum")
            .field("values", &kind)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors_round_trip_through_json() {
        let spec = FunctionSpec::Sum {
            parts: vec![
                FunctionSpec::SineProduct { amplitude: 1.0, k: 2, l: 2 },
                FunctionSpec::Polynomial { terms: vec![(2.0, 1, 0), (-1.0, 0, 2)] },
            ],
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: FunctionSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
        let f = back.to_field();
        let expected = (PI).sin() * (PI).sin() + 2.0 * 0.5 - 0.25;
        assert!((f(0.5, 0.5) - expected).abs() < 1e-14);
    }

    #[test]
    fn corner_singular_vanishes_on_bottom_edge() {
        assert_eq!(corner_singular(0.4999, 0.3, 0.0), 0.0);
        assert_eq!(corner_singular(0.4999, 0.0, 0.0), 0.0);
        let left = corner_singular(0.5, 0.0, 0.25);
        assert!((left - 0.5 * (PI / 4.0).sin()).abs() < 1e-15);
    }
}
