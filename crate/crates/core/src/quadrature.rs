//! Quadrature rules shared by assembly, expansion and error measurement.
//!
//! Triangles use the 7-point degree-5 rule, boundary edges use 4-point
//! Gauss-Legendre, and 1D integrals on (0, 1) use composite Gauss-Legendre.

use std::f64::consts::PI;

/// Barycentric point `(l1, l2, l3)` with weight relative to the triangle area.
#[derive(Debug, Clone, Copy)]
pub struct TriPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// 7-point rule exact for polynomials of total degree 5. Weights sum to 1.
pub fn triangle_rule_degree5() -> [TriPoint; 7] {
    let sq15 = 15f64.sqrt();
    let a1 = (6.0 - sq15) / 21.0;
    let b1 = 1.0 - 2.0 * a1;
    let a2 = (6.0 + sq15) / 21.0;
    let b2 = 1.0 - 2.0 * a2;
    let w1 = (155.0 - sq15) / 1200.0;
    let w2 = (155.0 + sq15) / 1200.0;
    [
        TriPoint { bary: [1.0 / 3.0; 3], weight: 0.225 },
        TriPoint { bary: [a1, a1, b1], weight: w1 },
        TriPoint { bary: [a1, b1, a1], weight: w1 },
        TriPoint { bary: [b1, a1, a1], weight: w1 },
        TriPoint { bary: [a2, a2, b2], weight: w2 },
        TriPoint { bary: [a2, b2, a2], weight: w2 },
        TriPoint { bary: [b2, a2, a2], weight: w2 },
    ]
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// 4-point Gauss rule mapped to the unit parameter interval [0, 1].
pub fn edge_rule() -> Vec<(f64, f64)> {
    unit_interval_rule(4)
}

/// n-point Gauss rule on [0, 1] as `(t, weight)` pairs.
pub fn unit_interval_rule(n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    x.iter().zip(&w).map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w)).collect()
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` equal panels of
/// `order` points each.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let base = unit_interval_rule(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let left = a + p as f64 * h;
        for &(t, w) in &base {
            out.push((left + t * h, w * h));
        }
    }
    out
}

/// Composite rule over (0, 1) with enough panels to resolve modes up to `kmax`.
pub fn resolving_rule(kmax: usize) -> Vec<(f64, f64)> {
    composite_rule(0.0, 1.0, (2 * kmax).max(32), 8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_rule_is_degree_five() {
        // reference triangle (0,0),(1,0),(0,1), area 1/2; ∫ x^a y^b = a! b! / (a+b+2)!
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let q: f64 = triangle_rule_degree5()
                    .iter()
                    .map(|p| {
                        let x = p.bary[1];
                        let y = p.bary[2];
                        0.5 * p.weight * x.powi(a as i32) * y.powi(b as i32)
                    })
                    .sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((q - exact).abs() < 1e-15, "x^{a} y^{b}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for n in 1..=10 {
            let rule = unit_interval_rule(n);
            for p in 0..(2 * n) {
                let q: f64 = rule.iter().map(|&(t, w)| w * t.powi(p as i32)).sum();
                assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn composite_rule_resolves_high_modes() {
        let rule = resolving_rule(200);
        let q: f64 = rule.iter().map(|&(x, w)| w * (199.0 * PI * x).sin()).sum();
        assert!((q - 2.0 / (199.0 * PI)).abs() < 1e-13);
    }
}
