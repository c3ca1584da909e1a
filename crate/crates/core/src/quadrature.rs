//! One-dimensional rules and tensor-product grids on chart rectangles.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Periodic trapezoid rule on `[a, b)`.
    pub fn periodic(n: usize, a: f64, b: f64) -> Rule {
        let h = (b - a) / n as f64;
        Rule {
            nodes: (0..n).map(|k| a + h * k as f64).collect(),
            weights: vec![h; n],
        }
    }

    /// Gauss–Legendre rule on `[a, b]`.
    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Rule {
        let (x, w) = gauss_legendre_unit(n);
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        Rule {
            nodes: x.iter().map(|&t| c + r * t).collect(),
            weights: w.iter().map(|&t| r * t).collect(),
        }
    }

    /// Gauss–Legendre in `cos θ` on `(0, π)`, with weights expressed in the `dθ` measure.
    ///
    /// Integrands of the form `f(θ) sin θ` with `f` a polynomial in `cos θ` are integrated exactly.
    pub fn polar(n: usize) -> Rule {
        let (x, w) = gauss_legendre_unit(n);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for k in (0..n).rev() {
            let th = x[k].acos();
            nodes.push(th);
            weights.push(w[k] / th.sin());
        }
        Rule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Nodes (ascending) and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Kind of quadrature used along one chart direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    Periodic,
    GaussLegendre,
    Polar,
}

/// Tensor-product grid. Node `(i, j)` is stored at index `i * n2 + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub r1: Rule,
    pub r2: Rule,
}

impl Grid {
    pub fn new(r1: Rule, r2: Rule) -> Grid {
        Grid { r1, r2 }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.r1.len(), self.r2.len())
    }

    pub fn len(&self) -> usize {
        self.r1.len() * self.r2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, k: usize) -> ([f64; 2], f64) {
        let n2 = self.r2.len();
        let (i, j) = (k / n2, k % n2);
        (
            [self.r1.nodes[i], self.r2.nodes[j]],
            self.r1.weights[i] * self.r2.weights[j],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let r = Rule::gauss_legendre(6, -1.0, 1.0);
        for p in 0..12 {
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            let q = r.integrate(|x| x.powi(p));
            assert!((q - exact).abs() < 1e-14, "degree {p}: {q} vs {exact}");
        }
    }

    #[test]
    fn gauss_legendre_large_order() {
        let r = Rule::gauss_legendre(300, 0.0, 1.0);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        assert!((r.integrate(|x| (3.0 * x).exp()) - ((3.0f64).exp() - 1.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn polar_rule_gives_sphere_area() {
        let r = Rule::polar(8);
        let a = r.integrate(|t| t.sin()) * 2.0 * PI;
        assert!((a - 4.0 * PI).abs() < 1e-13);
        let m = r.integrate(|t| t.sin() * t.cos().powi(6));
        assert!((m - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn periodic_rule_exact_for_trig() {
        let r = Rule::periodic(16, 0.0, 2.0 * PI);
        assert!((r.integrate(|t| (5.0 * t).cos().powi(2)) - PI).abs() < 1e-13);
    }
}
