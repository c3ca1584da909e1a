//! Scalar Galerkin bases on chart rectangles.

use crate::chart::{dcos, dsin};
use crate::variation::ScalarJet;

/// Finite family of smooth scalar functions on the parameter rectangle.
pub trait ScalarBasis: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Jets of every basis function at `u`.
    fn eval(&self, u: [f64; 2]) -> Vec<ScalarJet>;
}

/// One trigonometric factor: `cos(m x)` or `sin(m x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos(u32),
    Sin(u32),
}

impl Trig {
    fn d(&self, n: usize, x: f64) -> f64 {
        match *self {
            Trig::Cos(m) => {
                let m = m as f64;
                m.powi(n as i32) * dcos(n, m * x)
            }
            Trig::Sin(m) => {
                let m = m as f64;
                if m == 0.0 {
                    0.0
                } else {
                    m.powi(n as i32) * dsin(n, m * x)
                }
            }
        }
    }
}

/// Linear combinations of products `T₁(u₁) T₂(u₂)` of trigonometric factors.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigBasis {
    pub functions: Vec<Vec<(f64, Trig, Trig)>>,
}

impl TrigBasis {
    /// All products with frequencies up to `k` in each direction: `(2k+1)²` functions.
    pub fn full(k: u32) -> Self {
        let mut one = vec![Trig::Cos(0)];
        for m in 1..=k {
            one.push(Trig::Cos(m));
            one.push(Trig::Sin(m));
        }
        let mut functions = Vec::new();
        for a in &one {
            for b in &one {
                functions.push(vec![(1.0, *a, *b)]);
            }
        }
        TrigBasis { functions }
    }

    /// Functions on the Clifford torus preserved by `(z₁,z₂) ↦ (z₂,z₁)` composed with the
    /// normal flip and by the half-period shifts: `f(φ,θ) = −f(θ,φ)`, even frequencies.
    pub fn swap_antisymmetric_even(k: u32) -> Self {
        let mut one = vec![Trig::Cos(0)];
        for m in (2..=k).step_by(2) {
            one.push(Trig::Cos(m));
            one.push(Trig::Sin(m));
        }
        let mut functions = Vec::new();
        for (i, a) in one.iter().enumerate() {
            for b in one.iter().skip(i + 1) {
                functions.push(vec![(1.0, *a, *b), (-1.0, *b, *a)]);
            }
        }
        TrigBasis { functions }
    }
}

impl ScalarBasis for TrigBasis {
    fn len(&self) -> usize {
        self.functions.len()
    }

    fn eval(&self, u: [f64; 2]) -> Vec<ScalarJet> {
        self.functions
            .iter()
            .map(|terms| {
                let mut s = ScalarJet::default();
                for &(c, a, b) in terms {
                    let fa = [a.d(0, u[0]), a.d(1, u[0]), a.d(2, u[0])];
                    let fb = [b.d(0, u[1]), b.d(1, u[1]), b.d(2, u[1])];
                    s.f += c * fa[0] * fb[0];
                    s.d[0] += c * fa[1] * fb[0];
                    s.d[1] += c * fa[0] * fb[1];
                    s.dd[0] += c * fa[2] * fb[0];
                    s.dd[1] += c * fa[1] * fb[1];
                    s.dd[2] += c * fa[0] * fb[2];
                }
                s
            })
            .collect()
    }
}

/// Polynomials of degree `≤ L` restricted to the unit sphere, in the spherical chart
/// `(θ, φ) ↦ (sinθ cosφ, sinθ sinφ, cosθ)`. Monomials `xᵃ yᵇ zᶜ` with `c ≤ 1` form a
/// basis of dimension `(L+1)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePolyBasis {
    pub exponents: Vec<[u32; 3]>,
}

impl SpherePolyBasis {
    pub fn new(degree: u32) -> Self {
        let mut exponents = Vec::new();
        for total in 0..=degree {
            for c in 0..=1u32.min(total) {
                for a in 0..=(total - c) {
                    exponents.push([a, total - c - a, c]);
                }
            }
        }
        SpherePolyBasis { exponents }
    }

    /// Only the listed exponent triples.
    pub fn from_exponents(exponents: Vec<[u32; 3]>) -> Self {
        SpherePolyBasis { exponents }
    }
}

fn pow_jet(x: f64, e: u32) -> [f64; 3] {
    let p = |k: u32| if k == 0 { 1.0 } else { x.powi(k as i32) };
    let e_f = e as f64;
    [
        p(e),
        if e >= 1 { e_f * p(e - 1) } else { 0.0 },
        if e >= 2 { e_f * (e_f - 1.0) * p(e - 2) } else { 0.0 },
    ]
}

impl ScalarBasis for SpherePolyBasis {
    fn len(&self) -> usize {
        self.exponents.len()
    }

    fn eval(&self, u: [f64; 2]) -> Vec<ScalarJet> {
        let (st, ct, sp, cp) = (u[0].sin(), u[0].cos(), u[1].sin(), u[1].cos());
        let x = [st * cp, st * sp, ct];
        let dx = [[ct * cp, ct * sp, -st], [-st * sp, st * cp, 0.0]];
        let ddx = [[-st * cp, -st * sp, -ct], [-ct * sp, ct * cp, 0.0], [-st * cp, -st * sp, 0.0]];
        self.exponents
            .iter()
            .map(|e| {
                let pj = [pow_jet(x[0], e[0]), pow_jet(x[1], e[1]), pow_jet(x[2], e[2])];
                let val = pj[0][0] * pj[1][0] * pj[2][0];
                let mut grad = [0.0; 3];
                let mut hess = [[0.0; 3]; 3];
                for a in 0..3 {
                    let mut g = 1.0;
                    for b in 0..3 {
                        g *= if a == b { pj[b][1] } else { pj[b][0] };
                    }
                    grad[a] = g;
                    for c in 0..3 {
                        let mut h = 1.0;
                        for b in 0..3 {
                            let order = (a == b) as usize + (c == b) as usize;
                            h *= pj[b][order];
                        }
                        hess[a][c] = h;
                    }
                }
                let mut s = ScalarJet { f: val, ..Default::default() };
                for i in 0..2 {
                    s.d[i] = (0..3).map(|a| grad[a] * dx[i][a]).sum();
                }
                for (k, (i, j)) in [(0usize, 0usize), (0, 1), (1, 1)].into_iter().enumerate() {
                    let mut v = 0.0;
                    for a in 0..3 {
                        v += grad[a] * ddx[k][a];
                        for c in 0..3 {
                            v += hess[a][c] * dx[i][a] * dx[j][c];
                        }
                    }
                    s.dd[k] = v;
                }
                s
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(b: &dyn ScalarBasis, u: [f64; 2]) {
        let h = 1e-5;
        let j = b.eval(u);
        let p = [b.eval([u[0] + h, u[1]]), b.eval([u[0], u[1] + h])];
        let m = [b.eval([u[0] - h, u[1]]), b.eval([u[0], u[1] - h])];
        for a in 0..b.len() {
            for i in 0..2 {
                let d = (p[i][a].f - m[i][a].f) / (2.0 * h);
                assert!((d - j[a].d[i]).abs() < 1e-7 * (1.0 + d.abs()), "fn {a} d{i}");
                for k in 0..2 {
                    let dd = (p[i][a].d[k] - m[i][a].d[k]) / (2.0 * h);
                    assert!((dd - j[a].dd[i + k]).abs() < 1e-6 * (1.0 + dd.abs()), "fn {a} d{i}{k}");
                }
            }
        }
    }

    #[test]
    fn derivatives_match_differences() {
        fd_check(&TrigBasis::full(3), [0.4, 1.9]);
        fd_check(&TrigBasis::swap_antisymmetric_even(4), [0.4, 1.9]);
        fd_check(&SpherePolyBasis::new(4), [0.8, 2.3]);
    }

    #[test]
    fn sizes() {
        assert_eq!(TrigBasis::full(2).len(), 25);
        assert_eq!(SpherePolyBasis::new(6).len(), 49);
    }
}
