//! Ambient manifolds: Euclidean space and round unit spheres, both embedded in ℝ⁴.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

pub type Vec4 = Vector4<f64>;
pub type Mat4 = Matrix4<f64>;

/// Ambient manifold `M`. Points are stored in ℝ⁴; unused coordinates are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AmbientManifold {
    /// ℝ^Q with `Q ≤ 4`.
    Euclidean(usize),
    /// Unit sphere `S^m ⊂ ℝ^{m+1}` with `m ≤ 3`.
    RoundSphere(usize),
}

impl AmbientManifold {
    pub const S3: AmbientManifold = AmbientManifold::RoundSphere(3);
    pub const R3: AmbientManifold = AmbientManifold::Euclidean(3);

    /// Dimension of the embedding space.
    pub fn embedding_dim(&self) -> usize {
        match *self {
            AmbientManifold::Euclidean(q) => q,
            AmbientManifold::RoundSphere(m) => m + 1,
        }
    }

    /// Intrinsic dimension `m`.
    pub fn dim(&self) -> usize {
        match *self {
            AmbientManifold::Euclidean(q) => q,
            AmbientManifold::RoundSphere(m) => m,
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, AmbientManifold::RoundSphere(_))
    }

    fn mask(&self, p: &Vec4) -> Vec4 {
        let q = self.embedding_dim();
        let mut out = *p;
        for i in q..4 {
            out[i] = 0.0;
        }
        out
    }

    /// Nearest point of `M`.
    pub fn projection(&self, p: &Vec4) -> Vec4 {
        let p = self.mask(p);
        match self {
            AmbientManifold::Euclidean(_) => p,
            AmbientManifold::RoundSphere(_) => {
                let n = p.norm();
                if n == 0.0 {
                    let mut e = Vec4::zeros();
                    e[0] = 1.0;
                    e
                } else {
                    p / n
                }
            }
        }
    }

    /// Distance from `p` to `M`, including components outside the embedding space.
    pub fn distance(&self, p: &Vec4) -> f64 {
        (p - self.projection(p)).norm()
    }

    /// Orthogonal projector onto `T_p M`.
    pub fn tangent_projector(&self, p: &Vec4) -> Mat4 {
        let q = self.embedding_dim();
        let mut m = Mat4::zeros();
        for i in 0..q {
            m[(i, i)] = 1.0;
        }
        if self.is_sphere() {
            let pp = self.mask(p);
            m -= pp * pp.transpose() / pp.norm_squared();
        }
        m
    }

    /// Project a vector onto `T_p M`.
    pub fn project_tangent(&self, p: &Vec4, v: &Vec4) -> Vec4 {
        let mut w = self.mask(v);
        if self.is_sphere() {
            let pp = self.mask(p);
            w -= pp * (pp.dot(&w) / pp.norm_squared());
        }
        w
    }

    /// Second fundamental form of `M ⊂ ℝ^{Q}` at `p` on tangent vectors.
    pub fn ambient_second_fundamental_form(&self, p: &Vec4, u: &Vec4, v: &Vec4) -> Vec4 {
        match self {
            AmbientManifold::Euclidean(_) => Vec4::zeros(),
            AmbientManifold::RoundSphere(_) => -u.dot(v) * p,
        }
    }

    /// Sectional curvature of `M`.
    pub fn sectional_curvature(&self) -> f64 {
        match self {
            AmbientManifold::Euclidean(_) => 0.0,
            AmbientManifold::RoundSphere(_) => 1.0,
        }
    }
}

/// Vector `n` with `det[a, b, c, x] = n · x` for all `x`.
pub fn cross3(a: &Vec4, b: &Vec4, c: &Vec4) -> Vec4 {
    let m3 = |r: [usize; 3]| -> f64 {
        let (i, j, k) = (r[0], r[1], r[2]);
        a[i] * (b[j] * c[k] - b[k] * c[j]) - a[j] * (b[i] * c[k] - b[k] * c[i])
            + a[k] * (b[i] * c[j] - b[j] * c[i])
    };
    Vec4::new(
        -m3([1, 2, 3]),
        m3([0, 2, 3]),
        -m3([0, 1, 3]),
        m3([0, 1, 2]),
    )
}

/// Cross product of the first three coordinates.
pub fn cross2(a: &Vec4, b: &Vec4) -> Vec4 {
    Vec4::new(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
        0.0,
    )
}

/// Determinant of the matrix with columns `a, b, c, d`.
pub fn det4(a: &Vec4, b: &Vec4, c: &Vec4, d: &Vec4) -> f64 {
    cross3(a, b, c).dot(d)
}

/// Simple 2-vector `a ∧ b` in the basis `e01, e02, e03, e12, e13, e23`.
pub fn wedge(a: &Vec4, b: &Vec4) -> [f64; 6] {
    let w = |i: usize, j: usize| a[i] * b[j] - a[j] * b[i];
    [w(0, 1), w(0, 2), w(0, 3), w(1, 2), w(1, 3), w(2, 3)]
}

/// Plücker residual of a 2-vector; zero exactly for simple 2-vectors.
pub fn plucker_residual(x: &[f64; 6]) -> f64 {
    x[0] * x[5] - x[1] * x[4] + x[2] * x[3]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross3_is_dual_of_determinant() {
        let a = Vec4::new(0.3, -1.0, 2.0, 0.5);
        let b = Vec4::new(1.1, 0.2, -0.7, 0.9);
        let c = Vec4::new(-0.4, 0.8, 0.1, 1.3);
        let n = cross3(&a, &b, &c);
        assert!(n.dot(&a).abs() < 1e-14);
        assert!(n.dot(&b).abs() < 1e-14);
        assert!(n.dot(&c).abs() < 1e-14);
        let m = Mat4::from_columns(&[a, b, c, n]);
        assert!((m.determinant() - n.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn sphere_projection_and_projector() {
        let s = AmbientManifold::S3;
        let p = Vec4::new(0.5, 0.5, 0.5, 0.5);
        assert_eq!(s.projection(&p), p);
        let pr = s.tangent_projector(&p);
        assert!((pr * pr - pr).norm() < 1e-15);
        assert!((pr - pr.transpose()).norm() < 1e-15);
        assert!((pr.trace() - 3.0).abs() < 1e-15);
        let u = Vec4::new(1.0, -1.0, 0.0, 0.0);
        let v = Vec4::new(1.0, 0.0, -1.0, 0.0);
        assert_eq!(s.ambient_second_fundamental_form(&p, &u, &v), -p);
    }

    #[test]
    fn euclidean_projector_rank() {
        let e = AmbientManifold::R3;
        let pr = e.tangent_projector(&Vec4::zeros());
        assert_eq!(pr.trace(), 3.0);
        let p = Vec4::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(e.projection(&p)[3], 0.0);
    }

    #[test]
    fn wedge_is_simple() {
        let a = Vec4::new(0.3, -1.0, 2.0, 0.5);
        let b = Vec4::new(1.1, 0.2, -0.7, 0.9);
        assert!(plucker_residual(&wedge(&a, &b)).abs() < 1e-14);
    }
}
