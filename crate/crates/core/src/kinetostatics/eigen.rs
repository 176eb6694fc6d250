//! Closed-form eigen-decomposition of a real symmetric 3x3 matrix.
//!
//! Eigenvalues come from the trigonometric solution of the characteristic
//! cubic. The eigenvector of the best separated eigenvalue is taken from the
//! cross products of the rows of `M - lambda I`; the other two are obtained
//! by diagonalising the 2x2 restriction of `M` to its orthogonal complement,
//! which stays well conditioned when those two eigenvalues coincide.

use std::f64::consts::PI;

use nalgebra::Matrix3;

use crate::model::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: [f64; 3],
    /// Orthonormal, matched with `values`.
    pub vectors: [Vec3; 3],
}

pub fn symmetric_eigen(m: &Matrix3<f64>) -> SymmetricEigen {
    let scale = m.abs().max();
    if scale == 0.0 || !scale.is_finite() {
        return SymmetricEigen {
            values: [0.0; 3],
            vectors: [Vec3::x(), Vec3::y(), Vec3::z()],
        };
    }
    let a = m / scale;
    let off = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
    let vectors = if off == 0.0 {
        [Vec3::x(), Vec3::y(), Vec3::z()]
    } else {
        let (hi, lo) = cubic_roots(&a);
        let mid = a.trace() - hi - lo;
        let distinct = if hi - mid > mid - lo { hi } else { lo };
        let v0 = null_vector(&(a - Matrix3::identity() * distinct));
        let (v1, v2) = complement_pair(&a, &v0);
        [v0, v1, v2]
    };
    let mut pairs: Vec<(f64, Vec3)> = vectors.iter().map(|v| (v.dot(&(m * v)), *v)).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    SymmetricEigen {
        values: [pairs[0].0, pairs[1].0, pairs[2].0],
        vectors: [pairs[0].1, pairs[1].1, pairs[2].1],
    }
}

/// Largest and smallest eigenvalue of `a` (symmetric, not diagonal).
fn cubic_roots(a: &Matrix3<f64>) -> (f64, f64) {
    let q = a.trace() / 3.0;
    let off = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
    let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    let b = (a - Matrix3::identity() * q) / p;
    let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    (q + 2.0 * p * phi.cos(), q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos())
}

/// Unit vector spanning the (approximate) null space of a rank-2 matrix.
fn null_vector(s: &Matrix3<f64>) -> Vec3 {
    let r: [Vec3; 3] = std::array::from_fn(|i| s.row(i).transpose());
    let candidates = [r[0].cross(&r[1]), r[0].cross(&r[2]), r[1].cross(&r[2])];
    let best = candidates
        .iter()
        .max_by(|x, y| x.norm_squared().total_cmp(&y.norm_squared()))
        .copied()
        .unwrap();
    let n = best.norm();
    if n > 0.0 {
        best / n
    } else {
        Vec3::x()
    }
}

fn complement_pair(a: &Matrix3<f64>, v: &Vec3) -> (Vec3, Vec3) {
    let seed = if v.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = v.cross(&seed).normalize();
    let w = v.cross(&u);
    let auu = u.dot(&(a * u));
    let auw = u.dot(&(a * w));
    let aww = w.dot(&(a * w));
    let angle = 0.5 * (2.0 * auw).atan2(auu - aww);
    let (s, c) = angle.sin_cos();
    (u * c + w * s, w * c - u * s)
}
