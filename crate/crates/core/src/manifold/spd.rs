//! Affine-invariant geometry on 3×3 symmetric positive definite matrices.
//!
//! All closed forms whiten by `B^{-1/2}`, act on the identity, and color back
//! with `B^{1/2}`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use super::Coords;

pub(crate) type M3 = Matrix3<f64>;

pub(crate) fn to_mat(c: &[f64]) -> M3 {
    M3::new(c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5])
}

pub(crate) fn from_mat(m: &M3) -> Coords {
    let s = |i: usize, j: usize| 0.5 * (m[(i, j)] + m[(j, i)]);
    Coords::from_slice(&[m[(0, 0)], s(0, 1), s(0, 2), m[(1, 1)], s(1, 2), m[(2, 2)]])
}

pub(crate) fn eig(m: &M3) -> (Vector3<f64>, M3) {
    let e = SymmetricEigen::new(*m);
    (e.eigenvalues, e.eigenvectors)
}

/// `Q diag(f(λ)) Qᵀ` for symmetric `m`.
pub(crate) fn map_eig(m: &M3, f: impl Fn(f64) -> f64) -> M3 {
    let (vals, q) = eig(m);
    let d = M3::from_diagonal(&vals.map(f));
    q * d * q.transpose()
}

pub(crate) fn min_eigenvalue(c: &[f64]) -> f64 {
    let (vals, _) = eig(&to_mat(c));
    vals.min()
}

pub(crate) struct Whitener {
    pub sqrt: M3,
    pub inv_sqrt: M3,
}

impl Whitener {
    pub fn new(b: &[f64]) -> Self {
        let (vals, q) = eig(&to_mat(b));
        let s = M3::from_diagonal(&vals.map(f64::sqrt));
        let is = M3::from_diagonal(&vals.map(|v| 1.0 / v.sqrt()));
        let qt = q.transpose();
        Self {
            sqrt: q * s * qt,
            inv_sqrt: q * is * qt,
        }
    }

    pub fn whiten(&self, m: &M3) -> M3 {
        sym(&(self.inv_sqrt * m * self.inv_sqrt))
    }

    pub fn color(&self, m: &M3) -> M3 {
        sym(&(self.sqrt * m * self.sqrt))
    }
}

fn sym(m: &M3) -> M3 {
    (m + m.transpose()) * 0.5
}

pub(crate) fn dist(b: &[f64], x: &[f64]) -> f64 {
    let w = Whitener::new(b);
    let (vals, _) = eig(&w.whiten(&to_mat(x)));
    vals.iter().map(|v| v.ln().powi(2)).sum::<f64>().sqrt()
}

pub(crate) fn exp(b: &[f64], v: &[f64]) -> Coords {
    let w = Whitener::new(b);
    let e = map_eig(&w.whiten(&to_mat(v)), f64::exp);
    from_mat(&w.color(&e))
}

pub(crate) fn log(b: &[f64], x: &[f64]) -> Coords {
    let w = Whitener::new(b);
    let l = map_eig(&w.whiten(&to_mat(x)), f64::ln);
    from_mat(&w.color(&l))
}

pub(crate) fn geodesic_point(b: &[f64], x: &[f64], t: f64) -> Coords {
    let w = Whitener::new(b);
    let p = map_eig(&w.whiten(&to_mat(x)), |v| v.powf(t));
    from_mat(&w.color(&p))
}

/// `E = B^{1/2} (B^{-1/2} X B^{-1/2})^{1/2} B^{-1/2}`; transport is `E V Eᵀ`.
pub(crate) fn transport_matrix(b: &[f64], x: &[f64]) -> M3 {
    let w = Whitener::new(b);
    let half = map_eig(&w.whiten(&to_mat(x)), f64::sqrt);
    w.sqrt * half * w.inv_sqrt
}

pub(crate) fn transport_with(e: &M3, v: &[f64]) -> Coords {
    from_mat(&(e * to_mat(v) * e.transpose()))
}

pub(crate) fn transport(b: &[f64], x: &[f64], v: &[f64]) -> Coords {
    transport_with(&transport_matrix(b, x), v)
}

pub(crate) fn inner(b: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let bm = to_mat(b);
    let bi = bm.try_inverse().unwrap_or_else(M3::zeros);
    (bi * to_mat(u) * bi * to_mat(v)).trace()
}

/// Orthonormal Frobenius basis of Sym(3), packed.
pub(crate) fn identity_basis() -> [Coords; 6] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let e = |k: usize, val: f64| {
        let mut c = Coords::from_slice(&[0.0; 6]);
        c[k] = val;
        c
    };
    [e(0, 1.0), e(1, r), e(2, r), e(3, 1.0), e(4, r), e(5, 1.0)]
}

pub(crate) fn basis(b: &[f64]) -> Vec<Coords> {
    let w = Whitener::new(b);
    identity_basis()
        .iter()
        .map(|e| from_mat(&w.color(&to_mat(e))))
        .collect()
}
