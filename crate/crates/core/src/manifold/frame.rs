use super::spd::{self, Whitener, M3};
use super::sphere;
use super::{Coords, ManifoldKind, ManifoldPoint, TangentVector};
use crate::error::{Error, Result};

/// Orthonormal eigenbasis of the Jacobi operator `J ↦ R(J, e) e` along the
/// geodesic leaving `base` in the unit direction `e`.
///
/// `vectors[0]` is tangent to the geodesic (eigenvalue 0). Eigenvalues are the
/// sectional curvatures of the planes spanned by `e` and each vector.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiEigenFrame {
    pub base: ManifoldPoint,
    pub direction: TangentVector,
    pub vectors: Vec<TangentVector>,
    pub eigenvalues: Vec<f64>,
}

pub fn jacobi_eigenframe(base: &ManifoldPoint, direction: &TangentVector) -> Result<JacobiEigenFrame> {
    base.kind.check(direction.base().kind)?;
    let norm = direction.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroDirection);
    }
    let unit: Coords = direction.components().iter().map(|c| c / norm).collect();
    let (vectors, eigenvalues): (Vec<Coords>, Vec<f64>) = match base.kind {
        ManifoldKind::Circle => (vec![unit], vec![0.0]),
        ManifoldKind::Euclidean(n) => {
            let vecs = complete_basis(&unit, n);
            (vecs, vec![0.0; n])
        }
        ManifoldKind::Sphere2 => {
            let mut e = unit;
            sphere::project_tangent(base.coords(), &mut e);
            let n = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            e.iter_mut().for_each(|x| *x /= n);
            let w2 = Coords::from_slice(&sphere::cross3(base.coords(), &e));
            (vec![e, w2], vec![0.0, 1.0])
        }
        ManifoldKind::Spd3 => spd_frame(base.coords(), direction.components()),
    };
    Ok(JacobiEigenFrame {
        base: base.clone(),
        direction: direction.clone(),
        vectors: vectors
            .into_iter()
            .map(|c| TangentVector::from_raw(base.clone(), c))
            .collect(),
        eigenvalues,
    })
}

/// Gram-Schmidt completion of a unit vector to an orthonormal basis of ℝⁿ.
fn complete_basis(first: &[f64], n: usize) -> Vec<Coords> {
    let mut out: Vec<Coords> = vec![Coords::from_slice(first)];
    let mut candidates: Vec<usize> = (0..n).collect();
    // prefer axes least aligned with the direction
    candidates.sort_by(|&a, &b| first[a].abs().total_cmp(&first[b].abs()));
    for k in candidates {
        if out.len() == n {
            break;
        }
        let mut v: Coords = (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
        for _ in 0..2 {
            for u in &out {
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            out.push(v);
        }
    }
    out
}

fn spd_frame(b: &[f64], dir: &[f64]) -> (Vec<Coords>, Vec<f64>) {
    let w = Whitener::new(b);
    let wd = w.whiten(&spd::to_mat(dir));
    let (vals, q) = spd::eig(&wd);
    let v = [vals[0], vals[1], vals[2]];
    let nv2: f64 = v.iter().map(|x| x * x).sum();
    let vn = nv2.sqrt();
    let color = |m: M3| spd::from_mat(&w.color(&(q * m * q.transpose())));

    let mut vectors = Vec::with_capacity(6);
    let mut eigenvalues = Vec::with_capacity(6);
    let unit = [v[0] / vn, v[1] / vn, v[2] / vn];
    for d in complete_basis(&unit, 3) {
        vectors.push(color(M3::from_diagonal(&nalgebra::Vector3::new(d[0], d[1], d[2]))));
        eigenvalues.push(0.0);
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for (a, c) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let mut m = M3::zeros();
        m[(a, c)] = r;
        m[(c, a)] = r;
        vectors.push(color(m));
        eigenvalues.push(-(v[a] - v[c]).powi(2) / (4.0 * nv2));
    }
    (vectors, eigenvalues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{inner, log};
    use approx::assert_abs_diff_eq;

    fn check_orthonormal(f: &JacobiEigenFrame) {
        for (i, a) in f.vectors.iter().enumerate() {
            for (j, b) in f.vectors.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(inner(a, b), e, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn circle_frame() {
        let p = ManifoldPoint::circle(0.3);
        let d = TangentVector::new(&p, &[-2.0]).unwrap();
        let f = jacobi_eigenframe(&p, &d).unwrap();
        assert_eq!(f.vectors[0].components(), &[-1.0]);
        assert_eq!(f.eigenvalues, vec![0.0]);
    }

    #[test]
    fn sphere_frame_has_unit_curvature() {
        let p = ManifoldPoint::sphere([0.1, 0.7, 0.2]).unwrap();
        let q = ManifoldPoint::sphere([-0.4, 0.2, 0.9]).unwrap();
        let d = log(&p, &q).unwrap();
        let f = jacobi_eigenframe(&p, &d).unwrap();
        assert_eq!(f.eigenvalues, vec![0.0, 1.0]);
        check_orthonormal(&f);
        assert_abs_diff_eq!(inner(&f.vectors[0], &d), d.norm(), epsilon = 1e-12);
    }

    #[test]
    fn spd_frame_nonpositive() {
        let p = ManifoldPoint::spd3([2.0, 0.3, 0.1, 1.0, -0.2, 1.5]).unwrap();
        let q = ManifoldPoint::spd3([1.0, -0.1, 0.0, 3.0, 0.4, 0.8]).unwrap();
        let d = log(&p, &q).unwrap();
        let f = jacobi_eigenframe(&p, &d).unwrap();
        assert_eq!(f.vectors.len(), 6);
        assert!(f.eigenvalues.iter().all(|l| *l <= 0.0));
        check_orthonormal(&f);
        assert_abs_diff_eq!(inner(&f.vectors[0], &d), d.norm(), epsilon = 1e-9);
    }

    #[test]
    fn euclidean_frame_completes_basis() {
        let p = ManifoldPoint::euclidean(&[0.0; 4]);
        let d = TangentVector::new(&p, &[1.0, 2.0, 0.0, -1.0]).unwrap();
        let f = jacobi_eigenframe(&p, &d).unwrap();
        assert_eq!(f.vectors.len(), 4);
        check_orthonormal(&f);
    }

    #[test]
    fn zero_direction_rejected() {
        let p = ManifoldPoint::sphere([0.0, 0.0, 1.0]).unwrap();
        let d = TangentVector::zero(&p);
        assert_eq!(jacobi_eigenframe(&p, &d), Err(Error::ZeroDirection));
    }
}
