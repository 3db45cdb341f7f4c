//! Gradients of functions of a weighted mean with respect to its inputs.
//!
//! At a mean `m` of points `u_j` with weights `a_j` the field
//! `W(m) = Σ a_j log_m u_j` vanishes. Differentiating that identity gives
//! `dM/du_j = −L⁻¹ (a_j r_j)`, where `L` and `r_j` act diagonally in the
//! eigenframe of the Jacobi operator along `m → u_j` with the scalar factors
//! [`f2`] and [`f1`]. Gradients are therefore pulled back as
//! `∇_{u_j}(h∘M) = −R_j* L⁻* ∇h`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::manifold::{
    coefficients, combine, dist, jacobi_eigenframe, log, parallel_transport_many, tangent_basis, ManifoldPoint,
    TangentVector,
};

const SERIES_CUTOFF: f64 = 1e-4;

/// Gradient of `y ↦ dist(y, f)^p`.
///
/// At `y = f` the gradient is zero for `p > 1`; for `p ≤ 1` it does not
/// exist and `SingularGradient` is returned.
pub fn grad_dist_p(y: &ManifoldPoint, f: &ManifoldPoint, p: f64) -> Result<TangentVector> {
    let v = log(y, f)?;
    let r = v.norm();
    if r == 0.0 {
        if p <= 1.0 {
            return Err(Error::SingularGradient(p));
        }
        return Ok(TangentVector::zero(y));
    }
    Ok(v.scaled(-p * r.powf(p - 2.0)))
}

fn sqrt_arg(lambda: f64, d: f64) -> Result<f64> {
    let x = lambda.abs().sqrt() * d;
    if lambda > 0.0 && x >= std::f64::consts::PI {
        return Err(Error::ConjugatePoint(x));
    }
    Ok(x)
}

/// Scale of the inverse Jacobi map: `x/sin x`, `1`, or `x/sinh x` with `x = √|λ| d`.
pub fn f1(lambda: f64, d: f64) -> Result<f64> {
    let x = sqrt_arg(lambda, d)?;
    Ok(if lambda == 0.0 {
        1.0
    } else if x < SERIES_CUTOFF {
        let s = lambda.signum();
        1.0 + s * x * x / 6.0
    } else if lambda > 0.0 {
        x / x.sin()
    } else {
        x / x.sinh()
    })
}

/// Derivative of the logarithm in its base point: `−x cot x`, `−1`, or `−x coth x`.
pub fn f2(lambda: f64, d: f64) -> Result<f64> {
    let x = sqrt_arg(lambda, d)?;
    Ok(if lambda == 0.0 {
        -1.0
    } else if x < SERIES_CUTOFF {
        let s = lambda.signum();
        -1.0 + s * x * x / 3.0
    } else if lambda > 0.0 {
        -x * x.cos() / x.sin()
    } else {
        -x * x.cosh() / x.sinh()
    })
}

/// Per-input data along the geodesic `m → u_j`, expressed in an orthonormal
/// basis at `m`.
#[derive(Debug, Clone)]
struct Leg {
    weight: f64,
    distance: f64,
    /// Coordinates of the eigenframe vectors in the basis at `m`.
    frame: Vec<Vec<f64>>,
    f1: Vec<f64>,
    /// The eigenframe transported to `u_j`.
    transported: Vec<TangentVector>,
}

/// Everything needed to differentiate one weighted mean.
#[derive(Debug, Clone)]
pub struct MeanDifferentialContext {
    mean: ManifoldPoint,
    points: Vec<ManifoldPoint>,
    basis: Vec<TangentVector>,
    legs: Vec<Leg>,
    l: DMatrix<f64>,
}

impl MeanDifferentialContext {
    /// `mean` must be a stationary point of the weighted objective.
    pub fn new(points: &[ManifoldPoint], weights: &[f64], mean: &ManifoldPoint) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let basis = tangent_basis(mean);
        let dim = basis.len();
        let mut l = DMatrix::zeros(dim, dim);
        let mut legs = Vec::with_capacity(points.len());
        for (u, &a) in points.iter().zip(weights) {
            let v = log(mean, u)?;
            let d = v.norm();
            if d == 0.0 || a == 0.0 {
                for k in 0..dim {
                    l[(k, k)] -= a;
                }
                legs.push(Leg {
                    weight: a,
                    distance: d,
                    frame: Vec::new(),
                    f1: Vec::new(),
                    transported: Vec::new(),
                });
                continue;
            }
            let fr = jacobi_eigenframe(mean, &v)?;
            let mut frame = Vec::with_capacity(dim);
            let mut g1 = Vec::with_capacity(dim);
            for (w, lam) in fr.vectors.iter().zip(&fr.eigenvalues) {
                let c = coefficients(&basis, w);
                let g2 = f2(*lam, d)?;
                for r in 0..dim {
                    for s in 0..dim {
                        l[(r, s)] += a * g2 * c[r] * c[s];
                    }
                }
                g1.push(f1(*lam, d)?);
                frame.push(c);
            }
            let transported = parallel_transport_many(mean, u, &fr.vectors)?;
            legs.push(Leg {
                weight: a,
                distance: d,
                frame,
                f1: g1,
                transported,
            });
        }
        Ok(Self {
            mean: mean.clone(),
            points: points.to_vec(),
            basis,
            legs,
            l,
        })
    }

    pub fn mean(&self) -> &ManifoldPoint {
        &self.mean
    }

    pub fn distances(&self) -> Vec<f64> {
        self.legs.iter().map(|l| l.distance).collect()
    }

    /// `L` in the orthonormal basis returned by [`Self::basis`].
    pub fn l_matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn basis(&self) -> &[TangentVector] {
        &self.basis
    }

    /// `R_j* w`: adjoint of the differential of `u_j ↦ a_j log_m u_j`.
    pub fn adjoint_rj(&self, j: usize, w: &TangentVector) -> Result<TangentVector> {
        self.mean.kind().check(w.base().kind())?;
        let leg = &self.legs[j];
        let u = &self.points[j];
        if leg.weight == 0.0 {
            return Ok(TangentVector::zero(u));
        }
        if leg.frame.is_empty() {
            // u_j coincides with m
            return Ok(TangentVector::projected(u, w.components()).scaled(leg.weight));
        }
        let x = coefficients(&self.basis, w);
        let mut out = TangentVector::zero(u);
        for ((c, g), t) in leg.frame.iter().zip(&leg.f1).zip(&leg.transported) {
            let alpha: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
            out.add_scaled(t, leg.weight * alpha * g);
        }
        Ok(out)
    }

    /// Solves `L* x = w`; `L` is self-adjoint.
    pub fn apply_l_adjoint_inverse(&self, w: &TangentVector) -> Result<TangentVector> {
        self.mean.kind().check(w.base().kind())?;
        let rhs = DVector::from_vec(coefficients(&self.basis, w));
        let eig = SymmetricEigen::new(self.l.clone());
        let largest = eig.eigenvalues.amax();
        let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if !(smallest >= 1e-12 * largest) || largest == 0.0 {
            return Err(Error::SingularL { smallest, largest });
        }
        let q = &eig.eigenvectors;
        let mut y = q.transpose() * rhs;
        for (yi, li) in y.iter_mut().zip(eig.eigenvalues.iter()) {
            *yi /= li;
        }
        let x = q * y;
        Ok(combine(&self.mean, &self.basis, x.as_slice()))
    }

    /// Gradients of `h∘M` with respect to every input, given `g = ∇h(m)`.
    pub fn pullback(&self, g: &TangentVector) -> Result<Vec<TangentVector>> {
        let z = self.apply_l_adjoint_inverse(g)?.scaled(-1.0);
        (0..self.points.len()).map(|j| self.adjoint_rj(j, &z)).collect()
    }
}

/// Gradient of `dist(mean(a, u), f)^p` with respect to each `u_j`.
///
/// `mean` must be the (stationary) weighted mean of `points`. At `mean = f`
/// all gradients are zero, which is the chosen subgradient for `p = 1`.
pub fn grad_data_atom(
    points: &[ManifoldPoint],
    weights: &[f64],
    mean: &ManifoldPoint,
    f: &ManifoldPoint,
    p: f64,
) -> Result<Vec<TangentVector>> {
    if dist(mean, f)? == 0.0 {
        return Ok(points.iter().map(TangentVector::zero).collect());
    }
    let g = grad_dist_p(mean, f, p)?;
    MeanDifferentialContext::new(points, weights, mean)?.pullback(&g)
}
