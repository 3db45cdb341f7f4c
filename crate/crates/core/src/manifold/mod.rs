//! Riemannian primitives for the circle, the 2-sphere, 3×3 symmetric positive
//! definite matrices under the affine-invariant metric, and flat ℝⁿ.
//!
//! Points and tangent vectors are stored in a chart-free coordinate
//! convention:
//!
//! | kind          | point coords                         | tangent components            |
//! |---------------|--------------------------------------|-------------------------------|
//! | `Circle`      | angle in (−π, π]                     | angular velocity (1 real)     |
//! | `Sphere2`     | unit vector in ℝ³                    | ℝ³ vector orthogonal to base  |
//! | `Spd3`        | upper triangle, row-major (6 reals)  | symmetric matrix, same layout |
//! | `Euclidean(n)`| n reals                              | n reals                       |
//!
//! Every function here is pure; values can be shared freely across threads.

pub(crate) mod circle;
mod euclidean;
mod frame;
pub(crate) mod spd;
mod sphere;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub use frame::{jacobi_eigenframe, JacobiEigenFrame};

/// Inline storage for point coordinates and tangent components.
pub type Coords = SmallVec<[f64; 6]>;

/// Tolerance for unit norm of sphere points and tangency of sphere vectors.
pub const UNIT_TOL: f64 = 1e-9;
/// Tolerance used by isometry checks of parallel transport.
pub const ISOMETRY_TOL: f64 = 1e-10;
/// Below this separation from the cut locus a logarithm is considered ambiguous.
pub const ANTIPODAL_TOL: f64 = 1e-12;

/// Tolerances used when validating user supplied points and vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub unit: f64,
    pub isometry: f64,
    pub antipodal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unit: UNIT_TOL,
            isometry: ISOMETRY_TOL,
            antipodal: ANTIPODAL_TOL,
        }
    }
}

/// The manifolds supported by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ManifoldKind {
    Circle,
    Sphere2,
    Spd3,
    Euclidean(usize),
}

impl ManifoldKind {
    /// Number of reals stored per point.
    pub fn coord_len(self) -> usize {
        match self {
            ManifoldKind::Circle => 1,
            ManifoldKind::Sphere2 => 3,
            ManifoldKind::Spd3 => 6,
            ManifoldKind::Euclidean(n) => n,
        }
    }

    /// Intrinsic dimension (size of an orthonormal tangent basis).
    pub fn dim(self) -> usize {
        match self {
            ManifoldKind::Circle => 1,
            ManifoldKind::Sphere2 => 2,
            ManifoldKind::Spd3 => 6,
            ManifoldKind::Euclidean(n) => n,
        }
    }

    /// Half the injectivity radius, or `None` when unbounded.
    pub fn injectivity_scale(self) -> Option<f64> {
        match self {
            ManifoldKind::Circle | ManifoldKind::Sphere2 => Some(std::f64::consts::FRAC_PI_2),
            ManifoldKind::Spd3 | ManifoldKind::Euclidean(_) => None,
        }
    }

    pub fn is_flat(self) -> bool {
        matches!(self, ManifoldKind::Circle | ManifoldKind::Euclidean(_))
    }

    pub(crate) fn check(self, other: ManifoldKind) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                expected: self,
                actual: other,
            })
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldKind::Circle => write!(f, "S1"),
            ManifoldKind::Sphere2 => write!(f, "S2"),
            ManifoldKind::Spd3 => write!(f, "Spd3"),
            ManifoldKind::Euclidean(n) => write!(f, "R{n}"),
        }
    }
}

impl FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S1" => Ok(ManifoldKind::Circle),
            "S2" => Ok(ManifoldKind::Sphere2),
            "Spd3" | "SPD3" | "Pos3" => Ok(ManifoldKind::Spd3),
            _ => {
                let dim = s
                    .strip_prefix('R')
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Error::InvalidSpec(format!("unknown manifold `{s}`")))?;
                if dim == 0 {
                    return Err(Error::InvalidSpec("Euclidean dimension must be >= 1".into()));
                }
                Ok(ManifoldKind::Euclidean(dim))
            }
        }
    }
}

impl TryFrom<String> for ManifoldKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ManifoldKind> for String {
    fn from(k: ManifoldKind) -> String {
        k.to_string()
    }
}

/// A point on one of the supported manifolds.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    kind: ManifoldKind,
    coords: Coords,
}

impl ManifoldPoint {
    /// Builds a point, validating the manifold invariants.
    pub fn new(kind: ManifoldKind, coords: &[f64]) -> Result<Self> {
        Self::new_with(kind, coords, &Tolerances::default())
    }

    pub fn new_with(kind: ManifoldKind, coords: &[f64], tol: &Tolerances) -> Result<Self> {
        if coords.len() != kind.coord_len() {
            return Err(Error::InvalidPoint(format!(
                "{kind} expects {} coordinates, got {}",
                kind.coord_len(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        match kind {
            ManifoldKind::Circle => {
                let t = coords[0];
                if !(t > -std::f64::consts::PI && t <= std::f64::consts::PI) {
                    return Err(Error::InvalidPoint(format!("angle {t} outside (-pi, pi]")));
                }
            }
            ManifoldKind::Sphere2 => {
                let n = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
                if (n - 1.0).abs() > tol.unit {
                    return Err(Error::InvalidPoint(format!("sphere point has norm {n}")));
                }
            }
            ManifoldKind::Spd3 => {
                let min = spd::min_eigenvalue(coords);
                if !(min > 0.0) {
                    return Err(Error::InvalidPoint(format!(
                        "matrix is not positive definite (min eigenvalue {min})"
                    )));
                }
            }
            ManifoldKind::Euclidean(_) => {}
        }
        Ok(Self {
            kind,
            coords: Coords::from_slice(coords),
        })
    }

    pub(crate) fn from_raw(kind: ManifoldKind, coords: Coords) -> Self {
        debug_assert_eq!(coords.len(), kind.coord_len());
        Self { kind, coords }
    }

    /// A circle point; the angle is reduced to (−π, π].
    pub fn circle(angle: f64) -> Self {
        Self::from_raw(ManifoldKind::Circle, smallvec::smallvec![circle::canonical(angle)])
    }

    /// A sphere point obtained by normalizing `v` (which must be nonzero).
    pub fn sphere(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidPoint("cannot normalize zero vector".into()));
        }
        Ok(Self::from_raw(
            ManifoldKind::Sphere2,
            Coords::from_slice(&[v[0] / n, v[1] / n, v[2] / n]),
        ))
    }

    /// A positive definite matrix given by its upper triangle `[xx, xy, xz, yy, yz, zz]`.
    pub fn spd3(upper: [f64; 6]) -> Result<Self> {
        Self::new(ManifoldKind::Spd3, &upper)
    }

    pub fn euclidean(v: &[f64]) -> Self {
        Self::from_raw(ManifoldKind::Euclidean(v.len()), Coords::from_slice(v))
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// A tangent vector anchored at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: ManifoldPoint,
    components: Coords,
}

impl TangentVector {
    /// Builds a tangent vector, checking tangency for sphere bases.
    pub fn new(base: &ManifoldPoint, components: &[f64]) -> Result<Self> {
        if components.len() != base.kind.coord_len() {
            return Err(Error::InvalidTangent(format!(
                "expected {} components, got {}",
                base.kind.coord_len(),
                components.len()
            )));
        }
        if base.kind == ManifoldKind::Sphere2 {
            let dot: f64 = base.coords.iter().zip(components).map(|(a, b)| a * b).sum();
            let n = components.iter().map(|c| c * c).sum::<f64>().sqrt();
            if dot.abs() > UNIT_TOL * n.max(1.0) {
                return Err(Error::InvalidTangent(format!(
                    "sphere tangent not orthogonal to base (dot {dot:e})"
                )));
            }
        }
        Ok(Self::from_raw(base.clone(), Coords::from_slice(components)))
    }

    /// Projects ambient components onto the tangent space (sphere) and symmetrizes nothing else.
    pub fn projected(base: &ManifoldPoint, components: &[f64]) -> Self {
        let mut c = Coords::from_slice(components);
        if base.kind == ManifoldKind::Sphere2 {
            sphere::project_tangent(&base.coords, &mut c);
        }
        Self::from_raw(base.clone(), c)
    }

    pub(crate) fn from_raw(base: ManifoldPoint, components: Coords) -> Self {
        debug_assert_eq!(components.len(), base.kind.coord_len());
        Self { base, components }
    }

    pub fn zero(base: &ManifoldPoint) -> Self {
        Self::from_raw(base.clone(), smallvec::smallvec![0.0; base.kind.coord_len()])
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_raw(self.base.clone(), self.components.iter().map(|c| c * s).collect())
    }

    /// `self + s * other`; both must share the base point.
    pub fn add_scaled(&mut self, other: &TangentVector, s: f64) {
        debug_assert_eq!(self.base.kind, other.base.kind);
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            *a += s * b;
        }
    }

    pub fn norm(&self) -> f64 {
        inner(self, self).max(0.0).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| *c == 0.0)
    }
}

/// How to break the tie when a logarithm is requested at the cut locus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AntipodalPolicy {
    #[default]
    Error,
    /// Circle: take the +π branch. Sphere: move along the first tangent basis vector.
    DeterministicPositive,
}

/// Riemannian distance.
pub fn dist(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
    x.kind.check(y.kind)?;
    Ok(dist_unchecked(x, y))
}

pub(crate) fn dist_unchecked(x: &ManifoldPoint, y: &ManifoldPoint) -> f64 {
    if x.coords == y.coords {
        return 0.0;
    }
    match x.kind {
        ManifoldKind::Circle => circle::dist(x.coords[0], y.coords[0]),
        ManifoldKind::Sphere2 => sphere::dist(&x.coords, &y.coords),
        ManifoldKind::Spd3 => spd::dist(&x.coords, &y.coords),
        ManifoldKind::Euclidean(_) => euclidean::dist(&x.coords, &y.coords),
    }
}

/// Riemannian exponential map.
pub fn exp(base: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
    base.kind.check(v.base.kind)?;
    Ok(exp_unchecked(base, &v.components))
}

pub(crate) fn exp_unchecked(base: &ManifoldPoint, v: &[f64]) -> ManifoldPoint {
    let coords = match base.kind {
        ManifoldKind::Circle => smallvec::smallvec![circle::canonical(base.coords[0] + v[0])],
        ManifoldKind::Sphere2 => sphere::exp(&base.coords, v),
        ManifoldKind::Spd3 => spd::exp(&base.coords, v),
        ManifoldKind::Euclidean(_) => euclidean::exp(&base.coords, v),
    };
    ManifoldPoint::from_raw(base.kind, coords)
}

/// Riemannian logarithm; errors at the cut locus.
pub fn log(base: &ManifoldPoint, target: &ManifoldPoint) -> Result<TangentVector> {
    log_with(base, target, AntipodalPolicy::Error)
}

pub fn log_with(base: &ManifoldPoint, target: &ManifoldPoint, policy: AntipodalPolicy) -> Result<TangentVector> {
    base.kind.check(target.kind)?;
    let comps = match base.kind {
        ManifoldKind::Circle => smallvec::smallvec![circle::log(base.coords[0], target.coords[0], policy)?],
        ManifoldKind::Sphere2 => sphere::log(&base.coords, &target.coords, policy)?,
        ManifoldKind::Spd3 => spd::log(&base.coords, &target.coords),
        ManifoldKind::Euclidean(_) => euclidean::log(&base.coords, &target.coords),
    };
    Ok(TangentVector::from_raw(base.clone(), comps))
}

/// Point at time `t` on the constant-speed geodesic with γ(0) = x, γ(1) = y.
pub fn geodesic_point(x: &ManifoldPoint, y: &ManifoldPoint, t: f64) -> Result<ManifoldPoint> {
    geodesic_point_with(x, y, t, AntipodalPolicy::Error)
}

pub fn geodesic_point_with(
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    t: f64,
    policy: AntipodalPolicy,
) -> Result<ManifoldPoint> {
    x.kind.check(y.kind)?;
    if x.kind == ManifoldKind::Spd3 {
        return Ok(ManifoldPoint::from_raw(
            x.kind,
            spd::geodesic_point(&x.coords, &y.coords, t),
        ));
    }
    let v = log_with(x, y, policy)?;
    let scaled: Coords = v.components.iter().map(|c| c * t).collect();
    Ok(exp_unchecked(x, &scaled))
}

/// Geodesic midpoint.
pub fn midpoint(x: &ManifoldPoint, y: &ManifoldPoint, policy: AntipodalPolicy) -> Result<ManifoldPoint> {
    geodesic_point_with(x, y, 0.5, policy)
}

/// Parallel transport of `v` from `from` to `to` along the shortest geodesic.
pub fn parallel_transport(from: &ManifoldPoint, to: &ManifoldPoint, v: &TangentVector) -> Result<TangentVector> {
    from.kind.check(to.kind)?;
    from.kind.check(v.base.kind)?;
    let comps = match from.kind {
        ManifoldKind::Circle | ManifoldKind::Euclidean(_) => v.components.clone(),
        ManifoldKind::Sphere2 => sphere::transport(&from.coords, &to.coords, &v.components)?,
        ManifoldKind::Spd3 => spd::transport(&from.coords, &to.coords, &v.components),
    };
    Ok(TangentVector::from_raw(to.clone(), comps))
}

/// Transports several vectors along the same geodesic.
pub fn parallel_transport_many(
    from: &ManifoldPoint,
    to: &ManifoldPoint,
    vs: &[TangentVector],
) -> Result<Vec<TangentVector>> {
    if from.kind != ManifoldKind::Spd3 {
        return vs.iter().map(|v| parallel_transport(from, to, v)).collect();
    }
    to.kind.check(from.kind)?;
    let e = spd::transport_matrix(&from.coords, &to.coords);
    vs.iter()
        .map(|v| {
            from.kind.check(v.base.kind)?;
            Ok(TangentVector::from_raw(
                to.clone(),
                spd::transport_with(&e, &v.components),
            ))
        })
        .collect()
}

/// Riemannian inner product of two tangent vectors at the same base.
pub fn inner(a: &TangentVector, b: &TangentVector) -> f64 {
    inner_at(&a.base, &a.components, &b.components)
}

pub(crate) fn inner_at(base: &ManifoldPoint, a: &[f64], b: &[f64]) -> f64 {
    match base.kind {
        ManifoldKind::Spd3 => spd::inner(&base.coords, a, b),
        _ => a.iter().zip(b).map(|(x, y)| x * y).sum(),
    }
}

/// An orthonormal basis of the tangent space at `p`.
pub fn tangent_basis(p: &ManifoldPoint) -> Vec<TangentVector> {
    let comps: Vec<Coords> = match p.kind {
        ManifoldKind::Circle => vec![smallvec::smallvec![1.0]],
        ManifoldKind::Sphere2 => sphere::basis(&p.coords).to_vec(),
        ManifoldKind::Spd3 => spd::basis(&p.coords),
        ManifoldKind::Euclidean(n) => euclidean::basis(n),
    };
    comps
        .into_iter()
        .map(|c| TangentVector::from_raw(p.clone(), c))
        .collect()
}

/// Coefficients of `v` in an orthonormal basis.
pub fn coefficients(basis: &[TangentVector], v: &TangentVector) -> Vec<f64> {
    basis.iter().map(|b| inner(b, v)).collect()
}

/// Linear combination `Σ c_k basis_k`.
pub fn combine(base: &ManifoldPoint, basis: &[TangentVector], coeffs: &[f64]) -> TangentVector {
    let mut out = TangentVector::zero(base);
    for (b, c) in basis.iter().zip(coeffs) {
        out.add_scaled(b, *c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn circle_distances() {
        let a = ManifoldPoint::circle(0.0);
        let b = ManifoldPoint::circle(FRAC_PI_2);
        assert_abs_diff_eq!(dist(&a, &b).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        let c = ManifoldPoint::circle(3.0 * PI / 4.0);
        let d = ManifoldPoint::circle(-3.0 * PI / 4.0);
        assert_abs_diff_eq!(dist(&c, &d).unwrap(), FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn circle_canonical_range() {
        assert_eq!(ManifoldPoint::circle(-PI).coords()[0], PI);
        assert_abs_diff_eq!(ManifoldPoint::circle(3.0 * PI).coords()[0], PI, epsilon = 1e-12);
        assert!(ManifoldPoint::new(ManifoldKind::Circle, &[-PI]).is_err());
    }

    #[test]
    fn spd_distance_to_scaled_identity() {
        let i = ManifoldPoint::spd3([1.0, 0.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        let e = std::f64::consts::E;
        let ei = ManifoldPoint::spd3([e, 0.0, 0.0, e, 0.0, e]).unwrap();
        assert_abs_diff_eq!(dist(&i, &ei).unwrap(), 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let pts = [
            ManifoldPoint::circle(1.0),
            ManifoldPoint::sphere([0.3, -0.2, 0.9]).unwrap(),
            ManifoldPoint::spd3([2.0, 0.1, 0.0, 1.0, 0.2, 3.0]).unwrap(),
            ManifoldPoint::euclidean(&[1.0, 2.0]),
        ];
        for p in &pts {
            let q = exp(p, &TangentVector::zero(p)).unwrap();
            assert!(dist(p, &q).unwrap() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn sphere_exp_reaches_equator() {
        let north = ManifoldPoint::sphere([0.0, 0.0, 1.0]).unwrap();
        let v = TangentVector::new(&north, &[FRAC_PI_2, 0.0, 0.0]).unwrap();
        let q = exp(&north, &v).unwrap();
        assert_abs_diff_eq!(q.coords()[2], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.coords()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn spd_exp_at_identity_is_matrix_exponential() {
        let i = ManifoldPoint::spd3([1.0, 0.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        let v = TangentVector::new(&i, &[0.5, 0.0, 0.0, -0.25, 0.0, 1.0]).unwrap();
        let x = exp(&i, &v).unwrap();
        let expected = [0.5f64.exp(), 0.0, 0.0, (-0.25f64).exp(), 0.0, 1f64.exp()];
        for (a, b) in x.coords().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn log_basics() {
        let a = ManifoldPoint::circle(0.0);
        let b = ManifoldPoint::circle(FRAC_PI_2);
        assert_abs_diff_eq!(log(&a, &b).unwrap().components()[0], FRAC_PI_2, epsilon = 1e-15);
        assert!(log(&a, &a).unwrap().is_zero());
        let c = ManifoldPoint::circle(PI);
        assert_eq!(log(&a, &c), Err(Error::AntipodalPoint));
        let v = log_with(&a, &c, AntipodalPolicy::DeterministicPositive).unwrap();
        assert_eq!(v.components()[0], PI);
    }

    #[test]
    fn sphere_antipodal_log() {
        let n = ManifoldPoint::sphere([0.0, 0.0, 1.0]).unwrap();
        let s = ManifoldPoint::sphere([0.0, 0.0, -1.0]).unwrap();
        assert_eq!(log(&n, &s), Err(Error::AntipodalPoint));
        let v = log_with(&n, &s, AntipodalPolicy::DeterministicPositive).unwrap();
        assert_abs_diff_eq!(v.norm(), PI, epsilon = 1e-12);
        let back = exp(&n, &v).unwrap();
        assert!(dist(&back, &s).unwrap() < 1e-9);
    }

    #[test]
    fn geodesic_point_cases() {
        let a = ManifoldPoint::circle(0.0);
        let b = ManifoldPoint::circle(1.0);
        assert_abs_diff_eq!(geodesic_point(&a, &b, 2.0).unwrap().coords()[0], 2.0, epsilon = 1e-15);
        let p = ManifoldPoint::sphere([1.0, 0.2, 0.1]).unwrap();
        let q = ManifoldPoint::sphere([0.1, 1.0, -0.4]).unwrap();
        let m = geodesic_point(&p, &q, 0.5).unwrap();
        assert_abs_diff_eq!(dist(&m, &p).unwrap(), dist(&m, &q).unwrap(), epsilon = 1e-12);
        let far = geodesic_point(&p, &q, 2.0).unwrap();
        let n: f64 = far.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
        assert_abs_diff_eq!(n, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn transport_cases() {
        let x = ManifoldPoint::euclidean(&[1.0, 2.0]);
        let y = ManifoldPoint::euclidean(&[-3.0, 0.5]);
        let v = TangentVector::new(&x, &[0.3, -0.7]).unwrap();
        assert_eq!(parallel_transport(&x, &y, &v).unwrap().components(), v.components());
        assert_eq!(parallel_transport(&x, &x, &v).unwrap(), v);

        let p = ManifoldPoint::sphere([1.0, 0.0, 0.0]).unwrap();
        let q = ManifoldPoint::sphere([0.6, 0.8, 0.0]).unwrap();
        let t = log(&p, &q).unwrap();
        let moved = parallel_transport(&p, &q, &t).unwrap();
        let back = log(&q, &p).unwrap().scaled(-1.0);
        for (a, b) in moved.components().iter().zip(back.components()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn kind_mismatch_is_reported() {
        let a = ManifoldPoint::circle(0.0);
        let b = ManifoldPoint::euclidean(&[0.0]);
        assert!(matches!(dist(&a, &b), Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn kind_round_trips_through_strings() {
        for k in [
            ManifoldKind::Circle,
            ManifoldKind::Sphere2,
            ManifoldKind::Spd3,
            ManifoldKind::Euclidean(4),
        ] {
            assert_eq!(k.to_string().parse::<ManifoldKind>().unwrap(), k);
        }
        assert!("R0".parse::<ManifoldKind>().is_err());
        assert!("H2".parse::<ManifoldKind>().is_err());
    }

    #[test]
    fn bases_are_orthonormal() {
        let pts = [
            ManifoldPoint::sphere([0.2, -0.5, 0.8]).unwrap(),
            ManifoldPoint::spd3([2.0, 0.3, -0.1, 1.5, 0.2, 0.7]).unwrap(),
            ManifoldPoint::euclidean(&[0.0; 3]),
        ];
        for p in &pts {
            let b = tangent_basis(p);
            assert_eq!(b.len(), p.kind().dim());
            for (i, u) in b.iter().enumerate() {
                for (j, w) in b.iter().enumerate() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(inner(u, w), e, epsilon = 1e-12);
                }
            }
        }
    }
}
