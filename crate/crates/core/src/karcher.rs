//! Weighted Riemannian centers of mass with possibly negative weights.
//!
//! On the circle the objective is piecewise quadratic between the cut points
//! of the inputs, so the global minimizer is found exactly by visiting every
//! arc. Elsewhere a damped Riemannian gradient descent on
//! `½ Σ a_j dist²(m, u_j)` is used.

use crate::error::{Error, Result};
use crate::manifold::{circle, dist_unchecked, exp_unchecked, log, ManifoldKind, ManifoldPoint, TangentVector};

/// Finite weights with a strictly positive sum.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    sum: f64,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidWeights("non-finite weight".into()));
        }
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, need > 0")));
        }
        Ok(Self { weights, sum })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sum of the positive weights.
    pub fn positive_sum(&self) -> f64 {
        self.weights.iter().filter(|w| **w > 0.0).sum()
    }

    /// Absolute sum of the negative weights.
    pub fn negative_sum(&self) -> f64 {
        -self.weights.iter().filter(|w| **w < 0.0).sum::<f64>()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|w| *w >= 0.0)
    }

    /// Radius factor `C = 2(A⁺ + A⁻)/A` such that means of points in a ball
    /// `B(x, r)` stay inside `B(x, C r)`.
    pub fn containment_factor(&self) -> f64 {
        2.0 * (self.positive_sum() + self.negative_sum()) / self.sum
    }

    fn largest(&self) -> usize {
        let mut best = 0;
        for (j, w) in self.weights.iter().enumerate() {
            if *w > self.weights[best] {
                best = j;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum MeanInit {
    #[default]
    LargestPositiveWeightPoint,
    GivenPoint(ManifoldPoint),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanOptions {
    pub max_iters: usize,
    /// Stationarity threshold, scaled by `max(1, spread)` of the inputs.
    pub grad_tol: f64,
    pub init: MeanInit,
}

impl Default for MeanOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            grad_tol: 1e-10,
            init: MeanInit::LargestPositiveWeightPoint,
        }
    }
}

impl MeanOptions {
    pub fn with_init(mut self, p: ManifoldPoint) -> Self {
        self.init = MeanInit::GivenPoint(p);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.grad_tol > 0.0) {
            return Err(Error::InvalidSpec(
                "mean options need max_iters >= 1 and grad_tol > 0".into(),
            ));
        }
        Ok(())
    }
}

fn check_inputs(points: &[ManifoldPoint], a: &WeightVector) -> Result<ManifoldKind> {
    if points.len() != a.len() || points.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "{} points but {} weights",
            points.len(),
            a.len()
        )));
    }
    let kind = points[0].kind();
    for p in &points[1..] {
        kind.check(p.kind())?;
    }
    Ok(kind)
}

/// `W(m) = Σ a_j log_m(u_j)`, the negative gradient of the mean objective.
pub fn mean_vector_field(points: &[ManifoldPoint], a: &WeightVector, m: &ManifoldPoint) -> Result<TangentVector> {
    check_inputs(points, a)?;
    m.kind().check(points[0].kind())?;
    let mut w = TangentVector::zero(m);
    for (u, aj) in points.iter().zip(a.weights()) {
        if *aj != 0.0 {
            w.add_scaled(&log(m, u)?, *aj);
        }
    }
    Ok(w)
}

/// `½ Σ a_j dist²(m, u_j)`.
pub fn mean_objective(points: &[ManifoldPoint], a: &WeightVector, m: &ManifoldPoint) -> f64 {
    0.5 * points
        .iter()
        .zip(a.weights())
        .filter(|(_, w)| **w != 0.0)
        .map(|(u, w)| w * dist_unchecked(m, u).powi(2))
        .sum::<f64>()
}

/// Weighted Riemannian center of mass.
pub fn weighted_mean(points: &[ManifoldPoint], a: &WeightVector, opts: &MeanOptions) -> Result<ManifoldPoint> {
    let kind = check_inputs(points, a)?;
    opts.validate()?;
    match kind {
        ManifoldKind::Circle => {
            let cands = circle_minimizers(points, a);
            let best = match &opts.init {
                MeanInit::GivenPoint(p) => nearest(&cands, p),
                MeanInit::LargestPositiveWeightPoint => nearest(&cands, &points[a.largest()]),
            };
            Ok(best)
        }
        ManifoldKind::Euclidean(_) => Ok(euclidean_mean(points, a)),
        _ => {
            let start = start_point(points, a, &opts.init)?;
            descend(points, a, start, opts)
        }
    }
}

/// Among the minimizers reachable from several starts, the one closest to
/// `anchor`.
pub fn weighted_mean_nearest(
    points: &[ManifoldPoint],
    a: &WeightVector,
    anchor: &ManifoldPoint,
    opts: &MeanOptions,
) -> Result<ManifoldPoint> {
    let kind = check_inputs(points, a)?;
    opts.validate()?;
    kind.check(anchor.kind())?;
    match kind {
        ManifoldKind::Circle => Ok(nearest(&circle_minimizers(points, a), anchor)),
        ManifoldKind::Euclidean(_) => Ok(euclidean_mean(points, a)),
        _ if certified_unique(points, a) => {
            let start = start_point(points, a, &opts.init)?;
            descend(points, a, start, opts)
        }
        _ => {
            let mut starts = vec![anchor.clone(), start_point(points, a, &opts.init)?];
            if !matches!(opts.init, MeanInit::LargestPositiveWeightPoint) {
                starts.push(points[a.largest()].clone());
            }
            starts.extend(
                points
                    .iter()
                    .zip(a.weights())
                    .filter(|(_, w)| **w > 0.0)
                    .map(|(p, _)| p.clone()),
            );
            let mut found = Vec::new();
            let mut first_err = None;
            for s in starts {
                match descend(points, a, s, opts) {
                    Ok(m) => {
                        let phi = mean_objective(points, a, &m);
                        found.push((m, phi));
                    }
                    Err(e) => {
                        first_err.get_or_insert(e);
                    }
                }
            }
            if found.is_empty() {
                return Err(first_err.unwrap_or(Error::NoConvergence {
                    iterations: 0,
                    residual: f64::NAN,
                }));
            }
            let best = found.iter().map(|(_, f)| *f).fold(f64::INFINITY, f64::min);
            let tol = tie_tolerance(a);
            let cands: Vec<ManifoldPoint> = found
                .into_iter()
                .filter(|(_, f)| *f <= best + tol)
                .map(|(m, _)| m)
                .collect();
            Ok(nearest(&cands, anchor))
        }
    }
}

fn tie_tolerance(a: &WeightVector) -> f64 {
    1e-9 * (a.positive_sum() + a.negative_sum())
}

fn nearest(cands: &[ManifoldPoint], anchor: &ManifoldPoint) -> ManifoldPoint {
    let mut best = &cands[0];
    let mut bd = dist_unchecked(best, anchor);
    for c in &cands[1..] {
        let d = dist_unchecked(c, anchor);
        if d < bd - 1e-12 {
            best = c;
            bd = d;
        }
    }
    best.clone()
}

/// Nonnegative weights on a Hadamard manifold, or on the sphere inside a
/// ball well within the convexity radius.
fn certified_unique(points: &[ManifoldPoint], a: &WeightVector) -> bool {
    if !a.is_nonnegative() {
        return false;
    }
    match points[0].kind() {
        ManifoldKind::Spd3 | ManifoldKind::Euclidean(_) => true,
        ManifoldKind::Sphere2 => {
            let c = &points[a.largest()];
            points
                .iter()
                .zip(a.weights())
                .filter(|(_, w)| **w > 0.0)
                .all(|(p, _)| dist_unchecked(c, p) <= std::f64::consts::FRAC_PI_4)
        }
        ManifoldKind::Circle => true,
    }
}

fn start_point(points: &[ManifoldPoint], a: &WeightVector, init: &MeanInit) -> Result<ManifoldPoint> {
    match init {
        MeanInit::LargestPositiveWeightPoint => Ok(points[a.largest()].clone()),
        MeanInit::GivenPoint(p) => {
            points[0].kind().check(p.kind())?;
            Ok(p.clone())
        }
    }
}

fn euclidean_mean(points: &[ManifoldPoint], a: &WeightVector) -> ManifoldPoint {
    let n = points[0].coords().len();
    let mut acc = vec![0.0; n];
    for (p, w) in points.iter().zip(a.weights()) {
        for (x, c) in acc.iter_mut().zip(p.coords()) {
            *x += w * c;
        }
    }
    acc.iter_mut().for_each(|x| *x /= a.sum());
    ManifoldPoint::euclidean(&acc)
}

/// Residual accepted once no step improves the objective or the residual.
const STALL_TOL: f64 = 1e-6;

fn descend(
    points: &[ManifoldPoint],
    a: &WeightVector,
    start: ManifoldPoint,
    opts: &MeanOptions,
) -> Result<ManifoldPoint> {
    let spread = points
        .iter()
        .zip(a.weights())
        .filter(|(_, w)| **w != 0.0)
        .map(|(p, _)| dist_unchecked(&start, p))
        .fold(0.0, f64::max);
    let threshold = opts.grad_tol * spread.max(1.0);
    let base_step = 1.0 / a.sum();

    let mut m = start;
    let mut phi = mean_objective(points, a, &m);
    let mut w = mean_vector_field(points, a, &m)?;
    let mut wn = w.norm();
    let mut step = base_step;
    let mut stalled = false;
    for _ in 0..opts.max_iters {
        if wn <= threshold {
            return Ok(m);
        }
        let mut accepted = false;
        for _ in 0..60 {
            let cand = exp_unchecked(&m, w.scaled(step).components());
            let phic = mean_objective(points, a, &cand);
            let wc = match mean_vector_field(points, a, &cand) {
                Ok(v) => v,
                Err(_) => {
                    step *= 0.5;
                    continue;
                }
            };
            let wcn = wc.norm();
            // below round-off of the objective, fall back on the residual
            let flat = (phic - phi).abs() <= 1e-13 * phi.abs().max(1.0);
            if phic < phi && !flat || flat && wcn < wn {
                m = cand;
                phi = phic;
                w = wc;
                wn = wcn;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            stalled = true;
            break;
        }
        step = (step * 1.5).min(base_step * 1e3);
    }
    // stalled at round-off: badly conditioned inputs floor the residual
    if wn <= threshold || stalled && wn <= STALL_TOL * spread.max(1.0) {
        Ok(m)
    } else {
        Err(Error::NoConvergence {
            iterations: opts.max_iters,
            residual: wn,
        })
    }
}

/// Global minimizers of the weighted objective on the circle (up to ties).
fn circle_minimizers(points: &[ManifoldPoint], a: &WeightVector) -> Vec<ManifoldPoint> {
    use std::f64::consts::PI;
    let active: Vec<(f64, f64)> = points
        .iter()
        .zip(a.weights())
        .filter(|(_, w)| **w != 0.0)
        .map(|(p, w)| (p.coords()[0], *w))
        .collect();
    let mut cuts: Vec<f64> = active.iter().map(|(t, _)| circle::canonical(t + PI)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);

    let objective = |m: f64| -> f64 { 0.5 * active.iter().map(|(t, w)| w * circle::dist(m, *t).powi(2)).sum::<f64>() };

    let mut cands: Vec<(f64, f64)> = Vec::with_capacity(cuts.len() + 1);
    let k = cuts.len();
    for i in 0..k {
        let s = cuts[i];
        let e = if i + 1 < k { cuts[i + 1] } else { cuts[0] + 2.0 * PI };
        if e - s < 1e-15 {
            continue;
        }
        let mid = 0.5 * (s + e);
        // unwrapped representatives nearest the arc keep the objective quadratic
        let num: f64 = active
            .iter()
            .map(|(t, w)| w * (mid - circle::signed_diff(mid, *t)))
            .sum();
        let m = (num / a.sum()).clamp(s, e);
        let m = circle::canonical(m);
        cands.push((m, objective(m)));
    }
    let best = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let tol = tie_tolerance(a);
    cands
        .into_iter()
        .filter(|c| c.1 <= best + tol)
        .map(|c| ManifoldPoint::circle(c.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn weight_vector_rejects_nonpositive_sum() {
        assert!(WeightVector::new(vec![0.5, -0.5]).is_err());
        assert!(WeightVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(WeightVector::new(vec![-1.0, 2.0]).is_ok());
    }

    #[test]
    fn field_vanishes_at_symmetric_midpoint() {
        let pts = [ManifoldPoint::circle(0.0), ManifoldPoint::circle(PI / 2.0)];
        let f = mean_vector_field(&pts, &w(&[0.5, 0.5]), &ManifoldPoint::circle(PI / 4.0)).unwrap();
        assert_abs_diff_eq!(f.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn circle_quarter_mean() {
        let pts = [ManifoldPoint::circle(0.0), ManifoldPoint::circle(PI / 2.0)];
        let m = weighted_mean(&pts, &w(&[0.5, 0.5]), &MeanOptions::default()).unwrap();
        assert_abs_diff_eq!(m.coords()[0], PI / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn circle_mean_across_the_branch_cut() {
        let pts = [ManifoldPoint::circle(3.0), ManifoldPoint::circle(-3.0)];
        let m = weighted_mean(&pts, &w(&[0.5, 0.5]), &MeanOptions::default()).unwrap();
        assert_abs_diff_eq!(m.coords()[0].abs(), PI, epsilon = 1e-12);
    }

    #[test]
    fn zero_middle_weight_on_geodesic() {
        let mids = [
            ManifoldPoint::circle(-0.7),
            ManifoldPoint::circle(0.0),
            ManifoldPoint::circle(0.7),
        ];
        let m = weighted_mean(&mids, &w(&[0.5, 0.0, 0.5]), &MeanOptions::default()).unwrap();
        assert_abs_diff_eq!(m.coords()[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sphere_symmetric_pair() {
        let pts = [
            ManifoldPoint::sphere([1.0, 0.0, 0.0]).unwrap(),
            ManifoldPoint::sphere([0.0, 1.0, 0.0]).unwrap(),
        ];
        let m = weighted_mean(&pts, &w(&[0.5, 0.5]), &MeanOptions::default()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(m.coords(), &[r, r, 0.0][..], epsilon = 1e-10);
    }

    #[test]
    fn spd_pair_mean_is_geodesic_midpoint() {
        let x = ManifoldPoint::spd3([2.0, 0.3, 0.0, 1.0, 0.1, 3.0]).unwrap();
        let y = ManifoldPoint::spd3([1.0, -0.2, 0.1, 2.0, 0.0, 0.5]).unwrap();
        let m = weighted_mean(&[x.clone(), y.clone()], &w(&[0.5, 0.5]), &MeanOptions::default()).unwrap();
        let mid = crate::manifold::geodesic_point(&x, &y, 0.5).unwrap();
        assert!(dist_unchecked(&m, &mid) < 1e-9);
    }

    #[test]
    fn antipodal_circle_pair_picks_nearest_to_anchor() {
        let pts = [ManifoldPoint::circle(0.0), ManifoldPoint::circle(PI)];
        let a = w(&[0.5, 0.5]);
        let up = weighted_mean_nearest(&pts, &a, &ManifoldPoint::circle(1.2), &MeanOptions::default()).unwrap();
        let down = weighted_mean_nearest(&pts, &a, &ManifoldPoint::circle(-1.2), &MeanOptions::default()).unwrap();
        assert_abs_diff_eq!(up.coords()[0], PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(down.coords()[0], -PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn negative_weights_extrapolate() {
        // weights (-1, 2) reflect the first point through the second
        let pts = [ManifoldPoint::circle(0.2), ManifoldPoint::circle(0.5)];
        let m = weighted_mean(&pts, &w(&[-1.0, 2.0]), &MeanOptions::default()).unwrap();
        assert_abs_diff_eq!(m.coords()[0], 0.8, epsilon = 1e-12);
        let s = [
            ManifoldPoint::sphere([1.0, 0.0, 0.0]).unwrap(),
            ManifoldPoint::sphere([0.9, 0.3, 0.1]).unwrap(),
        ];
        let m = weighted_mean(&s, &w(&[-1.0, 2.0]), &MeanOptions::default()).unwrap();
        let g = crate::manifold::geodesic_point(&s[0], &s[1], 2.0).unwrap();
        assert!(dist_unchecked(&m, &g) < 1e-9);
    }
}
