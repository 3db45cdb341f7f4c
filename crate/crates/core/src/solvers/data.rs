//! Gradients and proximal maps of single data atoms `dist(A(u)_i, f_i)^p`.

use crate::differentials::grad_data_atom;
use crate::error::Result;
use crate::karcher::{weighted_mean_nearest, MeanOptions, WeightVector};
use crate::manifold::{dist_unchecked, exp_unchecked, log, ManifoldPoint, TangentVector};
use crate::operator::MeasurementMatrix;
use crate::signal::Signal;

/// Gradient of data atom `i` with respect to the samples it reads, given
/// its current mean `m`.
pub fn row_gradient(
    a: &MeasurementMatrix,
    i: usize,
    u: &Signal,
    m: &ManifoldPoint,
    f: &ManifoldPoint,
    p: f64,
) -> Result<Vec<(usize, TangentVector)>> {
    let row = a.row(i);
    let pts: Vec<ManifoldPoint> = row.iter().map(|(j, _)| u.get(*j).clone()).collect();
    let w: Vec<f64> = row.iter().map(|(_, w)| *w).collect();
    let g = grad_data_atom(&pts, &w, m, f, p)?;
    Ok(row.iter().map(|(j, _)| *j).zip(g).collect())
}

struct Local<'a> {
    x: Vec<ManifoldPoint>,
    w: WeightVector,
    f: &'a ManifoldPoint,
    p: f64,
    mu: f64,
    opts: &'a MeanOptions,
}

impl Local<'_> {
    fn mean(&self, y: &[ManifoldPoint], warm: &ManifoldPoint) -> Result<ManifoldPoint> {
        weighted_mean_nearest(y, &self.w, self.f, &self.opts.clone().with_init(warm.clone()))
    }

    fn objective(&self, y: &[ManifoldPoint], m: &ManifoldPoint) -> f64 {
        let d2: f64 = self.x.iter().zip(y).map(|(a, b)| dist_unchecked(a, b).powi(2)).sum();
        self.mu * dist_unchecked(m, self.f).powf(self.p) + 0.5 * d2
    }

    /// `∇Φ` of `Φ(y) = μ·dist(M(y), f)^p + ½Σ dist²(x_j, y_j)`.
    fn gradient(&self, y: &[ManifoldPoint], m: &ManifoldPoint) -> Result<Vec<TangentVector>> {
        let g = grad_data_atom(y, self.w.weights(), m, self.f, self.p)?;
        y.iter()
            .zip(&self.x)
            .zip(g)
            .map(|((yj, xj), gj)| {
                let mut v = gj.scaled(self.mu);
                v.add_scaled(&log(yj, xj)?, -1.0);
                Ok(v)
            })
            .collect()
    }

    fn moved(y: &[ManifoldPoint], g: &[TangentVector], s: f64) -> Vec<ManifoldPoint> {
        y.iter()
            .zip(g)
            .map(|(p, v)| exp_unchecked(p, v.scaled(-s).components()))
            .collect()
    }
}

/// Approximate proximal map of `μ·D_i` on the samples read by row `i`.
///
/// Starts from the minimizer of the model in which the residual decreases
/// linearly along the initial gradient (exact in flat space), then refines
/// with up to `inner` Armijo gradient steps; `Φ` away from `r = 0` is smooth
/// also for `p = 1`. Returns the updated samples (row order) and their mean.
#[allow(clippy::too_many_arguments)]
pub fn prox_data_atom(
    a: &MeasurementMatrix,
    i: usize,
    u: &Signal,
    f: &ManifoldPoint,
    warm: &ManifoldPoint,
    p: f64,
    mu: f64,
    inner: usize,
    opts: &MeanOptions,
) -> Result<(Vec<ManifoldPoint>, ManifoldPoint)> {
    let row = a.row(i);
    let local = Local {
        x: row.iter().map(|(j, _)| u.get(*j).clone()).collect(),
        w: WeightVector::new(row.iter().map(|(_, w)| *w).collect())?,
        f,
        p,
        mu,
        opts,
    };
    let m0 = local.mean(&local.x, warm)?;
    let r0 = dist_unchecked(&m0, f);
    if r0 == 0.0 || mu <= 0.0 {
        return Ok((local.x, m0));
    }
    let g0 = grad_data_atom(&local.x, local.w.weights(), &m0, f, p)?;
    let gg: f64 = g0.iter().map(|g| g.norm().powi(2)).sum();
    if gg == 0.0 {
        return Ok((local.x, m0));
    }
    // along y(t) = exp(x, −t g0) the residual is r0 − tκ to first order
    let kappa = gg / (p * r0.powf(p - 1.0));
    let t_max = r0 / kappa;
    let mut t = if p == 1.0 {
        mu.min(t_max)
    } else {
        let h = |t: f64| t * gg - mu * p * kappa * (r0 - t * kappa).max(0.0).powf(p - 1.0);
        let (mut lo, mut hi) = (0.0, t_max);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if h(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let f0 = local.objective(&local.x, &m0);
    let mut best = (local.x.clone(), m0.clone(), f0);
    for _ in 0..30 {
        let y = Local::moved(&local.x, &g0, t);
        if let Ok(m) = local.mean(&y, &m0) {
            let fy = local.objective(&y, &m);
            if fy < f0 {
                best = (y, m, fy);
                break;
            }
        }
        t *= 0.5;
    }

    let (mut y, mut m, mut fy) = best;
    for _ in 0..inner {
        let Ok(g) = local.gradient(&y, &m) else { break };
        let gn2: f64 = g.iter().map(|v| v.norm().powi(2)).sum();
        if gn2.sqrt() <= 1e-12 * (1.0 + r0) {
            break;
        }
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let cand = Local::moved(&y, &g, s);
            if let Ok(mc) = local.mean(&cand, &m) {
                let fc = local.objective(&cand, &mc);
                if fc <= fy - 1e-4 * s * gn2 {
                    (y, m, fy) = (cand, mc, fc);
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok((y, m))
}
