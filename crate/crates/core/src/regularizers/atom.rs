//! Local regularizer terms, their values, subgradients and proximal maps.

use smallvec::SmallVec;

use crate::differentials::MeanDifferentialContext;
use crate::error::{Error, Result};
use crate::manifold::{
    dist_unchecked, exp_unchecked, geodesic_point_with, log_with, parallel_transport, tangent_basis, AntipodalPolicy,
    ManifoldPoint, TangentVector,
};

const POLICY: AntipodalPolicy = AntipodalPolicy::DeterministicPositive;

/// Inner iterations of the subgradient refinement in [`Atom::prox`].
pub const PROX_SUBGRAD_ITERS: usize = 50;
const LINE_SEARCH_ITERS: usize = 50;

/// A point in the iterate: `field` 0 is the signal, `field` k ≥ 1 is the
/// k-th auxiliary field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub field: u8,
    pub index: usize,
}

impl Slot {
    pub fn u(index: usize) -> Self {
        Self { field: 0, index }
    }

    pub fn aux(k: usize, index: usize) -> Self {
        Self {
            field: k as u8 + 1,
            index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AtomKind {
    /// `dist(x, y)^q`.
    Edge { q: f64 },
    /// `dist(b, mid(a, c))` for slots `[a, b, c]`.
    SecondDiff,
    /// `dist(mid(b, c), mid(a, d))` for slots `[a, b, c, d]`.
    CrossDiff,
    /// `dist(S, v)` with `S` the Schild point of `[u_prev, u, v_prev]`;
    /// slots `[u_prev, u, v_prev, v]`.
    Schild,
    /// `‖log_u v − pt(log_{u_prev} v_prev)‖` on the same slots.
    Transport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub kind: AtomKind,
    pub slots: SmallVec<[Slot; 4]>,
    pub weight: f64,
}

fn mid(a: &ManifoldPoint, b: &ManifoldPoint) -> Result<ManifoldPoint> {
    geodesic_point_with(a, b, 0.5, POLICY)
}

fn schild_point(up: &ManifoldPoint, uc: &ManifoldPoint, vp: &ManifoldPoint) -> Result<(ManifoldPoint, ManifoldPoint)> {
    let m = mid(uc, vp)?;
    let s = geodesic_point_with(up, &m, 2.0, POLICY)?;
    Ok((m, s))
}

fn transport_residual(p: &[ManifoldPoint]) -> Result<TangentVector> {
    let a = log_with(&p[1], &p[3], POLICY)?;
    let b = parallel_transport(&p[0], &p[1], &log_with(&p[0], &p[2], POLICY)?)?;
    let mut r = a;
    r.add_scaled(&b, -1.0);
    Ok(r)
}

/// `∇_x dist(x, y)`; zero at `x = y`.
fn grad_dist(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<TangentVector> {
    let v = log_with(x, y, POLICY)?;
    let n = v.norm();
    Ok(if n > 0.0 {
        v.scaled(-1.0 / n)
    } else {
        TangentVector::zero(x)
    })
}

fn mid_pullback(
    a: &ManifoldPoint,
    b: &ManifoldPoint,
    m: &ManifoldPoint,
    g: &TangentVector,
) -> Result<Vec<TangentVector>> {
    MeanDifferentialContext::new(&[a.clone(), b.clone()], &[0.5, 0.5], m)?.pullback(g)
}

impl Atom {
    pub fn new(kind: AtomKind, slots: &[Slot], weight: f64) -> Self {
        Self {
            kind,
            slots: SmallVec::from_slice(slots),
            weight,
        }
    }

    /// Unweighted term value at the given slot points.
    pub fn term(&self, p: &[ManifoldPoint]) -> Result<f64> {
        Ok(match self.kind {
            AtomKind::Edge { q } => {
                let d = dist_unchecked(&p[0], &p[1]);
                if q == 1.0 {
                    d
                } else {
                    d.powf(q)
                }
            }
            AtomKind::SecondDiff => dist_unchecked(&p[1], &mid(&p[0], &p[2])?),
            AtomKind::CrossDiff => dist_unchecked(&mid(&p[1], &p[2])?, &mid(&p[0], &p[3])?),
            AtomKind::Schild => dist_unchecked(&schild_point(&p[0], &p[1], &p[2])?.1, &p[3]),
            AtomKind::Transport => transport_residual(p)?.norm(),
        })
    }

    /// Weighted value.
    pub fn value(&self, p: &[ManifoldPoint]) -> Result<f64> {
        Ok(self.weight * self.term(p)?)
    }

    /// A subgradient of the unweighted term, one entry per slot. At kinks the
    /// zero element is chosen.
    pub fn subgradient(&self, p: &[ManifoldPoint]) -> Result<Vec<TangentVector>> {
        match self.kind {
            AtomKind::Edge { q } => {
                let d = dist_unchecked(&p[0], &p[1]);
                let s = if q == 1.0 { 1.0 } else { q * d.powf(q - 1.0) };
                Ok(vec![
                    grad_dist(&p[0], &p[1])?.scaled(s),
                    grad_dist(&p[1], &p[0])?.scaled(s),
                ])
            }
            AtomKind::SecondDiff => {
                let m = mid(&p[0], &p[2])?;
                if dist_unchecked(&p[1], &m) == 0.0 {
                    return Ok(p.iter().map(TangentVector::zero).collect());
                }
                let g = mid_pullback(&p[0], &p[2], &m, &grad_dist(&m, &p[1])?)?;
                Ok(vec![g[0].clone(), grad_dist(&p[1], &m)?, g[1].clone()])
            }
            AtomKind::CrossDiff => {
                let m1 = mid(&p[1], &p[2])?;
                let m2 = mid(&p[0], &p[3])?;
                if dist_unchecked(&m1, &m2) == 0.0 {
                    return Ok(p.iter().map(TangentVector::zero).collect());
                }
                let g1 = mid_pullback(&p[1], &p[2], &m1, &grad_dist(&m1, &m2)?)?;
                let g2 = mid_pullback(&p[0], &p[3], &m2, &grad_dist(&m2, &m1)?)?;
                Ok(vec![g2[0].clone(), g1[0].clone(), g1[1].clone(), g2[1].clone()])
            }
            AtomKind::Schild => {
                let (m, s) = schild_point(&p[0], &p[1], &p[2])?;
                if dist_unchecked(&s, &p[3]) == 0.0 {
                    return Ok(p.iter().map(TangentVector::zero).collect());
                }
                // S is the mean of (u_prev, m) with weights (−1, 2) while the
                // extrapolated geodesic stays minimizing
                let reach = dist_unchecked(&p[0], &m);
                if (dist_unchecked(&p[0], &s) - 2.0 * reach).abs() > 1e-9 * (1.0 + reach) {
                    return Err(Error::ConjugatePoint(2.0 * reach));
                }
                let outer = MeanDifferentialContext::new(&[p[0].clone(), m.clone()], &[-1.0, 2.0], &s)?
                    .pullback(&grad_dist(&s, &p[3])?)?;
                let inner_g = mid_pullback(&p[1], &p[2], &m, &outer[1])?;
                Ok(vec![
                    outer[0].clone(),
                    inner_g[0].clone(),
                    inner_g[1].clone(),
                    grad_dist(&p[3], &s)?,
                ])
            }
            AtomKind::Transport => self.numeric_subgradient(p),
        }
    }

    /// Central differences in orthonormal tangent bases.
    fn numeric_subgradient(&self, p: &[ManifoldPoint]) -> Result<Vec<TangentVector>> {
        let h = 1e-6;
        let base = self.term(p)?;
        if base == 0.0 {
            return Ok(p.iter().map(TangentVector::zero).collect());
        }
        let mut out = Vec::with_capacity(p.len());
        let mut work = p.to_vec();
        for k in 0..p.len() {
            let mut g = TangentVector::zero(&p[k]);
            for e in tangent_basis(&p[k]) {
                work[k] = exp_unchecked(&p[k], e.scaled(h).components());
                let fp = self.term(&work)?;
                work[k] = exp_unchecked(&p[k], e.scaled(-h).components());
                let fm = self.term(&work)?;
                g.add_scaled(&e, (fp - fm) / (2.0 * h));
            }
            work[k] = p[k].clone();
            out.push(g);
        }
        Ok(out)
    }

    /// Approximate `argmin_y τ·w·term(y) + ½ Σ_k dist²(x_k, y_k)` over the
    /// movable slots. Edges use the closed form; other atoms a line search
    /// along the initial subgradient followed by diminishing subgradient steps,
    /// returning the best iterate seen.
    pub fn prox(&self, x: &[ManifoldPoint], movable: &[bool], tau: f64) -> Vec<ManifoldPoint> {
        let tw = tau * self.weight;
        if tw <= 0.0 || !movable.iter().any(|m| *m) {
            return x.to_vec();
        }
        if let AtomKind::Edge { q } = self.kind {
            return prox_edge(&x[0], &x[1], [movable[0], movable[1]], tw, q)
                .map(|(a, b)| vec![a, b])
                .unwrap_or_else(|_| x.to_vec());
        }
        match self.prox_descent(x, movable, tw) {
            Ok(y) => y,
            Err(e) => {
                log::debug!("atom prox skipped: {e}");
                x.to_vec()
            }
        }
    }

    fn prox_objective(&self, x: &[ManifoldPoint], y: &[ManifoldPoint], tw: f64) -> f64 {
        let Ok(t) = self.term(y) else {
            return f64::INFINITY;
        };
        let d2: f64 = x.iter().zip(y).map(|(a, b)| dist_unchecked(a, b).powi(2)).sum();
        tw * t + 0.5 * d2
    }

    fn masked_subgradient(&self, y: &[ManifoldPoint], movable: &[bool]) -> Result<Vec<TangentVector>> {
        let mut g = self.subgradient(y)?;
        for (gk, m) in g.iter_mut().zip(movable) {
            if !m {
                *gk = TangentVector::zero(gk.base());
            }
        }
        Ok(g)
    }

    fn prox_descent(&self, x: &[ManifoldPoint], movable: &[bool], tw: f64) -> Result<Vec<ManifoldPoint>> {
        let g0 = self.masked_subgradient(x, movable)?;
        let gmax = g0.iter().map(|g| g.norm()).fold(0.0, f64::max);
        if gmax == 0.0 {
            return Ok(x.to_vec());
        }
        let along = |t: f64| -> Vec<ManifoldPoint> {
            x.iter()
                .zip(&g0)
                .map(|(p, g)| exp_unchecked(p, g.scaled(-t).components()))
                .collect()
        };
        let mut hi = 2.0 * tw;
        if let Some(scale) = x[0].kind().injectivity_scale() {
            hi = hi.min(scale / gmax);
        }
        // golden-section search on [0, hi]
        let phi = |t: f64| self.prox_objective(x, &along(t), tw);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.0, hi);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (phi(c), phi(d));
        for _ in 0..LINE_SEARCH_ITERS {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = phi(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = phi(d);
            }
        }
        let mut best = x.to_vec();
        let mut best_f = self.prox_objective(x, x, tw);
        let t = 0.5 * (a + b);
        let cand = along(t);
        let fcand = self.prox_objective(x, &cand, tw);
        if fcand < best_f {
            best = cand;
            best_f = fcand;
        }

        let mut y = best.clone();
        for r in 1..=PROX_SUBGRAD_ITERS {
            let Ok(g) = self.masked_subgradient(&y, movable) else {
                break;
            };
            let mut next = Vec::with_capacity(y.len());
            for ((yk, xk), (gk, m)) in y.iter().zip(x).zip(g.iter().zip(movable)) {
                if !m {
                    next.push(yk.clone());
                    continue;
                }
                let mut step = gk.scaled(tw);
                step.add_scaled(&log_with(yk, xk, POLICY)?, -1.0);
                next.push(exp_unchecked(yk, step.scaled(-1.0 / r as f64).components()));
            }
            y = next;
            let f = self.prox_objective(x, &y, tw);
            if f < best_f {
                best_f = f;
                best = y.clone();
            }
        }
        Ok(best)
    }
}

/// Proximal map of `τλ·dist(x, y)`: both points move toward each other by
/// `min(τλ, dist/2)`.
pub fn prox_tv_edge(x: &ManifoldPoint, y: &ManifoldPoint, tau_lambda: f64) -> Result<(ManifoldPoint, ManifoldPoint)> {
    prox_edge(x, y, [true, true], tau_lambda, 1.0)
}

/// Proximal map of `tw·dist(x, y)^q`, optionally with one end fixed. The
/// minimizer stays on the connecting geodesic, so the problem is scalar.
pub fn prox_edge(
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    movable: [bool; 2],
    tw: f64,
    q: f64,
) -> Result<(ManifoldPoint, ManifoldPoint)> {
    x.kind().check(y.kind())?;
    let d = dist_unchecked(x, y);
    if d == 0.0 || tw <= 0.0 || movable == [false, false] {
        return Ok((x.clone(), y.clone()));
    }
    let both = movable == [true, true];
    // shift s of each moving end; the remaining gap is d − c·s
    let c = if both { 2.0 } else { 1.0 };
    let s = if q == 1.0 {
        tw.min(d / c)
    } else {
        // stationarity per moving end: s = q·tw·(d − c·s)^{q−1}, increasing in s
        let g = |s: f64| s - q * tw * (d - c * s).max(0.0).powf(q - 1.0);
        let (mut lo, mut hi) = (0.0, d / c);
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if g(m) < 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    };
    let t = s / d;
    let nx = if movable[0] {
        geodesic_point_with(x, y, t, POLICY)?
    } else {
        x.clone()
    };
    let ny = if movable[1] {
        geodesic_point_with(y, x, t, POLICY)?
    } else {
        y.clone()
    };
    Ok((nx, ny))
}
