use super::{AntipodalPolicy, Coords, ANTIPODAL_TOL};
use crate::error::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// sin(x)/x, accurate near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

pub(crate) fn dist(p: &[f64], q: &[f64]) -> f64 {
    norm(&cross(p, q)).atan2(dot(p, q))
}

pub(crate) fn exp(p: &[f64], v: &[f64]) -> Coords {
    let t = norm(v);
    let (c, s) = (t.cos(), sinc(t));
    let mut out = [c * p[0] + s * v[0], c * p[1] + s * v[1], c * p[2] + s * v[2]];
    let n = norm(&out);
    out.iter_mut().for_each(|x| *x /= n);
    Coords::from_slice(&out)
}

pub(crate) fn log(p: &[f64], q: &[f64], policy: AntipodalPolicy) -> Result<Coords> {
    let c = dot(p, q);
    let w = [q[0] - c * p[0], q[1] - c * p[1], q[2] - c * p[2]];
    let n = norm(&w);
    if c < 0.0 && n < ANTIPODAL_TOL {
        return match policy {
            AntipodalPolicy::Error => Err(Error::AntipodalPoint),
            AntipodalPolicy::DeterministicPositive => {
                let e = basis(p)[0].clone();
                Ok(e.iter().map(|x| x * std::f64::consts::PI).collect())
            }
        };
    }
    if n == 0.0 {
        return Ok(Coords::from_slice(&[0.0; 3]));
    }
    let theta = n.atan2(c);
    let s = theta / n;
    Ok(Coords::from_slice(&[s * w[0], s * w[1], s * w[2]]))
}

pub(crate) fn transport(p: &[f64], q: &[f64], v: &[f64]) -> Result<Coords> {
    let c = dot(p, q);
    if 1.0 + c < ANTIPODAL_TOL {
        return Err(Error::AntipodalPoint);
    }
    let k = dot(q, v) / (1.0 + c);
    let mut out: Coords = (0..3).map(|i| v[i] - k * (p[i] + q[i])).collect();
    project_tangent(q, &mut out);
    Ok(out)
}

pub(crate) fn project_tangent(p: &[f64], v: &mut [f64]) {
    let d = dot(p, v);
    for i in 0..3 {
        v[i] -= d * p[i];
    }
}

pub(crate) fn basis(p: &[f64]) -> [Coords; 2] {
    // axis least aligned with p
    let mut axis = [0.0; 3];
    let k = (0..3).min_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs())).unwrap_or(0);
    axis[k] = 1.0;
    let mut e1 = axis;
    project_tangent(p, &mut e1);
    let n = norm(&e1);
    e1.iter_mut().for_each(|x| *x /= n);
    let e2 = cross(p, &e1);
    [Coords::from_slice(&e1), Coords::from_slice(&e2)]
}

pub(crate) fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    cross(a, b)
}
