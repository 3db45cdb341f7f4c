//! First-order (TV, Vq), mixed second-order and TGV regularizers, split into
//! local atoms whose proximal maps drive the solvers.
//!
//! Grids use the anisotropic discretization: one difference per axis.
//! For a 2D signal axis 0 runs down the rows, axis 1 along the columns.
//!
//! TGV carries one auxiliary field per axis. `v_a[i]` plays the role of the
//! forward neighbor of `u[i]` along axis `a`; the first-order terms
//! `dist(u[i + e_a], v_a[i])` are weighted by `lambda1` and the second-order
//! terms `D([u[i], v_a[i]], [u[i − e_a], v_a[i − e_a]])` by `lambda0`.

mod atom;

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{dist_unchecked, geodesic_point_with, AntipodalPolicy, ManifoldPoint};
use crate::signal::Signal;

pub use atom::{prox_edge, prox_tv_edge, Atom, AtomKind, Slot, PROX_SUBGRAD_ITERS};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TgvVariant {
    #[default]
    Schild,
    ParallelTransport,
}

/// Either explicit weights or the strength/balance pair `(r, s)` with
/// `lambda0 = r(1 − s)/s'`, `lambda1 = r s/s'`, `s' = min(s, 1 − s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TgvWeights {
    Lambda { lambda0: f64, lambda1: f64 },
    Balance { r: f64, s: f64 },
}

impl TgvWeights {
    /// `(lambda0, lambda1)`.
    pub fn resolve(&self) -> Result<(f64, f64)> {
        match *self {
            TgvWeights::Lambda { lambda0, lambda1 } => Ok((lambda0, lambda1)),
            TgvWeights::Balance { r, s } => {
                if !(r > 0.0) || !(s > 0.0 && s < 1.0) {
                    return Err(Error::InvalidSpec(format!(
                        "TGV balance needs r > 0 and 0 < s < 1, got r = {r}, s = {s}"
                    )));
                }
                let sp = s.min(1.0 - s);
                Ok((r * (1.0 - s) / sp, r * s / sp))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerSpec {
    Tv {
        lambda: f64,
    },
    Vq {
        lambda: f64,
        q: f64,
    },
    /// `mu1·TV + mu2·(mu21·Σ d2 + mu22·Σ d11)`.
    MixedTv2 {
        mu1: f64,
        mu2: f64,
        mu21: f64,
        mu22: f64,
    },
    Tgv {
        #[serde(flatten)]
        weights: TgvWeights,
        #[serde(default)]
        variant: TgvVariant,
    },
}

impl RegularizerSpec {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "{name} must be a finite value >= 0, got {v}"
                )))
            }
        };
        match *self {
            RegularizerSpec::Tv { lambda } => nonneg("lambda", lambda),
            RegularizerSpec::Vq { lambda, q } => {
                nonneg("lambda", lambda)?;
                if !(q >= 1.0) || !q.is_finite() {
                    return Err(Error::InvalidSpec(format!("q must be in [1, inf), got {q}")));
                }
                Ok(())
            }
            RegularizerSpec::MixedTv2 { mu1, mu2, mu21, mu22 } => {
                nonneg("mu1", mu1)?;
                nonneg("mu2", mu2)?;
                nonneg("mu21", mu21)?;
                nonneg("mu22", mu22)
            }
            RegularizerSpec::Tgv { weights, .. } => {
                let (l0, l1) = weights.resolve()?;
                nonneg("lambda0", l0)?;
                nonneg("lambda1", l1)
            }
        }
    }

    /// Number of auxiliary fields for a signal of the given shape.
    pub fn aux_fields(&self, shape: &[usize]) -> usize {
        match self {
            RegularizerSpec::Tgv { .. } => shape.len(),
            _ => 0,
        }
    }

    /// Auxiliary fields initialized to the forward neighbors of `u`.
    pub fn init_aux(&self, u: &Signal) -> Vec<Signal> {
        let grid = Grid::new(u.shape());
        (0..self.aux_fields(u.shape()))
            .map(|a| {
                let pts = (0..u.len())
                    .map(|i| u.get(grid.step(i, a, 1).unwrap_or(i)).clone())
                    .collect();
                Signal::new(u.kind(), u.shape(), pts).expect("same layout as u")
            })
            .collect()
    }

    /// Regularizer value at the iterate (for TGV, at its auxiliary fields).
    pub fn value(&self, it: &Iterate) -> Result<f64> {
        match *self {
            RegularizerSpec::Tv { lambda } => Ok(tv_value(&it.u, lambda)),
            RegularizerSpec::Vq { lambda, q } => Ok(vq_value(&it.u, lambda, q)),
            RegularizerSpec::MixedTv2 { mu1, mu2, mu21, mu22 } => {
                Ok(tv_value(&it.u, mu1) + mu2 * tv2_value(&it.u, mu21, mu22)?)
            }
            RegularizerSpec::Tgv { weights, variant } => {
                let (l0, l1) = weights.resolve()?;
                tgv_joint_value(&it.u, &it.aux, l0, l1, variant)
            }
        }
    }
}

/// The signal together with any auxiliary fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub u: Signal,
    pub aux: Vec<Signal>,
}

impl Iterate {
    pub fn new(u: Signal, spec: &RegularizerSpec) -> Self {
        let aux = spec.init_aux(&u);
        Self { u, aux }
    }

    pub fn get(&self, s: Slot) -> &ManifoldPoint {
        match s.field {
            0 => self.u.get(s.index),
            k => self.aux[k as usize - 1].get(s.index),
        }
    }

    pub fn set(&mut self, s: Slot, p: ManifoldPoint) {
        match s.field {
            0 => self.u.set(s.index, p),
            k => self.aux[k as usize - 1].set(s.index, p),
        }
    }

    fn gather(&self, atom: &Atom) -> Vec<ManifoldPoint> {
        atom.slots.iter().map(|s| self.get(*s).clone()).collect()
    }
}

/// Row-major index arithmetic for 1D and 2D grids.
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    axes: Vec<(usize, usize)>,
}

impl Grid {
    pub(crate) fn new(shape: &[usize]) -> Self {
        let axes = match shape {
            [n] => vec![(1, *n)],
            [r, c] => vec![(*c, *r), (1, *c)],
            _ => Vec::new(),
        };
        Self { axes }
    }

    pub(crate) fn n_axes(&self) -> usize {
        self.axes.len()
    }

    /// Index moved by `delta` along `axis`, if still inside the grid.
    pub(crate) fn step(&self, i: usize, axis: usize, delta: i64) -> Option<usize> {
        let (stride, extent) = self.axes[axis];
        let pos = (i / stride % extent) as i64 + delta;
        if pos < 0 || pos >= extent as i64 {
            return None;
        }
        Some((i as i64 + delta * stride as i64) as usize)
    }

    fn len(&self) -> usize {
        self.axes.iter().map(|a| a.1).product()
    }
}

fn neighbor_pairs(shape: &[usize]) -> impl Iterator<Item = (usize, usize)> {
    let g = Grid::new(shape);
    let n = g.len();
    (0..g.n_axes()).flat_map(move |a| {
        let g = g.clone();
        (0..n).filter_map(move |i| g.step(i, a, 1).map(|j| (i, j)))
    })
}

/// `λ Σ dist` over all axis neighbors.
pub fn tv_value(u: &Signal, lambda: f64) -> f64 {
    vq_value(u, lambda, 1.0)
}

/// `λ Σ dist^q` over all axis neighbors.
pub fn vq_value(u: &Signal, lambda: f64, q: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    lambda
        * neighbor_pairs(u.shape())
            .map(|(i, j)| {
                let d = dist_unchecked(u.get(i), u.get(j));
                if q == 1.0 {
                    d
                } else {
                    d.powf(q)
                }
            })
            .sum::<f64>()
}

fn mid(a: &ManifoldPoint, b: &ManifoldPoint) -> Result<ManifoldPoint> {
    geodesic_point_with(a, b, 0.5, AntipodalPolicy::DeterministicPositive)
}

/// `mu21 Σ dist(u_i, mid(u_{i−1}, u_{i+1}))` along every axis plus, on 2D
/// grids, `mu22 Σ dist(mid(u_{l,k−1}, u_{l−1,k}), mid(u_{l−1,k−1}, u_{l,k}))`.
pub fn tv2_value(u: &Signal, mu21: f64, mu22: f64) -> Result<f64> {
    let g = Grid::new(u.shape());
    let mut total = 0.0;
    if mu21 != 0.0 {
        for a in 0..g.n_axes() {
            for i in 0..u.len() {
                if let (Some(p), Some(n)) = (g.step(i, a, -1), g.step(i, a, 1)) {
                    total += mu21 * dist_unchecked(u.get(i), &mid(u.get(p), u.get(n))?);
                }
            }
        }
    }
    if mu22 != 0.0 && g.n_axes() == 2 {
        for i in 0..u.len() {
            if let (Some(up), Some(left)) = (g.step(i, 0, -1), g.step(i, 1, -1)) {
                let diag = left - g.axes[0].0;
                let m1 = mid(u.get(left), u.get(up))?;
                let m2 = mid(u.get(diag), u.get(i))?;
                total += mu22 * dist_unchecked(&m1, &m2);
            }
        }
    }
    Ok(total)
}

/// TGV functional at the given auxiliary fields.
pub fn tgv_joint_value(u: &Signal, aux: &[Signal], lambda0: f64, lambda1: f64, variant: TgvVariant) -> Result<f64> {
    let g = Grid::new(u.shape());
    if aux.len() != g.n_axes() {
        return Err(Error::ShapeMismatch(format!(
            "TGV needs {} auxiliary fields, got {}",
            g.n_axes(),
            aux.len()
        )));
    }
    for v in aux {
        u.same_layout(v)?;
    }
    let kind = match variant {
        TgvVariant::Schild => AtomKind::Schild,
        TgvVariant::ParallelTransport => AtomKind::Transport,
    };
    let d = Atom::new(kind, &[], 1.0);
    let mut total = 0.0;
    for (a, v) in aux.iter().enumerate() {
        for i in 0..u.len() {
            let Some(n) = g.step(i, a, 1) else { continue };
            total += lambda1 * dist_unchecked(u.get(n), v.get(i));
            if let Some(p) = g.step(i, a, -1) {
                let pts = [u.get(p).clone(), u.get(i).clone(), v.get(p).clone(), v.get(i).clone()];
                total += lambda0 * d.term(&pts)?;
            }
        }
    }
    Ok(total)
}

/// TGV value minimized over the auxiliary fields by cyclic proximal sweeps
/// that keep `u` fixed, starting from forward neighbors.
pub fn tgv_value(u: &Signal, lambda0: f64, lambda1: f64, variant: TgvVariant, sweeps: usize) -> Result<f64> {
    let spec = RegularizerSpec::Tgv {
        weights: TgvWeights::Lambda { lambda0, lambda1 },
        variant,
    };
    let mut it = Iterate::new(u.clone(), &spec);
    let list = atoms(&spec, u.shape())?;
    let mut best = tgv_joint_value(&it.u, &it.aux, lambda0, lambda1, variant)?;
    for n in 1..=sweeps {
        prox_sweep_masked(&mut it, &list, 1.0 / n as f64, false);
        best = best.min(tgv_joint_value(&it.u, &it.aux, lambda0, lambda1, variant)?);
    }
    Ok(best)
}

/// Atoms with a grouping into batches of pairwise disjoint atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomList {
    pub atoms: Vec<Atom>,
    pub batches: Vec<Vec<usize>>,
}

impl AtomList {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Sum of all atom values.
    pub fn value(&self, it: &Iterate) -> Result<f64> {
        self.atoms.iter().map(|a| a.value(&it.gather(a))).sum()
    }
}

/// Decomposes a regularizer into local atoms, grouped greedily in generation
/// order into batches that share no slot.
pub fn atoms(spec: &RegularizerSpec, shape: &[usize]) -> Result<AtomList> {
    spec.validate()?;
    let g = Grid::new(shape);
    let n = g.len();
    let mut out = Vec::new();
    let edges = |out: &mut Vec<Atom>, w: f64, q: f64| {
        if w == 0.0 {
            return;
        }
        for a in 0..g.n_axes() {
            for i in 0..n {
                if let Some(j) = g.step(i, a, 1) {
                    out.push(Atom::new(AtomKind::Edge { q }, &[Slot::u(i), Slot::u(j)], w));
                }
            }
        }
    };
    match *spec {
        RegularizerSpec::Tv { lambda } => edges(&mut out, lambda, 1.0),
        RegularizerSpec::Vq { lambda, q } => edges(&mut out, lambda, q),
        RegularizerSpec::MixedTv2 { mu1, mu2, mu21, mu22 } => {
            edges(&mut out, mu1, 1.0);
            let w2 = mu2 * mu21;
            if w2 != 0.0 {
                for a in 0..g.n_axes() {
                    for i in 0..n {
                        if let (Some(p), Some(q)) = (g.step(i, a, -1), g.step(i, a, 1)) {
                            out.push(Atom::new(
                                AtomKind::SecondDiff,
                                &[Slot::u(p), Slot::u(i), Slot::u(q)],
                                w2,
                            ));
                        }
                    }
                }
            }
            let w11 = mu2 * mu22;
            if w11 != 0.0 && g.n_axes() == 2 {
                for i in 0..n {
                    if let (Some(up), Some(left)) = (g.step(i, 0, -1), g.step(i, 1, -1)) {
                        let diag = left - g.axes[0].0;
                        out.push(Atom::new(
                            AtomKind::CrossDiff,
                            &[Slot::u(diag), Slot::u(left), Slot::u(up), Slot::u(i)],
                            w11,
                        ));
                    }
                }
            }
        }
        RegularizerSpec::Tgv { weights, variant } => {
            let (l0, l1) = weights.resolve()?;
            let kind = match variant {
                TgvVariant::Schild => AtomKind::Schild,
                TgvVariant::ParallelTransport => AtomKind::Transport,
            };
            for a in 0..g.n_axes() {
                if l1 != 0.0 {
                    for i in 0..n {
                        if let Some(j) = g.step(i, a, 1) {
                            out.push(Atom::new(AtomKind::Edge { q: 1.0 }, &[Slot::u(j), Slot::aux(a, i)], l1));
                        }
                    }
                }
                if l0 != 0.0 {
                    for i in 0..n {
                        if let (Some(p), Some(_)) = (g.step(i, a, -1), g.step(i, a, 1)) {
                            out.push(Atom::new(
                                kind,
                                &[Slot::u(p), Slot::u(i), Slot::aux(a, p), Slot::aux(a, i)],
                                l0,
                            ));
                        }
                    }
                }
            }
        }
    }
    let batches = greedy_batches(&out);
    Ok(AtomList { atoms: out, batches })
}

fn greedy_batches(atoms: &[Atom]) -> Vec<Vec<usize>> {
    let mut batches: Vec<(Vec<usize>, HashSet<Slot>)> = Vec::new();
    for (k, a) in atoms.iter().enumerate() {
        let fits = batches
            .iter()
            .position(|(_, used)| a.slots.iter().all(|s| !used.contains(s)));
        let b = match fits {
            Some(b) => b,
            None => {
                batches.push((Vec::new(), HashSet::new()));
                batches.len() - 1
            }
        };
        batches[b].0.push(k);
        batches[b].1.extend(a.slots.iter().copied());
    }
    batches.into_iter().map(|(b, _)| b).collect()
}

/// Applies the proximal map of `tau·R_k` for every atom, batch by batch;
/// atoms within a batch run in parallel.
pub fn prox_sweep(it: &mut Iterate, list: &AtomList, tau: f64) {
    prox_sweep_masked(it, list, tau, true);
}

fn prox_sweep_masked(it: &mut Iterate, list: &AtomList, tau: f64, move_u: bool) {
    for batch in &list.batches {
        let updates: Vec<(usize, Vec<ManifoldPoint>)> = batch
            .par_iter()
            .map(|&k| {
                let a = &list.atoms[k];
                let movable: Vec<bool> = a.slots.iter().map(|s| move_u || s.field != 0).collect();
                (k, a.prox(&it.gather(a), &movable, tau))
            })
            .collect();
        for (k, pts) in updates {
            for (s, p) in list.atoms[k].slots.iter().zip(pts) {
                it.set(*s, p);
            }
        }
    }
}

/// Proximal map of a single atom applied in place.
pub fn prox_atom(it: &mut Iterate, atom: &Atom, tau: f64) {
    let movable = vec![true; atom.slots.len()];
    let pts = atom.prox(&it.gather(atom), &movable, tau);
    for (s, p) in atom.slots.iter().zip(pts) {
        it.set(*s, p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ManifoldKind;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn circle(v: &[f64]) -> Signal {
        Signal::from_flat(ManifoldKind::Circle, &[v.len()], v).unwrap()
    }

    #[test]
    fn tv_one_jump() {
        assert_abs_diff_eq!(
            tv_value(&circle(&[0.0, PI / 2.0, PI / 2.0]), 0.3),
            0.3 * PI / 2.0,
            epsilon = 1e-15
        );
        assert_eq!(tv_value(&circle(&[1.0; 5]), 1.0), 0.0);
    }

    #[test]
    fn second_difference_of_circle_triple() {
        let v = tv2_value(&circle(&[0.0, 0.0, PI / 2.0]), 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(v, PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn tgv_balance_mapping() {
        let (l0, l1) = TgvWeights::Balance { r: 0.2, s: 0.3 }.resolve().unwrap();
        assert_abs_diff_eq!(l0, 0.2 * 0.7 / 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(l1, 0.2, epsilon = 1e-15);
        assert!(TgvWeights::Balance { r: 0.2, s: 1.0 }.resolve().is_err());
    }

    #[test]
    fn spec_json_forms() {
        let s: RegularizerSpec =
            serde_json::from_str(r#"{"tgv":{"r":0.2,"s":0.3,"variant":"parallel_transport"}}"#).unwrap();
        assert_eq!(
            s,
            RegularizerSpec::Tgv {
                weights: TgvWeights::Balance { r: 0.2, s: 0.3 },
                variant: TgvVariant::ParallelTransport
            }
        );
        let s: RegularizerSpec = serde_json::from_str(r#"{"tgv":{"lambda0":1.0,"lambda1":0.5}}"#).unwrap();
        assert!(matches!(
            s,
            RegularizerSpec::Tgv {
                variant: TgvVariant::Schild,
                ..
            }
        ));
        let s: RegularizerSpec = serde_json::from_str(r#"{"tv":{"lambda":0.1}}"#).unwrap();
        assert_eq!(s, RegularizerSpec::Tv { lambda: 0.1 });
        let back = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<RegularizerSpec>(&back).unwrap(), s);
    }

    #[test]
    fn tv_batches() {
        let l = atoms(&RegularizerSpec::Tv { lambda: 1.0 }, &[9]).unwrap();
        assert_eq!(l.len(), 8);
        assert_eq!(l.batches.len(), 2);
        let l = atoms(&RegularizerSpec::Tv { lambda: 1.0 }, &[5, 6]).unwrap();
        assert_eq!(l.len(), 5 * 5 + 4 * 6);
        assert_eq!(l.batches.len(), 4);
    }

    #[test]
    fn edge_prox_moves_both_ends() {
        let (a, b) = prox_tv_edge(&ManifoldPoint::circle(0.0), &ManifoldPoint::circle(1.0), 0.2).unwrap();
        assert_abs_diff_eq!(a.coords()[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(b.coords()[0], 0.8, epsilon = 1e-15);
        let (a, b) = prox_tv_edge(&ManifoldPoint::circle(0.0), &ManifoldPoint::circle(1.0), 0.7).unwrap();
        assert_abs_diff_eq!(a.coords()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b.coords()[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn quadratic_edge_prox() {
        // tw·d² with both ends free: s = 2tw d/(1 + 4tw)
        let (a, _) = prox_edge(
            &ManifoldPoint::euclidean(&[0.0]),
            &ManifoldPoint::euclidean(&[1.0]),
            [true, true],
            0.25,
            2.0,
        )
        .unwrap();
        assert_abs_diff_eq!(a.coords()[0], 0.5 / 2.0, epsilon = 1e-12);
    }
}
