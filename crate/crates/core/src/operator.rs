//! The measurement operator `A(u)_i = mean(a_i·, u)` for a matrix with unit
//! row sums, and convolution matrices built from small kernels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::karcher::{weighted_mean, weighted_mean_nearest, MeanOptions, WeightVector};
use crate::manifold::ManifoldPoint;
use crate::signal::{grid_of, Signal};

const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelShape {
    Gaussian { sigma: f64 },
    Triangular,
    MovingAverage,
}

/// A separable kernel; `support` holds one odd extent per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub shape: KernelShape,
    pub support: Vec<usize>,
}

impl KernelSpec {
    pub fn new(shape: KernelShape, support: &[usize]) -> Result<Self> {
        let s = Self {
            shape,
            support: support.to_vec(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.support.len()) {
            return Err(Error::InvalidSpec("kernel must be 1D or 2D".into()));
        }
        if self.support.iter().any(|s| s % 2 == 0) {
            return Err(Error::InvalidSpec(format!(
                "kernel support must be odd, got {:?}",
                self.support
            )));
        }
        if let KernelShape::Gaussian { sigma } = self.shape {
            if !(sigma > 0.0) || !sigma.is_finite() {
                return Err(Error::InvalidSpec(format!("gaussian sigma must be > 0, got {sigma}")));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.support.len()
    }
}

fn axis_weights(shape: KernelShape, support: usize) -> Vec<f64> {
    let h = (support / 2) as i64;
    let raw: Vec<f64> = (-h..=h)
        .map(|k| match shape {
            KernelShape::Gaussian { sigma } => (-((k * k) as f64) / (2.0 * sigma * sigma)).exp(),
            KernelShape::Triangular => (h + 1 - k.abs()) as f64,
            KernelShape::MovingAverage => 1.0,
        })
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / s).collect()
}

/// Normalized kernel weights, row-major over the support.
pub fn kernel_weights(spec: &KernelSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let axes: Vec<Vec<f64>> = spec.support.iter().map(|s| axis_weights(spec.shape, *s)).collect();
    Ok(match axes.as_slice() {
        [x] => x.clone(),
        [y, x] => y.iter().flat_map(|a| x.iter().map(move |b| a * b)).collect(),
        _ => unreachable!(),
    })
}

/// Sparse matrix with rows summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    rows: Vec<Vec<(usize, f64)>>,
    n_cols: usize,
    out_shape: Vec<usize>,
}

impl MeasurementMatrix {
    pub fn new(rows: Vec<Vec<(usize, f64)>>, n_cols: usize) -> Result<Self> {
        let n = rows.len();
        Self::with_shape(rows, n_cols, vec![n])
    }

    fn with_shape(rows: Vec<Vec<(usize, f64)>>, n_cols: usize, out_shape: Vec<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidMatrix("no rows".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::InvalidMatrix(format!("row {i} is empty")));
            }
            if let Some((j, _)) = row.iter().find(|(j, _)| *j >= n_cols) {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} references column {j} of {n_cols}"
                )));
            }
            if row.iter().any(|(_, w)| !w.is_finite()) {
                return Err(Error::InvalidMatrix(format!("row {i} has a non-finite weight")));
            }
            let s: f64 = row.iter().map(|(_, w)| w).sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidMatrix(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self {
            rows,
            n_cols,
            out_shape,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n).map(|i| vec![(i, 1.0)]).collect(),
            n_cols: n,
            out_shape: vec![n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn out_shape(&self) -> &[usize] {
        &self.out_shape
    }

    /// Rows that read column `j`, with their weights.
    pub fn transpose_pattern(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, w) in row {
                cols[*j].push((i, *w));
            }
        }
        cols
    }

    /// Mean of `u` under row `i`.
    pub fn row_mean(
        &self,
        i: usize,
        u: &Signal,
        anchor: Option<&ManifoldPoint>,
        opts: &MeanOptions,
    ) -> Result<ManifoldPoint> {
        let row = &self.rows[i];
        if let [(j, _)] = row.as_slice() {
            return Ok(u.get(*j).clone());
        }
        let pts: Vec<ManifoldPoint> = row.iter().map(|(j, _)| u.get(*j).clone()).collect();
        let a = WeightVector::new(row.iter().map(|(_, w)| *w).collect())?;
        match anchor {
            Some(f) => weighted_mean_nearest(&pts, &a, f, opts),
            None => weighted_mean(&pts, &a, opts),
        }
    }

    /// `A(u)`; with an anchor, ties between minimizers go to the one nearest
    /// the anchor entry. `warm` optionally seeds each row's iteration.
    pub fn apply_with(
        &self,
        u: &Signal,
        anchor: Option<&Signal>,
        warm: Option<&Signal>,
        opts: &MeanOptions,
    ) -> Result<Signal> {
        if u.len() != self.n_cols {
            return Err(Error::ShapeMismatch(format!(
                "operator has {} columns, signal has {} samples",
                self.n_cols,
                u.len()
            )));
        }
        for s in [anchor, warm].into_iter().flatten() {
            if s.len() != self.n_rows() {
                return Err(Error::ShapeMismatch(format!(
                    "operator has {} rows, got a signal with {} samples",
                    self.n_rows(),
                    s.len()
                )));
            }
            u.kind().check(s.kind())?;
        }
        let points = (0..self.n_rows())
            .into_par_iter()
            .map(|i| {
                let o = match warm {
                    Some(w) => opts.clone().with_init(w.get(i).clone()),
                    None => opts.clone(),
                };
                self.row_mean(i, u, anchor.map(|f| f.get(i)), &o)
                    .map_err(|e| e.at_row(i))
            })
            .collect::<Result<Vec<_>>>()?;
        Signal::new(u.kind(), &self.out_shape, points)
    }

    pub fn apply(&self, u: &Signal, anchor: Option<&Signal>) -> Result<Signal> {
        self.apply_with(u, anchor, None, &MeanOptions::default())
    }
}

/// Convolution with truncation at the borders; truncated rows are
/// renormalized to unit sum.
pub fn conv_matrix(spec: &KernelSpec, shape: &[usize]) -> Result<MeasurementMatrix> {
    spec.validate()?;
    if spec.dims() != shape.len() {
        return Err(Error::InvalidSpec(format!(
            "{}D kernel for a {}D signal",
            spec.dims(),
            shape.len()
        )));
    }
    for (axis, (s, e)) in spec.support.iter().zip(shape).enumerate() {
        if s > e {
            return Err(Error::KernelTooLarge {
                axis,
                support: *s,
                extent: *e,
            });
        }
    }
    let k = kernel_weights(spec)?;
    let (kr, kc) = grid_of(&spec.support);
    let (rows, cols) = grid_of(shape);
    let (hr, hc) = ((kr / 2) as i64, (kc / 2) as i64);
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows as i64 {
        for c in 0..cols as i64 {
            let mut row = Vec::with_capacity(kr * kc);
            for dr in -hr..=hr {
                for dc in -hc..=hc {
                    let (sr, sc) = (r + dr, c + dc);
                    if sr < 0 || sc < 0 || sr >= rows as i64 || sc >= cols as i64 {
                        continue;
                    }
                    let w = k[((dr + hr) as usize) * kc + (dc + hc) as usize];
                    if w > 0.0 {
                        row.push(((sr as usize) * cols + sc as usize, w));
                    }
                }
            }
            let s: f64 = row.iter().map(|(_, w)| w).sum();
            row.iter_mut().for_each(|(_, w)| *w /= s);
            out.push(row);
        }
    }
    MeasurementMatrix::with_shape(out, rows * cols, shape.to_vec())
}
