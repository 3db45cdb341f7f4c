use crate::error::{Error, Result};
use crate::manifold::{dist_unchecked, ManifoldKind, ManifoldPoint};

/// A 1D or 2D row-major array of points on one manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    kind: ManifoldKind,
    shape: Vec<usize>,
    points: Vec<ManifoldPoint>,
}

impl Signal {
    pub fn new(kind: ManifoldKind, shape: &[usize], points: Vec<ManifoldPoint>) -> Result<Self> {
        check_shape(shape)?;
        let n: usize = shape.iter().product();
        if points.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {n} points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| p.kind() != kind) {
            return Err(Error::KindMismatch {
                expected: kind,
                actual: p.kind(),
            });
        }
        Ok(Self {
            kind,
            shape: shape.to_vec(),
            points,
        })
    }

    /// Parses a flat row-major coordinate payload, validating every point.
    pub fn from_flat(kind: ManifoldKind, shape: &[usize], data: &[f64]) -> Result<Self> {
        check_shape(shape)?;
        let w = kind.coord_len();
        let n: usize = shape.iter().product();
        if data.len() != n * w {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} of {kind} needs {} reals, got {}",
                n * w,
                data.len()
            )));
        }
        let points = data
            .chunks(w)
            .map(|c| ManifoldPoint::new(kind, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(kind, shape, points)
    }

    pub fn constant(shape: &[usize], p: &ManifoldPoint) -> Result<Self> {
        let n: usize = shape.iter().product();
        Self::new(p.kind(), shape, vec![p.clone(); n])
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ManifoldPoint] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &ManifoldPoint {
        &self.points[i]
    }

    pub fn set(&mut self, i: usize, p: ManifoldPoint) {
        debug_assert_eq!(p.kind(), self.kind);
        self.points[i] = p;
    }

    /// `(rows, cols)`; a 1D signal of length n is a single row.
    pub fn grid(&self) -> (usize, usize) {
        grid_of(&self.shape)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| p.coords().iter().copied()).collect()
    }

    /// Largest pairwise distance between samples.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.max(dist_unchecked(a, b));
            }
        }
        d
    }

    pub(crate) fn same_layout(&self, other: &Signal) -> Result<()> {
        self.kind.check(other.kind)?;
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", self.shape, other.shape)));
        }
        Ok(())
    }
}

pub(crate) fn grid_of(shape: &[usize]) -> (usize, usize) {
    match shape {
        [n] => (1, *n),
        [r, c] => (*r, *c),
        _ => (0, 0),
    }
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if !(1..=2).contains(&shape.len()) || shape.contains(&0) {
        return Err(Error::ShapeMismatch(format!(
            "shape must have 1 or 2 positive extents, got {shape:?}"
        )));
    }
    Ok(())
}
