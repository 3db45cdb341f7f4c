//! Synthetic phantoms, noise models and the ΔSNR quality measure.

mod noise;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{dist_unchecked, exp_unchecked, tangent_basis, ManifoldKind, ManifoldPoint};
use crate::signal::{grid_of, Signal};

pub use noise::{add_noise, gradient_directions, NoiseModel, NoiseSpec, B_VALUE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhantomKind {
    PiecewiseConstant1d,
    PiecewiseSmoothImage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    pub manifold: ManifoldKind,
    pub shape: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        let want = match self.kind {
            PhantomKind::PiecewiseConstant1d => 1,
            PhantomKind::PiecewiseSmoothImage => 2,
        };
        if self.shape.len() != want || self.shape.contains(&0) {
            return Err(Error::InvalidSpec(format!(
                "{:?} needs a positive {want}-d shape, got {:?}",
                self.kind, self.shape
            )));
        }
        if self.kind == PhantomKind::PiecewiseConstant1d && self.shape[0] < 8 {
            return Err(Error::InvalidSpec("1d phantoms need at least 8 samples".into()));
        }
        Ok(())
    }
}

/// A ground-truth signal together with where its discontinuities are.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub signal: Signal,
    /// Region index per sample.
    pub labels: Vec<u8>,
    /// Samples whose label differs from the previous sample along some axis.
    pub jumps: Vec<usize>,
}

pub fn make_phantom(spec: &PhantomSpec) -> Result<Phantom> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (labels, points) = match spec.kind {
        PhantomKind::PiecewiseConstant1d => piecewise_constant(spec.manifold, spec.shape[0], &mut rng),
        PhantomKind::PiecewiseSmoothImage => piecewise_smooth(spec.manifold, &spec.shape, &mut rng),
    };
    let signal = Signal::new(spec.manifold, &spec.shape, points)?;
    let jumps = jumps_of(&labels, &spec.shape);
    Ok(Phantom { signal, labels, jumps })
}

fn jumps_of(labels: &[u8], shape: &[usize]) -> Vec<usize> {
    let (h, w) = grid_of(shape);
    (0..h * w)
        .filter(|&i| {
            let (r, c) = (i / w, i % w);
            (c > 0 && labels[i] != labels[i - 1]) || (r > 0 && labels[i] != labels[i - w])
        })
        .collect()
}

/// Region values; the first two circle values sit on either side of ±π.
fn region_value(kind: ManifoldKind, k: usize, rng: &mut ChaCha8Rng) -> ManifoldPoint {
    let jitter = |rng: &mut ChaCha8Rng| rng.random_range(-0.1..0.1);
    match kind {
        ManifoldKind::Circle => {
            const BASE: [f64; 6] = [2.8, -2.7, -0.4, 1.3, -1.6, 0.6];
            ManifoldPoint::circle(BASE[k % BASE.len()] + 0.5 * jitter(rng))
        }
        ManifoldKind::Sphere2 => {
            const POLAR: [(f64, f64); 6] = [(0.3, 0.0), (1.2, 0.8), (0.9, 2.6), (1.6, -1.9), (0.6, 4.0), (1.4, 1.7)];
            let (t, p) = POLAR[k % POLAR.len()];
            let (t, p) = (t + jitter(rng), p + jitter(rng));
            ManifoldPoint::sphere([t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]).expect("unit vector")
        }
        ManifoldKind::Spd3 => {
            const EIGS: [[f64; 3]; 6] = [
                [0.8, 0.8, 0.8],
                [1.7, 0.5, 0.4],
                [0.5, 1.5, 0.6],
                [1.2, 1.0, 0.4],
                [0.5, 0.45, 1.6],
                [1.3, 0.7, 0.7],
            ];
            let e = EIGS[k % EIGS.len()];
            let angles = [
                rng.random_range(0.0..PI),
                rng.random_range(0.0..PI),
                rng.random_range(0.0..PI),
            ];
            spd_from(e, angles)
        }
        ManifoldKind::Euclidean(n) => {
            let v: Vec<f64> = (0..n)
                .map(|d| ((k * 7 + d * 3) % 5) as f64 - 2.0 + jitter(rng))
                .collect();
            ManifoldPoint::euclidean(&v)
        }
    }
}

/// `R diag(e) Rᵀ` with `R` built from three Euler angles.
fn spd_from(e: [f64; 3], angles: [f64; 3]) -> ManifoldPoint {
    let r = nalgebra::Rotation3::from_euler_angles(angles[0], angles[1], angles[2]);
    let m = r.matrix() * nalgebra::Matrix3::from_diagonal(&nalgebra::Vector3::from(e)) * r.matrix().transpose();
    ManifoldPoint::spd3([m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 1)], m[(1, 2)], m[(2, 2)]])
        .expect("positive eigenvalues")
}

fn piecewise_constant(kind: ManifoldKind, n: usize, rng: &mut ChaCha8Rng) -> (Vec<u8>, Vec<ManifoldPoint>) {
    const CUTS: [f64; 4] = [0.18, 0.4, 0.62, 0.82];
    let spread = (n as f64 / 40.0).floor() as i64;
    let mut bounds: Vec<usize> = CUTS
        .iter()
        .map(|c| {
            let j = if spread > 0 {
                rng.random_range(-spread..=spread)
            } else {
                0
            };
            ((c * n as f64).round() as i64 + j).clamp(1, n as i64 - 1) as usize
        })
        .collect();
    bounds.dedup();
    let values: Vec<ManifoldPoint> = (0..=bounds.len()).map(|k| region_value(kind, k, rng)).collect();
    let labels: Vec<u8> = (0..n)
        .map(|i| bounds.iter().filter(|&&b| i >= b).count() as u8)
        .collect();
    let points = labels.iter().map(|&l| values[l as usize].clone()).collect();
    (labels, points)
}

/// Background, a disk and a slanted band; every region carries a tangent
/// field that is linear in the pixel coordinates, pushed through `exp`.
fn piecewise_smooth(kind: ManifoldKind, shape: &[usize], rng: &mut ChaCha8Rng) -> (Vec<u8>, Vec<ManifoldPoint>) {
    let (h, w) = (shape[0], shape[1]);
    let cx = rng.random_range(0.35..0.45);
    let cy = rng.random_range(0.35..0.45);
    let radius = rng.random_range(0.2..0.25);
    let slope = rng.random_range(0.8..1.2);
    let regions: Vec<(ManifoldPoint, Vec<f64>, Vec<f64>)> = (0..3)
        .map(|k| {
            let c = region_value(kind, k, rng);
            let basis = tangent_basis(&c);
            let mut axis = |_| -> Vec<f64> {
                let coeffs: Vec<f64> = basis.iter().map(|_| rng.random_range(-0.4..0.4)).collect();
                crate::manifold::combine(&c, &basis, &coeffs).components().to_vec()
            };
            let (gx, gy) = (axis(0), axis(1));
            (c, gx, gy)
        })
        .collect();
    let mut labels = Vec::with_capacity(h * w);
    let mut points = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            let y = (r as f64 + 0.5) / h as f64;
            let x = (c as f64 + 0.5) / w as f64;
            let label = if (x - cx).powi(2) + (y - cy).powi(2) < radius * radius {
                1
            } else if y > slope * (x - 0.5) + 0.75 {
                2
            } else {
                0
            };
            let (base, gx, gy) = &regions[label as usize];
            let (sx, sy) = (x - 0.5, y - 0.5);
            let v: Vec<f64> = gx.iter().zip(gy).map(|(a, b)| sx * a + sy * b).collect();
            labels.push(label);
            points.push(exp_unchecked(base, &v));
        }
    }
    (labels, points)
}

/// `10·log₁₀(Σ d(g, f)² / Σ d(g, u)²)` in dB; `+∞` when `recon == ground`.
pub fn delta_snr(ground: &Signal, noisy: &Signal, recon: &Signal) -> Result<f64> {
    ground.same_layout(noisy)?;
    ground.same_layout(recon)?;
    let sq = |s: &Signal| -> f64 {
        ground
            .points()
            .iter()
            .zip(s.points())
            .map(|(a, b)| dist_unchecked(a, b).powi(2))
            .sum()
    };
    let den = sq(recon);
    if den == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (sq(noisy) / den).log10())
}
