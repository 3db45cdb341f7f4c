use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{combine, exp_unchecked, tangent_basis, ManifoldKind, ManifoldPoint};
use crate::signal::Signal;

/// Diffusion weighting in s/mm². Tensor coordinates are read in units of
/// 10⁻³ mm²/s, so `b·D` is of order one.
pub const B_VALUE: f64 = 1000.0;
const TENSOR_UNIT: f64 = 1e-3;
const EIGEN_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NoiseModel {
    VonMises {
        kappa: f64,
    },
    /// Isotropic Gaussian in the tangent space, pushed through `exp`.
    WrappedGaussian {
        sigma: f64,
    },
    /// Rician noise on synthetic diffusion-weighted intensities; `level` is the
    /// SNR of the unweighted image.
    RicianDwi {
        level: f64,
        gradient_count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub model: NoiseModel,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(model: NoiseModel, seed: u64) -> Self {
        Self { model, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.model {
            NoiseModel::VonMises { kappa } => kappa > 0.0,
            NoiseModel::WrappedGaussian { sigma } => sigma > 0.0,
            NoiseModel::RicianDwi { level, gradient_count } => level > 0.0 && gradient_count >= 6,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("invalid noise parameters {:?}", self.model)))
        }
    }

    pub fn check_kind(&self, kind: ManifoldKind) -> Result<()> {
        let ok = match self.model {
            NoiseModel::VonMises { .. } => kind == ManifoldKind::Circle,
            NoiseModel::WrappedGaussian { .. } => {
                matches!(
                    kind,
                    ManifoldKind::Circle | ManifoldKind::Sphere2 | ManifoldKind::Euclidean(_)
                )
            }
            NoiseModel::RicianDwi { .. } => kind == ManifoldKind::Spd3,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleNoise {
                model: format!("{:?}", self.model),
                kind,
            })
        }
    }
}

/// Corrupts every sample independently. Sample `i` draws from its own stream
/// of the seeded generator, so the result does not depend on scheduling.
pub fn add_noise(u: &Signal, spec: &NoiseSpec) -> Result<Signal> {
    spec.validate()?;
    spec.check_kind(u.kind())?;
    let dirs = match spec.model {
        NoiseModel::RicianDwi { gradient_count, .. } => gradient_directions(gradient_count),
        _ => Vec::new(),
    };
    let points: Vec<ManifoldPoint> = u
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64);
            perturb(p, &spec.model, &dirs, &mut rng)
        })
        .collect();
    Signal::new(u.kind(), u.shape(), points)
}

fn perturb(p: &ManifoldPoint, model: &NoiseModel, dirs: &[Vector3<f64>], rng: &mut ChaCha8Rng) -> ManifoldPoint {
    match *model {
        NoiseModel::VonMises { kappa } => ManifoldPoint::circle(p.coords()[0] + von_mises(kappa, rng)),
        NoiseModel::WrappedGaussian { sigma } => {
            let basis = tangent_basis(p);
            let c: Vec<f64> = basis
                .iter()
                .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            exp_unchecked(p, combine(p, &basis, &c).components())
        }
        NoiseModel::RicianDwi { level, .. } => rician_dwi(p, level, dirs, rng),
    }
}

/// Zero-mean von Mises deviate (Best-Fisher rejection sampler).
fn von_mises(kappa: f64, rng: &mut ChaCha8Rng) -> f64 {
    if kappa > 1e6 {
        // the sampler loses precision here; the wrapped normal is the limit
        return rng.sample::<f64, _>(StandardNormal) / kappa.sqrt();
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let u3: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let theta = f.clamp(-1.0, 1.0).acos();
            return if u3 > 0.5 { theta } else { -theta };
        }
    }
}

/// Six classical directions for `n = 6`, otherwise a Fibonacci lattice on the
/// upper hemisphere.
pub fn gradient_directions(n: usize) -> Vec<Vector3<f64>> {
    if n == 6 {
        return [
            [1.0, 0.0, 1.0],
            [-1.0, 0.0, 1.0],
            [0.0, 1.0, 1.0],
            [0.0, 1.0, -1.0],
            [1.0, 1.0, 0.0],
            [-1.0, 1.0, 0.0],
        ]
        .iter()
        .map(|v| Vector3::from(*v).normalize())
        .collect();
    }
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Synthesizes `S_k = exp(−b gₖᵀ D gₖ)` plus the unweighted image, adds Rician
/// noise of std `1/level`, and refits `(ln S₀, D)` by linear least squares on
/// the log-intensities.
fn rician_dwi(p: &ManifoldPoint, level: f64, dirs: &[Vector3<f64>], rng: &mut ChaCha8Rng) -> ManifoldPoint {
    let c = p.coords();
    let d = Matrix3::new(c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5]) * TENSOR_UNIT;
    let sigma = 1.0 / level;
    let mut noisy = |s: f64| -> f64 {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        ((s + sigma * a).powi(2) + (sigma * b).powi(2)).sqrt().max(1e-12)
    };
    let m = dirs.len() + 1;
    let mut design = DMatrix::zeros(m, 7);
    let mut rhs = DVector::zeros(m);
    design[(0, 0)] = 1.0;
    rhs[0] = noisy(1.0).ln();
    for (k, g) in dirs.iter().enumerate() {
        let s = (-B_VALUE * g.dot(&(d * g))).exp();
        let row = [
            1.0,
            -B_VALUE * g.x * g.x,
            -2.0 * B_VALUE * g.x * g.y,
            -2.0 * B_VALUE * g.x * g.z,
            -B_VALUE * g.y * g.y,
            -2.0 * B_VALUE * g.y * g.z,
            -B_VALUE * g.z * g.z,
        ];
        for (j, v) in row.iter().enumerate() {
            design[(k + 1, j)] = *v;
        }
        rhs[k + 1] = noisy(s).ln();
    }
    let x = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("svd with both factors");
    let fit = Matrix3::new(x[1], x[2], x[3], x[2], x[4], x[5], x[3], x[5], x[6]) / TENSOR_UNIT;
    let e = fit.symmetric_eigen();
    let floored = e.eigenvalues.map(|l| l.max(EIGEN_FLOOR));
    let m = e.eigenvectors * Matrix3::from_diagonal(&floored) * e.eigenvectors.transpose();
    let s = |i: usize, j: usize| 0.5 * (m[(i, j)] + m[(j, i)]);
    ManifoldPoint::spd3([m[(0, 0)], s(0, 1), s(0, 2), m[(1, 1)], s(1, 2), m[(2, 2)]]).unwrap_or_else(|_| {
        ManifoldPoint::spd3([EIGEN_FLOOR, 0.0, 0.0, EIGEN_FLOOR, 0.0, EIGEN_FLOOR]).expect("diagonal")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::dist_unchecked;

    fn circle_signal(n: usize, angle: f64) -> Signal {
        Signal::constant(&[n], &ManifoldPoint::circle(angle)).unwrap()
    }

    #[test]
    fn concentration_limit_is_identity() {
        let u = circle_signal(50, 3.1);
        let out = add_noise(&u, &NoiseSpec::new(NoiseModel::VonMises { kappa: 1e8 }, 1)).unwrap();
        for (a, b) in u.points().iter().zip(out.points()) {
            assert!(dist_unchecked(a, b) < 1e-3);
            assert!(b.coords()[0] > -PI && b.coords()[0] <= PI);
        }
    }

    #[test]
    fn von_mises_is_centered() {
        let theta = 2.9;
        let out = add_noise(
            &circle_signal(100_000, theta),
            &NoiseSpec::new(NoiseModel::VonMises { kappa: 4.0 }, 9),
        )
        .unwrap();
        let (s, c) = out.points().iter().fold((0.0, 0.0), |(s, c), p| {
            (s + p.coords()[0].sin(), c + p.coords()[0].cos())
        });
        let mean = s.atan2(c);
        assert!(crate::manifold::circle::signed_diff(mean, theta).abs() < 0.01);
    }

    #[test]
    fn noise_is_seeded_and_checked() {
        let u = circle_signal(20, 0.0);
        let spec = NoiseSpec::new(NoiseModel::WrappedGaussian { sigma: 0.3 }, 5);
        assert_eq!(add_noise(&u, &spec).unwrap(), add_noise(&u, &spec).unwrap());
        let other = NoiseSpec::new(NoiseModel::WrappedGaussian { sigma: 0.3 }, 6);
        assert_ne!(add_noise(&u, &spec).unwrap(), add_noise(&u, &other).unwrap());
        let dwi = NoiseSpec::new(
            NoiseModel::RicianDwi {
                level: 30.0,
                gradient_count: 6,
            },
            0,
        );
        assert!(matches!(add_noise(&u, &dwi), Err(Error::IncompatibleNoise { .. })));
    }

    #[test]
    fn dwi_refit_is_exact_without_noise() {
        let p = ManifoldPoint::spd3([1.5, 0.2, -0.1, 0.8, 0.05, 0.6]).unwrap();
        let u = Signal::constant(&[4], &p).unwrap();
        for n in [6, 12] {
            let out = add_noise(
                &u,
                &NoiseSpec::new(
                    NoiseModel::RicianDwi {
                        level: 1e9,
                        gradient_count: n,
                    },
                    2,
                ),
            )
            .unwrap();
            for q in out.points() {
                assert!(dist_unchecked(&p, q) < 1e-3);
            }
        }
    }

    #[test]
    fn spec_json_shape() {
        let s: NoiseSpec = serde_json::from_str(r#"{"model":"von_mises","kappa":100.0,"seed":4}"#).unwrap();
        assert_eq!(s, NoiseSpec::new(NoiseModel::VonMises { kappa: 100.0 }, 4));
    }
}
