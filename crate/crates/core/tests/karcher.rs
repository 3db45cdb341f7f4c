use manifold_deconv::karcher::{
    mean_objective, mean_vector_field, weighted_mean, weighted_mean_nearest, MeanOptions, WeightVector,
};
use manifold_deconv::manifold::{dist, exp, TangentVector};
use manifold_deconv::ManifoldPoint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn circle_objective(angles: &[f64], w: &[f64], m: f64) -> f64 {
    angles
        .iter()
        .zip(w)
        .map(|(t, a)| {
            let d = (m - t).rem_euclid(2.0 * PI);
            let d = d.min(2.0 * PI - d);
            0.5 * a * d * d
        })
        .sum()
}

#[test]
fn circle_means_match_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid: Vec<f64> = (0..62832).map(|k| -PI + (k as f64 + 1.0) * 1e-4).collect();
    for _ in 0..100 {
        let n = rng.random_range(1..=5);
        let angles: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
        let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..1.0)).collect();
        let s: f64 = w.iter().sum();
        if s < 0.2 {
            w[0] += 0.2 - s + 0.1;
        }
        let objs: Vec<f64> = grid.iter().map(|m| circle_objective(&angles, &w, *m)).collect();
        let best = objs.iter().copied().fold(f64::INFINITY, f64::min);
        // grid points whose value is within the discretization error of the minimum
        let slack = 1e-8 * w.iter().map(|a| a.abs()).sum::<f64>() * 10.0;
        let near: Vec<f64> = grid
            .iter()
            .zip(&objs)
            .filter(|(_, o)| **o <= best + slack)
            .map(|(m, _)| *m)
            .collect();

        let pts: Vec<ManifoldPoint> = angles.iter().map(|t| ManifoldPoint::circle(*t)).collect();
        let a = WeightVector::new(w.clone()).unwrap();
        let m = weighted_mean(&pts, &a, &MeanOptions::default()).unwrap();
        let found = m.coords()[0];
        let gap = near
            .iter()
            .map(|g| dist(&ManifoldPoint::circle(*g), &m).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(
            gap < 2e-3,
            "angles {angles:?} weights {w:?}: mean {found}, grid gap {gap}"
        );
        assert!(circle_objective(&angles, &w, found) <= best + 1e-12);
    }
}

#[test]
fn euclidean_mean_is_affine_combination() {
    let pts: Vec<ManifoldPoint> = [[1.0, 2.0], [-3.0, 0.5], [0.25, 4.0]]
        .iter()
        .map(|c| ManifoldPoint::euclidean(c))
        .collect();
    let w = [0.7, -0.2, 0.5];
    let a = WeightVector::new(w.to_vec()).unwrap();
    let m = weighted_mean(&pts, &a, &MeanOptions::default()).unwrap();
    for k in 0..2 {
        let expect: f64 = pts.iter().zip(&w).map(|(p, a)| a * p.coords()[k]).sum::<f64>() / 1.0;
        assert!((m.coords()[k] - expect).abs() < 1e-12);
    }
    let anchor = ManifoldPoint::euclidean(&[9.0, 9.0]);
    assert_eq!(
        weighted_mean_nearest(&pts, &a, &anchor, &MeanOptions::default()).unwrap(),
        m
    );
}

fn sphere_ball(center: [f64; 3], r: f64, dirs: &[(f64, f64)]) -> (ManifoldPoint, Vec<ManifoldPoint>) {
    let c = ManifoldPoint::sphere(center).unwrap();
    let basis = manifold_deconv::manifold::tangent_basis(&c);
    let pts = dirs
        .iter()
        .map(|(ang, frac)| {
            let mut v = TangentVector::zero(&c);
            v.add_scaled(&basis[0], r * frac * ang.cos());
            v.add_scaled(&basis[1], r * frac * ang.sin());
            exp(&c, &v).unwrap()
        })
        .collect();
    (c, pts)
}

fn spd_ball(r: f64, dirs: &[[f64; 6]]) -> (ManifoldPoint, Vec<ManifoldPoint>) {
    let c = ManifoldPoint::spd3([2.0, 0.3, -0.1, 1.5, 0.2, 1.0]).unwrap();
    let basis = manifold_deconv::manifold::tangent_basis(&c);
    let pts = dirs
        .iter()
        .map(|d| {
            let mut v = TangentVector::zero(&c);
            for (b, x) in basis.iter().zip(d) {
                v.add_scaled(b, *x);
            }
            let n = v.norm().max(1e-12);
            exp(&c, &v.scaled(r * n.min(1.0) / n)).unwrap()
        })
        .collect();
    (c, pts)
}

fn signed_weights(raw: &[f64]) -> Option<WeightVector> {
    WeightVector::new(raw.to_vec()).ok().filter(|a| a.sum() > 0.3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_means_stay_in_ball(
        center in prop::array::uniform3(-1.0f64..1.0),
        r in 0.05f64..0.35,
        dirs in prop::collection::vec((0.0f64..std::f64::consts::TAU, 0.0f64..1.0), 2..6),
        raw in prop::collection::vec(-0.3f64..1.0, 6),
    ) {
        prop_assume!(center.iter().map(|x| x * x).sum::<f64>() > 0.1);
        let (c, pts) = sphere_ball(center, r, &dirs);
        let w = signed_weights(&raw[..pts.len()]);
        prop_assume!(w.is_some());
        let a = w.unwrap();
        prop_assume!(a.containment_factor() * r < 1.2);
        let opts = MeanOptions::default();
        let m = weighted_mean(&pts, &a, &opts).unwrap();
        prop_assert!(dist(&c, &m).unwrap() <= a.containment_factor() * r + 1e-9);
        prop_assert!(mean_vector_field(&pts, &a, &m).unwrap().norm() <= 1e-9);
        let mn = weighted_mean_nearest(&pts, &a, &pts[0], &opts).unwrap();
        prop_assert!(mean_objective(&pts, &a, &mn) <= mean_objective(&pts, &a, &m) + 1e-9);
    }

    #[test]
    fn spd_means_stay_in_ball(
        r in 0.1f64..1.5,
        dirs in prop::collection::vec(prop::array::uniform6(-1.0f64..1.0), 2..6),
        raw in prop::collection::vec(-0.2f64..1.0, 6),
    ) {
        let (c, pts) = spd_ball(r, &dirs);
        let w = signed_weights(&raw[..pts.len()]);
        prop_assume!(w.is_some());
        let a = w.unwrap();
        let m = weighted_mean(&pts, &a, &MeanOptions::default()).unwrap();
        prop_assert!(dist(&c, &m).unwrap() <= a.containment_factor() * r + 1e-9);
        prop_assert!(mean_vector_field(&pts, &a, &m).unwrap().norm() <= 1e-9 * (1.0 + 2.0 * r));
    }

    #[test]
    fn identical_points_are_fixed(
        raw in prop::collection::vec(-0.5f64..1.0, 1..5),
        angle in -3.0f64..3.0,
    ) {
        let w = signed_weights(&raw);
        prop_assume!(w.is_some());
        let a = w.unwrap();
        let s = ManifoldPoint::sphere([angle.cos(), angle.sin(), 0.3]).unwrap();
        let m = weighted_mean(&vec![s.clone(); a.len()], &a, &MeanOptions::default()).unwrap();
        prop_assert!(dist(&s, &m).unwrap() < 1e-12);
        let c = ManifoldPoint::circle(angle);
        let m = weighted_mean(&vec![c.clone(); a.len()], &a, &MeanOptions::default()).unwrap();
        prop_assert!(dist(&c, &m).unwrap() < 1e-12);
    }
}
