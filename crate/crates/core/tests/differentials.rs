use manifold_deconv::differentials::{f1, grad_data_atom, MeanDifferentialContext};
use manifold_deconv::karcher::{weighted_mean, MeanOptions, WeightVector};
use manifold_deconv::manifold::{
    coefficients, dist, exp, jacobi_eigenframe, log, parallel_transport, tangent_basis, TangentVector,
};
use manifold_deconv::{ManifoldKind, ManifoldPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_near(rng: &mut ChaCha8Rng, c: &ManifoldPoint, r: f64) -> ManifoldPoint {
    let basis = tangent_basis(c);
    let mut v = TangentVector::zero(c);
    for b in &basis {
        v.add_scaled(b, rng.random_range(-r..r));
    }
    exp(c, &v).unwrap()
}

fn center(kind: ManifoldKind) -> ManifoldPoint {
    match kind {
        ManifoldKind::Sphere2 => ManifoldPoint::sphere([0.3, -0.2, 0.9]).unwrap(),
        ManifoldKind::Spd3 => ManifoldPoint::spd3([1.5, 0.2, 0.1, 1.0, -0.3, 2.0]).unwrap(),
        ManifoldKind::Circle => ManifoldPoint::circle(0.4),
        ManifoldKind::Euclidean(n) => ManifoldPoint::euclidean(&vec![0.1; n]),
    }
}

fn tight() -> MeanOptions {
    MeanOptions {
        max_iters: 500,
        grad_tol: 1e-14,
        ..MeanOptions::default()
    }
}

fn atom_value(pts: &[ManifoldPoint], w: &WeightVector, warm: &ManifoldPoint, f: &ManifoldPoint, p: f64) -> f64 {
    let m = weighted_mean(pts, w, &tight().with_init(warm.clone())).unwrap();
    dist(&m, f).unwrap().powf(p)
}

fn check_against_differences(kind: ManifoldKind, p: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = center(kind);
    let spread = if kind == ManifoldKind::Sphere2 { 0.6 } else { 0.8 };
    for _ in 0..20 {
        let pts: Vec<ManifoldPoint> = (0..5).map(|_| random_near(&mut rng, &c, spread)).collect();
        let raw: Vec<f64> = (0..5).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let w = WeightVector::new(raw.iter().map(|x| x / s).collect()).unwrap();
        let f = random_near(&mut rng, &c, spread);
        let m = weighted_mean(&pts, &w, &tight()).unwrap();
        let grads = grad_data_atom(&pts, w.weights(), &m, &f, p).unwrap();
        let scale = grads.iter().map(|g| g.norm()).fold(0.0, f64::max);
        let h = 1e-5;
        for j in 0..5 {
            for e in tangent_basis(&pts[j]) {
                let mut plus = pts.clone();
                let mut minus = pts.clone();
                plus[j] = exp(&pts[j], &e.scaled(h)).unwrap();
                minus[j] = exp(&pts[j], &e.scaled(-h)).unwrap();
                let fd = (atom_value(&plus, &w, &m, &f, p) - atom_value(&minus, &w, &m, &f, p)) / (2.0 * h);
                let an = manifold_deconv::manifold::inner(&grads[j], &e);
                assert!(
                    (fd - an).abs() <= 1e-4 * scale.max(1e-3),
                    "{kind} j={j}: finite difference {fd} vs analytic {an} (scale {scale})"
                );
            }
        }
    }
}

#[test]
fn sphere_gradients_match_finite_differences() {
    check_against_differences(ManifoldKind::Sphere2, 2.0, 11);
    check_against_differences(ManifoldKind::Sphere2, 1.0, 12);
}

#[test]
fn spd_gradients_match_finite_differences() {
    check_against_differences(ManifoldKind::Spd3, 2.0, 21);
    check_against_differences(ManifoldKind::Spd3, 1.0, 22);
}

#[test]
fn circle_gradients_match_finite_differences() {
    check_against_differences(ManifoldKind::Circle, 2.0, 31);
}

#[test]
fn euclidean_gradient_closed_form() {
    let pts: Vec<ManifoldPoint> = [[1.0, 0.0, 2.0], [0.5, -1.0, 0.0], [3.0, 1.0, 1.0]]
        .iter()
        .map(|c| ManifoldPoint::euclidean(c))
        .collect();
    let w = [0.25, 0.5, 0.25];
    let mean: Vec<f64> = (0..3)
        .map(|k| pts.iter().zip(&w).map(|(p, a)| a * p.coords()[k]).sum())
        .collect();
    let m = ManifoldPoint::euclidean(&mean);
    let f = ManifoldPoint::euclidean(&[0.0, 2.0, -1.0]);
    let g = grad_data_atom(&pts, &w, &m, &f, 2.0).unwrap();
    for (gj, aj) in g.iter().zip(&w) {
        for ((g, m), fk) in gj.components().iter().zip(&mean).zip(f.coords()) {
            assert!((g - 2.0 * aj * (m - fk)).abs() < 1e-10);
        }
    }
}

#[test]
fn l_is_symmetric_and_solves() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for kind in [ManifoldKind::Sphere2, ManifoldKind::Spd3] {
        let c = center(kind);
        for _ in 0..10 {
            let pts: Vec<ManifoldPoint> = (0..4).map(|_| random_near(&mut rng, &c, 0.7)).collect();
            let w = WeightVector::new(vec![0.1, 0.4, 0.3, 0.2]).unwrap();
            let m = weighted_mean(&pts, &w, &tight()).unwrap();
            let ctx = MeanDifferentialContext::new(&pts, w.weights(), &m).unwrap();
            let l = ctx.l_matrix();
            assert!((l - l.transpose()).amax() <= 1e-10);
            let target = log(&m, &random_near(&mut rng, &c, 0.5)).unwrap();
            let x = ctx.apply_l_adjoint_inverse(&target).unwrap();
            let xc = nalgebra::DVector::from_vec(coefficients(ctx.basis(), &x));
            let tc = nalgebra::DVector::from_vec(coefficients(ctx.basis(), &target));
            assert!((l * xc - tc).amax() < 1e-10);
        }
    }
}

/// The differential of exp at `v` maps each eigenvector `w` to the transport
/// of `w / f1(λ, |v|)`; checked against central differences of the closed-form
/// exponential.
#[test]
fn jacobi_fields_match_exponential_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for kind in [ManifoldKind::Sphere2, ManifoldKind::Spd3] {
        let c = center(kind);
        for _ in 0..10 {
            let q = random_near(&mut rng, &c, 1.0);
            let v = log(&c, &q).unwrap();
            let d = v.norm();
            let frame = jacobi_eigenframe(&c, &v).unwrap();
            for (wn, lam) in frame.vectors.iter().zip(&frame.eigenvalues) {
                let s = 1e-6;
                let mut vp = v.clone();
                vp.add_scaled(wn, s);
                let mut vm = v.clone();
                vm.add_scaled(wn, -s);
                let xp = exp(&c, &vp).unwrap();
                let xm = exp(&c, &vm).unwrap();
                let expected = parallel_transport(&c, &q, wn)
                    .unwrap()
                    .scaled(1.0 / f1(*lam, d).unwrap());
                for k in 0..q.coords().len() {
                    let fd = (xp.coords()[k] - xm.coords()[k]) / (2.0 * s);
                    assert!(
                        (fd - expected.components()[k]).abs() < 1e-6,
                        "{kind} lambda {lam}: {fd} vs {}",
                        expected.components()[k]
                    );
                }
            }
        }
    }
}
