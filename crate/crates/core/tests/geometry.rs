mod common;

use common::normal_vec;
use scsg::geometry::{
    bregman, dual_exponent, first_order_residual, mirror_prox_step, q_norm_conjugate, DistanceGenerator, MirrorStepSpec,
};
use scsg::objectives::Regularizer;
use scsg::vector::lp_norm;
use scsg::RngStream;

/// `(1/q)‖x‖^q + (1 − 1/q)‖y‖^q − ‖y‖^{q−2}⟨y, x⟩`, the expanded form of
/// the q-norm Bregman divergence.
fn q_bregman_expanded(q: f64, x: &[f64], y: &[f64]) -> f64 {
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let yx: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    nx.powf(q) / q + (1.0 - 1.0 / q) * ny.powf(q) - ny.powf(q - 2.0) * yx
}

#[test]
fn q_norm_bregman_matches_expanded_formula() {
    let mut rng = RngStream::new(200);
    for q in [1.5, 3.0, 4.0] {
        let g = DistanceGenerator::q_norm(q).unwrap();
        for _ in 0..100 {
            let x = normal_vec(&mut rng, 5);
            let y = normal_vec(&mut rng, 5);
            let a = bregman(&g, &x, &y).unwrap();
            let b = q_bregman_expanded(q, &x, &y);
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "q = {q}: {a} vs {b}");
            assert!(a >= -1e-12);
        }
        assert!(bregman(&g, &[1.0, 2.0], &[1.0, 2.0]).unwrap().abs() < 1e-15);
    }
}

#[test]
fn bregman_is_nonnegative() {
    let mut rng = RngStream::new(201);
    let gens = [
        DistanceGenerator::Euclidean,
        DistanceGenerator::q_norm(1.2).unwrap(),
        DistanceGenerator::q_norm(2.5).unwrap(),
        DistanceGenerator::q_norm(6.0).unwrap(),
    ];
    for _ in 0..500 {
        let x = normal_vec(&mut rng, 4);
        let y: Vec<f64> = normal_vec(&mut rng, 4).iter().map(|v| v * 1e-3).collect();
        for g in &gens {
            assert!(bregman(g, &x, &y).unwrap() >= -1e-12);
            assert!(bregman(g, &y, &x).unwrap() >= -1e-12);
            assert!(bregman(g, &x, &[0.0; 4]).unwrap() >= -1e-12);
        }
    }
}

#[test]
fn euclidean_plain_step_is_exact_gradient_step() {
    let mut rng = RngStream::new(202);
    for _ in 0..100 {
        let x = normal_vec(&mut rng, 7);
        let nu = normal_vec(&mut rng, 7);
        let eta = rng.uniform_open01();
        let spec = MirrorStepSpec::euclidean(eta, Regularizer::none()).unwrap();
        let y = mirror_prox_step(&spec, &x, &nu).unwrap();
        let expected: Vec<f64> = x.iter().zip(&nu).map(|(a, b)| a - eta * b).collect();
        assert_eq!(y, expected);
    }
}

#[test]
fn euclidean_l1_step_is_soft_threshold() {
    let mut rng = RngStream::new(203);
    let reg = Regularizer::l1(0.4).unwrap();
    for _ in 0..100 {
        let x = normal_vec(&mut rng, 6);
        let nu = normal_vec(&mut rng, 6);
        let spec = MirrorStepSpec::euclidean(0.3, reg).unwrap();
        let y = mirror_prox_step(&spec, &x, &nu).unwrap();
        let z: Vec<f64> = x.iter().zip(&nu).map(|(a, b)| a - 0.3 * b).collect();
        assert_eq!(y, reg.prox(&z, 0.3).unwrap());
    }
}

#[test]
fn supported_steps_satisfy_first_order_conditions() {
    let mut rng = RngStream::new(204);
    let regs = [Regularizer::none(), Regularizer::l2_scaled(0.7).unwrap(), Regularizer::l1(0.5).unwrap()];
    let gens = [
        DistanceGenerator::Euclidean,
        DistanceGenerator::q_norm(1.5).unwrap(),
        DistanceGenerator::q_norm(3.0).unwrap(),
        DistanceGenerator::q_norm(4.0).unwrap(),
    ];
    let mut checked = 0;
    for g in gens {
        for reg in regs {
            let Ok(spec) = MirrorStepSpec::new(0.37, reg, g) else {
                continue;
            };
            for _ in 0..200 {
                let x = normal_vec(&mut rng, 5);
                let nu: Vec<f64> = normal_vec(&mut rng, 5).iter().map(|v| 3.0 * v).collect();
                let y = mirror_prox_step(&spec, &x, &nu).unwrap();
                let res = first_order_residual(&spec, &x, &nu, &y);
                assert!(res <= 1e-10, "{g:?} {reg:?}: residual {res}");
                checked += 1;
            }
        }
    }
    // 3 Euclidean + 2 per q-norm generator.
    assert_eq!(checked, 9 * 200);
}

#[test]
fn residual_detects_wrong_points() {
    let spec = MirrorStepSpec::new(0.5, Regularizer::none(), DistanceGenerator::q_norm(3.0).unwrap()).unwrap();
    let x = [1.0, -1.0];
    let nu = [0.2, 0.4];
    let y = mirror_prox_step(&spec, &x, &nu).unwrap();
    assert!(first_order_residual(&spec, &x, &nu, &y) < 1e-12);
    assert!(first_order_residual(&spec, &x, &nu, &[y[0] + 1e-3, y[1]]) > 1e-4);
}

#[test]
fn q_norm_two_agrees_with_euclidean() {
    let mut rng = RngStream::new(205);
    let reg = Regularizer::l2_scaled(0.25).unwrap();
    let e = MirrorStepSpec::euclidean(0.2, reg).unwrap();
    let q = MirrorStepSpec::new(0.2, reg, DistanceGenerator::q_norm(2.0).unwrap()).unwrap();
    for _ in 0..50 {
        let x = normal_vec(&mut rng, 4);
        let nu = normal_vec(&mut rng, 4);
        let a = mirror_prox_step(&e, &x, &nu).unwrap();
        let b = mirror_prox_step(&q, &x, &nu).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-13);
        }
    }
}

/// `sup_y ⟨x, y⟩ − (1/q)‖y‖_r^q` by searching random directions `u`
/// (`‖u‖_r = 1`) and maximizing the concave ray profile
/// `t ↦ t⟨x, u⟩ − t^q/q` by golden-section search.
fn conjugate_brute_force(x: &[f64], q: f64, r: f64, directions: usize, rng: &mut RngStream) -> f64 {
    let mut best_dir = vec![0.0; x.len()];
    let mut best_slope = f64::NEG_INFINITY;
    for _ in 0..directions {
        let g = normal_vec(rng, x.len());
        let norm = lp_norm(&g, r);
        let slope: f64 = g.iter().zip(x).map(|(a, b)| a / norm * b).sum();
        if slope > best_slope {
            best_slope = slope;
            best_dir = g.iter().map(|v| v / norm).collect();
        }
    }
    let slope: f64 = best_dir.iter().zip(x).map(|(a, b)| a * b).sum();
    let profile = |t: f64| t * slope - t.powf(q) / q;
    let (mut lo, mut hi) = (0.0, 1.0);
    while profile(hi) > profile(hi / 2.0) {
        hi *= 2.0;
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if profile(a) < profile(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    profile(0.5 * (lo + hi)).max(0.0)
}

#[test]
fn q_norm_conjugate_closed_form() {
    let mut rng = RngStream::new(206);
    for dim in 1..=4 {
        for q in [1.5, 2.0, 3.0] {
            for r in [1.5, 2.0, 3.0] {
                let x = normal_vec(&mut rng, dim);
                let closed = q_norm_conjugate(&x, q, r);
                let brute = conjugate_brute_force(&x, q, r, 50_000, &mut rng);
                let p = dual_exponent(q);
                assert!((closed - lp_norm(&x, dual_exponent(r)).powf(p) / p).abs() < 1e-15);
                assert!(brute <= closed * (1.0 + 1e-9));
                assert!((brute - closed).abs() <= 0.01 * closed, "dim {dim} q {q} r {r}: {brute} vs {closed}");
            }
        }
    }
}
