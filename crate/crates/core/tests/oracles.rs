//! Results checked against independent computations: finite differences,
//! exponential-midpoint products and a plain explicit integrator.

use std::f64::consts::PI;

use centro_affine::linalg::{self, Mat2};
use centro_affine::monodromy;
use centro_affine::selfcheck::random_curve;
use centro_affine::{
    backlund, curvature, invariants, kdv, lift, Branch, HillPotential, Parity, PeriodicFn,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn smooth(t: f64) -> f64 {
    (2.0 * t).sin().exp() + 0.3 * (4.0 * t).cos()
}

#[test]
fn spectral_derivative_agrees_with_centered_differences() {
    let f = PeriodicFn::from_fn(64, Parity::Periodic, smooth).unwrap();
    let d = f.derivative();
    let errs: Vec<f64> = [1e-2, 5e-3]
        .iter()
        .map(|&h| {
            f.grid()
                .iter()
                .zip(d.samples())
                .map(|(&t, &v)| ((smooth(t + h) - smooth(t - h)) / (2.0 * h) - v).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    // the difference is the O(h^2) truncation of the oracle itself
    let ratio = errs[0] / errs[1];
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    assert!(errs[1] < 1e-3);
}

#[test]
fn quadrature_agrees_with_fine_trapezoid() {
    let f = PeriodicFn::from_fn(32, Parity::Periodic, smooth).unwrap();
    let m = 20_000;
    let fine: f64 = (0..m)
        .map(|k| smooth(k as f64 * PI / m as f64))
        .sum::<f64>()
        * PI
        / m as f64;
    assert!((f.integrate_period() - fine).abs() < 1e-12);
}

/// Period map of `u'' = q u` as a product of exact exponentials of the
/// frozen midpoint generator.
fn midpoint_exponential(q: impl Fn(f64) -> f64, steps: usize) -> Mat2 {
    let h = PI / steps as f64;
    let mut m = linalg::IDENTITY;
    for j in 0..steps {
        let v = q((j as f64 + 0.5) * h);
        let step = if v > 0.0 {
            let w = v.sqrt();
            [
                [(w * h).cosh(), (w * h).sinh() / w],
                [w * (w * h).sinh(), (w * h).cosh()],
            ]
        } else if v < 0.0 {
            let w = (-v).sqrt();
            [
                [(w * h).cos(), (w * h).sin() / w],
                [-w * (w * h).sin(), (w * h).cos()],
            ]
        } else {
            [[1.0, h], [0.0, 1.0]]
        };
        m = linalg::mat_mul(&step, &m);
    }
    m
}

#[test]
fn hill_monodromy_agrees_with_exponential_products() {
    let q = |t: f64| 0.7 + 0.4 * (2.0 * t).cos() - 0.2 * (4.0 * t).sin();
    let p = PeriodicFn::from_fn(128, Parity::Periodic, q).unwrap();
    let m = monodromy::hill_fundamental(&p).m;
    let oracle = midpoint_exponential(q, 40_000);
    assert!(linalg::max_abs(&linalg::sub(&m, &oracle)) < 1e-6);
}

#[test]
fn riccati_branches_solve_the_riccati_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = lift(&random_curve(&mut rng, 128).unwrap()).unwrap();
    let p = curvature(&g);
    let (plus, minus) = monodromy::riccati_periodic_solutions(&p, 0.5).unwrap();
    assert!(plus.residual(&p) < 1e-8 && minus.residual(&p) < 1e-8);
    assert!(plus.multiplier > 1.0 && minus.multiplier < 1.0);
    assert!((plus.multiplier * minus.multiplier - 1.0).abs() < 1e-9);
}

/// Explicit RK4 on the sampled KdV right-hand side.
fn explicit_kdv(p: &HillPotential, s_end: f64, steps: usize) -> PeriodicFn {
    let h = s_end / steps as f64;
    let rhs = |v: &PeriodicFn| kdv::kdv_rhs(&HillPotential(v.clone()));
    let mut v = p.0.clone();
    for _ in 0..steps {
        let k1 = rhs(&v);
        let k2 = rhs(&v.add(&k1.scale(h / 2.0)));
        let k3 = rhs(&v.add(&k2.scale(h / 2.0)));
        let k4 = rhs(&v.add(&k3.scale(h)));
        v = v.add(
            &k1.add(&k2.scale(2.0))
                .add(&k3.scale(2.0))
                .add(&k4)
                .scale(h / 6.0),
        );
    }
    v
}

#[test]
fn exponential_integrator_agrees_with_explicit_rk4() {
    // explicit RK4 is stable at ds = 1e-5 on 32 nodes (stiffness 16 * 32^2)
    let p = HillPotential(
        PeriodicFn::from_fn(32, Parity::Periodic, |t| {
            -1.0 + 0.3 * (2.0 * t).cos() + 0.1 * (4.0 * t).sin()
        })
        .unwrap(),
    );
    let etd = kdv::evolve_potential(&p, 0.02, 2.5e-4).unwrap();
    let oracle = explicit_kdv(&p, 0.02, 2000);
    assert!(
        etd.0.sup_distance(&oracle) < 1e-9,
        "{}",
        etd.0.sup_distance(&oracle)
    );
}

#[test]
fn flow_keeps_the_curve_consistent_with_its_potential() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = lift(&random_curve(&mut rng, 128).unwrap()).unwrap();
    for st in kdv::flow_states(&g, 0.03, kdv::DEFAULT_DS, 100).unwrap() {
        assert!(st.consistency_defect() < 1e-7, "s = {}", st.s);
        assert!(st.curve.wronskian_defect() < 1e-9);
    }
}

#[test]
fn sl2_hamiltonians_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = lift(&random_curve(&mut rng, 128).unwrap()).unwrap();
    let tests: Vec<PeriodicFn> = (1..4)
        .map(|k| {
            PeriodicFn::from_fn(128, Parity::Periodic, |t| (2.0 * k as f64 * t).cos() + 0.3)
                .unwrap()
        })
        .collect();
    assert!(invariants::sl2_hamiltonian_check(&g, &tests).unwrap().max() < 1e-6);
}

#[test]
fn recursion_is_linear_in_the_test_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g = lift(&random_curve(&mut rng, 64).unwrap()).unwrap();
    let a = PeriodicFn::from_fn(64, Parity::Periodic, |t| (2.0 * t).sin()).unwrap();
    let b = PeriodicFn::from_fn(64, Parity::Periodic, |t| (6.0 * t).cos()).unwrap();
    let r = kdv::recursion_check(&g, 1, &[a.clone(), b.clone(), a.add(&b.scale(2.0))]).unwrap();
    assert!(r.iter().all(|x| x.max() < 1e-6));
}

#[test]
fn commutation_defect_shrinks_with_flow_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = lift(&random_curve(&mut rng, 64).unwrap()).unwrap();
    let d1 = kdv::commutation_check(&g, 0.5, Branch::Minus, 0.02, kdv::DEFAULT_DS).unwrap();
    let d2 = kdv::commutation_check(&g, 0.5, Branch::Minus, 0.01, kdv::DEFAULT_DS).unwrap();
    assert!(d1 < 1e-5 && d2 < 1e-5);
    assert!(d2 <= d1 * 1.5 + 1e-12);
}

#[test]
fn trivial_circle_commutation() {
    let g = lift(&centro_affine::ProjectiveCurve::circle(64).unwrap()).unwrap();
    assert!(kdv::commutation_check(&g, 0.5, Branch::Minus, 0.02, kdv::DEFAULT_DS).unwrap() < 1e-9);
}

#[test]
fn branches_are_swapped_by_the_inverse_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let g = lift(&random_curve(&mut rng, 128).unwrap()).unwrap();
    for b in [Branch::Plus, Branch::Minus] {
        let once = backlund::apply_tc(&g, 0.5, b).unwrap();
        let back = backlund::apply_tc(&once.delta, 0.5, b.opposite()).unwrap();
        assert!(back.delta.sup_distance(&g.neg()) < 1e-7);
    }
}
