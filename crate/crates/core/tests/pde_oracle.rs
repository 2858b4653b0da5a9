mod common;

use std::f64::consts::PI;

use dnls_ist::evolution::gauge_forward;
use dnls_ist::oracle::{
    conserved, conserved_dnls1, conserved_dnls2, integrate, integrate_snapshots, momentum_gauge, pde_residual, Equation,
    StepperConfig,
};
use dnls_ist::{Potential, SpatialGrid, C64};

fn reference() -> Potential {
    Potential::gaussian(SpatialGrid::new(16.0, 1024).unwrap(), 0.3)
}

#[test]
fn fourth_order_self_convergence() {
    let q = Potential::from_fn(SpatialGrid::new(12.0, 256).unwrap(), |x| {
        C64::new(0.5 * (-x * x).exp(), 0.2 * x * (-x * x).exp())
    });
    for eq in [Equation::Dnls2, Equation::Dnls1] {
        let run = |dt: f64| integrate(eq, &q, &StepperConfig::new(dt, 0.5)).unwrap();
        let (a, b, c) = (run(0.02), run(0.01), run(0.005));
        let ratio = a.relative_l2_distance(&b) / b.relative_l2_distance(&c);
        assert!((12.0..20.0).contains(&ratio), "{eq:?}: ratio {ratio}");
    }
}

#[test]
fn conserved_functionals_drift_little() {
    let q = reference();
    let snaps = integrate_snapshots(Equation::Dnls2, &q, &StepperConfig::new(1e-4, 1.0), &[1.0]).unwrap();
    let (c0, c1) = (conserved_dnls2(&q), conserved_dnls2(&snaps[0]));
    let rel = |a: f64, b: f64| ((a - b) / a).abs();
    assert!(rel(q.l2_norm(), snaps[0].l2_norm()) < 1e-8);
    assert!(rel(c0.mass, c1.mass) < 1e-6);
    assert!(rel(c0.energy, c1.energy) < 1e-6);
    assert!(rel(c0.momentum, c1.momentum) < 1e-6);
}

#[test]
fn integrators_agree_through_the_gauge() {
    let u = reference();
    let step = StepperConfig::new(1e-4, 0.5);
    let u1 = integrate(Equation::Dnls1, &u, &step).unwrap();
    let q2 = integrate(Equation::Dnls2, &gauge_forward(&u), &step).unwrap();
    assert!(gauge_forward(&u1).relative_l2_distance(&q2) < 1e-4);
}

#[test]
fn residual_of_exact_trajectory_is_second_order() {
    let q = Potential::gaussian(SpatialGrid::new(12.0, 256).unwrap(), 0.5);
    let step = StepperConfig::new(1e-4, 0.0);
    let res = |delta: f64| {
        let s = integrate_snapshots(Equation::Dnls2, &q, &step, &[0.3 - delta, 0.3, 0.3 + delta]).unwrap();
        pde_residual(&s[0], &s[1], &s[2], delta).unwrap()
    };
    let (coarse, fine) = (res(2e-2), res(1e-2));
    let ratio = coarse / fine;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn functionals_of_simple_fields() {
    let g = SpatialGrid::new(16.0, 1024).unwrap();
    let z = conserved(&Potential::zeros(g));
    assert_eq!((z.mass, z.energy, z.momentum), (0.0, 0.0, 0.0));
    let c = conserved(&Potential::gaussian(g, 1.0));
    assert!((c.mass - (PI / 2.0).sqrt()).abs() < 1e-12);
    // real field: only the quartic term of the momentum survives
    let quartic = 0.25 * (PI / 4.0).sqrt();
    assert!((c.momentum - quartic).abs() < 1e-12);
}

/// The exact-derivative evaluation and the explicit twist differ only by the
/// second-order error of the prefix-sum phase.
#[test]
fn gauge_chain_evaluations_agree() {
    let u = Potential::from_fn(SpatialGrid::new(16.0, 1024).unwrap(), |x| {
        C64::new(0.6 * (-x * x).exp(), 0.2 * (-(x - 0.5).powi(2)).exp())
    });
    let exact = conserved_dnls1(&u);
    let twisted = conserved(&momentum_gauge(&u));
    assert!((exact.mass - twisted.mass).abs() < 1e-12);
    assert!((exact.energy - twisted.energy).abs() < 1e-3 * exact.energy.abs());
    assert!((exact.momentum - twisted.momentum).abs() < 1e-3 * exact.momentum.abs());
}
