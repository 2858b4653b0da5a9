mod common;

use dnls_ist::direct::{
    alpha_from_rho, jost_pair, scattering_coefficients, spectral_check, DirectConfig, JostConfig, JostIntegrator,
};
use dnls_ist::{make_dual_spectral_grid, IstError, Potential, ScatteringData, SpatialGrid, SpectralGrid, C64};

type M2 = [[C64; 2]; 2];

fn q_exact(x: f64) -> C64 {
    C64::new(0.3 * (-x * x).exp(), 0.0)
}

/// Full Jost matrix `n` of `psi = n e^{-i lambda x sigma_3}` with
/// `psi' = (-i lambda sigma_3 + P) psi`; each column carries its own phase.
fn jost_rhs(x: f64, lambda: f64, n: &M2) -> M2 {
    let q = q_exact(x);
    let w = 0.5 * q.norm_sqr();
    let i = C64::new(0.0, 1.0);
    // column 1 moves with e^{-i lambda x}, column 2 with e^{+i lambda x}
    let shift = [0.0, -2.0 * lambda];
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (c, s) in shift.iter().enumerate() {
        let (a, b) = (n[0][c], n[1][c]);
        out[0][c] = (i * (*s - w)) * a + q * b;
        out[1][c] = lambda * q.conj() * a + i * (2.0 * lambda + s + w) * b;
    }
    out
}

fn axpy(y: &M2, h: f64, k: &M2) -> M2 {
    let mut o = *y;
    for r in 0..2 {
        for c in 0..2 {
            o[r][c] += h * k[r][c];
        }
    }
    o
}

/// Fixed-step RK4 from `from` (where `n = I`) to `x = 0`.
fn integrate(lambda: f64, from: f64, steps: usize) -> M2 {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut y = [[one, zero], [zero, one]];
    let h = -from / steps as f64;
    for s in 0..steps {
        let x = from + s as f64 * h;
        let k1 = jost_rhs(x, lambda, &y);
        let k2 = jost_rhs(x + 0.5 * h, lambda, &axpy(&y, 0.5 * h, &k1));
        let k3 = jost_rhs(x + 0.5 * h, lambda, &axpy(&y, 0.5 * h, &k2));
        let k4 = jost_rhs(x + h, lambda, &axpy(&y, h, &k3));
        for r in 0..2 {
            for c in 0..2 {
                y[r][c] += h / 6.0 * (k1[r][c] + 2.0 * k2[r][c] + 2.0 * k3[r][c] + k4[r][c]);
            }
        }
    }
    y
}

/// Richardson-extrapolated Jost matrices `(n+(0), n-(0))` at step `dx / 16`.
fn oracle(lambda: f64) -> (M2, M2) {
    let (edge, steps) = (9.0, 9 * 512);
    let rich = |a: M2, b: M2| {
        let mut o = b;
        for r in 0..2 {
            for c in 0..2 {
                o[r][c] = (16.0 * b[r][c] - a[r][c]) / 15.0;
            }
        }
        o
    };
    let plus = rich(integrate(lambda, edge, steps), integrate(lambda, edge, 2 * steps));
    let minus = rich(integrate(lambda, -edge, steps), integrate(lambda, -edge, 2 * steps));
    (plus, minus)
}

fn reference_potential() -> Potential {
    Potential::gaussian(SpatialGrid::new(16.0, 1024).unwrap(), 0.3)
}

#[test]
fn jost_values_match_refined_oracle() {
    let q = reference_potential();
    let integ = JostIntegrator::new(&q, JostConfig::default()).unwrap();
    for lambda in [0.0, -2.5, 0.7, 4.0] {
        let t = integ.trace(lambda).unwrap();
        let (p, m) = oracle(lambda);
        let m_of = |n: &M2| if lambda == 0.0 { None } else { Some(n[1][0] / lambda) };
        assert!((t.n11_plus - p[0][0]).norm() < 1e-9, "n11+ at {lambda}");
        assert!((t.n11_minus - m[0][0]).norm() < 1e-9, "n11- at {lambda}");
        // the second columns confirm the symmetry n12 = conj(m), n22 = conj(n11)
        assert!((t.m_plus.conj() - p[0][1]).norm() < 1e-9, "n12+ at {lambda}");
        assert!((t.n11_plus.conj() - p[1][1]).norm() < 1e-9, "n22+ at {lambda}");
        if let (Some(mp), Some(mm)) = (m_of(&p), m_of(&m)) {
            assert!((t.m_plus - mp).norm() < 1e-9, "m+ at {lambda}");
            assert!((t.m_minus - mm).norm() < 1e-9, "m- at {lambda}");
        }
    }
}

fn transition(p: &M2, m: &M2) -> M2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    let mut t = [[C64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            t[r][c] = inv[r][0] * p[0][c] + inv[r][1] * p[1][c];
        }
    }
    t
}

#[test]
fn coefficients_match_oracle_transition_matrix() {
    let q = reference_potential();
    let lambdas = [-3.0, -0.4, 0.0, 1.3, 5.0];
    for &lambda in &lambdas {
        let t = jost_pair(&q, lambda, 1e-10).unwrap();
        let (p, m) = oracle(lambda);
        let tm = transition(&p, &m);
        assert!((t.alpha() - tm[0][0]).norm() < 1e-9, "alpha at {lambda}");
        assert!((t.beta() - tm[0][1]).norm() < 1e-9, "beta at {lambda}");
        assert!((t.beta() / t.alpha() - tm[0][1] / tm[0][0]).norm() < 1e-9, "rho at {lambda}");
    }
}

#[test]
fn determinant_and_trace_formula() {
    let (_, d) = common::reference();
    assert!(d.determinant_defect().unwrap() <= 1e-6);
    let direct = d.alpha.as_ref().unwrap();
    let traced = alpha_from_rho(d).unwrap();
    let rel = direct
        .iter()
        .zip(&traced)
        .map(|(a, b)| (a - b).norm() / a.norm())
        .fold(0.0, f64::max);
    assert!(rel <= 1e-3, "relative deviation {rel}");
    let g = d.margin_profile();
    for (a, gk) in traced.iter().zip(&g) {
        assert!((a.norm_sqr() * gk - 1.0).abs() < 1e-8);
    }
    let cert = spectral_check(d, 1e-6, 1e-6).unwrap();
    assert!(cert.margin > 0.0 && cert.margin <= 1.0);
}

/// `eta_11 = n11+ - 1` and `eta_21 = n21+ + conj(q(0))/2i` vanish like `1/lambda`.
#[test]
fn eta_decays_at_large_lambda() {
    let q = reference_potential();
    let integ = JostIntegrator::new(&q, JostConfig::default()).unwrap();
    let q0 = q.values[512];
    let lams = [8.0, 16.0, 32.0];
    let etas: Vec<(f64, f64)> = lams
        .iter()
        .map(|&l| {
            let (a, b) = integ.trace(l).unwrap().eta_plus(q0);
            (a.norm(), b.norm())
        })
        .collect();
    for w in etas.windows(2) {
        // halving per doubling of lambda, with slack for the next order
        assert!(w[1].0 < 0.6 * w[0].0, "{etas:?}");
        assert!(w[1].1 < 0.6 * w[0].1, "{etas:?}");
    }
    assert!(etas[1].0 < 1e-2 && etas[1].1 < 1e-2, "{etas:?}");
}

/// `rho(eps q) / eps` converges as `eps -> 0`, with an `O(eps^2)` remainder,
/// to `-\int e^{2 i lambda y} q(y) dy`.
#[test]
fn small_data_linearize_to_fourier_transform() {
    let grid = SpatialGrid::new(16.0, 256).unwrap();
    let spec = make_dual_spectral_grid(&grid);
    let profile = |eps: f64| {
        let q = Potential::from_fn(grid, |x| C64::new((-x * x).exp(), 0.5 * x * (-x * x).exp()) * eps);
        let d = scattering_coefficients(&q, &spec, &DirectConfig::default()).unwrap().data;
        d.rho.iter().map(|r| r / eps).collect::<Vec<_>>()
    };
    let pi = std::f64::consts::PI;
    let limit: Vec<C64> = spec
        .nodes()
        .iter()
        // \int e^{2i l y} (1 + i y/2) e^{-y^2} dy = sqrt(pi) e^{-l^2} (1 - l/2)
        .map(|&l| -C64::new(pi.sqrt() * (-l * l).exp() * (1.0 - 0.5 * l), 0.0))
        .collect();
    let e1 = common::max_abs_diff(&profile(1e-2), &limit);
    let e2 = common::max_abs_diff(&profile(5e-3), &limit);
    assert!(e1 < 1e-3, "{e1}");
    let ratio = e1 / e2;
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn coefficients_are_smooth_in_lambda() {
    let (_, d) = common::reference();
    let dl = d.grid.spacing();
    for v in [d.alpha.as_ref().unwrap(), d.beta.as_ref().unwrap(), &d.rho] {
        let worst = v
            .windows(3)
            .map(|w| (w[0] - 2.0 * w[1] + w[2]).norm() / (dl * dl))
            .fold(0.0, f64::max);
        assert!(worst.is_finite() && worst < 5.0, "second difference {worst}");
    }
}

#[test]
fn zero_potential_is_fixed_point() {
    let grid = SpatialGrid::new(8.0, 64).unwrap();
    let spec = make_dual_spectral_grid(&grid);
    let d = scattering_coefficients(&Potential::zeros(grid), &spec, &DirectConfig::default())
        .unwrap()
        .data;
    assert!(d.rho.iter().all(|r| r.norm() == 0.0));
    assert!(d.alpha.unwrap().iter().all(|a| *a == C64::new(1.0, 0.0)));
}

#[test]
fn violations_are_reported_with_lambda() {
    let grid = SpectralGrid::new(16, 0.5).unwrap();
    let mut rho = vec![C64::new(0.0, 0.0); 16];
    // lambda = 2 at k = 12, so lambda |rho|^2 = 1 there
    rho[12] = C64::new(0.5f64.sqrt(), 0.0);
    let d = ScatteringData::new(grid, rho).unwrap();
    match spectral_check(&d, 1e-6, 1e-6) {
        Err(IstError::SpectralConditionViolated { lambda, .. }) => assert_eq!(lambda, 2.0),
        other => panic!("expected a violation, got {other:?}"),
    }
}

#[test]
fn edge_mass_is_rejected() {
    let grid = SpatialGrid::new(4.0, 64).unwrap();
    let q = Potential::from_fn(grid, |x| C64::new((-0.1 * x * x).exp(), 0.0));
    let spec = make_dual_spectral_grid(&grid);
    assert!(matches!(
        scattering_coefficients(&q, &spec, &DirectConfig::default()),
        Err(IstError::Inadmissible { .. })
    ));
}
