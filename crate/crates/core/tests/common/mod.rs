#![allow(dead_code)]

use std::sync::OnceLock;

use dnls_ist::direct::{scattering_coefficients, DirectConfig};
use std::f64::consts::PI;

use dnls_ist::{make_dual_spectral_grid, Potential, ScatteringData, SpatialGrid, SpectralGrid, C64};

/// `0.3 exp(-x^2)` on `L = 16`, `N = 1024` and its direct transform.
pub fn reference() -> &'static (Potential, ScatteringData) {
    static CELL: OnceLock<(Potential, ScatteringData)> = OnceLock::new();
    CELL.get_or_init(|| {
        let grid = SpatialGrid::new(16.0, 1024).unwrap();
        let q = Potential::gaussian(grid, 0.3);
        let spec = make_dual_spectral_grid(&grid);
        let data = scattering_coefficients(&q, &spec, &DirectConfig::default()).unwrap().data;
        (q, data)
    })
}

/// A smaller instance for tests that run many solves.
pub fn small(amplitude: f64) -> (Potential, ScatteringData) {
    let grid = SpatialGrid::new(12.0, 256).unwrap();
    let q = Potential::gaussian(grid, amplitude);
    let spec = make_dual_spectral_grid(&grid);
    let data = scattering_coefficients(&q, &spec, &DirectConfig::default()).unwrap().data;
    (q, data)
}

pub fn max_abs_diff(a: &[dnls_ist::C64], b: &[dnls_ist::C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Dense matrices of `C^+` and `C^-` written as explicit trigonometric sums:
/// `C^+` keeps the modes `e^{2 i lambda y}` with `y = (s + 1/2) dy > 0`.
pub fn dense_projectors(n: usize) -> (Vec<C64>, Vec<C64>) {
    let kernel = |d: i64, range: std::ops::Range<i64>| -> C64 {
        range
            .map(|s| C64::from_polar(1.0, 2.0 * PI * (s as f64 + 0.5) * d as f64 / n as f64))
            .sum::<C64>()
            / n as f64
    };
    let half = (n / 2) as i64;
    let mut plus = vec![C64::new(0.0, 0.0); n * n];
    let mut minus = vec![C64::new(0.0, 0.0); n * n];
    let kp: Vec<C64> = (-(n as i64) + 1..n as i64).map(|d| kernel(d, 0..half)).collect();
    let km: Vec<C64> = (-(n as i64) + 1..n as i64).map(|d| -kernel(d, -half..0)).collect();
    for k in 0..n {
        for l in 0..n {
            let idx = (k as i64 - l as i64 + n as i64 - 1) as usize;
            plus[k * n + l] = kp[idx];
            minus[k * n + l] = km[idx];
        }
    }
    (plus, minus)
}

pub fn matvec(a: &[C64], v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n).map(|k| (0..n).map(|l| a[k * n + l] * v[l]).sum()).collect()
}

/// `S h = -C^-[ C^+(rho h e^{-2ix.}) lambda conj(rho) e^{2ix.} ]` with dense projectors.
pub fn dense_s(rho: &[C64], grid: &SpectralGrid, x: f64, h: &[C64], proj: &(Vec<C64>, Vec<C64>)) -> Vec<C64> {
    let nodes = grid.nodes();
    let inner: Vec<C64> = (0..h.len())
        .map(|k| rho[k] * h[k] * C64::from_polar(1.0, -2.0 * x * nodes[k]))
        .collect();
    let mid = matvec(&proj.0, &inner);
    let outer: Vec<C64> = (0..h.len())
        .map(|k| -mid[k] * nodes[k] * rho[k].conj() * C64::from_polar(1.0, 2.0 * x * nodes[k]))
        .collect();
    matvec(&proj.1, &outer)
}
