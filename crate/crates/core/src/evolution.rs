//! Time evolution on the scattering side, the end-to-end solvers and the
//! gauge maps linking the two DNLS forms.

use serde::{Deserialize, Serialize};

use crate::direct::{scattering_coefficients, DirectConfig};
use crate::error::Result;
use crate::grid::{cumulative_trapezoid, make_dual_spectral_grid, Potential, ScatteringData, C64};
use crate::inverse::{inverse_map_on, InverseConfig};

/// Evolve scattering data to time `t`: `rho -> exp(-4 i lambda^2 t) rho`.
///
/// `alpha` is left alone and `beta` picks up the same phase as `rho`.
pub fn evolve_rho(d: &ScatteringData, t: f64) -> ScatteringData {
    let phase: Vec<C64> = (0..d.grid.len())
        .map(|k| {
            let l = d.grid.node(k);
            C64::from_polar(1.0, -4.0 * l * l * t)
        })
        .collect();
    let twist = |v: &[C64]| -> Vec<C64> { v.iter().zip(&phase).map(|(a, p)| a * p).collect() };
    ScatteringData {
        grid: d.grid,
        rho: twist(&d.rho),
        alpha: d.alpha.clone(),
        beta: d.beta.as_deref().map(twist),
    }
}

fn twist(p: &Potential, sign: f64) -> Potential {
    let dens: Vec<f64> = p.values.iter().map(|v| v.norm_sqr()).collect();
    let phase = cumulative_trapezoid(&dens, p.grid.spacing());
    let values = p
        .values
        .iter()
        .zip(&phase)
        .map(|(v, s)| v * C64::from_polar(1.0, sign * s))
        .collect();
    Potential {
        grid: p.grid,
        values,
    }
}

/// `q = u exp(-i \int_{-L}^x |u|^2)`, taking a (DNLS1) field to (DNLS2).
pub fn gauge_forward(u: &Potential) -> Potential {
    twist(u, -1.0)
}

/// `u = q exp(i \int_{-L}^x |q|^2)`, the inverse of [`gauge_forward`].
pub fn gauge_inverse(q: &Potential) -> Potential {
    twist(q, 1.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub direct: DirectConfig,
    pub inverse: InverseConfig,
}

/// Solve (DNLS2) to time `t` through the scattering transform; the result
/// lives on the grid of `q0`.
pub fn solve_dnls2(q0: &Potential, t: f64, cfg: &PipelineConfig) -> Result<Potential> {
    let spec = make_dual_spectral_grid(&q0.grid);
    let data = scattering_coefficients(q0, &spec, &cfg.direct)?.data;
    solve_from_data(&data, q0, t, cfg)
}

/// Solve (DNLS2) at several times, reusing one direct transform.
pub fn solve_dnls2_at(q0: &Potential, times: &[f64], cfg: &PipelineConfig) -> Result<Vec<Potential>> {
    let spec = make_dual_spectral_grid(&q0.grid);
    let data = scattering_coefficients(q0, &spec, &cfg.direct)?.data;
    times.iter().map(|&t| solve_from_data(&data, q0, t, cfg)).collect()
}

fn solve_from_data(data: &ScatteringData, q0: &Potential, t: f64, cfg: &PipelineConfig) -> Result<Potential> {
    let evolved = evolve_rho(data, t);
    Ok(inverse_map_on(&evolved, &q0.grid, &cfg.inverse)?.potential)
}

/// Solve (DNLS1) by conjugating [`solve_dnls2`] with the gauge; the inverse
/// gauge is computed from the time-`t` field.
pub fn solve_dnls1(u0: &Potential, t: f64, cfg: &PipelineConfig) -> Result<Potential> {
    Ok(gauge_inverse(&solve_dnls2(&gauge_forward(u0), t, cfg)?))
}
