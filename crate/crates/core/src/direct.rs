//! Direct scattering: Jost solutions of the reduced spectral problem and the
//! coefficients `alpha`, `beta`, `rho`.
//!
//! The first Jost column is carried as `(n11, m)` with `m = n21 / lambda`,
//! which is regular at `lambda = 0`:
//!
//! ```text
//! n11' = lambda q m - (i/2)|q|^2 n11
//! m'   = 2 i lambda m + conj(q) n11 + (i/2)|q|^2 m
//! ```
//!
//! `n+` starts from `(1, 0)` at the right edge, `n-` at the left edge, and
//! both are read off at `x = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{IstError, Result};
use crate::exec::Execution;
use crate::fourier::{upsample, CauchyProjector, Side};
use crate::grid::{Potential, ScatteringData, SpectralGrid, C64};

/// Step-size control for the Jost integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JostConfig {
    /// Target local truncation error per RK4 step.
    pub tol: f64,
    /// Lower bound on RK4 substeps per grid cell.
    pub min_substeps: usize,
    /// Upper bound on RK4 substeps per grid cell (a power of two).
    pub max_substeps: usize,
    /// Samples with `|q| <= cutoff * sup|q|` at the outer ends of the grid are
    /// treated as zero, where the solution is known in closed form.
    pub cutoff: f64,
}

impl Default for JostConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            min_substeps: 4,
            max_substeps: 256,
            cutoff: 1e-20,
        }
    }
}

/// Values of the normalized Jost columns at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JostTrace {
    pub lambda: f64,
    pub n11_plus: C64,
    pub n11_minus: C64,
    pub m_plus: C64,
    pub m_minus: C64,
}

impl JostTrace {
    /// Trace of the zero potential.
    pub fn free(lambda: f64) -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self {
            lambda,
            n11_plus: one,
            n11_minus: one,
            m_plus: zero,
            m_minus: zero,
        }
    }

    /// `T_11` of `T = n-(0)^{-1} n+(0)`, using `det n- = 1` and the column symmetry
    /// `n22 = conj(n11)`, `n12 = conj(m)`.
    pub fn alpha(&self) -> C64 {
        self.n11_plus * self.n11_minus.conj() - self.lambda * self.m_plus * self.m_minus.conj()
    }

    /// `T_12` of the same transition matrix.
    pub fn beta(&self) -> C64 {
        (self.n11_minus * self.m_plus - self.n11_plus * self.m_minus).conj()
    }

    /// Large-lambda remainders `(n11 - 1, n21 + conj(q(0)) / 2i)` of the `+` column.
    pub fn eta_plus(&self, q_at_zero: C64) -> (C64, C64) {
        let two_i = C64::new(0.0, 2.0);
        (
            self.n11_plus - 1.0,
            self.lambda * self.m_plus + q_at_zero.conj() / two_i,
        )
    }
}

/// Potential resampled for RK4 stage evaluation.
///
/// Holds band-limited interpolants of `q` on a grid `2 * max_substeps` times
/// finer than the input, restricted to where `q` is not negligible.
#[derive(Debug, Clone)]
pub struct JostIntegrator {
    cfg: JostConfig,
    dx: f64,
    /// Fine samples per coarse cell.
    refine: usize,
    fine: Vec<C64>,
    /// Coarse index of `x = 0`.
    center: usize,
    /// Coarse index range `[lo, hi]` outside which `q` is dropped.
    lo: usize,
    hi: usize,
    /// Largest `|q|` and the bandwidth scale of `q`, used for step selection.
    q_sup: f64,
    q_rate: f64,
    empty: bool,
}

impl JostIntegrator {
    pub fn new(q: &Potential, cfg: JostConfig) -> Result<Self> {
        if !cfg.max_substeps.is_power_of_two() || cfg.min_substeps == 0 || cfg.tol <= 0.0 {
            return Err(IstError::InvalidConfig(
                "max_substeps must be a power of two, min_substeps and tol positive".into(),
            ));
        }
        let n = q.values.len();
        let dx = q.grid.spacing();
        let sup = q.sup_norm();
        let center = n / 2;
        if sup == 0.0 {
            return Ok(Self {
                cfg,
                dx,
                refine: 1,
                fine: Vec::new(),
                center,
                lo: center,
                hi: center,
                q_sup: 0.0,
                q_rate: 0.0,
                empty: true,
            });
        }
        let thresh = cfg.cutoff * sup;
        let first = q.values.iter().position(|v| v.norm() > thresh).unwrap_or(0);
        let last = q.values.iter().rposition(|v| v.norm() > thresh).unwrap_or(n - 1);
        // a small margin keeps the interpolant tails inside the window
        let pad = 8;
        let lo = first.saturating_sub(pad).min(center);
        let hi = (last + pad).min(n - 1).max(center);

        let refine = 2 * cfg.max_substeps;
        let fine = upsample(&q.values, refine);
        let fine = fine[lo * refine..=hi * refine].to_vec();

        let deriv = crate::fourier::spectral_derivative(&q.values, dx, 1);
        let dsup = deriv.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(Self {
            cfg,
            dx,
            refine,
            fine,
            center,
            lo,
            hi,
            q_sup: sup,
            q_rate: dsup / sup,
            empty: false,
        })
    }

    /// RK4 substeps per grid cell used at spectral parameter `lambda`.
    pub fn substeps(&self, lambda: f64) -> usize {
        // RK4 local error ~ (h K)^5 / 120 for a system with rate K.
        let rate = 2.0 * lambda.abs()
            + 2.0 * lambda.abs().sqrt() * self.q_sup
            + self.q_sup * self.q_sup
            + self.q_rate;
        let h_max = (120.0 * self.cfg.tol).powf(0.2) / rate.max(1e-300);
        let needed = (self.dx / h_max).ceil().max(1.0) as usize;
        needed
            .next_power_of_two()
            .clamp(self.cfg.min_substeps.next_power_of_two(), self.cfg.max_substeps)
    }

    fn sample(&self, coarse: usize, offset: usize) -> C64 {
        self.fine[(coarse - self.lo) * self.refine + offset]
    }

    /// Integrate both Jost columns at one `lambda`.
    pub fn trace(&self, lambda: f64) -> Result<JostTrace> {
        if self.empty {
            return Ok(JostTrace::free(lambda));
        }
        let s = self.substeps(lambda);
        let stride = self.refine / (2 * s);
        let h = self.dx / s as f64;
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);

        // n-: forward from the left end of the window to x = 0
        let mut y = (one, zero);
        for j in self.lo..self.center {
            for sub in 0..s {
                let base = sub * 2 * stride;
                let qa = self.sample(j, base);
                let qm = self.sample(j, base + stride);
                let qb = self.sample(j, base + 2 * stride);
                y = rk4(y, lambda, h, qa, qm, qb);
            }
        }
        let minus = y;

        // n+: backward from the right end of the window to x = 0
        let mut y = (one, zero);
        for j in (self.center..self.hi).rev() {
            for sub in (0..s).rev() {
                let base = sub * 2 * stride;
                let qa = self.sample(j, base + 2 * stride);
                let qm = self.sample(j, base + stride);
                let qb = self.sample(j, base);
                y = rk4(y, lambda, -h, qa, qm, qb);
            }
        }
        let plus = y;

        let out = JostTrace {
            lambda,
            n11_plus: plus.0,
            n11_minus: minus.0,
            m_plus: plus.1,
            m_minus: minus.1,
        };
        let finite = [out.n11_plus, out.n11_minus, out.m_plus, out.m_minus]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if finite {
            Ok(out)
        } else {
            Err(IstError::NonFinite { lambda })
        }
    }
}

#[inline]
fn rhs(y: (C64, C64), lambda: f64, q: C64) -> (C64, C64) {
    let w = 0.5 * q.norm_sqr();
    let (n, m) = y;
    (
        C64::new(0.0, -w) * n + lambda * q * m,
        C64::new(0.0, 2.0 * lambda + w) * m + q.conj() * n,
    )
}

#[inline]
fn rk4(y: (C64, C64), lambda: f64, h: f64, qa: C64, qm: C64, qb: C64) -> (C64, C64) {
    let k1 = rhs(y, lambda, qa);
    let k2 = rhs((y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1), lambda, qm);
    let k3 = rhs((y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1), lambda, qm);
    let k4 = rhs((y.0 + h * k3.0, y.1 + h * k3.1), lambda, qb);
    let c = h / 6.0;
    (
        y.0 + c * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.1 + c * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Jost boundary values at a single `lambda`.
pub fn jost_pair(q: &Potential, lambda: f64, tol: f64) -> Result<JostTrace> {
    if !lambda.is_finite() {
        return Err(IstError::NonFinite { lambda });
    }
    let cfg = JostConfig {
        tol,
        ..JostConfig::default()
    };
    JostIntegrator::new(q, cfg)?.trace(lambda)
}

/// Settings for the direct map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectConfig {
    pub jost: JostConfig,
    /// Edge magnitude above which a potential is rejected.
    pub truncation_tol: f64,
    pub alpha_floor: f64,
    pub margin_floor: f64,
    pub execution: Execution,
}

impl Default for DirectConfig {
    fn default() -> Self {
        Self {
            jost: JostConfig::default(),
            truncation_tol: 1e-10,
            alpha_floor: 1e-6,
            margin_floor: 1e-6,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectResult {
    pub data: ScatteringData,
    pub jost: Vec<JostTrace>,
}

/// The direct map: `alpha`, `beta` and `rho = beta / alpha` on `grid`.
pub fn scattering_coefficients(
    q: &Potential,
    grid: &SpectralGrid,
    cfg: &DirectConfig,
) -> Result<DirectResult> {
    q.check_admissible(cfg.truncation_tol)?;
    let integrator = JostIntegrator::new(q, cfg.jost)?;
    let jost = cfg
        .execution
        .try_map_indexed(grid.len(), |k| integrator.trace(grid.node(k)))?;

    let alpha: Vec<C64> = jost.iter().map(JostTrace::alpha).collect();
    let beta: Vec<C64> = jost.iter().map(JostTrace::beta).collect();

    let (k_min, a_min) = alpha
        .iter()
        .map(|a| a.norm())
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    if a_min < cfg.alpha_floor {
        return Err(IstError::AlphaVanishes {
            lambda: grid.node(k_min),
            min_abs: a_min,
        });
    }
    let rho = alpha.iter().zip(&beta).map(|(a, b)| b / a).collect();
    let data = ScatteringData::new(*grid, rho)?.with_coefficients(alpha, beta)?;
    Ok(DirectResult { data, jost })
}

/// Outcome of [`spectral_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCertificate {
    /// `min (1 - lambda |rho|^2)`.
    pub margin: f64,
    pub margin_lambda: f64,
    /// `min |alpha|` when `alpha` is known.
    pub min_alpha: Option<f64>,
}

/// Verify the strict spectral conditions with the given floors.
pub fn spectral_check(
    d: &ScatteringData,
    margin_floor: f64,
    alpha_floor: f64,
) -> Result<SpectralCertificate> {
    let profile = d.margin_profile();
    let mut k_min = 0;
    let mut margin = f64::INFINITY;
    for (k, &g) in profile.iter().enumerate() {
        if g.is_nan() {
            return Err(IstError::SpectralConditionViolated {
                lambda: d.grid.node(k),
                what: "margin",
                value: g,
            });
        }
        if g < margin {
            margin = g;
            k_min = k;
        }
    }
    if margin < margin_floor {
        return Err(IstError::SpectralConditionViolated {
            lambda: d.grid.node(k_min),
            what: "1 - lambda |rho|^2",
            value: margin,
        });
    }
    let min_alpha = match &d.alpha {
        Some(alpha) => {
            let (k, a) = alpha
                .iter()
                .map(|a| a.norm())
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
            if a < alpha_floor {
                return Err(IstError::SpectralConditionViolated {
                    lambda: d.grid.node(k),
                    what: "|alpha|",
                    value: a,
                });
            }
            Some(a)
        }
        None => None,
    };
    Ok(SpectralCertificate {
        margin,
        margin_lambda: d.grid.node(k_min),
        min_alpha,
    })
}

/// `log(1 - lambda |rho|^2)` on the grid, rejecting nonpositive arguments.
pub(crate) fn log_margin(d: &ScatteringData) -> Result<Vec<C64>> {
    d.margin_profile()
        .into_iter()
        .enumerate()
        .map(|(k, g)| {
            if g > 0.0 && g.is_finite() {
                Ok(C64::new(g.ln(), 0.0))
            } else {
                Err(IstError::SpectralConditionViolated {
                    lambda: d.grid.node(k),
                    what: "1 - lambda |rho|^2",
                    value: g,
                })
            }
        })
        .collect()
}

/// `alpha` recovered from `rho` alone: `exp(C^- log(1 - lambda |rho|^2))`.
pub fn alpha_from_rho(d: &ScatteringData) -> Result<Vec<C64>> {
    let h = log_margin(d)?;
    let proj = CauchyProjector::new(h.len());
    Ok(proj.project(Side::Minus, &h).into_iter().map(|v| v.exp()).collect())
}
