//! Inverse scattering: scalar Beals-Coifman equations, the delta factor, and
//! the glued reconstruction of the potential.
//!
//! For `x` bounded below the potential comes from the right problem
//!
//! ```text
//! nu = S[1] + S nu,   S h = -C^-[ C^+(rho h e^{-2ix.}) . lambda conj(rho) e^{2ix.} ]
//! q(x) = -(1/pi) \int e^{-2i lambda x} rho (1 + nu) dlambda
//! ```
//!
//! and for `x` bounded above from the left problem with data
//! `rho_breve = rho / Delta`. The left problem is solved by reflecting it
//! into a right problem: the potential `-conj(q(-x))` has reflection
//! coefficient `-conj(rho_breve)`. The left operator written out directly has
//! the projectors in mirrored order and is kept as a cross-check.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::direct::log_margin;
use crate::error::{IstError, Result};
use crate::exec::Execution;
use crate::fourier::{dual_forward, dual_inverse, CauchyProjector, Side};
use crate::grid::{Potential, ScatteringData, SpatialGrid, SpectralGrid, C64};
use crate::linalg::{assemble, dense_solve, gmres, GmresConfig};

/// Which scalar Fredholm operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `S h = -C^-[C^+(rho h e^{-2ix.}) lambda conj(rho) e^{2ix.}]`
    Right,
    /// `S h = -C^+[C^-(rho h e^{-2ix.}) lambda conj(rho) e^{2ix.}]`
    Left,
}

/// The operator `S` frozen at one `x`.
#[derive(Debug, Clone)]
pub struct BcOperator {
    orientation: Orientation,
    /// `rho(lambda) e^{-2 i x lambda}`
    inner: Vec<C64>,
    /// `lambda conj(rho(lambda)) e^{2 i x lambda}`
    outer: Vec<C64>,
    proj: CauchyProjector,
}

impl BcOperator {
    pub fn new(
        rho: &[C64],
        grid: &SpectralGrid,
        x: f64,
        orientation: Orientation,
        proj: CauchyProjector,
    ) -> Result<Self> {
        if rho.len() != grid.len() || proj.len() != grid.len() {
            return Err(IstError::GridMismatch(format!(
                "rho has {} samples, grid {} nodes",
                rho.len(),
                grid.len()
            )));
        }
        let mut inner = Vec::with_capacity(rho.len());
        let mut outer = Vec::with_capacity(rho.len());
        for (k, r) in rho.iter().enumerate() {
            let lam = grid.node(k);
            let e = C64::from_polar(1.0, -2.0 * x * lam);
            inner.push(r * e);
            outer.push(lam * r.conj() * e.conj());
        }
        Ok(Self {
            orientation,
            inner,
            outer,
            proj,
        })
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    /// `out = S h`; `scratch` must come from [`CauchyProjector::scratch`].
    pub fn apply_into(&self, h: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        let (first, second) = match self.orientation {
            Orientation::Right => (Side::Plus, Side::Minus),
            Orientation::Left => (Side::Minus, Side::Plus),
        };
        for ((o, a), v) in out.iter_mut().zip(&self.inner).zip(h) {
            *o = a * v;
        }
        self.proj.project_in_place(first, out, scratch);
        for (o, b) in out.iter_mut().zip(&self.outer) {
            *o *= -b;
        }
        self.proj.project_in_place(second, out, scratch);
    }

    pub fn apply(&self, h: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); h.len()];
        let mut scratch = self.proj.scratch();
        self.apply_into(h, &mut out, &mut scratch);
        out
    }

    /// `S[1]`
    pub fn source(&self) -> Vec<C64> {
        self.apply(&vec![C64::new(1.0, 0.0); self.len()])
    }
}

/// One application of the right operator `S` at `x`.
pub fn bc_apply(rho: &[C64], grid: &SpectralGrid, x: f64, h: &[C64]) -> Result<Vec<C64>> {
    if h.len() != grid.len() {
        return Err(IstError::LengthMismatch {
            expected: grid.len(),
            got: h.len(),
        });
    }
    let op = BcOperator::new(rho, grid, x, Orientation::Right, CauchyProjector::new(grid.len()))?;
    Ok(op.apply(h))
}

/// One application of the left operator built from `rho_breve` at `x`.
pub fn bc_apply_left(rho_breve: &[C64], grid: &SpectralGrid, x: f64, h: &[C64]) -> Result<Vec<C64>> {
    if h.len() != grid.len() {
        return Err(IstError::LengthMismatch {
            expected: grid.len(),
            got: h.len(),
        });
    }
    let op = BcOperator::new(
        rho_breve,
        grid,
        x,
        Orientation::Left,
        CauchyProjector::new(grid.len()),
    )?;
    Ok(op.apply(h))
}

/// How a Fredholm system was solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Krylov,
    Dense,
}

/// Solver settings for the inverse map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseConfig {
    /// Residual bound `||(I - S) nu - S[1]||_2` in the `L^2(dlambda)` norm.
    pub tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
    /// Largest system size for which the dense fallback is attempted.
    pub dense_limit: usize,
    /// Solve every system densely instead of iteratively.
    pub force_dense: bool,
    /// Seed each solve with the previous point's solution.
    pub warm_start: bool,
    /// Lambda-grid refinement applied to the data before solving.
    pub oversample: usize,
    pub margin_floor: f64,
    pub execution: Execution,
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            restart: 50,
            max_iterations: 400,
            dense_limit: 2048,
            force_dense: false,
            warm_start: false,
            oversample: 1,
            margin_floor: 1e-6,
            execution: Execution::default(),
        }
    }
}

/// Solution of the scalar Beals-Coifman equation at one `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BCState {
    pub x: f64,
    /// `nu - 1` on the lambda-grid.
    pub nu_sharp: Vec<C64>,
    pub residual: f64,
    pub iterations: usize,
    pub method: SolveMethod,
}

fn l2(v: &[C64], dl: f64) -> f64 {
    (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dl).sqrt()
}

fn residual_of(op: &BcOperator, nu: &[C64], rhs: &[C64], dl: f64) -> f64 {
    let s_nu = op.apply(nu);
    let r: Vec<C64> = nu
        .iter()
        .zip(&s_nu)
        .zip(rhs)
        .map(|((n, s), b)| n - s - b)
        .collect();
    l2(&r, dl)
}

/// Solve `(I - S) nu = S[1]` for a prepared operator.
pub fn solve_operator(
    op: &BcOperator,
    x: f64,
    dl: f64,
    cfg: &InverseConfig,
    guess: Option<&[C64]>,
) -> Result<BCState> {
    let n = op.len();
    let rhs = op.source();
    let mut scratch = op.proj.scratch();
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let apply = |v: &[C64], out: &mut [C64]| {
        op.apply_into(v, &mut tmp, &mut scratch);
        for ((o, a), b) in out.iter_mut().zip(v).zip(&tmp) {
            *o = a - b;
        }
    };

    let mut krylov_failure = None;
    if !cfg.force_dense {
        let gcfg = GmresConfig {
            restart: cfg.restart,
            max_iterations: cfg.max_iterations,
            tolerance: cfg.tol / dl.sqrt(),
        };
        let out = gmres(apply, &rhs, guess, &gcfg);
        let residual = out.residual * dl.sqrt();
        let finite = out.solution.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        if out.converged && finite {
            return Ok(BCState {
                x,
                nu_sharp: out.solution,
                residual,
                iterations: out.iterations,
                method: SolveMethod::Krylov,
            });
        }
        krylov_failure = Some(IstError::NoConvergence {
            iterations: out.iterations,
            residual,
        });
    }

    if n > cfg.dense_limit {
        return Err(krylov_failure.unwrap_or(IstError::InvalidConfig(format!(
            "dense solve requested for {n} unknowns above the limit {}",
            cfg.dense_limit
        ))));
    }
    let mut scratch = op.proj.scratch();
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let matrix = assemble(n, |v, out| {
        op.apply_into(v, &mut tmp, &mut scratch);
        for ((o, a), b) in out.iter_mut().zip(v).zip(&tmp) {
            *o = a - b;
        }
    });
    let nu = dense_solve(matrix, &rhs)?;
    let residual = residual_of(op, &nu, &rhs, dl);
    if residual > cfg.tol {
        return Err(krylov_failure.unwrap_or(IstError::SingularSystem));
    }
    Ok(BCState {
        x,
        nu_sharp: nu,
        residual,
        iterations: 0,
        method: SolveMethod::Dense,
    })
}

/// Solve the right Beals-Coifman equation at `x` to residual `tol`.
pub fn bc_solve(rho: &[C64], grid: &SpectralGrid, x: f64, tol: f64) -> Result<BCState> {
    let cfg = InverseConfig {
        tol,
        ..InverseConfig::default()
    };
    let op = BcOperator::new(rho, grid, x, Orientation::Right, CauchyProjector::new(grid.len()))?;
    solve_operator(&op, x, grid.spacing(), &cfg, None)
}

/// Band-limited refinement of a lambda-grid by an integer factor.
///
/// The data are extended by zero in the dual variable, so original nodes
/// are reproduced exactly and the dual range grows by `factor`.
pub fn refine_spectral(values: &[C64], grid: &SpectralGrid, factor: usize) -> Result<(Vec<C64>, SpectralGrid)> {
    if factor <= 1 {
        return Ok((values.to_vec(), *grid));
    }
    if !factor.is_power_of_two() {
        return Err(IstError::InvalidConfig(format!("oversample factor {factor} is not a power of two")));
    }
    let m = grid.len();
    let fine_spacing = grid.spacing() / factor as f64;
    let hat = dual_forward(values, grid.spacing());
    let big = m * factor;
    let offset = (big - m) / 2;
    let mut padded = vec![C64::new(0.0, 0.0); big];
    padded[offset..offset + m].copy_from_slice(&hat);
    let fine = dual_inverse(&padded, fine_spacing);
    Ok((fine, SpectralGrid::new(big, fine_spacing)?))
}

/// Reconstructed samples together with per-point solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub xs: Vec<f64>,
    pub q: Vec<C64>,
    pub reports: Vec<PointReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
    pub method: SolveMethod,
}

fn check_data(d: &ScatteringData, floor: f64) -> Result<()> {
    crate::direct::spectral_check(&ScatteringData::new(d.grid, d.rho.clone())?, floor, 0.0).map(|_| ())
}

/// Shared driver: for each `x`, solve with `orientation` and integrate.
fn reconstruct_with(
    rho: &[C64],
    grid: &SpectralGrid,
    xs: &[f64],
    orientation: Orientation,
    cfg: &InverseConfig,
) -> Result<Reconstruction> {
    let (rho, grid) = refine_spectral(rho, grid, cfg.oversample)?;
    let proj = CauchyProjector::new(grid.len());
    let dl = grid.spacing();
    let nodes = grid.nodes();

    let solve_point = |x: f64, guess: Option<&[C64]>| -> Result<(C64, BCState)> {
        let tag = |e: IstError| IstError::AtPoint {
            x,
            source: Box::new(e),
        };
        let op = BcOperator::new(&rho, &grid, x, orientation, proj.clone()).map_err(tag)?;
        let state = solve_operator(&op, x, dl, cfg, guess).map_err(tag)?;
        let integrand: Vec<C64> = rho
            .iter()
            .zip(&state.nu_sharp)
            .zip(&nodes)
            .map(|((r, nu), lam)| C64::from_polar(1.0, -2.0 * lam * x) * r * (1.0 + nu))
            .collect();
        let q = -crate::grid::trapezoid(&integrand, dl) / PI;
        Ok((q, state))
    };

    let results: Vec<(C64, BCState)> = if cfg.warm_start {
        // contiguous chunks, warm-started sequentially inside each chunk
        let chunks = if cfg.execution.is_parallel() { 32 } else { 1 };
        let chunk_len = xs.len().div_ceil(chunks).max(1);
        let n_chunks = xs.len().div_ceil(chunk_len);
        let per_chunk = cfg.execution.try_map_indexed(n_chunks, |c| {
            let mut out = Vec::with_capacity(chunk_len);
            let mut prev: Option<Vec<C64>> = None;
            for &x in &xs[c * chunk_len..((c + 1) * chunk_len).min(xs.len())] {
                let (q, st) = solve_point(x, prev.as_deref())?;
                prev = Some(st.nu_sharp.clone());
                out.push((q, st));
            }
            Ok::<_, IstError>(out)
        })?;
        per_chunk.into_iter().flatten().collect()
    } else {
        cfg.execution.try_map_indexed(xs.len(), |i| solve_point(xs[i], None))?
    };

    let (q, reports) = results
        .into_iter()
        .map(|(q, st)| {
            (
                q,
                PointReport {
                    x: st.x,
                    residual: st.residual,
                    iterations: st.iterations,
                    method: st.method,
                },
            )
        })
        .unzip();
    Ok(Reconstruction {
        xs: xs.to_vec(),
        q,
        reports,
    })
}

/// Right reconstruction `q(x)` at the requested points.
pub fn reconstruct_right(d: &ScatteringData, xs: &[f64], cfg: &InverseConfig) -> Result<Reconstruction> {
    check_data(d, cfg.margin_floor)?;
    reconstruct_with(&d.rho, &d.grid, xs, Orientation::Right, cfg)
}

/// Solution of the scalar problem `delta+ = delta- / (1 - lambda |rho|^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaFactors {
    pub grid: SpectralGrid,
    pub delta_plus: Vec<C64>,
    pub delta_minus: Vec<C64>,
    /// `delta+ delta- = exp(H log g)`
    pub delta: Vec<C64>,
    /// `rho / Delta`
    pub rho_breve: Vec<C64>,
}

/// Boundary values `delta_pm = exp(-C^pm log g)` and the derived left data.
pub fn delta_factor(d: &ScatteringData) -> Result<DeltaFactors> {
    let h = log_margin(d)?;
    let proj = CauchyProjector::new(h.len());
    let cp = proj.project(Side::Plus, &h);
    let cm = proj.project(Side::Minus, &h);
    let delta_plus: Vec<C64> = cp.iter().map(|v| (-v).exp()).collect();
    let delta_minus: Vec<C64> = cm.iter().map(|v| (-v).exp()).collect();
    let delta: Vec<C64> = proj.hilbert(&h).into_iter().map(|v| v.exp()).collect();
    let rho_breve = d.rho.iter().zip(&delta).map(|(r, dd)| r / dd).collect();
    Ok(DeltaFactors {
        grid: d.grid,
        delta_plus,
        delta_minus,
        delta,
        rho_breve,
    })
}

/// Left reconstruction through the reflected right problem.
pub fn reconstruct_left(d: &ScatteringData, xs: &[f64], cfg: &InverseConfig) -> Result<Reconstruction> {
    check_data(d, cfg.margin_floor)?;
    let df = delta_factor(d)?;
    let reflected: Vec<C64> = df.rho_breve.iter().map(|r| -r.conj()).collect();
    let mirrored: Vec<f64> = xs.iter().map(|x| -x).collect();
    let mut rec = reconstruct_with(&reflected, &d.grid, &mirrored, Orientation::Right, cfg)?;
    rec.xs = xs.to_vec();
    for v in &mut rec.q {
        *v = -v.conj();
    }
    for r in &mut rec.reports {
        r.x = -r.x;
    }
    Ok(rec)
}

/// Left reconstruction from the left operator directly (mirrored projector order).
pub fn reconstruct_left_direct(d: &ScatteringData, xs: &[f64], cfg: &InverseConfig) -> Result<Reconstruction> {
    check_data(d, cfg.margin_floor)?;
    let df = delta_factor(d)?;
    reconstruct_with(&df.rho_breve, &d.grid, xs, Orientation::Left, cfg)
}

/// Smooth partition: 0 on `(-inf, -1]`, 1 on `[1, inf)`.
pub fn chi(x: f64) -> f64 {
    fn psi(t: f64) -> f64 {
        if t > 0.0 {
            (-1.0 / t).exp()
        } else {
            0.0
        }
    }
    let t = (x + 1.0) / 2.0;
    let a = psi(t);
    let b = psi(1.0 - t);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

fn lookup(rec: &Reconstruction, x: f64, tol: f64) -> Option<C64> {
    // xs are usually sorted, but do not rely on it
    rec.xs
        .iter()
        .position(|&y| (y - x).abs() <= tol)
        .map(|i| rec.q[i])
}

/// `q chi + q_breve (1 - chi)` on the nodes of `grid`.
pub fn glue(right: &Reconstruction, left: &Reconstruction, grid: &SpatialGrid) -> Result<Potential> {
    let tol = 1e-9 * grid.spacing();
    let mut values = Vec::with_capacity(grid.len());
    for x in grid.nodes() {
        let c = chi(x);
        let r = if c > 0.0 { lookup(right, x, tol) } else { None };
        let l = if c < 1.0 { lookup(left, x, tol) } else { None };
        let v = match (r, l) {
            (Some(r), Some(l)) => c * r + (1.0 - c) * l,
            (Some(r), None) if c == 1.0 => r,
            (None, Some(l)) if c == 0.0 => l,
            _ => {
                return Err(IstError::CoverageGap(format!(
                    "no {} sample at x = {x}",
                    if r.is_none() && c > 0.0 { "right" } else { "left" }
                )))
            }
        };
        values.push(v);
    }
    Potential::new(*grid, values)
}

/// Everything produced by [`inverse_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct InverseResult {
    pub potential: Potential,
    pub right: Reconstruction,
    pub left: Reconstruction,
}

/// The inverse map on the spatial grid dual to the data's lambda-grid.
pub fn inverse_map(d: &ScatteringData, cfg: &InverseConfig) -> Result<InverseResult> {
    inverse_map_on(d, &d.grid.dual_spatial_grid(), cfg)
}

/// The inverse map on an arbitrary spatial grid.
pub fn inverse_map_on(d: &ScatteringData, grid: &SpatialGrid, cfg: &InverseConfig) -> Result<InverseResult> {
    let nodes = grid.nodes();
    let xs_right: Vec<f64> = nodes.iter().copied().filter(|&x| chi(x) > 0.0).collect();
    let xs_left: Vec<f64> = nodes.iter().copied().filter(|&x| chi(x) < 1.0).collect();
    let right = reconstruct_right(d, &xs_right, cfg)?;
    let left = reconstruct_left(d, &xs_left, cfg)?;
    let potential = glue(&right, &left, grid)?;
    Ok(InverseResult {
        potential,
        right,
        left,
    })
}
