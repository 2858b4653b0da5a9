//! Fourier transform with the `e^{-2 i lambda x}` kernel, Cauchy projectors
//! and the Hilbert transform on the lambda-line.
//!
//! Forward: `f^(lambda) = \int e^{-2i lambda x} f(x) dx`.
//! Inverse: `g(x) = (1/pi) \int e^{2i lambda x} g(lambda) dlambda`.
//!
//! On a grid `s_k = (k - n/2) h` the dual nodes are `(j - n/2) pi / (n h)`,
//! and both sums reduce to a plain FFT after a checkerboard sign flip.
//!
//! The projectors work on a dual grid shifted by half a cell, so no node sits
//! at zero frequency. The masks are then exact complementary orthogonal
//! projections and `sign` is odd on the grid.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::{Fft, FftPlanner};

use crate::error::{IstError, Result};
use crate::grid::{make_dual_spectral_grid, Potential, SpatialGrid, SpectralGrid, C64};

type Plan = Arc<dyn Fft<f64>>;

#[derive(Clone)]
struct PlanPair {
    forward: Plan,
    inverse: Plan,
}

type PlanCache = Mutex<(FftPlanner<f64>, HashMap<usize, PlanPair>)>;

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let (planner, map) = &mut *guard;
    if let Some(p) = map.get(&n) {
        return p.clone();
    }
    let pair = PlanPair {
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    };
    map.insert(n, pair.clone());
    pair
}

fn checkerboard(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Unnormalized in-place FFT (`inverse` selects the `e^{+}` kernel).
pub(crate) fn fft_in_place(buf: &mut [C64], inverse: bool) {
    let p = plans(buf.len());
    if inverse {
        p.inverse.process(buf);
    } else {
        p.forward.process(buf);
    }
}

/// Band-limited interpolation of periodic samples onto a grid `factor` times finer.
///
/// Output index `factor * j` reproduces input sample `j`.
pub fn upsample(values: &[C64], factor: usize) -> Vec<C64> {
    let n = values.len();
    if factor <= 1 || n == 0 {
        return values.to_vec();
    }
    let big = n * factor;
    let mut buf = values.to_vec();
    plans(n).forward.process(&mut buf);
    let zero = C64::new(0.0, 0.0);
    let mut padded = vec![zero; big];
    let half = n / 2;
    padded[..half].copy_from_slice(&buf[..half]);
    padded[big - half + 1..].copy_from_slice(&buf[half + 1..]);
    // split the Nyquist bin symmetrically
    padded[half] = buf[half] * 0.5;
    padded[big - half] = buf[half] * 0.5;
    plans(big).inverse.process(&mut padded);
    let scale = 1.0 / n as f64;
    padded.iter_mut().for_each(|v| *v *= scale);
    padded
}

/// `h sum_k e^{-2 i xi_j s_k} f_k` on the dual grid of `s_k = (k - n/2) h`.
pub fn dual_forward(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    let mut buf: Vec<C64> = values
        .iter()
        .enumerate()
        .map(|(k, v)| v * checkerboard(k))
        .collect();
    plans(n).forward.process(&mut buf);
    let global = h * checkerboard(n / 2);
    for (j, v) in buf.iter_mut().enumerate() {
        *v *= global * checkerboard(j);
    }
    buf
}

/// Inverse of [`dual_forward`]; `h` is the spacing of the original grid.
pub fn dual_inverse(hat: &[C64], h: f64) -> Vec<C64> {
    let n = hat.len();
    let mut buf: Vec<C64> = hat
        .iter()
        .enumerate()
        .map(|(j, v)| v * checkerboard(j))
        .collect();
    plans(n).inverse.process(&mut buf);
    let global = checkerboard(n / 2) / (n as f64 * h);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= global * checkerboard(k);
    }
    buf
}

/// Spectral derivative of order `order` of samples with spacing `h`.
///
/// In this normalization `d/dx` acts as multiplication by `2 i lambda`. The
/// unpaired highest mode is dropped for odd orders.
pub fn spectral_derivative(values: &[C64], h: f64, order: u32) -> Vec<C64> {
    let n = values.len();
    let dl = PI / (n as f64 * h);
    let mut hat = dual_forward(values, h);
    for (j, v) in hat.iter_mut().enumerate() {
        if j == 0 && order % 2 == 1 {
            *v = C64::new(0.0, 0.0);
            continue;
        }
        let lam = (j as f64 - (n / 2) as f64) * dl;
        *v *= C64::new(0.0, 2.0 * lam).powu(order);
    }
    dual_inverse(&hat, h)
}

/// Samples of a function of lambda.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    pub grid: SpectralGrid,
    pub values: Vec<C64>,
}

impl SpectralFunction {
    pub fn new(grid: SpectralGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(IstError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: SpectralGrid, f: impl Fn(f64) -> C64) -> Self {
        Self {
            grid,
            values: grid.nodes().into_iter().map(f).collect(),
        }
    }

    fn map_values(&self, values: Vec<C64>) -> Self {
        Self {
            grid: self.grid,
            values,
        }
    }
}

pub fn fourier_forward(f: &Potential) -> SpectralFunction {
    SpectralFunction {
        grid: make_dual_spectral_grid(&f.grid),
        values: dual_forward(&f.values, f.grid.spacing()),
    }
}

/// Inverse transform onto the spatial grid dual to `g.grid`.
pub fn fourier_inverse(g: &SpectralFunction) -> Potential {
    let grid = g.grid.dual_spatial_grid();
    Potential {
        grid,
        values: dual_inverse(&g.values, grid.spacing()),
    }
}

/// Inverse transform onto a caller-supplied grid, which must be the dual one.
pub fn fourier_inverse_onto(g: &SpectralFunction, grid: &SpatialGrid) -> Result<Potential> {
    if !make_dual_spectral_grid(grid).approx_eq(&g.grid) {
        return Err(IstError::GridMismatch(
            "spectral function does not live on the dual of the target grid".into(),
        ));
    }
    Ok(Potential {
        grid: *grid,
        values: dual_inverse(&g.values, grid.spacing()),
    })
}

/// Which boundary value of the Cauchy integral to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// From the upper half-plane: keep positive frequencies.
    Plus,
    /// From the lower half-plane: minus the negative frequencies.
    Minus,
}

/// Reusable Cauchy projector for lambda-grids of one size.
///
/// Buffers are transformed in place; callers supply scratch space so that the
/// projector can sit inside a Krylov loop without allocating.
#[derive(Clone)]
pub struct CauchyProjector {
    n: usize,
    plans: PlanPair,
    twist: Vec<C64>,
    untwist: Vec<C64>,
    scratch_len: usize,
}

impl std::fmt::Debug for CauchyProjector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CauchyProjector").field("n", &self.n).finish()
    }
}

impl CauchyProjector {
    pub fn new(n: usize) -> Self {
        let plans = plans(n);
        // checkerboard times the half-cell phase e^{-i pi (k - n/2) / n}
        let twist: Vec<C64> = (0..n)
            .map(|k| {
                let phase = -PI * (k as f64 - (n / 2) as f64) / n as f64;
                C64::from_polar(checkerboard(k), phase)
            })
            .collect();
        let inv_n = 1.0 / n as f64;
        let untwist = twist.iter().map(|t| t.conj() * inv_n).collect();
        let scratch_len = plans
            .forward
            .get_inplace_scratch_len()
            .max(plans.inverse.get_inplace_scratch_len());
        Self {
            n,
            plans,
            twist,
            untwist,
            scratch_len,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scratch(&self) -> Vec<C64> {
        vec![C64::new(0.0, 0.0); self.scratch_len]
    }

    /// Replace `buf` by `C^+ buf` or `C^- buf`.
    pub fn project_in_place(&self, side: Side, buf: &mut [C64], scratch: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        for (v, t) in buf.iter_mut().zip(&self.twist) {
            *v *= t;
        }
        self.plans.forward.process_with_scratch(buf, scratch);
        let half = self.n / 2;
        match side {
            Side::Plus => buf[..half].fill(C64::new(0.0, 0.0)),
            Side::Minus => {
                buf[half..].fill(C64::new(0.0, 0.0));
                for v in &mut buf[..half] {
                    *v = -*v;
                }
            }
        }
        self.plans.inverse.process_with_scratch(buf, scratch);
        for (v, t) in buf.iter_mut().zip(&self.untwist) {
            *v *= t;
        }
    }

    /// Replace `buf` by `H buf = -(C^+ + C^-) buf`.
    pub fn hilbert_in_place(&self, buf: &mut [C64], scratch: &mut [C64]) {
        for (v, t) in buf.iter_mut().zip(&self.twist) {
            *v *= t;
        }
        self.plans.forward.process_with_scratch(buf, scratch);
        let half = self.n / 2;
        for v in &mut buf[half..] {
            *v = -*v;
        }
        self.plans.inverse.process_with_scratch(buf, scratch);
        for (v, t) in buf.iter_mut().zip(&self.untwist) {
            *v *= t;
        }
    }

    pub fn project(&self, side: Side, values: &[C64]) -> Vec<C64> {
        let mut buf = values.to_vec();
        let mut scratch = self.scratch();
        self.project_in_place(side, &mut buf, &mut scratch);
        buf
    }

    pub fn hilbert(&self, values: &[C64]) -> Vec<C64> {
        let mut buf = values.to_vec();
        let mut scratch = self.scratch();
        self.hilbert_in_place(&mut buf, &mut scratch);
        buf
    }
}

pub fn cauchy_plus(f: &SpectralFunction) -> SpectralFunction {
    f.map_values(CauchyProjector::new(f.values.len()).project(Side::Plus, &f.values))
}

pub fn cauchy_minus(f: &SpectralFunction) -> SpectralFunction {
    f.map_values(CauchyProjector::new(f.values.len()).project(Side::Minus, &f.values))
}

pub fn hilbert(f: &SpectralFunction) -> SpectralFunction {
    f.map_values(CauchyProjector::new(f.values.len()).hilbert(&f.values))
}
