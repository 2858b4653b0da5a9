//! Uniform truncated grids, sampled potentials and scattering data.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{IstError, Result};
use crate::fourier;

pub type C64 = Complex64;

/// Uniform grid `x_j = -L + j dx`, `j = 0..N`, `dx = 2L/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    half_width: f64,
    count: usize,
}

impl SpatialGrid {
    pub fn new(half_width: f64, count: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(IstError::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if count < 4 || !count.is_power_of_two() {
            return Err(IstError::InvalidGrid(format!(
                "point count must be a power of two >= 4, got {count}"
            )));
        }
        Ok(Self { half_width, count })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.count as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.node(j)).collect()
    }
}

/// Uniform spectral grid `lambda_k = (k - M/2) dlambda`, symmetric about zero
/// up to the single unpaired endpoint `-M/2 dlambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    count: usize,
    spacing: f64,
}

impl SpectralGrid {
    pub fn new(count: usize, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(IstError::InvalidGrid(format!(
                "spectral spacing must be positive, got {spacing}"
            )));
        }
        if count < 4 || !count.is_power_of_two() {
            return Err(IstError::InvalidGrid(format!(
                "point count must be a power of two >= 4, got {count}"
            )));
        }
        Ok(Self { count, spacing })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node(&self, k: usize) -> f64 {
        (k as f64 - (self.count / 2) as f64) * self.spacing
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.node(k)).collect()
    }

    /// Index of `lambda = 0`.
    pub fn zero_index(&self) -> usize {
        self.count / 2
    }

    /// The spatial grid whose transform lands on this grid.
    pub fn dual_spatial_grid(&self) -> SpatialGrid {
        let dx = PI / (self.count as f64 * self.spacing);
        SpatialGrid {
            half_width: 0.5 * dx * self.count as f64,
            count: self.count,
        }
    }

    pub fn approx_eq(&self, other: &SpectralGrid) -> bool {
        self.count == other.count && (self.spacing - other.spacing).abs() <= 1e-14 * self.spacing
    }
}

/// Frequencies of `f^(lambda) = \int e^{-2 i lambda x} f(x) dx` sampled on `g`:
/// same count, `dlambda = pi / (N dx)`.
pub fn make_dual_spectral_grid(g: &SpatialGrid) -> SpectralGrid {
    SpectralGrid {
        count: g.count,
        spacing: PI / (g.count as f64 * g.spacing()),
    }
}

/// Samples of a complex field on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub grid: SpatialGrid,
    pub values: Vec<C64>,
}

impl Potential {
    pub fn new(grid: SpatialGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(IstError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    /// `A e^{-x^2}`.
    pub fn gaussian(grid: SpatialGrid, amplitude: f64) -> Self {
        Self::from_fn(grid, |x| C64::new(amplitude * (-x * x).exp(), 0.0))
    }

    pub fn edge_decay(&self) -> f64 {
        let n = self.values.len();
        self.values[0].norm().max(self.values[n - 1].norm())
    }

    pub fn is_admissible(&self, tol: f64) -> bool {
        self.edge_decay() < tol
    }

    pub fn check_admissible(&self, tol: f64) -> Result<()> {
        let edge = self.edge_decay();
        if edge < tol {
            Ok(())
        } else {
            Err(IstError::Inadmissible { edge, tol })
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<C64> = self.values.iter().map(|z| C64::new(z.norm_sqr(), 0.0)).collect();
        trapezoid(&sq, self.grid.spacing()).re.sqrt()
    }

    /// Relative L2 distance `||self - other|| / ||other||`.
    pub fn relative_l2_distance(&self, other: &Potential) -> f64 {
        let diff: Vec<C64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| C64::new((a - b).norm_sqr(), 0.0))
            .collect();
        let num = trapezoid(&diff, self.grid.spacing()).re.sqrt();
        num / other.l2_norm()
    }
}

/// Reflection-coefficient data on a [`SpectralGrid`], optionally with the
/// transition coefficients it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    pub grid: SpectralGrid,
    pub rho: Vec<C64>,
    pub alpha: Option<Vec<C64>>,
    pub beta: Option<Vec<C64>>,
}

impl ScatteringData {
    pub fn new(grid: SpectralGrid, rho: Vec<C64>) -> Result<Self> {
        if rho.len() != grid.len() {
            return Err(IstError::LengthMismatch {
                expected: grid.len(),
                got: rho.len(),
            });
        }
        Ok(Self {
            grid,
            rho,
            alpha: None,
            beta: None,
        })
    }

    pub fn zeros(grid: SpectralGrid) -> Self {
        Self {
            grid,
            rho: vec![C64::new(0.0, 0.0); grid.len()],
            alpha: None,
            beta: None,
        }
    }

    pub fn with_coefficients(mut self, alpha: Vec<C64>, beta: Vec<C64>) -> Result<Self> {
        for v in [&alpha, &beta] {
            if v.len() != self.grid.len() {
                return Err(IstError::LengthMismatch {
                    expected: self.grid.len(),
                    got: v.len(),
                });
            }
        }
        self.alpha = Some(alpha);
        self.beta = Some(beta);
        Ok(self)
    }

    /// `g(lambda) = 1 - lambda |rho(lambda)|^2` on the grid.
    pub fn margin_profile(&self) -> Vec<f64> {
        self.rho
            .iter()
            .enumerate()
            .map(|(k, r)| 1.0 - self.grid.node(k) * r.norm_sqr())
            .collect()
    }

    /// `min_k (1 - lambda_k |rho_k|^2)`.
    pub fn spectral_margin(&self) -> f64 {
        self.margin_profile().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `max_k | |alpha|^2 - lambda |beta|^2 - 1 |`, if the coefficients are present.
    pub fn determinant_defect(&self) -> Option<f64> {
        let (alpha, beta) = (self.alpha.as_ref()?, self.beta.as_ref()?);
        Some(
            alpha
                .iter()
                .zip(beta)
                .enumerate()
                .map(|(k, (a, b))| (a.norm_sqr() - self.grid.node(k) * b.norm_sqr() - 1.0).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Discrete weighted norms of a potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorms {
    /// `||q||_2`
    pub l2: f64,
    /// `||<x>^2 q||_2`
    pub weighted: f64,
    /// `||q''||_2`
    pub second_derivative: f64,
    /// `( ||<D>^2 q||_2^2 + ||<x>^2 q||_2^2 )^{1/2}` with `D = -i d/dx`.
    pub h22: f64,
}

/// Composite trapezoid rule on uniform nodes with spacing `h`.
pub fn trapezoid(values: &[C64], h: f64) -> C64 {
    match values.len() {
        0 => C64::new(0.0, 0.0),
        1 => C64::new(0.0, 0.0),
        n => {
            let inner: C64 = values[1..n - 1].iter().sum();
            (inner + 0.5 * (values[0] + values[n - 1])) * h
        }
    }
}

/// Trapezoid approximation of `\int f dx` for samples on `grid`.
pub fn quadrature(values: &[C64], grid: &SpatialGrid) -> Result<C64> {
    if values.len() != grid.len() {
        return Err(IstError::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    Ok(trapezoid(values, grid.spacing()))
}

/// Trapezoid approximation of `\int f dlambda` for samples on `grid`.
pub fn spectral_quadrature(values: &[C64], grid: &SpectralGrid) -> Result<C64> {
    if values.len() != grid.len() {
        return Err(IstError::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    Ok(trapezoid(values, grid.spacing()))
}

/// Left-anchored cumulative trapezoid integral: `out[j] = \int_{x_0}^{x_j} f`.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (j, &v) in values.iter().enumerate() {
        if j > 0 {
            acc += 0.5 * h * (values[j - 1] + v);
        }
        out.push(acc);
    }
    out
}

pub fn h22_norm(p: &Potential) -> WeightedNorms {
    let h = p.grid.spacing();
    let nodes = p.grid.nodes();
    let norm = |v: &[C64]| {
        let sq: Vec<C64> = v.iter().map(|z| C64::new(z.norm_sqr(), 0.0)).collect();
        trapezoid(&sq, h).re.sqrt()
    };
    let qxx = fourier::spectral_derivative(&p.values, h, 2);
    let weighted_vals: Vec<C64> = p
        .values
        .iter()
        .zip(&nodes)
        .map(|(q, x)| q * (1.0 + x * x))
        .collect();
    let d2_vals: Vec<C64> = p.values.iter().zip(&qxx).map(|(q, d)| q - d).collect();
    let l2 = norm(&p.values);
    let weighted = norm(&weighted_vals);
    let second_derivative = norm(&qxx);
    let bracket_d = norm(&d2_vals);
    WeightedNorms {
        l2,
        weighted,
        second_derivative,
        h22: (bracket_d * bracket_d + weighted * weighted).sqrt(),
    }
}
