//! Restarted GMRES for matrix-free operators and a dense LU fallback.

use nalgebra::{DMatrix, DVector};

use crate::error::{IstError, Result};
use crate::grid::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub restart: usize,
    pub max_iterations: usize,
    /// Absolute tolerance on the Euclidean residual norm.
    pub tolerance: f64,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            restart: 50,
            max_iterations: 400,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<C64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Residual estimate after each inner iteration.
    pub history: Vec<f64>,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Solve `A x = b` with restarted GMRES, where `apply(x, y)` writes `y = A x`.
///
/// The residual is non-increasing across iterations and restarts.
pub fn gmres<F>(mut apply: F, b: &[C64], x0: Option<&[C64]>, cfg: &GmresConfig) -> GmresOutcome
where
    F: FnMut(&[C64], &mut [C64]),
{
    let n = b.len();
    let zero = C64::new(0.0, 0.0);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![zero; n]);
    let mut work = vec![zero; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    let residual_of = |x: &[C64], apply: &mut F, work: &mut Vec<C64>| -> Vec<C64> {
        apply(x, work);
        b.iter().zip(work.iter()).map(|(bi, ai)| bi - ai).collect()
    };

    let mut r = residual_of(&x, &mut apply, &mut work);
    let mut beta = norm(&r);
    if beta <= cfg.tolerance || n == 0 {
        return GmresOutcome {
            solution: x,
            iterations,
            residual: beta,
            converged: true,
            history,
        };
    }

    let m = cfg.restart.max(1).min(n);
    while iterations < cfg.max_iterations {
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // Hessenberg columns, rotated in place to upper triangular.
        let mut hess: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<C64> = Vec::with_capacity(m);
        let mut g = vec![zero; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;

        for k in 0..m {
            if iterations >= cfg.max_iterations {
                break;
            }
            iterations += 1;
            let mut w = vec![zero; n];
            apply(&basis[k], &mut w);
            let mut h = vec![zero; k + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                h[i] = hij;
                for (wj, vj) in w.iter_mut().zip(v) {
                    *wj -= hij * vj;
                }
            }
            let wn = norm(&w);
            h[k + 1] = C64::new(wn, 0.0);

            for i in 0..k {
                let (a, bb) = (h[i], h[i + 1]);
                h[i] = cs[i] * a + sn[i] * bb;
                h[i + 1] = -sn[i].conj() * a + cs[i] * bb;
            }
            let (a, bb) = (h[k], h[k + 1]);
            let d = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if d == 0.0 {
                (1.0, zero)
            } else if a.norm() == 0.0 {
                (0.0, bb.conj() / d)
            } else {
                (a.norm() / d, (a / a.norm()) * bb.conj() / d)
            };
            h[k] = c * a + s * bb;
            h[k + 1] = zero;
            cs.push(c);
            sn.push(s);
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;

            hess.push(h);
            k_used = k + 1;
            let res = g[k + 1].norm();
            history.push(res);

            if res <= cfg.tolerance || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }

        // back substitution
        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= hess[j][i] * y[j];
            }
            y[i] = acc / hess[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * vi;
            }
        }

        r = residual_of(&x, &mut apply, &mut work);
        beta = norm(&r);
        if beta <= cfg.tolerance {
            return GmresOutcome {
                solution: x,
                iterations,
                residual: beta,
                converged: true,
                history,
            };
        }
    }

    GmresOutcome {
        solution: x,
        iterations,
        residual: beta,
        converged: false,
        history,
    }
}

/// Dense LU solve of `A x = b` with `A` given row-major.
pub fn dense_solve(a: DMatrix<C64>, b: &[C64]) -> Result<Vec<C64>> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(IstError::LengthMismatch {
            expected: n,
            got: a.nrows(),
        });
    }
    let rhs = DVector::from_column_slice(b);
    let lu = a.lu();
    let x = lu.solve(&rhs).ok_or(IstError::SingularSystem)?;
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(IstError::SingularSystem);
    }
    Ok(x.iter().copied().collect())
}

/// Materialize a linear operator as a dense matrix by applying it to unit vectors.
pub fn assemble<F>(n: usize, mut apply: F) -> DMatrix<C64>
where
    F: FnMut(&[C64], &mut [C64]),
{
    let zero = C64::new(0.0, 0.0);
    let mut m = DMatrix::from_element(n, n, zero);
    let mut e = vec![zero; n];
    let mut col = vec![zero; n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        apply(&e, &mut col);
        for i in 0..n {
            m[(i, j)] = col[i];
        }
        e[j] = zero;
    }
    m
}
