//! Small numerical utilities shared by the solvers and the FEM oracle:
//! skew/cross-product matrices, Gauss-Legendre rules, least-squares line
//! fits, and a symmetric banded Cholesky used by the mesh eigensolver.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Skew-symmetric matrix of `v`, so that `skew(v) * x == v.cross(&x)`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -v.z, v.y, //
        v.z, 0.0, -v.x, //
        -v.y, v.x, 0.0,
    )
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Computed by the Golub-Welsch eigenvalue method on the Jacobi matrix and
/// cached per order. Node accuracy is at machine-precision level, which the
/// exact piecewise-polynomial quadratures in the solvers rely on.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be at least 1");
    type RuleCache = Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>;
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&order) {
        return rule.clone();
    }

    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let kf = k as f64;
        let beta = kf / (4.0 * kf * kf - 1.0).sqrt();
        jacobi[(k, k - 1)] = beta;
        jacobi[(k - 1, k)] = beta;
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let w = 2.0 * eig.eigenvectors[(0, i)].powi(2);
            (node, w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    cache
        .lock()
        .unwrap()
        .insert(order, (nodes.clone(), weights.clone()));
    (nodes, weights)
}

/// Integrate `f` over `[a, b]` with a fixed-order Gauss-Legendre rule.
pub fn integrate<F: FnMut(f64) -> f64>(a: f64, b: f64, order: usize, mut f: F) -> f64 {
    if a == b {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Result of a least-squares straight-line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Root-mean-square of the fit residuals (same units as `y`).
    pub residual_rms: f64,
}

/// Least-squares line through `(x_i, y_i)`; needs two distinct abscissae.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Extrapolation(
            "line fit needs at least two points".into(),
        ));
    }
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if sxx == 0.0 {
        return Err(Error::Extrapolation(
            "line fit needs two distinct abscissae".into(),
        ));
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    Ok(LineFit {
        intercept,
        slope,
        residual_rms: (ss / n).sqrt(),
    })
}

/// Symmetric positive-definite matrix in lower banded storage.
///
/// Entry `(i, j)` with `0 <= i - j <= half_bandwidth` lives at
/// `data[j * (half_bandwidth + 1) + (i - j)]`. Assembled FEM operators have
/// half-bandwidth 11 (two 6-DOF nodes per element), so factorization and
/// solves are O(n) rather than O(n^3).
#[derive(Debug, Clone)]
pub struct SymBanded {
    n: usize,
    hbw: usize,
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        Self {
            n,
            hbw: half_bandwidth,
            data: vec![0.0; n * (half_bandwidth + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= j && i - j <= self.hbw);
        j * (self.hbw + 1) + (i - j)
    }

    /// Read entry `(i, j)` (either triangle).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r - c > self.hbw {
            0.0
        } else {
            self.data[self.idx(r, c)]
        }
    }

    /// Accumulate into entry `(i, j)`; upper-triangle calls are mirrored.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        assert!(r - c <= self.hbw, "entry outside band");
        let k = self.idx(r, c);
        self.data[k] += v;
    }

    /// Symmetric matrix-vector product.
    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        for j in 0..self.n {
            let diag = self.data[self.idx(j, j)];
            y[j] += diag * x[j];
            let top = (j + self.hbw).min(self.n - 1);
            for i in (j + 1)..=top {
                let v = self.data[self.idx(i, j)];
                y[i] += v * x[j];
                y[j] += v * x[i];
            }
        }
        y
    }

    /// In-place banded Cholesky factorization `A = L L^T`.
    pub fn cholesky(mut self) -> Result<BandedCholesky> {
        let hbw = self.hbw;
        for j in 0..self.n {
            let start = j.saturating_sub(hbw);
            for k in start..j {
                let ljk = self.data[self.idx(j, k)];
                if ljk == 0.0 {
                    continue;
                }
                let top = (k + hbw).min(self.n - 1);
                for i in j..=top {
                    let lik = self.data[self.idx(i, k)];
                    let t = self.idx(i, j);
                    self.data[t] -= lik * ljk;
                }
            }
            let d = self.data[self.idx(j, j)];
            if d <= 0.0 {
                return Err(Error::Numerical(format!(
                    "banded Cholesky failed at pivot {j}: {d:e}"
                )));
            }
            let inv = 1.0 / d.sqrt();
            let top = (j + hbw).min(self.n - 1);
            for i in j..=top {
                let t = self.idx(i, j);
                self.data[t] *= inv;
            }
        }
        Ok(BandedCholesky { l: self })
    }

    /// Principal submatrix over the contiguous index range `start..end`.
    pub fn sub_range(&self, start: usize, end: usize) -> SymBanded {
        assert!(start <= end && end <= self.n);
        let n = end - start;
        let hbw = self.hbw.min(n.saturating_sub(1));
        let mut out = SymBanded::zeros(n, hbw);
        for j in 0..n {
            let top = (j + hbw).min(n.saturating_sub(1));
            for i in j..=top {
                let v = self.get(start + i, start + j);
                if v != 0.0 {
                    out.add(i, j, v);
                }
            }
        }
        out
    }

    /// Dense copy, for small-system cross-checks in tests.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            for i in j..=(j + self.hbw).min(self.n - 1) {
                let v = self.data[self.idx(i, j)];
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }
}

/// Banded Cholesky factor with forward/backward substitution.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    l: SymBanded,
}

impl BandedCholesky {
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.l.n;
        let hbw = self.l.hbw;
        let mut x = b.clone();
        for j in 0..n {
            x[j] /= self.l.data[self.l.idx(j, j)];
            let top = (j + hbw).min(n - 1);
            let xj = x[j];
            for i in (j + 1)..=top {
                x[i] -= self.l.data[self.l.idx(i, j)] * xj;
            }
        }
        for j in (0..n).rev() {
            let top = (j + hbw).min(n - 1);
            let mut s = x[j];
            for i in (j + 1)..=top {
                s -= self.l.data[self.l.idx(i, j)] * x[i];
            }
            x[j] = s / self.l.data[self.l.idx(j, j)];
        }
        x
    }
}

/// Smallest eigenvalue of the pencil `(K, M)` by inverse iteration with
/// Rayleigh-quotient convergence. `K` must be SPD (boundary conditions
/// already applied); `M` symmetric positive definite.
pub fn lowest_generalized_eigenvalue(
    k: &SymBanded,
    m: &SymBanded,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, DVector<f64>)> {
    let n = k.n();
    if n == 0 {
        return Err(Error::Numerical("empty eigenproblem".into()));
    }
    let chol = k.clone().cholesky()?;
    // Deterministic start vector with no special symmetry.
    let mut x = DVector::from_fn(n, |i, _| 1.0 + ((i as f64) * 0.7368421).sin());
    let mut lambda = f64::INFINITY;
    for _ in 0..max_iter {
        let mx = m.mul_vec(&x);
        let mut y = chol.solve(&mx);
        let norm = y.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Numerical("inverse iteration broke down".into()));
        }
        y /= norm;
        let ky = k.mul_vec(&y);
        let my = m.mul_vec(&y);
        let num = y.dot(&ky);
        let den = y.dot(&my);
        if den <= 0.0 {
            return Err(Error::Numerical("mass matrix not positive definite".into()));
        }
        let rho = num / den;
        let done = (lambda - rho).abs() <= tol * rho.abs();
        lambda = rho;
        x = y;
        if done {
            return Ok((lambda, x));
        }
    }
    Ok((lambda, x))
}
