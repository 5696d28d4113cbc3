//! Five-point sparse systems: BiCGSTAB with Jacobi preconditioning and a banded direct fallback.

use crate::error::{Error, Result};

/// Matrix with nonzeros at `k`, `k -/+ 1` and `k -/+ nx`, cell order `k = i + nx j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FivePoint {
    pub nx: usize,
    pub ny: usize,
    pub center: Vec<f64>,
    pub west: Vec<f64>,
    pub east: Vec<f64>,
    pub south: Vec<f64>,
    pub north: Vec<f64>,
}

impl FivePoint {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        let n = nx * ny;
        Self {
            nx,
            ny,
            center: vec![0.0; n],
            west: vec![0.0; n],
            east: vec![0.0; n],
            south: vec![0.0; n],
            north: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.center.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center.is_empty()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nx = self.nx;
        let n = self.len();
        for k in 0..n {
            let i = k % nx;
            let mut v = self.center[k] * x[k];
            if i > 0 {
                v += self.west[k] * x[k - 1];
            }
            if i + 1 < nx {
                v += self.east[k] * x[k + 1];
            }
            if k >= nx {
                v += self.south[k] * x[k - nx];
            }
            if k + nx < n {
                v += self.north[k] * x[k + nx];
            }
            y[k] = v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearReport {
    pub iterations: usize,
    /// `||b - A x|| / ||b||`.
    pub residual: f64,
    pub direct: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn relative_residual(a: &FivePoint, x: &[f64], b: &[f64]) -> f64 {
    let mut r = vec![0.0; b.len()];
    a.apply(x, &mut r);
    let bn = norm(b);
    let rn = r
        .iter()
        .zip(b)
        .map(|(ax, bb)| (bb - ax).powi(2))
        .sum::<f64>()
        .sqrt();
    if bn > 0.0 {
        rn / bn
    } else {
        rn
    }
}

/// Right-preconditioned BiCGSTAB; `x` holds the initial guess on entry.
pub fn bicgstab(
    a: &FivePoint,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<LinearReport> {
    let n = b.len();
    let bn = norm(b);
    if bn == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(LinearReport {
            iterations: 0,
            residual: 0.0,
            direct: false,
        });
    }
    let inv: Vec<f64> = a
        .center
        .iter()
        .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = vec![0.0; n];
    a.apply(x, &mut r);
    for k in 0..n {
        r[k] = b[k] - r[k];
    }
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut res = norm(&r) / bn;
    if res <= tol {
        return Ok(LinearReport {
            iterations: 0,
            residual: res,
            direct: false,
        });
    }
    for it in 1..=max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
            y[k] = inv[k] * p[k];
        }
        a.apply(&y, &mut v);
        let r0v = dot(&r0, &v);
        if r0v == 0.0 {
            break;
        }
        alpha = rho / r0v;
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        if norm(&s) / bn <= tol {
            for k in 0..n {
                x[k] += alpha * y[k];
            }
            res = relative_residual(a, x, b);
            if res <= tol {
                return Ok(LinearReport {
                    iterations: it,
                    residual: res,
                    direct: false,
                });
            }
            continue;
        }
        for k in 0..n {
            z[k] = inv[k] * s[k];
        }
        a.apply(&z, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            break;
        }
        omega = dot(&t, &s) / tt;
        for k in 0..n {
            x[k] += alpha * y[k] + omega * z[k];
            r[k] = s[k] - omega * t[k];
        }
        res = norm(&r) / bn;
        if res <= tol {
            let true_res = relative_residual(a, x, b);
            if true_res <= tol {
                return Ok(LinearReport {
                    iterations: it,
                    residual: true_res,
                    direct: false,
                });
            }
            res = true_res;
        }
        if omega == 0.0 || !res.is_finite() {
            break;
        }
    }
    Err(Error::LinearSolver {
        iterations: max_iter,
        residual: res,
    })
}

/// Gaussian elimination without pivoting on the band; valid for diagonally dominant systems.
pub fn banded_solve(a: &FivePoint, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let bw = if a.ny > 1 { a.nx } else { 1 };
    let width = 2 * bw + 1;
    // row k, column c stored at band[k * width + (c + bw - k)]
    let mut band = vec![0.0; n * width];
    let at = |k: usize, c: usize| k * width + c + bw - k;
    for k in 0..n {
        let i = k % a.nx;
        band[at(k, k)] = a.center[k];
        if i > 0 {
            band[at(k, k - 1)] = a.west[k];
        }
        if i + 1 < a.nx {
            band[at(k, k + 1)] = a.east[k];
        }
        if a.ny > 1 {
            if k >= a.nx {
                band[at(k, k - a.nx)] = a.south[k];
            }
            if k + a.nx < n {
                band[at(k, k + a.nx)] = a.north[k];
            }
        }
    }
    let mut x = b.to_vec();
    for k in 0..n {
        let piv = band[at(k, k)];
        if piv == 0.0 || !piv.is_finite() {
            return Err(Error::LinearSolver {
                iterations: k,
                residual: f64::INFINITY,
            });
        }
        let last = (k + bw).min(n - 1);
        for r in k + 1..=last {
            let l = band[at(r, k)] / piv;
            if l == 0.0 {
                continue;
            }
            band[at(r, k)] = 0.0;
            for c in k + 1..=last {
                band[at(r, c)] -= l * band[at(k, c)];
            }
            x[r] -= l * x[k];
        }
    }
    for k in (0..n).rev() {
        let last = (k + bw).min(n - 1);
        let mut v = x[k];
        for c in k + 1..=last {
            v -= band[at(k, c)] * x[c];
        }
        x[k] = v / band[at(k, k)];
    }
    Ok(x)
}

/// Direct solves are attempted only up to this many cells.
pub const DIRECT_LIMIT: usize = 10_000;

/// Divides every row by its diagonal so residuals of stiff and transparent cells weigh alike.
fn row_scaled(a: &FivePoint, b: &[f64]) -> (FivePoint, Vec<f64>) {
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for k in 0..a.len() {
        let d = a.center[k];
        if d == 0.0 || !d.is_finite() {
            continue;
        }
        let inv = 1.0 / d;
        m.center[k] = 1.0;
        m.west[k] *= inv;
        m.east[k] *= inv;
        m.south[k] *= inv;
        m.north[k] *= inv;
        rhs[k] *= inv;
    }
    (m, rhs)
}

/// Krylov solve on the row-scaled system with a banded direct fallback for small meshes.
pub fn solve(
    a: &FivePoint,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<LinearReport> {
    let (a, b) = row_scaled(a, b);
    match bicgstab(&a, &b, x, tol, max_iter) {
        Ok(r) => Ok(r),
        Err(e) if a.len() <= DIRECT_LIMIT => {
            let sol = banded_solve(&a, &b).map_err(|_| e)?;
            x.copy_from_slice(&sol);
            Ok(LinearReport {
                iterations: max_iter,
                residual: relative_residual(&a, x, &b),
                direct: true,
            })
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_like(nx: usize, ny: usize) -> FivePoint {
        let mut a = FivePoint::zeros(nx, ny);
        for k in 0..nx * ny {
            let i = k % nx;
            a.center[k] = 4.5 + 0.01 * k as f64;
            if i > 0 {
                a.west[k] = -1.0;
            }
            if i + 1 < nx {
                a.east[k] = -1.2;
            }
            if k >= nx {
                a.south[k] = -0.9;
            }
            if k + nx < nx * ny {
                a.north[k] = -1.1;
            }
        }
        a
    }

    #[test]
    fn krylov_and_direct_agree() {
        let a = laplace_like(7, 5);
        let truth: Vec<f64> = (0..35).map(|k| (k as f64 * 0.37).sin() + 2.0).collect();
        let mut b = vec![0.0; 35];
        a.apply(&truth, &mut b);
        let mut x = vec![0.0; 35];
        let r = bicgstab(&a, &b, &mut x, 1e-12, 500).unwrap();
        assert!(r.residual <= 1e-12);
        let d = banded_solve(&a, &b).unwrap();
        for k in 0..35 {
            assert!((x[k] - truth[k]).abs() < 1e-9);
            assert!((d[k] - truth[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_direct() {
        let a = laplace_like(50, 1);
        let truth: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let mut b = vec![0.0; 50];
        a.apply(&truth, &mut b);
        let d = banded_solve(&a, &b).unwrap();
        assert!(d.iter().zip(&truth).all(|(a, b)| (a - b).abs() < 1e-10));
    }
}
