//! Dense symmetric eigenvalues: cyclic Jacobi rotations, plus power iteration
//! for the spectral norm of large matrices.

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};

pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 50;
/// Matrices larger than this use power iteration in [`spectral_norm`].
pub const JACOBI_MAX_DIM: usize = 512;

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITERS: usize = 20_000;

/// Square symmetric matrix stored densely in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds from rows; fails unless the rows form a symmetric square matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(precondition("matrix rows must all have length n"));
        }
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if rows[i][j] != rows[j][i] {
                    return Err(precondition(format!("matrix is not symmetric at ({i}, {j})")));
                }
                m.data[i * n + j] = rows[i][j];
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .take(self.n)
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.get(i, j).powi(2);
                }
            }
        }
        s.sqrt()
    }

    /// Index sets of the connected components of the graph with an edge
    /// wherever an off-diagonal entry is nonzero.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut block = vec![start];
            let mut next = 0;
            while next < block.len() {
                let i = block[next];
                next += 1;
                for j in 0..n {
                    if !seen[j] && self.get(i, j) != 0.0 {
                        seen[j] = true;
                        block.push(j);
                    }
                }
            }
            block.sort_unstable();
            out.push(block);
        }
        out
    }

    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.data[a * idx.len() + b] = self.get(i, j);
            }
        }
        m
    }

    fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Eigenvalues (ascending) by cyclic Jacobi rotations. Converged once the
/// off-diagonal Frobenius norm drops below `JACOBI_TOL` times the full norm.
pub fn jacobi_eigenvalues(matrix: &SymmetricMatrix) -> Result<Vec<f64>> {
    let n = matrix.dim();
    let mut a = matrix.clone();
    let scale = a.frobenius_norm();
    if scale == 0.0 || n <= 1 {
        return Ok((0..n).map(|i| a.get(i, i)).collect());
    }

    // Rotations on entries this small cannot move the off-diagonal norm
    // across the convergence threshold.
    let skip_below = 1e-3 * JACOBI_TOL * scale / n as f64;
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if a.off_diagonal_norm() <= JACOBI_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, p, q, skip_below);
            }
        }
    }
    if !converged && a.off_diagonal_norm() > JACOBI_TOL * scale {
        return Err(Error::Numerical(format!(
            "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps (n = {n})"
        )));
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Annihilates `a[p][q]` with one Jacobi rotation applied on both sides.
/// Entries far below the convergence threshold are left alone.
fn rotate(a: &mut SymmetricMatrix, p: usize, q: usize, skip_below: f64) {
    let n = a.n;
    let apq = a.data[p * n + q];
    if apq.abs() <= skip_below {
        return;
    }
    let app = a.data[p * n + p];
    let aqq = a.data[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let d = &mut a.data;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = d[k * n + p];
        let akq = d[k * n + q];
        let (np, nq) = (c * akp - s * akq, s * akp + c * akq);
        d[k * n + p] = np;
        d[p * n + k] = np;
        d[k * n + q] = nq;
        d[q * n + k] = nq;
    }
    d[p * n + p] = app - t * apq;
    d[q * n + q] = aqq + t * apq;
    d[p * n + q] = 0.0;
    d[q * n + p] = 0.0;
}

/// Spectral norm `max |eigenvalue|` by power iteration on `A^2`.
pub fn power_iteration_norm(matrix: &SymmetricMatrix) -> Result<f64> {
    let n = matrix.dim();
    if n == 0 {
        return Ok(0.0);
    }
    // A fixed, non-symmetric start vector avoids accidental orthogonality to
    // the dominant eigenvector for structured matrices.
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i * 7919) % 104_729) as f64 / 104_729.0)
        .collect();
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        matrix.mul_vec(&x, &mut y);
        matrix.mul_vec(&y, &mut z);
        let norm = dot(&z, &z).sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        // Rayleigh quotient of A^2 gives |lambda_max|^2.
        let next = dot(&x, &z).max(0.0).sqrt();
        z.iter_mut().for_each(|v| *v /= norm);
        std::mem::swap(&mut x, &mut z);
        if (next - estimate).abs() <= POWER_TOL * next {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Numerical(format!(
        "power iteration did not converge in {POWER_MAX_ITERS} iterations (n = {n})"
    )))
}

/// `max |eigenvalue|`, taken over the irreducible blocks of the sparsity
/// pattern: Jacobi up to `JACOBI_MAX_DIM`, power iteration beyond.
pub fn spectral_norm(matrix: &SymmetricMatrix) -> Result<f64> {
    let mut best = 0.0f64;
    for block in matrix.blocks() {
        let sub = matrix.submatrix(&block);
        let norm = if sub.dim() > JACOBI_MAX_DIM {
            power_iteration_norm(&sub)?
        } else {
            jacobi_eigenvalues(&sub)?.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        };
        best = best.max(norm);
    }
    Ok(best)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}
