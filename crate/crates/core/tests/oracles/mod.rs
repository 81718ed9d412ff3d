//! Independent reference computations used only by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use imhyp_core::lattice_spectrum::{BoundaryCondition, BoxDomain, LatticeMode, PeriodicScaling};
use imhyp_core::spatial_averaging::{Coefficient, Multiplier};
use rand::Rng;

/// Eigenvalues of a symmetric matrix: Householder reduction to tridiagonal
/// form, then bisection on Sturm sequence counts.
pub fn sturm_eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| a[i][k]).collect();
        let norm_x = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let alpha = if x[0] > 0.0 { -norm_x } else { norm_x };
        let mut w = vec![0.0; n];
        for (i, &xi) in x.iter().enumerate() {
            w[k + 1 + i] = xi;
        }
        w[k + 1] -= alpha;
        let wn = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if wn == 0.0 {
            continue;
        }
        w.iter_mut().for_each(|v| *v /= wn);
        // A <- (I - 2ww^T) A (I - 2ww^T) = A - 2wq^T - 2qw^T
        let p: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * w[j]).sum()).collect();
        let kk: f64 = (0..n).map(|i| w[i] * p[i]).sum();
        let q: Vec<f64> = (0..n).map(|i| p[i] - kk * w[i]).collect();
        for i in 0..n {
            for j in 0..n {
                a[i][j] -= 2.0 * (w[i] * q[j] + q[i] * w[j]);
            }
        }
    }
    let d: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    let e: Vec<f64> = (0..n.saturating_sub(1)).map(|i| a[i + 1][i]).collect();

    // Number of eigenvalues strictly below x.
    let count_below = |x: f64| {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..n {
            let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
            q = d[i] - x - if i == 0 { 0.0 } else { off / q };
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let radius = (0..n)
        .map(|i| d[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 })
        .fold(0.0, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-radius, radius);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-1.0..1.0);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}

fn scale(domain: &BoxDomain) -> f64 {
    match (domain.bc(), domain.periodic_scaling()) {
        (BoundaryCondition::Periodic, PeriodicScaling::Standard) => 2.0,
        _ => 1.0,
    }
}

/// Angular frequency unit per axis.
fn unit(domain: &BoxDomain, axis: usize) -> f64 {
    scale(domain) * PI / domain.sides()[axis]
}

/// Every Laplacian eigenvalue `<= cutoff` with multiplicity, by nested loops
/// over the lattice, sorted ascending.
pub fn brute_force_eigenvalues(domain: &BoxDomain, cutoff: f64) -> Vec<f64> {
    let dim = domain.dim();
    let bounds: Vec<i64> = (0..dim)
        .map(|j| (cutoff.sqrt() / unit(domain, j)).floor() as i64 + 1)
        .collect();
    let range = |j: usize| -> Vec<i64> {
        match domain.bc() {
            BoundaryCondition::Dirichlet => (1..=bounds[j]).collect(),
            BoundaryCondition::Neumann => (0..=bounds[j]).collect(),
            BoundaryCondition::Periodic => (-bounds[j]..=bounds[j]).collect(),
        }
    };
    let mut out = Vec::new();
    let r0 = range(0);
    let r1 = if dim > 1 { range(1) } else { vec![0] };
    let r2 = if dim > 2 { range(2) } else { vec![0] };
    for &a in &r0 {
        for &b in &r1 {
            for &c in &r2 {
                let l = [a, b, c];
                let v: f64 = (0..dim).map(|j| (unit(domain, j) * l[j] as f64).powi(2)).sum();
                if v <= cutoff {
                    out.push(v);
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

pub fn random_multiplier<R: Rng>(rng: &mut R, domain: &BoxDomain, max_freq: u32, terms: usize) -> Multiplier {
    let dim = domain.dim();
    let terms = terms.min((max_freq as usize + 1).pow(dim as u32));
    let mut coeffs: Vec<Coefficient> = Vec::new();
    while coeffs.len() < terms {
        let freq: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=max_freq)).collect();
        if coeffs.iter().any(|c| c.freq == freq) {
            continue;
        }
        coeffs.push(Coefficient {
            freq,
            value: rng.gen_range(-1.0..1.0),
        });
    }
    Multiplier::new(domain.clone(), coeffs).unwrap()
}

/// `h(x)` from the cosine series, evaluated without the library.
pub fn eval_multiplier(h: &Multiplier, x: &[f64]) -> f64 {
    let d = h.domain();
    h.coeffs()
        .iter()
        .map(|c| {
            c.value
                * (0..d.dim())
                    .map(|j| (unit(d, j) * c.freq[j] as f64 * x[j]).cos())
                    .product::<f64>()
        })
        .sum()
}

fn zero_coefficient(h: &Multiplier) -> f64 {
    h.coeffs()
        .iter()
        .find(|c| c.freq.iter().all(|&k| k == 0))
        .map_or(0.0, |c| c.value)
}

/// The period of the integrands on each axis, and the factor converting a
/// full-period integral into an integral over the domain cell.
fn quadrature_cell(h: &Multiplier, axis: usize) -> (f64, f64) {
    let d = h.domain();
    let period = 2.0 * PI / unit(d, axis);
    match d.bc() {
        // even integrands: integral over (0, side) is half the period integral
        BoundaryCondition::Neumann => (period, 0.5),
        _ => (period, 1.0),
    }
}

/// Windowed matrix `<e_m, (h - mean) e_n>` by tensor trapezoid quadrature
/// with `points` nodes per axis (exact for trigonometric polynomials of
/// degree below `points`).
pub fn quadrature_window_matrix(h: &Multiplier, modes: &[LatticeMode], points: usize) -> Vec<Vec<f64>> {
    let d = h.domain();
    let dim = d.dim();
    let periodic = d.bc() == BoundaryCondition::Periodic;
    let mean = zero_coefficient(h);

    let cells: Vec<(f64, f64)> = (0..dim).map(|j| quadrature_cell(h, j)).collect();
    let nodes: Vec<Vec<f64>> = cells
        .iter()
        .map(|&(p, _)| (0..points).map(|i| p * i as f64 / points as f64).collect())
        .collect();
    // Domain-cell volume, which normalizes the basis functions.
    let volume: f64 = (0..dim)
        .map(|j| if periodic { cells[j].0 } else { d.sides()[j] })
        .product();
    let weight: f64 = cells.iter().map(|&(p, f)| p / points as f64 * f).product();

    let grid: Vec<Vec<usize>> = {
        let mut g = vec![vec![]];
        for _ in 0..dim {
            g = g
                .into_iter()
                .flat_map(|prefix: Vec<usize>| {
                    (0..points).map(move |i| {
                        let mut v = prefix.clone();
                        v.push(i);
                        v
                    })
                })
                .collect();
        }
        g
    };
    let h_vals: Vec<f64> = grid
        .iter()
        .map(|ix| {
            let x: Vec<f64> = ix.iter().enumerate().map(|(j, &i)| nodes[j][i]).collect();
            eval_multiplier(h, &x) - mean
        })
        .collect();

    // Per-axis basis values at the nodes as complex numbers (re, im):
    // orthonormal cosines for Neumann, exponentials for periodic boxes.
    let n = modes.len();
    let tables: Vec<Vec<Vec<(f64, f64)>>> = (0..n)
        .map(|a| {
            (0..dim)
                .map(|j| {
                    let m = modes[a].index[j];
                    let w = unit(d, j) * m as f64;
                    nodes[j]
                        .iter()
                        .map(|&x| {
                            if periodic {
                                ((w * x).cos(), (w * x).sin())
                            } else {
                                let amp = if m == 0 { 1.0 } else { 2f64.sqrt() };
                                (amp * (w * x).cos(), 0.0)
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut out = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a..n {
            let mut s = 0.0;
            for (g, ix) in grid.iter().enumerate() {
                // conj(e_a) * e_b, accumulated as a complex product over axes
                let (mut re, mut im) = (1.0, 0.0);
                for j in 0..dim {
                    let (ar, ai) = tables[a][j][ix[j]];
                    let (br, bi) = tables[b][j][ix[j]];
                    let (pr, pi) = (ar * br + ai * bi, ar * bi - ai * br);
                    (re, im) = (re * pr - im * pi, re * pi + im * pr);
                }
                s += h_vals[g] * re;
            }
            let v = s * weight / volume;
            out[a][b] = v;
            out[b][a] = v;
        }
    }
    out
}

/// `max |h - mean|` over a uniform grid with `points` nodes per axis covering one period.
pub fn sampled_sup_deviation(h: &Multiplier, points: usize) -> f64 {
    let d = h.domain();
    let dim = d.dim();
    let mean = zero_coefficient(h);
    let periods: Vec<f64> = (0..dim).map(|j| 2.0 * PI / unit(d, j)).collect();
    let total = points.pow(dim as u32);
    let mut best: f64 = 0.0;
    let mut x = vec![0.0; dim];
    for flat in 0..total {
        let mut r = flat;
        for j in 0..dim {
            x[j] = periods[j] * (r % points) as f64 / points as f64;
            r /= points;
        }
        best = best.max((eval_multiplier(h, &x) - mean).abs());
    }
    best
}

/// Number of real parts `xi - nu * lambda >= gamma` over a brute-force
/// lattice enumeration, counting each local real part with its multiplicity.
/// Values within relative 1e-9 of `gamma` count as equal to it, since the
/// lattice sums here and in the library round differently.
pub fn brute_force_count(local: &[(f64, u64)], nu: f64, laplacian: &[f64], gamma: f64) -> u64 {
    let mut n = 0;
    for &(xi, m) in local {
        for &lambda in laplacian {
            let v = xi - nu * lambda;
            if v >= gamma - 1e-9 * (1.0 + v.abs()) {
                n += m;
            }
        }
    }
    n
}
