use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::BoxDomain;
use crate::error::{precondition, Error, Result};

/// Default cap on lattice points (float mode) or table entries (integer mode).
pub const DEFAULT_LATTICE_BUDGET: u64 = 100_000_000;

/// Relative tolerance under which two floating eigenvalues are one eigenvalue.
pub const MERGE_RTOL: f64 = 1e-9;

/// Below this many table entries the integer convolution runs single-threaded.
const PARALLEL_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEntry {
    pub value: f64,
    pub multiplicity: u64,
}

/// Distinct Laplacian eigenvalues up to a cutoff, ascending, with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    entries: Vec<SpectralEntry>,
    cutoff: f64,
}

impl Spectrum {
    /// Builds a spectrum from explicit entries, checking the ordering invariants.
    pub fn new(entries: Vec<SpectralEntry>, cutoff: f64) -> Result<Self> {
        for pair in entries.windows(2) {
            if !(pair[0].value < pair[1].value) {
                return Err(precondition("spectrum entries must be strictly increasing"));
            }
        }
        if entries.iter().any(|e| e.multiplicity == 0 || !e.value.is_finite()) {
            return Err(precondition("multiplicities must be positive and values finite"));
        }
        if entries.last().is_some_and(|e| e.value > cutoff) {
            return Err(precondition("spectrum entry above its cutoff"));
        }
        Ok(Self { entries, cutoff })
    }

    pub fn entries(&self) -> &[SpectralEntry] {
        &self.entries
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of eigenvalues counted with multiplicity.
    pub fn total_multiplicity(&self) -> u64 {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// `#{n : lambda_n <= x}` with multiplicity.
    pub fn count_le(&self, x: f64) -> u64 {
        let idx = self.entries.partition_point(|e| e.value <= x);
        self.entries[..idx].iter().map(|e| e.multiplicity).sum()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.value)
    }

    /// Writes `lambda,multiplicity` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["lambda", "multiplicity"])?;
        for e in &self.entries {
            w.write_record([e.value.to_string(), e.multiplicity.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// All Laplacian eigenvalues `<= cutoff` on `domain`, using the default budget.
pub fn enumerate_spectrum(domain: &BoxDomain, cutoff: f64) -> Result<Spectrum> {
    enumerate_spectrum_with_budget(domain, cutoff, DEFAULT_LATTICE_BUDGET)
}

pub fn enumerate_spectrum_with_budget(domain: &BoxDomain, cutoff: f64, budget: u64) -> Result<Spectrum> {
    if !(cutoff >= 0.0) || !cutoff.is_finite() {
        return Err(precondition(format!(
            "cutoff must be a finite non-negative number (got {cutoff})"
        )));
    }
    let entries = match domain.integer_weight() {
        Some(weight) => enumerate_integer(domain, weight, cutoff, budget)?,
        None => enumerate_float(domain, cutoff, budget)?,
    };
    Ok(Spectrum { entries, cutoff })
}

/// Per-axis table of `(eigenvalue contribution, multiplicity)` up to `limit`.
fn axis_table(domain: &BoxDomain, axis: usize, limit: f64) -> Vec<(f64, u64)> {
    let mut out = Vec::new();
    let mut l = domain.first_mode();
    loop {
        let v = domain.axis_eigenvalue(axis, l);
        if v > limit {
            break;
        }
        out.push((v, domain.axis_multiplicity(l)));
        l += 1;
    }
    out
}

/// Exact multiplicities on the pi-box: eigenvalues are the integers `w * sum l_j^2`,
/// counted by convolving the per-axis representation counts.
fn enumerate_integer(domain: &BoxDomain, weight: u64, cutoff: f64, budget: u64) -> Result<Vec<SpectralEntry>> {
    let top = cutoff.floor() as u64;
    if top.saturating_add(1) > budget {
        return Err(Error::Budget {
            needed: top.saturating_add(1),
            budget,
        });
    }
    let n = top as usize;
    let mut axis: Vec<(usize, u64)> = Vec::new();
    let mut l = domain.first_mode() as u64;
    while weight * l * l <= top {
        axis.push(((weight * l * l) as usize, domain.axis_multiplicity(l as i64)));
        l += 1;
    }

    let mut counts = vec![0u64; n + 1];
    for &(v, m) in &axis {
        counts[v] += m;
    }
    for _ in 1..domain.dim() {
        counts = convolve_axis(&counts, &axis);
    }

    Ok(counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(v, &c)| SpectralEntry {
            value: v as f64,
            multiplicity: c,
        })
        .collect())
}

fn convolve_axis(counts: &[u64], axis: &[(usize, u64)]) -> Vec<u64> {
    let len = counts.len();
    let scatter = |start: usize, chunk: &[u64], acc: &mut Vec<u64>| {
        for (offset, &c) in chunk.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let base = start + offset;
            for &(v, m) in axis {
                let t = base + v;
                if t >= len {
                    break;
                }
                acc[t] += c * m;
            }
        }
    };

    if len < PARALLEL_THRESHOLD {
        let mut out = vec![0u64; len];
        scatter(0, counts, &mut out);
        return out;
    }
    // Integer sums commute, so the slab split does not affect the result.
    let chunk = len.div_ceil(rayon::current_num_threads().max(1));
    counts
        .par_chunks(chunk)
        .enumerate()
        .map(|(i, slab)| {
            let mut acc = vec![0u64; len];
            scatter(i * chunk, slab, &mut acc);
            acc
        })
        .reduce(
            || vec![0u64; len],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

fn enumerate_float(domain: &BoxDomain, cutoff: f64, budget: u64) -> Result<Vec<SpectralEntry>> {
    let tables: Vec<Vec<(f64, u64)>> = (0..domain.dim()).map(|a| axis_table(domain, a, cutoff)).collect();

    // Count first so the budget error fires before any large allocation.
    let needed = count_points(&tables, cutoff, budget);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }

    let mut values: Vec<(f64, u64)> = tables[0]
        .par_iter()
        .map(|&(v0, m0)| {
            let mut slab = Vec::new();
            collect_points(&tables[1..], v0, m0, cutoff, &mut slab);
            slab
        })
        .flatten()
        .collect();
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(merge_sorted(values))
}

/// Lattice points below the cutoff, stopping once the count passes `stop_after`.
fn count_points(tables: &[Vec<(f64, u64)>], cutoff: f64, stop_after: u64) -> u64 {
    fn rec(tables: &[Vec<(f64, u64)>], partial: f64, cutoff: f64, acc: &mut u64, stop: u64) {
        let Some((head, rest)) = tables.split_first() else {
            *acc += 1;
            return;
        };
        for &(v, _) in head {
            if partial + v > cutoff || *acc > stop {
                break;
            }
            rec(rest, partial + v, cutoff, acc, stop);
        }
    }
    let mut acc = 0;
    rec(tables, 0.0, cutoff, &mut acc, stop_after);
    acc
}

fn collect_points(tables: &[Vec<(f64, u64)>], partial: f64, mult: u64, cutoff: f64, out: &mut Vec<(f64, u64)>) {
    let Some((head, rest)) = tables.split_first() else {
        out.push((partial, mult));
        return;
    };
    for &(v, m) in head {
        if partial + v > cutoff {
            break;
        }
        collect_points(rest, partial + v, mult * m, cutoff, out);
    }
}

/// Merges ascending `(value, multiplicity)` pairs whose values agree to
/// `MERGE_RTOL * (1 + value)`.
pub(crate) fn merge_sorted(values: Vec<(f64, u64)>) -> Vec<SpectralEntry> {
    let mut out: Vec<SpectralEntry> = Vec::new();
    for (v, m) in values {
        match out.last_mut() {
            Some(last) if v - last.value <= MERGE_RTOL * (1.0 + last.value.abs()) => last.multiplicity += m,
            _ => out.push(SpectralEntry {
                value: v,
                multiplicity: m,
            }),
        }
    }
    out
}

/// One Laplacian eigenfunction, identified by its per-axis mode indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeMode {
    pub index: Vec<i64>,
    pub eigenvalue: f64,
}

/// Every eigenmode with eigenvalue in `(lo, hi]`, sorted by eigenvalue then index.
/// Periodic domains list `+l` and `-l` separately.
pub fn lattice_modes(domain: &BoxDomain, lo: f64, hi: f64) -> Vec<LatticeMode> {
    fn rec(
        domain: &BoxDomain,
        axis: usize,
        idx: &mut Vec<i64>,
        partial: f64,
        lo: f64,
        hi: f64,
        out: &mut Vec<LatticeMode>,
    ) {
        if axis == domain.dim() {
            if partial > lo {
                out.push(LatticeMode {
                    index: idx.clone(),
                    eigenvalue: partial,
                });
            }
            return;
        }
        let periodic = domain.bc() == super::BoundaryCondition::Periodic;
        let mut l = domain.first_mode();
        loop {
            let v = domain.axis_eigenvalue(axis, l);
            if partial + v > hi {
                break;
            }
            let signs: &[i64] = if periodic && l != 0 { &[1, -1] } else { &[1] };
            for s in signs {
                idx.push(s * l);
                rec(domain, axis + 1, idx, partial + v, lo, hi, out);
                idx.pop();
            }
            l += 1;
        }
    }

    let mut out = Vec::new();
    if hi >= 0.0 {
        rec(domain, 0, &mut Vec::with_capacity(domain.dim()), 0.0, lo, hi, &mut out);
    }
    out.sort_by(|a, b| {
        a.eigenvalue
            .total_cmp(&b.eigenvalue)
            .then_with(|| a.index.cmp(&b.index))
    });
    out
}
