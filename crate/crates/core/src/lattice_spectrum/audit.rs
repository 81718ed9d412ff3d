use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeSquareAudit {
    pub limit: u64,
    /// Integers `<= limit` that are not a sum of three squares.
    pub excluded: Vec<u64>,
    /// Largest difference between consecutive representable integers.
    pub max_gap: u64,
    /// First `(lo, hi)` pair of consecutive representable integers attaining `max_gap`.
    pub max_gap_witness: (u64, u64),
    pub max_excluded_run: u64,
}

/// `n = 4^a (8b + 7)` for some `a, b >= 0`.
pub fn is_gauss_excluded(mut n: u64) -> bool {
    if n == 0 {
        return false;
    }
    while n.is_multiple_of(4) {
        n /= 4;
    }
    n % 8 == 7
}

/// Sieves the sums `l1^2 + l2^2 + l3^2 <= limit` directly and cross-checks the
/// complement against the closed form `4^a (8b + 7)`.
pub fn three_square_gap_audit(limit: u64) -> Result<ThreeSquareAudit> {
    if limit < 8 {
        return Err(precondition(format!("audit limit must be at least 8 (got {limit})")));
    }
    let n = limit as usize;
    let mut representable = vec![false; n + 1];
    let mut a = 0usize;
    while a * a <= n {
        let mut b = a;
        while a * a + b * b <= n {
            let mut c = b;
            let ab = a * a + b * b;
            while ab + c * c <= n {
                representable[ab + c * c] = true;
                c += 1;
            }
            b += 1;
        }
        a += 1;
    }

    let mut excluded = Vec::new();
    let mut max_run = 0u64;
    let mut run = 0u64;
    let mut last_rep: Option<u64> = None;
    let mut max_gap = 0u64;
    let mut witness = (0, 0);
    for (i, &rep) in representable.iter().enumerate() {
        let i = i as u64;
        if rep != !is_gauss_excluded(i) {
            return Err(Error::Consistency(format!(
                "{i}: sieve says representable={rep}, closed form disagrees"
            )));
        }
        if rep {
            if let Some(prev) = last_rep {
                if i - prev > max_gap {
                    max_gap = i - prev;
                    witness = (prev, i);
                }
            }
            last_rep = Some(i);
            run = 0;
        } else {
            excluded.push(i);
            run += 1;
            max_run = max_run.max(run);
        }
    }

    Ok(ThreeSquareAudit {
        limit,
        excluded,
        max_gap,
        max_gap_witness: witness,
        max_excluded_run: max_run,
    })
}
