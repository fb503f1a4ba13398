//! Exact optimal ordering by dynamic programming over subsets.
//!
//! `g(S)` is the best achievable maximum prefix norm when `S` occupies the
//! first `|S|` positions: `g(∅) = 0`, `g(S) = max(‖adj Σ(S)‖, min_{v∈S} g(S∖v))`.
//! Subsets are visited depth-first over the index bits, which enumerates every
//! subset after all of its one-smaller subsets and lets the running sum be
//! carried down the recursion instead of being tabulated.

use super::{Algo, OrderResult};
use crate::error::{Error, Result};
use crate::vector::{family_sum, prefix_report, Ordering, VectorFamily};

pub const DEFAULT_ORACLE_CAP: usize = 20;

/// Tables are indexed by `u32` masks.
const HARD_CAP: usize = 30;

struct Dp<'a> {
    family: &'a VectorFamily,
    n: usize,
    dim: usize,
    drift: Option<Vec<f64>>,
    sums: Vec<f64>,
    scratch: Vec<f64>,
    g: Vec<f64>,
    choice: Vec<u8>,
}

impl Dp<'_> {
    fn visit(&mut self, depth: usize, mask: usize) {
        if depth == self.n {
            self.settle(mask);
            return;
        }
        let (lo, hi) = self.sums.split_at_mut((depth + 1) * self.dim);
        let cur = &lo[depth * self.dim..];
        let next = &mut hi[..self.dim];
        next.copy_from_slice(cur);
        self.visit(depth + 1, mask);

        let (lo, hi) = self.sums.split_at_mut((depth + 1) * self.dim);
        let cur = &lo[depth * self.dim..];
        let next = &mut hi[..self.dim];
        for ((y, x), v) in next.iter_mut().zip(cur).zip(self.family.get(depth).coords()) {
            *y = x + v;
        }
        self.visit(depth + 1, mask | (1 << depth));
    }

    fn settle(&mut self, mask: usize) {
        if mask == 0 {
            self.g[0] = 0.0;
            return;
        }
        let sum = &self.sums[self.n * self.dim..];
        let norm = match &self.drift {
            None => self.family.gauge().norm(sum),
            Some(total) => {
                let frac = mask.count_ones() as f64 / self.n as f64;
                for ((s, x), t) in self.scratch.iter_mut().zip(sum).zip(total) {
                    *s = x - frac * t;
                }
                self.family.gauge().norm(&self.scratch)
            }
        };
        let mut best = f64::INFINITY;
        let mut arg = 0u8;
        let mut rest = mask;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let v = self.g[mask ^ (1 << j)];
            if v < best {
                best = v;
                arg = j as u8;
            }
        }
        self.g[mask] = norm.max(best);
        self.choice[mask] = arg;
    }
}

/// Ordering minimising the maximum (optionally drift-adjusted) prefix norm.
///
/// Refuses families larger than `cap`; the tables take `9 · 2^n` bytes.
pub fn oracle_order(family: &VectorFamily, drift: bool, cap: usize) -> Result<OrderResult> {
    let n = family.len();
    if n == 0 {
        return Err(Error::EmptyFamily);
    }
    if cap > HARD_CAP {
        return Err(Error::InvalidParameter(format!("oracle cap {cap} exceeds {HARD_CAP}")));
    }
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let dim = family.dim();
    let total = drift.then(|| family_sum(family)).transpose()?;
    let mut dp = Dp {
        family,
        n,
        dim,
        drift: total.map(|t| t.into_coords()),
        sums: vec![0.0; (n + 1) * dim],
        scratch: vec![0.0; dim],
        g: vec![f64::NAN; 1 << n],
        choice: vec![0; 1 << n],
    };
    dp.visit(0, 0);

    let mut perm = vec![0; n];
    let mut mask = (1usize << n) - 1;
    for pos in (0..n).rev() {
        let j = dp.choice[mask] as usize;
        perm[pos] = j;
        mask ^= 1 << j;
    }
    let ordering = Ordering::new(perm, drift)?;
    let achieved = prefix_report(family, &ordering)?.max_norm;
    Ok(OrderResult { ordering, achieved, algo: Algo::Oracle, guarantee: None })
}

/// Exhaustive search over all `n!` orderings. Test oracle for the DP; `n ≤ 9`.
pub fn brute_force_order(family: &VectorFamily, drift: bool) -> Result<f64> {
    let n = family.len();
    if n > 9 {
        return Err(Error::TooLarge { n, cap: 9 });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    loop {
        let o = Ordering { perm: perm.clone(), drift };
        best = best.min(prefix_report(family, &o)?.max_norm);
        // Next lexicographic permutation.
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    Ok(best)
}
