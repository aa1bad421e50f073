//! Gradient-magnitude landscapes over (target probability, entropy).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{shannon_entropy, Dist, Prob};
use crate::objectives::{gate, ObjectiveKind};
use crate::scalar::Scalar;

pub const ENTROPY_TOL: f64 = 1e-6;
pub const BISECTION_MAX_ITER: usize = 200;

/// Target mass `p` at index 0, the rest split between a spike at index 1
/// and a uniform tail: the spike weight `w` moves from the uniform tail
/// (`w = 0`, maximum entropy) to a single spike (`w = 1`, minimum).
fn family<T: Scalar>(p: T, w: T, vocab: usize) -> Vec<T> {
    let rest = T::one() - p;
    let tail = rest * (T::one() - w) / T::from_count(vocab - 1);
    let mut probs = vec![tail; vocab];
    probs[0] = p;
    probs[1] = rest * w + tail;
    probs
}

fn family_entropy<T: Scalar>(p: T, w: T, vocab: usize) -> Result<T> {
    Ok(shannon_entropy(&Dist::new(family(p, w, vocab))?))
}

/// Attainable entropy interval `[min, max]` for target mass `p`.
pub fn entropy_bounds<T: Scalar>(p: Prob<T>, vocab: usize) -> Result<(T, T)> {
    check_vocab(vocab)?;
    let p = p.get();
    Ok((family_entropy(p, T::one(), vocab)?, family_entropy(p, T::zero(), vocab)?))
}

fn check_vocab(vocab: usize) -> Result<()> {
    if vocab < 3 {
        return Err(Error::domain("construct_distribution", format!("vocabulary {vocab} < 3")));
    }
    Ok(())
}

/// A distribution with `P[0] = p` and Shannon entropy `entropy`, found by
/// bisection on the spike weight.
pub fn construct_distribution<T: Scalar>(p: Prob<T>, entropy: T, vocab: usize) -> Result<Dist<T>> {
    let (lo_h, hi_h) = entropy_bounds(p, vocab)?;
    let tol = T::lit(ENTROPY_TOL).max(T::epsilon() * T::lit(64.0));
    if !entropy.is_finite() || entropy < lo_h - tol || entropy > hi_h + tol {
        return Err(Error::Infeasible {
            p: p.get().to_f64_lossy(),
            entropy: entropy.to_f64_lossy(),
            min: lo_h.to_f64_lossy(),
            max: hi_h.to_f64_lossy(),
        });
    }
    let p = p.get();
    // Entropy decreases in w.
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut w = T::lit(0.5);
    for _ in 0..BISECTION_MAX_ITER {
        w = (lo + hi) / T::lit(2.0);
        let h = family_entropy(p, w, vocab)?;
        if (h - entropy).abs() <= tol / T::lit(16.0) {
            break;
        }
        if h > entropy {
            lo = w;
        } else {
            hi = w;
        }
        if hi - lo <= T::epsilon() {
            break;
        }
    }
    let mut best = w;
    for cand in [T::zero(), T::one()] {
        if (family_entropy(p, cand, vocab)? - entropy).abs() < (family_entropy(p, best, vocab)? - entropy).abs() {
            best = cand;
        }
    }
    let dist = Dist::new(family(p, best, vocab))?;
    let reached = shannon_entropy(&dist);
    if (reached - entropy).abs() > tol {
        return Err(Error::domain(
            "construct_distribution",
            format!("bisection stopped at entropy {reached}, target {entropy}"),
        ));
    }
    Ok(dist)
}

/// Normalized target-logit gradient magnitudes; `cells[i][j]` is the cell
/// at `(p_grid[i], h_grid[j])`, absent where the pair is infeasible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeGrid<T: Scalar = f64> {
    pub objective: String,
    pub vocab_size: usize,
    pub p_grid: Vec<T>,
    pub h_grid: Vec<T>,
    pub cells: Vec<Vec<Option<T>>>,
}

impl<T: Scalar> LandscapeGrid<T> {
    /// Feasible cells as `(p, entropy, magnitude)`, sorted by `(p, entropy)`.
    pub fn feasible_cells(&self) -> Vec<(T, T, T)> {
        let mut out = Vec::new();
        for (i, row) in self.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if let Some(v) = cell {
                    out.push((self.p_grid[i], self.h_grid[j], *v));
                }
            }
        }
        out
    }

    pub fn max_cell(&self) -> Option<T> {
        self.cells.iter().flatten().flatten().copied().reduce(T::max)
    }
}

/// Cell midpoints `(i + 1/2) / steps`.
pub fn p_grid<T: Scalar>(steps: usize) -> Vec<T> {
    (0..steps)
        .map(|i| (T::from_count(i) + T::lit(0.5)) / T::from_count(steps))
        .collect()
}

/// Cell midpoints of `[0, ln vocab]`.
pub fn h_grid<T: Scalar>(steps: usize, vocab: usize) -> Vec<T> {
    let top = T::from_count(vocab).ln();
    p_grid::<T>(steps).into_iter().map(|u| u * top).collect()
}

fn check_ascending<T: Scalar>(name: &str, grid: &[T], lo: T, hi: T, open: bool) -> Result<()> {
    let inside = |v: T| if open { v > lo && v < hi } else { v >= lo && v <= hi };
    if grid.is_empty()
        || grid.iter().any(|&v| !v.is_finite() || !inside(v))
        || grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::domain(
            "gradient_landscape",
            format!("{name} grid must be nonempty, ascending and inside its range"),
        ));
    }
    Ok(())
}

pub fn gradient_landscape<T: Scalar>(
    kind: &ObjectiveKind<T>,
    p_grid: &[T],
    h_grid: &[T],
    vocab: usize,
) -> Result<LandscapeGrid<T>> {
    check_vocab(vocab)?;
    check_ascending("p", p_grid, T::zero(), T::one(), true)?;
    check_ascending("entropy", h_grid, T::zero(), T::from_count(vocab).ln(), false)?;
    let mut cells = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let p = Prob::new(p)?;
        let mut row = Vec::with_capacity(h_grid.len());
        for &h in h_grid {
            row.push(match construct_distribution(p, h, vocab) {
                Ok(dist) => Some(gate(kind, &dist, 0)?.signal.abs()),
                Err(Error::Infeasible { .. }) => None,
                Err(e) => return Err(e),
            });
        }
        cells.push(row);
    }
    let mut grid = LandscapeGrid {
        objective: kind.to_string(),
        vocab_size: vocab,
        p_grid: p_grid.to_vec(),
        h_grid: h_grid.to_vec(),
        cells,
    };
    if let Some(max) = grid.max_cell().filter(|&m| m > T::zero()) {
        grid.cells
            .iter_mut()
            .flatten()
            .flatten()
            .for_each(|v| *v = *v / max);
    }
    Ok(grid)
}
