//! Two-particle hard-core boson basis.
//!
//! States are unordered pairs of distinct sites `|i, j⟩` stored canonically
//! with `i < j` and ordered lexicographically. Double occupancy does not
//! exist in the basis, which is how the hard-core constraint is enforced.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Enumeration of the `N(N-1)/2` pair states on an `N`-site lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairBasis {
    n_sites: usize,
    dim: usize,
}

impl PairBasis {
    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites < 2 {
            return Err(invalid!(
                "a pair basis needs at least 2 sites, got {n_sites}"
            ));
        }
        Ok(Self {
            n_sites,
            dim: n_sites * (n_sites - 1) / 2,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of the canonical pair `(i, j)`, `i < j`.
    pub fn rank(&self, i: usize, j: usize) -> Result<usize> {
        rank(i, j, self.n_sites)
    }

    pub fn unrank(&self, idx: usize) -> Result<(usize, usize)> {
        unrank(idx, self.n_sites)
    }

    /// Rank without bounds checks; callers guarantee `i < j < N`.
    #[inline]
    pub(crate) fn rank_unchecked(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n_sites);
        i * self.n_sites - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Rank of the unordered pair `{a, b}` in either order.
    #[inline]
    pub(crate) fn rank_unordered(&self, a: usize, b: usize) -> usize {
        if a < b {
            self.rank_unchecked(a, b)
        } else {
            self.rank_unchecked(b, a)
        }
    }

    /// All pairs in rank order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n_sites;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }
}

/// Lexicographic rank of `(i, j)` with `0 <= i < j < n_sites`.
pub fn rank(i: usize, j: usize, n_sites: usize) -> Result<usize> {
    if i >= j || j >= n_sites {
        return Err(invalid!(
            "pair ({i}, {j}) is not a canonical pair on {n_sites} sites"
        ));
    }
    Ok(i * n_sites - i * (i + 1) / 2 + (j - i - 1))
}

/// Inverse of [`rank`].
pub fn unrank(idx: usize, n_sites: usize) -> Result<(usize, usize)> {
    let dim = n_sites * n_sites.saturating_sub(1) / 2;
    if idx >= dim {
        return Err(invalid!(
            "basis index {idx} out of range for {n_sites} sites (dim {dim})"
        ));
    }
    // Row i holds n-1-i states. Walk the rows; n is at most a few hundred.
    let mut i = 0;
    let mut start = 0;
    loop {
        let row_len = n_sites - 1 - i;
        if idx < start + row_len {
            return Ok((i, i + 1 + (idx - start)));
        }
        start += row_len;
        i += 1;
    }
}
