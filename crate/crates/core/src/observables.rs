//! Pair correlations, densities, participation ratios and bound-state counts.

use crate::error::{invalid, Result};
use crate::model::{reflection_blocks, ModelSpec};
use crate::spectral::{extreme_eigenvalues, shifted_inertia, PairState};

/// Joint probabilities `Γ_ij = |Ψ_ij|²` on the full `N × N` grid.
///
/// Both triangles are stored; the diagonal is zero. Sums over states use the
/// `i < j` convention so that a normalized state has total weight 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n_sites: usize,
    values: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn zeros(n_sites: usize) -> Self {
        Self {
            n_sites,
            values: vec![0.0; n_sites * n_sites],
        }
    }

    /// Wraps a row-major `N × N` buffer.
    pub fn from_row_major(n_sites: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_sites * n_sites {
            return Err(invalid!(
                "{} values for a {n_sites}x{n_sites} grid",
                values.len()
            ));
        }
        Ok(Self { n_sites, values })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_sites + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_sites..(i + 1) * self.n_sites]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// `Σ_{i<j} Γ_ij`.
    pub fn total(&self) -> f64 {
        let n = self.n_sites;
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .sum()
    }

    /// `max |Γ_ij - Γ'_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Site densities `Ψ_i = ½ Σ_{j≠i} |Ψ_ij|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub values: Vec<f64>,
}

impl DensityProfile {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

pub fn pair_correlations(psi: &PairState) -> CorrelationMatrix {
    let n = psi.basis.n_sites();
    let mut gamma = CorrelationMatrix::zeros(n);
    for ((i, j), amp) in psi.basis.pairs().zip(&psi.amplitudes) {
        let p = amp.norm_sqr();
        gamma.values[i * n + j] = p;
        gamma.values[j * n + i] = p;
    }
    gamma
}

pub fn density(psi: &PairState) -> DensityProfile {
    let mut values = vec![0.0; psi.basis.n_sites()];
    for ((i, j), amp) in psi.basis.pairs().zip(&psi.amplitudes) {
        let half = 0.5 * amp.norm_sqr();
        values[i] += half;
        values[j] += half;
    }
    DensityProfile { values }
}

/// Same as [`density`], read off a correlation matrix.
pub fn density_from_correlations(gamma: &CorrelationMatrix) -> DensityProfile {
    DensityProfile {
        values: (0..gamma.n_sites())
            .map(|i| 0.5 * gamma.row(i).iter().sum::<f64>())
            .collect(),
    }
}

/// `P = 1 / Σ_i Ψ_i²`.
pub fn participation_ratio(rho: &DensityProfile) -> Result<f64> {
    let s: f64 = rho.values.iter().map(|x| x * x).sum();
    if !(s > 0.0) {
        return Err(invalid!("participation ratio of an empty density"));
    }
    Ok(1.0 / s)
}

/// Correlation weight near the diagonal versus in the anti-walking corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrantWeights {
    /// `Σ_{i<j, j-i<=d} Γ_ij`.
    pub cowalk: f64,
    /// `Σ_{i<start_lo, j>start_hi} Γ_ij`: one particle on each side of the
    /// starting pair.
    pub antiwalk: f64,
}

pub fn quadrant_weights(
    gamma: &CorrelationMatrix,
    start_lo: usize,
    start_hi: usize,
    band: usize,
) -> QuadrantWeights {
    let (lo, hi) = if start_lo <= start_hi {
        (start_lo, start_hi)
    } else {
        (start_hi, start_lo)
    };
    let n = gamma.n_sites();
    let mut cowalk = 0.0;
    let mut antiwalk = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let g = gamma.get(i, j);
            if j - i <= band {
                cowalk += g;
            }
            if i < lo && j > hi {
                antiwalk += g;
            }
        }
    }
    QuadrantWeights { cowalk, antiwalk }
}

/// Interacting eigenvalues split off below or above the free continuum by
/// more than `margin`.
pub fn count_bound_states(interacting: &[f64], free: &[f64], margin: f64) -> usize {
    let (lo, hi) = free
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
            (lo.min(e), hi.max(e))
        });
    interacting
        .iter()
        .filter(|&&e| e < lo - margin || e > hi + margin)
        .count()
}

/// Default margin for [`count_bound_states`]: three times the larger of the
/// two level spacings at the edges of the free spectrum.
pub fn default_bound_margin(free: &[f64]) -> f64 {
    let mut sorted = free.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.len() < 2 {
        return 0.0;
    }
    let n = sorted.len();
    let bottom = sorted[1] - sorted[0];
    let top = sorted[n - 1] - sorted[n - 2];
    3.0 * bottom.max(top)
}

/// Edges of the non-interacting two-particle spectrum and the margin a level
/// must clear to count as split off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumEdges {
    pub lower: f64,
    pub upper: f64,
    pub margin: f64,
}

/// Free-spectrum edges of a reflection-symmetric lattice, from the two
/// extreme levels on each side of both parity sectors. The margin follows
/// [`default_bound_margin`].
pub fn free_continuum(spec: &ModelSpec) -> Result<ContinuumEdges> {
    let blocks = reflection_blocks(&spec.clone().with_v_over_t(0.0))?;
    let mut low = Vec::new();
    let mut high = Vec::new();
    for block in [&blocks.even, &blocks.odd] {
        if block.nrows() == 0 {
            continue;
        }
        let (l, h) = extreme_eigenvalues(block, 2)?;
        low.extend(l);
        high.extend(h);
    }
    low.sort_by(f64::total_cmp);
    high.sort_by(|a, b| b.total_cmp(a));
    if low.len() < 2 {
        return Err(invalid!("lattice too small for edge spacings"));
    }
    let margin = 3.0 * (low[1] - low[0]).max(high[0] - high[1]);
    Ok(ContinuumEdges {
        lower: low[0],
        upper: high[0],
        margin,
    })
}

/// Same count as [`count_bound_states`] without computing the spectrum:
/// Sylvester inertia of each parity block shifted to the two thresholds.
pub fn count_bound_states_by_inertia(spec: &ModelSpec, edges: &ContinuumEdges) -> Result<usize> {
    let blocks = reflection_blocks(spec)?;
    let mut count = 0;
    for block in [&blocks.even, &blocks.odd] {
        if block.nrows() == 0 {
            continue;
        }
        count += shifted_inertia(block, edges.lower - edges.margin)?.negative;
        count += shifted_inertia(block, edges.upper + edges.margin)?.positive;
    }
    Ok(count)
}
