//! Single- and two-particle dispersion for power-law hopping.
//!
//! The single-particle band is `E(k) = 2t Σ_{r≥1} cos(kr) / r^α`. Its extremes
//! are `2t ζ(α)` at `k = 0` and `-2t η(α)` at `k = π`, so the non-interacting
//! two-particle continuum spans `[-4t η(α), 4t ζ(α)]`.

use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{HoppingMode, ModelSpec, HOPPING_SCALE};

/// Tail bound the truncated cosine series is driven below.
const SERIES_TOLERANCE: f64 = 1e-10;
/// Truncation beyond which the direct cosine series is considered too slow.
const MAX_SERIES_TERMS: u64 = 50_000_000;
/// Terms summed explicitly before the Euler-Maclaurin tail in [`zeta`].
const ZETA_TERMS: u64 = 10_000;

/// Riemann zeta `ζ(s)` for `s > 1`.
///
/// Sums the first 10⁴ terms directly and adds the Euler-Maclaurin tail
/// `R^{1-s}/(s-1) + R^{-s}/2 + s R^{-s-1}/12 - s(s+1)(s+2) R^{-s-3}/720`,
/// whose remainder is below `1e-20` for `s >= 1`.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(invalid!("zeta({s}) diverges"));
    }
    // small terms first
    let head: f64 = (1..ZETA_TERMS).rev().map(|r| (r as f64).powf(-s)).sum();
    let r = ZETA_TERMS as f64;
    let tail = r.powf(1.0 - s) / (s - 1.0) + 0.5 * r.powf(-s) + s * r.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * r.powf(-s - 3.0) / 720.0;
    Ok(head + tail)
}

/// Dirichlet eta `η(s) = Σ (-1)^{r+1} / r^s = (1 - 2^{1-s}) ζ(s)`; `η(1) = ln 2`.
pub fn eta(s: f64) -> Result<f64> {
    if s == 1.0 {
        return Ok(std::f64::consts::LN_2);
    }
    Ok((1.0 - 2f64.powf(1.0 - s)) * zeta(s)?)
}

fn wrap_momentum(k: f64) -> f64 {
    let mut k = k.rem_euclid(2.0 * PI);
    if k > PI {
        k -= 2.0 * PI;
    }
    k
}

/// Single-particle band energy at wave number `k`.
///
/// Nearest-neighbour and `α ∈ {1, 2}` use closed forms; other exponents sum
/// the cosine series until `2/((α-1) R^{α-1}) < 1e-10`.
pub fn single_dispersion(mode: HoppingMode, k: f64) -> Result<f64> {
    let t = HOPPING_SCALE;
    let k = wrap_momentum(k);
    match mode {
        HoppingMode::NearestNeighbour => Ok(2.0 * t * k.cos()),
        HoppingMode::PowerLaw { alpha: 1.0 } => {
            if k == 0.0 {
                return Err(invalid!("the 1/r band diverges logarithmically at k = 0"));
            }
            Ok(-2.0 * t * (2.0 * (0.5 * k.abs()).sin()).ln())
        }
        HoppingMode::PowerLaw { alpha: 2.0 } => {
            let k = k.abs();
            Ok(2.0 * t * (PI * PI / 6.0 - PI * k / 2.0 + k * k / 4.0))
        }
        HoppingMode::PowerLaw { alpha } => {
            if !(alpha > 1.0) {
                return Err(invalid!("hopping exponent {alpha} must exceed 1"));
            }
            let terms = (2.0 / ((alpha - 1.0) * SERIES_TOLERANCE))
                .powf(1.0 / (alpha - 1.0))
                .ceil();
            if terms > MAX_SERIES_TERMS as f64 {
                return Err(invalid!(
                    "cosine series for alpha={alpha} needs {terms:.3e} terms to reach {SERIES_TOLERANCE:e}"
                ));
            }
            Ok(2.0 * t * cosine_series(k, alpha, terms as u64))
        }
    }
}

/// `Σ_{r=1}^{R} cos(kr) / r^α`, smallest terms first.
pub fn cosine_series(k: f64, alpha: f64, terms: u64) -> f64 {
    (1..=terms)
        .rev()
        .map(|r| {
            let r = r as f64;
            (k * r).cos() / r.powf(alpha)
        })
        .sum()
}

/// Band edges of the single-particle band and the two-particle continuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdges {
    pub single_min: f64,
    /// `+∞` for `α = 1`.
    pub single_max: f64,
    pub two_particle_min: f64,
    pub two_particle_max: f64,
}

pub fn band_edges(mode: HoppingMode) -> Result<BandEdges> {
    let t = HOPPING_SCALE;
    let (single_min, single_max) = match mode {
        HoppingMode::NearestNeighbour => (-2.0 * t, 2.0 * t),
        HoppingMode::PowerLaw { alpha: 1.0 } => (-2.0 * t * eta(1.0)?, f64::INFINITY),
        HoppingMode::PowerLaw { alpha } => (-2.0 * t * eta(alpha)?, 2.0 * t * zeta(alpha)?),
    };
    Ok(BandEdges {
        single_min,
        single_max,
        two_particle_min: 2.0 * single_min,
        two_particle_max: 2.0 * single_max,
    })
}

/// One eigenstate of the ring, labelled by total quasimomentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumLevel {
    /// `K = 2πm/N` folded into `(-π, π]`.
    pub total_momentum: f64,
    pub energy: f64,
}

#[inline]
fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

/// Canonical representative and period of a pair's translation orbit.
fn orbit_of(i: usize, j: usize, n: usize) -> ((usize, usize), usize) {
    let mut best = canonical(i, j);
    let mut period = n;
    for shift in 1..n {
        let p = canonical((i + shift) % n, (j + shift) % n);
        if p == canonical(i, j) {
            period = shift;
            break;
        }
        best = best.min(p);
    }
    (best, period)
}

#[inline]
fn canonical(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Two-particle spectrum of the clean periodic ring, resolved by total
/// quasimomentum.
///
/// Distances are ring distances `min(|i-j|, N-|i-j|)`. The Hamiltonian is
/// block diagonalized exactly in the Bloch basis built from translation
/// orbits of pair states, so degenerate levels need no disentangling.
pub fn two_particle_spectrum_vs_k(spec: &ModelSpec) -> Result<Vec<MomentumLevel>> {
    spec.validate()?;
    if !spec.vacancies.is_empty() {
        return Err(invalid!("momentum-resolved spectra need a clean lattice"));
    }
    let n = spec.n_sites;
    if n < 3 {
        return Err(invalid!("a ring needs at least 3 sites"));
    }
    let hop = |a: usize, b: usize| spec.hopping.amplitude_at(ring_distance(a, b, n));
    let element = |(i, j): (usize, usize), (k, l): (usize, usize)| -> f64 {
        if (i, j) == (k, l) {
            return spec.v_over_t * HOPPING_SCALE / (ring_distance(i, j, n) as f64).powf(spec.beta);
        }
        // exactly one shared site: the other particle hops
        if i == k {
            hop(j, l)
        } else if i == l {
            hop(j, k)
        } else if j == k {
            hop(i, l)
        } else if j == l {
            hop(i, k)
        } else {
            0.0
        }
    };

    let mut orbits: Vec<((usize, usize), usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let o = orbit_of(i, j, n);
            if o.0 == (i, j) {
                orbits.push(o);
            }
        }
    }
    let total: usize = orbits.iter().map(|o| o.1).sum();
    if total != n * (n - 1) / 2 {
        return Err(Error::Computation(format!(
            "translation orbits cover {total} states, expected {}",
            n * (n - 1) / 2
        )));
    }

    let mut levels = Vec::with_capacity(total);
    for m in 0..n {
        let k = 2.0 * PI * m as f64 / n as f64;
        // Bloch states exist for orbits whose period p satisfies e^{iKp} = 1.
        let allowed: Vec<_> = orbits
            .iter()
            .filter(|(_, p)| (m * p) % n == 0)
            .copied()
            .collect();
        let size = allowed.len();
        if size == 0 {
            continue;
        }
        // ⟨K,a|H|K,b⟩ = sqrt(p_a/p_b) Σ_{s<p_b} e^{-iKs} ⟨a|H T^s|b⟩
        let mut block = Mat::<Complex64>::zeros(size, size);
        for (x, &(a, pa)) in allowed.iter().enumerate() {
            for (y, &(b, pb)) in allowed.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for s in 0..pb {
                    let shifted = canonical((b.0 + s) % n, (b.1 + s) % n);
                    let h = element(a, shifted);
                    if h != 0.0 {
                        acc += Complex64::from_polar(h, -k * s as f64);
                    }
                }
                block[(x, y)] = acc * (pa as f64 / pb as f64).sqrt();
            }
        }
        let evd = block.self_adjoint_eigen(Side::Lower).map_err(|e| {
            Error::Computation(format!("momentum block K={k} failed to diagonalize: {e:?}"))
        })?;
        let folded = wrap_momentum(k);
        let folded = if folded == -PI { PI } else { folded };
        for e in evd.S().column_vector().iter() {
            levels.push(MomentumLevel {
                total_momentum: folded,
                energy: e.re,
            });
        }
    }
    if levels.len() != total {
        return Err(Error::Computation(format!(
            "momentum blocks produced {} levels for {total} states",
            levels.len()
        )));
    }
    Ok(levels)
}
