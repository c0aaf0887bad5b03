//! Scattering off two vacancies with absorbing exterior regions.
//!
//! Probability that tunnels past the two barrier sites is removed by a flat
//! complex absorbing potential on every site outside the barriers, so the
//! wave packet cannot reflect off the lattice ends. The non-Hermitian
//! Schrödinger equation `i dΨ/dτ = (H - iΓ)Ψ` is integrated with classical
//! fourth-order Runge-Kutta.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::PairBasis;
use crate::error::{invalid, Error, Result};
use crate::model::{hop_amplitude, interaction_strength, ModelSpec};
use crate::observables::density;
use crate::spectral::PairState;

/// Default absorber strength in units of `t`.
pub const DEFAULT_ABSORB_STRENGTH: f64 = 1.0;
/// Default Runge-Kutta step in units of `1/t`.
pub const DEFAULT_DTAU: f64 = 1e-3;
/// Largest tolerated per-step norm growth before the integrator is declared
/// unstable.
const NORM_GROWTH_TOLERANCE: f64 = 1e-12;

/// Geometry and parameters of the two-impurity scattering experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSetup {
    /// Model; must list both barrier sites as vacancies.
    pub spec: ModelSpec,
    /// Barrier (vacant) sites, 0-based, `lo < hi`.
    pub barrier_sites: (usize, usize),
    /// Initially occupied sites, 0-based, strictly between the barriers.
    pub start_sites: (usize, usize),
    /// Absorber strength `γ >= 0`.
    pub absorb_strength: f64,
    pub measure_time: f64,
}

impl ScatterSetup {
    /// Builds a setup and adds the barriers to the model's vacancies.
    pub fn new(
        spec: ModelSpec,
        barrier_sites: (usize, usize),
        start_sites: (usize, usize),
        absorb_strength: f64,
        measure_time: f64,
    ) -> Result<Self> {
        let mut spec = spec;
        spec.vacancies.insert(barrier_sites.0);
        spec.vacancies.insert(barrier_sites.1);
        let setup = Self {
            spec,
            barrier_sites,
            start_sites,
            absorb_strength,
            measure_time,
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let (lo, hi) = self.barrier_sites;
        let (a, b) = self.start_sites;
        if lo >= hi || hi >= self.spec.n_sites {
            return Err(invalid!(
                "barriers ({lo}, {hi}) must satisfy lo < hi < {}",
                self.spec.n_sites
            ));
        }
        if !self.spec.is_vacant(lo) || !self.spec.is_vacant(hi) {
            return Err(invalid!("barrier sites must be vacancies of the model"));
        }
        if a == b {
            return Err(invalid!("start sites must differ"));
        }
        for s in [a, b] {
            if s <= lo || s >= hi {
                return Err(invalid!(
                    "start site {s} is not strictly between the barriers"
                ));
            }
            if self.spec.is_vacant(s) {
                return Err(invalid!("start site {s} is vacant"));
            }
        }
        if !(self.absorb_strength >= 0.0 && self.absorb_strength.is_finite()) {
            return Err(invalid!("absorber strength must be finite and >= 0"));
        }
        if !(self.measure_time >= 0.0 && self.measure_time.is_finite()) {
            return Err(invalid!("measurement time must be finite and >= 0"));
        }
        Ok(())
    }

    #[inline]
    fn is_exterior(&self, site: usize) -> bool {
        site < self.barrier_sites.0 || site > self.barrier_sites.1
    }

    pub fn initial_state(&self) -> Result<PairState> {
        PairState::localized(self.spec.basis(), self.start_sites.0, self.start_sites.1)
    }
}

/// `H - iΓ` with `H` real symmetric and `Γ` a non-negative diagonal.
///
/// Off-diagonal entries are real and kept in compressed rows; there are at
/// most `2(N - 2)` per row.
#[derive(Debug, Clone)]
pub struct AbsorbingHamiltonian {
    pub basis: PairBasis,
    diagonal: Vec<Complex64>,
    row_start: Vec<usize>,
    col: Vec<u32>,
    val: Vec<f64>,
}

impl AbsorbingHamiltonian {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn diagonal(&self) -> &[Complex64] {
        &self.diagonal
    }

    /// Entry `(a, b)`.
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        if a == b {
            return self.diagonal[a];
        }
        let range = self.row_start[a]..self.row_start[a + 1];
        self.col[range.clone()]
            .iter()
            .zip(&self.val[range])
            .find(|(c, _)| **c as usize == b)
            .map_or(Complex64::new(0.0, 0.0), |(_, v)| Complex64::new(*v, 0.0))
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|a| (0..self.dim()).map(|b| self.get(a, b)).collect())
            .collect()
    }

    /// Max row sum of absolute values, an upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim())
            .map(|a| {
                let range = self.row_start[a]..self.row_start[a + 1];
                self.diagonal[a].norm() + self.val[range].iter().map(|v| v.abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `out = -i (H - iΓ) psi`.
    fn time_derivative(&self, psi: &[Complex64], out: &mut [Complex64]) {
        for a in 0..psi.len() {
            let mut acc = self.diagonal[a] * psi[a];
            for k in self.row_start[a]..self.row_start[a + 1] {
                acc += psi[self.col[k] as usize] * self.val[k];
            }
            // -i * acc
            out[a] = Complex64::new(acc.im, -acc.re);
        }
    }
}

pub fn build_absorbing_hamiltonian(setup: &ScatterSetup) -> Result<AbsorbingHamiltonian> {
    setup.validate()?;
    let spec = &setup.spec;
    let basis = spec.basis();
    let n = spec.n_sites;
    let gamma = setup.absorb_strength;
    let mut diagonal = Vec::with_capacity(basis.dim());
    let mut row_start = Vec::with_capacity(basis.dim() + 1);
    let mut col = Vec::new();
    let mut val = Vec::new();
    row_start.push(0);
    for (i, j) in basis.pairs() {
        let outside = setup.is_exterior(i) as u8 + setup.is_exterior(j) as u8;
        diagonal.push(Complex64::new(
            interaction_strength(spec, i, j)?,
            -gamma * outside as f64,
        ));
        let mut row: Vec<(u32, f64)> = Vec::new();
        for m in 0..n {
            if m == i || m == j {
                continue;
            }
            let amp = hop_amplitude(spec, i, m)?;
            if amp != 0.0 {
                row.push((basis.rank_unordered(m, j) as u32, amp));
            }
            let amp = hop_amplitude(spec, j, m)?;
            if amp != 0.0 {
                row.push((basis.rank_unordered(i, m) as u32, amp));
            }
        }
        row.sort_unstable_by_key(|(c, _)| *c);
        for (c, v) in row {
            col.push(c);
            val.push(v);
        }
        row_start.push(col.len());
    }
    Ok(AbsorbingHamiltonian {
        basis,
        diagonal,
        row_start,
        col,
        val,
    })
}

/// Integrates `i dΨ/dτ = H_c Ψ` from `psi0` over `tau` with steps no longer
/// than `dtau`.
pub fn propagate_absorbing(
    hc: &AbsorbingHamiltonian,
    psi0: &PairState,
    tau: f64,
    dtau: f64,
) -> Result<PairState> {
    if psi0.basis != hc.basis {
        return Err(invalid!("state basis does not match the Hamiltonian"));
    }
    if !(dtau > 0.0 && dtau.is_finite()) || !(tau >= 0.0 && tau.is_finite()) {
        return Err(invalid!(
            "need tau >= 0 and dtau > 0, got tau={tau}, dtau={dtau}"
        ));
    }
    let steps = (tau / dtau).ceil() as usize;
    let mut psi = psi0.amplitudes.clone();
    if steps == 0 {
        return Ok(psi0.clone());
    }
    let h = tau / steps as f64;
    let dim = psi.len();
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
    );
    let mut stage = vec![zero; dim];
    let mut norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>();
    for step in 0..steps {
        hc.time_derivative(&psi, &mut k1);
        for a in 0..dim {
            stage[a] = psi[a] + k1[a] * (0.5 * h);
        }
        hc.time_derivative(&stage, &mut k2);
        for a in 0..dim {
            stage[a] = psi[a] + k2[a] * (0.5 * h);
        }
        hc.time_derivative(&stage, &mut k3);
        for a in 0..dim {
            stage[a] = psi[a] + k3[a] * h;
        }
        hc.time_derivative(&stage, &mut k4);
        for a in 0..dim {
            psi[a] += (k1[a] + (k2[a] + k3[a]) * 2.0 + k4[a]) * (h / 6.0);
        }
        let next = psi.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if !next.is_finite() || next - norm > NORM_GROWTH_TOLERANCE {
            return Err(Error::Computation(format!(
                "norm grew from {norm} to {next} at step {step} (dtau={h}); reduce the step"
            )));
        }
        norm = next;
    }
    Ok(PairState {
        basis: psi0.basis,
        amplitudes: psi,
        time: psi0.time + tau,
    })
}

/// Probability that both particles lie in `[barrier_lo, barrier_hi]`.
pub fn survival_probability(psi: &PairState, barrier_lo: usize, barrier_hi: usize) -> f64 {
    let inside = |s: usize| s >= barrier_lo && s <= barrier_hi;
    psi.basis
        .pairs()
        .zip(&psi.amplitudes)
        .filter(|((i, j), _)| inside(*i) && inside(*j))
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Particle density `Σ_{i ∈ [lo, hi]} Ψ_i` between the barriers.
pub fn density_survival(psi: &PairState, barrier_lo: usize, barrier_hi: usize) -> f64 {
    density(psi).values[barrier_lo..=barrier_hi].iter().sum()
}

/// How to count what stays between the barriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SurvivalMeasure {
    /// Particle density integrated over the interior.
    #[default]
    Density,
    /// Both particles in the interior.
    PairInterior,
}

impl SurvivalMeasure {
    pub fn evaluate(&self, psi: &PairState, barrier_lo: usize, barrier_hi: usize) -> f64 {
        match self {
            SurvivalMeasure::Density => density_survival(psi, barrier_lo, barrier_hi),
            SurvivalMeasure::PairInterior => survival_probability(psi, barrier_lo, barrier_hi),
        }
    }
}

/// Survival at the setup's measurement time.
pub fn survival_at_measure_time(
    setup: &ScatterSetup,
    measure: SurvivalMeasure,
    dtau: f64,
) -> Result<f64> {
    let hc = build_absorbing_hamiltonian(setup)?;
    let psi = propagate_absorbing(&hc, &setup.initial_state()?, setup.measure_time, dtau)?;
    Ok(measure.evaluate(&psi, setup.barrier_sites.0, setup.barrier_sites.1))
}

/// Survival at `dtau` and `dtau / 2`; fails unless they agree within `tol`.
pub fn converged_survival(
    setup: &ScatterSetup,
    measure: SurvivalMeasure,
    dtau: f64,
    tol: f64,
) -> Result<f64> {
    let coarse = survival_at_measure_time(setup, measure, dtau)?;
    let fine = survival_at_measure_time(setup, measure, 0.5 * dtau)?;
    if (coarse - fine).abs() >= tol {
        return Err(Error::Computation(format!(
            "survival not converged in dtau: {coarse} at {dtau} vs {fine} at {}",
            0.5 * dtau
        )));
    }
    Ok(fine)
}

/// One point of an interaction-strength scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub v_over_t: f64,
    pub survival: f64,
}

/// Survival for each `v/t` in `grid`, computed in parallel.
pub fn scan_interaction(
    setup: &ScatterSetup,
    grid: &[f64],
    measure: SurvivalMeasure,
    dtau: f64,
) -> Result<Vec<ScanPoint>> {
    grid.par_iter()
        .map(|&v| {
            let mut point = setup.clone();
            point.spec.v_over_t = v;
            Ok(ScanPoint {
                v_over_t: v,
                survival: survival_at_measure_time(&point, measure, dtau)?,
            })
        })
        .collect()
}
