//! Disorder ensembles: vacancy sampling, parallel realizations and
//! compensated averaging.
//!
//! Realizations are split into fixed blocks of consecutive indices. Each
//! block is accumulated sequentially by one worker and the block partials
//! are merged in index order, so the result does not depend on how many
//! threads run the blocks.

use std::collections::BTreeSet;
use std::ops::Range;

use num_complex::Complex64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{build_occupied_block, ModelSpec};
use crate::observables::{
    density, pair_correlations, participation_ratio, quadrant_weights, CorrelationMatrix,
};
use crate::spectral::{PairState, SpectralDecomposition};

/// Realizations per work item.
const BLOCK: usize = 8;
/// Largest tolerated fraction of failed realizations.
pub const MAX_FAILURE_FRACTION: f64 = 1e-3;

/// Parameters of a disorder-averaged quantum walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderPlan {
    /// Clean model; vacancies are drawn per realization.
    pub base: ModelSpec,
    /// Fraction of sites made vacant, `round(fraction · N)` sites.
    pub vacancy_fraction: f64,
    pub n_realizations: usize,
    pub master_seed: u64,
    /// Initially occupied sites (0-based); never made vacant.
    pub start_sites: (usize, usize),
    /// Measurement time in `1/t`.
    pub tau: f64,
    /// Diagonal band width used for the co-walking weight.
    pub cowalk_band: usize,
}

impl DisorderPlan {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !self.base.vacancies.is_empty() {
            return Err(invalid!("the base model of a disorder plan must be clean"));
        }
        if !(0.0..1.0).contains(&self.vacancy_fraction) {
            return Err(invalid!(
                "vacancy fraction {} outside [0, 1)",
                self.vacancy_fraction
            ));
        }
        let (a, b) = self.start_sites;
        if a == b || a >= self.base.n_sites || b >= self.base.n_sites {
            return Err(invalid!(
                "start sites ({a}, {b}) invalid for {} sites",
                self.base.n_sites
            ));
        }
        let available = self.base.n_sites - self.protected_sites().len();
        if self.vacancy_count() > available {
            return Err(invalid!(
                "{} vacancies requested but only {available} unprotected sites",
                self.vacancy_count()
            ));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(invalid!("measurement time must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn vacancy_count(&self) -> usize {
        (self.vacancy_fraction * self.base.n_sites as f64).round() as usize
    }

    pub fn protected_sites(&self) -> BTreeSet<usize> {
        [self.start_sites.0, self.start_sites.1]
            .into_iter()
            .collect()
    }

    pub fn with_v_over_t(&self, v_over_t: f64) -> Self {
        Self {
            base: self.base.clone().with_v_over_t(v_over_t),
            ..self.clone()
        }
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of realization `index`, a pure function of the master seed.
pub fn realization_seed(master_seed: u64, index: u64) -> u64 {
    mix64(mix64(master_seed).wrapping_add(mix64(index ^ 0x9e37_79b9_7f4a_7c15)))
}

/// Vacancy set of realization `realization_index`.
pub fn sample_vacancies(plan: &DisorderPlan, realization_index: usize) -> Result<BTreeSet<usize>> {
    if realization_index >= plan.n_realizations {
        return Err(invalid!(
            "realization {realization_index} out of range for {} realizations",
            plan.n_realizations
        ));
    }
    plan.validate()?;
    Ok(draw_vacancies(plan, realization_index))
}

fn draw_vacancies(plan: &DisorderPlan, realization_index: usize) -> BTreeSet<usize> {
    let count = plan.vacancy_count();
    if count == 0 {
        return BTreeSet::new();
    }
    let protected = plan.protected_sites();
    let candidates: Vec<usize> = (0..plan.base.n_sites)
        .filter(|s| !protected.contains(s))
        .collect();
    let mut rng =
        ChaCha8Rng::seed_from_u64(realization_seed(plan.master_seed, realization_index as u64));
    index::sample(&mut rng, candidates.len(), count)
        .into_iter()
        .map(|k| candidates[k])
        .collect()
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Mean and standard error of a scalar over realizations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStat {
    count: usize,
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
}

impl RunningStat {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.sum.value() / self.count as f64
    }

    /// Standard error of the mean; zero for fewer than two samples.
    pub fn standard_error(&self) -> f64 {
        standard_error(self.count, self.sum.value(), self.sum_sq.value())
    }
}

fn standard_error(n: usize, sum: f64, sum_sq: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let n = n as f64;
    let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
    (var / n).sqrt()
}

/// Observables of one realization at one time.
#[derive(Debug, Clone)]
pub struct RealizationObservables {
    pub gamma: CorrelationMatrix,
    pub participation: f64,
    pub cowalk: f64,
    pub antiwalk: f64,
}

/// Running ensemble averages.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAccumulator {
    n_sites: usize,
    gamma_sum: Vec<CompensatedSum>,
    gamma_sum_sq: Vec<CompensatedSum>,
    pub participation: RunningStat,
    pub cowalk: RunningStat,
    pub antiwalk: RunningStat,
    /// Per-realization `cowalk - antiwalk`.
    pub cowalk_excess: RunningStat,
    pub failures: usize,
}

impl EnsembleAccumulator {
    pub fn new(n_sites: usize) -> Self {
        Self {
            n_sites,
            gamma_sum: vec![CompensatedSum::default(); n_sites * n_sites],
            gamma_sum_sq: vec![CompensatedSum::default(); n_sites * n_sites],
            participation: RunningStat::default(),
            cowalk: RunningStat::default(),
            antiwalk: RunningStat::default(),
            cowalk_excess: RunningStat::default(),
            failures: 0,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Successful realizations accumulated.
    pub fn count(&self) -> usize {
        self.participation.count()
    }

    pub fn push(&mut self, obs: &RealizationObservables) {
        for ((s, sq), g) in self
            .gamma_sum
            .iter_mut()
            .zip(self.gamma_sum_sq.iter_mut())
            .zip(obs.gamma.as_slice())
        {
            s.add(*g);
            sq.add(g * g);
        }
        self.participation.push(obs.participation);
        self.cowalk.push(obs.cowalk);
        self.antiwalk.push(obs.antiwalk);
        self.cowalk_excess.push(obs.cowalk - obs.antiwalk);
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(
            self.n_sites, other.n_sites,
            "merging accumulators of different lattices"
        );
        for (a, b) in self.gamma_sum.iter_mut().zip(&other.gamma_sum) {
            a.merge(b);
        }
        for (a, b) in self.gamma_sum_sq.iter_mut().zip(&other.gamma_sum_sq) {
            a.merge(b);
        }
        self.participation.merge(&other.participation);
        self.cowalk.merge(&other.cowalk);
        self.antiwalk.merge(&other.antiwalk);
        self.cowalk_excess.merge(&other.cowalk_excess);
        self.failures += other.failures;
    }

    pub fn mean_gamma(&self) -> CorrelationMatrix {
        let n = self.count() as f64;
        let values = self.gamma_sum.iter().map(|s| s.value() / n).collect();
        CorrelationMatrix::from_row_major(self.n_sites, values).expect("square buffer")
    }

    /// Elementwise standard error of the mean correlation matrix.
    pub fn gamma_standard_error(&self) -> Vec<f64> {
        self.gamma_sum
            .iter()
            .zip(&self.gamma_sum_sq)
            .map(|(s, sq)| standard_error(self.count(), s.value(), sq.value()))
            .collect()
    }
}

/// Evolves the plan's start pair on `spec` and measures it at each time.
pub fn realization_observables(
    spec: &ModelSpec,
    start_sites: (usize, usize),
    cowalk_band: usize,
    times: &[f64],
) -> Result<Vec<RealizationObservables>> {
    let block = build_occupied_block(spec)?;
    let start = block
        .local_index(start_sites.0, start_sites.1)
        .ok_or_else(|| invalid!("start sites {start_sites:?} are vacant"))?;
    let decomp = SpectralDecomposition::of_symmetric(&block.entries)?;
    // ⟨n|start⟩ is row `start` of the eigenvector matrix
    let coefficients: Vec<Complex64> = (0..decomp.dim())
        .map(|n| Complex64::new(decomp.modes[(start, n)], 0.0))
        .collect();
    let embedding = block.embedding();
    let full_basis = spec.basis();
    let (lo, hi) = if start_sites.0 < start_sites.1 {
        start_sites
    } else {
        (start_sites.1, start_sites.0)
    };
    times
        .iter()
        .map(|&tau| {
            let local = decomp.synthesize(&coefficients, tau);
            let mut amplitudes = vec![Complex64::new(0.0, 0.0); full_basis.dim()];
            for (k, a) in embedding.iter().zip(local) {
                amplitudes[*k] = a;
            }
            let psi = PairState::from_amplitudes(full_basis, amplitudes, tau)?;
            let gamma = pair_correlations(&psi);
            let participation = participation_ratio(&density(&psi))?;
            let q = quadrant_weights(&gamma, lo, hi, cowalk_band);
            Ok(RealizationObservables {
                gamma,
                participation,
                cowalk: q.cowalk,
                antiwalk: q.antiwalk,
            })
        })
        .collect()
}

/// Runs realizations `range` and returns one accumulator per time.
///
/// Failed realizations are tallied in `failures` and left out of the means.
pub fn run_realizations(
    plan: &DisorderPlan,
    range: Range<usize>,
    times: &[f64],
) -> Result<Vec<EnsembleAccumulator>> {
    plan.validate()?;
    if range.end > plan.n_realizations {
        return Err(invalid!(
            "realizations {range:?} exceed the plan's {}",
            plan.n_realizations
        ));
    }
    let n = plan.base.n_sites;
    let blocks: Vec<Range<usize>> = range
        .clone()
        .step_by(BLOCK)
        .map(|s| s..(s + BLOCK).min(range.end))
        .collect();
    let partials: Vec<Vec<EnsembleAccumulator>> = blocks
        .into_par_iter()
        .map(|block| {
            let mut accs = vec![EnsembleAccumulator::new(n); times.len()];
            for r in block {
                let spec = ModelSpec {
                    vacancies: draw_vacancies(plan, r),
                    ..plan.base.clone()
                };
                match realization_observables(&spec, plan.start_sites, plan.cowalk_band, times) {
                    Ok(obs) => {
                        for (acc, o) in accs.iter_mut().zip(&obs) {
                            acc.push(o);
                        }
                    }
                    Err(_) => accs.iter_mut().for_each(|a| a.failures += 1),
                }
            }
            accs
        })
        .collect();
    let mut total = vec![EnsembleAccumulator::new(n); times.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total)
}

/// Runs every realization of the plan at `times`, enforcing the failure
/// policy.
pub fn run_ensemble_at(plan: &DisorderPlan, times: &[f64]) -> Result<Vec<EnsembleAccumulator>> {
    let accs = run_realizations(plan, 0..plan.n_realizations, times)?;
    if let Some(acc) = accs.first() {
        let allowed = MAX_FAILURE_FRACTION * plan.n_realizations as f64;
        if acc.failures as f64 > allowed || acc.count() == 0 {
            return Err(Error::Computation(format!(
                "{} of {} realizations failed",
                acc.failures, plan.n_realizations
            )));
        }
    }
    Ok(accs)
}

pub fn run_ensemble(plan: &DisorderPlan) -> Result<EnsembleAccumulator> {
    Ok(run_ensemble_at(plan, &[plan.tau])?.remove(0))
}

/// Ensemble-mean drift between measurement times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub times: Vec<f64>,
    /// Largest elementwise `|⟨Γ⟩(τ_a) - ⟨Γ⟩(τ_b)|` over all pairs of times.
    pub max_drift: f64,
    /// Largest elementwise combined standard error `sqrt(se_a² + se_b²)`.
    pub standard_error: f64,
    pub stationary: bool,
}

/// Drift of the mean correlation matrix between two ensembles, judged
/// against twice the largest combined standard error.
pub fn compare_ensembles(a: &EnsembleAccumulator, b: &EnsembleAccumulator) -> (f64, f64) {
    let drift = a.mean_gamma().max_abs_diff(&b.mean_gamma());
    let se = a
        .gamma_standard_error()
        .iter()
        .zip(b.gamma_standard_error())
        .fold(0.0f64, |m, (x, y)| m.max((x * x + y * y).sqrt()));
    (drift, se)
}

pub fn stationarity_check(plan: &DisorderPlan, times: &[f64]) -> Result<StationarityReport> {
    if times.is_empty() {
        return Err(invalid!("no measurement times given"));
    }
    let accs = run_ensemble_at(plan, times)?;
    let mut max_drift = 0.0f64;
    let mut se = 0.0f64;
    for a in 0..accs.len() {
        for b in a + 1..accs.len() {
            let (d, s) = compare_ensembles(&accs[a], &accs[b]);
            max_drift = max_drift.max(d);
            se = se.max(s);
        }
    }
    Ok(StationarityReport {
        times: times.to_vec(),
        max_drift,
        standard_error: se,
        stationary: max_drift <= 2.0 * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HoppingMode;

    fn plan(n: usize, fraction: f64, realizations: usize) -> DisorderPlan {
        DisorderPlan {
            base: ModelSpec::new(n, HoppingMode::PowerLaw { alpha: 3.0 }, 3.0, 0.0).unwrap(),
            vacancy_fraction: fraction,
            n_realizations: realizations,
            master_seed: 7,
            start_sites: (n / 2 - 1, n / 2),
            tau: 100.0,
            cowalk_band: 2,
        }
    }

    #[test]
    fn no_vacancies_at_zero_fraction() {
        let p = plan(50, 0.0, 3);
        assert!(sample_vacancies(&p, 2).unwrap().is_empty());
        assert!(sample_vacancies(&p, 3).is_err());
    }

    #[test]
    fn vacancy_count_and_protection() {
        let p = plan(50, 0.1, 200);
        for r in 0..200 {
            let q = sample_vacancies(&p, r).unwrap();
            assert_eq!(q.len(), 5);
            assert!(!q.contains(&24) && !q.contains(&25));
            assert_eq!(q, sample_vacancies(&p, r).unwrap());
        }
    }

    #[test]
    fn too_many_vacancies_rejected() {
        let mut p = plan(10, 0.95, 1);
        assert!(p.validate().is_err());
        p.vacancy_fraction = 0.8;
        assert!(p.validate().is_ok());
        assert_eq!(sample_vacancies(&p, 0).unwrap().len(), 8);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn running_stat_moments() {
        let mut s = RunningStat::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            s.push(x);
        }
        assert_eq!(s.mean(), 2.5);
        // sample variance 5/3
        assert!((s.standard_error() - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn block_partition_is_thread_count_independent() {
        // large enough for the eigensolver's blocked kernels to engage
        let p = plan(24, 0.2, 19);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_ensemble(&p).unwrap())
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a, b);
        assert_eq!(a.count(), 19);
    }
}
