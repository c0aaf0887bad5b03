use hcwalk_core::ensemble::{
    compare_ensembles, realization_observables, run_realizations, sample_vacancies,
    stationarity_check, EnsembleAccumulator,
};
use hcwalk_core::observables::{density, pair_correlations, participation_ratio};
use hcwalk_core::{
    build_hamiltonian, eigendecompose, evolve, DisorderPlan, HoppingMode, ModelSpec, PairState,
};

fn dipolar_plan(n: usize, fraction: f64, realizations: usize, seed: u64) -> DisorderPlan {
    DisorderPlan {
        base: ModelSpec::new(n, HoppingMode::PowerLaw { alpha: 3.0 }, 3.0, 0.0).unwrap(),
        vacancy_fraction: fraction,
        n_realizations: realizations,
        master_seed: seed,
        start_sites: (n / 2 - 1, n / 2),
        tau: 1e3,
        cowalk_band: 2,
    }
}

#[test]
fn vacancy_sites_are_uniform() {
    let plan = dipolar_plan(50, 0.1, 100_000, 2024);
    let mut hits = [0u64; 50];
    for r in 0..plan.n_realizations {
        for s in sample_vacancies(&plan, r).unwrap() {
            hits[s] += 1;
        }
    }
    assert_eq!(hits[24] + hits[25], 0);
    let n = plan.n_realizations as f64;
    let p = 5.0 / 48.0;
    let sigma = (n * p * (1.0 - p)).sqrt();
    let mut chi2 = 0.0;
    for (s, &h) in hits.iter().enumerate() {
        if s == 24 || s == 25 {
            continue;
        }
        let z = (h as f64 - n * p) / sigma;
        assert!(z.abs() < 5.0, "site {s}: {h} hits, z = {z}");
        chi2 += (h as f64 - n * p).powi(2) / (n * p);
    }
    // 47 degrees of freedom; mean 47, sd ~9.7
    assert!(chi2 < 47.0 + 5.0 * (2.0f64 * 47.0).sqrt(), "chi2 = {chi2}");
}

#[test]
fn single_clean_realization_matches_direct_walk() {
    let plan = dipolar_plan(14, 0.0, 1, 1);
    let acc = run_realizations(&plan, 0..1, &[plan.tau])
        .unwrap()
        .remove(0);

    let h = build_hamiltonian(&plan.base).unwrap();
    let d = eigendecompose(&h).unwrap();
    let psi0 = PairState::localized(h.basis, 6, 7).unwrap();
    let psi = evolve(&d, &psi0, plan.tau).unwrap();
    let gamma = pair_correlations(&psi);

    assert_eq!(acc.count(), 1);
    assert!(acc.mean_gamma().max_abs_diff(&gamma) < 1e-10);
    let p = participation_ratio(&density(&psi)).unwrap();
    assert!((acc.participation.mean() - p).abs() < 1e-9 * p);
}

#[test]
fn means_do_not_depend_on_accumulation_order() {
    let plan = dipolar_plan(14, 0.15, 24, 99);
    let forward = run_realizations(&plan, 0..24, &[plan.tau])
        .unwrap()
        .remove(0);

    let mut reverse = EnsembleAccumulator::new(14);
    for r in (0..24).rev() {
        let spec = ModelSpec {
            vacancies: sample_vacancies(&plan, r).unwrap(),
            ..plan.base.clone()
        };
        let obs = realization_observables(&spec, plan.start_sites, 2, &[plan.tau]).unwrap();
        reverse.push(&obs[0]);
    }
    assert_eq!(reverse.count(), 24);
    assert!(forward.mean_gamma().max_abs_diff(&reverse.mean_gamma()) < 1e-12);
    assert!((forward.participation.mean() - reverse.participation.mean()).abs() < 1e-12);
    assert!((forward.cowalk.mean() - reverse.cowalk.mean()).abs() < 1e-12);
}

#[test]
fn consecutive_ranges_merge_to_the_whole() {
    let plan = dipolar_plan(14, 0.15, 40, 5);
    let whole = run_realizations(&plan, 0..40, &[plan.tau])
        .unwrap()
        .remove(0);
    let mut left = run_realizations(&plan, 0..20, &[plan.tau])
        .unwrap()
        .remove(0);
    let right = run_realizations(&plan, 20..40, &[plan.tau])
        .unwrap()
        .remove(0);
    left.merge(&right);
    assert_eq!(left.count(), whole.count());
    assert!(left.mean_gamma().max_abs_diff(&whole.mean_gamma()) < 1e-12);
    assert!((left.participation.mean() - whole.participation.mean()).abs() < 1e-12);
    assert!(
        (left.participation.standard_error() - whole.participation.standard_error()).abs() < 1e-12
    );
}

#[test]
fn identical_times_give_zero_drift() {
    let plan = dipolar_plan(12, 0.0, 1, 3);
    let report = stationarity_check(&plan, &[50.0, 50.0]).unwrap();
    assert_eq!(report.max_drift, 0.0);
    assert!(report.stationary);
}

#[test]
fn late_time_ensemble_is_stationary() {
    let plan = dipolar_plan(24, 0.1, 300, 11);
    let report = stationarity_check(&plan, &[1e3, 1e4]).unwrap();
    assert!(
        report.stationary,
        "drift {} vs se {}",
        report.max_drift, report.standard_error
    );
}

#[test]
fn independent_seeds_agree_within_noise() {
    let a = dipolar_plan(24, 0.1, 300, 1);
    let b = dipolar_plan(24, 0.1, 300, 2);
    let ea = run_realizations(&a, 0..300, &[a.tau]).unwrap().remove(0);
    let eb = run_realizations(&b, 0..300, &[b.tau]).unwrap().remove(0);
    let (drift, se) = compare_ensembles(&ea, &eb);
    assert!(drift <= 2.0 * se, "drift {drift} vs se {se}");
}
