use std::path::Path;

use hcwalk_core::dispersion::{band_edges, two_particle_spectrum_vs_k};
use hcwalk_core::ensemble::{run_ensemble, EnsembleAccumulator};
use hcwalk_core::observables::{density, pair_correlations, participation_ratio, quadrant_weights};
use hcwalk_core::openprop::{scan_interaction, ScatterSetup};
use hcwalk_core::{
    build_hamiltonian, eigendecompose, evolve, DisorderPlan, ModelSpec, PairState, SurvivalMeasure,
};
use serde_json::json;

use crate::args::{
    Command, DisorderArgs, DispersionArgs, EnsembleArgs, ImpurityArgs, ParticipationArgs, Survival,
    WalkArgs,
};
use crate::error::{CliError, CliResult};
use crate::output::{correlation_header, csv_with_comments, num, write_correlations, write_series};

/// What a command produced, for the manifest.
#[derive(Debug, Default)]
pub struct Outcome {
    pub outputs: Vec<String>,
    pub master_seed: Option<u64>,
    pub failures: usize,
    pub notes: Vec<String>,
    pub summary: serde_json::Value,
}

pub fn run(command: &Command, dir: &Path) -> CliResult<Outcome> {
    match command {
        Command::Walk(a) => walk(a, dir),
        Command::Impurity(a) => impurity(a, dir),
        Command::Disorder(a) => disorder(a, dir),
        Command::Participation(a) => participation(a, dir),
        Command::Dispersion(a) => dispersion(a, dir),
    }
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

fn walk(a: &WalkArgs, dir: &Path) -> CliResult<Outcome> {
    let (i, j) = a.starts.zero_based().map_err(usage)?;
    let vacancies = a
        .vacancies
        .iter()
        .map(|&s| {
            s.checked_sub(1)
                .ok_or_else(|| usage("site labels are 1-based".into()))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let spec = ModelSpec::new(a.n_sites, a.hopping.mode(), a.beta, a.v_over_t)?
        .with_vacancies(vacancies)?;
    let h = build_hamiltonian(&spec)?;
    let psi0 = PairState::localized(h.basis, i, j)?;
    let psi = evolve(&eigendecompose(&h)?, &psi0, a.tau)?;

    let gamma = pair_correlations(&psi);
    let rho = density(&psi);
    let header = correlation_header(a.tau, spec.hopping, a.beta, a.v_over_t);
    write_correlations(&dir.join("gamma.csv"), header.clone(), &gamma)?;
    write_series(
        &dir.join("density.csv"),
        &[header],
        ["site", "density"],
        rho.values
            .iter()
            .enumerate()
            .map(|(s, &d)| ((s + 1).to_string(), d)),
    )?;
    let q = quadrant_weights(&gamma, i, j, 2);
    Ok(Outcome {
        outputs: vec!["gamma.csv".into(), "density.csv".into()],
        summary: json!({
            "norm": psi.norm_sqr(),
            "participation_ratio": participation_ratio(&rho)?,
            "cowalk_band2": q.cowalk,
            "antiwalk": q.antiwalk,
        }),
        notes: vec!["sites in all files are 1-based".into()],
        ..Outcome::default()
    })
}

fn impurity(a: &ImpurityArgs, dir: &Path) -> CliResult<Outcome> {
    let barriers = a.barriers.zero_based().map_err(usage)?;
    let starts = a.starts.zero_based().map_err(usage)?;
    if barriers.0 >= a.n_sites || barriers.1 >= a.n_sites {
        return Err(usage(format!(
            "barriers {} lie outside a lattice of {} sites",
            a.barriers, a.n_sites
        )));
    }
    let grid = a.grid.values().map_err(usage)?;
    let spec = ModelSpec::new(a.n_sites, a.hopping.mode(), a.beta, 0.0)?;
    let setup = ScatterSetup::new(spec, barriers, starts, a.gamma, a.tau)?;
    let measure = match a.survival {
        Survival::Density => SurvivalMeasure::Density,
        Survival::Pair => SurvivalMeasure::PairInterior,
    };
    let points = scan_interaction(&setup, &grid, measure, a.dtau)?;

    let mut w = csv_with_comments(
        &dir.join("survival.csv"),
        &[format!(
            "survival between barriers {}, starts {}, tau={}, alpha={}, beta={}, measure={:?}",
            a.barriers,
            a.starts,
            a.tau,
            setup.spec.hopping.label(),
            a.beta,
            a.survival
        )],
    )?;
    w.write_record(["v_over_t", "survival", "gamma", "dtau"])?;
    for p in &points {
        w.write_record([num(p.v_over_t), num(p.survival), num(a.gamma), num(a.dtau)])?;
    }
    w.flush()?;

    let best = points
        .iter()
        .max_by(|x, y| x.survival.total_cmp(&y.survival))
        .map(|p| p.v_over_t);
    let worst = points
        .iter()
        .min_by(|x, y| x.survival.total_cmp(&y.survival))
        .map(|p| p.v_over_t);
    Ok(Outcome {
        outputs: vec!["survival.csv".into()],
        summary: json!({ "argmax_survival": best, "argmin_survival": worst }),
        notes: vec![match a.survival {
            Survival::Density => {
                "survival = sum of the one-particle density over the closed barrier interval".into()
            }
            Survival::Pair => {
                "survival = probability that both particles lie in the closed barrier interval"
                    .into()
            }
        }],
        ..Outcome::default()
    })
}

fn plan(e: &EnsembleArgs, v_over_t: f64) -> CliResult<DisorderPlan> {
    let plan = DisorderPlan {
        base: ModelSpec::new(e.n_sites, e.hopping.mode(), e.beta, v_over_t)?,
        vacancy_fraction: e.vacancy_fraction,
        n_realizations: e.realizations,
        master_seed: e.master_seed,
        start_sites: e.starts.zero_based().map_err(usage)?,
        tau: e.tau,
        cowalk_band: e.cowalk_band,
    };
    plan.validate()?;
    Ok(plan)
}

fn ensemble_notes(e: &EnsembleArgs) -> Vec<String> {
    vec![
        format!(
            "vacancy_fraction={} is the fraction of vacant sites (occupied fraction {}); both disorder figures are read as 10% vacancies",
            e.vacancy_fraction,
            1.0 - e.vacancy_fraction
        ),
        "starting sites are never made vacant; trapped configurations are kept in the averages".into(),
    ]
}

fn disorder(a: &DisorderArgs, dir: &Path) -> CliResult<Outcome> {
    let e = &a.ensemble;
    let plan = plan(e, a.v_over_t)?;
    let acc = run_ensemble(&plan)?;
    let header = correlation_header(e.tau, plan.base.hopping, e.beta, a.v_over_t);
    write_correlations(&dir.join("mean_gamma.csv"), header, &acc.mean_gamma())?;
    write_participation(&dir.join("participation.csv"), e, &[(a.v_over_t, &acc)])?;
    Ok(Outcome {
        outputs: vec!["mean_gamma.csv".into(), "participation.csv".into()],
        master_seed: Some(e.master_seed),
        failures: acc.failures,
        notes: ensemble_notes(e),
        summary: json!({
            "realizations": acc.count(),
            "mean_participation": acc.participation.mean(),
            "participation_standard_error": acc.participation.standard_error(),
            "cowalk": acc.cowalk.mean(),
            "cowalk_standard_error": acc.cowalk.standard_error(),
            "antiwalk": acc.antiwalk.mean(),
            "antiwalk_standard_error": acc.antiwalk.standard_error(),
        }),
    })
}

fn participation(a: &ParticipationArgs, dir: &Path) -> CliResult<Outcome> {
    let e = &a.ensemble;
    if a.v_values.is_empty() {
        return Err(usage("empty v/t grid".into()));
    }
    let mut accs = Vec::with_capacity(a.v_values.len());
    for &v in &a.v_values {
        accs.push((v, run_ensemble(&plan(e, v)?)?));
    }
    let rows: Vec<(f64, &EnsembleAccumulator)> = accs.iter().map(|(v, acc)| (*v, acc)).collect();
    write_participation(&dir.join("participation.csv"), e, &rows)?;
    let peak = accs
        .iter()
        .max_by(|x, y| {
            x.1.participation
                .mean()
                .total_cmp(&y.1.participation.mean())
        })
        .map(|(v, _)| *v);
    Ok(Outcome {
        outputs: vec!["participation.csv".into()],
        master_seed: Some(e.master_seed),
        failures: accs.iter().map(|(_, acc)| acc.failures).sum(),
        notes: ensemble_notes(e),
        summary: json!({ "peak_v_over_t": peak }),
    })
}

fn write_participation(
    path: &Path,
    e: &EnsembleArgs,
    rows: &[(f64, &EnsembleAccumulator)],
) -> CliResult<()> {
    let mut w = csv_with_comments(
        path,
        &[format!(
            "participation ratio, tau={}, alpha={}, beta={}, vacancy_fraction={}, master_seed={}",
            e.tau,
            e.hopping.mode().label(),
            e.beta,
            e.vacancy_fraction,
            e.master_seed
        )],
    )?;
    w.write_record([
        "v_over_t",
        "mean_participation",
        "standard_error",
        "realizations",
        "failures",
    ])?;
    for (v, acc) in rows {
        w.write_record([
            num(*v),
            num(acc.participation.mean()),
            num(acc.participation.standard_error()),
            acc.count().to_string(),
            acc.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn dispersion(a: &DispersionArgs, dir: &Path) -> CliResult<Outcome> {
    let mut outputs = Vec::new();
    let mut edges = serde_json::Map::new();
    for mode in &a.modes {
        let label = mode.0.label();
        let spec = ModelSpec::new(a.n_sites, mode.0, 1.0, 0.0)?;
        let levels = two_particle_spectrum_vs_k(&spec)?;
        let name = format!(
            "dispersion_{}.csv",
            if label == "nn" {
                label.clone()
            } else {
                format!("alpha{label}")
            }
        );
        let mut w = csv_with_comments(
            &dir.join(&name),
            &[format!(
                "two-particle ring spectrum, n_sites={}, alpha={label}, v_over_t=0",
                a.n_sites
            )],
        )?;
        w.write_record(["total_momentum", "energy"])?;
        for l in &levels {
            w.write_record([num(l.total_momentum), num(l.energy)])?;
        }
        w.flush()?;
        outputs.push(name);
        let b = band_edges(mode.0)?;
        // the α=1 band top diverges; JSON has no infinity
        let finite = |x: f64| if x.is_finite() { json!(x) } else { json!(null) };
        edges.insert(
            label,
            json!({
                "two_particle_min": finite(b.two_particle_min),
                "two_particle_max": finite(b.two_particle_max),
            }),
        );
    }
    Ok(Outcome {
        outputs,
        summary: json!({ "infinite_lattice_band_edges": edges }),
        ..Outcome::default()
    })
}
