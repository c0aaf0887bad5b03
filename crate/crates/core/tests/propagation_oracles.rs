//! Spectral propagation against independent time-stepping and
//! matrix-exponential oracles.

use faer::Mat;
use hcwalk_core::model::{build_hamiltonian, nn_mode_hamiltonian, HoppingMode, ModelSpec};
use hcwalk_core::observables::pair_correlations;
use hcwalk_core::spectral::{eigendecompose, evolve, expectation, PairState};
use num_complex::Complex64;

type C = Complex64;

fn dense(h: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..h.nrows())
        .map(|a| (0..h.ncols()).map(|b| h[(a, b)]).collect())
        .collect()
}

fn apply(h: &[Vec<f64>], psi: &[C]) -> Vec<C> {
    h.iter()
        .map(|row| row.iter().zip(psi).map(|(x, p)| p * *x).sum())
        .collect()
}

/// Classical RK4 on `i dψ/dτ = Hψ`.
fn rk4(h: &[Vec<f64>], psi0: &[C], tau: f64, dt: f64) -> Vec<C> {
    let steps = (tau / dt).round() as usize;
    let mi = C::new(0.0, -1.0);
    let f = |psi: &[C]| -> Vec<C> { apply(h, psi).into_iter().map(|x| mi * x).collect() };
    let axpy =
        |a: &[C], b: &[C], s: f64| -> Vec<C> { a.iter().zip(b).map(|(x, y)| x + y * s).collect() };
    let mut psi = psi0.to_vec();
    for _ in 0..steps {
        let k1 = f(&psi);
        let k2 = f(&axpy(&psi, &k1, dt / 2.0));
        let k3 = f(&axpy(&psi, &k2, dt / 2.0));
        let k4 = f(&axpy(&psi, &k3, dt));
        for a in 0..psi.len() {
            psi[a] += (k1[a] + (k2[a] + k3[a]) * 2.0 + k4[a]) * (dt / 6.0);
        }
    }
    psi
}

fn matmul(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = a.len();
    let mut out = vec![vec![C::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i][k];
            for j in 0..n {
                out[i][j] += x * b[k][j];
            }
        }
    }
    out
}

/// `exp(-iHτ)` by scaling, Taylor series and repeated squaring.
fn expm(h: &[Vec<f64>], tau: f64) -> Vec<Vec<C>> {
    let n = h.len();
    let norm = h
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * tau;
    let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let scale = tau / 2f64.powi(squarings);
    let a: Vec<Vec<C>> = h
        .iter()
        .map(|r| r.iter().map(|x| C::new(0.0, -x * scale)).collect())
        .collect();
    let mut result: Vec<Vec<C>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        C::new(1.0, 0.0)
                    } else {
                        C::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    let mut term = result.clone();
    for k in 1..30 {
        term = matmul(&term, &a);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn spectral_matches_rk4_on_twelve_sites() {
    let spec = ModelSpec::new(12, HoppingMode::PowerLaw { alpha: 3.0 }, 3.0, 2.0).unwrap();
    let h = build_hamiltonian(&spec).unwrap();
    let d = eigendecompose(&h).unwrap();
    let psi0 = PairState::localized(h.basis, 5, 6).unwrap();
    let spectral = evolve(&d, &psi0, 1.0).unwrap();
    let stepped = rk4(&dense(&h.entries), &psi0.amplitudes, 1.0, 1e-4);
    assert!(max_diff(&spectral.amplitudes, &stepped) <= 1e-6);
}

#[test]
fn spectral_matches_matrix_exponential() {
    for (n, alpha, v) in [(6, 1.0, -3.0), (8, 3.0, 2.0), (7, 2.0, 0.0)] {
        let spec = ModelSpec::new(n, HoppingMode::PowerLaw { alpha }, 1.0, v)
            .unwrap()
            .with_vacancies([1])
            .unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let d = eigendecompose(&h).unwrap();
        let psi0 = PairState::localized(h.basis, 2, 4).unwrap();
        let tau = 3.7;
        let u = expm(&dense(&h.entries), tau);
        let reference: Vec<C> = u
            .iter()
            .map(|row| row.iter().zip(&psi0.amplitudes).map(|(x, p)| x * p).sum())
            .collect();
        let spectral = evolve(&d, &psi0, tau).unwrap();
        assert!(max_diff(&spectral.amplitudes, &reference) < 1e-10, "n={n}");
    }
}

#[test]
fn unitarity_energy_and_group_law() {
    let spec = ModelSpec::new(30, HoppingMode::PowerLaw { alpha: 3.0 }, 3.0, 1.5).unwrap();
    let h = build_hamiltonian(&spec).unwrap();
    let d = eigendecompose(&h).unwrap();
    let scale = d.energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    assert!(d.residual(&h.entries) <= 1e-9 * scale);
    assert!(d.orthogonality_defect() <= 1e-10);

    let psi0 = PairState::localized(h.basis, 14, 15).unwrap();
    let e0 = expectation(&h.entries, &psi0.amplitudes);
    for tau in [1.0, 37.5, 1e3, 1e4] {
        let psi = evolve(&d, &psi0, tau).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() <= 1e-10, "norm at {tau}");
        let e = expectation(&h.entries, &psi.amplitudes);
        assert!(
            (e - e0).abs() <= 1e-9 * e0.abs().max(1.0),
            "energy at {tau}"
        );
    }

    let once = evolve(&d, &evolve(&d, &psi0, 2.3).unwrap(), 4.1).unwrap();
    let direct = evolve(&d, &psi0, 6.4).unwrap();
    assert!(max_diff(&once.amplitudes, &direct.amplitudes) <= 1e-9);
    assert!((once.time - 6.4).abs() < 1e-12);

    let back = evolve(&d, &evolve(&d, &psi0, 50.0).unwrap(), -50.0).unwrap();
    assert!(max_diff(&back.amplitudes, &psi0.amplitudes) <= 1e-9);
}

#[test]
fn nearest_neighbour_sign_symmetry_on_small_lattice() {
    let base = ModelSpec::new(16, HoppingMode::NearestNeighbour, 3.0, 0.0).unwrap();
    let gamma = |v: f64| {
        let h = nn_mode_hamiltonian(&base.clone().with_v_over_t(v)).unwrap();
        let d = eigendecompose(&h).unwrap();
        pair_correlations(&evolve(&d, &PairState::localized(h.basis, 7, 8).unwrap(), 3.0).unwrap())
    };
    for v in [0.5, 3.0, 12.0] {
        assert!(gamma(v).max_abs_diff(&gamma(-v)) <= 1e-10);
    }
}

#[test]
fn vacancy_walls_confine_nearest_neighbour_walks() {
    // vacancies at 4 and 11 cut the chain; NN walkers started inside stay in
    // 5..=10, power-law walkers tunnel out
    let nn = ModelSpec::new(16, HoppingMode::NearestNeighbour, 3.0, 1.0)
        .unwrap()
        .with_vacancies([4, 11])
        .unwrap();
    let leak = |spec: &ModelSpec| {
        let h = build_hamiltonian(spec).unwrap();
        let d = eigendecompose(&h).unwrap();
        let psi = evolve(&d, &PairState::localized(h.basis, 7, 8).unwrap(), 25.0).unwrap();
        h.basis
            .pairs()
            .zip(&psi.amplitudes)
            .filter(|((i, j), _)| *i < 5 || *j > 10)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
    };
    assert!(leak(&nn) < 1e-20);
    let dipolar = ModelSpec {
        hopping: HoppingMode::PowerLaw { alpha: 3.0 },
        ..nn
    };
    assert!(leak(&dipolar) > 1e-3);
}
