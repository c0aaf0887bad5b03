//! Dispersion and band edges against direct series summation and dense
//! diagonalization.

use std::f64::consts::PI;

use faer::{Mat, Side};
use hcwalk_core::dispersion::{
    band_edges, cosine_series, single_dispersion, two_particle_spectrum_vs_k, zeta,
};
use hcwalk_core::model::{build_hamiltonian, HoppingMode, ModelSpec};
use hcwalk_core::spectral::eigendecompose;

const A1: HoppingMode = HoppingMode::PowerLaw { alpha: 1.0 };
const A2: HoppingMode = HoppingMode::PowerLaw { alpha: 2.0 };
const A3: HoppingMode = HoppingMode::PowerLaw { alpha: 3.0 };

#[test]
fn dipolar_band_top_is_two_zeta_three() {
    // direct sum to 10⁶, tail below 5e-13
    let direct = 2.0 * cosine_series(0.0, 3.0, 1_000_000);
    let e = single_dispersion(A3, 0.0).unwrap();
    // truncation tail of the implementation is bounded by 1e-10
    assert!((e - direct).abs() < 1e-10 + 1e-12);
    assert!((e - 2.4041).abs() < 1e-4);
    assert!((zeta(3.0).unwrap() * 2.0 - direct).abs() < 1e-11);
}

#[test]
fn inverse_square_band_bottom() {
    let e = single_dispersion(A2, PI).unwrap();
    assert!((e + PI * PI / 6.0).abs() < 1e-14);
    // alternating series: average two consecutive partial sums
    let a = cosine_series(PI, 2.0, 1_000_000);
    let b = cosine_series(PI, 2.0, 1_000_001);
    assert!((2.0 * 0.5 * (a + b) - e).abs() < 1e-11);
    assert!((e + 1.6449).abs() < 1e-4);
}

#[test]
fn inverse_square_closed_form_matches_series_away_from_edges() {
    for k in [0.3, 1.0, 2.0, 2.9] {
        let series = 2.0 * cosine_series(k, 2.0, 2_000_000);
        // oscillatory tail is bounded by ~1/(R² sin(k/2))
        assert!(
            (single_dispersion(A2, k).unwrap() - series).abs() < 1e-9,
            "k={k}"
        );
    }
}

#[test]
fn long_range_series_agrees_with_logarithm() {
    for step in 0..=10 {
        let k = 0.1 + (PI - 0.1) * step as f64 / 10.0;
        let series = 2.0 * cosine_series(k, 1.0, 10_000_000);
        let closed = single_dispersion(A1, k).unwrap();
        assert!(
            (series - closed).abs() < 1e-5,
            "k={k}: {series} vs {closed}"
        );
    }
}

#[test]
fn generic_exponent_uses_series() {
    let alpha = 2.5;
    let e = single_dispersion(HoppingMode::PowerLaw { alpha }, 0.0).unwrap();
    assert!((e - 2.0 * zeta(alpha).unwrap()).abs() < 1e-9);
}

#[test]
fn edges_match_dense_momentum_grid() {
    for mode in [
        A2,
        A3,
        HoppingMode::PowerLaw { alpha: 4.0 },
        HoppingMode::NearestNeighbour,
    ] {
        let edges = band_edges(mode).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for m in 0..=400 {
            let k = PI * m as f64 / 400.0;
            let e = single_dispersion(mode, k).unwrap();
            lo = lo.min(e);
            hi = hi.max(e);
        }
        assert!((lo - edges.single_min).abs() < 1e-9, "{mode:?}");
        assert!((hi - edges.single_max).abs() < 1e-9, "{mode:?}");
    }
}

fn ring_dense(spec: &ModelSpec) -> Vec<f64> {
    // dense ring Hamiltonian from the pair basis, built without orbits
    let n = spec.n_sites;
    let ring = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d.min(n - d)
    };
    let basis = spec.basis();
    let pairs: Vec<_> = basis.pairs().collect();
    let mut h = Mat::<f64>::zeros(pairs.len(), pairs.len());
    for (x, &(i, j)) in pairs.iter().enumerate() {
        for (y, &(k, l)) in pairs.iter().enumerate() {
            let value = if x == y {
                spec.v_over_t / (ring(i, j) as f64).powf(spec.beta)
            } else {
                let mut shared = vec![];
                let mut a_only = vec![];
                for s in [i, j] {
                    if s == k || s == l {
                        shared.push(s)
                    } else {
                        a_only.push(s)
                    }
                }
                let b_only: Vec<_> = [k, l].into_iter().filter(|s| *s != i && *s != j).collect();
                if shared.len() == 1 {
                    spec.hopping.amplitude_at(ring(a_only[0], b_only[0]))
                } else {
                    0.0
                }
            };
            h[(x, y)] = value;
        }
    }
    let evd = h.self_adjoint_eigen(Side::Lower).unwrap();
    evd.S().column_vector().iter().copied().collect()
}

#[test]
fn bloch_blocks_reproduce_dense_ring_spectrum() {
    for (n, mode, v) in [
        (9, A3, 1.5),
        (10, A1, -2.0),
        (12, HoppingMode::NearestNeighbour, 3.0),
    ] {
        let spec = ModelSpec::new(n, mode, 1.0, v).unwrap();
        let mut blocks: Vec<f64> = two_particle_spectrum_vs_k(&spec)
            .unwrap()
            .iter()
            .map(|l| l.energy)
            .collect();
        blocks.sort_by(f64::total_cmp);
        let dense = ring_dense(&spec);
        assert_eq!(blocks.len(), dense.len());
        for (a, b) in blocks.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-10, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn nearest_neighbour_zero_momentum_band() {
    let spec = ModelSpec::new(40, HoppingMode::NearestNeighbour, 3.0, 0.0).unwrap();
    let levels = two_particle_spectrum_vs_k(&spec).unwrap();
    let k0: Vec<f64> = levels
        .iter()
        .filter(|l| l.total_momentum == 0.0)
        .map(|l| l.energy)
        .collect();
    assert!(!k0.is_empty());
    assert!(k0.iter().all(|e| e.abs() <= 4.0 + 1e-12));
    // E = 2(cos k1 + cos k2) with k2 = -k1 reaches close to ±4
    let max = k0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(max > 3.9);
    assert!(levels
        .iter()
        .all(|l| l.total_momentum > -PI && l.total_momentum <= PI));
}

#[test]
fn ring_edges_converge_to_analytic_edges() {
    let edges = band_edges(A3).unwrap();
    let extremes = |n: usize| {
        let spec = ModelSpec::new(n, A3, 3.0, 0.0).unwrap();
        let levels = two_particle_spectrum_vs_k(&spec).unwrap();
        levels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
                (lo.min(l.energy), hi.max(l.energy))
            })
    };
    let (lo40, hi40) = extremes(40);
    let (lo80, hi80) = extremes(80);
    let err40 = (hi40 - edges.two_particle_max)
        .abs()
        .max((lo40 - edges.two_particle_min).abs());
    let err80 = (hi80 - edges.two_particle_max)
        .abs()
        .max((lo80 - edges.two_particle_min).abs());
    assert!(err80 < err40, "{err80} vs {err40}");
    assert!(err40 < 10.0 / 40.0);
    assert!((hi80 - 4.80).abs() < 0.1);
}

#[test]
fn open_chain_spectrum_within_analytic_edges() {
    for (mode, n) in [(A3, 40), (A2, 40), (HoppingMode::NearestNeighbour, 40)] {
        let edges = band_edges(mode).unwrap();
        let spec = ModelSpec::new(n, mode, 3.0, 0.0).unwrap();
        let d = eigendecompose(&build_hamiltonian(&spec).unwrap()).unwrap();
        let tol = 10.0 / n as f64;
        assert!(d.energies[0] >= edges.two_particle_min - tol, "{mode:?}");
        assert!(
            *d.energies.last().unwrap() <= edges.two_particle_max + tol,
            "{mode:?}"
        );
    }
}
