//! Two-particle Hamiltonian with power-law hopping, power-law interactions
//! and vacancy disorder.
//!
//! Energies are in units of the hopping scale `t`, which is fixed to 1.
//! Vacant sites stay in the basis. Every hopping amplitude touching a vacancy
//! is zero, while the pair interaction is left untouched. Walks started on
//! occupied sites never reach a vacancy.

use std::collections::BTreeSet;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::basis::PairBasis;
use crate::error::{invalid, Result};

/// The energy unit. All energies are multiples of `t`, all times of `1/t`.
pub const HOPPING_SCALE: f64 = 1.0;

/// Range of the single-particle hopping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum HoppingMode {
    /// `t` between adjacent sites only.
    NearestNeighbour,
    /// `t / |i - j|^alpha` between every pair of sites.
    PowerLaw { alpha: f64 },
}

impl HoppingMode {
    /// Amplitude between two sites a distance `distance >= 1` apart.
    #[inline]
    pub fn amplitude_at(&self, distance: usize) -> f64 {
        match *self {
            HoppingMode::NearestNeighbour => {
                if distance == 1 {
                    HOPPING_SCALE
                } else {
                    0.0
                }
            }
            HoppingMode::PowerLaw { alpha } => HOPPING_SCALE / (distance as f64).powf(alpha),
        }
    }

    /// The exponent, or `None` for nearest-neighbour hopping.
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            HoppingMode::NearestNeighbour => None,
            HoppingMode::PowerLaw { alpha } => Some(alpha),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            HoppingMode::NearestNeighbour => "nn".to_string(),
            HoppingMode::PowerLaw { alpha } => format!("{alpha}"),
        }
    }
}

/// Everything that determines the Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n_sites: usize,
    pub hopping: HoppingMode,
    /// Interaction exponent.
    pub beta: f64,
    /// Interaction strength in units of `t`; negative is attractive.
    pub v_over_t: f64,
    /// Vacant sites (0-based).
    pub vacancies: BTreeSet<usize>,
}

impl ModelSpec {
    pub fn new(n_sites: usize, hopping: HoppingMode, beta: f64, v_over_t: f64) -> Result<Self> {
        let spec = Self {
            n_sites,
            hopping,
            beta,
            v_over_t,
            vacancies: BTreeSet::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_vacancies<I: IntoIterator<Item = usize>>(mut self, vacancies: I) -> Result<Self> {
        self.vacancies = vacancies.into_iter().collect();
        self.validate()?;
        Ok(self)
    }

    pub fn with_v_over_t(mut self, v_over_t: f64) -> Self {
        self.v_over_t = v_over_t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(invalid!("need at least 2 sites, got {}", self.n_sites));
        }
        if let HoppingMode::PowerLaw { alpha } = self.hopping {
            if !(alpha >= 1.0 && alpha.is_finite()) {
                return Err(invalid!(
                    "hopping exponent must be finite and >= 1, got {alpha}"
                ));
            }
        }
        if !(self.beta >= 1.0 && self.beta.is_finite()) {
            return Err(invalid!(
                "interaction exponent must be finite and >= 1, got {}",
                self.beta
            ));
        }
        if !self.v_over_t.is_finite() {
            return Err(invalid!("interaction strength must be finite"));
        }
        if let Some(&q) = self.vacancies.iter().next_back() {
            if q >= self.n_sites {
                return Err(invalid!(
                    "vacancy {q} outside lattice of {} sites",
                    self.n_sites
                ));
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> PairBasis {
        PairBasis::new(self.n_sites).expect("validated spec has n_sites >= 2")
    }

    #[inline]
    pub fn is_vacant(&self, site: usize) -> bool {
        self.vacancies.contains(&site)
    }

    /// Sites that are not vacant, ascending.
    pub fn occupied_sites(&self) -> Vec<usize> {
        (0..self.n_sites).filter(|s| !self.is_vacant(*s)).collect()
    }

    /// Same model with nearest-neighbour hopping.
    pub fn to_nearest_neighbour(&self) -> Self {
        Self {
            hopping: HoppingMode::NearestNeighbour,
            ..self.clone()
        }
    }
}

/// Hopping amplitude between sites `i` and `j`; zero if either is vacant.
pub fn hop_amplitude(spec: &ModelSpec, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(invalid!(
            "hopping amplitude needs two distinct sites, got {i} twice"
        ));
    }
    if spec.is_vacant(i) || spec.is_vacant(j) {
        return Ok(0.0);
    }
    Ok(spec.hopping.amplitude_at(i.abs_diff(j)))
}

/// Pair interaction `v / |i - j|^beta`. Vacancies do not screen it.
pub fn interaction_strength(spec: &ModelSpec, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(invalid!(
            "interaction needs two distinct sites, got {i} twice"
        ));
    }
    Ok(interaction_at(spec, i.abs_diff(j)))
}

#[inline]
fn interaction_at(spec: &ModelSpec, distance: usize) -> f64 {
    spec.v_over_t * HOPPING_SCALE / (distance as f64).powf(spec.beta)
}

/// Dense real symmetric Hamiltonian over a [`PairBasis`].
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub basis: PairBasis,
    pub entries: Mat<f64>,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[(a, b)]
    }

    /// Entry between the canonical pairs `(i, j)` and `(k, l)`.
    pub fn element(&self, bra: (usize, usize), ket: (usize, usize)) -> Result<f64> {
        let a = self.basis.rank(bra.0, bra.1)?;
        let b = self.basis.rank(ket.0, ket.1)?;
        Ok(self.entries[(a, b)])
    }
}

/// Builds the Hamiltonian for the spec's hopping mode.
pub fn build_hamiltonian(spec: &ModelSpec) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    let sites: Vec<usize> = (0..spec.n_sites).collect();
    let (basis, entries) = assemble(spec, &sites);
    Ok(HamiltonianMatrix { basis, entries })
}

/// Same as [`build_hamiltonian`] with hopping restricted to adjacent sites.
pub fn nn_mode_hamiltonian(spec: &ModelSpec) -> Result<HamiltonianMatrix> {
    build_hamiltonian(&spec.to_nearest_neighbour())
}

/// Fills the pair Hamiltonian over the lattice positions in `sites`.
///
/// Pair `(a, b)` of the returned basis refers to positions `sites[a] <
/// sites[b]`. Every connection is written from the single expression
/// `hopping.amplitude_at(distance)`, once from each end, so the matrix is
/// exactly symmetric.
fn assemble(spec: &ModelSpec, sites: &[usize]) -> (PairBasis, Mat<f64>) {
    let n = sites.len();
    let basis = PairBasis::new(n).expect("at least two sites");
    let mut h = Mat::<f64>::zeros(basis.dim(), basis.dim());
    let hop = |a: usize, b: usize| -> f64 {
        let (x, y) = (sites[a], sites[b]);
        if spec.is_vacant(x) || spec.is_vacant(y) {
            0.0
        } else {
            spec.hopping.amplitude_at(x.abs_diff(y))
        }
    };
    for (row, (i, j)) in basis.pairs().enumerate() {
        h[(row, row)] = interaction_at(spec, sites[i].abs_diff(sites[j]));
        for m in 0..n {
            if m == i || m == j {
                continue;
            }
            // particle at i moves to m
            let amp = hop(i, m);
            if amp != 0.0 {
                h[(row, basis.rank_unordered(m, j))] = amp;
            }
            // particle at j moves to m
            let amp = hop(j, m);
            if amp != 0.0 {
                h[(row, basis.rank_unordered(i, m))] = amp;
            }
        }
    }
    (basis, h)
}

/// Hamiltonian restricted to pairs of non-vacant sites.
///
/// A particle on a vacancy can never move, and no particle can hop onto one,
/// so pair states touching a vacancy never couple to pairs of occupied
/// sites. Dynamics started on occupied sites live entirely in this block.
#[derive(Debug, Clone)]
pub struct OccupiedBlock {
    /// Lattice positions of the occupied sites, ascending.
    pub sites: Vec<usize>,
    /// Basis over positions in `sites`.
    pub basis: PairBasis,
    /// Full-lattice basis the block embeds into.
    pub full_basis: PairBasis,
    pub entries: Mat<f64>,
}

impl OccupiedBlock {
    /// Full-basis index of each block basis state.
    pub fn embedding(&self) -> Vec<usize> {
        self.basis
            .pairs()
            .map(|(a, b)| self.full_basis.rank_unchecked(self.sites[a], self.sites[b]))
            .collect()
    }

    /// Block index of the lattice pair `(i, j)` if both sites are occupied.
    pub fn local_index(&self, i: usize, j: usize) -> Option<usize> {
        let a = self.sites.binary_search(&i).ok()?;
        let b = self.sites.binary_search(&j).ok()?;
        if a < b {
            Some(self.basis.rank_unchecked(a, b))
        } else if b < a {
            Some(self.basis.rank_unchecked(b, a))
        } else {
            None
        }
    }
}

pub fn build_occupied_block(spec: &ModelSpec) -> Result<OccupiedBlock> {
    spec.validate()?;
    let sites = spec.occupied_sites();
    if sites.len() < 2 {
        return Err(invalid!("fewer than two occupied sites remain"));
    }
    let (basis, entries) = assemble(spec, &sites);
    Ok(OccupiedBlock {
        sites,
        basis,
        full_basis: spec.basis(),
        entries,
    })
}

/// Matrix element between canonical pairs `(i, j)` and `(k, l)`.
pub fn pair_element(spec: &ModelSpec, bra: (usize, usize), ket: (usize, usize)) -> f64 {
    let (i, j) = bra;
    let (k, l) = ket;
    if bra == ket {
        return interaction_at(spec, i.abs_diff(j));
    }
    // exactly one shared site: the other particle hops
    let (from, to) = if i == k {
        (l, j)
    } else if i == l {
        (k, j)
    } else if j == k {
        (l, i)
    } else if j == l {
        (k, i)
    } else {
        return 0.0;
    };
    if spec.is_vacant(from) || spec.is_vacant(to) {
        0.0
    } else {
        spec.hopping.amplitude_at(from.abs_diff(to))
    }
}

/// The Hamiltonian split into sectors even and odd under the lattice
/// reflection `s -> N - 1 - s`.
///
/// Only defined when the vacancy set is itself reflection symmetric. The two
/// blocks together carry the full spectrum at a quarter of the cost of
/// factorizing the full matrix.
#[derive(Debug, Clone)]
pub struct ReflectionBlocks {
    pub even: Mat<f64>,
    pub odd: Mat<f64>,
}

pub fn reflection_blocks(spec: &ModelSpec) -> Result<ReflectionBlocks> {
    spec.validate()?;
    let n = spec.n_sites;
    let reflect = |s: usize| n - 1 - s;
    if spec.vacancies.iter().any(|&q| !spec.is_vacant(reflect(q))) {
        return Err(invalid!("vacancy set is not reflection symmetric"));
    }
    let mirror = |(i, j): (usize, usize)| (reflect(j), reflect(i));
    // orbit representatives: pairs not exceeding their mirror image
    let mut fixed = Vec::new();
    let mut doublets = Vec::new();
    for p in spec.basis().pairs() {
        let m = mirror(p);
        if m == p {
            fixed.push(p);
        } else if p < m {
            doublets.push((p, m));
        }
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut even_states: Vec<Vec<((usize, usize), f64)>> =
        fixed.iter().map(|&p| vec![(p, 1.0)]).collect();
    even_states.extend(doublets.iter().map(|&(p, m)| vec![(p, s), (m, s)]));
    let odd_states: Vec<Vec<((usize, usize), f64)>> = doublets
        .iter()
        .map(|&(p, m)| vec![(p, s), (m, -s)])
        .collect();
    // distance-indexed amplitudes; powf dominates otherwise
    let hop: Vec<f64> = (0..n)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                spec.hopping.amplitude_at(d)
            }
        })
        .collect();
    let inter: Vec<f64> = (0..n)
        .map(|d| if d == 0 { 0.0 } else { interaction_at(spec, d) })
        .collect();
    let vacant: Vec<bool> = (0..n).map(|q| spec.is_vacant(q)).collect();
    let element = |(i, j): (usize, usize), (k, l): (usize, usize)| -> f64 {
        if (i, j) == (k, l) {
            return inter[j - i];
        }
        let (from, to) = if i == k {
            (l, j)
        } else if i == l {
            (k, j)
        } else if j == k {
            (l, i)
        } else if j == l {
            (k, i)
        } else {
            return 0.0;
        };
        if vacant[from] || vacant[to] {
            0.0
        } else {
            hop[from.abs_diff(to)]
        }
    };
    let block = |states: &[Vec<((usize, usize), f64)>]| {
        let mut h = Mat::<f64>::zeros(states.len(), states.len());
        for (a, u) in states.iter().enumerate() {
            for (b, w) in states.iter().enumerate().skip(a) {
                let mut acc = 0.0;
                for &(x, cx) in u {
                    for &(y, cy) in w {
                        acc += cx * cy * element(x, y);
                    }
                }
                h[(a, b)] = acc;
                h[(b, a)] = acc;
            }
        }
        h
    };
    Ok(ReflectionBlocks {
        even: block(&even_states),
        odd: block(&odd_states),
    })
}
