//! Squared correlators, order parameters, entropies and site classes.
//!
//! `⟨X_αX_β⟩² = 1` iff `X_αX_β` commutes with every Z-generator, i.e. iff
//! sites `α` and `β` have identical columns in the Z sector. Grouping the
//! columns once per state turns every two-point query into a label
//! comparison. `⟨Y_αY_β⟩²` is the product of the X and Z results.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::ColumnClasses;
use crate::lattice::{Direction, LatticeSpec};
use crate::tableau::{Basis, SectorTableau};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Column-class view of a tableau answering two-point queries in O(1).
#[derive(Clone, Debug)]
pub struct Correlations {
    /// Z-sector classes: equal labels ⇔ X-correlated.
    x_corr: ColumnClasses,
    /// X-sector classes: equal labels ⇔ Z-correlated.
    z_corr: ColumnClasses,
}

impl Correlations {
    pub fn new(t: &SectorTableau) -> Self {
        Self { x_corr: t.column_classes(Basis::Z), z_corr: t.column_classes(Basis::X) }
    }

    /// Classes whose members are mutually correlated in `basis`.
    pub fn classes(&self, basis: Basis) -> &ColumnClasses {
        match basis {
            Basis::X => &self.x_corr,
            Basis::Z => &self.z_corr,
        }
    }

    /// `⟨P_αP_β⟩²` for `α ≠ β`; always 0 or 1.
    #[inline]
    pub fn two_point_sq(&self, a: usize, b: usize, pauli: Pauli) -> u8 {
        let x = self.x_corr.same(a, b);
        let z = self.z_corr.same(a, b);
        let hit = match pauli {
            Pauli::X => x,
            Pauli::Z => z,
            Pauli::Y => x && z,
        };
        hit as u8
    }
}

/// `⟨P_αP_β⟩²` straight from commutation with the generators, without
/// building column classes.
pub fn two_point_sq(t: &SectorTableau, a: usize, b: usize, pauli: Pauli) -> Result<u8> {
    if a == b {
        return Err(Error::SameSite);
    }
    let n = t.n_sites();
    if a >= n || b >= n {
        return Err(Error::SiteOutOfRange { site: a.max(b), n_sites: n });
    }
    let commutes = |sector: Basis| t.rows(sector).iter().all(|r| !r.pair_parity(a, b));
    let x = commutes(Basis::Z);
    let z = commutes(Basis::X);
    Ok(match pauli {
        Pauli::X => x,
        Pauli::Z => z,
        Pauli::Y => x && z,
    } as u8)
}

/// Spatial average of squared correlators at separation `delta` along
/// `direction`. Open boundaries average over the pairs that exist.
fn separation_average(
    corr: &Correlations,
    spec: &LatticeSpec,
    pauli: Pauli,
    direction: Direction,
    delta: usize,
) -> f64 {
    let mut hits = 0usize;
    let mut pairs = 0usize;
    for a in 0..spec.n_sites() {
        if let Some(b) = spec.shift(a, direction, delta) {
            pairs += 1;
            hits += corr.two_point_sq(a, b, pauli) as usize;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        hits as f64 / pairs as f64
    }
}

/// Long-range order parameter: squared correlator at separation `L/2`,
/// averaged over all sites.
pub fn long_range_order(corr: &Correlations, spec: &LatticeSpec, pauli: Pauli, direction: Direction) -> f64 {
    separation_average(corr, spec, pauli, direction, spec.l() / 2)
}

/// Correlation profile for `δ = 1..=L/2`; `values[δ − 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationProfile {
    pub pauli: Pauli,
    pub direction: Direction,
    pub values: Vec<f64>,
}

impl CorrelationProfile {
    /// `(δ, value)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, &v)| (k + 1, v))
    }
}

pub fn correlation_profile(
    corr: &Correlations,
    spec: &LatticeSpec,
    pauli: Pauli,
    direction: Direction,
) -> CorrelationProfile {
    let values = (1..=spec.l() / 2).map(|d| separation_average(corr, spec, pauli, direction, d)).collect();
    CorrelationProfile { pauli, direction, values }
}

/// Second Rényi entropy of `cut` in bits (equal to every Rényi entropy for
/// a stabilizer state).
pub fn entanglement_entropy_bits(t: &SectorTableau, cut: &[usize]) -> usize {
    if cut.is_empty() {
        return 0;
    }
    t.restricted_rank(cut) - cut.len()
}

/// `I(α:β) = S_α + S_β − S_{αβ}` in bits.
pub fn mutual_information_bits(t: &SectorTableau, a: usize, b: usize) -> Result<usize> {
    if a == b {
        return Err(Error::SameSite);
    }
    let s = |sites: &[usize]| entanglement_entropy_bits(t, sites);
    Ok(s(&[a]) + s(&[b]) - s(&[a, b]))
}

/// Edwards-Anderson average: mean squared correlator over all unordered
/// pairs of `sites`.
pub fn edwards_anderson(corr: &Correlations, pauli: Pauli, sites: &[usize]) -> Result<f64> {
    if sites.len() < 2 {
        return Err(Error::TooFewSites { need: 2, got: sites.len() });
    }
    let basis_labels = |b: Basis| corr.classes(b).labels();
    // Count correlated pairs per class instead of looping over pairs.
    let count_pairs = |labels: &[u32], other: Option<&[u32]>| -> usize {
        let mut counts = std::collections::HashMap::<(u32, u32), usize>::new();
        for &s in sites {
            let key = (labels[s], other.map_or(0, |o| o[s]));
            *counts.entry(key).or_default() += 1;
        }
        counts.values().map(|&c| c * (c - 1) / 2).sum()
    };
    let hits = match pauli {
        Pauli::X => count_pairs(basis_labels(Basis::X), None),
        Pauli::Z => count_pairs(basis_labels(Basis::Z), None),
        Pauli::Y => count_pairs(basis_labels(Basis::X), Some(basis_labels(Basis::Z))),
    };
    let n = sites.len();
    Ok(hits as f64 / (n * (n - 1) / 2) as f64)
}

/// Per-site label for snapshots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SiteClass {
    /// No short-range Z-generator passes through the site.
    XSite,
    /// No short-range X-generator passes through the site.
    ZSite,
    Gray,
    /// Both conditions; at most a couple of such sites exist.
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnapshotGrid {
    pub l: usize,
    /// Row-major, `classes[i·L + j]`.
    pub classes: Vec<SiteClass>,
}

impl SnapshotGrid {
    pub fn get(&self, i: usize, j: usize) -> SiteClass {
        self.classes[i * self.l + j]
    }

    fn fraction(&self, pred: impl Fn(SiteClass) -> bool) -> f64 {
        self.classes.iter().filter(|&&c| pred(c)).count() as f64 / self.classes.len() as f64
    }

    /// Fraction of X-sites (sites labelled `Both` count).
    pub fn x_site_density(&self) -> f64 {
        self.fraction(|c| matches!(c, SiteClass::XSite | SiteClass::Both))
    }

    pub fn z_site_density(&self) -> f64 {
        self.fraction(|c| matches!(c, SiteClass::ZSite | SiteClass::Both))
    }
}

/// Marks the sites belonging to classes of at least two members whose
/// diameter reaches `L/2`.
fn macroscopic_members(classes: &ColumnClasses, spec: &LatticeSpec) -> Vec<bool> {
    let threshold = spec.l() / 2;
    let mut out = vec![false; spec.n_sites()];
    for members in classes.members() {
        if members.len() < 2 {
            continue;
        }
        let wide = members
            .iter()
            .enumerate()
            .any(|(k, &a)| members[k + 1..].iter().any(|&b| spec.distance(a, b) >= threshold));
        if wide {
            for m in members {
                out[m] = true;
            }
        }
    }
    out
}

/// Classifies every site as X-site, Z-site, both or gray.
///
/// A class of the Z-sector column partition is macroscopic when two of its
/// members are at least `L/2` apart; its members are X-sites. Z-sites come
/// from the X-sector partition in the same way.
pub fn classify_sites(corr: &Correlations, spec: &LatticeSpec) -> SnapshotGrid {
    let xs = macroscopic_members(corr.classes(Basis::X), spec);
    let zs = macroscopic_members(corr.classes(Basis::Z), spec);
    let classes = xs
        .iter()
        .zip(&zs)
        .map(|(&x, &z)| match (x, z) {
            (true, true) => SiteClass::Both,
            (true, false) => SiteClass::XSite,
            (false, true) => SiteClass::ZSite,
            (false, false) => SiteClass::Gray,
        })
        .collect();
    SnapshotGrid { l: spec.l(), classes }
}

/// All six correlation profiles of a state, each of length `L/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    pub x_row: Vec<f64>,
    pub x_col: Vec<f64>,
    pub y_row: Vec<f64>,
    pub y_col: Vec<f64>,
    pub z_row: Vec<f64>,
    pub z_col: Vec<f64>,
}

impl Profiles {
    pub fn zeros(len: usize) -> Self {
        let z = vec![0.0; len];
        Self { x_row: z.clone(), x_col: z.clone(), y_row: z.clone(), y_col: z.clone(), z_row: z.clone(), z_col: z }
    }

    pub fn get(&self, pauli: Pauli, direction: Direction) -> &[f64] {
        match (pauli, direction) {
            (Pauli::X, Direction::Row) => &self.x_row,
            (Pauli::X, Direction::Column) => &self.x_col,
            (Pauli::Y, Direction::Row) => &self.y_row,
            (Pauli::Y, Direction::Column) => &self.y_col,
            (Pauli::Z, Direction::Row) => &self.z_row,
            (Pauli::Z, Direction::Column) => &self.z_col,
        }
    }

    pub fn all(&self) -> [&Vec<f64>; 6] {
        [&self.x_row, &self.x_col, &self.y_row, &self.y_col, &self.z_row, &self.z_col]
    }

    pub fn all_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [&mut self.x_row, &mut self.x_col, &mut self.y_row, &mut self.y_col, &mut self.z_row, &mut self.z_col]
    }
}

/// Scalar observables in a fixed order, for aggregation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Xr,
    Xc,
    Zr,
    Zc,
    Yr,
    Yc,
    EntropyBits,
    XSiteDensity,
    ZSiteDensity,
}

impl Scalar {
    pub const ALL: [Scalar; 9] = [
        Scalar::Xr,
        Scalar::Xc,
        Scalar::Zr,
        Scalar::Zc,
        Scalar::Yr,
        Scalar::Yc,
        Scalar::EntropyBits,
        Scalar::XSiteDensity,
        Scalar::ZSiteDensity,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&s| s == self).unwrap()
    }
}

/// Observables of one state, or a time average of several.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub xr: f64,
    pub xc: f64,
    pub zr: f64,
    pub zc: f64,
    pub yr: f64,
    pub yc: f64,
    /// Vertical half-cut entropy in bits.
    pub entropy_bits: f64,
    pub x_site_density: f64,
    pub z_site_density: f64,
    pub profiles: Profiles,
}

impl ObservableRecord {
    pub fn zeros(l: usize) -> Self {
        Self {
            xr: 0.0,
            xc: 0.0,
            zr: 0.0,
            zc: 0.0,
            yr: 0.0,
            yc: 0.0,
            entropy_bits: 0.0,
            x_site_density: 0.0,
            z_site_density: 0.0,
            profiles: Profiles::zeros(l / 2),
        }
    }

    pub fn scalar(&self, s: Scalar) -> f64 {
        match s {
            Scalar::Xr => self.xr,
            Scalar::Xc => self.xc,
            Scalar::Zr => self.zr,
            Scalar::Zc => self.zc,
            Scalar::Yr => self.yr,
            Scalar::Yc => self.yc,
            Scalar::EntropyBits => self.entropy_bits,
            Scalar::XSiteDensity => self.x_site_density,
            Scalar::ZSiteDensity => self.z_site_density,
        }
    }

    fn scalar_mut(&mut self, s: Scalar) -> &mut f64 {
        match s {
            Scalar::Xr => &mut self.xr,
            Scalar::Xc => &mut self.xc,
            Scalar::Zr => &mut self.zr,
            Scalar::Zc => &mut self.zc,
            Scalar::Yr => &mut self.yr,
            Scalar::Yc => &mut self.yc,
            Scalar::EntropyBits => &mut self.entropy_bits,
            Scalar::XSiteDensity => &mut self.x_site_density,
            Scalar::ZSiteDensity => &mut self.z_site_density,
        }
    }

    /// `self += other`, field by field.
    pub fn accumulate(&mut self, other: &ObservableRecord) {
        for s in Scalar::ALL {
            *self.scalar_mut(s) += other.scalar(s);
        }
        for (dst, src) in self.profiles.all_mut().into_iter().zip(other.profiles.all()) {
            for (d, v) in dst.iter_mut().zip(src) {
                *d += v;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for s in Scalar::ALL {
            *self.scalar_mut(s) *= factor;
        }
        for dst in self.profiles.all_mut() {
            dst.iter_mut().for_each(|d| *d *= factor);
        }
    }

    /// Mean of a non-empty slice of records.
    pub fn mean(records: &[ObservableRecord]) -> Option<ObservableRecord> {
        let first = records.first()?;
        let mut acc = ObservableRecord::zeros(first.profiles.x_row.len() * 2);
        for r in records {
            acc.accumulate(r);
        }
        acc.scale(1.0 / records.len() as f64);
        Some(acc)
    }

    /// Which of the two perpendicular profiles a row/column pair maps to.
    pub fn profile(&self, pauli: Pauli, direction: Direction) -> CorrelationProfile {
        CorrelationProfile { pauli, direction, values: self.profiles.get(pauli, direction).to_vec() }
    }
}

/// Evaluates every observable on one state.
pub fn measure_all(t: &SectorTableau, spec: &LatticeSpec, cut: &[usize]) -> ObservableRecord {
    let corr = Correlations::new(t);
    let lro = |p, d| long_range_order(&corr, spec, p, d);
    let prof = |p, d| correlation_profile(&corr, spec, p, d).values;
    let grid = classify_sites(&corr, spec);
    ObservableRecord {
        xr: lro(Pauli::X, Direction::Row),
        xc: lro(Pauli::X, Direction::Column),
        zr: lro(Pauli::Z, Direction::Row),
        zc: lro(Pauli::Z, Direction::Column),
        yr: lro(Pauli::Y, Direction::Row),
        yc: lro(Pauli::Y, Direction::Column),
        entropy_bits: entanglement_entropy_bits(t, cut) as f64,
        x_site_density: grid.x_site_density(),
        z_site_density: grid.z_site_density(),
        profiles: Profiles {
            x_row: prof(Pauli::X, Direction::Row),
            x_col: prof(Pauli::X, Direction::Column),
            y_row: prof(Pauli::Y, Direction::Row),
            y_col: prof(Pauli::Y, Direction::Column),
            z_row: prof(Pauli::Z, Direction::Row),
            z_col: prof(Pauli::Z, Direction::Column),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitRow;
    use crate::lattice::{initial_tableau, Boundary, CheckSampler, Lattice, MixChances};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(l: usize) -> LatticeSpec {
        LatticeSpec::new(l, Boundary::Periodic).unwrap()
    }

    fn evolved(l: usize, p1: f64, p2: f64, steps: usize, seed: u64) -> (LatticeSpec, SectorTableau) {
        let s = spec(l);
        let lat = Lattice::new(s);
        let sampler = CheckSampler::new(&MixChances::new(p1, p2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = initial_tableau(&s).unwrap();
        for _ in 0..steps {
            let c = lat.sample_check(&sampler, &mut rng);
            t.measure_pair(c.basis(), c.a, c.b);
        }
        (s, t)
    }

    #[test]
    fn initial_state_correlations() {
        let s = spec(6);
        let t = initial_tableau(&s).unwrap();
        let corr = Correlations::new(&t);
        assert_eq!(corr.two_point_sq(s.site(0, 2), s.site(4, 2), Pauli::Z), 1);
        assert_eq!(corr.two_point_sq(s.site(0, 2), s.site(0, 3), Pauli::Z), 0);
        assert_eq!(corr.two_point_sq(s.site(0, 2), s.site(0, 3), Pauli::X), 0);
        assert_eq!(long_range_order(&corr, &s, Pauli::Z, Direction::Column), 1.0);
        let prof = correlation_profile(&corr, &s, Pauli::Z, Direction::Column);
        assert_eq!(prof.values, vec![1.0; 3]);
        assert!(two_point_sq(&t, 1, 1, Pauli::X).is_err());
    }

    #[test]
    fn initial_state_entropies() {
        let s = spec(8);
        let t = initial_tableau(&s).unwrap();
        assert_eq!(entanglement_entropy_bits(&t, &s.left_half()), 0);
        assert_eq!(entanglement_entropy_bits(&t, &s.top_half()), 8);
        assert_eq!(mutual_information_bits(&t, s.site(1, 3), s.site(6, 3)).unwrap(), 1);
        assert_eq!(mutual_information_bits(&t, s.site(1, 3), s.site(1, 4)).unwrap(), 0);
        assert!(mutual_information_bits(&t, 2, 2).is_err());
    }

    #[test]
    fn bell_pair_single_site_entropy() {
        let t = SectorTableau::from_rows(2, vec![BitRow::from_sites(2, &[0, 1])], vec![BitRow::from_sites(2, &[0, 1])])
            .unwrap();
        assert_eq!(entanglement_entropy_bits(&t, &[0]), 1);
    }

    #[test]
    fn edwards_anderson_on_initial_state() {
        let s = spec(6);
        let t = initial_tableau(&s).unwrap();
        let corr = Correlations::new(&t);
        let column: Vec<usize> = (0..6).map(|i| s.site(i, 1)).collect();
        assert_eq!(edwards_anderson(&corr, Pauli::Z, &column).unwrap(), 1.0);
        let all: Vec<usize> = (0..36).collect();
        assert_eq!(edwards_anderson(&corr, Pauli::X, &all).unwrap(), 0.0);
        assert!(edwards_anderson(&corr, Pauli::X, &[3]).is_err());
    }

    #[test]
    fn edwards_anderson_matches_pair_loop() {
        for (p1, p2, seed) in [(0.5, 0.0, 1), (0.5, 0.5, 2), (0.3, 0.2, 3)] {
            let (s, t) = evolved(6, p1, p2, 600, seed);
            let corr = Correlations::new(&t);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let subset: Vec<usize> = (0..s.n_sites()).filter(|_| rng.gen_bool(0.6)).collect();
            for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
                let mut hits = 0;
                let mut pairs = 0;
                for (k, &a) in subset.iter().enumerate() {
                    for &b in &subset[k + 1..] {
                        hits += two_point_sq(&t, a, b, pauli).unwrap() as usize;
                        pairs += 1;
                    }
                }
                let ea = edwards_anderson(&corr, pauli, &subset).unwrap();
                assert!((ea - hits as f64 / pairs as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn class_route_matches_commutation_route() {
        for (p1, p2, seed) in [(0.5, 0.0, 4), (0.5, 0.5, 5), (0.2, 0.7, 6)] {
            let (s, t) = evolved(8, p1, p2, 1000, seed);
            let corr = Correlations::new(&t);
            for a in 0..s.n_sites() {
                for b in a + 1..s.n_sites() {
                    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                        assert_eq!(corr.two_point_sq(a, b, p), two_point_sq(&t, a, b, p).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn mutual_information_identity_on_random_pairs() {
        let (s, t) = evolved(8, 0.5, 0.5, 2000, 9);
        let corr = Correlations::new(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let a = rng.gen_range(0..s.n_sites());
            let b = (a + 1 + rng.gen_range(0..s.n_sites() - 1)) % s.n_sites();
            let expect = corr.two_point_sq(a, b, Pauli::X) + corr.two_point_sq(a, b, Pauli::Z);
            assert_eq!(mutual_information_bits(&t, a, b).unwrap(), expect as usize);
        }
    }

    #[test]
    fn entropy_of_complement_matches() {
        let (s, t) = evolved(8, 0.5, 0.3, 3000, 12);
        let cut = s.left_half();
        let rest: Vec<usize> = (0..s.n_sites()).filter(|k| !cut.contains(k)).collect();
        let sa = entanglement_entropy_bits(&t, &cut);
        assert_eq!(sa, entanglement_entropy_bits(&t, &rest));
        assert!(sa <= cut.len().min(rest.len()));
    }

    #[test]
    fn x_sites_are_mutually_x_correlated() {
        for (p1, p2, seed) in [(0.5, 0.5, 1), (0.25, 0.5, 2), (0.5, 0.02, 3), (0.25, 0.0, 4)] {
            let (s, t) = evolved(12, p1, p2, 20 * 144, seed);
            let corr = Correlations::new(&t);
            let grid = classify_sites(&corr, &s);
            let xs: Vec<usize> = (0..s.n_sites())
                .filter(|&k| matches!(grid.classes[k], SiteClass::XSite | SiteClass::Both))
                .collect();
            if p2 != 0.0 {
                for (k, &a) in xs.iter().enumerate() {
                    for &b in &xs[k + 1..] {
                        assert_eq!(corr.two_point_sq(a, b, Pauli::X), 1, "mix ({p1},{p2})");
                    }
                }
            }
        }
    }

    #[test]
    fn p2_zero_forbids_cross_row_x_and_cross_column_z() {
        let (s, t) = evolved(8, 0.5, 0.0, 3000, 21);
        let corr = Correlations::new(&t);
        for a in 0..s.n_sites() {
            for b in a + 1..s.n_sites() {
                let ((ai, aj), (bi, bj)) = (s.coords(a), s.coords(b));
                if ai != bi {
                    assert_eq!(corr.two_point_sq(a, b, Pauli::X), 0);
                }
                if aj != bj {
                    assert_eq!(corr.two_point_sq(a, b, Pauli::Z), 0);
                }
            }
        }
        assert_eq!(long_range_order(&corr, &s, Pauli::X, Direction::Column), 0.0);
    }
}
