//! Square-lattice geometry, check sampling and the symmetry catalog.
//!
//! Site `(i, j)` (row `i`, column `j`, both zero-based) has index `i·L + j`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitRow;
use crate::tableau::{Basis, PauliSupport, SectorTableau};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

/// Smallest lattice accepted by [`LatticeSpec::new`].
pub const MIN_L: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    l: usize,
    boundary: Boundary,
}

impl LatticeSpec {
    /// An `L × L` lattice; `L` must be even and at least [`MIN_L`].
    pub fn new(l: usize, boundary: Boundary) -> Result<Self> {
        if !l.is_multiple_of(2) {
            return Err(Error::OddSize(l));
        }
        if l < MIN_L {
            return Err(Error::SizeTooSmall { got: l, min: MIN_L });
        }
        Ok(Self { l, boundary })
    }

    /// Tiny lattices (L = 2 or 3) for cross-checks against the dense
    /// oracle. Odd L is allowed here; [`initial_tableau`] still rejects it.
    pub fn oracle_scale(l: usize, boundary: Boundary) -> Result<Self> {
        if !(2..=3).contains(&l) {
            return Err(Error::SizeTooSmall { got: l, min: 2 });
        }
        Ok(Self { l, boundary })
    }

    #[inline]
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.l * self.l
    }

    #[inline]
    pub fn site(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.l && j < self.l);
        i * self.l + j
    }

    #[inline]
    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site / self.l, site % self.l)
    }

    /// Distance along one axis, wrapped for periodic boundaries.
    #[inline]
    pub fn axis_distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        match self.boundary {
            Boundary::Periodic => d.min(self.l - d),
            Boundary::Open => d,
        }
    }

    /// Manhattan distance between two sites under the boundary rule.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let (ai, aj) = self.coords(a);
        let (bi, bj) = self.coords(b);
        self.axis_distance(ai, bi) + self.axis_distance(aj, bj)
    }

    /// Site reached by moving `delta` steps along `direction`, or `None`
    /// when an open boundary is crossed.
    #[inline]
    pub fn shift(&self, site: usize, direction: Direction, delta: usize) -> Option<usize> {
        let (i, j) = self.coords(site);
        let (i, j) = match direction {
            Direction::Row => (i, j + delta),
            Direction::Column => (i + delta, j),
        };
        match self.boundary {
            Boundary::Periodic => Some(self.site(i % self.l, j % self.l)),
            Boundary::Open if i < self.l && j < self.l => Some(self.site(i, j)),
            Boundary::Open => None,
        }
    }

    /// Image of `site` under a 90° rotation, `(i, j) → (j, L−1−i)`.
    /// Horizontal bonds map to vertical ones and vice versa.
    pub fn rotate90(&self, site: usize) -> usize {
        let (i, j) = self.coords(site);
        self.site(j, self.l - 1 - i)
    }

    /// Vertical half-cut: all sites in the left `L/2` columns.
    pub fn left_half(&self) -> Vec<usize> {
        (0..self.l).flat_map(|i| (0..self.l / 2).map(move |j| (i, j))).map(|(i, j)| self.site(i, j)).collect()
    }

    /// Horizontal half-cut: all sites in the top `L/2` rows.
    pub fn top_half(&self) -> Vec<usize> {
        (0..self.l / 2 * self.l).collect()
    }
}

/// Separation direction for correlators: along a row or along a column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Row,
    Column,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// The four check types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    XxHorizontal,
    XxVertical,
    ZzHorizontal,
    ZzVertical,
}

impl CheckKind {
    pub const ALL: [CheckKind; 4] =
        [CheckKind::XxHorizontal, CheckKind::XxVertical, CheckKind::ZzHorizontal, CheckKind::ZzVertical];

    pub fn basis(self) -> Basis {
        match self {
            CheckKind::XxHorizontal | CheckKind::XxVertical => Basis::X,
            CheckKind::ZzHorizontal | CheckKind::ZzVertical => Basis::Z,
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            CheckKind::XxHorizontal | CheckKind::ZzHorizontal => Orientation::Horizontal,
            CheckKind::XxVertical | CheckKind::ZzVertical => Orientation::Vertical,
        }
    }
}

/// Mixing probabilities `(p1, p2)`.
///
/// `p1` weights ZZ against XX, `p2` weights the "off-code" orientation
/// (XX vertical, ZZ horizontal) against the Bacon-Shor one:
///
/// | check | probability |
/// |---|---|
/// | XX horizontal | (1−p1)(1−p2) |
/// | XX vertical   | (1−p1) p2    |
/// | ZZ horizontal | p1 p2        |
/// | ZZ vertical   | p1 (1−p2)    |
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixChances {
    pub p1: f64,
    pub p2: f64,
}

impl MixChances {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for (name, value) in [("p1", p1), ("p2", p2)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Probability { name, value });
            }
        }
        Ok(Self { p1, p2 })
    }

    /// Probabilities in [`CheckKind::ALL`] order.
    pub fn probabilities(&self) -> [f64; 4] {
        let (p1, p2) = (self.p1, self.p2);
        [(1.0 - p1) * (1.0 - p2), (1.0 - p1) * p2, p1 * p2, p1 * (1.0 - p2)]
    }

    pub fn probability(&self, kind: CheckKind) -> f64 {
        let idx = CheckKind::ALL.iter().position(|&k| k == kind).unwrap();
        self.probabilities()[idx]
    }
}

/// A two-site check on an adjacent pair of sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOp {
    pub kind: CheckKind,
    pub a: usize,
    pub b: usize,
}

impl CheckOp {
    pub fn basis(&self) -> Basis {
        self.kind.basis()
    }

    pub fn orientation(&self) -> Orientation {
        self.kind.orientation()
    }

    pub fn support(&self) -> PauliSupport {
        PauliSupport::pair(self.basis(), self.a, self.b).expect("bond sites are distinct")
    }
}

/// A lattice with its bond tables, ready for sampling.
#[derive(Clone, Debug)]
pub struct Lattice {
    spec: LatticeSpec,
    horizontal: Vec<(usize, usize)>,
    vertical: Vec<(usize, usize)>,
}

impl Lattice {
    pub fn new(spec: LatticeSpec) -> Self {
        let (horizontal, vertical) = bonds(&spec);
        Self { spec, horizontal, vertical }
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn bonds(&self, orientation: Orientation) -> &[(usize, usize)] {
        match orientation {
            Orientation::Horizontal => &self.horizontal,
            Orientation::Vertical => &self.vertical,
        }
    }

    /// Draws a check: type from `mix`, bond uniform within its orientation.
    pub fn sample_check<R: Rng + ?Sized>(&self, sampler: &CheckSampler, rng: &mut R) -> CheckOp {
        let kind = sampler.draw(rng);
        let bonds = self.bonds(kind.orientation());
        let (a, b) = bonds[rng.gen_range(0..bonds.len())];
        CheckOp { kind, a, b }
    }
}

/// Precomputed cumulative distribution over [`CheckKind`]s.
#[derive(Clone, Debug)]
pub struct CheckSampler {
    cumulative: [f64; 4],
    fallback: CheckKind,
}

impl CheckSampler {
    pub fn new(mix: &MixChances) -> Self {
        let probs = mix.probabilities();
        let mut cumulative = [0.0; 4];
        let mut acc = 0.0;
        for (c, p) in cumulative.iter_mut().zip(probs) {
            acc += p;
            *c = acc;
        }
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Self { cumulative, fallback: CheckKind::ALL[last] }
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CheckKind {
        let u: f64 = rng.gen();
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .map_or(self.fallback, |k| CheckKind::ALL[k])
    }
}

/// Horizontal and vertical bonds. Periodic: `L²` each; open: `L(L−1)` each.
/// Nearest-neighbour site pair.
pub type Bond = (usize, usize);

pub fn bonds(spec: &LatticeSpec) -> (Vec<Bond>, Vec<Bond>) {
    let l = spec.l();
    let span = match spec.boundary() {
        Boundary::Periodic => l,
        Boundary::Open => l - 1,
    };
    let mut horizontal = Vec::with_capacity(l * span);
    let mut vertical = Vec::with_capacity(l * span);
    for i in 0..l {
        for j in 0..span {
            horizontal.push((spec.site(i, j), spec.site(i, (j + 1) % l)));
        }
    }
    for i in 0..span {
        for j in 0..l {
            vertical.push((spec.site(i, j), spec.site((i + 1) % l, j)));
        }
    }
    (horizontal, vertical)
}

/// Column-GHZ state: `Z_{i,j}Z_{i+1,j}` for `i < L−1` plus one X-product
/// per column. Valid for any `L`; only even `L` puts `∏Z` in the group.
pub fn column_ghz(spec: &LatticeSpec) -> SectorTableau {
    let (l, n) = (spec.l(), spec.n_sites());
    let z_rows = (0..l - 1)
        .flat_map(|i| (0..l).map(move |j| (i, j)))
        .map(|(i, j)| BitRow::from_sites(n, &[spec.site(i, j), spec.site(i + 1, j)]))
        .collect();
    let x_rows = (0..l)
        .map(|j| BitRow::from_sites(n, &(0..l).map(|i| spec.site(i, j)).collect::<Vec<_>>()))
        .collect();
    SectorTableau::from_rows(n, x_rows, z_rows).expect("column-GHZ generators are valid")
}

/// The column-GHZ construction rotated by 90°: one GHZ chain per row.
pub fn row_ghz(spec: &LatticeSpec) -> SectorTableau {
    let (l, n) = (spec.l(), spec.n_sites());
    let z_rows = (0..l)
        .flat_map(|i| (0..l - 1).map(move |j| (i, j)))
        .map(|(i, j)| BitRow::from_sites(n, &[spec.site(i, j), spec.site(i, j + 1)]))
        .collect();
    let x_rows = (0..l)
        .map(|i| BitRow::from_sites(n, &(0..l).map(|j| spec.site(i, j)).collect::<Vec<_>>()))
        .collect();
    SectorTableau::from_rows(n, x_rows, z_rows).expect("row-GHZ generators are valid")
}

/// Standard initial state (column-GHZ). Rejects odd `L`.
pub fn initial_tableau(spec: &LatticeSpec) -> Result<SectorTableau> {
    if !spec.l().is_multiple_of(2) {
        return Err(Error::OddSize(spec.l()));
    }
    Ok(column_ghz(spec))
}

/// Initial state adapted to the mix: the row-GHZ state when `p2 > 1/2`, so
/// that at `p2 = 1` the state is an eigenstate of the rotated subsystem
/// symmetries.
pub fn initial_tableau_for(spec: &LatticeSpec, mix: &MixChances) -> Result<SectorTableau> {
    if !spec.l().is_multiple_of(2) {
        return Err(Error::OddSize(spec.l()));
    }
    Ok(if mix.p2 > 0.5 { row_ghz(spec) } else { column_ghz(spec) })
}

fn line(spec: &LatticeSpec, basis: Basis, sites: impl Iterator<Item = (usize, usize)>) -> PauliSupport {
    PauliSupport::new(basis, sites.map(|(i, j)| spec.site(i, j))).expect("non-empty line")
}

/// Operators commuting with every check that can occur at `mix`.
///
/// Always the two global products; on `p2 = 0` also the column-X logicals
/// and adjacent double-row Z stabilizers; on `p2 = 1` their 90° rotations.
pub fn symmetry_operators(spec: &LatticeSpec, mix: &MixChances) -> Vec<PauliSupport> {
    let l = spec.l();
    let all = || (0..l).flat_map(move |i| (0..l).map(move |j| (i, j)));
    let mut ops = vec![line(spec, Basis::X, all()), line(spec, Basis::Z, all())];
    if mix.p2 == 0.0 {
        ops.extend((0..l).map(|j| line(spec, Basis::X, (0..l).map(|i| (i, j)))));
        ops.extend(
            (0..l - 1).map(|i| line(spec, Basis::Z, (0..l).flat_map(|j| [(i, j), (i + 1, j)]))),
        );
    } else if mix.p2 == 1.0 {
        ops.extend((0..l).map(|i| line(spec, Basis::X, (0..l).map(|j| (i, j)))));
        ops.extend(
            (0..l - 1).map(|j| line(spec, Basis::Z, (0..l).flat_map(|i| [(i, j), (i, j + 1)]))),
        );
    }
    ops
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(l: usize) -> LatticeSpec {
        LatticeSpec::new(l, Boundary::Periodic).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(LatticeSpec::new(7, Boundary::Periodic), Err(Error::OddSize(7))));
        assert!(matches!(LatticeSpec::new(4, Boundary::Periodic), Err(Error::SizeTooSmall { .. })));
        assert!(LatticeSpec::oracle_scale(3, Boundary::Periodic).is_ok());
        assert!(LatticeSpec::oracle_scale(4, Boundary::Periodic).is_err());
        assert!(MixChances::new(1.2, 0.0).is_err());
    }

    #[test]
    fn bond_counts() {
        let (h, v) = bonds(&spec(6));
        assert_eq!((h.len(), v.len()), (36, 36));
        let (h, v) = bonds(&LatticeSpec::new(6, Boundary::Open).unwrap());
        assert_eq!((h.len(), v.len()), (30, 30));
    }

    #[test]
    fn bonds_are_unit_steps() {
        for boundary in [Boundary::Periodic, Boundary::Open] {
            let s = LatticeSpec::new(8, boundary).unwrap();
            let (h, v) = bonds(&s);
            for &(a, b) in &h {
                let ((ai, aj), (bi, bj)) = (s.coords(a), s.coords(b));
                assert_eq!(ai, bi);
                assert_eq!(s.axis_distance(aj, bj), 1);
            }
            for &(a, b) in &v {
                let ((ai, aj), (bi, bj)) = (s.coords(a), s.coords(b));
                assert_eq!(aj, bj);
                assert_eq!(s.axis_distance(ai, bi), 1);
            }
        }
    }

    #[test]
    fn corner_mixes_are_pure() {
        let lat = Lattice::new(spec(6));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (mix, kind) in [
            ((0.0, 0.0), CheckKind::XxHorizontal),
            ((1.0, 0.0), CheckKind::ZzVertical),
            ((0.0, 1.0), CheckKind::XxVertical),
            ((1.0, 1.0), CheckKind::ZzHorizontal),
        ] {
            let sampler = CheckSampler::new(&MixChances::new(mix.0, mix.1).unwrap());
            for _ in 0..2000 {
                assert_eq!(lat.sample_check(&sampler, &mut rng).kind, kind);
            }
        }
    }

    #[test]
    fn equal_mix_frequencies_are_binomial() {
        let lat = Lattice::new(spec(6));
        let sampler = CheckSampler::new(&MixChances::new(0.5, 0.5).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 1_000_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let k = lat.sample_check(&sampler, &mut rng).kind;
            counts[CheckKind::ALL.iter().position(|&c| c == k).unwrap()] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - 0.25 * n as f64).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn initial_state_contents() {
        let s = spec(6);
        let t = initial_tableau(&s).unwrap();
        assert_eq!(t.z_rows().len(), 30);
        assert_eq!(t.x_rows().len(), 6);
        let all = |b| PauliSupport::new(b, 0..36).unwrap();
        assert!(t.contains_operator(&all(Basis::X)));
        assert!(t.contains_operator(&all(Basis::Z)));
        let rows01 = PauliSupport::new(Basis::Z, (0..6).flat_map(|j| [s.site(0, j), s.site(1, j)])).unwrap();
        assert!(t.contains_operator(&rows01));
        let row0 = PauliSupport::new(Basis::Z, (0..6).map(|j| s.site(0, j))).unwrap();
        assert!(!t.contains_operator(&row0));
        assert!(matches!(
            initial_tableau(&LatticeSpec::oracle_scale(3, Boundary::Periodic).unwrap()),
            Err(Error::OddSize(3))
        ));
    }

    #[test]
    fn symmetry_catalog_sizes() {
        let s = spec(8);
        assert_eq!(symmetry_operators(&s, &MixChances::new(0.3, 0.5).unwrap()).len(), 2);
        assert_eq!(symmetry_operators(&s, &MixChances::new(0.3, 0.0).unwrap()).len(), 2 + 8 + 7);
        assert_eq!(symmetry_operators(&s, &MixChances::new(0.3, 1.0).unwrap()).len(), 2 + 8 + 7);
    }

    #[test]
    fn symmetries_commute_with_every_allowed_check() {
        for boundary in [Boundary::Periodic, Boundary::Open] {
            let s = LatticeSpec::new(6, boundary).unwrap();
            let lat = Lattice::new(s);
            for (p1, p2) in [(0.3, 0.0), (0.3, 1.0), (0.3, 0.5), (0.0, 0.0), (1.0, 1.0)] {
                let mix = MixChances::new(p1, p2).unwrap();
                let ops = symmetry_operators(&s, &mix);
                for kind in CheckKind::ALL.into_iter().filter(|&k| mix.probability(k) > 0.0) {
                    for &(a, b) in lat.bonds(kind.orientation()) {
                        for op in ops.iter().filter(|op| op.basis() != kind.basis()) {
                            let overlap = op.sites().iter().filter(|&&x| x == a || x == b).count();
                            assert_eq!(overlap % 2, 0, "{kind:?} on ({a},{b}) vs {op:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn initial_states_contain_their_symmetries() {
        let s = spec(6);
        for (p2, t) in [(0.0, column_ghz(&s)), (1.0, row_ghz(&s))] {
            let mix = MixChances::new(0.4, p2).unwrap();
            for op in symmetry_operators(&s, &mix) {
                assert!(t.contains_operator(&op), "{op:?}");
            }
        }
    }

    #[test]
    fn rotation_swaps_orientations() {
        let s = spec(6);
        let (h, v) = bonds(&s);
        let mut rotated: Vec<(usize, usize)> =
            h.iter().map(|&(a, b)| (s.rotate90(a), s.rotate90(b))).map(|(a, b)| (a.min(b), a.max(b))).collect();
        let mut vert: Vec<(usize, usize)> = v.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        rotated.sort();
        vert.sort();
        assert_eq!(rotated, vert);
    }
}
