//! Phase-free stabilizer tableau split into a pure-X and a pure-Z sector.
//!
//! Every generator reachable from a CSS initial state under XX/ZZ
//! measurements is a product of only X's or only Z's, so a generator is a
//! single bit row over the sites and anticommutation with a two-site check
//! is a two-bit parity test against the opposite sector. Signs are not
//! tracked: every quantity we read off is a squared expectation or a rank.

use crate::error::{Error, Result};
use crate::gf2::{self, BitRow, ColumnClasses};

/// Pauli type of a sector or of a pure-type operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn opposite(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

/// The Pauli string `∏_{α ∈ sites} P_α` with `P = basis`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliSupport {
    basis: Basis,
    sites: Vec<usize>,
}

impl PauliSupport {
    /// Sites are sorted and deduplicated; an empty set is rejected.
    pub fn new(basis: Basis, sites: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut sites: Vec<usize> = sites.into_iter().collect();
        sites.sort_unstable();
        sites.dedup();
        if sites.is_empty() {
            return Err(Error::EmptySupport);
        }
        Ok(Self { basis, sites })
    }

    pub fn pair(basis: Basis, a: usize, b: usize) -> Result<Self> {
        Self::new(basis, [a, b])
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn to_row(&self, n_sites: usize) -> BitRow {
        BitRow::from_sites(n_sites, &self.sites)
    }
}

/// Outcome of measuring a check on the tableau.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureEffect {
    /// The check was already in the stabilizer group.
    NoOp,
    Updated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorTableau {
    n_sites: usize,
    x_rows: Vec<BitRow>,
    z_rows: Vec<BitRow>,
}

impl SectorTableau {
    /// Builds a tableau from explicit generators, checking the group is
    /// maximal, independent and abelian.
    pub fn from_rows(n_sites: usize, x_rows: Vec<BitRow>, z_rows: Vec<BitRow>) -> Result<Self> {
        if x_rows.iter().chain(&z_rows).any(|r| r.len() != n_sites) {
            return Err(Error::InvalidTableau("row length differs from site count".into()));
        }
        if x_rows.len() + z_rows.len() != n_sites {
            return Err(Error::InvalidTableau(format!(
                "{} generators for {} sites",
                x_rows.len() + z_rows.len(),
                n_sites
            )));
        }
        if gf2::rank_gf2(&x_rows) != x_rows.len() || gf2::rank_gf2(&z_rows) != z_rows.len() {
            return Err(Error::InvalidTableau("generators are linearly dependent".into()));
        }
        for x in &x_rows {
            if z_rows.iter().any(|z| x.and_count(z) % 2 == 1) {
                return Err(Error::InvalidTableau("generators do not commute".into()));
            }
        }
        Ok(Self { n_sites, x_rows, z_rows })
    }

    /// No validation at all; for fault-injection fixtures.
    #[doc(hidden)]
    pub fn from_rows_unchecked(n_sites: usize, x_rows: Vec<BitRow>, z_rows: Vec<BitRow>) -> Self {
        Self { n_sites, x_rows, z_rows }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn rows(&self, basis: Basis) -> &[BitRow] {
        match basis {
            Basis::X => &self.x_rows,
            Basis::Z => &self.z_rows,
        }
    }

    pub fn x_rows(&self) -> &[BitRow] {
        &self.x_rows
    }

    pub fn z_rows(&self) -> &[BitRow] {
        &self.z_rows
    }

    fn rows_mut(&mut self, basis: Basis) -> &mut Vec<BitRow> {
        match basis {
            Basis::X => &mut self.x_rows,
            Basis::Z => &mut self.z_rows,
        }
    }

    fn check_sites(&self, s: &PauliSupport) -> Result<()> {
        match s.sites.iter().find(|&&k| k >= self.n_sites) {
            Some(&site) => Err(Error::SiteOutOfRange { site, n_sites: self.n_sites }),
            None => Ok(()),
        }
    }

    /// Indices of opposite-sector rows that anticommute with `s`.
    pub fn anticommuting_rows(&self, s: &PauliSupport) -> Result<Vec<usize>> {
        self.check_sites(s)?;
        let target = s.to_row(self.n_sites);
        Ok(self
            .rows(s.basis.opposite())
            .iter()
            .enumerate()
            .filter(|(_, r)| r.and_count(&target) % 2 == 1)
            .map(|(i, _)| i)
            .collect())
    }

    /// Measures a two-site check and updates the generators.
    pub fn measure_check(&mut self, s: &PauliSupport) -> Result<MeasureEffect> {
        if s.sites.len() != 2 {
            return Err(Error::NotTwoSite(s.sites.len()));
        }
        self.check_sites(s)?;
        Ok(self.measure_pair(s.basis, s.sites[0], s.sites[1]))
    }

    /// Hot-path form of [`measure_check`](Self::measure_check) with no
    /// validation. `a != b` and both must be in range.
    ///
    /// The lowest-index anticommuting row is the pivot; it is XORed into
    /// every other anticommuting row, then removed from its sector and the
    /// measured check is appended to the sector of its own basis.
    pub fn measure_pair(&mut self, basis: Basis, a: usize, b: usize) -> MeasureEffect {
        debug_assert!(a != b && a < self.n_sites && b < self.n_sites);
        let n_sites = self.n_sites;
        let rows = self.rows_mut(basis.opposite());
        let Some(pivot) = rows.iter().position(|r| r.pair_parity(a, b)) else {
            return MeasureEffect::NoOp;
        };
        let (head, tail) = rows.split_at_mut(pivot + 1);
        let prow = &head[pivot];
        for r in tail.iter_mut() {
            if r.pair_parity(a, b) {
                r.xor_assign(prow);
            }
        }
        rows.swap_remove(pivot);
        let mut new_row = BitRow::zeros(n_sites);
        new_row.set(a, true);
        new_row.set(b, true);
        self.rows_mut(basis).push(new_row);
        MeasureEffect::Updated
    }

    /// `true` iff `s` commutes with every generator, i.e. `±s` is in the
    /// group (the group is maximal).
    pub fn contains_operator(&self, s: &PauliSupport) -> bool {
        let target = s.to_row(self.n_sites);
        self.rows(s.basis.opposite()).iter().all(|r| r.and_count(&target) % 2 == 0)
    }

    /// Same question as [`contains_operator`](Self::contains_operator),
    /// answered by a row-space solve inside the matching sector.
    pub fn contains_by_row_space(&self, s: &PauliSupport) -> bool {
        gf2::in_row_space(self.rows(s.basis), &s.to_row(self.n_sites))
    }

    /// Rank of the generator matrix truncated to `sites`, summed over both
    /// sectors.
    pub fn restricted_rank(&self, sites: &[usize]) -> usize {
        gf2::restricted_rank_gf2(&self.x_rows, sites) + gf2::restricted_rank_gf2(&self.z_rows, sites)
    }

    /// Partition of sites by identical column in the given sector.
    pub fn column_classes(&self, basis: Basis) -> ColumnClasses {
        gf2::column_class_partition(self.rows(basis), self.n_sites)
    }

    /// Checks the maximal/independent/abelian invariants. Expensive.
    pub fn validate(&self) -> Result<()> {
        Self::from_rows(self.n_sites, self.x_rows.clone(), self.z_rows.clone()).map(|_| ())
    }
}
