//! Self-verification suites: tableau engine against the dense oracle, and
//! persistence of symmetry operators along trajectories.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ensemble::run_seed;
use crate::error::Result;
use crate::lattice::{column_ghz, initial_tableau_for, symmetry_operators, Boundary, CheckOp, CheckSampler, Lattice, LatticeSpec, MixChances};
use crate::observables::{entanglement_entropy_bits, Correlations, Pauli};
use crate::oracle::DenseState;
use crate::tableau::{Basis, MeasureEffect, PauliSupport, SectorTableau};

const TOL: f64 = 1e-9;

/// The update applied to the tableau for each measured check. Exists so a
/// deliberately broken rule can be fed through the same suites.
pub trait MeasurementRule {
    fn measure(&self, t: &mut SectorTableau, basis: Basis, a: usize, b: usize) -> MeasureEffect;
}

/// [`SectorTableau::measure_pair`].
pub struct StandardRule;

impl MeasurementRule for StandardRule {
    fn measure(&self, t: &mut SectorTableau, basis: Basis, a: usize, b: usize) -> MeasureEffect {
        t.measure_pair(basis, a, b)
    }
}

/// First disagreement found by a suite.
#[derive(Clone, Debug)]
pub struct Divergence {
    pub suite: &'static str,
    pub mix: MixChances,
    pub seed: u64,
    /// 1-based index of the offending measurement (0: initial state).
    pub step: usize,
    pub check: Option<CheckOp>,
    pub detail: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} diverged at mix ({}, {}), seed {}, step {}",
            self.suite, self.mix.p1, self.mix.p2, self.seed, self.step
        )?;
        if let Some(c) = &self.check {
            write!(f, " after {:?} on ({}, {})", c.kind, c.a, c.b)?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuiteReport {
    pub trajectories: usize,
    pub steps: usize,
    pub comparisons: usize,
}

impl SuiteReport {
    fn merge(&mut self, other: SuiteReport) {
        self.trajectories += other.trajectories;
        self.steps += other.steps;
        self.comparisons += other.comparisons;
    }
}

#[derive(Clone, Debug)]
pub struct OracleSuite {
    pub l: usize,
    pub mixes: Vec<MixChances>,
    pub seeds: u64,
    pub steps: usize,
}

impl Default for OracleSuite {
    fn default() -> Self {
        Self { l: 2, mixes: default_mixes(), seeds: 20, steps: 1000 }
    }
}

pub fn default_mixes() -> Vec<MixChances> {
    [(0.0, 0.0), (0.5, 0.0), (0.5, 0.5), (0.25, 0.1)]
        .into_iter()
        .map(|(p1, p2)| MixChances::new(p1, p2).expect("valid mix"))
        .collect()
}

/// Subsets compared at each step: all of them up to 4 qubits, otherwise
/// singles, pairs and the two half-cuts.
fn oracle_subsets(spec: &LatticeSpec) -> Vec<Vec<usize>> {
    let n = spec.n_sites();
    if n <= 4 {
        return (1..1usize << n).map(|m| (0..n).filter(|k| m >> k & 1 == 1).collect()).collect();
    }
    let mut out: Vec<Vec<usize>> = (0..n).map(|a| vec![a]).collect();
    for a in 0..n {
        for b in a + 1..n {
            out.push(vec![a, b]);
        }
    }
    let l = spec.l();
    out.push((0..l).flat_map(|i| (0..l / 2).map(move |j| i * l + j)).collect());
    out.push((0..l / 2 * l).collect());
    out
}

/// Compares every squared correlator and every subset entropy of the
/// tableau with the dense state. Returns the number of comparisons.
fn compare(t: &SectorTableau, psi: &DenseState, subsets: &[Vec<usize>]) -> std::result::Result<usize, String> {
    let n = t.n_sites();
    let corr = Correlations::new(t);
    let mut count = 0;
    for a in 0..n {
        for b in a + 1..n {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let want = psi.pair_expectation_sq(a, b, p).map_err(|e| e.to_string())?;
                let got = corr.two_point_sq(a, b, p) as f64;
                if (want - got).abs() > TOL {
                    return Err(format!("<{p:?}{a} {p:?}{b}>^2: tableau {got}, oracle {want:.6}"));
                }
                count += 1;
            }
        }
    }
    for s in subsets {
        let want = psi.renyi2_bits(s).map_err(|e| e.to_string())?;
        let got = entanglement_entropy_bits(t, s) as f64;
        if (want - got).abs() > 1e-7 {
            return Err(format!("S({s:?}): tableau {got}, oracle {want:.6}"));
        }
        count += 1;
    }
    Ok(count)
}

/// Runs one oracle trajectory of `steps` checks.
pub fn oracle_trajectory(
    spec: &LatticeSpec,
    mix: &MixChances,
    seed: u64,
    steps: usize,
    rule: &dyn MeasurementRule,
) -> std::result::Result<SuiteReport, Divergence> {
    let diverge = |step, check, detail| Divergence { suite: "oracle", mix: *mix, seed, step, check, detail };
    let lattice = Lattice::new(*spec);
    let sampler = CheckSampler::new(mix);
    let mut check_rng = ChaCha8Rng::seed_from_u64(run_seed(seed, 0));
    let mut born_rng = ChaCha8Rng::seed_from_u64(run_seed(seed, 1));
    let mut t = column_ghz(spec);
    let mut psi = DenseState::from_tableau(&t, &mut born_rng).map_err(|e| diverge(0, None, e.to_string()))?;
    let subsets = oracle_subsets(spec);
    let mut report = SuiteReport { trajectories: 1, ..Default::default() };
    report.comparisons += compare(&t, &psi, &subsets).map_err(|d| diverge(0, None, d))?;
    for step in 1..=steps {
        let check = lattice.sample_check(&sampler, &mut check_rng);
        let support = check.support();
        let before = psi.expectation_sq(&support).map_err(|e| diverge(step, Some(check), e.to_string()))?;
        let effect = rule.measure(&mut t, check.basis(), check.a, check.b);
        let oracle_noop = (before - 1.0).abs() < TOL;
        if oracle_noop != (effect == MeasureEffect::NoOp) {
            return Err(diverge(step, Some(check), format!("tableau {effect:?}, oracle <S>^2 = {before:.6}")));
        }
        psi = psi.measure(&support, &mut born_rng).map_err(|e| diverge(step, Some(check), e.to_string()))?.0;
        if t.x_rows().len() + t.z_rows().len() != t.n_sites() {
            return Err(diverge(step, Some(check), "generator count changed".into()));
        }
        report.comparisons += compare(&t, &psi, &subsets).map_err(|d| diverge(step, Some(check), d))?;
        report.steps += 1;
    }
    Ok(report)
}

/// Every (mix, seed) trajectory of the suite; stops at the first mismatch.
pub fn oracle_suite(suite: &OracleSuite, rule: &dyn MeasurementRule) -> std::result::Result<SuiteReport, Divergence> {
    let spec = LatticeSpec::oracle_scale(suite.l, Boundary::Periodic).expect("oracle-scale lattice");
    let mut total = SuiteReport::default();
    for mix in &suite.mixes {
        for seed in 0..suite.seeds {
            total.merge(oracle_trajectory(&spec, mix, seed, suite.steps, rule)?);
        }
    }
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct PersistenceSuite {
    pub l: usize,
    pub mixes: Vec<MixChances>,
    pub seeds: u64,
    pub steps: usize,
}

impl Default for PersistenceSuite {
    fn default() -> Self {
        let mixes = [(0.25, 0.0), (0.5, 0.0), (0.75, 0.0), (0.5, 1.0), (0.3, 0.5)]
            .into_iter()
            .map(|(p1, p2)| MixChances::new(p1, p2).expect("valid mix"))
            .collect();
        Self { l: 6, mixes, seeds: 5, steps: 2000 }
    }
}

/// Checks at every step that each symmetry operator contained in the
/// initial state is still in the group, by both membership routes.
pub fn persistence_trajectory(
    spec: &LatticeSpec,
    mix: &MixChances,
    seed: u64,
    steps: usize,
    rule: &dyn MeasurementRule,
) -> std::result::Result<SuiteReport, Divergence> {
    let diverge = |step, check, detail| Divergence { suite: "symmetry", mix: *mix, seed, step, check, detail };
    let lattice = Lattice::new(*spec);
    let sampler = CheckSampler::new(mix);
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed(seed, 0));
    let mut t = initial_tableau_for(spec, mix).map_err(|e| diverge(0, None, e.to_string()))?;
    let ops: Vec<PauliSupport> = symmetry_operators(spec, mix).into_iter().filter(|op| t.contains_operator(op)).collect();
    let mut report = SuiteReport { trajectories: 1, ..Default::default() };
    for step in 1..=steps {
        let check = lattice.sample_check(&sampler, &mut rng);
        rule.measure(&mut t, check.basis(), check.a, check.b);
        for op in &ops {
            if !t.contains_operator(op) || !t.contains_by_row_space(op) {
                return Err(diverge(step, Some(check), format!("lost {:?} operator on {:?}", op.basis(), op.sites())));
            }
            report.comparisons += 1;
        }
        report.steps += 1;
    }
    Ok(report)
}

pub fn persistence_suite(suite: &PersistenceSuite, rule: &dyn MeasurementRule) -> Result<std::result::Result<SuiteReport, Divergence>> {
    let spec = LatticeSpec::new(suite.l, Boundary::Periodic)?;
    let mut total = SuiteReport::default();
    for mix in &suite.mixes {
        for seed in 0..suite.seeds {
            match persistence_trajectory(&spec, mix, seed, suite.steps, rule) {
                Ok(r) => total.merge(r),
                Err(d) => return Ok(Err(d)),
            }
        }
    }
    Ok(Ok(total))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Forgets to multiply the other anticommuting rows by the pivot.
    struct SkipsMultiply;

    impl MeasurementRule for SkipsMultiply {
        fn measure(&self, t: &mut SectorTableau, basis: Basis, a: usize, b: usize) -> MeasureEffect {
            let rows: Vec<_> = t.rows(basis.opposite()).to_vec();
            let hits: Vec<usize> = (0..rows.len()).filter(|&k| rows[k].pair_parity(a, b)).collect();
            if hits.len() <= 1 {
                return t.measure_pair(basis, a, b);
            }
            // Rebuild with the broken update; validation is skipped on purpose.
            let mut x = t.x_rows().to_vec();
            let mut z = t.z_rows().to_vec();
            let (opp, same) = match basis {
                Basis::X => (&mut z, &mut x),
                Basis::Z => (&mut x, &mut z),
            };
            opp.remove(hits[0]);
            same.push(crate::gf2::BitRow::from_sites(t.n_sites(), &[a, b]));
            *t = SectorTableau::from_rows_unchecked(t.n_sites(), x, z);
            MeasureEffect::Updated
        }
    }

    #[test]
    fn small_oracle_suite_passes() {
        let suite = OracleSuite { seeds: 3, steps: 200, ..Default::default() };
        let report = oracle_suite(&suite, &StandardRule).unwrap();
        assert_eq!(report.trajectories, 12);
        assert_eq!(report.steps, 2400);
    }

    #[test]
    fn nine_qubit_oracle_agrees() {
        let spec = LatticeSpec::oracle_scale(3, Boundary::Periodic).unwrap();
        for (k, mix) in default_mixes().iter().enumerate() {
            oracle_trajectory(&spec, mix, k as u64, 60, &StandardRule).unwrap();
        }
    }

    #[test]
    fn corrupted_rule_is_caught() {
        let suite = OracleSuite { seeds: 3, steps: 300, ..Default::default() };
        let err = oracle_suite(&suite, &SkipsMultiply).unwrap_err();
        assert!(err.step >= 1);
        assert!(err.check.is_some());
    }

    #[test]
    fn symmetries_persist() {
        let suite = PersistenceSuite { seeds: 2, steps: 500, ..Default::default() };
        let report = persistence_suite(&suite, &StandardRule).unwrap().unwrap();
        assert_eq!(report.steps, 5 * 2 * 500);
    }
}
