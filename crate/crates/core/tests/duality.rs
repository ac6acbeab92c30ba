//! Lattice dualities: a 90° rotation maps `(p1, p2)` to `(p1, 1 − p2)`, and
//! exchanging X with Z maps it to `(1 − p1, 1 − p2)`.

use bacon_circuit::ensemble::{run_ensemble, Trajectory};
use bacon_circuit::gf2::BitRow;
use bacon_circuit::lattice::{column_ghz, CheckKind};
use bacon_circuit::observables::{entanglement_entropy_bits, Correlations};
use bacon_circuit::tableau::SectorTableau;
use bacon_circuit::{Basis, Boundary, GridPoint, LatticeSpec, MixChances, Pauli, RunConfig, Scalar, Schedule};

fn spec(l: usize) -> LatticeSpec {
    LatticeSpec::new(l, Boundary::Periodic).unwrap()
}

fn map_rows(rows: &[BitRow], n: usize, f: impl Fn(usize) -> usize) -> Vec<BitRow> {
    rows.iter().map(|r| BitRow::from_sites(n, &r.ones().map(&f).collect::<Vec<_>>())).collect()
}

#[test]
fn rotated_mix_swaps_orientations() {
    let a = MixChances::new(0.3, 0.2).unwrap();
    let b = MixChances::new(0.3, 0.8).unwrap();
    let pairs = [
        (CheckKind::XxHorizontal, CheckKind::XxVertical),
        (CheckKind::XxVertical, CheckKind::XxHorizontal),
        (CheckKind::ZzHorizontal, CheckKind::ZzVertical),
        (CheckKind::ZzVertical, CheckKind::ZzHorizontal),
    ];
    for (k, r) in pairs {
        assert!((a.probability(k) - b.probability(r)).abs() < 1e-15);
    }
    let c = MixChances::new(0.7, 0.8).unwrap();
    let relabel = [
        (CheckKind::XxHorizontal, CheckKind::ZzHorizontal),
        (CheckKind::XxVertical, CheckKind::ZzVertical),
        (CheckKind::ZzHorizontal, CheckKind::XxHorizontal),
        (CheckKind::ZzVertical, CheckKind::XxVertical),
    ];
    for (k, r) in relabel {
        assert!((a.probability(k) - c.probability(r)).abs() < 1e-15);
    }
}

/// Replaying a trajectory on the rotated lattice gives the rotated state
/// after every step.
#[test]
fn rotation_commutes_with_dynamics() {
    let s = spec(8);
    let n = s.n_sites();
    let start = column_ghz(&s);
    let rotated =
        SectorTableau::from_rows(n, map_rows(start.x_rows(), n, |k| s.rotate90(k)), map_rows(start.z_rows(), n, |k| s.rotate90(k)))
            .unwrap();
    let mut traj = Trajectory::from_parts(s, &MixChances::new(0.4, 0.3).unwrap(), start, 5).unwrap();
    let mut twin = rotated;
    let cut = s.left_half();
    let rcut: Vec<usize> = cut.iter().map(|&k| s.rotate90(k)).collect();
    for step in 0..3000 {
        let (check, _) = traj.step();
        twin.measure_pair(check.basis(), s.rotate90(check.a), s.rotate90(check.b));
        if step % 100 != 99 {
            continue;
        }
        let (ca, cb) = (Correlations::new(traj.tableau()), Correlations::new(&twin));
        for a in 0..n {
            for b in a + 1..n {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    assert_eq!(ca.two_point_sq(a, b, p), cb.two_point_sq(s.rotate90(a), s.rotate90(b), p));
                }
            }
        }
        assert_eq!(entanglement_entropy_bits(traj.tableau(), &cut), entanglement_entropy_bits(&twin, &rcut));
    }
}

/// Exchanging the sectors and the check bases swaps X and Z correlators.
#[test]
fn relabelling_commutes_with_dynamics() {
    let s = spec(8);
    let n = s.n_sites();
    let start = column_ghz(&s);
    let swapped = SectorTableau::from_rows(n, start.z_rows().to_vec(), start.x_rows().to_vec()).unwrap();
    let mut traj = Trajectory::from_parts(s, &MixChances::new(0.3, 0.6).unwrap(), start, 9).unwrap();
    let mut twin = swapped;
    for _ in 0..2000 {
        let (check, _) = traj.step();
        let basis = match check.basis() {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        };
        twin.measure_pair(basis, check.a, check.b);
    }
    let (ca, cb) = (Correlations::new(traj.tableau()), Correlations::new(&twin));
    for a in 0..n {
        for b in a + 1..n {
            assert_eq!(ca.two_point_sq(a, b, Pauli::X), cb.two_point_sq(a, b, Pauli::Z));
            assert_eq!(ca.two_point_sq(a, b, Pauli::Y), cb.two_point_sq(a, b, Pauli::Y));
        }
    }
}

fn stats(l: usize, p1: f64, p2: f64) -> bacon_circuit::EnsembleStats {
    let template = RunConfig::new(spec(l), MixChances::new(p1, p2).unwrap(), Schedule { n_runs: 16, ..Default::default() }, 77)
        .unwrap();
    run_ensemble(&template.at_point(&GridPoint { l, p1, p2 }).unwrap()).unwrap()
}

fn agree(a: bacon_circuit::Estimate, b: bacon_circuit::Estimate) -> bool {
    (a.mean - b.mean).abs() <= 3.0 * (a.err * a.err + b.err * b.err).sqrt() + 1e-12
}

#[test]
fn ensemble_respects_relabelling_duality() {
    let a = stats(10, 0.3, 0.2);
    let b = stats(10, 0.7, 0.8);
    for (u, v) in [(Scalar::Xr, Scalar::Zr), (Scalar::Xc, Scalar::Zc), (Scalar::Zr, Scalar::Xr), (Scalar::Zc, Scalar::Xc)] {
        assert!(agree(a.estimate(u), b.estimate(v)), "{u:?} {:?} vs {v:?} {:?}", a.estimate(u), b.estimate(v));
    }
    assert!(agree(a.estimate(Scalar::XSiteDensity), b.estimate(Scalar::ZSiteDensity)));
}
