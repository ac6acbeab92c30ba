//! Replays public `Trajectory` steps on a dense state vector and compares
//! every squared correlator and single/pair/half entropy along the way.

use bacon_circuit::ensemble::Trajectory;
use bacon_circuit::lattice::column_ghz;
use bacon_circuit::observables::{entanglement_entropy_bits, Correlations};
use bacon_circuit::oracle::DenseState;
use bacon_circuit::tableau::MeasureEffect;
use bacon_circuit::{Boundary, LatticeSpec, MixChances, Pauli};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn replay(l: usize, p1: f64, p2: f64, seed: u64, steps: usize) {
    let spec = LatticeSpec::oracle_scale(l, Boundary::Periodic).unwrap();
    let mix = MixChances::new(p1, p2).unwrap();
    let start = column_ghz(&spec);
    let mut born = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
    let mut psi = DenseState::from_tableau(&start, &mut born).unwrap();
    let mut traj = Trajectory::from_parts(spec, &mix, start, seed).unwrap();
    let n = spec.n_sites();
    for step in 0..steps {
        let (check, effect) = traj.step();
        let support = check.support();
        let determined = (psi.expectation_sq(&support).unwrap() - 1.0).abs() < 1e-9;
        assert_eq!(determined, effect == MeasureEffect::NoOp, "step {step}: {check:?}");
        psi = psi.measure(&support, &mut born).unwrap().0;

        let t = traj.tableau();
        let corr = Correlations::new(t);
        for a in 0..n {
            for b in a + 1..n {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let want = psi.pair_expectation_sq(a, b, p).unwrap();
                    assert!((want - corr.two_point_sq(a, b, p) as f64).abs() < 1e-9, "step {step} {p:?} {a} {b}");
                }
            }
            let s = entanglement_entropy_bits(t, &[a]) as f64;
            assert!((psi.renyi2_bits(&[a]).unwrap() - s).abs() < 1e-7);
        }
        let half = spec.left_half();
        let s = entanglement_entropy_bits(t, &half) as f64;
        assert!((psi.renyi2_bits(&half).unwrap() - s).abs() < 1e-7, "step {step} half-cut");
    }
}

#[test]
fn two_by_two_matches_dense_state() {
    for (k, (p1, p2)) in [(0.5, 0.0), (0.5, 0.5), (0.25, 0.1), (0.9, 0.7)].into_iter().enumerate() {
        replay(2, p1, p2, k as u64, 400);
    }
}

#[test]
fn three_by_three_matches_dense_state() {
    replay(3, 0.4, 0.3, 11, 150);
}
