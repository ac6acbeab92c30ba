//! Brute-force state-vector reference for at most nine qubits.
//!
//! Qubit `k` is bit `k` of the basis-state index.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::observables::Pauli;
use crate::tableau::{Basis, PauliSupport, SectorTableau};

pub const MAX_QUBITS: usize = 9;
const NORM_TOL: f64 = 1e-12;

/// Which projector to apply when measuring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Plus,
    Minus,
}

#[derive(Clone, Debug)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Oracle(format!("{n} qubits outside 1..={MAX_QUBITS}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// A state stabilized (with + signs) by every generator of `t`.
    ///
    /// Starts from a random vector so no projector annihilates it.
    pub fn from_tableau<R: Rng + ?Sized>(t: &SectorTableau, rng: &mut R) -> Result<Self> {
        let mut s = Self::zero(t.n_sites())?;
        for a in s.amps.iter_mut() {
            *a = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        s.normalize()?;
        for basis in [Basis::X, Basis::Z] {
            for row in t.rows(basis) {
                let op = PauliSupport::new(basis, row.ones())?;
                s = s.project(&op, Outcome::Plus)?;
            }
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm < NORM_TOL {
            return Err(Error::Oracle("projection has zero norm".into()));
        }
        self.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(())
    }

    fn check_ops(&self, ops: &[(usize, Pauli)]) -> Result<()> {
        match ops.iter().find(|(q, _)| *q >= self.n) {
            Some((q, _)) => Err(Error::Oracle(format!("qubit {q} out of range"))),
            None => Ok(()),
        }
    }

    /// `P|ψ⟩` for a Pauli string given as `(qubit, Pauli)` factors.
    fn apply(&self, ops: &[(usize, Pauli)]) -> Vec<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let mut flip = 0usize;
        for &(q, p) in ops {
            if matches!(p, Pauli::X | Pauli::Y) {
                flip ^= 1 << q;
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, &amp) in self.amps.iter().enumerate() {
            let mut phase = Complex64::new(1.0, 0.0);
            for &(q, p) in ops {
                let bit = (idx >> q) & 1;
                match p {
                    Pauli::X => {}
                    Pauli::Z => {
                        if bit == 1 {
                            phase = -phase;
                        }
                    }
                    // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                    Pauli::Y => phase *= if bit == 0 { i } else { -i },
                }
            }
            out[idx ^ flip] += phase * amp;
        }
        out
    }

    /// `⟨ψ|P|ψ⟩` (real for Hermitian `P`).
    pub fn expectation(&self, ops: &[(usize, Pauli)]) -> Result<f64> {
        self.check_ops(ops)?;
        let p = self.apply(ops);
        Ok(self.amps.iter().zip(&p).map(|(a, b)| (a.conj() * b).re).sum())
    }

    /// `|⟨ψ|P|ψ⟩|²` for a pure-type support.
    pub fn expectation_sq(&self, s: &PauliSupport) -> Result<f64> {
        let ops = support_ops(s);
        Ok(self.expectation(&ops)?.powi(2))
    }

    /// `|⟨P_αP_β⟩|²` for `P ∈ {X, Y, Z}`.
    pub fn pair_expectation_sq(&self, a: usize, b: usize, pauli: Pauli) -> Result<f64> {
        Ok(self.expectation(&[(a, pauli), (b, pauli)])?.powi(2))
    }

    /// Applies `(1 ± P)/2` and renormalizes.
    pub fn project(&self, s: &PauliSupport, outcome: Outcome) -> Result<DenseState> {
        let ops = support_ops(s);
        self.check_ops(&ops)?;
        let p = self.apply(&ops);
        let sign = match outcome {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        };
        let amps = self.amps.iter().zip(&p).map(|(a, b)| (a + b * sign) * 0.5).collect();
        let mut out = DenseState { n: self.n, amps };
        out.normalize()?;
        Ok(out)
    }

    /// Measures `s` with a Born-rule outcome. Returns the new state and the
    /// outcome drawn.
    pub fn measure<R: Rng + ?Sized>(&self, s: &PauliSupport, rng: &mut R) -> Result<(DenseState, Outcome)> {
        let e = self.expectation(&support_ops(s))?;
        let p_plus = ((1.0 + e) / 2.0).clamp(0.0, 1.0);
        let outcome = if rng.gen::<f64>() < p_plus { Outcome::Plus } else { Outcome::Minus };
        Ok((self.project(s, outcome)?, outcome))
    }

    /// `−log₂ Tr ρ_A²` for the qubits in `subset`.
    pub fn renyi2_bits(&self, subset: &[usize]) -> Result<f64> {
        if subset.iter().any(|&q| q >= self.n) {
            return Err(Error::Oracle("subset qubit out of range".into()));
        }
        let mut in_a = vec![false; self.n];
        for &q in subset {
            in_a[q] = true;
        }
        let a_qubits: Vec<usize> = (0..self.n).filter(|&q| in_a[q]).collect();
        let b_qubits: Vec<usize> = (0..self.n).filter(|&q| !in_a[q]).collect();
        let gather = |idx: usize, qs: &[usize]| qs.iter().enumerate().fold(0, |acc, (k, &q)| acc | (((idx >> q) & 1) << k));
        let (da, db) = (1usize << a_qubits.len(), 1usize << b_qubits.len());
        // ψ as a da × db matrix.
        let mut m = vec![Complex64::new(0.0, 0.0); da * db];
        for (idx, &amp) in self.amps.iter().enumerate() {
            m[gather(idx, &a_qubits) * db + gather(idx, &b_qubits)] = amp;
        }
        // ρ_A = M M†; Tr ρ_A² = Σ |ρ_ij|².
        let mut purity = 0.0;
        for r in 0..da {
            for c in 0..da {
                let rho: Complex64 = (0..db).map(|k| m[r * db + k] * m[c * db + k].conj()).sum();
                purity += rho.norm_sqr();
            }
        }
        Ok(-purity.log2())
    }
}

fn support_ops(s: &PauliSupport) -> Vec<(usize, Pauli)> {
    let p = match s.basis() {
        Basis::X => Pauli::X,
        Basis::Z => Pauli::Z,
    };
    s.sites().iter().map(|&q| (q, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(b: Basis, a: usize, c: usize) -> PauliSupport {
        PauliSupport::pair(b, a, c).unwrap()
    }

    fn bell() -> DenseState {
        DenseState::zero(2).unwrap().project(&pair(Basis::X, 0, 1), Outcome::Plus).unwrap()
    }

    #[test]
    fn eigenstate_is_unchanged() {
        let s = DenseState::zero(2).unwrap();
        let t = s.project(&pair(Basis::Z, 0, 1), Outcome::Plus).unwrap();
        assert_eq!(s.amplitudes(), t.amplitudes());
    }

    #[test]
    fn xx_projection_makes_bell_pair() {
        let b = bell();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = b.amplitudes();
        assert!((a[0].re - h).abs() < 1e-12 && (a[3].re - h).abs() < 1e-12);
        assert!(a[1].norm() < 1e-12 && a[2].norm() < 1e-12);
    }

    #[test]
    fn impossible_outcome_rejected() {
        let s = DenseState::zero(2).unwrap();
        assert!(s.project(&pair(Basis::Z, 0, 1), Outcome::Minus).is_err());
        assert!(DenseState::zero(10).is_err());
    }

    #[test]
    fn bell_pair_expectations() {
        let b = bell();
        assert!((b.pair_expectation_sq(0, 1, Pauli::X).unwrap() - 1.0).abs() < 1e-12);
        assert!((b.pair_expectation_sq(0, 1, Pauli::Y).unwrap() - 1.0).abs() < 1e-12);
        assert!(b.expectation(&[(0, Pauli::X), (1, Pauli::Z)]).unwrap().abs() < 1e-12);
        assert!((b.renyi2_bits(&[0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_has_no_entropy() {
        let s = DenseState::zero(4).unwrap();
        for subset in [vec![0], vec![1, 3], vec![0, 1, 2]] {
            assert!(s.renyi2_bits(&subset).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn norm_preserved_under_random_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = DenseState::zero(4).unwrap();
        for _ in 0..1000 {
            let a = rng.gen_range(0..4);
            let b = (a + 1 + rng.gen_range(0..3)) % 4;
            let basis = if rng.gen_bool(0.5) { Basis::X } else { Basis::Z };
            s = s.measure(&pair(basis, a, b), &mut rng).unwrap().0;
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }
}
