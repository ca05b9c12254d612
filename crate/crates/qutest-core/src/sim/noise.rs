//! Depolarizing noise via stochastic Pauli injection.
//!
//! One trajectory per shot: after each single-qubit gate an error fires
//! with probability `p1` and applies one of {X, Y, Z} uniformly; after
//! each k-qubit gate (k >= 2) an error fires with probability `p2` and
//! applies one of the 4^k - 1 non-identity k-qubit Pauli combinations
//! uniformly. In expectation this reproduces the depolarizing channel
//! without density-matrix memory cost.

use num_complex::Complex64;
use rand::Rng;

use super::gates::apply_gate;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseModelError {
    #[error("error rate {0} is outside [0, 1]")]
    RateOutOfRange(f64),
}

/// Depolarizing error rates: `p1` after single-qubit gates, `p2` after
/// multi-qubit gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64) -> Result<Self, NoiseModelError> {
        for rate in [p1, p2] {
            if !(0.0..=1.0).contains(&rate) || rate.is_nan() {
                return Err(NoiseModelError::RateOutOfRange(rate));
            }
        }
        Ok(NoiseModel { p1, p2 })
    }

    pub fn error_rate(&self, gate_qubits: usize) -> f64 {
        if gate_qubits <= 1 {
            self.p1
        } else {
            self.p2
        }
    }
}

/// Representative superconducting-hardware rates.
impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { p1: 1e-3, p2: 1e-2 }
    }
}

/// A sampled fault: which non-identity Pauli combination hits which qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Fault {
    /// Base-4 digits over the gate's qubits; 0=I, 1=X, 2=Y, 3=Z. Never all-identity.
    pub combo: usize,
}

/// Decide whether a fault follows this gate, consuming exactly one uniform
/// draw, plus one more when a fault fires.
pub(crate) fn sample_fault<R: Rng>(rng: &mut R, model: &NoiseModel, gate_qubits: usize) -> Option<Fault> {
    let rate = model.error_rate(gate_qubits);
    let u: f64 = rng.gen();
    if u >= rate {
        return None;
    }
    let combos = 4usize.pow(gate_qubits as u32) - 1;
    let combo = rng.gen_range(1..=combos);
    Some(Fault { combo })
}

/// Apply the fault's Pauli combination to the state.
pub(crate) fn apply_fault(state: &mut [Complex64], qubits: &[usize], fault: Fault) {
    let mut combo = fault.combo;
    for &q in qubits {
        let pauli = combo % 4;
        combo /= 4;
        let name = match pauli {
            0 => continue,
            1 => "x",
            2 => "y",
            _ => "z",
        };
        apply_gate(state, name, &[], &[q]).expect("pauli gates exist");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_rates_match_model() {
        let m = NoiseModel::default();
        assert_eq!(m.p1, 1e-3);
        assert_eq!(m.p2, 1e-2);
        assert_eq!(m.error_rate(1), 1e-3);
        assert_eq!(m.error_rate(2), 1e-2);
        assert_eq!(m.error_rate(3), 1e-2);
    }

    #[test]
    fn rates_are_validated() {
        assert!(NoiseModel::new(0.0, 1.0).is_ok());
        assert!(NoiseModel::new(-0.1, 0.0).is_err());
        assert!(NoiseModel::new(0.0, 1.1).is_err());
    }

    #[test]
    fn fault_frequency_tracks_rate() {
        let model = NoiseModel { p1: 0.25, p2: 0.5 };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20000;
        let hits = (0..n).filter(|_| sample_fault(&mut rng, &model, 1).is_some()).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.25).abs() < 0.02, "freq {freq}");
    }

    #[test]
    fn two_qubit_faults_cover_all_fifteen_combos() {
        let model = NoiseModel { p1: 0.0, p2: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..2000 {
            let fault = sample_fault(&mut rng, &model, 2).unwrap();
            assert!((1..=15).contains(&fault.combo));
            seen.insert(fault.combo);
        }
        assert_eq!(seen.len(), 15);
    }

    #[test]
    fn x_fault_flips_the_right_qubit() {
        let mut state = vec![Complex64::new(0.0, 0.0); 4];
        state[0] = Complex64::new(1.0, 0.0);
        // combo digits little-endian over `qubits`: 1 => X on qubits[0].
        apply_fault(&mut state, &[1, 0], Fault { combo: 1 });
        assert!((state[2].norm() - 1.0).abs() < 1e-12);
    }
}
