//! Embedded statevector simulator.
//!
//! `statevector` simulates the measurement-free copy of a circuit;
//! `ideal_distribution` gives the exact classical output distribution;
//! `run_shots` samples counts on the ideal or noisy backend with a seeded
//! generator (ChaCha8), so identical (circuit, shots, seed, backend)
//! always reproduce identical counts.

mod density;
mod gates;
mod noise;

pub use density::{partial_trace, von_neumann_entropy, DensityMatrix};
pub use noise::{NoiseModel, NoiseModelError};

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Operation};
use crate::distribution::{format_bits, Distribution};
use crate::pragma::BackendKind;

use gates::apply_gate;
use noise::{apply_fault, sample_fault, Fault};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("nothing measured: the circuit has no measurement operations")]
    NothingMeasured,
    #[error("hardware backend reserved for future integration")]
    HardwareReserved,
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("statevector is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("amplitude vector length {0} is not a power of two")]
    BadLength(usize),
    #[error("invalid partition: {0}")]
    BadPartition(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
}

/// Complex amplitudes over the computational basis. Bit `k` of the basis
/// index is qubit `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
}

impl Statevector {
    /// The |0...0⟩ state on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Statevector { amplitudes, num_qubits }
    }

    /// Wrap a raw amplitude vector; must be a normalized power-of-two
    /// length vector.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        let len = amplitudes.len();
        if len == 0 || len & (len - 1) != 0 {
            return Err(SimError::BadLength(len));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(SimError::NotNormalized(norm));
        }
        let num_qubits = len.trailing_zeros() as usize;
        Ok(Statevector { amplitudes, num_qubits })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Simulate the measurement-free copy: apply every gate in order to
/// |0...0⟩, skipping measurement operations.
pub fn statevector(circuit: &Circuit) -> Result<Statevector, SimError> {
    let mut state = Statevector::zero(circuit.num_qubits());
    for op in circuit.ops() {
        if let Operation::Gate { name, angles, qubits } = op {
            apply_gate(&mut state.amplitudes, name, angles, qubits)?;
        }
    }
    Ok(state)
}

/// Exact classical output probabilities, marginalized over unmeasured
/// qubits through the measurement map. Zero-probability keys are omitted.
pub fn ideal_distribution(circuit: &Circuit) -> Result<Distribution, SimError> {
    let probs = classical_probabilities(circuit)?;
    let width = circuit.classical_width();
    let entries: BTreeMap<String, f64> = probs
        .into_iter()
        .map(|(value, p)| (format_bits(value, width), p))
        .collect();
    Ok(Distribution::new(entries).expect("simulator output is normalized"))
}

/// (classical value, probability) pairs in ascending value order, for
/// probabilities above 1e-15.
fn classical_probabilities(circuit: &Circuit) -> Result<Vec<(u64, f64)>, SimError> {
    if circuit.measurement_map().is_empty() {
        return Err(SimError::NothingMeasured);
    }
    let state = statevector(circuit)?;
    Ok(accumulate_classical(&state, circuit))
}

fn accumulate_classical(state: &Statevector, circuit: &Circuit) -> Vec<(u64, f64)> {
    let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
    for (basis, amp) in state.amplitudes().iter().enumerate() {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let mut value = 0u64;
        for (qubit, bit) in circuit.measurement_map().iter() {
            if basis >> qubit & 1 == 1 {
                value |= 1 << bit;
            }
        }
        *acc.entry(value).or_insert(0.0) += p;
    }
    acc.into_iter().filter(|&(_, p)| p > 1e-15).collect()
}

/// Measured bitstring counts from one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    width: usize,
    entries: BTreeMap<String, u64>,
    shots: u64,
}

impl Counts {
    pub fn new(width: usize, entries: BTreeMap<String, u64>) -> Self {
        let shots = entries.values().sum();
        Counts { width, entries, shots }
    }

    /// Bitstring length of every key.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn total(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, key: &str) -> u64 {
        self.entries.get(key).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(k, &c)| (k.as_str(), c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Empirical distribution P(x) = count(x) / N.
    pub fn distribution(&self) -> Distribution {
        let n = self.shots as f64;
        Distribution::new(
            self.entries
                .iter()
                .map(|(k, &c)| (k.clone(), c as f64 / n))
                .collect(),
        )
        .expect("counts normalize to 1")
    }
}

impl std::fmt::Display for Counts {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(k, c)| format!("{k}: {c}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Run the circuit for `shots` shots with the given seed and backend.
///
/// Ideal backend: sample from the exact output distribution. Noisy
/// backend: one Pauli trajectory per shot (see [`NoiseModel`]).
pub fn run_shots(
    circuit: &Circuit,
    shots: u64,
    seed: u64,
    backend: BackendKind,
    noise: Option<&NoiseModel>,
) -> Result<Counts, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match backend {
        BackendKind::Hardware => Err(SimError::HardwareReserved),
        BackendKind::Ideal => {
            let probs = classical_probabilities(circuit)?;
            let mut tallies: BTreeMap<u64, u64> = BTreeMap::new();
            for _ in 0..shots {
                let value = sample_value(&probs, rng.gen());
                *tallies.entry(value).or_insert(0) += 1;
            }
            Ok(counts_from_values(circuit.classical_width(), tallies))
        }
        BackendKind::Noisy => {
            let model = noise.copied().unwrap_or_default();
            run_noisy(circuit, shots, &mut rng, &model)
        }
    }
}

fn run_noisy(
    circuit: &Circuit,
    shots: u64,
    rng: &mut ChaCha8Rng,
    model: &NoiseModel,
) -> Result<Counts, SimError> {
    // Fault-free trajectories sample from the ideal distribution, which is
    // computed once. The per-shot draw sequence is one uniform per gate
    // (plus one per fault) and one for the outcome.
    let ideal = classical_probabilities(circuit)?;
    let gate_ops: Vec<(usize, &Operation)> = circuit
        .ops()
        .iter()
        .enumerate()
        .filter(|(_, op)| matches!(op, Operation::Gate { .. }))
        .collect();

    let mut tallies: BTreeMap<u64, u64> = BTreeMap::new();
    let mut faults: Vec<(usize, Fault)> = Vec::new();
    for _ in 0..shots {
        faults.clear();
        for (op_idx, op) in &gate_ops {
            if let Some(fault) = sample_fault(rng, model, op.qubits().len()) {
                faults.push((*op_idx, fault));
            }
        }
        let value = if faults.is_empty() {
            sample_value(&ideal, rng.gen())
        } else {
            let state = faulty_trajectory(circuit, &faults)?;
            let outcomes = accumulate_classical(&state, circuit);
            sample_value(&outcomes, rng.gen())
        };
        *tallies.entry(value).or_insert(0) += 1;
    }
    Ok(counts_from_values(circuit.classical_width(), tallies))
}

fn faulty_trajectory(circuit: &Circuit, faults: &[(usize, Fault)]) -> Result<Statevector, SimError> {
    let mut state = Statevector::zero(circuit.num_qubits());
    for (idx, op) in circuit.ops().iter().enumerate() {
        if let Operation::Gate { name, angles, qubits } = op {
            apply_gate(&mut state.amplitudes, name, angles, qubits)?;
            for &(fault_idx, fault) in faults {
                if fault_idx == idx {
                    apply_fault(&mut state.amplitudes, qubits, fault);
                }
            }
        }
    }
    Ok(state)
}

/// Invert the cumulative distribution at `u` in [0, 1).
fn sample_value(probs: &[(u64, f64)], u: f64) -> u64 {
    let mut acc = 0.0;
    for &(value, p) in probs {
        acc += p;
        if u < acc {
            return value;
        }
    }
    probs.last().map(|&(v, _)| v).unwrap_or(0)
}

fn counts_from_values(width: usize, tallies: BTreeMap<u64, u64>) -> Counts {
    Counts::new(
        width,
        tallies
            .into_iter()
            .map(|(value, count)| (format_bits(value, width), count))
            .collect(),
    )
}
