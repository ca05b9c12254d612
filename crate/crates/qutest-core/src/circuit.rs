//! Flat circuit representation handed to the simulator.
//!
//! A `Circuit` is an ordered list of gate and measurement operations over
//! global qubit indices. Measurement is terminal sampling: once a qubit is
//! measured, no further operation may touch it.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::diag::edit_distance;

/// Hard cap on simulated qubits; the dense statevector grows as 2^n.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateSpec {
    pub qubits: usize,
    pub angles: usize,
}

const GATE_TABLE: &[(&str, GateSpec)] = &[
    ("h", GateSpec { qubits: 1, angles: 0 }),
    ("x", GateSpec { qubits: 1, angles: 0 }),
    ("y", GateSpec { qubits: 1, angles: 0 }),
    ("z", GateSpec { qubits: 1, angles: 0 }),
    ("s", GateSpec { qubits: 1, angles: 0 }),
    ("sdg", GateSpec { qubits: 1, angles: 0 }),
    ("t", GateSpec { qubits: 1, angles: 0 }),
    ("tdg", GateSpec { qubits: 1, angles: 0 }),
    ("sx", GateSpec { qubits: 1, angles: 0 }),
    ("rx", GateSpec { qubits: 1, angles: 1 }),
    ("ry", GateSpec { qubits: 1, angles: 1 }),
    ("rz", GateSpec { qubits: 1, angles: 1 }),
    ("p", GateSpec { qubits: 1, angles: 1 }),
    ("u", GateSpec { qubits: 1, angles: 3 }),
    ("cx", GateSpec { qubits: 2, angles: 0 }),
    ("cz", GateSpec { qubits: 2, angles: 0 }),
    ("cp", GateSpec { qubits: 2, angles: 1 }),
    ("swap", GateSpec { qubits: 2, angles: 0 }),
    ("ccx", GateSpec { qubits: 3, angles: 0 }),
];

/// Arity of a built-in gate, or None for unknown names.
pub fn gate_spec(name: &str) -> Option<GateSpec> {
    GATE_TABLE.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn gate_names() -> impl Iterator<Item = &'static str> {
    GATE_TABLE.iter().map(|(n, _)| *n)
}

/// Closest built-in gate name within edit distance 2, for repair hints.
pub fn nearest_gate_name(name: &str) -> Option<&'static str> {
    gate_names()
        .map(|n| (edit_distance(name, n), n))
        .min()
        .filter(|(d, _)| *d <= 2)
        .map(|(_, n)| n)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operation {
    Gate {
        name: String,
        angles: Vec<f64>,
        qubits: Vec<usize>,
    },
    Measure {
        qubit: usize,
        bit: usize,
    },
}

impl Operation {
    /// Gate name, with measurements named "measure".
    pub fn name(&self) -> &str {
        match self {
            Operation::Gate { name, .. } => name,
            Operation::Measure { .. } => "measure",
        }
    }

    pub fn qubits(&self) -> &[usize] {
        match self {
            Operation::Gate { qubits, .. } => qubits,
            Operation::Measure { qubit, .. } => std::slice::from_ref(qubit),
        }
    }

    pub fn classical_bit(&self) -> Option<usize> {
        match self {
            Operation::Gate { .. } => None,
            Operation::Measure { bit, .. } => Some(*bit),
        }
    }
}

/// Which classical bit each measured qubit feeds. Injective.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MeasurementMap(BTreeMap<usize, usize>);

impl MeasurementMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_for_qubit(&self, qubit: usize) -> Option<usize> {
        self.0.get(&qubit).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// (qubit, classical bit) pairs in ascending qubit order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().map(|(&q, &b)| (q, b))
    }

    pub fn insert(&mut self, qubit: usize, bit: usize) -> Result<(), CircuitError> {
        if self.0.contains_key(&qubit) {
            return Err(CircuitError::QubitRemeasured(qubit));
        }
        if self.0.values().any(|&b| b == bit) {
            return Err(CircuitError::BitRewritten(bit));
        }
        self.0.insert(qubit, bit);
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("unknown gate '{0}'")]
    UnknownGate(String),
    #[error("gate '{name}' expects {expected} qubit operand(s), got {got}")]
    QubitArity { name: String, expected: usize, got: usize },
    #[error("gate '{name}' expects {expected} angle argument(s), got {got}")]
    AngleArity { name: String, expected: usize, got: usize },
    #[error("qubit index {0} out of range for {1} qubit(s)")]
    QubitOutOfRange(usize, usize),
    #[error("classical bit index {0} out of range for width {1}")]
    BitOutOfRange(usize, usize),
    #[error("duplicate qubit operand {0}")]
    DuplicateOperand(usize),
    #[error("gate applied to qubit {0} after it was measured")]
    GateAfterMeasure(usize),
    #[error("qubit {0} measured more than once")]
    QubitRemeasured(usize),
    #[error("classical bit {0} written by more than one measurement")]
    BitRewritten(usize),
    #[error("circuit uses {0} qubits; at most {MAX_QUBITS} are supported")]
    TooManyQubits(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    classical_width: usize,
    ops: Vec<Operation>,
    measurement_map: MeasurementMap,
}

impl Circuit {
    pub fn new(num_qubits: usize, classical_width: usize) -> Result<Self, CircuitError> {
        if num_qubits > MAX_QUBITS {
            return Err(CircuitError::TooManyQubits(num_qubits));
        }
        Ok(Circuit {
            num_qubits,
            classical_width,
            ops: Vec::new(),
            measurement_map: MeasurementMap::new(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn classical_width(&self) -> usize {
        self.classical_width
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn measurement_map(&self) -> &MeasurementMap {
        &self.measurement_map
    }

    pub fn push_gate(
        &mut self,
        name: &str,
        angles: &[f64],
        qubits: &[usize],
    ) -> Result<(), CircuitError> {
        let spec = gate_spec(name).ok_or_else(|| CircuitError::UnknownGate(name.to_string()))?;
        if qubits.len() != spec.qubits {
            return Err(CircuitError::QubitArity {
                name: name.to_string(),
                expected: spec.qubits,
                got: qubits.len(),
            });
        }
        if angles.len() != spec.angles {
            return Err(CircuitError::AngleArity {
                name: name.to_string(),
                expected: spec.angles,
                got: angles.len(),
            });
        }
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange(q, self.num_qubits));
            }
            if qubits[i + 1..].contains(&q) {
                return Err(CircuitError::DuplicateOperand(q));
            }
            if self.measurement_map.bit_for_qubit(q).is_some() {
                return Err(CircuitError::GateAfterMeasure(q));
            }
        }
        self.ops.push(Operation::Gate {
            name: name.to_string(),
            angles: angles.to_vec(),
            qubits: qubits.to_vec(),
        });
        Ok(())
    }

    pub fn push_measure(&mut self, qubit: usize, bit: usize) -> Result<(), CircuitError> {
        if qubit >= self.num_qubits {
            return Err(CircuitError::QubitOutOfRange(qubit, self.num_qubits));
        }
        if bit >= self.classical_width {
            return Err(CircuitError::BitOutOfRange(bit, self.classical_width));
        }
        self.measurement_map.insert(qubit, bit)?;
        self.ops.push(Operation::Measure { qubit, bit });
        Ok(())
    }

    /// Longest chain of operations that conflict on a qubit or classical
    /// bit; measurement operations count.
    pub fn depth(&self) -> usize {
        #[derive(PartialEq, Eq, Hash)]
        enum Resource {
            Qubit(usize),
            Bit(usize),
        }
        let mut frontier: std::collections::HashMap<Resource, usize> = Default::default();
        let mut depth = 0;
        for op in &self.ops {
            let mut level = 0;
            for &q in op.qubits() {
                level = level.max(frontier.get(&Resource::Qubit(q)).copied().unwrap_or(0));
            }
            if let Some(b) = op.classical_bit() {
                level = level.max(frontier.get(&Resource::Bit(b)).copied().unwrap_or(0));
            }
            let level = level + 1;
            for &q in op.qubits() {
                frontier.insert(Resource::Qubit(q), level);
            }
            if let Some(b) = op.classical_bit() {
                frontier.insert(Resource::Bit(b), level);
            }
            depth = depth.max(level);
        }
        depth
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Gate { name, angles, qubits } => {
                write!(f, "{name}")?;
                if !angles.is_empty() {
                    let parts: Vec<String> = angles.iter().map(|a| format!("{a}")).collect();
                    write!(f, "({})", parts.join(", "))?;
                }
                let qs: Vec<String> = qubits.iter().map(|q| format!("q{q}")).collect();
                write!(f, " {}", qs.join(", "))
            }
            Operation::Measure { qubit, bit } => write!(f, "measure q{qubit} -> c{bit}"),
        }
    }
}

/// The Bell pair circuit with both qubits measured; handy in tests and
/// as the README example.
pub fn bell_circuit() -> Circuit {
    let mut c = Circuit::new(2, 2).expect("2 qubits");
    c.push_gate("h", &[], &[0]).unwrap();
    c.push_gate("cx", &[], &[0, 1]).unwrap();
    c.push_measure(0, 0).unwrap();
    c.push_measure(1, 1).unwrap();
    c
}
