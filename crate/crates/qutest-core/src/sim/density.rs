//! Reduced density matrices and the entanglement witness entropy.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{SimError, Statevector};

/// Eigenvalues below this are treated as exactly zero in the entropy sum.
const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Hermitian, unit-trace matrix describing a (possibly mixed) state on a
/// qubit subset.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Wrap a matrix, enforcing Hermiticity and unit trace to 1e-10.
    pub fn new(data: DMatrix<Complex64>) -> Result<Self, SimError> {
        if !data.is_square() {
            return Err(SimError::InvalidDensityMatrix(format!(
                "matrix is {}x{}, not square",
                data.nrows(),
                data.ncols()
            )));
        }
        let dm = DensityMatrix { data };
        let herm = dm.hermiticity_defect();
        if herm > 1e-10 {
            return Err(SimError::InvalidDensityMatrix(format!(
                "not Hermitian (defect {herm:.3e})"
            )));
        }
        let trace = dm.trace();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(SimError::InvalidDensityMatrix(format!("trace is {trace}, not 1")));
        }
        Ok(dm)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    /// Real part of the trace; the imaginary part vanishes for Hermitian
    /// matrices.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re).sum()
    }

    /// Largest |ρ[i,j] − conj(ρ[j,i])| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                defect = defect.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        defect
    }

    /// Real eigenvalues of the Hermitian matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = self.data.clone().symmetric_eigenvalues();
        let mut values: Vec<f64> = eig.iter().copied().collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
        values
    }
}

/// Trace out every qubit not in `keep`: ρ_A = Tr_B |ψ⟩⟨ψ|.
///
/// Bit `l` of a reduced-space index corresponds to `keep[l]`. `keep` must
/// be a non-empty strict subset of the state's qubits without duplicates.
pub fn partial_trace(state: &Statevector, keep: &[usize]) -> Result<DensityMatrix, SimError> {
    let n = state.num_qubits();
    if keep.is_empty() {
        return Err(SimError::BadPartition("partition must keep at least one qubit".into()));
    }
    if keep.len() >= n {
        return Err(SimError::BadPartition(
            "partition must be a strict subset of the circuit's qubits".into(),
        ));
    }
    for (i, &q) in keep.iter().enumerate() {
        if q >= n {
            return Err(SimError::BadPartition(format!(
                "qubit {q} out of range for {n} qubit(s)"
            )));
        }
        if keep[i + 1..].contains(&q) {
            return Err(SimError::BadPartition(format!("duplicate qubit {q} in partition")));
        }
    }

    let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dim_keep = 1usize << keep.len();
    let dim_rest = 1usize << rest.len();
    let amps = state.amplitudes();

    let compose = |kept_bits: usize, env_bits: usize| -> usize {
        let mut basis = 0usize;
        for (l, &q) in keep.iter().enumerate() {
            basis |= (kept_bits >> l & 1) << q;
        }
        for (m, &q) in rest.iter().enumerate() {
            basis |= (env_bits >> m & 1) << q;
        }
        basis
    };

    let mut data = DMatrix::from_element(dim_keep, dim_keep, Complex64::new(0.0, 0.0));
    for env in 0..dim_rest {
        for row in 0..dim_keep {
            let a_row = amps[compose(row, env)];
            if a_row.norm_sqr() == 0.0 {
                continue;
            }
            for col in 0..dim_keep {
                data[(row, col)] += a_row * amps[compose(col, env)].conj();
            }
        }
    }
    DensityMatrix::new(data)
}

/// S(ρ) = −Σ λ log₂ λ over eigenvalues, with 0·log 0 = 0. In bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .filter(|&lambda| lambda > EIGENVALUE_FLOOR)
        .map(|lambda| -lambda * lambda.log2())
        .sum()
}
