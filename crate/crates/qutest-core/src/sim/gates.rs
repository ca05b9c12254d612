//! Gate kernels over a dense amplitude vector.
//!
//! Basis convention: amplitude index `b` encodes qubit `k` in bit `k` of
//! `b`, so |q1 q0⟩ = |10⟩ lives at index 2.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::circuit::CircuitError;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// 2x2 unitary of a single-qubit gate, row-major.
fn single_qubit_matrix(name: &str, angles: &[f64]) -> Option<[C; 4]> {
    let m = match name {
        "h" => [
            c(FRAC_1_SQRT_2, 0.0),
            c(FRAC_1_SQRT_2, 0.0),
            c(FRAC_1_SQRT_2, 0.0),
            c(-FRAC_1_SQRT_2, 0.0),
        ],
        "x" => [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        "y" => [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        "z" => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        "s" => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)],
        "sdg" => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)],
        "t" => [
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            C::from_polar(1.0, std::f64::consts::FRAC_PI_4),
        ],
        "tdg" => [
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            C::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
        ],
        "sx" => [
            c(0.5, 0.5),
            c(0.5, -0.5),
            c(0.5, -0.5),
            c(0.5, 0.5),
        ],
        "rx" => {
            let half = angles[0] / 2.0;
            [
                c(half.cos(), 0.0),
                c(0.0, -half.sin()),
                c(0.0, -half.sin()),
                c(half.cos(), 0.0),
            ]
        }
        "ry" => {
            let half = angles[0] / 2.0;
            [
                c(half.cos(), 0.0),
                c(-half.sin(), 0.0),
                c(half.sin(), 0.0),
                c(half.cos(), 0.0),
            ]
        }
        "rz" => {
            let half = angles[0] / 2.0;
            [
                C::from_polar(1.0, -half),
                c(0.0, 0.0),
                c(0.0, 0.0),
                C::from_polar(1.0, half),
            ]
        }
        "p" => [
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            C::from_polar(1.0, angles[0]),
        ],
        "u" => {
            let (theta, phi, lambda) = (angles[0], angles[1], angles[2]);
            let half = theta / 2.0;
            [
                c(half.cos(), 0.0),
                -C::from_polar(1.0, lambda) * half.sin(),
                C::from_polar(1.0, phi) * half.sin(),
                C::from_polar(1.0, phi + lambda) * half.cos(),
            ]
        }
        _ => return None,
    };
    Some(m)
}

fn apply_single(state: &mut [C], target: usize, m: &[C; 4]) {
    let mask = 1usize << target;
    for base in 0..state.len() {
        if base & mask == 0 {
            let hi = base | mask;
            let a0 = state[base];
            let a1 = state[hi];
            state[base] = m[0] * a0 + m[1] * a1;
            state[hi] = m[2] * a0 + m[3] * a1;
        }
    }
}

/// Apply one named gate in place. The amplitude vector length fixes the
/// qubit count; operand validity is the caller's responsibility.
pub(crate) fn apply_gate(
    state: &mut [C],
    name: &str,
    angles: &[f64],
    qubits: &[usize],
) -> Result<(), CircuitError> {
    if let Some(m) = single_qubit_matrix(name, angles) {
        apply_single(state, qubits[0], &m);
        return Ok(());
    }
    match name {
        "cx" => {
            let (control, target) = (1usize << qubits[0], 1usize << qubits[1]);
            for i in 0..state.len() {
                if i & control != 0 && i & target == 0 {
                    state.swap(i, i | target);
                }
            }
        }
        "cz" => {
            let both = (1usize << qubits[0]) | (1usize << qubits[1]);
            for (i, amp) in state.iter_mut().enumerate() {
                if i & both == both {
                    *amp = -*amp;
                }
            }
        }
        "cp" => {
            let both = (1usize << qubits[0]) | (1usize << qubits[1]);
            let phase = C::from_polar(1.0, angles[0]);
            for (i, amp) in state.iter_mut().enumerate() {
                if i & both == both {
                    *amp *= phase;
                }
            }
        }
        "swap" => {
            let (a, b) = (1usize << qubits[0], 1usize << qubits[1]);
            for i in 0..state.len() {
                if i & a != 0 && i & b == 0 {
                    state.swap(i, i ^ a ^ b);
                }
            }
        }
        "ccx" => {
            let controls = (1usize << qubits[0]) | (1usize << qubits[1]);
            let target = 1usize << qubits[2];
            for i in 0..state.len() {
                if i & controls == controls && i & target == 0 {
                    state.swap(i, i | target);
                }
            }
        }
        other => return Err(CircuitError::UnknownGate(other.to_string())),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn zero_state(n: usize) -> Vec<C> {
        let mut v = vec![c(0.0, 0.0); 1 << n];
        v[0] = c(1.0, 0.0);
        v
    }

    fn norm(state: &[C]) -> f64 {
        state.iter().map(|a| a.norm_sqr()).sum()
    }

    #[test]
    fn x_flips_bit() {
        let mut s = zero_state(1);
        apply_gate(&mut s, "x", &[], &[0]).unwrap();
        assert_abs_diff_eq!(s[1].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[0].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bell_amplitudes() {
        let mut s = zero_state(2);
        apply_gate(&mut s, "h", &[], &[0]).unwrap();
        apply_gate(&mut s, "cx", &[], &[0, 1]).unwrap();
        assert_abs_diff_eq!(s[0].re, FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(s[3].re, FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[2].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn self_inverse_pairs_return_to_start() {
        for (name, angles) in [
            ("h", vec![]),
            ("x", vec![]),
            ("y", vec![]),
            ("z", vec![]),
            ("swap", vec![]),
            ("cx", vec![]),
            ("cz", vec![]),
            ("ccx", vec![]),
        ] {
            let spec = crate::circuit::gate_spec(name).unwrap();
            let qubits: Vec<usize> = (0..spec.qubits).collect();
            let mut s = zero_state(3);
            // Move off the basis state first so phases matter.
            apply_gate(&mut s, "h", &[], &[0]).unwrap();
            apply_gate(&mut s, "ry", &[0.7], &[1]).unwrap();
            apply_gate(&mut s, "rx", &[0.3], &[2]).unwrap();
            let before = s.clone();
            apply_gate(&mut s, name, &angles, &qubits).unwrap();
            apply_gate(&mut s, name, &angles, &qubits).unwrap();
            for (a, b) in s.iter().zip(&before) {
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn inverse_angle_pairs() {
        for name in ["rx", "ry", "rz", "p"] {
            let mut s = zero_state(2);
            apply_gate(&mut s, "h", &[], &[0]).unwrap();
            let before = s.clone();
            apply_gate(&mut s, name, &[0.917], &[0]).unwrap();
            apply_gate(&mut s, name, &[-0.917], &[0]).unwrap();
            for (a, b) in s.iter().zip(&before) {
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-10);
            }
        }
        // s/sdg and t/tdg are inverse pairs.
        for (fwd, bwd) in [("s", "sdg"), ("t", "tdg")] {
            let mut s = zero_state(1);
            apply_gate(&mut s, "h", &[], &[0]).unwrap();
            let before = s.clone();
            apply_gate(&mut s, fwd, &[], &[0]).unwrap();
            apply_gate(&mut s, bwd, &[], &[0]).unwrap();
            for (a, b) in s.iter().zip(&before) {
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sx_squared_is_x() {
        let mut s = zero_state(1);
        apply_gate(&mut s, "sx", &[], &[0]).unwrap();
        apply_gate(&mut s, "sx", &[], &[0]).unwrap();
        assert_abs_diff_eq!(s[1].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn u_gate_matches_ry_rz_decomposition() {
        // u(theta, 0, 0) == ry(theta)
        let mut a = zero_state(1);
        let mut b = zero_state(1);
        apply_gate(&mut a, "u", &[0.6, 0.0, 0.0], &[0]).unwrap();
        apply_gate(&mut b, "ry", &[0.6], &[0]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gates_preserve_norm() {
        let mut s = zero_state(3);
        for (name, angles, qubits) in [
            ("h", vec![], vec![0]),
            ("u", vec![0.3, 1.1, -0.4], vec![1]),
            ("cx", vec![], vec![0, 2]),
            ("cp", vec![0.9], vec![1, 2]),
            ("ccx", vec![], vec![0, 1, 2]),
            ("swap", vec![], vec![0, 2]),
        ] {
            apply_gate(&mut s, name, &angles, &qubits).unwrap();
            assert_abs_diff_eq!(norm(&s), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn unknown_gate_is_an_error() {
        let mut s = zero_state(1);
        assert!(apply_gate(&mut s, "bogus", &[], &[0]).is_err());
    }
}
