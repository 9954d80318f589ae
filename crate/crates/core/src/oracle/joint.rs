//! Exact system (x) qubit-meter evolution with explicit 4x4 matrices.
//!
//! Index convention: `2 * system + meter`.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{check_non_negative, Error, Result};
use crate::qubit::{Matrix, PureQubit, QubitDensity};
use crate::qubit_meter::QubitMeterReading;

pub type JointMatrix = Matrix4<Complex64>;

/// Probabilities at or below this abort the conditional reading.
pub const JOINT_PROB_FLOOR: f64 = 1e-300;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn kron(a: &Matrix, b: &Matrix) -> JointMatrix {
    JointMatrix::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

pub fn pauli_x() -> Matrix {
    Matrix::new(c(0.0), c(1.0), c(1.0), c(0.0))
}

pub fn pauli_z() -> Matrix {
    Matrix::new(c(1.0), c(0.0), c(0.0), c(-1.0))
}

/// `exp(i g sigma_z (x) sigma_x) = cos g I + i sin g sigma_z (x) sigma_x`,
/// exact because the generator squares to the identity.
pub fn interaction_unitary(g: f64) -> JointMatrix {
    let generator = kron(&pauli_z(), &pauli_x());
    JointMatrix::identity() * c(g.cos()) + generator * Complex64::new(0.0, g.sin())
}

/// `U (rho_s (x) |0><0|) U^dag`.
pub fn qubit_joint_state(rho_s: &QubitDensity, g: f64) -> JointMatrix {
    let meter0 = Matrix::new(c(1.0), c(0.0), c(0.0), c(0.0));
    let u = interaction_unitary(g);
    u * kron(rho_s.matrix(), &meter0) * u.adjoint()
}

/// Partial trace over the system factor.
pub fn trace_out_system(joint: &JointMatrix) -> Matrix {
    Matrix::from_fn(|r, col| joint[(r, col)] + joint[(2 + r, 2 + col)])
}

/// Meter reading `tr(O rho_d')`, `O = |1><1|`, optionally conditioned on the
/// system being found in `psi_f`.
pub fn qubit_joint_evolve(
    rho_s: &QubitDensity,
    psi_f: Option<&PureQubit>,
    g: f64,
) -> Result<QubitMeterReading> {
    check_non_negative("g", g)?;
    let joint = qubit_joint_state(rho_s, g);
    let projected = match psi_f {
        None => joint,
        Some(f) => {
            let [a, b] = f.amplitudes();
            let pi_f = Matrix::new(a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj());
            let p = kron(&pi_f, &Matrix::identity());
            p * joint * p
        }
    };
    let meter = trace_out_system(&projected);
    let prob = meter.trace().re;
    if prob <= JOINT_PROB_FLOOR {
        return Err(Error::VanishingPostselection {
            prob,
            floor: JOINT_PROB_FLOOR,
        });
    }
    Ok(QubitMeterReading {
        reading: meter[(1, 1)].re / prob,
        prob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::pure_state;
    use std::f64::consts::PI;

    #[test]
    fn unitary_is_unitary() {
        let u = interaction_unitary(0.37);
        let err = (u * u.adjoint() - JointMatrix::identity()).norm();
        assert!(err < 1e-15);
    }

    #[test]
    fn ordinary_reading_without_postselection() {
        let rho = pure_state(1.3, 0.2).unwrap().density();
        let r = qubit_joint_evolve(&rho, None, 0.1).unwrap();
        assert!((r.reading - 0.1f64.sin().powi(2)).abs() < 1e-15);
        assert_eq!(r.prob, 1.0);
    }

    #[test]
    fn orthogonal_pps_reads_one() {
        let pre = pure_state(0.8, PI).unwrap();
        let post = pure_state(PI - 0.8, 0.0).unwrap();
        let r = qubit_joint_evolve(&pre.density(), Some(&post), 0.1).unwrap();
        assert!((r.reading - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_coupling_is_identity() {
        let rho = pure_state(2.0, 0.5).unwrap().density();
        let f = pure_state(1.0, 0.0).unwrap();
        let r = qubit_joint_evolve(&rho, Some(&f), 0.0).unwrap();
        assert_eq!(r.reading, 0.0);
        assert!((r.prob - rho.expectation(&f)).abs() < 1e-15);
        let zero = pure_state(0.0, 0.0).unwrap();
        let e = qubit_joint_evolve(&zero.density(), Some(&zero.orthogonal()), 0.0);
        // cos(pi/2) is not exactly zero, so the probability is round-off sized.
        match e {
            Err(Error::VanishingPostselection { .. }) => {}
            Ok(r) => assert!(r.prob < 1e-30),
            Err(other) => panic!("{other}"),
        }
    }

    #[test]
    fn joint_state_is_exact() {
        let rho = pure_state(2.4, 4.1).unwrap().density();
        let j = qubit_joint_state(&rho, 0.23);
        assert!((j.trace() - c(1.0)).norm() < 1e-15);
        assert!((j - j.adjoint()).norm() < 1e-15);
    }
}
