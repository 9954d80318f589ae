//! Depolarizing, phase-damping and amplitude-damping noise on the
//! preselected qubit.

use std::fmt;

use num_complex::Complex64;

use crate::error::{check_unit_interval, Result};
use crate::qubit::{Matrix, PureQubit, QubitDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Depolarizing,
    PhaseDamping,
    AmplitudeDamping,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::PhaseDamping => "phase_damping",
            ChannelKind::AmplitudeDamping => "amplitude_damping",
        })
    }
}

/// A single-qubit noise channel of strength `gamma` with its Kraus operators.
///
/// [`KrausChannel::apply`] evaluates the channel's closed-form state map;
/// [`KrausChannel::apply_kraus`] evaluates `sum_k E_k rho E_k^dag` from the
/// stored operators. The two agree to round-off.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kind: ChannelKind,
    gamma: f64,
    operators: Vec<Matrix>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn diag(a: f64, b: f64) -> Matrix {
    Matrix::new(c(a), c(0.0), c(0.0), c(b))
}

/// `rho -> gamma I/2 + (1 - gamma) rho`.
///
/// Operators: `sqrt(1 - 3 gamma/4) I` and `sqrt(gamma/4)` times each Pauli.
pub fn depolarizing(gamma: f64) -> Result<KrausChannel> {
    check_unit_interval("gamma", gamma)?;
    let i = Complex64::i();
    let w0 = (1.0 - 0.75 * gamma).sqrt();
    let w = (0.25 * gamma).sqrt();
    let operators = vec![
        diag(w0, w0),
        Matrix::new(c(0.0), c(w), c(w), c(0.0)),
        Matrix::new(c(0.0), -i * w, i * w, c(0.0)),
        diag(w, -w),
    ];
    Ok(KrausChannel {
        kind: ChannelKind::Depolarizing,
        gamma,
        operators,
    })
}

/// Populations fixed, coherences multiplied by `1 - gamma`.
///
/// The stored pair is `diag(1, 1 - gamma)`, `diag(0, sqrt(1 - (1 - gamma)^2))`,
/// which is trace preserving and yields exactly that coherence factor.
pub fn phase_damping(gamma: f64) -> Result<KrausChannel> {
    check_unit_interval("gamma", gamma)?;
    let keep = 1.0 - gamma;
    let operators = vec![diag(1.0, keep), diag(0.0, (1.0 - keep * keep).max(0.0).sqrt())];
    Ok(KrausChannel {
        kind: ChannelKind::PhaseDamping,
        gamma,
        operators,
    })
}

/// Decay of `|1>` into `|0>` with probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_unit_interval("gamma", gamma)?;
    let operators = vec![
        diag(1.0, (1.0 - gamma).sqrt()),
        Matrix::new(c(0.0), c(gamma.sqrt()), c(0.0), c(0.0)),
    ];
    Ok(KrausChannel {
        kind: ChannelKind::AmplitudeDamping,
        gamma,
        operators,
    })
}

impl KrausChannel {
    pub fn new(kind: ChannelKind, gamma: f64) -> Result<Self> {
        match kind {
            ChannelKind::Depolarizing => depolarizing(gamma),
            ChannelKind::PhaseDamping => phase_damping(gamma),
            ChannelKind::AmplitudeDamping => amplitude_damping(gamma),
        }
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn operators(&self) -> &[Matrix] {
        &self.operators
    }

    /// `sum_k E_k^dag E_k`.
    pub fn completeness(&self) -> Matrix {
        self.operators
            .iter()
            .fold(Matrix::zeros(), |acc, e| acc + e.adjoint() * e)
    }

    pub fn apply(&self, rho: &QubitDensity) -> QubitDensity {
        let g = self.gamma;
        let m = rho.matrix();
        let out = match self.kind {
            ChannelKind::Depolarizing => {
                QubitDensity::maximally_mixed().matrix() * c(g) + m * c(1.0 - g)
            }
            ChannelKind::PhaseDamping => {
                let k = 1.0 - g;
                Matrix::new(m[(0, 0)], m[(0, 1)] * k, m[(1, 0)] * k, m[(1, 1)])
            }
            ChannelKind::AmplitudeDamping => {
                let s = (1.0 - g).sqrt();
                Matrix::new(
                    m[(0, 0)] + m[(1, 1)] * g,
                    m[(0, 1)] * s,
                    m[(1, 0)] * s,
                    m[(1, 1)] * (1.0 - g),
                )
            }
        };
        QubitDensity::hermitian_part(&out)
    }

    pub fn apply_kraus(&self, rho: &QubitDensity) -> QubitDensity {
        let m = rho.matrix();
        let out = self
            .operators
            .iter()
            .fold(Matrix::zeros(), |acc, e| acc + e * m * e.adjoint());
        QubitDensity::hermitian_part(&out)
    }

    /// Factor by which the channel shrinks off-diagonal entries, when that
    /// factor alone fixes the amplification maxima.
    ///
    /// Depolarizing and phase-damping noise give `1 - gamma`. Amplitude
    /// damping also moves the populations, so it returns `None`.
    pub fn closed_form_coherence(&self) -> Option<f64> {
        match self.kind {
            ChannelKind::AmplitudeDamping => None,
            _ => {
                let plus = QubitDensity::hermitian_part(&Matrix::from_element(c(0.5)));
                Some(2.0 * self.apply_kraus(&plus).rho10().norm())
            }
        }
    }

    /// The channel applied to a pure preselection state.
    pub fn apply_pure(&self, psi: &PureQubit) -> QubitDensity {
        self.apply(&psi.density())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{decompose, density_from_bloch, overlap, pure_state, BlochVector};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn assert_matrix_close(a: &Matrix, b: &Matrix, tol: f64) {
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() <= tol, "{a} vs {b}");
        }
    }

    #[test]
    fn gamma_is_validated() {
        for kind in [ChannelKind::Depolarizing, ChannelKind::PhaseDamping, ChannelKind::AmplitudeDamping] {
            assert!(KrausChannel::new(kind, -0.01).is_err());
            assert!(KrausChannel::new(kind, 1.01).is_err());
            assert!(KrausChannel::new(kind, f64::NAN).is_err());
            assert!(KrausChannel::new(kind, 0.0).is_ok());
            assert!(KrausChannel::new(kind, 1.0).is_ok());
        }
    }

    #[test]
    fn identity_at_zero_strength() {
        let rho = density_from_bloch(BlochVector::new(0.3, -0.4, 0.5)).unwrap();
        for kind in [ChannelKind::Depolarizing, ChannelKind::PhaseDamping, ChannelKind::AmplitudeDamping] {
            let ch = KrausChannel::new(kind, 0.0).unwrap();
            assert_matrix_close(ch.apply(&rho).matrix(), rho.matrix(), 1e-15);
        }
    }

    #[test]
    fn depolarizing_examples() {
        let rho = density_from_bloch(BlochVector::new(0.3, -0.4, 0.5)).unwrap();
        let full = depolarizing(1.0).unwrap().apply(&rho);
        assert_matrix_close(full.matrix(), QubitDensity::maximally_mixed().matrix(), 1e-15);

        let psi = pure_state(2.0, 0.5).unwrap();
        let d = decompose(&depolarizing(0.4).unwrap().apply_pure(&psi));
        assert!((d.modulus - 0.6).abs() < 1e-12);
        assert!((overlap(&d.state, &psi).norm() - 1.0).abs() < 1e-10);

        let pole = density_from_bloch(BlochVector::new(0.0, 0.0, 1.0)).unwrap();
        let half = depolarizing(0.5).unwrap().apply(&pole).bloch();
        assert!(half.rx.abs() < 1e-15 && half.ry.abs() < 1e-15);
        assert!((half.rz - 0.5).abs() < 1e-15);
    }

    #[test]
    fn phase_damping_examples() {
        let plus = pure_state(PI / 2.0, 0.0).unwrap();
        let out = phase_damping(0.3).unwrap().apply_pure(&plus);
        assert!((out.rho00() - 0.5).abs() < 1e-15);
        assert!((out.rho11() - 0.5).abs() < 1e-15);
        assert!((out.rho01() - c(0.35)).norm() < 1e-15);
        assert!((out.rho10() - c(0.35)).norm() < 1e-15);

        let psi = pure_state(1.0, 2.0).unwrap();
        let out = phase_damping(1.0).unwrap().apply_pure(&psi);
        assert!(out.rho01().norm() < 1e-15);
        assert!((out.rho00() - psi.alpha().norm_sqr()).abs() < 1e-15);

        let mixed = phase_damping(0.7).unwrap().apply(&QubitDensity::maximally_mixed());
        assert_eq!(mixed, QubitDensity::maximally_mixed());
    }

    #[test]
    fn amplitude_damping_examples() {
        let one = pure_state(PI, 0.0).unwrap();
        let out = amplitude_damping(0.4).unwrap().apply_pure(&one);
        assert!((out.rho00() - 0.4).abs() < 1e-15);
        assert!((out.rho11() - 0.6).abs() < 1e-15);
        assert!(out.rho01().norm() < 1e-15);

        let psi = pure_state(1.0, 2.0).unwrap();
        let out = amplitude_damping(1.0).unwrap().apply_pure(&psi);
        assert_matrix_close(out.matrix(), PureQubit::ZERO.density().matrix(), 1e-15);

        let plus = pure_state(PI / 2.0, 0.0).unwrap();
        assert!((plus.alpha().re - FRAC_1_SQRT_2).abs() < 1e-15);
        let out = amplitude_damping(0.36).unwrap().apply_pure(&plus);
        assert!((out.rho01() - c(0.4)).norm() < 1e-15);
    }

    #[test]
    fn coherence_factor() {
        for &g in &[0.0, 0.3, 1.0] {
            assert!((depolarizing(g).unwrap().closed_form_coherence().unwrap() - (1.0 - g)).abs() < 1e-15);
            assert!((phase_damping(g).unwrap().closed_form_coherence().unwrap() - (1.0 - g)).abs() < 1e-15);
            assert_eq!(amplitude_damping(g).unwrap().closed_form_coherence(), None);
        }
    }

    #[test]
    fn stored_operators_are_complete() {
        for kind in [ChannelKind::Depolarizing, ChannelKind::PhaseDamping, ChannelKind::AmplitudeDamping] {
            for &g in &[0.0, 0.13, 0.5, 0.77, 1.0] {
                let ch = KrausChannel::new(kind, g).unwrap();
                assert_matrix_close(&ch.completeness(), &Matrix::identity(), 1e-12);
            }
        }
    }

    #[test]
    fn printed_phase_damping_pair_is_not_trace_preserving() {
        // E0 = diag(1, 1 - g), E1 = diag(0, g) gives diag(1, (1-g)^2 + g^2).
        let g = 0.3;
        let e0 = diag(1.0, 1.0 - g);
        let e1 = diag(0.0, g);
        let sum = e0.adjoint() * e0 + e1.adjoint() * e1;
        assert!((sum[(1, 1)].re - 0.58).abs() < 1e-15);
        let stored = phase_damping(g).unwrap();
        assert_eq!(stored.operators()[0], e0);
    }
}
