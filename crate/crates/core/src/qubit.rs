//! Qubit pure states, density matrices and their Bloch-sphere form.
//!
//! Every matrix is written in the eigenbasis `{|0>, |1>}` of the measured
//! system observable `A`, so the measurement axis never has to be stored.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{check_finite, Error, Result};

/// Tolerance for algebraic identities on 2x2 matrices.
pub const ALGEBRA_TOL: f64 = 1e-12;

pub type Matrix = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A normalized qubit state `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
///
/// The global phase is fixed so that the `|0>` amplitude is real and
/// non-negative; on the south pole the `|1>` amplitude is real positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit {
    theta: f64,
    phi: f64,
}

/// Builds the canonical pure state at polar angles `(theta, phi)`.
///
/// Any finite angles are accepted and folded into `theta in [0, pi]`,
/// `phi in [0, 2pi)` up to a global phase.
pub fn pure_state(theta: f64, phi: f64) -> Result<PureQubit> {
    check_finite("theta", theta)?;
    check_finite("phi", phi)?;
    let mut theta = theta.rem_euclid(TAU);
    let mut phi = phi;
    if theta > PI {
        // cos(pi - t/2) = -cos(t/2): same ray with the relative phase flipped.
        theta = TAU - theta;
        phi += PI;
    }
    let mut phi = phi.rem_euclid(TAU);
    if phi >= TAU {
        phi = 0.0;
    }
    if theta == 0.0 || theta == PI {
        phi = 0.0;
    }
    Ok(PureQubit { theta, phi })
}

impl PureQubit {
    /// `|0>`.
    pub const ZERO: PureQubit = PureQubit { theta: 0.0, phi: 0.0 };

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new((self.theta / 2.0).cos(), 0.0)
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::from_polar((self.theta / 2.0).sin(), self.phi)
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.alpha(), self.beta()]
    }

    /// Normalizes an arbitrary non-zero amplitude pair and strips its global phase.
    pub fn from_amplitudes(a: Complex64, b: Complex64) -> Result<PureQubit> {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState(format!(
                "amplitudes ({a}, {b}) cannot be normalized"
            )));
        }
        let theta = 2.0 * b.norm().atan2(a.norm());
        let phi = if a.norm() == 0.0 || b.norm() == 0.0 {
            0.0
        } else {
            b.arg() - a.arg()
        };
        pure_state(theta, phi)
    }

    /// `|psi><psi|`.
    pub fn density(&self) -> QubitDensity {
        let [a, b] = self.amplitudes();
        QubitDensity {
            m: Matrix::new(a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj()),
        }
    }

    /// The state orthogonal to this one (antipodal Bloch point).
    pub fn orthogonal(&self) -> PureQubit {
        // theta + pi lands in (pi, 2pi]; pure_state folds it back.
        pure_state(PI - self.theta, self.phi + PI).expect("finite angles")
    }
}

/// `<a|b>`.
pub fn overlap(a: &PureQubit, b: &PureQubit) -> Complex64 {
    let [a0, a1] = a.amplitudes();
    let [b0, b1] = b.amplitudes();
    a0.conj() * b0 + a1.conj() * b1
}

/// A point `(rx, ry, rz)` of the closed Bloch ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl BlochVector {
    pub const fn new(rx: f64, ry: f64, rz: f64) -> Self {
        BlochVector { rx, ry, rz }
    }

    pub fn modulus(&self) -> f64 {
        (self.rx * self.rx + self.ry * self.ry + self.rz * self.rz).sqrt()
    }
}

/// A 2x2 Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensity {
    m: Matrix,
}

impl QubitDensity {
    /// The maximally mixed state `I/2`.
    pub fn maximally_mixed() -> Self {
        QubitDensity {
            m: Matrix::new(
                Complex64::new(0.5, 0.0),
                ZERO,
                ZERO,
                Complex64::new(0.5, 0.0),
            ),
        }
    }

    /// Validates `m` against the density-matrix invariants and symmetrizes
    /// away sub-tolerance round-off.
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        for z in m.iter() {
            check_finite("density entry", z.re)?;
            check_finite("density entry", z.im)?;
        }
        let herm = (m[(0, 1)] - m[(1, 0)].conj()).norm();
        if herm > ALGEBRA_TOL || m[(0, 0)].im.abs() > ALGEBRA_TOL || m[(1, 1)].im.abs() > ALGEBRA_TOL
        {
            return Err(Error::InvalidState(format!("matrix is not Hermitian: {m}")));
        }
        let trace = m[(0, 0)].re + m[(1, 1)].re;
        if (trace - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::InvalidState(format!("trace {trace} != 1")));
        }
        let rho = Self::hermitian_part(&m);
        let (lo, _) = rho.eigenvalues();
        if lo < -ALGEBRA_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {lo}"
            )));
        }
        Ok(rho)
    }

    /// Wraps a matrix that is a density matrix by construction, keeping only its
    /// Hermitian part.
    pub(crate) fn hermitian_part(m: &Matrix) -> Self {
        let off = (m[(1, 0)] + m[(0, 1)].conj()) * 0.5;
        QubitDensity {
            m: Matrix::new(
                Complex64::new(m[(0, 0)].re, 0.0),
                off.conj(),
                off,
                Complex64::new(m[(1, 1)].re, 0.0),
            ),
        }
    }

    /// `(1 - r) I/2 + r |psi><psi|`.
    pub fn mixed(modulus: f64, psi: &PureQubit) -> Result<Self> {
        crate::error::check_unit_interval("modulus", modulus)?;
        let pure = psi.density().m;
        let mixed = Self::maximally_mixed().m;
        Ok(Self::hermitian_part(
            &(mixed * Complex64::new(1.0 - modulus, 0.0) + pure * Complex64::new(modulus, 0.0)),
        ))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn rho00(&self) -> f64 {
        self.m[(0, 0)].re
    }

    pub fn rho11(&self) -> f64 {
        self.m[(1, 1)].re
    }

    pub fn rho01(&self) -> Complex64 {
        self.m[(0, 1)]
    }

    pub fn rho10(&self) -> Complex64 {
        self.m[(1, 0)]
    }

    pub fn trace(&self) -> f64 {
        self.rho00() + self.rho11()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.rho00() + self.rho11());
        let half_gap = (0.25 * (self.rho00() - self.rho11()).powi(2) + self.rho10().norm_sqr()).sqrt();
        (mean - half_gap, mean + half_gap)
    }

    pub fn bloch(&self) -> BlochVector {
        bloch_from_density(self)
    }

    /// `<psi|rho|psi>`.
    pub fn expectation(&self, psi: &PureQubit) -> f64 {
        let [a, b] = psi.amplitudes();
        let v = a.conj() * (self.m[(0, 0)] * a + self.m[(0, 1)] * b)
            + b.conj() * (self.m[(1, 0)] * a + self.m[(1, 1)] * b);
        v.re
    }
}

/// `rho = (I + r.sigma)/2`.
pub fn density_from_bloch(v: BlochVector) -> Result<QubitDensity> {
    check_finite("rx", v.rx)?;
    check_finite("ry", v.ry)?;
    check_finite("rz", v.rz)?;
    let r = v.modulus();
    if r > 1.0 + ALGEBRA_TOL {
        return Err(Error::InvalidState(format!(
            "Bloch modulus {r} exceeds 1"
        )));
    }
    let off = Complex64::new(0.5 * v.rx, 0.5 * v.ry);
    Ok(QubitDensity {
        m: Matrix::new(
            Complex64::new(0.5 * (1.0 + v.rz), 0.0),
            off.conj(),
            off,
            Complex64::new(0.5 * (1.0 - v.rz), 0.0),
        ),
    })
}

pub fn bloch_from_density(rho: &QubitDensity) -> BlochVector {
    let off = rho.rho10();
    BlochVector {
        rx: 2.0 * off.re,
        ry: 2.0 * off.im,
        rz: rho.rho00() - rho.rho11(),
    }
}

/// `rho = (1 - r) I/2 + r |psi><psi|`, with `r` the Bloch modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub modulus: f64,
    pub state: PureQubit,
    /// `r = 0`: any `psi` reconstructs `rho`; `state` is `|0>`.
    pub degenerate: bool,
}

pub fn decompose(rho: &QubitDensity) -> Decomposition {
    let v = rho.bloch();
    let r = v.modulus();
    if r <= f64::EPSILON {
        return Decomposition {
            modulus: r,
            state: PureQubit::ZERO,
            degenerate: true,
        };
    }
    let theta = (v.rz / r).clamp(-1.0, 1.0).acos();
    let phi = v.ry.atan2(v.rx);
    Decomposition {
        modulus: r,
        state: pure_state(theta, phi).expect("finite Bloch angles"),
        degenerate: false,
    }
}
