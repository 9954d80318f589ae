//! Readings of a qubit meter prepared in `|0>_d`, coupled through
//! `exp(i g sigma_z (x) sigma_x)` and read out with `O = |1><1|_d`.
//!
//! Conditioned on system branch `|0>` or `|1>`, the meter ends in
//! `cos g |0> +/- i sin g |1>`. Both branches give `<O> = sin^2 g`; their
//! overlap is `cos 2g`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{check_non_negative, check_unit_interval, Error, Result};
use crate::gaussian::{MaxResult, PROB_FLOOR};
use crate::optimizer::PpsPoint;
use crate::qubit::{PureQubit, QubitDensity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitMeterReading {
    /// `<O>` in `[0, 1]`.
    pub reading: f64,
    /// Postselection probability; 1 when no postselection is made.
    pub prob: f64,
}

/// Reading without postselection: `sin^2 g`, whatever the system state.
pub fn ordinary_reading(g: f64) -> f64 {
    g.sin().powi(2)
}

/// Reading conditioned on finding the system in `psi_f`.
///
/// With `c = rho10 alpha2 conj(beta2)` and `w = rho00 |alpha2|^2 + rho11 |beta2|^2`:
///
/// ```text
/// Pro = w + 2 cos(2g) Re(c)
/// <O> = sin^2 g (w - 2 Re(c)) / Pro
/// ```
pub fn postselected_reading(
    rho_s: &QubitDensity,
    psi_f: &PureQubit,
    g: f64,
) -> Result<QubitMeterReading> {
    check_non_negative("g", g)?;
    let [a2, b2] = psi_f.amplitudes();
    let weight = rho_s.rho00() * a2.norm_sqr() + rho_s.rho11() * b2.norm_sqr();
    let cross = (rho_s.rho10() * a2 * b2.conj()).re;
    let prob = weight + 2.0 * (2.0 * g).cos() * cross;
    if prob <= PROB_FLOOR {
        return Err(Error::VanishingPostselection {
            prob,
            floor: PROB_FLOOR,
        });
    }
    Ok(QubitMeterReading {
        reading: ordinary_reading(g) * (weight - 2.0 * cross) / prob,
        prob,
    })
}

/// Largest postselected reading for a preselection of Bloch coherence `kappa`
/// (modulus `r`, or `1 - gamma` under depolarizing or phase-damping noise):
/// `(1 + kappa) sin^2 g / ((1 - kappa) + 2 kappa sin^2 g)`, reached by
/// orthogonal PPS.
pub fn qubit_max_reading(kappa: f64, g: f64) -> Result<MaxResult> {
    check_unit_interval("kappa", kappa)?;
    check_non_negative("g", g)?;
    let s2 = ordinary_reading(g);
    let value = if s2 == 0.0 {
        0.0
    } else {
        (1.0 + kappa) * s2 / ((1.0 - kappa) + 2.0 * kappa * s2)
    };
    Ok(MaxResult {
        value,
        argmax: PpsPoint::new(FRAC_PI_2, FRAC_PI_2, PI),
        mirror: None,
    })
}
