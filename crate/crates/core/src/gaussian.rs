//! Postselected pointer shifts of a minimum-uncertainty Gaussian meter
//! coupled to the system through `exp(i g A q)`.
//!
//! The system observable `A` is `+1` on `|0>` and `-1` on `|1>`, so the two
//! system branches kick the pointer momentum by `+g` and `-g`. Their
//! interference is damped by `<e^{-2igq}> = exp(-2 Delta^2 g^2)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{check_finite, check_non_negative, check_unit_interval, Error, Result};
use crate::optimizer::PpsPoint;
use crate::qubit::{PureQubit, QubitDensity};

/// Postselection probabilities at or below this are treated as zero.
pub const PROB_FLOOR: f64 = 1e-12;

/// Pointer prepared in a centered Gaussian with position spread `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMeter {
    delta: f64,
}

impl GaussianMeter {
    pub fn new(delta: f64) -> Result<Self> {
        check_finite("delta", delta)?;
        if delta <= 0.0 {
            return Err(Error::Domain {
                name: "delta",
                value: delta,
                domain: "(0, inf)",
            });
        }
        Ok(GaussianMeter { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Position standard deviation.
    pub fn dq(&self) -> f64 {
        self.delta
    }

    /// Momentum standard deviation, `1/(2 Delta)` with hbar = 1.
    pub fn dp(&self) -> f64 {
        0.5 / self.delta
    }

    /// Overlap `exp(-2 Delta^2 g^2)` of the two oppositely kicked pointer branches.
    pub fn branch_overlap(&self, g: f64) -> f64 {
        (-2.0 * self.delta * self.delta * g * g).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftResult {
    /// Conditional momentum shift.
    pub dp_shift: f64,
    /// Conditional position shift.
    pub dq_shift: f64,
    /// Postselection probability.
    pub prob: f64,
}

/// Pointer shifts conditioned on finding the system in `psi_f`.
///
/// With `c = rho10 alpha2 conj(beta2)` and `e = exp(-2 Delta^2 g^2)`:
///
/// ```text
/// Pro = rho00 |alpha2|^2 + rho11 |beta2|^2 + 2 e Re(c)
/// dp  = g (rho00 |alpha2|^2 - rho11 |beta2|^2) / Pro
/// dq  = 4 g Delta^2 e Im(c) / Pro
/// ```
pub fn gaussian_shifts(
    rho_s: &QubitDensity,
    psi_f: &PureQubit,
    g: f64,
    meter: &GaussianMeter,
) -> Result<ShiftResult> {
    check_non_negative("g", g)?;
    let [a2, b2] = psi_f.amplitudes();
    let upper = rho_s.rho00() * a2.norm_sqr();
    let lower = rho_s.rho11() * b2.norm_sqr();
    let cross = rho_s.rho10() * a2 * b2.conj();
    let e = meter.branch_overlap(g);
    let prob = upper + lower + 2.0 * e * cross.re;
    if prob <= PROB_FLOOR {
        return Err(Error::VanishingPostselection {
            prob,
            floor: PROB_FLOOR,
        });
    }
    let d2 = meter.delta * meter.delta;
    Ok(ShiftResult {
        dp_shift: g * (upper - lower) / prob,
        dq_shift: 4.0 * g * d2 * e * cross.im / prob,
        prob,
    })
}

/// A maximal `|shift|` or reading with the PPS that attains it.
///
/// The preselection is `pure_state(theta1, phi0)` (before any noise), the
/// postselection `pure_state(theta2, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxResult {
    pub value: f64,
    pub argmax: PpsPoint,
    /// The mirror PPS reaching the same magnitude with the opposite sign, if any.
    pub mirror: Option<PpsPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMaxima {
    pub dp: MaxResult,
    pub dq: MaxResult,
}

/// `1 - kappa^2 exp(-4 Delta^2 g^2)` without cancellation at small `g`.
fn contrast_gap(kappa: f64, g: f64, meter: &GaussianMeter) -> f64 {
    let x = 4.0 * meter.delta * meter.delta * g * g;
    (1.0 - kappa * kappa) + kappa * kappa * (-(-x).exp_m1())
}

/// Closed-form maxima of `|dp|` and `|dq|` over all PPS for a preselection of
/// Bloch coherence `kappa`.
///
/// `kappa` is the modulus `r` of a depolarized state or `1 - gamma` under
/// depolarizing or phase-damping noise; both give the same maxima.
///
/// ```text
/// |dp|max = g / sqrt(1 - kappa^2 e^2)
/// |dq|max = 2 kappa g Delta^2 e / sqrt(1 - kappa^2 e^2)
/// ```
pub fn gaussian_max_shifts(kappa: f64, g: f64, meter: &GaussianMeter) -> Result<GaussianMaxima> {
    check_unit_interval("kappa", kappa)?;
    check_non_negative("g", g)?;
    let gap = contrast_gap(kappa, g, meter);
    if gap <= 0.0 {
        return Err(Error::SingularLimit);
    }
    let root = gap.sqrt();
    let e = meter.branch_overlap(g);
    let k = kappa * e;

    // dp: theta1 = pi/2, sin(theta2) = k, phi0 = pi.
    let dp = MaxResult {
        value: g / root,
        argmax: PpsPoint::new(FRAC_PI_2, k.asin(), PI),
        mirror: Some(PpsPoint::new(FRAC_PI_2, PI - k.asin(), PI)),
    };
    // dq: theta1 = theta2 = pi/2, cos(phi0) = -k.
    let phi0 = (-k).acos();
    let dq = MaxResult {
        value: 2.0 * kappa * g * meter.delta * meter.delta * e / root,
        argmax: PpsPoint::new(FRAC_PI_2, FRAC_PI_2, phi0),
        mirror: Some(PpsPoint::new(FRAC_PI_2, FRAC_PI_2, 2.0 * PI - phi0)),
    };
    Ok(GaussianMaxima { dp, dq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, depolarizing, phase_damping};
    use crate::qubit::pure_state;

    fn meter() -> GaussianMeter {
        GaussianMeter::new(1.0).unwrap()
    }

    #[test]
    fn meter_validation_and_uncertainty() {
        assert!(GaussianMeter::new(0.0).is_err());
        assert!(GaussianMeter::new(-1.0).is_err());
        assert!(GaussianMeter::new(f64::NAN).is_err());
        let m = GaussianMeter::new(0.37).unwrap();
        assert!((m.dq() * m.dp() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_coupling_shifts_nothing() {
        let rho = depolarizing(0.2).unwrap().apply_pure(&pure_state(2.0, 0.5).unwrap());
        let f = pure_state(1.0, 3.0).unwrap();
        let s = gaussian_shifts(&rho, &f, 0.0, &meter()).unwrap();
        assert_eq!(s.dp_shift, 0.0);
        assert_eq!(s.dq_shift, 0.0);
        assert!((s.prob - rho.expectation(&f)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pps_has_no_shift() {
        let psi = pure_state(FRAC_PI_2, 0.0).unwrap();
        for &g in &[0.01, 0.1, 0.4] {
            let s = gaussian_shifts(&psi.density(), &psi, g, &meter()).unwrap();
            assert!(s.dp_shift.abs() < 1e-15);
            assert!(s.dq_shift.abs() < 1e-15);
        }
    }

    #[test]
    fn vanishing_postselection_is_an_error() {
        let psi = pure_state(0.0, 0.0).unwrap();
        let err = gaussian_shifts(&psi.density(), &psi.orthogonal(), 0.1, &meter()).unwrap_err();
        assert!(matches!(err, Error::VanishingPostselection { .. }));
        assert!(gaussian_shifts(&psi.density(), &psi, -0.1, &meter()).is_err());
    }

    #[test]
    fn maxima_examples() {
        let m = meter();
        let g = 0.3;
        let zero = gaussian_max_shifts(0.0, g, &m).unwrap();
        assert!((zero.dp.value - g).abs() < 1e-15);
        assert_eq!(zero.dq.value, 0.0);

        // 0.05 Dp with Delta = 1: 0.025 / sqrt(1 - exp(-0.0025)).
        let near = gaussian_max_shifts(1.0, 0.05 * m.dp(), &m).unwrap();
        assert!((near.dp.value / m.dp() - 1.000_625).abs() < 1e-6);

        let g = 0.1 * m.dp();
        let half = gaussian_max_shifts(0.5, g, &m).unwrap();
        // Printed to five digits as 1.15278; exact value from an independent evaluation.
        assert!((half.dp.value / g - 1.152_790_378_282_944).abs() < 1e-12);

        assert_eq!(gaussian_max_shifts(1.0, 0.0, &m), Err(Error::SingularLimit));
        assert!(gaussian_max_shifts(1.2, 0.1, &m).is_err());
    }

    #[test]
    fn argmax_attains_the_maximum() {
        let m = GaussianMeter::new(1.3).unwrap();
        for &kappa in &[0.0, 0.2, 0.5, 0.8, 1.0] {
            for &g in &[0.01, 0.05, 0.2] {
                let max = gaussian_max_shifts(kappa, g, &m).unwrap();
                for (res, is_dp) in [(max.dp, true), (max.dq, false)] {
                    for (point, sign) in [(res.argmax, 1.0), (res.mirror.unwrap(), -1.0)] {
                        let rho = QubitDensity::mixed(kappa, &point.preselection()).unwrap();
                        let s = gaussian_shifts(&rho, &point.postselection(), g, &m).unwrap();
                        let v = if is_dp { s.dp_shift } else { s.dq_shift };
                        let scale = res.value.max(1e-300);
                        assert!(
                            (v - sign * res.value).abs() <= 1e-9 * scale,
                            "kappa={kappa} g={g} dp={is_dp}: {v} vs {}",
                            res.value
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn argmax_is_shared_by_dephasing() {
        let m = meter();
        let (gamma, g) = (0.35, 0.07);
        let max = gaussian_max_shifts(1.0 - gamma, g, &m).unwrap();
        let ch = phase_damping(gamma).unwrap();
        let p = max.dp.argmax;
        let s = gaussian_shifts(&ch.apply_pure(&p.preselection()), &p.postselection(), g, &m).unwrap();
        assert!((s.dp_shift - max.dp.value).abs() < 1e-9 * max.dp.value);
        let p = max.dq.argmax;
        let s = gaussian_shifts(&ch.apply_pure(&p.preselection()), &p.postselection(), g, &m).unwrap();
        assert!((s.dq_shift - max.dq.value).abs() < 1e-9 * max.dq.value);
    }

    #[test]
    fn full_amplitude_damping_leaves_a_plain_kick() {
        let rho = amplitude_damping(1.0).unwrap().apply_pure(&pure_state(2.2, 1.0).unwrap());
        let s = gaussian_shifts(&rho, &pure_state(0.4, 0.3).unwrap(), 0.2, &meter()).unwrap();
        assert!((s.dp_shift - 0.2).abs() < 1e-15);
        assert_eq!(s.dq_shift, 0.0);
    }

    #[test]
    fn maxima_increase_with_coherence() {
        let m = meter();
        let g = 0.05;
        let mut prev = gaussian_max_shifts(0.01, g, &m).unwrap();
        for i in 2..=100 {
            let cur = gaussian_max_shifts(i as f64 / 100.0, g, &m).unwrap();
            assert!(cur.dp.value > prev.dp.value);
            assert!(cur.dq.value > prev.dq.value);
            prev = cur;
        }
    }
}
