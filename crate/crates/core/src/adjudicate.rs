//! Settles disputed printed variants of the shift and reading formulas by
//! comparing each variant against the brute-force oracles.
//!
//! Each dispute holds two independent transcriptions, the normative one and
//! the rejected one, together with the value the library itself returns.
//! Row 0 of every dispute is the fixed input `g = 0.3`, `Delta = 1`; the
//! remaining rows come from a seeded generator.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::{self, Write as _};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::phase_damping;
use crate::error::Result;
use crate::gaussian::{gaussian_max_shifts, gaussian_shifts, GaussianMeter};
use crate::oracle::{qubit_joint_evolve, GaussianGridOracle, PositionGrid};
use crate::optimizer::{maximize, PpsPoint, DEFAULT_GRID_N, DEFAULT_TOL};
use crate::qubit::QubitDensity;
use crate::qubit_meter::postselected_reading;

pub const DEFAULT_SEED: u64 = 20_150_601;
/// Random inputs per pointwise dispute (in addition to the fixed row).
pub const DEFAULT_POINTWISE_SAMPLES: usize = 24;
/// Random inputs per maximum dispute (each runs a full optimization).
pub const DEFAULT_MAXIMUM_SAMPLES: usize = 3;
/// Agreement required of the normative variant for Gaussian-meter formulas.
pub const GAUSSIAN_TOL: f64 = 1e-6;
/// Agreement required of the normative variant for qubit-meter formulas.
pub const QUBIT_TOL: f64 = 1e-12;
/// The rejected variant must miss the oracle by at least this many tolerances.
pub const REJECTION_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AdjudicationRow {
    pub input_id: usize,
    pub inputs: String,
    pub oracle: f64,
    pub normative: f64,
    pub rejected: f64,
    pub library: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Normative variant and library agree with the oracle; rejected variant
    /// misses by at least `REJECTION_FACTOR` tolerances somewhere.
    Confirmed,
    /// Both variants agree with the oracle on every input.
    Inconclusive,
    /// The normative variant or the library disagrees with the oracle.
    Contradicted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Confirmed => "confirmed",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Contradicted => "contradicted",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dispute {
    pub name: &'static str,
    pub quantity: &'static str,
    pub normative_label: &'static str,
    pub rejected_label: &'static str,
    pub tolerance: f64,
    pub rows: Vec<AdjudicationRow>,
}

impl Dispute {
    fn max_dev(&self, pick: impl Fn(&AdjudicationRow) -> f64) -> f64 {
        self.rows
            .iter()
            .map(|r| (pick(r) - r.oracle).abs())
            .fold(0.0, f64::max)
    }

    pub fn normative_deviation(&self) -> f64 {
        self.max_dev(|r| r.normative)
    }

    pub fn rejected_deviation(&self) -> f64 {
        self.max_dev(|r| r.rejected)
    }

    pub fn library_deviation(&self) -> f64 {
        self.max_dev(|r| r.library)
    }

    /// Deviation of the rejected variant on the fixed `g = 0.3` row.
    pub fn rejected_deviation_at_fixed_input(&self) -> f64 {
        self.rows
            .iter()
            .find(|r| r.input_id == 0)
            .map(|r| (r.rejected - r.oracle).abs())
            .unwrap_or(0.0)
    }

    pub fn verdict(&self) -> Verdict {
        if self.normative_deviation() >= self.tolerance || self.library_deviation() >= self.tolerance {
            Verdict::Contradicted
        } else if self.rejected_deviation() >= REJECTION_FACTOR * self.tolerance {
            Verdict::Confirmed
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjudicationReport {
    pub seed: u64,
    pub disputes: Vec<Dispute>,
}

impl AdjudicationReport {
    pub fn all_confirmed(&self) -> bool {
        self.disputes.iter().all(|d| d.verdict() == Verdict::Confirmed)
    }

    pub fn dispute(&self, name: &str) -> Option<&Dispute> {
        self.disputes.iter().find(|d| d.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "formula adjudication (seed {})", self.seed);
        for d in &self.disputes {
            let _ = writeln!(out, "  {} [{}]: {}", d.name, d.quantity, d.verdict());
            let _ = writeln!(
                out,
                "    normative {:<28} max |dev| = {:.3e}  (tol {:.0e})",
                d.normative_label,
                d.normative_deviation(),
                d.tolerance
            );
            let _ = writeln!(
                out,
                "    rejected  {:<28} max |dev| = {:.3e}  (at g = 0.3: {:.3e})",
                d.rejected_label,
                d.rejected_deviation(),
                d.rejected_deviation_at_fixed_input()
            );
            let _ = writeln!(
                out,
                "    library   {:<28} max |dev| = {:.3e}",
                "", d.library_deviation()
            );
        }
        out
    }

    /// `dispute,variant,input_id,inputs,deviation` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dispute,variant,input_id,inputs,deviation\n");
        for d in &self.disputes {
            for r in &d.rows {
                for (variant, value) in [
                    (d.normative_label, r.normative),
                    (d.rejected_label, r.rejected),
                    ("library", r.library),
                ] {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{:.16e}",
                        d.name,
                        variant,
                        r.input_id,
                        r.inputs,
                        (value - r.oracle).abs()
                    );
                }
            }
        }
        out
    }
}

// Printed formulas, transcribed in the angle form with
// psi_i = (theta1, phi0), psi_f = (theta2, 0).

struct Angles {
    theta1: f64,
    theta2: f64,
    phi0: f64,
}

impl Angles {
    fn point(&self) -> PpsPoint {
        PpsPoint::new(self.theta1, self.theta2, self.phi0)
    }

    fn trig(&self) -> (f64, f64, f64, f64) {
        (self.theta1.cos(), self.theta1.sin(), self.theta2.cos(), self.theta2.sin())
    }

    /// `(|a1|^2, |b1|^2, |a2|^2, |b2|^2, conj(a1) b1 a2 conj(b2))`.
    fn amplitudes(&self) -> (f64, f64, f64, f64, Complex64) {
        let a1 = (self.theta1 / 2.0).cos();
        let b1 = Complex64::from_polar((self.theta1 / 2.0).sin(), self.phi0);
        let a2 = (self.theta2 / 2.0).cos();
        let b2 = (self.theta2 / 2.0).sin();
        (a1 * a1, b1.norm_sqr(), a2 * a2, b2 * b2, b1 * a1 * a2 * b2)
    }
}

/// Position shift for a modulus-`r` preselection with the interference factor
/// `e` in the numerator, or without it as printed in the appendix.
fn dq_modulus_form(r: f64, a: &Angles, g: f64, delta: f64, with_factor: bool) -> f64 {
    let (c1, s1, c2, s2) = a.trig();
    let e = (-2.0 * delta * delta * g * g).exp();
    let num_e = if with_factor { e } else { 1.0 };
    2.0 * g * r * delta * delta * num_e * s1 * s2 * a.phi0.sin()
        / (1.0 + r * c1 * c2 + r * s1 * s2 * a.phi0.cos() * e)
}

/// Position shift under dephasing in amplitude form, with or without the
/// interference factor in the numerator.
fn dq_dephasing_form(gamma: f64, a: &Angles, g: f64, delta: f64, with_factor: bool) -> f64 {
    let (p1, q1, p2, q2, x) = a.amplitudes();
    let e = (-2.0 * delta * delta * g * g).exp();
    let k = 1.0 - gamma;
    let pro = p1 * p2 + q1 * q2 + 2.0 * k * x.re * e;
    let num_e = if with_factor { e } else { 1.0 };
    4.0 * k * g * delta * delta * num_e * x.im / pro
}

fn dq_max_form(r: f64, g: f64, delta: f64, with_factor: bool) -> f64 {
    let e = (-2.0 * delta * delta * g * g).exp();
    let num_e = if with_factor { e } else { 1.0 };
    2.0 * g * r * delta * delta * num_e / (1.0 - r * r * e * e).sqrt()
}

fn dp_max_dephasing_form(gamma: f64, g: f64, delta: f64, squared: bool) -> f64 {
    let k = 1.0 - gamma;
    let k_eff = if squared { k * k } else { k };
    g / (1.0 - k_eff * (-4.0 * delta * delta * g * g).exp()).sqrt()
}

/// Dephased qubit-meter reading; `printed` uses `|a1|^2 |b2|^2` as the first
/// numerator term instead of `|a1|^2 |a2|^2`.
fn reading_dephasing_form(gamma: f64, a: &Angles, g: f64, printed: bool) -> f64 {
    let (p1, q1, p2, q2, x) = a.amplitudes();
    let k = 1.0 - gamma;
    let first = if printed { p1 * q2 } else { p1 * p2 };
    let n1 = (first + q1 * q2 - 2.0 * k * x.re) * g.sin().powi(2);
    let n2 = p1 * p2 + q1 * q2 + 2.0 * k * x.re * (2.0 * g).cos();
    n1 / n2
}

fn random_angles(rng: &mut ChaCha8Rng) -> Angles {
    Angles {
        theta1: rng.gen_range(0.05..PI - 0.05),
        theta2: rng.gen_range(0.05..PI - 0.05),
        phi0: rng.gen_range(0.0..TAU),
    }
}

fn fmt_inputs(pairs: &[(&str, f64)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{k}={v:.6}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn grid_oracle(meter: &GaussianMeter, g: f64) -> Result<GaussianGridOracle> {
    GaussianGridOracle::new(meter, g, PositionGrid::for_coupling(meter, g))
}

/// Maximum of `|dq|` or `|dp|` over PPS, evaluated through the grid oracle.
fn oracle_maximum(
    oracle: &GaussianGridOracle,
    prepare: impl Fn(&PpsPoint) -> QubitDensity + Sync,
    momentum: bool,
) -> Result<f64> {
    let objective = |p: &PpsPoint| match oracle.evolve(&prepare(p), &p.postselection()) {
        Ok(s) if momentum => s.dp_shift,
        Ok(s) => s.dq_shift,
        Err(_) => 0.0,
    };
    Ok(maximize(objective, DEFAULT_GRID_N, DEFAULT_TOL)?.value)
}

fn dq_shift_dispute(rng: &mut ChaCha8Rng, samples: usize) -> Result<Dispute> {
    let mut rows = Vec::with_capacity(samples + 1);
    for id in 0..=samples {
        let (r, a, g, delta) = if id == 0 {
            (1.0, Angles { theta1: FRAC_PI_2, theta2: FRAC_PI_2, phi0: 2.0 }, 0.3, 1.0)
        } else {
            let delta = rng.gen_range(0.5..2.0);
            let g = rng.gen_range(0.02..0.5) / delta;
            (rng.gen_range(0.2..1.0), random_angles(rng), g, delta)
        };
        let meter = GaussianMeter::new(delta)?;
        let rho = QubitDensity::mixed(r, &a.point().preselection())?;
        let post = a.point().postselection();
        let oracle = grid_oracle(&meter, g)?.evolve(&rho, &post)?;
        rows.push(AdjudicationRow {
            input_id: id,
            inputs: fmt_inputs(&[("r", r), ("theta1", a.theta1), ("theta2", a.theta2), ("phi0", a.phi0), ("g", g), ("delta", delta)]),
            oracle: oracle.dq_shift,
            normative: dq_modulus_form(r, &a, g, delta, true),
            rejected: dq_modulus_form(r, &a, g, delta, false),
            library: gaussian_shifts(&rho, &post, g, &meter)?.dq_shift,
        });
    }
    Ok(Dispute {
        name: "dq_shift_modulus",
        quantity: "position shift, modulus-r preselection",
        normative_label: "with exp(-2D^2g^2)",
        rejected_label: "appendix form without it",
        tolerance: GAUSSIAN_TOL,
        rows,
    })
}

fn dq_shift_dephasing_dispute(rng: &mut ChaCha8Rng, samples: usize) -> Result<Dispute> {
    let mut rows = Vec::with_capacity(samples + 1);
    for id in 0..=samples {
        let (gamma, a, g, delta) = if id == 0 {
            (0.5, Angles { theta1: FRAC_PI_2, theta2: FRAC_PI_2, phi0: 2.0 }, 0.3, 1.0)
        } else {
            let delta = rng.gen_range(0.5..2.0);
            let g = rng.gen_range(0.02..0.5) / delta;
            (rng.gen_range(0.0..0.9), random_angles(rng), g, delta)
        };
        let meter = GaussianMeter::new(delta)?;
        let rho = phase_damping(gamma)?.apply_pure(&a.point().preselection());
        let post = a.point().postselection();
        let oracle = grid_oracle(&meter, g)?.evolve(&rho, &post)?;
        rows.push(AdjudicationRow {
            input_id: id,
            inputs: fmt_inputs(&[("gamma", gamma), ("theta1", a.theta1), ("theta2", a.theta2), ("phi0", a.phi0), ("g", g), ("delta", delta)]),
            oracle: oracle.dq_shift,
            normative: dq_dephasing_form(gamma, &a, g, delta, true),
            rejected: dq_dephasing_form(gamma, &a, g, delta, false),
            library: gaussian_shifts(&rho, &post, g, &meter)?.dq_shift,
        });
    }
    Ok(Dispute {
        name: "dq_shift_dephasing",
        quantity: "position shift, phase-damped preselection",
        normative_label: "with exp(-2D^2g^2)",
        rejected_label: "main-text form without it",
        tolerance: GAUSSIAN_TOL,
        rows,
    })
}

fn dq_max_dispute(rng: &mut ChaCha8Rng, samples: usize) -> Result<Dispute> {
    let mut rows = Vec::with_capacity(samples + 1);
    for id in 0..=samples {
        let (r, g, delta) = if id == 0 {
            (1.0, 0.3, 1.0)
        } else {
            let delta = rng.gen_range(0.5..2.0);
            (rng.gen_range(0.3..1.0), rng.gen_range(0.05..0.5) / delta, delta)
        };
        let meter = GaussianMeter::new(delta)?;
        let oracle = grid_oracle(&meter, g)?;
        let value = oracle_maximum(
            &oracle,
            |p| QubitDensity::mixed(r, &p.preselection()).expect("modulus in range"),
            false,
        )?;
        rows.push(AdjudicationRow {
            input_id: id,
            inputs: fmt_inputs(&[("r", r), ("g", g), ("delta", delta)]),
            oracle: value,
            normative: dq_max_form(r, g, delta, true),
            rejected: dq_max_form(r, g, delta, false),
            library: gaussian_max_shifts(r, g, &meter)?.dq.value,
        });
    }
    Ok(Dispute {
        name: "dq_max_modulus",
        quantity: "maximal position shift, modulus-r preselection",
        normative_label: "with exp(-2D^2g^2)",
        rejected_label: "appendix form without it",
        tolerance: GAUSSIAN_TOL,
        rows,
    })
}

fn dp_max_dephasing_dispute(rng: &mut ChaCha8Rng, samples: usize) -> Result<Dispute> {
    let mut rows = Vec::with_capacity(samples + 1);
    for id in 0..=samples {
        let (gamma, g, delta) = if id == 0 {
            (0.5, 0.3, 1.0)
        } else {
            let delta = rng.gen_range(0.5..2.0);
            (rng.gen_range(0.1..0.9), rng.gen_range(0.05..0.5) / delta, delta)
        };
        let meter = GaussianMeter::new(delta)?;
        let channel = phase_damping(gamma)?;
        let oracle = grid_oracle(&meter, g)?;
        let value = oracle_maximum(&oracle, |p| channel.apply_pure(&p.preselection()), true)?;
        rows.push(AdjudicationRow {
            input_id: id,
            inputs: fmt_inputs(&[("gamma", gamma), ("g", g), ("delta", delta)]),
            oracle: value,
            normative: dp_max_dephasing_form(gamma, g, delta, true),
            rejected: dp_max_dephasing_form(gamma, g, delta, false),
            library: gaussian_max_shifts(1.0 - gamma, g, &meter)?.dp.value,
        });
    }
    Ok(Dispute {
        name: "dp_max_dephasing",
        quantity: "maximal momentum shift, phase-damped preselection",
        normative_label: "(1-gamma)^2",
        rejected_label: "appendix form (1-gamma)",
        tolerance: GAUSSIAN_TOL,
        rows,
    })
}

fn reading_dephasing_dispute(rng: &mut ChaCha8Rng, samples: usize) -> Result<Dispute> {
    let mut rows = Vec::with_capacity(samples + 1);
    for id in 0..=samples {
        let (gamma, a, g) = if id == 0 {
            (0.5, Angles { theta1: 1.0, theta2: 2.0, phi0: 2.5 }, 0.3)
        } else {
            (rng.gen_range(0.0..0.95), random_angles(rng), rng.gen_range(0.01..1.5))
        };
        let rho = phase_damping(gamma)?.apply_pure(&a.point().preselection());
        let post = a.point().postselection();
        let oracle = qubit_joint_evolve(&rho, Some(&post), g)?;
        rows.push(AdjudicationRow {
            input_id: id,
            inputs: fmt_inputs(&[("gamma", gamma), ("theta1", a.theta1), ("theta2", a.theta2), ("phi0", a.phi0), ("g", g)]),
            oracle: oracle.reading,
            normative: reading_dephasing_form(gamma, &a, g, false),
            rejected: reading_dephasing_form(gamma, &a, g, true),
            library: postselected_reading(&rho, &post, g)?.reading,
        });
    }
    Ok(Dispute {
        name: "reading_dephasing",
        quantity: "qubit-meter reading, phase-damped preselection",
        normative_label: "numerator |a1|^2|a2|^2",
        rejected_label: "printed |a1|^2|b2|^2",
        tolerance: QUBIT_TOL,
        rows,
    })
}

/// Adjudication with the default seed and sample counts.
pub fn adjudicate_variants() -> Result<AdjudicationReport> {
    adjudicate_variants_with(DEFAULT_SEED, DEFAULT_POINTWISE_SAMPLES, DEFAULT_MAXIMUM_SAMPLES)
}

pub fn adjudicate_variants_with(
    seed: u64,
    pointwise_samples: usize,
    maximum_samples: usize,
) -> Result<AdjudicationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let disputes = vec![
        dq_shift_dispute(&mut rng, pointwise_samples)?,
        dq_shift_dephasing_dispute(&mut rng, pointwise_samples)?,
        dq_max_dispute(&mut rng, maximum_samples)?,
        dp_max_dephasing_dispute(&mut rng, maximum_samples)?,
        reading_dephasing_dispute(&mut rng, pointwise_samples)?,
    ];
    Ok(AdjudicationReport { seed, disputes })
}
