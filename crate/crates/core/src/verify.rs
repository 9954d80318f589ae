//! Verification batteries: closed forms against the oracles, closed-form
//! maxima against the optimizer, and the formula adjudication.
//!
//! Everything is driven by one seed, so a report is reproducible bit for bit.

use std::f64::consts::{PI, TAU};
use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{amplitude_damping, depolarizing, phase_damping};
use crate::error::Result;
use crate::gaussian::{gaussian_max_shifts, gaussian_shifts, GaussianMeter};
use crate::optimizer::{maximize, pps_objective, Meter, PpsPoint, Preparation, Quantity, DEFAULT_GRID_N, DEFAULT_TOL};
use crate::adjudicate::{
    adjudicate_variants_with, AdjudicationReport, Verdict, DEFAULT_MAXIMUM_SAMPLES, DEFAULT_POINTWISE_SAMPLES,
};
use crate::oracle::{gaussian_grid_evolve, qubit_joint_evolve, PositionGrid};
use crate::qubit::QubitDensity;
use crate::qubit_meter::{postselected_reading, qubit_max_reading};

pub use crate::adjudicate::DEFAULT_SEED;

pub const DEFAULT_SAMPLES: usize = 1000;
pub const QUBIT_ORACLE_TOL: f64 = 1e-12;
pub const GAUSSIAN_ORACLE_TOL: f64 = 1e-6;
pub const OPTIMIZER_REL_TOL: f64 = 1e-6;
/// Random inputs whose postselection probability falls below this are redrawn.
pub const MIN_BATTERY_PROB: f64 = 1e-3;
/// Largest `g * Delta` drawn for the Gaussian battery.
pub const MAX_G_DELTA: f64 = 0.5;
pub const BATTERY_KAPPAS: [f64; 4] = [0.2, 0.5, 0.8, 1.0];
/// Couplings of the optimizer battery, in units of `Dp` for the Gaussian meter
/// and absolute for the qubit meter.
pub const BATTERY_COUPLINGS: [f64; 3] = [0.03, 0.05, 0.1];

/// A closed form the batteries check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formula {
    ShiftDp,
    ShiftDq,
    Reading,
    MaxDp,
    MaxDq,
    MaxReading,
}

impl Formula {
    pub const ALL: [Formula; 6] = [
        Formula::ShiftDp,
        Formula::ShiftDq,
        Formula::Reading,
        Formula::MaxDp,
        Formula::MaxDq,
        Formula::MaxReading,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Formula::ShiftDp => "gaussian_shifts.dp",
            Formula::ShiftDq => "gaussian_shifts.dq",
            Formula::Reading => "postselected_reading",
            Formula::MaxDp => "gaussian_max_shifts.dp",
            Formula::MaxDq => "gaussian_max_shifts.dq",
            Formula::MaxReading => "qubit_max_reading",
        }
    }

    pub fn from_name(name: &str) -> Option<Formula> {
        Formula::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Test hook: scales one closed form by `1 + relative` inside the batteries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub formula: Formula,
    pub relative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random inputs per meter in the oracle battery.
    pub samples: usize,
    pub perturbation: Option<Perturbation>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            perturbation: None,
        }
    }
}

impl VerifyOptions {
    fn apply(&self, formula: Formula, value: f64) -> f64 {
        match self.perturbation {
            Some(p) if p.formula == formula => value * (1.0 + p.relative),
            _ => value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub battery: &'static str,
    pub formula: Formula,
    /// Formula name plus the preparation it was checked under, if any.
    pub label: String,
    pub samples: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub relative: bool,
    pub worst_input: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub adjudication: AdjudicationReport,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed) && self.adjudication.all_confirmed()
    }

    /// The failed check furthest outside its tolerance, or the first dispute
    /// that was not confirmed.
    pub fn worst_offender(&self) -> Option<String> {
        let failed = self
            .checks
            .iter()
            .filter(|c| !c.passed())
            .max_by(|a, b| (a.worst / a.tolerance).total_cmp(&(b.worst / b.tolerance)));
        if let Some(c) = failed {
            return Some(format!(
                "{} ({} battery): deviation {:.3e} > {:.0e} at {}",
                c.label, c.battery, c.worst, c.tolerance, c.worst_input
            ));
        }
        self.adjudication
            .disputes
            .iter()
            .find(|d| d.verdict() != Verdict::Confirmed)
            .map(|d| format!("adjudication {}: {}", d.name, d.verdict()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verification (seed {})", self.seed);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  {} {:<9} {:<40} n={:<5} worst {} {:.3e} (tol {:.0e})",
                if c.passed() { "PASS" } else { "FAIL" },
                c.battery,
                c.label,
                c.samples,
                if c.relative { "rel" } else { "abs" },
                c.worst,
                c.tolerance
            );
        }
        out.push_str(&self.adjudication.to_text());
        let _ = writeln!(out, "result: {}", if self.passed() { "pass" } else { "fail" });
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum Noise {
    Mixed(f64),
    Depolarizing(f64),
    PhaseDamping(f64),
    AmplitudeDamping(f64),
}

impl Noise {
    fn draw(rng: &mut ChaCha8Rng) -> Noise {
        let s = rng.gen_range(0.0..1.0);
        match rng.gen_range(0..4) {
            0 => Noise::Mixed(s),
            1 => Noise::Depolarizing(s),
            2 => Noise::PhaseDamping(s),
            _ => Noise::AmplitudeDamping(s),
        }
    }

    fn prepare(&self, p: &PpsPoint) -> Result<QubitDensity> {
        let psi = p.preselection();
        Ok(match *self {
            Noise::Mixed(r) => QubitDensity::mixed(r, &psi)?,
            Noise::Depolarizing(s) => depolarizing(s)?.apply_pure(&psi),
            Noise::PhaseDamping(s) => phase_damping(s)?.apply_pure(&psi),
            Noise::AmplitudeDamping(s) => amplitude_damping(s)?.apply_pure(&psi),
        })
    }
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Noise::Mixed(r) => write!(f, "mixed r={r:.6}"),
            Noise::Depolarizing(s) => write!(f, "depolarizing gamma={s:.6}"),
            Noise::PhaseDamping(s) => write!(f, "phase_damping gamma={s:.6}"),
            Noise::AmplitudeDamping(s) => write!(f, "amplitude_damping gamma={s:.6}"),
        }
    }
}

fn draw_pps(rng: &mut ChaCha8Rng) -> PpsPoint {
    PpsPoint::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU))
}

fn describe(noise: &Noise, p: &PpsPoint, g: f64, delta: Option<f64>) -> String {
    let mut s = format!(
        "{noise} theta1={:.6} theta2={:.6} phi0={:.6} g={g:.6}",
        p.theta1, p.theta2, p.phi0
    );
    if let Some(d) = delta {
        let _ = write!(s, " delta={d:.6}");
    }
    s
}

struct Accumulator {
    worst: f64,
    worst_input: String,
    samples: usize,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            worst: 0.0,
            worst_input: String::from("-"),
            samples: 0,
        }
    }

    fn push(&mut self, deviation: f64, input: &str) {
        self.samples += 1;
        // NaN deviations count as worst.
        if !self.worst.is_nan() && !(deviation <= self.worst) {
            self.worst = deviation;
            self.worst_input = input.to_string();
        }
    }

    fn finish(self, battery: &'static str, formula: Formula, label: String, tolerance: f64, relative: bool) -> Check {
        Check {
            battery,
            formula,
            label,
            samples: self.samples,
            worst: self.worst,
            tolerance,
            relative,
            worst_input: self.worst_input,
        }
    }
}

/// Closed-form qubit-meter readings against the exact 4x4 evolution.
fn qubit_oracle_battery(rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut reading = Accumulator::new();
    let mut prob = Accumulator::new();
    while reading.samples < opts.samples {
        let noise = Noise::draw(rng);
        let p = draw_pps(rng);
        let g = rng.gen_range(0.0..1.5);
        let rho = noise.prepare(&p)?;
        let post = p.postselection();
        let oracle = match qubit_joint_evolve(&rho, Some(&post), g) {
            Ok(o) if o.prob >= MIN_BATTERY_PROB => o,
            _ => continue,
        };
        let closed = postselected_reading(&rho, &post, g)?;
        let input = describe(&noise, &p, g, None);
        reading.push((opts.apply(Formula::Reading, closed.reading) - oracle.reading).abs(), &input);
        prob.push((closed.prob - oracle.prob).abs(), &input);
    }
    Ok(vec![
        reading.finish("oracle", Formula::Reading, "postselected_reading".into(), QUBIT_ORACLE_TOL, false),
        prob.finish("oracle", Formula::Reading, "postselected_reading.prob".into(), QUBIT_ORACLE_TOL, false),
    ])
}

struct GaussianInput {
    noise: Noise,
    point: PpsPoint,
    g: f64,
    delta: f64,
    rho: QubitDensity,
}

/// Closed-form Gaussian shifts against the position-grid oracle, for
/// `g * Delta <= MAX_G_DELTA`.
fn gaussian_oracle_battery(rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut inputs = Vec::with_capacity(opts.samples);
    while inputs.len() < opts.samples {
        let noise = Noise::draw(rng);
        let point = draw_pps(rng);
        let delta = rng.gen_range(0.5..2.0);
        let g = rng.gen_range(0.0..MAX_G_DELTA) / delta;
        let rho = noise.prepare(&point)?;
        // The probability is linear in the branch overlap, so it is bounded
        // below by its values at overlap 0 and 1.
        let post = point.postselection();
        let [a2, b2] = post.amplitudes();
        let w = rho.rho00() * a2.norm_sqr() + rho.rho11() * b2.norm_sqr();
        if w.min(rho.expectation(&post)) < MIN_BATTERY_PROB {
            continue;
        }
        inputs.push(GaussianInput { noise, point, g, delta, rho });
    }
    let rows: Vec<Result<(f64, f64, f64, String)>> = inputs
        .par_iter()
        .map(|i| {
            let meter = GaussianMeter::new(i.delta)?;
            let post = i.point.postselection();
            let oracle = gaussian_grid_evolve(&i.rho, &post, i.g, &meter, PositionGrid::for_coupling(&meter, i.g))?;
            let closed = gaussian_shifts(&i.rho, &post, i.g, &meter)?;
            Ok((
                (opts.apply(Formula::ShiftDp, closed.dp_shift) - oracle.dp_shift).abs(),
                (opts.apply(Formula::ShiftDq, closed.dq_shift) - oracle.dq_shift).abs(),
                (closed.prob - oracle.prob).abs(),
                describe(&i.noise, &i.point, i.g, Some(i.delta)),
            ))
        })
        .collect();
    let mut dp = Accumulator::new();
    let mut dq = Accumulator::new();
    let mut prob = Accumulator::new();
    for row in rows {
        let (a, b, c, input) = row?;
        dp.push(a, &input);
        dq.push(b, &input);
        prob.push(c, &input);
    }
    Ok(vec![
        dp.finish("oracle", Formula::ShiftDp, "gaussian_shifts.dp".into(), GAUSSIAN_ORACLE_TOL, false),
        dq.finish("oracle", Formula::ShiftDq, "gaussian_shifts.dq".into(), GAUSSIAN_ORACLE_TOL, false),
        prob.finish("oracle", Formula::ShiftDp, "gaussian_shifts.prob".into(), GAUSSIAN_ORACLE_TOL, false),
    ])
}

#[derive(Debug, Clone, Copy)]
enum BatteryPrep {
    Mixed,
    Depolarizing,
    PhaseDamping,
}

impl BatteryPrep {
    const ALL: [BatteryPrep; 3] = [BatteryPrep::Mixed, BatteryPrep::Depolarizing, BatteryPrep::PhaseDamping];

    fn preparation(&self, kappa: f64) -> Result<Preparation> {
        Ok(match self {
            BatteryPrep::Mixed => Preparation::Mixed { modulus: kappa },
            BatteryPrep::Depolarizing => Preparation::Channel(depolarizing(1.0 - kappa)?),
            BatteryPrep::PhaseDamping => Preparation::Channel(phase_damping(1.0 - kappa)?),
        })
    }

    fn name(&self) -> &'static str {
        match self {
            BatteryPrep::Mixed => "mixed",
            BatteryPrep::Depolarizing => "depolarizing",
            BatteryPrep::PhaseDamping => "phase_damping",
        }
    }
}

/// Closed-form maxima against the optimizer on the `BATTERY_KAPPAS x
/// BATTERY_COUPLINGS` grid, with `Delta = 1` for the Gaussian meter.
fn optimizer_battery(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let meter = GaussianMeter::new(1.0)?;
    let mut jobs = Vec::new();
    for prep in BatteryPrep::ALL {
        for formula in [Formula::MaxDp, Formula::MaxDq, Formula::MaxReading] {
            for kappa in BATTERY_KAPPAS {
                for coupling in BATTERY_COUPLINGS {
                    jobs.push((prep, formula, kappa, coupling));
                }
            }
        }
    }
    let results: Vec<Result<(f64, String)>> = jobs
        .par_iter()
        .map(|&(prep, formula, kappa, coupling)| {
            let (meter_kind, quantity, g) = match formula {
                Formula::MaxDp => (Meter::Gaussian(meter), Quantity::MomentumShift, coupling * meter.dp()),
                Formula::MaxDq => (Meter::Gaussian(meter), Quantity::PositionShift, coupling * meter.dp()),
                _ => (Meter::Qubit, Quantity::Reading, coupling),
            };
            let closed = match formula {
                Formula::MaxDp => gaussian_max_shifts(kappa, g, &meter)?.dp.value,
                Formula::MaxDq => gaussian_max_shifts(kappa, g, &meter)?.dq.value,
                _ => qubit_max_reading(kappa, g)?.value,
            };
            let objective = pps_objective(prep.preparation(kappa)?, meter_kind, quantity, g)?;
            let found = maximize(objective, DEFAULT_GRID_N, DEFAULT_TOL)?.value;
            let dev = (opts.apply(formula, closed) - found).abs() / found.abs().max(f64::MIN_POSITIVE);
            Ok((dev, format!("kappa={kappa} g={g}")))
        })
        .collect();
    let mut checks = Vec::new();
    for (chunk_jobs, chunk) in jobs.chunks(BATTERY_KAPPAS.len() * BATTERY_COUPLINGS.len()).zip(results.chunks(BATTERY_KAPPAS.len() * BATTERY_COUPLINGS.len())) {
        let (prep, formula, _, _) = chunk_jobs[0];
        let mut acc = Accumulator::new();
        for r in chunk {
            let (dev, input) = r.clone()?;
            acc.push(dev, &input);
        }
        checks.push(acc.finish(
            "optimizer",
            formula,
            format!("{}[{}]", formula.name(), prep.name()),
            OPTIMIZER_REL_TOL,
            true,
        ));
    }
    Ok(checks)
}

/// Runs the oracle battery, the optimizer battery and the adjudication.
pub fn run_verification(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = qubit_oracle_battery(&mut rng, opts)?;
    checks.extend(gaussian_oracle_battery(&mut rng, opts)?);
    checks.extend(optimizer_battery(opts)?);
    let adjudication = adjudicate_variants_with(opts.seed, DEFAULT_POINTWISE_SAMPLES, DEFAULT_MAXIMUM_SAMPLES)?;
    Ok(VerifyReport {
        seed: opts.seed,
        checks,
        adjudication,
    })
}

/// The oracle battery alone, for callers that do not need the optimizer.
pub fn run_oracle_battery(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = qubit_oracle_battery(&mut rng, opts)?;
    checks.extend(gaussian_oracle_battery(&mut rng, opts)?);
    Ok(checks)
}

/// The optimizer battery alone.
pub fn run_optimizer_battery(opts: &VerifyOptions) -> Result<Vec<Check>> {
    optimizer_battery(opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_names_round_trip() {
        for f in Formula::ALL {
            assert_eq!(Formula::from_name(f.name()), Some(f));
        }
        assert_eq!(Formula::from_name("nope"), None);
    }

    #[test]
    fn perturbation_only_touches_its_formula() {
        let opts = VerifyOptions {
            perturbation: Some(Perturbation { formula: Formula::ShiftDq, relative: 0.5 }),
            ..VerifyOptions::default()
        };
        assert_eq!(opts.apply(Formula::ShiftDq, 2.0), 3.0);
        assert_eq!(opts.apply(Formula::ShiftDp, 2.0), 2.0);
    }

    #[test]
    fn small_oracle_battery_passes() {
        let opts = VerifyOptions { samples: 40, ..VerifyOptions::default() };
        let checks = run_oracle_battery(&opts).unwrap();
        assert_eq!(checks.len(), 5);
        for c in &checks {
            assert!(c.passed(), "{c:?}");
            assert_eq!(c.samples, 40);
        }
    }

    #[test]
    fn nan_counts_as_worst() {
        let mut acc = Accumulator::new();
        acc.push(1.0, "a");
        acc.push(f64::NAN, "b");
        let c = acc.finish("x", Formula::Reading, "r".into(), 1.0, false);
        assert!(!c.passed());
        assert_eq!(c.worst_input, "b");
    }
}
