//! Deterministic global maximization over pre/postselection pairs.
//!
//! Every PPS objective depends on the two azimuths only through their
//! difference, so the search space is `(theta1, theta2, phi0)` in
//! `[0, pi]^2 x [0, 2pi)`: preselection `pure_state(theta1, phi0)`,
//! postselection `pure_state(theta2, 0)`.
//!
//! The search samples a dense coarse grid, then polishes the best sample
//! with cyclic golden-section line searches along each coordinate, each
//! cycle closed by a line search along that cycle's net displacement. The
//! extra move lets the refinement travel along narrow diagonal ridges that
//! plain coordinate steps would only zigzag across. A second pass repeats the
//! refinement in log-tangent coordinates, where ridges running into a pole of
//! the Bloch sphere become straight and unbounded.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::channels::KrausChannel;
use crate::error::{check_unit_interval, Error, Result};
use crate::gaussian::{gaussian_shifts, GaussianMeter};
use crate::qubit::{pure_state, PureQubit, QubitDensity};
use crate::qubit_meter::postselected_reading;

pub const DEFAULT_GRID_N: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_CYCLES: usize = 400;
const GOLDEN_EVALS: usize = 80;
/// Bound on `|ln tan(theta/2)|` in the log-tangent stage.
const LOG_TANGENT_LIMIT: f64 = 30.0;
const LOG_TANGENT_STEP: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpsPoint {
    pub theta1: f64,
    pub theta2: f64,
    pub phi0: f64,
}

impl PpsPoint {
    /// Clamps the polar angles into `[0, pi]` and wraps `phi0` into `[0, 2pi)`.
    pub fn new(theta1: f64, theta2: f64, phi0: f64) -> Self {
        let mut phi0 = phi0.rem_euclid(TAU);
        if phi0 >= TAU {
            phi0 = 0.0;
        }
        PpsPoint {
            theta1: theta1.clamp(0.0, PI),
            theta2: theta2.clamp(0.0, PI),
            phi0,
        }
    }

    fn from_coords(x: [f64; 3]) -> Self {
        PpsPoint::new(x[0], x[1], x[2])
    }

    fn coords(&self) -> [f64; 3] {
        [self.theta1, self.theta2, self.phi0]
    }

    /// The noiseless preselection state.
    pub fn preselection(&self) -> PureQubit {
        pure_state(self.theta1, self.phi0).expect("finite PPS angles")
    }

    pub fn postselection(&self) -> PureQubit {
        pure_state(self.theta2, 0.0).expect("finite PPS angles")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    /// Largest `|objective|` found.
    pub value: f64,
    /// Objective at `argmax`, sign included.
    pub signed_value: f64,
    pub argmax: PpsPoint,
    pub evaluations: usize,
    /// A refinement cycle improved by less than `tol` before the cycle cap.
    pub converged: bool,
}

struct Counted<'a, F> {
    objective: &'a F,
    evaluations: usize,
}

impl<F: Fn(&PpsPoint) -> f64> Counted<'_, F> {
    fn eval(&mut self, x: [f64; 3]) -> Result<f64> {
        let point = PpsPoint::from_coords(x);
        let value = (self.objective)(&point);
        self.evaluations += 1;
        if value.is_finite() {
            Ok(value.abs())
        } else {
            Err(Error::NonFiniteObjective { value, point })
        }
    }
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
fn golden_max(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..GOLDEN_EVALS {
        if (hi - lo).abs() <= 1e-13 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Search coordinates for one refinement stage: a map to `(theta1, theta2,
/// phi0)`, box bounds on the first two coordinates (the third is periodic)
/// and the line-search half widths.
struct Chart {
    to_pps: fn([f64; 3]) -> [f64; 3],
    lower: [f64; 2],
    upper: [f64; 2],
    half_width: [f64; 3],
}

impl Chart {
    /// Largest `s >= 0` keeping `x + s d` inside the box.
    fn ray_limit(&self, x: &[f64; 3], d: &[f64; 3]) -> f64 {
        let mut limit = f64::INFINITY;
        for c in 0..2 {
            if d[c] > 0.0 {
                limit = limit.min((self.upper[c] - x[c]) / d[c]);
            } else if d[c] < 0.0 {
                limit = limit.min((self.lower[c] - x[c]) / d[c]);
            }
        }
        if d[2] != 0.0 {
            // A full turn in phi0 is never useful.
            limit = limit.min(TAU / d[2].abs());
        }
        limit.max(0.0)
    }
}

fn identity(x: [f64; 3]) -> [f64; 3] {
    x
}

/// `(u, t, phi0)` with `u = ln tan(theta1/2)`, `t = u + ln tan(theta2/2)`.
fn from_log_tangent(x: [f64; 3]) -> [f64; 3] {
    let theta1 = 2.0 * x[0].exp().atan();
    let theta2 = 2.0 * (x[1] - x[0]).exp().atan();
    [theta1, theta2, x[2]]
}

fn to_log_tangent(p: [f64; 3]) -> [f64; 3] {
    let u = (p[0] / 2.0).tan().ln().clamp(-LOG_TANGENT_LIMIT, LOG_TANGENT_LIMIT);
    let w = (p[1] / 2.0).tan().ln().clamp(-LOG_TANGENT_LIMIT, LOG_TANGENT_LIMIT);
    [u, u + w, p[2]]
}

/// Cyclic golden-section refinement in the coordinates of `chart`, starting
/// from `x` with value `fx`. Returns the best point, its value, and whether a
/// cycle gained less than `tol` before the cycle cap.
fn refine<F: Fn(&PpsPoint) -> f64>(
    counted: &mut Counted<'_, F>,
    chart: &Chart,
    mut x: [f64; 3],
    mut fx: f64,
    tol: f64,
) -> Result<([f64; 3], f64, bool)> {
    let map = chart.to_pps;
    for _ in 0..MAX_CYCLES {
        let start = x;
        let f_start = fx;
        for c in 0..3 {
            let (lo, hi) = if c < 2 {
                (
                    (x[c] - chart.half_width[c]).max(chart.lower[c]),
                    (x[c] + chart.half_width[c]).min(chart.upper[c]),
                )
            } else {
                (x[c] - chart.half_width[c], x[c] + chart.half_width[c])
            };
            let base = x;
            let (t, ft) = golden_max(
                |t| {
                    let mut y = base;
                    y[c] = t;
                    counted.eval(map(y))
                },
                lo,
                hi,
            )?;
            if ft > fx {
                x[c] = t;
                fx = ft;
            }
        }

        let d = [x[0] - start[0], x[1] - start[1], x[2] - start[2]];
        if d.iter().any(|&v| v != 0.0) {
            let limit = chart.ray_limit(&x, &d);
            let base = x;
            let along = |s: f64| [base[0] + s * d[0], base[1] + s * d[1], base[2] + s * d[2]];
            let (s, fs) = golden_max(|s| counted.eval(map(along(s))), 0.0, limit)?;
            if fs > fx {
                x = along(s);
                fx = fs;
            }
        }
        x[2] = x[2].rem_euclid(TAU);

        if fx - f_start < tol {
            return Ok((x, fx, true));
        }
    }
    Ok((x, fx, false))
}

/// Maximizes `|objective|` over the PPS manifold.
///
/// `grid_n^3` coarse samples (θ grids include both poles, the φ0 grid is
/// periodic), then refinement until a full cycle gains less than `tol`.
/// Deterministic: identical inputs give bit-identical results.
pub fn maximize<F>(objective: F, grid_n: usize, tol: f64) -> Result<OptimizationResult>
where
    F: Fn(&PpsPoint) -> f64 + Sync,
{
    if grid_n < 16 {
        return Err(Error::Domain {
            name: "grid_n",
            value: grid_n as f64,
            domain: "[16, inf)",
        });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Domain {
            name: "tol",
            value: tol,
            domain: "(0, inf)",
        });
    }
    let n = grid_n;
    let dtheta = PI / (n - 1) as f64;
    let dphi = TAU / n as f64;
    let coords = |idx: usize| -> [f64; 3] {
        let (i, rest) = (idx / (n * n), idx % (n * n));
        let (j, k) = (rest / n, rest % n);
        [i as f64 * dtheta, j as f64 * dtheta, k as f64 * dphi]
    };

    let samples: Vec<f64> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| objective(&PpsPoint::from_coords(coords(idx))))
        .collect();
    let mut best_idx = 0;
    let mut best = f64::NEG_INFINITY;
    for (idx, &v) in samples.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective {
                value: v,
                point: PpsPoint::from_coords(coords(idx)),
            });
        }
        if v.abs() > best {
            best = v.abs();
            best_idx = idx;
        }
    }

    let mut counted = Counted {
        objective: &objective,
        evaluations: samples.len(),
    };
    let cartesian = Chart {
        to_pps: identity,
        lower: [0.0, 0.0],
        upper: [PI, PI],
        half_width: [dtheta, dtheta, dphi],
    };
    let (x, fx, converged_cartesian) = refine(&mut counted, &cartesian, coords(best_idx), best, tol)?;
    let x = PpsPoint::from_coords(x).coords();

    // Suprema approached only as a polar angle runs into a pole sit on
    // ridges that are straight lines in log-tangent coordinates.
    let log_tangent = Chart {
        to_pps: from_log_tangent,
        lower: [-LOG_TANGENT_LIMIT, -2.0 * LOG_TANGENT_LIMIT],
        upper: [LOG_TANGENT_LIMIT, 2.0 * LOG_TANGENT_LIMIT],
        half_width: [LOG_TANGENT_STEP, LOG_TANGENT_STEP, dphi],
    };
    let (y, fy, converged_log) = refine(&mut counted, &log_tangent, to_log_tangent(x), fx, tol)?;
    let (x, converged) = if fy > fx {
        (from_log_tangent(y), converged_log)
    } else {
        (x, converged_cartesian && converged_log)
    };

    let argmax = PpsPoint::from_coords(x);
    let signed_value = objective(&argmax);
    counted.evaluations += 1;
    Ok(OptimizationResult {
        value: signed_value.abs(),
        signed_value,
        argmax,
        evaluations: counted.evaluations,
        converged,
    })
}

/// How the noiseless preselection `pure_state(theta1, phi0)` is degraded
/// before it reaches the meter.
#[derive(Debug, Clone, PartialEq)]
pub enum Preparation {
    /// `(1 - r) I/2 + r |psi><psi|`.
    Mixed { modulus: f64 },
    Channel(KrausChannel),
}

impl Preparation {
    pub fn prepare(&self, psi: &PureQubit) -> Result<QubitDensity> {
        match self {
            Preparation::Mixed { modulus } => QubitDensity::mixed(*modulus, psi),
            Preparation::Channel(ch) => Ok(ch.apply_pure(psi)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Meter {
    Gaussian(GaussianMeter),
    Qubit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    MomentumShift,
    PositionShift,
    Reading,
}

/// Signed shift or reading at a PPS point; vanishing postselection counts as 0
/// so the search can approach the near-orthogonal region freely.
pub fn pps_objective(
    preparation: Preparation,
    meter: Meter,
    quantity: Quantity,
    g: f64,
) -> Result<impl Fn(&PpsPoint) -> f64 + Sync> {
    match (meter, quantity) {
        (Meter::Gaussian(_), Quantity::Reading)
        | (Meter::Qubit, Quantity::MomentumShift | Quantity::PositionShift) => {
            return Err(Error::Domain {
                name: "quantity",
                value: f64::NAN,
                domain: "dp/dq for the Gaussian meter, reading for the qubit meter",
            })
        }
        _ => {}
    }
    crate::error::check_non_negative("g", g)?;
    preparation.prepare(&PureQubit::ZERO)?;
    Ok(move |p: &PpsPoint| {
        let rho = preparation
            .prepare(&p.preselection())
            .expect("preparation validated");
        let post = p.postselection();
        let value = match meter {
            Meter::Gaussian(m) => gaussian_shifts(&rho, &post, g, &m).map(|s| match quantity {
                Quantity::MomentumShift => s.dp_shift,
                _ => s.dq_shift,
            }),
            Meter::Qubit => postselected_reading(&rho, &post, g).map(|r| r.reading),
        };
        match value {
            Ok(v) => v,
            Err(Error::VanishingPostselection { .. }) => 0.0,
            Err(e) => panic!("objective failed unexpectedly: {e}"),
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedMaximum {
    pub result: OptimizationResult,
    /// `gamma == 1`: the preselection has fully decayed to `|0>`.
    pub full_decay: bool,
}

/// Numerical maximum of a shift or reading over PPS when the preselection
/// suffers amplitude damping of strength `gamma`.
pub fn amplitude_damping_max(
    meter: Meter,
    gamma: f64,
    g: f64,
    quantity: Quantity,
) -> Result<DampedMaximum> {
    check_unit_interval("gamma", gamma)?;
    let channel = crate::channels::amplitude_damping(gamma)?;
    let objective = pps_objective(Preparation::Channel(channel), meter, quantity, g)?;
    let result = maximize(objective, DEFAULT_GRID_N, DEFAULT_TOL)?;
    Ok(DampedMaximum {
        result,
        full_decay: gamma == 1.0,
    })
}
