//! Gaussian pointer evolved on a position grid.
//!
//! The coupling `exp(i g A q)` is diagonal in the system basis, so the pointer
//! splits into two branch wavefunctions `Phi(q) e^{+igq}` and `Phi(q) e^{-igq}`.
//! Only the pointer is discretized. Position moments come from quadrature on
//! the grid, momentum moments from a spectral derivative.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_non_negative, Error, Result};
use crate::gaussian::{GaussianMeter, ShiftResult};
use crate::qubit::{PureQubit, QubitDensity};

pub const DEFAULT_POINTS: usize = 4096;
/// Postselection floor of the grid oracle.
pub const GRID_PROB_FLOOR: f64 = 1e-12;
const EDGE_MASS_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionGrid {
    half_width: f64,
    points: usize,
}

impl PositionGrid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Domain {
                name: "half_width",
                value: half_width,
                domain: "(0, inf)",
            });
        }
        if !points.is_power_of_two() || points < 64 {
            return Err(Error::Domain {
                name: "points",
                value: points as f64,
                domain: "powers of two >= 64",
            });
        }
        Ok(PositionGrid { half_width, points })
    }

    /// `10 Delta + 4 g Delta^2` half width, 4096 points.
    pub fn for_coupling(meter: &GaussianMeter, g: f64) -> Self {
        let d = meter.delta();
        PositionGrid {
            half_width: 10.0 * d + 4.0 * g.abs() * d * d,
            points: DEFAULT_POINTS,
        }
    }

    pub fn with_points(self, points: usize) -> Result<Self> {
        Self::new(self.half_width, points)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn position(&self, n: usize) -> f64 {
        -self.half_width + n as f64 * self.spacing()
    }

    /// Angular wavenumber of FFT bin `m`; the Nyquist bin maps to 0.
    fn wavenumber(&self, m: usize) -> f64 {
        let n = self.points;
        let dk = std::f64::consts::TAU / (n as f64 * self.spacing());
        if m < n / 2 {
            m as f64 * dk
        } else if m == n / 2 {
            0.0
        } else {
            (m as f64 - n as f64) * dk
        }
    }
}

type Moments = [[Complex64; 2]; 2];

/// Branch matrix elements `<chi_k| R |chi_j>` for `R in {1, q, p}` at one
/// coupling, meter and grid. Reusable across any number of PPS.
#[derive(Debug, Clone)]
pub struct GaussianGridOracle {
    g: f64,
    norm: Moments,
    position: Moments,
    momentum: Moments,
    initial_q: f64,
    initial_p: f64,
}

struct Spectral {
    grid: PositionGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Spectral {
    fn new(grid: PositionGrid) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            grid,
            forward: planner.plan_fft_forward(grid.points),
            inverse: planner.plan_fft_inverse(grid.points),
        }
    }

    fn spectrum(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut buf = psi.to_vec();
        self.forward.process(&mut buf);
        buf
    }

    /// `-i d/dq psi` via the FFT.
    fn momentum_of(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.points;
        let mut buf = self.spectrum(psi);
        for (m, z) in buf.iter_mut().enumerate() {
            *z *= self.grid.wavenumber(m);
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    /// Fraction of the spectral weight in the outer fifth of the wavenumber band.
    fn high_band_mass(&self, psi: &[Complex64]) -> f64 {
        let n = self.grid.points;
        let spec = self.spectrum(psi);
        let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
        let high: f64 = spec
            .iter()
            .enumerate()
            .filter(|(m, _)| {
                let folded = (*m).min(n - *m);
                folded as f64 > 0.4 * n as f64
            })
            .map(|(_, z)| z.norm_sqr())
            .sum();
        high / total
    }
}

fn inner(a: &[Complex64], b: &[Complex64], dq: f64) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * dq
}

impl GaussianGridOracle {
    pub fn new(meter: &GaussianMeter, g: f64, grid: PositionGrid) -> Result<Self> {
        check_non_negative("g", g)?;
        if g * meter.delta() > 1.0 {
            return Err(Error::Domain {
                name: "g * delta",
                value: g * meter.delta(),
                domain: "[0, 1]",
            });
        }
        let n = grid.points;
        let dq = grid.spacing();
        let d = meter.delta();
        let amp = (2.0 * std::f64::consts::PI * d * d).powf(-0.25);
        let q: Vec<f64> = (0..n).map(|i| grid.position(i)).collect();
        let phi: Vec<Complex64> = q
            .iter()
            .map(|&x| Complex64::new(amp * (-x * x / (4.0 * d * d)).exp(), 0.0))
            .collect();

        let norm0: f64 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dq;
        let edge: f64 = q
            .iter()
            .zip(&phi)
            .filter(|(x, _)| x.abs() > 0.9 * grid.half_width)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            * dq;
        if edge > EDGE_MASS_LIMIT || (norm0 - 1.0).abs() > EDGE_MASS_LIMIT {
            return Err(Error::GridTooSmall(format!(
                "pointer norm {norm0}, edge mass {edge:e}"
            )));
        }

        let spectral = Spectral::new(grid);
        // Branch 0 (A = +1) gets e^{+igq}, branch 1 (A = -1) gets e^{-igq}.
        let branches: [Vec<Complex64>; 2] = [1.0, -1.0].map(|a: f64| {
            q.iter()
                .zip(&phi)
                .map(|(&x, &p)| p * Complex64::from_polar(1.0, a * g * x))
                .collect()
        });
        for b in &branches {
            let high = spectral.high_band_mass(b);
            if high > EDGE_MASS_LIMIT {
                return Err(Error::GridTooSmall(format!(
                    "momentum spectrum reaches the band edge (mass {high:e})"
                )));
            }
        }
        let q_branches: Vec<Vec<Complex64>> = branches
            .iter()
            .map(|b| b.iter().zip(&q).map(|(z, &x)| z * x).collect())
            .collect();
        let p_branches: Vec<Vec<Complex64>> =
            branches.iter().map(|b| spectral.momentum_of(b)).collect();

        let mut norm = [[Complex64::new(0.0, 0.0); 2]; 2];
        let mut position = norm;
        let mut momentum = norm;
        for j in 0..2 {
            for k in 0..2 {
                norm[j][k] = inner(&branches[k], &branches[j], dq);
                position[j][k] = inner(&branches[k], &q_branches[j], dq);
                momentum[j][k] = inner(&branches[k], &p_branches[j], dq);
            }
        }

        let q_phi: Vec<Complex64> = phi.iter().zip(&q).map(|(z, &x)| z * x).collect();
        let initial_q = inner(&phi, &q_phi, dq).re / norm0;
        let initial_p = inner(&phi, &spectral.momentum_of(&phi), dq).re / norm0;

        Ok(GaussianGridOracle {
            g,
            norm,
            position,
            momentum,
            initial_q,
            initial_p,
        })
    }

    pub fn coupling(&self) -> f64 {
        self.g
    }

    /// Conditional pointer shifts for preselection `rho_s` and postselection `psi_f`.
    pub fn evolve(&self, rho_s: &QubitDensity, psi_f: &PureQubit) -> Result<ShiftResult> {
        let f = psi_f.amplitudes();
        let m = rho_s.matrix();
        // Unnormalized postselected pointer: sum_jk conj(f_j) rho_jk f_k |chi_j><chi_k|.
        let mut prob = Complex64::new(0.0, 0.0);
        let mut q_sum = prob;
        let mut p_sum = prob;
        for j in 0..2 {
            for k in 0..2 {
                let w = f[j].conj() * m[(j, k)] * f[k];
                prob += w * self.norm[j][k];
                q_sum += w * self.position[j][k];
                p_sum += w * self.momentum[j][k];
            }
        }
        let prob = prob.re;
        if prob <= GRID_PROB_FLOOR {
            return Err(Error::VanishingPostselection {
                prob,
                floor: GRID_PROB_FLOOR,
            });
        }
        Ok(ShiftResult {
            dp_shift: p_sum.re / prob - self.initial_p,
            dq_shift: q_sum.re / prob - self.initial_q,
            prob,
        })
    }
}

/// One-shot grid evolution; see [`GaussianGridOracle`] for repeated use.
pub fn gaussian_grid_evolve(
    rho_s: &QubitDensity,
    psi_f: &PureQubit,
    g: f64,
    meter: &GaussianMeter,
    grid: PositionGrid,
) -> Result<ShiftResult> {
    GaussianGridOracle::new(meter, g, grid)?.evolve(rho_s, psi_f)
}
