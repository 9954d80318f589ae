use std::fs;
use std::path::Path;

use rayon::prelude::*;
use weakamp::optimizer::{amplitude_damping_max, maximize, pps_objective, Meter, Preparation, Quantity};
use weakamp::verify::{Formula, Perturbation, VerifyOptions};
use weakamp::{
    amplitude_damping, depolarizing, gaussian_max_shifts, gaussian_shifts, phase_damping, postselected_reading,
    pure_state, qubit_max_reading, run_verification, GaussianMeter, KrausChannel, MaxResult, PpsPoint,
};

use crate::args::{ChannelArg, CouplingArgs, FigArgs, MaxArgs, MeterArg, OptimizeArgs, PrepArgs, QuantityArg, ShiftArgs, VerifyArgs};
use crate::csv::{num, Table};
use crate::CliError;

/// Couplings of the figure families: units of `Dp` for the Gaussian meter,
/// absolute for the qubit meter.
const FIG_COUPLINGS: [f64; 3] = [0.1, 0.05, 0.03];
/// Coupling of the amplitude-damping figures.
const FIG_DAMPED_COUPLING: f64 = 0.1;
const DEFAULT_STEPS: usize = 101;
const DEFAULT_OPTIMIZER_STEPS: usize = 21;

struct Prepared {
    preparation: Preparation,
    /// Coherence that fixes the closed-form maxima; `None` under amplitude damping.
    kappa: Option<f64>,
}

fn channel(kind: ChannelArg, gamma: f64) -> weakamp::Result<KrausChannel> {
    match kind {
        ChannelArg::Depolarizing => depolarizing(gamma),
        ChannelArg::PhaseDamping => phase_damping(gamma),
        _ => amplitude_damping(gamma),
    }
}

fn channel_name(kind: ChannelArg) -> &'static str {
    match kind {
        ChannelArg::None => "none",
        ChannelArg::Depolarizing => "depolarizing",
        ChannelArg::PhaseDamping => "phase-damping",
        ChannelArg::AmplitudeDamping => "amplitude-damping",
    }
}

fn prepare(p: &PrepArgs, table: &mut Table) -> Result<Prepared, CliError> {
    table.param("channel", channel_name(p.channel));
    if p.channel == ChannelArg::None {
        if p.gamma.is_some() {
            return Err(CliError::Usage("--gamma needs a --channel other than none".into()));
        }
        let r = p.r.unwrap_or(1.0);
        table.param("r", r);
        let preparation = Preparation::Mixed { modulus: r };
        preparation.prepare(&weakamp::PureQubit::ZERO)?;
        return Ok(Prepared {
            preparation,
            kappa: Some(r),
        });
    }
    if p.r.is_some() {
        return Err(CliError::Usage("--r applies only with --channel none".into()));
    }
    let gamma = p.gamma.unwrap_or(0.0);
    table.param("gamma", gamma);
    let ch = channel(p.channel, gamma)?;
    Ok(Prepared {
        kappa: ch.closed_form_coherence(),
        preparation: Preparation::Channel(ch),
    })
}

fn coupling(meter: MeterArg, c: &CouplingArgs, table: &mut Table) -> Result<(Meter, f64), CliError> {
    match meter {
        MeterArg::Gaussian => {
            if c.g.is_some() {
                return Err(CliError::Usage("the Gaussian meter takes --g-over-dp, not --g".into()));
            }
            let ratio = c
                .g_over_dp
                .ok_or_else(|| CliError::Usage("the Gaussian meter needs --g-over-dp".into()))?;
            let m = GaussianMeter::new(c.delta)?;
            table.param("meter", "gaussian").param("delta", c.delta).param("g-over-dp", ratio);
            Ok((Meter::Gaussian(m), ratio * m.dp()))
        }
        MeterArg::Qubit => {
            if c.g_over_dp.is_some() {
                return Err(CliError::Usage("the qubit meter takes --g, not --g-over-dp".into()));
            }
            let g = c.g.ok_or_else(|| CliError::Usage("the qubit meter needs --g".into()))?;
            table.param("meter", "qubit").param("g", g);
            Ok((Meter::Qubit, g))
        }
    }
}

pub fn shift(a: &ShiftArgs) -> Result<String, CliError> {
    let mut params = Table::default();
    params.param("command", "shift");
    let (meter, g) = coupling(a.meter, &a.coupling, &mut params)?;
    let prep = prepare(&a.prep, &mut params)?;
    params.param("theta1", a.theta1).param("theta2", a.theta2).param("phi0", a.phi0);
    let rho = prep.preparation.prepare(&pure_state(a.theta1, a.phi0)?)?;
    let post = pure_state(a.theta2, 0.0)?;
    let mut table = match meter {
        Meter::Gaussian(m) => {
            let s = gaussian_shifts(&rho, &post, g, &m)?;
            let mut t = Table::new(&["dp_shift", "dq_shift", "prob"]);
            t.row(vec![num(s.dp_shift), num(s.dq_shift), num(s.prob)]);
            t
        }
        Meter::Qubit => {
            let r = postselected_reading(&rho, &post, g)?;
            let mut t = Table::new(&["reading", "prob"]);
            t.row(vec![num(r.reading), num(r.prob)]);
            t
        }
    };
    copy_params(&params, &mut table);
    Ok(table.render())
}

fn copy_params(from: &Table, to: &mut Table) {
    let rendered = from.render();
    let line = rendered.lines().next().unwrap_or("#");
    for kv in line.trim_start_matches('#').split_whitespace() {
        if let Some((k, v)) = kv.split_once('=') {
            to.param(k, v);
        }
    }
}

fn point_fields(p: &PpsPoint) -> [String; 3] {
    [num(p.theta1), num(p.theta2), num(p.phi0)]
}

fn max_row(quantity: &str, r: &MaxResult, method: &str) -> Vec<String> {
    let [t1, t2, p0] = point_fields(&r.argmax);
    vec![quantity.into(), num(r.value), t1, t2, p0, method.into()]
}

pub fn max(a: &MaxArgs) -> Result<String, CliError> {
    let mut table = Table::new(&["quantity", "value", "theta1", "theta2", "phi0", "method"]);
    table.param("command", "max");
    let (meter, g) = coupling(a.meter, &a.coupling, &mut table)?;
    let prep = prepare(&a.prep, &mut table)?;
    match (meter, prep.kappa) {
        (Meter::Gaussian(m), Some(kappa)) => {
            let max = gaussian_max_shifts(kappa, g, &m)?;
            table.row(max_row("dp", &max.dp, "closed-form"));
            table.row(max_row("dq", &max.dq, "closed-form"));
        }
        (Meter::Qubit, Some(kappa)) => {
            table.row(max_row("reading", &qubit_max_reading(kappa, g)?, "closed-form"));
        }
        (_, None) => {
            let gamma = a.prep.gamma.unwrap_or(0.0);
            let quantities: &[(&str, Quantity)] = match meter {
                Meter::Gaussian(_) => &[("dp", Quantity::MomentumShift), ("dq", Quantity::PositionShift)],
                Meter::Qubit => &[("reading", Quantity::Reading)],
            };
            for &(name, q) in quantities {
                let found = amplitude_damping_max(meter, gamma, g, q)?.result;
                let r = MaxResult {
                    value: found.value,
                    argmax: found.argmax,
                    mirror: None,
                };
                table.row(max_row(name, &r, "optimizer"));
            }
        }
    }
    Ok(table.render())
}

pub fn optimize(a: &OptimizeArgs) -> Result<String, CliError> {
    let mut table = Table::new(&[
        "quantity",
        "value",
        "signed_value",
        "theta1",
        "theta2",
        "phi0",
        "evaluations",
        "converged",
    ]);
    table.param("command", "optimize");
    let (meter, g) = coupling(a.meter, &a.coupling, &mut table)?;
    let prep = prepare(&a.prep, &mut table)?;
    let (name, quantity) = match a.quantity {
        QuantityArg::Dp => ("dp", Quantity::MomentumShift),
        QuantityArg::Dq => ("dq", Quantity::PositionShift),
        QuantityArg::Reading => ("reading", Quantity::Reading),
    };
    table.param("quantity", name).param("grid-n", a.grid_n).param("tol", a.tol);
    let objective = pps_objective(prep.preparation, meter, quantity, g)?;
    let r = maximize(objective, a.grid_n, a.tol)?;
    let [t1, t2, p0] = point_fields(&r.argmax);
    table.row(vec![
        name.into(),
        num(r.value),
        num(r.signed_value),
        t1,
        t2,
        p0,
        r.evaluations.to_string(),
        r.converged.to_string(),
    ]);
    Ok(table.render())
}

fn sweep(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                stop
            } else {
                start + (stop - start) * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

fn label(c: f64) -> String {
    format!("{c}")
}

/// Figure curve data; written to `--output` or returned for standard output.
pub fn fig(a: &FigArgs) -> Result<Option<String>, CliError> {
    let optimizer_backed = a.n >= 5;
    let steps = a.steps.unwrap_or(if optimizer_backed { DEFAULT_OPTIMIZER_STEPS } else { DEFAULT_STEPS });
    let start = a.start.unwrap_or(0.0);
    let stop = a.stop.unwrap_or(1.0);
    if steps < 2 {
        return Err(CliError::Usage("--steps must be at least 2".into()));
    }
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) || start >= stop {
        return Err(CliError::Usage(format!(
            "sweep needs 0 <= start < stop <= 1, got start={start} stop={stop}"
        )));
    }
    let noisy = matches!(a.n, 3 | 4);
    let channel_kind = match (noisy, a.channel) {
        (true, None) => ChannelArg::Depolarizing,
        (true, Some(c @ (ChannelArg::Depolarizing | ChannelArg::PhaseDamping))) => c,
        (true, Some(_)) => {
            return Err(CliError::Usage(
                "figures 3 and 4 take --channel depolarizing or phase-damping".into(),
            ))
        }
        (false, Some(_)) => return Err(CliError::Usage(format!("figure {} takes no --channel", a.n))),
        (false, None) => ChannelArg::None,
    };
    let meter = GaussianMeter::new(a.delta)?;
    let xs = sweep(start, stop, steps);
    let parameter = if a.n <= 2 { "r" } else { "gamma" };

    let mut header = vec![parameter.to_string()];
    match a.n {
        1 | 3 => {
            for c in FIG_COUPLINGS {
                header.push(format!("dp_max_g{}dp", label(c)));
                header.push(format!("dq_max_g{}dp", label(c)));
            }
        }
        2 | 4 => {
            for c in FIG_COUPLINGS {
                header.push(format!("reading_max_g{}", label(c)));
            }
        }
        5 => {
            header.push(format!("dp_max_g{}dp", label(FIG_DAMPED_COUPLING)));
            header.push(format!("dq_max_g{}dp", label(FIG_DAMPED_COUPLING)));
        }
        _ => header.push(format!("reading_max_g{}", label(FIG_DAMPED_COUPLING))),
    }
    let mut table = Table::with_header(header);
    table.param("command", "fig").param("n", a.n).param("parameter", parameter);
    table.param("start", start).param("stop", stop).param("steps", steps);
    if a.n != 2 && a.n != 4 && a.n != 6 {
        table.param("delta", a.delta);
    }
    if noisy {
        table.param("channel", channel_name(channel_kind));
    }
    if optimizer_backed {
        table.param("channel", "amplitude-damping");
    }

    let rows: Vec<Result<Vec<String>, CliError>> = xs
        .par_iter()
        .map(|&x| {
            let kappa = match a.n {
                1 | 2 => x,
                3 | 4 => channel(channel_kind, x)?.closed_form_coherence().expect("closed-form channel"),
                _ => f64::NAN,
            };
            let mut row = vec![num(x)];
            match a.n {
                1 | 3 => {
                    for c in FIG_COUPLINGS {
                        let m = gaussian_max_shifts(kappa, c * meter.dp(), &meter)?;
                        row.push(num(m.dp.value));
                        row.push(num(m.dq.value));
                    }
                }
                2 | 4 => {
                    for c in FIG_COUPLINGS {
                        row.push(num(qubit_max_reading(kappa, c)?.value));
                    }
                }
                5 => {
                    let g = FIG_DAMPED_COUPLING * meter.dp();
                    for q in [Quantity::MomentumShift, Quantity::PositionShift] {
                        row.push(num(amplitude_damping_max(Meter::Gaussian(meter), x, g, q)?.result.value));
                    }
                }
                _ => {
                    let r = amplitude_damping_max(Meter::Qubit, x, FIG_DAMPED_COUPLING, Quantity::Reading)?;
                    row.push(num(r.result.value));
                }
            }
            Ok(row)
        })
        .collect();
    for r in rows {
        table.row(r?);
    }
    let text = table.render();
    match &a.output {
        Some(path) => {
            write_file(path, &text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn parse_perturbation(arg: &str) -> Result<Perturbation, CliError> {
    let (name, rel) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--perturb expects FORMULA=REL, got {arg:?}")))?;
    let formula = Formula::from_name(name).ok_or_else(|| {
        let known: Vec<&str> = Formula::ALL.iter().map(|f| f.name()).collect();
        CliError::Usage(format!("unknown formula {name:?} (known: {})", known.join(", ")))
    })?;
    let relative: f64 = rel
        .parse()
        .map_err(|_| CliError::Usage(format!("--perturb: {rel:?} is not a number")))?;
    Ok(Perturbation { formula, relative })
}

/// Runs the batteries; the report is returned even when a tolerance fails.
pub fn verify(a: &VerifyArgs) -> Result<(String, Option<String>), CliError> {
    let opts = VerifyOptions {
        seed: a.seed,
        samples: a.samples,
        perturbation: a.perturb.as_deref().map(parse_perturbation).transpose()?,
    };
    if opts.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let report = run_verification(&opts)?;
    let csv = format!("# seed={}\n{}", a.seed, report.adjudication.to_csv());
    write_file(&a.csv, &csv)?;
    Ok((report.to_text(), report.worst_offender()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_hits_both_ends() {
        let xs = sweep(0.0, 1.0, 101);
        assert_eq!(xs.len(), 101);
        assert_eq!(xs[0], 0.0);
        assert_eq!(xs[100], 1.0);
        assert!((xs[13] - 0.13).abs() < 1e-15);
    }

    #[test]
    fn perturbation_parsing() {
        let p = parse_perturbation("gaussian_shifts.dq=1e-3").unwrap();
        assert_eq!(p.formula, Formula::ShiftDq);
        assert_eq!(p.relative, 1e-3);
        assert!(parse_perturbation("gaussian_shifts.dq").is_err());
        assert!(parse_perturbation("nope=1").is_err());
        assert!(parse_perturbation("qubit_max_reading=x").is_err());
    }
}
