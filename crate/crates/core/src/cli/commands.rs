use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::output::{fmt_num, Outputs, Table};
use super::svg::{Chart, Scale, Series};
use super::{CliError, Cli, Command, Common};
use crate::bvp::{solve_bvp_with, BvpProblem, Regularization};
use crate::diagnostics::{check_kappa, check_order2_denominator, order2_tolerance};
use crate::error::NsfdError;
use crate::pde::{named_pde, solve_pde, NamedPde, PdeScheme, PdeSetup};
use crate::schemes::{step_count, step_euler, step_trapezoidal, OneStep, Stepper, StepperKind, Trajectory};
use crate::sir::{
    build_named_scheme, compare_golden, run_convergence_study, sir_decomposition_state_g, sir_exact_solution,
    NamedSirScheme, SirProblem, TABLE_DTS,
};

/// Relative tolerance of the `κ` check.
pub const KAPPA_TOL: f64 = 1e-4;

pub(super) fn execute(cli: &Cli) -> Result<(), CliError> {
    let common = &cli.common;
    let mut out = Outputs::default();
    let result = match &cli.command {
        Command::SirConvergence {
            scheme,
            dt,
            golden,
            tau,
            t_end,
        } => sir_convergence(common, &mut out, scheme, dt, *golden, *tau, *t_end),
        Command::SirSimulate {
            steppers,
            dt,
            t_end,
            tau,
        } => sir_simulate(common, &mut out, steppers, *dt, *t_end, *tau),
        Command::PdeRun {
            model,
            m,
            dt,
            t_end,
            stepper,
            diffusion,
        } => pde_run(common, &mut out, model, *m, *dt, *t_end, stepper, *diffusion),
        Command::BvpSolve {
            model,
            lambda,
            length,
            bracket,
            dt,
            tol,
            epsilon,
        } => bvp_solve(common, &mut out, model, *lambda, *length, bracket, *dt, *tol, *epsilon),
        Command::CheckConditions { scheme, samples } => check_conditions(common, &mut out, scheme, *samples),
    };
    // Partial results are still written when the numerics fail.
    if !matches!(result, Err(CliError::Usage(_))) {
        for path in out.write_all(&common.out)? {
            println!("wrote {}", path.display());
        }
    }
    result
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be a positive number, got {v}")))
    }
}

fn parse_schemes(name: &str, tau: f64, allow_first: bool) -> Result<Vec<NamedSirScheme>, CliError> {
    let list: Vec<NamedSirScheme> = if name.eq_ignore_ascii_case("all") {
        if allow_first {
            NamedSirScheme::all().to_vec()
        } else {
            NamedSirScheme::second_order().to_vec()
        }
    } else {
        let s: NamedSirScheme = name.parse().map_err(|e: NsfdError| CliError::Usage(e.to_string()))?;
        if !allow_first && s == NamedSirScheme::FirstOrder {
            return Err(CliError::Usage("the first-order scheme has no second-order conditions".into()));
        }
        vec![s]
    };
    Ok(list.into_iter().map(|s| s.with_tau(tau)).collect())
}

fn sir_convergence(
    common: &Common,
    out: &mut Outputs,
    scheme: &str,
    dts: &[f64],
    golden: bool,
    tau: f64,
    t_end: f64,
) -> Result<(), CliError> {
    positive("tau", tau)?;
    positive("T", t_end)?;
    let dts: Vec<f64> = if dts.is_empty() { TABLE_DTS.to_vec() } else { dts.to_vec() };
    for &dt in &dts {
        positive("dt", dt)?;
    }
    let schemes = parse_schemes(scheme, tau, true)?;
    let problem = SirProblem::<f64>::benchmark();
    let reports = schemes
        .par_iter()
        .map(|&s| run_convergence_study(s, &problem, &dts, t_end))
        .collect::<crate::Result<Vec<_>>>()?;

    let mut table = Table::new(["scheme", "dt", "err", "roc"]);
    for rep in &reports {
        for r in &rep.rows {
            table.push(vec![
                rep.scheme.to_string(),
                fmt_num(r.dt),
                fmt_num(r.err),
                r.roc.map(fmt_num).unwrap_or_default(),
            ]);
        }
    }
    if common.format.csv() {
        out.add_csv("sir_convergence.csv", &table)?;
    }
    if common.format.svg() {
        let chart = Chart {
            title: "SIR terminal error",
            x_label: "dt",
            y_label: "err",
            x_scale: Scale::Log10,
            y_scale: Scale::Log10,
            series: reports
                .iter()
                .map(|rep| Series {
                    name: rep.scheme.name(),
                    points: rep.rows.iter().map(|r| (r.dt, r.err)).collect(),
                })
                .collect(),
        };
        out.add("sir_convergence.svg", chart.render().into_bytes());
    }
    if golden {
        let misses: Vec<String> = reports.iter().flat_map(compare_golden).map(|m| m.to_string()).collect();
        if !misses.is_empty() {
            for m in &misses {
                eprintln!("golden mismatch: {m}");
            }
            return Err(CliError::Numerical(format!("{} golden cell(s) out of tolerance", misses.len())));
        }
        println!("golden: all cells within tolerance");
    }
    Ok(())
}

struct DirectSir {
    problem: SirProblem<f64>,
    trapezoidal: bool,
}

impl OneStep<f64> for DirectSir {
    fn dim(&self) -> usize {
        2
    }

    fn step(&self, t: f64, y: &[f64], dt: f64) -> crate::Result<Vec<f64>> {
        let rhs = |t: f64, y: &[f64], out: &mut [f64]| self.problem.rhs(t, y, out);
        if self.trapezoidal {
            step_trapezoidal(&rhs, t, y, dt)
        } else {
            step_euler(&rhs, t, y, dt)
        }
    }
}

/// Stepper for `sir-simulate`: the named schemes `p1` … `p6` and `first`,
/// `nsfd1`/`nsfd2` on the state-dependent decomposition with `φ = Δt`, and
/// `euler`/`trapezoidal` on the plain right-hand side.
pub fn sir_simulation_stepper(
    name: &str,
    problem: &SirProblem<f64>,
    tau: f64,
) -> Result<Box<dyn OneStep<f64>>, CliError> {
    let lower = name.to_ascii_lowercase();
    let boxed: Box<dyn OneStep<f64>> = match lower.as_str() {
        "nsfd1" => Box::new(Stepper::plain(StepperKind::Nsfd1, sir_decomposition_state_g(problem))?),
        "nsfd2" => Box::new(Stepper::plain(StepperKind::Nsfd2, sir_decomposition_state_g(problem))?),
        "euler" | "trapezoidal" => Box::new(DirectSir {
            problem: problem.clone(),
            trapezoidal: lower == "trapezoidal",
        }),
        other => {
            let s: NamedSirScheme = other
                .parse()
                .map_err(|_| CliError::Usage(format!("unknown stepper '{name}'")))?;
            Box::new(build_named_scheme(s.with_tau(tau), problem)?)
        }
    };
    Ok(boxed)
}

/// Integrates on `[0, t_end]`, keeping the states computed before a failing step.
pub fn simulate_until_failure(
    stepper: &dyn OneStep<f64>,
    y0: &[f64],
    dt: f64,
    t_end: f64,
) -> crate::Result<(Trajectory<f64>, Option<NsfdError>)> {
    let n = step_count(0.0, t_end, dt)?;
    let mut times = vec![0.0];
    let mut states = vec![y0.to_vec()];
    for k in 0..n {
        match stepper.step(k as f64 * dt, &states[k], dt) {
            Ok(y) => {
                times.push((k + 1) as f64 * dt);
                states.push(y);
            }
            Err(e) => return Ok((Trajectory { times, states, dt }, Some(e.at_step(k)))),
        }
    }
    Ok((Trajectory { times, states, dt }, None))
}

fn sir_simulate(
    common: &Common,
    out: &mut Outputs,
    names: &[String],
    dt: f64,
    t_end: f64,
    tau: f64,
) -> Result<(), CliError> {
    positive("dt", dt)?;
    positive("T", t_end)?;
    positive("tau", tau)?;
    if names.is_empty() {
        return Err(CliError::Usage("no steppers given".into()));
    }
    let problem = SirProblem::<f64>::benchmark();
    step_count(0.0, t_end, dt)?;
    let steppers = names
        .iter()
        .map(|n| sir_simulation_stepper(n, &problem, tau))
        .collect::<Result<Vec<_>, _>>()?;
    let runs = steppers
        .par_iter()
        .map(|s| simulate_until_failure(s.as_ref(), &problem.y0, dt, t_end))
        .collect::<crate::Result<Vec<_>>>()?;

    let mut failures = Vec::new();
    for (name, (traj, err)) in names.iter().zip(&runs) {
        if let Some(e) = err {
            failures.push(format!("{name}: {e}"));
        }
        if common.format.csv() {
            let mut table = Table::new(["t", "y1", "y2", "exact_y1", "exact_y2"]);
            for (t, y) in traj.times.iter().zip(&traj.states) {
                let ex = sir_exact_solution(problem.y0, *t);
                table.push(vec![fmt_num(*t), fmt_num(y[0]), fmt_num(y[1]), fmt_num(ex[0]), fmt_num(ex[1])]);
            }
            out.add_csv(format!("sir_simulate_{}.csv", name.to_ascii_lowercase()), &table)?;
        }
        let lo = traj.states.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        println!("{name}: {} steps, min component {}", traj.len() - 1, fmt_num(lo));
    }
    if common.format.svg() {
        let samples = 400;
        for (c, label) in [(0usize, "y1"), (1, "y2")] {
            let mut series: Vec<Series> = names
                .iter()
                .zip(&runs)
                .map(|(name, (traj, _))| Series {
                    name,
                    points: traj.times.iter().zip(&traj.states).map(|(&t, y)| (t, y[c])).collect(),
                })
                .collect();
            series.push(Series {
                name: "exact",
                points: (0..=samples)
                    .map(|k| {
                        let t = t_end * k as f64 / samples as f64;
                        (t, sir_exact_solution(problem.y0, t)[c])
                    })
                    .collect(),
            });
            let chart = Chart {
                title: label,
                x_label: "t",
                y_label: label,
                x_scale: Scale::Linear,
                y_scale: Scale::Linear,
                series,
            };
            out.add(format!("sir_simulate_{label}.svg"), chart.render().into_bytes());
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(failures.join("; ")))
    }
}

fn pde_stepper(name: &str) -> Result<(StepperKind<f64>, PdeScheme<f64>), CliError> {
    Ok(match name.to_ascii_lowercase().as_str() {
        "second-order" | "positive" => (StepperKind::SecondOrderPositive, PdeScheme::bounded()),
        "nsfd1" => (StepperKind::Nsfd1, PdeScheme::linear()),
        "nsfd2" => (StepperKind::Nsfd2, PdeScheme::linear()),
        "euler" => (StepperKind::Euler, PdeScheme::linear()),
        "trapezoidal" => (StepperKind::Trapezoidal, PdeScheme::linear()),
        _ => return Err(CliError::Usage(format!("unknown PDE stepper '{name}'"))),
    })
}

#[allow(clippy::too_many_arguments)]
fn pde_run(
    common: &Common,
    out: &mut Outputs,
    model: &str,
    m: usize,
    dt: f64,
    t_end: f64,
    stepper: &str,
    diffusion: f64,
) -> Result<(), CliError> {
    positive("dt", dt)?;
    positive("T", t_end)?;
    positive("diffusion", diffusion)?;
    let named = NamedPde::<f64>::from_name(model)?;
    let (kind, scheme) = pde_stepper(stepper)?;
    let setup = PdeSetup {
        diffusion,
        t_end,
        ..PdeSetup::default()
    };
    let problem = named_pde(named, &setup)?;
    let field = solve_pde(&problem, m, kind, &scheme, dt)?;
    let stem = format!("pde_{}_{}", model.to_ascii_lowercase(), stepper.to_ascii_lowercase());
    if common.format.csv() {
        let mut header = vec!["t\\x".to_string()];
        header.extend(field.x.iter().map(|&x| fmt_num(x)));
        let mut table = Table::new(header);
        for (t, row) in field.t.iter().zip(&field.u) {
            let mut cells = vec![fmt_num(*t)];
            cells.extend(row.iter().map(|&v| fmt_num(v)));
            table.push(cells);
        }
        out.add_csv(format!("{stem}.csv"), &table)?;
    }
    if common.format.svg() {
        let levels = 6.min(field.t.len());
        let picks: Vec<usize> = (0..levels)
            .map(|k| if levels == 1 { 0 } else { k * (field.t.len() - 1) / (levels - 1) })
            .collect();
        let names: Vec<String> = picks.iter().map(|&k| format!("t={}", fmt_num(field.t[k]))).collect();
        let chart = Chart {
            title: model,
            x_label: "x",
            y_label: "u",
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            series: picks
                .iter()
                .zip(&names)
                .map(|(&k, name)| Series {
                    name,
                    points: field.x.iter().cloned().zip(field.u[k].iter().cloned()).collect(),
                })
                .collect(),
        };
        out.add(format!("{stem}.svg"), chart.render().into_bytes());
    }
    println!(
        "interior min {} max {}",
        fmt_num(field.interior_min()),
        fmt_num(field.interior_max())
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bvp_solve(
    common: &Common,
    out: &mut Outputs,
    model: &str,
    lambda: f64,
    length: f64,
    bracket: &[f64],
    dt: f64,
    tol: f64,
    epsilon: Option<f64>,
) -> Result<(), CliError> {
    positive("dt", dt)?;
    positive("tol", tol)?;
    positive("L", length)?;
    let &[lo, hi] = bracket else {
        return Err(CliError::Usage("--bracket takes exactly two values lo,hi".into()));
    };
    let problem = match model.to_ascii_lowercase().as_str() {
        "bratu" => BvpProblem::bratu(lambda, length),
        "linear" => BvpProblem::linear(lambda, length),
        _ => return Err(CliError::Usage(format!("unknown BVP model '{model}'"))),
    };
    let reg = match epsilon {
        Some(e) => {
            positive("epsilon", e)?;
            Regularization::Epsilon(e)
        }
        None => Regularization::default(),
    };
    let res = solve_bvp_with(&problem, reg, dt, (lo, hi), tol)?;
    println!("s_star = {}", fmt_num(res.s_star));
    println!("residual = {}", fmt_num(res.residual));
    let sol = &res.full_solution;
    let stem = format!("bvp_{}", model.to_ascii_lowercase());
    if common.format.csv() {
        let mut table = Table::new(["t", "u"]);
        for (t, u) in sol.t.iter().zip(&sol.u) {
            table.push(vec![fmt_num(*t), fmt_num(*u)]);
        }
        out.add_csv(format!("{stem}.csv"), &table)?;
    }
    if common.format.svg() {
        let chart = Chart {
            title: model,
            x_label: "t",
            y_label: "u",
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            series: vec![Series {
                name: "u",
                points: sol.t.iter().cloned().zip(sol.u.iter().cloned()).collect(),
            }],
        };
        out.add(format!("{stem}.svg"), chart.render().into_bytes());
    }
    Ok(())
}

/// Worst cases of the order-condition checks for one scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub scheme: NamedSirScheme,
    pub samples: usize,
    /// Largest `|φ''(0) - 2g|` over samples and components.
    pub max_order2_residual: f64,
    /// Largest residual relative to `1e-5 · max(1, 2g)`; passing when `< 1`.
    pub max_order2_ratio: f64,
    /// Largest relative `κ` deviation over components.
    pub kappa_residual: f64,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.max_order2_ratio < 1.0 && self.kappa_residual < KAPPA_TOL
    }
}

/// Evaluates the denominator curvature condition at `samples` seeded random
/// `(t, y) ∈ [0, 1] × [0.01, 1]²` with the scheme's own loss rates, and the
/// `κ` condition on its perturbation functions.
pub fn check_scheme_conditions(scheme: NamedSirScheme, samples: usize, seed: u64) -> crate::Result<ConditionReport> {
    let problem = SirProblem::<f64>::benchmark();
    let stepper = build_named_scheme(scheme, &problem)?;
    let (Some(system), Some(config)) = (stepper.system(), stepper.config()) else {
        return Err(NsfdError::ParamOutOfRange(format!("{scheme} has no second-order conditions")));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut max_res, mut max_ratio) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let t = rng.gen_range(0.0..=1.0);
        let y = [rng.gen_range(0.01..=1.0), rng.gen_range(0.01..=1.0)];
        let (_, g) = system.f_g(t, &y);
        for (i, phi) in config.phi.iter().enumerate() {
            let r = check_order2_denominator(phi, t, &y, g[i]);
            max_res = max_res.max(r);
            max_ratio = max_ratio.max(r / order2_tolerance(g[i]));
        }
    }
    let kappa_residual = config.varphi.iter().map(check_kappa).fold(0.0, f64::max);
    Ok(ConditionReport {
        scheme,
        samples,
        max_order2_residual: max_res,
        max_order2_ratio: max_ratio,
        kappa_residual,
    })
}

fn check_conditions(common: &Common, out: &mut Outputs, scheme: &str, samples: usize) -> Result<(), CliError> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let schemes = parse_schemes(scheme, crate::sir::DEFAULT_TAU, false)?;
    let reports = schemes
        .iter()
        .map(|&s| check_scheme_conditions(s, samples, common.seed))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut table = Table::new(["scheme", "samples", "max_order2_residual", "max_order2_ratio", "kappa_residual", "pass"]);
    for r in &reports {
        println!(
            "{}: order-2 residual {} (ratio {}), kappa residual {} -> {}",
            r.scheme,
            fmt_num(r.max_order2_residual),
            fmt_num(r.max_order2_ratio),
            fmt_num(r.kappa_residual),
            if r.passed() { "pass" } else { "FAIL" }
        );
        table.push(vec![
            r.scheme.to_string(),
            r.samples.to_string(),
            fmt_num(r.max_order2_residual),
            fmt_num(r.max_order2_ratio),
            fmt_num(r.kappa_residual),
            r.passed().to_string(),
        ]);
    }
    if common.format.csv() {
        out.add_csv("check_conditions.csv", &table)?;
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed()).map(|r| r.scheme.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("conditions violated for {}", failed.join(", "))))
    }
}
