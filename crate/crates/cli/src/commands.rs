//! Subcommands. Each returns the files to write; nothing touches the disk here.

use clap::Args;
use rayon::prelude::*;
use serde_json::json;

use qab_core::dynamics::{
    final_state, infidelity, integrate_master_equation, time_to_infidelity, trace_distance, TauScan,
};
use qab_core::schedule::uniform_grid;
use qab_core::spectral::{track_branches, GapRule};
use qab_core::Error;

use crate::error::{input, CliError};
use crate::setup::{Common, ScheduleKind, Setup};
use crate::table::{Cell, Table};

pub type Files = Vec<(String, Vec<u8>)>;

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    /// Path along which the spectrum is tracked.
    #[arg(long, value_enum, default_value_t = ScheduleKind::Linear)]
    pub schedule: ScheduleKind,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = ScheduleKind::Qab)]
    pub schedule: ScheduleKind,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// Target infidelities.
    #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3")]
    pub infidelity: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ScheduleKind::Qab)]
    pub candidate: ScheduleKind,
    #[arg(long, value_enum, default_value_t = ScheduleKind::Linear)]
    pub baseline: ScheduleKind,
    /// Largest τ searched before a cell counts as unreachable.
    #[arg(long, default_value_t = 200.0)]
    pub tau_max: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "qab,linear")]
    pub schedules: Vec<ScheduleKind>,
}

fn name(setup: &Setup, stem: &str) -> String {
    format!("{stem}.{}", setup.format.extension())
}

fn json_file(name: &str, value: serde_json::Value) -> Result<(String, Vec<u8>), CliError> {
    Ok((name.to_string(), serde_json::to_vec_pretty(&value)?))
}

fn reject_tau(setup: &Setup, cmd: &str) -> Result<(), CliError> {
    if setup.taus.is_empty() {
        Ok(())
    } else {
        Err(input(format!("{cmd} does not take --tau")))
    }
}

pub fn spectrum(args: &SpectrumArgs) -> Result<Files, CliError> {
    let setup = Setup::from_args(&args.common)?;
    reject_tau(&setup, "spectrum")?;
    let preset = setup.preset(setup.single_gamma()?)?;
    let schedule = setup.schedule(&preset, args.schedule)?;
    let grid = uniform_grid(setup.grid);
    let br = track_branches(&preset.model, &schedule, &grid, preset.form)?;

    let mut cols = vec!["s".to_string()];
    for k in 0..br.len() {
        cols.push(format!("re_{k}"));
        cols.push(format!("im_{k}"));
    }
    let mut branches = Table::new(cols);
    for (i, &s) in grid.iter().enumerate() {
        let mut row = vec![Cell::Num(s)];
        for b in &br.branches {
            row.push(b[i].re.into());
            row.push(b[i].im.into());
        }
        branches.push(row);
    }

    let selector = preset.gap_rule.resolve(&preset.model, &schedule, preset.form)?;
    let mut gap = Table::new(["s", "re", "im", "abs"]);
    for (i, &s) in grid.iter().enumerate() {
        let ev: Vec<_> = br.branches.iter().map(|b| b[i]).collect();
        let g = selector.select(&ev, s);
        let (re, im) = g.map_or((f64::NAN, f64::NAN), |g| (g.re, g.im));
        gap.push(vec![Cell::Num(s), re.into(), im.into(), re.hypot(im).into()]);
    }
    if matches!(preset.gap_rule, GapRule::WidestConjugatePair)
        && gap.rows.iter().any(|r| matches!(r[3], Cell::Num(x) if x.is_nan()))
    {
        log::warn!("no conjugate eigenvalue pair at some grid points; gap written as NaN there");
    }
    Ok(vec![
        (name(&setup, "branches"), branches.render(setup.format)?),
        (name(&setup, "gap"), gap.render(setup.format)?),
    ])
}

pub fn solve(args: &SolveArgs) -> Result<Files, CliError> {
    let setup = Setup::from_args(&args.common)?;
    let tau = match setup.taus.as_slice() {
        [] => 1.0,
        [t] => *t,
        _ => return Err(input("solve takes a single --tau")),
    };
    let preset = setup.preset(setup.single_gamma()?)?;
    let sol = setup.solve(&preset, tau)?;

    let grid = uniform_grid(setup.grid);
    let arity = preset.model.arity();
    let mut cols = vec!["s".to_string()];
    cols.extend((0..arity).map(|k| format!("q_{k}")));
    let mut table = Table::new(cols);
    for &s in &grid {
        let q = sol.schedule.drives(s)?;
        let mut row = vec![Cell::Num(s)];
        row.extend(q.into_iter().map(Cell::Num));
        table.push(row);
    }
    let report = json!({
        "converged": sol.converged,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "closed_system": sol.closed_system,
        "initial_slope": sol.initial_slope.as_slice(),
        "tau": tau,
        "grid": setup.grid,
    });
    Ok(vec![(name(&setup, "schedule"), table.render(setup.format)?), json_file("convergence.json", report)?])
}

pub fn simulate(args: &SimulateArgs) -> Result<Files, CliError> {
    let setup = Setup::from_args(&args.common)?;
    let gamma = setup.single_gamma()?;
    let taus = setup.taus_or(&[10.0]);
    let preset = setup.preset(gamma)?;
    let schedule = setup.schedule(&preset, args.schedule)?;
    let target = setup.target(&preset, gamma, &schedule)?;
    let dim = preset.model.dim();

    let runs: Vec<_> = taus
        .par_iter()
        .map(|&tau| {
            let traj = integrate_master_equation(&preset.model, &schedule, tau, &preset.initial_state, setup.grid - 1)?;
            let goal = target.at(tau)?;
            let rho = traj.final_state();
            Ok((traj.clone(), trace_distance(&goal, rho)?, infidelity(&goal, rho)?))
        })
        .collect::<Result<_, Error>>()?;

    let mut files = Files::new();
    let mut summary = Table::new(["tau", "trace_distance", "infidelity"]);
    for (k, (tau, (traj, d, inf))) in taus.iter().zip(&runs).enumerate() {
        let mut cols = vec!["s".to_string()];
        cols.extend((0..dim).map(|j| format!("pop_{j}")));
        cols.push("purity".into());
        let mut t = Table::new(cols);
        for (s, rho) in traj.times.iter().zip(&traj.states) {
            let mut row = vec![Cell::Num(*s)];
            row.extend((0..dim).map(|j| Cell::Num(rho[(j, j)].re)));
            row.push(Cell::Num((rho * rho).trace().re));
            t.push(row);
        }
        files.push((name(&setup, &format!("trajectory_{k:03}")), t.render(setup.format)?));
        summary.push(vec![Cell::Num(*tau), Cell::Num(*d), Cell::Num(*inf)]);
    }
    files.push((name(&setup, "summary"), summary.render(setup.format)?));
    Ok(files)
}

pub fn compare(args: &CompareArgs) -> Result<Files, CliError> {
    let setup = Setup::from_args(&args.common)?;
    reject_tau(&setup, "compare")?;
    if let Some(i) = args.infidelity.iter().find(|i| !(**i > 0.0 && **i < 1.0)) {
        return Err(input(format!("--infidelity values must lie in (0, 1), got {i}")));
    }
    if !(args.tau_max > TauScan::default().tau_min) || !args.tau_max.is_finite() {
        return Err(input(format!("--tau-max must exceed {}, got {}", TauScan::default().tau_min, args.tau_max)));
    }
    let scan = TauScan { tau_max: args.tau_max, ..Default::default() };

    struct Prepared {
        preset: qab_core::models::ModelPreset,
        candidate: qab_core::schedule::Schedule,
        baseline: qab_core::schedule::Schedule,
    }
    let prepared: Vec<(f64, Prepared)> = setup
        .gammas
        .par_iter()
        .map(|&g| {
            let preset = setup.preset(g)?;
            let candidate = setup.schedule(&preset, args.candidate)?;
            let baseline = setup.schedule(&preset, args.baseline)?;
            Ok((g, Prepared { preset, candidate, baseline }))
        })
        .collect::<Result<_, CliError>>()?;

    let cells: Vec<(usize, f64)> =
        (0..prepared.len()).flat_map(|k| args.infidelity.iter().map(move |&i| (k, i))).collect();
    let results: Vec<(Option<f64>, Option<f64>)> = cells
        .par_iter()
        .map(|&(k, inf)| {
            let (g, p) = &prepared[k];
            let reach = |sch: &qab_core::schedule::Schedule| -> Result<Option<f64>, CliError> {
                let target = setup.target(&p.preset, *g, sch)?;
                let at = |tau: f64| target.at(tau);
                match time_to_infidelity(&p.preset.model, sch, &p.preset.initial_state, &at, inf, &scan) {
                    Ok(t) => Ok(Some(t)),
                    Err(Error::Unreachable { .. }) => Ok(None),
                    Err(e) => Err(e.into()),
                }
            };
            Ok((reach(&p.candidate)?, reach(&p.baseline)?))
        })
        .collect::<Result<_, CliError>>()?;

    let mut table = Table::new(["gamma", "infidelity", "tau_candidate", "tau_baseline", "gain"]);
    let unreachable = || Cell::Text("unreachable".into());
    for (&(k, inf), (ta, tb)) in cells.iter().zip(&results) {
        let cell = |t: &Option<f64>| t.map_or_else(unreachable, Cell::Num);
        let gain = match (ta, tb) {
            (Some(a), Some(b)) if *a > 0.0 => Cell::Num(b / a - 1.0),
            (Some(_), Some(_)) => Cell::Num(0.0),
            _ => unreachable(),
        };
        table.push(vec![Cell::Num(prepared[k].0), Cell::Num(inf), cell(ta), cell(tb), gain]);
    }
    Ok(vec![(name(&setup, "compare"), table.render(setup.format)?)])
}

pub fn sweep(args: &SweepArgs) -> Result<Files, CliError> {
    let setup = Setup::from_args(&args.common)?;
    let gamma = setup.single_gamma()?;
    if args.schedules.is_empty() {
        return Err(input("--schedules must name at least one schedule"));
    }
    let taus = setup.taus_or(&[1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]);
    let preset = setup.preset(gamma)?;
    let schedules = args
        .schedules
        .iter()
        .map(|&k| {
            let sch = setup.schedule(&preset, k)?;
            let target = setup.target(&preset, gamma, &sch)?;
            Ok((k, sch, target))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let cells: Vec<(f64, usize)> = taus.iter().flat_map(|&t| (0..schedules.len()).map(move |k| (t, k))).collect();
    let metrics: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|&(tau, k)| {
            let (_, sch, target) = &schedules[k];
            let rho = final_state(&preset.model, sch, tau, &preset.initial_state)?;
            let goal = target.at(tau)?;
            Ok((trace_distance(&goal, &rho)?, infidelity(&goal, &rho)?))
        })
        .collect::<Result<_, Error>>()?;

    let mut table = Table::new(["tau", "schedule", "trace_distance", "infidelity"]);
    for (&(tau, k), &(d, inf)) in cells.iter().zip(&metrics) {
        table.push(vec![Cell::Num(tau), Cell::Text(schedules[k].0.name().into()), Cell::Num(d), Cell::Num(inf)]);
    }
    Ok(vec![(name(&setup, "sweep"), table.render(setup.format)?)])
}

/// Output directory of a subcommand, for writing after success.
pub fn out_dir(common: &Common) -> &std::path::Path {
    &common.out
}
