//! Command-line arguments and their validation into a runnable setup.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use qab_core::adiabatic::StirapAdiabatic;
use qab_core::dynamics::basis_projector;
use qab_core::el_solver::{solve_bvp, BvpOptions, BvpSolution};
use qab_core::lagrangian::LagrangianConfig;
use qab_core::linalg::{CMatrix, RVector};
use qab_core::liouvillian::Form;
use qab_core::model_file::ModelSpec;
use qab_core::models::{deutsch_jozsa, qubit_dephasing, stirap_balanced, transmon_qutrit, ModelPreset, TransmonRates};
use qab_core::schedule::{Parametrization, Schedule};
use qab_core::spectral::GapRule;

use crate::error::{input, CliError};
use crate::table::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetKind {
    /// Driven qubit with dephasing, constraint Ωx + Ωy = Ω0.
    Qubit,
    /// Ladder qutrit with balanced loss and gain, constraint Ωp + Ωs = Ω0.
    Stirap,
    /// Adiabatic Deutsch-Jozsa with local dephasing.
    Dj,
    /// Transmon qutrit, |2⟩ → |0⟩; needs --rates.
    Transmon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleKind {
    /// Brachistochrone from the Euler-Lagrange solver.
    Qab,
    /// p(s) = p0 + (p1 − p0) s.
    Linear,
    /// p(s) = p0 + (p1 − p0) s².
    Quadratic,
    /// p(s) = p0 + (p1 − p0)(1 − cos(πs/2)).
    Cosine,
}

impl ScheduleKind {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Qab => "qab",
            ScheduleKind::Linear => "linear",
            ScheduleKind::Quadratic => "quadratic",
            ScheduleKind::Cosine => "cosine",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Preset model.
    #[arg(long, value_enum, required_unless_present = "model_file", conflicts_with = "model_file")]
    pub model: Option<PresetKind>,
    /// JSON model document.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Drive amplitude Ω0 (ω for dj).
    #[arg(long, default_value_t = 1.0)]
    pub omega0: f64,
    /// Dissipation rate γ or Γ; compare accepts a list.
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    /// Number of qubits for dj.
    #[arg(long, default_value_t = 2)]
    pub qubits: usize,
    /// Oracle truth table for dj as a 0/1 string of length 2^N; defaults to the leading bit.
    #[arg(long)]
    pub dj_table: Option<String>,
    /// Transmon rates Γ01,Γ12,Γ02,γ1,γ2.
    #[arg(long)]
    pub rates: Option<String>,
    /// identity, sum-first:T, sum-second:T or polar:R; needs --from and --to.
    #[arg(long)]
    pub constraint: Option<String>,
    /// Reduced coordinates at s = 0.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub from: Vec<f64>,
    /// Reduced coordinates at s = 1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub to: Vec<f64>,
    /// Initial basis state for model files.
    #[arg(long)]
    pub initial: Option<usize>,
    /// Target basis state for model files (default: last level).
    #[arg(long)]
    pub target: Option<usize>,
    /// Points on the s grid; odd and at least 11.
    #[arg(long, default_value_t = 1001)]
    pub grid: usize,
    /// Total times τ.
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone)]
enum Source {
    Preset(PresetKind),
    File(ModelSpec),
}

/// Validated configuration shared by all subcommands.
#[derive(Debug, Clone)]
pub struct Setup {
    source: Source,
    omega0: f64,
    pub gammas: Vec<f64>,
    qubits: usize,
    table: Vec<bool>,
    rates: Option<TransmonRates>,
    constraint: Option<(Parametrization, RVector, RVector)>,
    initial: Option<usize>,
    target: Option<usize>,
    pub grid: usize,
    pub taus: Vec<f64>,
    pub format: Format,
}

fn parse_constraint(text: &str, arity: Option<usize>) -> Result<Parametrization, CliError> {
    let (kind, value) = match text.split_once(':') {
        Some((k, v)) => {
            let x: f64 = v.parse().map_err(|_| input(format!("bad constraint value in '{text}'")))?;
            if !x.is_finite() {
                return Err(input(format!("constraint value must be finite in '{text}'")));
            }
            (k, Some(x))
        }
        None => (text, None),
    };
    let p = match (kind, value) {
        ("identity", None) => {
            Parametrization::Identity(arity.ok_or_else(|| input("identity constraint needs a model file"))?)
        }
        ("sum-first", Some(t)) => Parametrization::sum_first(t),
        ("sum-second", Some(t)) => Parametrization::sum_second(t),
        ("polar", Some(r)) => Parametrization::Polar { radius: r },
        _ => {
            return Err(input(format!(
                "unknown constraint '{text}'; use identity, sum-first:T, sum-second:T or polar:R"
            )))
        }
    };
    p.validate()?;
    Ok(p)
}

fn parse_rates(text: &str) -> Result<TransmonRates, CliError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| input(format!("--rates must be five numbers Γ01,Γ12,Γ02,γ1,γ2, got '{text}'")))?;
    if v.len() != 5 {
        return Err(input(format!("--rates needs five values, got {}", v.len())));
    }
    let mut relaxation = [[0.0; 3]; 3];
    for (j, k, g) in [(0, 1, v[0]), (1, 2, v[1]), (0, 2, v[2])] {
        relaxation[j][k] = g;
        relaxation[k][j] = g;
    }
    let rates = TransmonRates { relaxation, dephasing: [v[3], v[4]] };
    rates.validate()?;
    Ok(rates)
}

fn parse_table(text: Option<&str>, n: usize) -> Result<Vec<bool>, CliError> {
    if n == 0 || n > 10 {
        return Err(input(format!("--qubits must be between 1 and 10, got {n}")));
    }
    let dim = 1usize << n;
    match text {
        None => Ok((0..dim).map(|j| j >= dim / 2).collect()),
        Some(t) => {
            if t.len() != dim {
                return Err(input(format!("--dj-table needs {dim} entries for {n} qubits, got {}", t.len())));
            }
            t.chars()
                .map(|ch| match ch {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(input(format!("--dj-table may only contain 0 and 1, got '{ch}'"))),
                })
                .collect()
        }
    }
}

impl Setup {
    pub fn from_args(a: &Common) -> Result<Self, CliError> {
        if a.grid < 11 || a.grid.is_multiple_of(2) {
            return Err(input(format!("--grid must be odd and at least 11, got {}", a.grid)));
        }
        if let Some(t) = a.tau.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(input(format!("--tau values must be positive, got {t}")));
        }
        if let Some(g) = a.gamma.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
            return Err(input(format!("--gamma values must be non-negative, got {g}")));
        }
        if !(a.omega0 > 0.0) || !a.omega0.is_finite() {
            return Err(input(format!("--omega0 must be positive, got {}", a.omega0)));
        }
        if a.out.exists() && !a.out.is_dir() {
            return Err(input(format!("--out {} exists and is not a directory", a.out.display())));
        }
        let source = match (&a.model, &a.model_file) {
            (Some(k), None) => Source::Preset(*k),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Read { path: path.display().to_string(), source: e })?;
                Source::File(ModelSpec::from_json(&text)?)
            }
            _ => return Err(input("give exactly one of --model and --model-file")),
        };
        let arity = match &source {
            Source::File(spec) => Some(spec.drive_arity),
            Source::Preset(_) => None,
        };
        let gamma_fixed = matches!(source, Source::File(_) | Source::Preset(PresetKind::Transmon));
        if gamma_fixed && !a.gamma.is_empty() {
            return Err(input("--gamma does not apply to this model; rates come from --rates or the model file"));
        }
        let rates = match (&source, &a.rates) {
            (Source::Preset(PresetKind::Transmon), Some(r)) => Some(parse_rates(r)?),
            (Source::Preset(PresetKind::Transmon), None) => {
                return Err(input("--model transmon needs --rates Γ01,Γ12,Γ02,γ1,γ2"))
            }
            (_, Some(_)) => return Err(input("--rates only applies to --model transmon")),
            (_, None) => None,
        };
        let table = match &source {
            Source::Preset(PresetKind::Dj) => parse_table(a.dj_table.as_deref(), a.qubits)?,
            _ if a.dj_table.is_some() => return Err(input("--dj-table only applies to --model dj")),
            _ => Vec::new(),
        };
        let constraint = match (&a.constraint, &source) {
            (Some(c), _) => Some(parse_constraint(c, arity)?),
            (None, Source::File(spec)) => Some(Parametrization::Identity(spec.drive_arity)),
            (None, Source::Preset(_)) => None,
        };
        let constraint = match constraint {
            Some(p) => {
                let m = p.reduced_dim();
                if a.from.len() != m || a.to.len() != m {
                    return Err(input(format!(
                        "--from and --to need {m} reduced coordinates each, got {} and {}",
                        a.from.len(),
                        a.to.len()
                    )));
                }
                Some((p, RVector::from_vec(a.from.clone()), RVector::from_vec(a.to.clone())))
            }
            None if !a.from.is_empty() || !a.to.is_empty() => {
                return Err(input("--from/--to need --constraint for preset models"))
            }
            None => None,
        };
        let setup = Setup {
            source,
            omega0: a.omega0,
            gammas: if a.gamma.is_empty() { vec![0.0] } else { a.gamma.clone() },
            qubits: a.qubits,
            table,
            rates,
            constraint,
            initial: a.initial,
            target: a.target,
            grid: a.grid,
            taus: a.tau.clone(),
            format: a.format,
        };
        if matches!(setup.source, Source::Preset(_)) && (a.initial.is_some() || a.target.is_some()) {
            return Err(input("--initial/--target only apply to model files"));
        }
        // building every model is cheap and catches the remaining parameter errors
        for &g in &setup.gammas {
            setup.preset(g)?;
        }
        Ok(setup)
    }

    /// Single rate for commands that do not sweep it.
    pub fn single_gamma(&self) -> Result<f64, CliError> {
        match self.gammas.as_slice() {
            [g] => Ok(*g),
            _ => Err(input("this command takes a single --gamma value")),
        }
    }

    pub fn taus_or(&self, default: &[f64]) -> Vec<f64> {
        if self.taus.is_empty() {
            default.to_vec()
        } else {
            self.taus.clone()
        }
    }

    pub fn is_stirap(&self) -> bool {
        matches!(self.source, Source::Preset(PresetKind::Stirap))
    }

    pub fn preset(&self, gamma: f64) -> Result<ModelPreset, CliError> {
        let mut p = match &self.source {
            Source::Preset(PresetKind::Qubit) => qubit_dephasing(self.omega0, gamma)?,
            Source::Preset(PresetKind::Stirap) => stirap_balanced(self.omega0, gamma)?,
            Source::Preset(PresetKind::Dj) => deutsch_jozsa(self.qubits, self.omega0, gamma, &self.table)?,
            Source::Preset(PresetKind::Transmon) => {
                transmon_qutrit(self.omega0, self.rates.as_ref().expect("rates validated"))?
            }
            Source::File(spec) => {
                let model = spec.build()?;
                let dim = model.dim();
                let initial = self.initial.unwrap_or(0);
                let target = self.target.unwrap_or(dim - 1);
                if initial >= dim || target >= dim {
                    return Err(input(format!("--initial/--target must be below the dimension {dim}")));
                }
                ModelPreset {
                    name: "model-file".into(),
                    model,
                    parametrization: Parametrization::Identity(spec.drive_arity),
                    boundary: (RVector::zeros(0), RVector::zeros(0)),
                    gap_rule: GapRule::WidestConjugatePair,
                    form: Form::Auto,
                    capabilities: Default::default(),
                    initial_state: basis_projector(dim, initial),
                    target_state: basis_projector(dim, target),
                }
            }
        };
        if let Some((param, p0, p1)) = &self.constraint {
            if param.full_dim() != p.model.arity() {
                return Err(input(format!(
                    "constraint maps to {} drives but the model has {}",
                    param.full_dim(),
                    p.model.arity()
                )));
            }
            p.parametrization = param.clone();
            p.boundary = (p0.clone(), p1.clone());
        }
        Ok(p)
    }

    pub fn lagrangian_config(&self, preset: &ModelPreset, tau: f64) -> LagrangianConfig {
        LagrangianConfig { tau, form: preset.form, gap: preset.gap_rule.clone(), ..Default::default() }
    }

    pub fn solve(&self, preset: &ModelPreset, tau: f64) -> Result<BvpSolution, CliError> {
        let opts = BvpOptions { grid_points: self.grid, ..Default::default() };
        let (p0, p1) = &preset.boundary;
        Ok(solve_bvp(&preset.model, &self.lagrangian_config(preset, tau), (p0, p1), &preset.parametrization, &opts)?)
    }

    /// Schedule of the given kind; the brachistochrone uses the default `τ = 1` convention.
    pub fn schedule(&self, preset: &ModelPreset, kind: ScheduleKind) -> Result<Schedule, CliError> {
        let (p0, p1) = preset.boundary.clone();
        let param = preset.parametrization.clone();
        let shaped = |f: fn(f64) -> (f64, f64)| {
            let (a, b) = (p0.clone(), p1.clone());
            Schedule::from_fn(param.clone(), move |s| {
                let (g, dg) = f(s);
                (&a + (&b - &a) * g, (&b - &a) * dg)
            })
        };
        Ok(match kind {
            ScheduleKind::Qab => self.solve(preset, 1.0)?.schedule,
            ScheduleKind::Linear => Schedule::linear(param.clone(), p0.clone(), p1.clone())?,
            ScheduleKind::Quadratic => shaped(|s| (s * s, 2.0 * s))?,
            ScheduleKind::Cosine => shaped(|s| {
                let x = std::f64::consts::FRAC_PI_2 * s;
                (1.0 - x.cos(), std::f64::consts::FRAC_PI_2 * x.sin())
            })?,
        })
    }

    /// Reference state for a run: the adiabatic state for dissipative STIRAP,
    /// the preset target otherwise.
    pub fn target(&self, preset: &ModelPreset, gamma: f64, schedule: &Schedule) -> Result<Target, CliError> {
        if self.is_stirap() && self.constraint.is_none() && gamma > 0.0 {
            Ok(Target::Adiabatic {
                ad: StirapAdiabatic::new(gamma, self.omega0)?,
                schedule: schedule.clone(),
                basis: preset.model.basis().clone(),
            })
        } else {
            Ok(Target::Fixed(preset.target_state.clone()))
        }
    }
}

#[derive(Debug, Clone)]
pub enum Target {
    Fixed(CMatrix),
    Adiabatic { ad: StirapAdiabatic, schedule: Schedule, basis: qab_core::basis::OperatorBasis },
}

impl Target {
    pub fn at(&self, tau: f64) -> qab_core::Result<CMatrix> {
        match self {
            Target::Fixed(m) => Ok(m.clone()),
            Target::Adiabatic { ad, schedule, basis } => ad.state(basis, schedule, tau, 1.0),
        }
    }
}
