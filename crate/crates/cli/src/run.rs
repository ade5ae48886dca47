//! Scenario execution.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::io;
use std::path::PathBuf;
use std::time::Instant;

use rfwm_core::adiabatic::{convergence_order, lambda0_ladder};
use rfwm_core::classical::integrate_classical_on_grid;
use rfwm_core::ensemble::{
    build_ensemble, conversion_scan, default_constant_denominator, ensemble_observables, uniform_grid, DenominatorMode,
    EnsembleOptions, ScanOptions, DEFAULT_EPS_TAIL,
};
use rfwm_core::fock::{build_sector, fock_observables, phase_gate_at, ObservableRow};
use rfwm_core::meanfield::{conversion_distance, efficiency, integrate_meanfield_on_grid};
use rfwm_core::{manley_rowe, FieldState, PhysicalParams, C64};
use serde_json::json;

use crate::config::{ConfigError, ConfigErrors, RunConfig, Scenario, LONG_RUNNING_MEAN};
use crate::output::{manifest, write_all, Cell, ManifestInfo, Table};

/// Command-line overrides; each takes precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct RunSettings {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub long_running: bool,
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigErrors),
    Solver {
        scenario: Scenario,
        source: rfwm_core::Error,
    },
    Io(io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Solver { .. } | RunError::Io(_) => 2,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error:\n{e}"),
            RunError::Solver { scenario, source } => write!(f, "{scenario} failed: {source}"),
            RunError::Io(e) => write!(f, "cannot write outputs: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

fn config_error(message: impl Into<String>) -> RunError {
    RunError::Config(ConfigErrors(vec![ConfigError {
        line: None,
        message: message.into(),
    }]))
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    workers: usize,
    long_running: bool,
}

impl Ctx<'_> {
    fn real(&self, key: &str, default: f64) -> f64 {
        self.cfg.real(key).unwrap_or(default)
    }

    fn int(&self, key: &str, default: i64) -> i64 {
        self.cfg.int(key).unwrap_or(default)
    }

    fn list(&self, key: &str, default: &[f64]) -> Vec<f64> {
        self.cfg.list(key).unwrap_or(default).to_vec()
    }

    fn grid(&self, max_key: &str, points_key: &str, max: f64, points: i64) -> Vec<f64> {
        uniform_grid(self.real(max_key, max), (self.int(points_key, points) - 1) as usize)
    }

    fn gate(&self, means: &[f64]) -> Result<(), RunError> {
        match means.iter().find(|&&m| m > LONG_RUNNING_MEAN) {
            Some(m) if !self.long_running => Err(config_error(format!(
                "coherent mean {m} exceeds {LONG_RUNNING_MEAN} and is long-running; pass --long-running"
            ))),
            _ => Ok(()),
        }
    }

    fn ensemble_options(&self, mode: DenominatorMode) -> EnsembleOptions {
        EnsembleOptions {
            mode,
            workers: self.workers,
        }
    }
}

type Files = Vec<(String, String)>;

/// Runs one scenario and writes its outputs plus `manifest.json`.
pub fn execute(cfg: &RunConfig, settings: &RunSettings) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let ctx = Ctx {
        cfg,
        workers: settings.workers.unwrap_or(cfg.int("workers").unwrap_or(0) as usize),
        long_running: settings.long_running || cfg.flag("long_running").unwrap_or(false),
    };
    let out_dir = settings
        .out
        .clone()
        .or_else(|| cfg.text("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("rfwm-out"));

    let solver = |source| RunError::Solver {
        scenario: cfg.scenario,
        source,
    };
    let mut files = match cfg.scenario {
        Scenario::Lambda0Check => lambda0_check(&ctx),
        Scenario::Classical => classical(&ctx),
        Scenario::Fock => fock(&ctx),
        Scenario::Coherent => coherent(&ctx),
        Scenario::Scan => scan(&ctx),
        Scenario::Meanfield => meanfield(&ctx),
        Scenario::MfScan => mf_scan(&ctx),
        Scenario::PhaseGate => phase_gate(&ctx),
        Scenario::Compare => compare(&ctx),
    }
    .map_err(|e| match e {
        Fail::Config(e) => e,
        Fail::Solver(e) => solver(e),
    })?;

    let names: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    let canonical = cfg.canonical();
    files.push((
        "manifest.json".into(),
        manifest(&ManifestInfo {
            scenario: cfg.scenario.name(),
            canonical_config: &canonical,
            outputs: &names,
            workers: ctx.workers,
            wall_time_s: started.elapsed().as_secs_f64(),
        }),
    ));
    let written = write_all(&out_dir, &files).map_err(RunError::Io)?;
    Ok(RunReport {
        out_dir,
        files: written,
    })
}

enum Fail {
    Config(RunError),
    Solver(rfwm_core::Error),
}

impl From<rfwm_core::Error> for Fail {
    fn from(e: rfwm_core::Error) -> Self {
        Fail::Solver(e)
    }
}

impl From<RunError> for Fail {
    fn from(e: RunError) -> Self {
        Fail::Config(e)
    }
}

fn csv(name: &str, t: &Table) -> Files {
    vec![(format!("{name}.csv"), t.to_csv())]
}

fn lambda0_check(ctx: &Ctx) -> Result<Files, Fail> {
    let p = PhysicalParams::new(
        ctx.real("kappa", 1.0),
        ctx.real("delta", 1.0),
        ctx.real("gamma1", 0.0),
        ctx.real("gamma2", 0.0),
    )?;
    let fs = FieldState::real(
        ctx.real("omega1", 1.0),
        ctx.real("omega2", 1.0),
        ctx.real("e1", 0.5),
        ctx.real("e2", 0.5),
    );
    let ladder = lambda0_ladder(&fs, &p, &ctx.list("scales", &[0.1, 0.05, 0.025]))?;
    let mut t = Table::new(&["s", "exact", "approx", "rel_err"]);
    for l in &ladder {
        t.push(vec![l.s.into(), l.exact.into(), l.approx.into(), l.rel_err.into()]);
    }
    if ladder.len() >= 2 {
        eprintln!("convergence order {:.4}", convergence_order(&ladder));
    }
    Ok(csv("lambda0_check", &t))
}

fn classical(ctx: &Ctx) -> Result<Files, Fail> {
    let field = |amp: &str, phase: &str, a, ph| C64::from_polar(ctx.real(amp, a), ctx.real(phase, ph));
    let fs0 = FieldState::new(
        field("omega1", "omega1_phase", 1.0, 0.0),
        field("omega2", "omega2_phase", 1.0, 0.0),
        field("e1", "e1_phase", 0.1, FRAC_PI_2),
        field("e2", "e2_phase", 0.1, FRAC_PI_2),
    );
    let grid = ctx.grid("xi_max", "xi_points", 30.0, 601);
    let states = integrate_classical_on_grid(&fs0, &grid, ctx.real("tol", 1e-10))?;
    let mut t = Table::new(&["xi", "I_omega1", "I_omega2", "I_e1", "I_e2", "m1", "m2", "m3", "m4"]);
    for (&xi, f) in grid.iter().zip(&states) {
        let mut row: Vec<Cell> = vec![xi.into()];
        row.extend(f.intensities().map(Cell::from));
        row.extend(manley_rowe(f).as_array().map(Cell::from));
        t.push(row);
    }
    Ok(csv("classical", &t))
}

const OBSERVABLE_HEADER: [&str; 8] = [
    "tau",
    "pump_mean",
    "gen_mean",
    "pump_var",
    "gen_var",
    "q_pump",
    "q_gen",
    "var_diff",
];

fn observable_cells(r: &ObservableRow) -> Vec<Cell> {
    vec![
        r.tau.into(),
        r.pump_mean.into(),
        r.gen_mean.into(),
        r.pump_var.into(),
        r.gen_var.into(),
        r.q_pump.into(),
        r.q_gen.into(),
        r.var_diff.into(),
    ]
}

fn fock(ctx: &Ctx) -> Result<Files, Fail> {
    let n = ctx.int("n", 1);
    let occ = |k: &str, d: i64| ctx.int(k, d) as u32;
    let s = build_sector(occ("n1", n), occ("n2", n), occ("n3", 0), occ("n4", 0));
    let grid = ctx.grid("tau_max", "tau_points", 20.0, 2001);
    let mut t = Table::new(&OBSERVABLE_HEADER);
    for r in fock_observables(&s, &grid)? {
        t.push(observable_cells(&r));
    }
    Ok(csv("fock", &t))
}

fn single_mode(ctx: &Ctx, means: &[f64]) -> Result<DenominatorMode, RunError> {
    match ctx.cfg.text("mode").unwrap_or("resonant") {
        "resonant" => Ok(DenominatorMode::Resonant),
        "constant" => Ok(DenominatorMode::Constant(
            ctx.cfg
                .real("d_ref")
                .unwrap_or_else(|| default_constant_denominator(means)),
        )),
        other => Err(config_error(format!("mode `{other}` is only available for scan"))),
    }
}

fn coherent(ctx: &Ctx) -> Result<Files, Fail> {
    let mean = ctx.real("mean", 10.0);
    let (m1, m2) = (ctx.real("mean1", mean), ctx.real("mean2", mean));
    ctx.gate(&[m1, m2])?;
    let mode = single_mode(ctx, &[m1])?;
    let e = build_ensemble(m1, m2, ctx.real("eps_tail", DEFAULT_EPS_TAIL))?;
    let grid = ctx.grid("tau_max", "tau_points", 60.0, 1201);
    let mut header = OBSERVABLE_HEADER.to_vec();
    header.extend(["weight_mass", "tail_mass"]);
    let mut t = Table::new(&header);
    for r in ensemble_observables(&e, &grid, &ctx.ensemble_options(mode))? {
        let mut row = observable_cells(&r);
        row.extend([e.weight_mass().into(), e.tail_mass().into()]);
        t.push(row);
    }
    Ok(csv("coherent", &t))
}

fn scan(ctx: &Ctx) -> Result<Files, Fail> {
    let means = ctx.list("means", &[10.0, 30.0, 100.0]);
    ctx.gate(&means)?;
    let d_ref = ctx
        .cfg
        .real("d_ref")
        .unwrap_or_else(|| default_constant_denominator(&means));
    let modes = match ctx.cfg.text("mode").unwrap_or("both") {
        "resonant" => vec![DenominatorMode::Resonant],
        "constant" => vec![DenominatorMode::Constant(d_ref)],
        _ => vec![DenominatorMode::Resonant, DenominatorMode::Constant(d_ref)],
    };
    let opts = ScanOptions {
        eps_tail: ctx.real("eps_tail", DEFAULT_EPS_TAIL),
        resolution: ctx.int("resolution", 200) as usize,
        workers: ctx.workers,
    };
    let mut t = Table::new(&["mean", "tau_min", "value", "mode"]);
    for mode in modes {
        for r in conversion_scan(&means, mode, &opts)? {
            t.push(vec![
                r.mean.into(),
                r.tau_min.into(),
                r.value.into(),
                r.mode.label().into(),
            ]);
        }
    }
    Ok(csv("scan", &t))
}

fn meanfield(ctx: &Ctx) -> Result<Files, Fail> {
    let grid = ctx.grid("xi_max", "xi_points", 20.0, 1001);
    let rec = integrate_meanfield_on_grid(ctx.real("b0", 100.0), &grid)?;
    let mut t = Table::new(&["xi", "b"]);
    for (xi, row) in rec.coordinates().iter().zip(rec.rows()) {
        t.push(vec![(*xi).into(), row[0].into()]);
    }
    Ok(csv("meanfield", &t))
}

fn mf_scan(ctx: &Ctx) -> Result<Files, Fail> {
    let b0s = ctx.list("b0_list", &[10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0, 10000.0]);
    let mut t = Table::new(&["b0", "z_conv", "efficiency"]);
    for b0 in b0s {
        t.push(vec![b0.into(), conversion_distance(b0)?.into(), efficiency(b0)?.into()]);
    }
    Ok(csv("mf_scan", &t))
}

fn phase_gate(ctx: &Ctx) -> Result<Files, Fail> {
    let tau = ctx.real("tau", PI);
    let rows: Vec<_> = phase_gate_at(tau)?
        .iter()
        .map(|r| {
            json!({
                "label": r.label,
                "input": r.input,
                "overlap_re": r.overlap.re,
                "overlap_im": r.overlap.im,
            })
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&json!({ "tau": tau, "truth_table": rows })).expect("table serializes");
    text.push('\n');
    Ok(vec![("phase_gate.json".into(), text)])
}

fn compare(ctx: &Ctx) -> Result<Files, Fail> {
    let mean = ctx.real("mean", 100.0);
    ctx.gate(&[mean])?;
    let grid = ctx.grid("tau_max", "tau_points", 16.0, 401);
    let e = build_ensemble(mean, mean, ctx.real("eps_tail", DEFAULT_EPS_TAIL))?;
    let quantum = ensemble_observables(&e, &grid, &ctx.ensemble_options(DenominatorMode::Resonant))?;
    let mf = integrate_meanfield_on_grid(mean, &grid)?;
    let mut t = Table::new(&["tau", "pump_quantum", "pump_meanfield"]);
    for (q, row) in quantum.iter().zip(mf.rows()) {
        t.push(vec![q.tau.into(), q.pump_mean.into(), row[0].into()]);
    }
    Ok(csv("compare", &t))
}
