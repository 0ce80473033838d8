use std::fmt;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use steer_core::config::Config;
use steer_core::ident::{self, DataMode, IdentResult};
use steer_core::io::{self as sio, CsvError};
use steer_core::simulator::{
    attention_grid, compute_metrics, first_curve_window, run, run_many, window_mean_abs_lateral,
    window_peak_abs_lateral, FailureSpec, GridRun,
};
use steer_core::{subjects, ConfigError, IdentError, Reliance, SimError, SimLog};

use crate::{Cli, Command, Preset, RunOverrides};

pub const OUT_ENV: &str = "SHARED_STEER_OUT";

const FIG9_T_FAIL: f64 = 70.0;

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Divergence(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Data(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Config(m) | CliError::Divergence(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(format!("config: {e}"))
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Divergence { .. } | SimError::Road { .. } => CliError::Divergence(e.to_string()),
            SimError::Config(_) | SimError::Param(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<IdentError> for CliError {
    fn from(e: IdentError) -> Self {
        match e {
            IdentError::Config(_) => CliError::Config(e.to_string()),
            IdentError::Sim(sim) => sim.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

fn write_error(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("writing {}: {e}", path.display()))
}

fn csv_write_error(path: &Path, e: CsvError) -> CliError {
    write_error(path, e)
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| write_error(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| write_error(path, e))
}

fn out_dir(cli_dir: &Path) -> Result<PathBuf, CliError> {
    let dir = std::env::var_os(OUT_ENV)
        .filter(|v| !v.is_empty())
        .map_or_else(|| cli_dir.to_path_buf(), PathBuf::from);
    fs::create_dir_all(&dir).map_err(|e| write_error(&dir, e))?;
    Ok(dir)
}

fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("reading {}: {e}", p.display())))?;
            Config::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn apply_overrides(cfg: &mut Config, ov: &RunOverrides) {
    if let Some(level) = ov.reliance {
        cfg.scenario.reliance = Some(level);
    }
    if let Some(d) = ov.driver {
        cfg.scenario.driver = Some(d);
    }
}

/// Run header: the effective configuration, re-parseable as a config file.
fn run_header(cfg: &Config) -> Vec<String> {
    vec![cfg.effective().emit()]
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate { run } => {
            apply_overrides(&mut cfg, &run);
            simulate(&cfg, &out_dir(&cli.out_dir)?)
        }
        Command::Scenario { preset } => scenario(&cfg, preset, &out_dir(&cli.out_dir)?),
        Command::Identify {
            dataset,
            multistart,
            seed,
        } => {
            if let Some(m) = multistart {
                cfg.ident.config.multistart = m;
            }
            if let Some(s) = seed {
                cfg.ident.config.seed = s;
            }
            identify(&cfg, &dataset, &out_dir(&cli.out_dir)?)
        }
        Command::GenData {
            run,
            theta,
            noise_sigma,
            seed,
        } => {
            apply_overrides(&mut cfg, &run);
            if let Some(s) = noise_sigma {
                if !(s.is_finite() && s >= 0.0) {
                    return Err(CliError::Config(format!("--noise-sigma {s} must be >= 0")));
                }
                cfg.ident.noise.sigma_td = s;
            }
            if let Some(s) = seed {
                cfg.ident.noise.seed = s;
            }
            gen_data(&cfg, &theta, &out_dir(&cli.out_dir)?)
        }
    }
}

fn simulate(cfg: &Config, dir: &Path) -> Result<(), CliError> {
    let sc = cfg.scenario()?;
    let log = run(&sc)?;
    let metrics = compute_metrics(&log, None).map_err(|e| CliError::Data(e.to_string()))?;
    let log_path = dir.join("sim_log.csv");
    sio::write_sim_log(create(&log_path)?, &log, &run_header(cfg)).map_err(|e| csv_write_error(&log_path, e))?;
    let text = sio::format_metrics(&metrics);
    write_text(&dir.join("metrics.txt"), &text)?;
    print!("{text}");
    println!("log = {}", log_path.display());
    Ok(())
}

struct GridOutcome {
    run: GridRun,
    log: SimLog,
}

fn scenario(cfg: &Config, preset: Preset, dir: &Path) -> Result<(), CliError> {
    let mut base = cfg.scenario()?;
    base.failure = None;
    base.reliance = None;
    let failure = match preset {
        Preset::Fig8 => None,
        Preset::Fig9 => Some(FailureSpec {
            t_fail: cfg.scenario.t_fail.unwrap_or(FIG9_T_FAIL),
            t_response: cfg.scenario.t_response,
        }),
    };
    let grid = attention_grid(&base, failure);
    for g in &grid {
        g.scenario.validate()?;
    }
    let scenarios: Vec<_> = grid.iter().map(|g| g.scenario.clone()).collect();
    let mut outcomes = Vec::with_capacity(grid.len());
    for (g, log) in grid.into_iter().zip(run_many(&scenarios)) {
        outcomes.push(GridOutcome { run: g, log: log? });
    }

    let name = match preset {
        Preset::Fig8 => "fig8",
        Preset::Fig9 => "fig9",
    };
    let dir = dir.join(name);
    fs::create_dir_all(&dir).map_err(|e| write_error(&dir, e))?;

    let (curve_start, curve_end) = first_curve_window(&base.course, base.vehicle.v)
        .ok_or_else(|| CliError::Config("course has no arc segment".into()))?;

    let mut summary_cols: Vec<Vec<f64>> = vec![Vec::new(); 7];
    for o in &outcomes {
        let path = dir.join(format!("driver{}_{}.csv", o.run.driver, o.run.reliance));
        let header = ["t", "lateral_error", "T_h"].map(String::from);
        let cols = vec![
            o.log.column(|r| r.t),
            o.log.column(|r| r.lateral_error),
            o.log.column(|r| r.t_h),
        ];
        sio::write_columns(create(&path)?, &header, &cols).map_err(|e| csv_write_error(&path, e))?;

        // Manual runs have no failure but are measured over the same window.
        let t_fail = failure.map(|f| f.t_fail);
        let peak = t_fail.map_or(f64::NAN, |t| window_peak_abs_lateral(&o.log, t, curve_end));
        let th_after = match t_fail {
            Some(t) => o
                .log
                .rows
                .iter()
                .filter(|r| r.t >= t)
                .map(|r| r.t_h.abs())
                .fold(0.0, f64::max),
            None => f64::NAN,
        };
        let row = [
            o.run.driver as f64,
            o.run.scenario.driver_guided.t_p,
            reliance_code(o.run.reliance),
            window_mean_abs_lateral(&o.log, curve_start, curve_end),
            o.log.rows.iter().map(|r| r.lateral_error.abs()).fold(0.0, f64::max),
            peak,
            th_after,
        ];
        for (c, v) in summary_cols.iter_mut().zip(row) {
            c.push(v);
        }
    }
    let summary_header = [
        "driver",
        "t_p",
        "reliance_level",
        "curve_mean_abs_lateral",
        "max_abs_lateral",
        "post_failure_peak",
        "max_abs_T_h_after_failure",
    ]
    .map(String::from);
    if failure.is_none() {
        summary_cols.truncate(5);
    }
    let summary_path = dir.join("summary.csv");
    sio::write_columns(
        create(&summary_path)?,
        &summary_header[..summary_cols.len()],
        &summary_cols,
    )
    .map_err(|e| csv_write_error(&summary_path, e))?;

    let ordering = ordering_table(&outcomes, failure, curve_start, curve_end);
    write_text(&dir.join("ordering.txt"), &ordering)?;
    print!("{ordering}");
    println!("runs = {}", outcomes.len());
    Ok(())
}

/// Reliance levels numbered 0 (manual) to 3 (high) for the numeric summary.
fn reliance_code(level: Reliance) -> f64 {
    Reliance::ORDERED.iter().position(|l| *l == level).unwrap_or(0) as f64
}

fn ordering_table(outcomes: &[GridOutcome], failure: Option<FailureSpec>, curve_start: f64, curve_end: f64) -> String {
    let mut out = String::new();
    let drivers: Vec<usize> = {
        let mut d: Vec<usize> = outcomes.iter().map(|o| o.run.driver).collect();
        d.dedup();
        d
    };
    let value = |o: &GridOutcome| match failure {
        None => window_mean_abs_lateral(&o.log, curve_start, curve_end),
        Some(f) => window_peak_abs_lateral(&o.log, f.t_fail, curve_end),
    };
    match failure {
        None => out.push_str("# mean |lateral error| (m) over the first curve\n"),
        Some(_) => out.push_str("# peak |lateral error| (m) from the failure to the end of the first curve\n"),
    }
    out.push_str("driver t_p manual low mid high ordering\n");
    for d in drivers {
        let runs: Vec<&GridOutcome> = outcomes.iter().filter(|o| o.run.driver == d).collect();
        let get = |level: Reliance| runs.iter().find(|o| o.run.reliance == level).map(|o| value(o));
        let cells: Vec<Option<f64>> = Reliance::ORDERED.iter().map(|l| get(*l)).collect();
        let fmt_cell = |c: Option<f64>| {
            c.filter(|v| v.is_finite())
                .map_or("-".to_string(), |v| format!("{v:.4}"))
        };
        let ordering = match failure {
            None => {
                let v: Vec<f64> = cells.iter().map(|c| c.unwrap_or(f64::NAN)).collect();
                let ok = v.windows(2).all(|w| w[1] <= w[0]);
                if ok {
                    "monotone"
                } else {
                    "violated"
                }
            }
            Some(_) => {
                let (low, mid, high) = (cells[1], cells[2], cells[3]);
                let ok = matches!((low, mid, high), (Some(l), Some(m), Some(h)) if h > m && m > l);
                if ok {
                    "high>mid>low"
                } else {
                    "violated"
                }
            }
        };
        let t_p = runs[0].run.scenario.driver_guided.t_p;
        out.push_str(&format!(
            "{d} {t_p} {} {} {} {} {ordering}\n",
            fmt_cell(cells[0]),
            fmt_cell(cells[1]),
            fmt_cell(cells[2]),
            fmt_cell(cells[3])
        ));
    }
    out
}

fn identify(cfg: &Config, dataset: &Path, dir: &Path) -> Result<(), CliError> {
    let icfg = cfg.ident_config()?;
    let text =
        fs::read_to_string(dataset).map_err(|e| CliError::Data(format!("reading {}: {e}", dataset.display())))?;
    let data = sio::read_dataset(&text).map_err(|e| CliError::Data(format!("{}: {e}", dataset.display())))?;
    let res: IdentResult = ident::identify(&data, &icfg)?;
    let report = format!("mode = {}\n{}", data.mode.as_str(), sio::format_ident_result(&res));
    write_text(&dir.join("ident_result.txt"), &report)?;
    let res_path = dir.join("ident_residuals.csv");
    sio::write_residuals(create(&res_path)?, &res, data.sample_rate).map_err(|e| csv_write_error(&res_path, e))?;
    print!("{report}");
    if !res.converged {
        eprintln!("warning: identification stopped before meeting the convergence threshold");
    }
    Ok(())
}

/// Parses `preset`, `table5:<row>` or `table6:<row>`.
fn resolve_theta(cfg: &Config, source: &str) -> Result<(steer_core::DriverParams, Option<DataMode>), CliError> {
    let base = cfg.effective().driver;
    if source == "preset" {
        return Ok((base, None));
    }
    let bad = || {
        CliError::Config(format!(
            "--theta `{source}`: expected preset, table5:<1-14> or table6:<1-14>"
        ))
    };
    let (table, row) = source.split_once(':').ok_or_else(bad)?;
    let row: usize = row.trim().parse().map_err(|_| bad())?;
    let theta = match table {
        "table5" => subjects::manual_subject(row, &base).map(|t| (t, Some(DataMode::Manual))),
        "table6" => subjects::haptic_subject(row, &base).map(|t| (t, Some(DataMode::Haptic))),
        _ => return Err(bad()),
    };
    theta.ok_or_else(|| CliError::Config(format!("--theta `{source}`: row must be 1-14")))
}

fn gen_data(cfg: &Config, theta_source: &str, dir: &Path) -> Result<(), CliError> {
    let (theta, forced_mode) = resolve_theta(cfg, theta_source)?;
    theta.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let sc = cfg.scenario()?;
    let mode = forced_mode.unwrap_or(if sc.guidance.enabled {
        DataMode::Haptic
    } else {
        DataMode::Manual
    });
    let data = ident::generate_dataset(&theta, &sc, mode, cfg.ident.observation, &cfg.ident.noise)?;
    let comments = vec![
        format!("theta_source = {theta_source}"),
        sio::theta_comment(&theta),
        format!("noise_td = {}", cfg.ident.noise.sigma_td),
        format!("noise_phi = {}", cfg.ident.noise.sigma_angle),
        format!("noise_seed = {}", cfg.ident.noise.seed),
    ];
    let path = dir.join("dataset.csv");
    sio::write_dataset(create(&path)?, &data, &comments).map_err(|e| csv_write_error(&path, e))?;
    println!("samples = {}", data.len());
    println!("mode = {}", mode.as_str());
    println!("dataset = {}", path.display());
    Ok(())
}
