//! Command implementations behind the binary: scenario resolution,
//! overrides, run orchestration and artifact emission.
//!
//! Exit-code contract: `2` for configuration problems (unknown scenario,
//! unparsable file, bad `--set` key), `3` for unwritable output, `4` when
//! the Riccati solver reports an unstabilizable pair, `0` otherwise. A run
//! that hits the controller fallback still completes with exit 0; the
//! condition is recorded in `summary.json` under `any_fallback`.

use crate::linalg::Matrix;
use crate::output::{component_series, write_series_svg, write_trajectory_csv};
use crate::riccati::{solve_care, CareProblem, RiccatiError};
use crate::scenarios::{builtin, builtin_scenarios, Scenario, ScenarioInstance};
use crate::sim::{run_with_controller, steady_state_u, RunSummary, TrajectoryRecord};
use crate::controller::SdreController;
use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { exit_code: 2, message: message.into() }
    }
    pub fn output(message: impl Into<String>) -> Self {
        CliError { exit_code: 3, message: message.into() }
    }
    pub fn not_stabilizable(message: impl Into<String>) -> Self {
        CliError { exit_code: 4, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

/// Paths produced by a successful run.
#[derive(Debug, Clone)]
pub struct OutputBundle {
    pub trajectory_csv: PathBuf,
    pub summary_json: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Resolve a scenario reference: a bundled scenario name first, otherwise a
/// path to a scenario JSON file.
pub fn resolve_scenario(scenario_ref: &str) -> Result<Scenario, CliError> {
    if let Some(s) = builtin(scenario_ref) {
        return Ok(s);
    }
    let path = Path::new(scenario_ref);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {scenario_ref}: {e}")))?;
        return Scenario::from_json(&text)
            .map_err(|e| CliError::config(format!("{scenario_ref}: {e}")));
    }
    Err(CliError::config(format!(
        "unknown scenario '{scenario_ref}' (not a bundled name or readable file); try `list`"
    )))
}

/// Apply `key=value` overrides to a resolved scenario (before any seeding).
pub fn apply_overrides(mut scenario: Scenario, sets: &[String]) -> Result<Scenario, CliError> {
    for kv in sets {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--set expects key=value, got '{kv}'")))?;
        let parse_f64 = || {
            value
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("--set {key}: '{value}' is not a number")))
        };
        let parse_usize = || {
            value
                .parse::<usize>()
                .map_err(|_| CliError::config(format!("--set {key}: '{value}' is not an integer")))
        };
        match key {
            "t_final" => scenario.sim.t_final = parse_f64()?,
            "dt" => scenario.sim.dt = parse_f64()?,
            "record_every" => scenario.sim.record_every = parse_usize()?,
            "control_update_every" => scenario.sim.control_update_every = parse_usize()?,
            "q_scale" => scenario.q_scale = parse_f64()?,
            "r_scale" => scenario.r_scale = parse_f64()?,
            "coupling" => scenario.params.coupling = parse_f64()?,
            "seed" => {
                scenario.seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|_| CliError::config(format!("--set seed: bad value '{value}'")))?,
                )
            }
            other => {
                return Err(CliError::config(format!(
                    "--set: unknown key '{other}' (known: t_final, dt, record_every, \
                     control_update_every, q_scale, r_scale, coupling, seed)"
                )))
            }
        }
    }
    scenario.validate().map_err(|e| CliError::config(e.to_string()))?;
    Ok(scenario)
}

pub struct RunOptions {
    pub seed: Option<u64>,
    pub sets: Vec<String>,
    pub check_controllability: bool,
}

/// Run one scenario and write `trajectory.csv`, `summary.json` and the three
/// time-series plots into `out_dir`.
pub fn cmd_run(scenario_ref: &str, out_dir: &Path, opts: &RunOptions) -> Result<OutputBundle, CliError> {
    let scenario = apply_overrides(resolve_scenario(scenario_ref)?, &opts.sets)?;
    let instance = scenario
        .instantiate(opts.seed)
        .map_err(|e| CliError::config(e.to_string()))?;

    let started = Instant::now();
    let mut controller = SdreController::new(
        instance.params.clone(),
        instance.cfg.clone(),
        instance.weights.clone(),
    );
    controller.check_controllability = opts.check_controllability;
    let (records, summary) = run_with_controller(&controller, &instance.theta0, &instance.sim);
    let wall_time_s = started.elapsed().as_secs_f64();

    if opts.check_controllability {
        report_controllability(&controller, &records);
    }

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::output(format!("cannot create {}: {e}", out_dir.display())))?;
    let bundle = write_outputs(out_dir, &scenario, &instance, &records, &summary, wall_time_s)?;
    println!(
        "{}: {} steps, final |e|_inf = {:.3e}, peak |u|_inf = {:.3}{}",
        instance.name,
        summary.steps,
        summary.final_e_inf_norm,
        summary.peak_u_inf_norm,
        if summary.any_fallback { " [fallback used]" } else { "" },
    );
    Ok(bundle)
}

/// Re-evaluate the Kalman rank along the recorded trajectory and print a
/// one-line digest. Decisions inside the run already carried the rank; this
/// recomputes from records to keep the run loop allocation-free.
fn report_controllability(controller: &SdreController, records: &[TrajectoryRecord]) {
    use crate::kuramoto::{control_matrix_b, jacobian_a, ErrorState};
    use crate::riccati::controllability_rank;
    let full = controller.params().n() - 1;
    let mut full_count = 0usize;
    let mut min_rank = full;
    for r in records {
        let e = ErrorState::new(r.e.clone());
        let a = jacobian_a(controller.params(), controller.cfg(), &e);
        let b = control_matrix_b(controller.params(), controller.cfg(), &e);
        match controllability_rank(&a, &b) {
            Ok(rank) => {
                if rank == full {
                    full_count += 1;
                }
                min_rank = min_rank.min(rank);
            }
            Err(_) => min_rank = 0,
        }
    }
    println!(
        "controllability: full rank ({full}) in {full_count}/{} recorded states, min rank {min_rank}",
        records.len()
    );
}

fn write_outputs(
    out_dir: &Path,
    scenario: &Scenario,
    instance: &ScenarioInstance,
    records: &[TrajectoryRecord],
    summary: &RunSummary,
    wall_time_s: f64,
) -> Result<OutputBundle, CliError> {
    let n = instance.params.n();
    fn werr(what: &'static str) -> impl Fn(std::io::Error) -> CliError {
        move |e| CliError::output(format!("{what}: {e}"))
    }

    let csv_path = out_dir.join("trajectory.csv");
    write_trajectory_csv(&csv_path, n, records).map_err(werr("trajectory.csv"))?;

    let u_ss = steady_state_u(&instance.params, &instance.cfg);
    let summary_json = serde_json::json!({
        "version": 1,
        "scenario": scenario,
        "seed": instance.seed,
        "instance": {
            "omega": instance.params.omega().as_slice(),
            "x_des": instance.cfg.x_des().as_slice(),
            "theta0": instance.theta0.theta().as_slice(),
        },
        "final_e_inf_norm": summary.final_e_inf_norm,
        "final_u": summary.final_u,
        "u_ss_oracle": u_ss.as_slice(),
        "peak_u_inf_norm": summary.peak_u_inf_norm,
        "steps": summary.steps,
        "any_fallback": summary.any_fallback,
        "any_negative_u": summary.any_negative_u,
        "wall_time_s": wall_time_s,
    });
    let summary_path = out_dir.join("summary.json");
    std::fs::write(&summary_path, format!("{:#}\n", summary_json)).map_err(werr("summary.json"))?;

    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let plots = [
        ("phase_differences.svg", "Phase differences X_i(t)", component_series(records, "x", n - 1, |r, i| r.x.get(i))),
        ("errors.svg", "Error dynamics e_i(t)", component_series(records, "e", n - 1, |r, i| r.e.get(i))),
        ("controls.svg", "Control inputs u_i(t)", component_series(records, "u", n, |r, i| r.u.get(i))),
    ];
    let mut plot_paths = Vec::new();
    for (file, title, series) in plots {
        let path = out_dir.join(file);
        write_series_svg(&path, title, &t, &series).map_err(werr(file))?;
        plot_paths.push(path);
    }

    Ok(OutputBundle { trajectory_csv: csv_path, summary_json: summary_path, plots: plot_paths })
}

/// Print the steady-state control oracle for a scenario.
pub fn cmd_steady_state(scenario_ref: &str) -> Result<Vec<f64>, CliError> {
    let scenario = resolve_scenario(scenario_ref)?;
    let instance = scenario.instantiate(None).map_err(|e| CliError::config(e.to_string()))?;
    let u_ss = steady_state_u(&instance.params, &instance.cfg);
    let rendered: Vec<String> = u_ss.as_slice().iter().map(|v| format!("{v}")).collect();
    println!("u_ss({}) = [{}]", instance.name, rendered.join(", "));
    Ok(u_ss.to_vec())
}

#[derive(Deserialize)]
struct CareFile {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<Matrix, CliError> {
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len() || r.is_empty()) {
        return Err(CliError::config(format!("{what}: rows must be non-empty and rectangular")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CliError::config(format!("{what}: entries must be finite")));
    }
    Ok(Matrix::from_rows(rows))
}

/// Solve one Riccati problem from a JSON file holding `a`, `b`, `q`, `r` as
/// arrays of rows; print P (row by row) and the residual.
pub fn cmd_care_solve(path: &Path) -> Result<Matrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let file: CareFile =
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("parse error: {e}")))?;
    let prob = CareProblem::new(
        matrix_from_rows(&file.a, "a")?,
        matrix_from_rows(&file.b, "b")?,
        matrix_from_rows(&file.q, "q")?,
        matrix_from_rows(&file.r, "r")?,
    )
    .map_err(|e| match e {
        RiccatiError::BadWeights => CliError::config(e.to_string()),
        RiccatiError::NotStabilizable => CliError::not_stabilizable(e.to_string()),
    })?;
    let sol = solve_care(&prob).map_err(|e| match e {
        RiccatiError::BadWeights => CliError::config(e.to_string()),
        RiccatiError::NotStabilizable => CliError::not_stabilizable(e.to_string()),
    })?;
    for i in 0..sol.p.rows() {
        let row: Vec<String> = sol.p.row(i).iter().map(|v| format!("{v}")).collect();
        println!("P[{i}] = [{}]", row.join(", "));
    }
    println!("residual_norm = {:e}", sol.residual_norm);
    println!("iterations = {}", sol.iterations);
    Ok(sol.p)
}

/// Print the bundled scenario names.
pub fn cmd_list() {
    for s in builtin_scenarios() {
        println!("{}", s.name);
    }
}
