use clap::{Parser, Subcommand};
use kuramoto_sdre::cli::{cmd_care_solve, cmd_list, cmd_run, cmd_steady_state, CliError, RunOptions};
use std::collections::VecDeque;
use std::path::PathBuf;
use std::sync::Mutex;

#[derive(Parser)]
#[command(
    name = "kuramoto-sdre",
    version,
    about = "SDRE phase-locking control for Kuramoto oscillator networks",
    long_about = "Runs closed-loop SDRE control scenarios on Kuramoto oscillator networks, \
                  writing CSV trajectories, JSON summaries and SVG plots. Scenario references \
                  are bundled names (see `list`) or paths to scenario JSON files."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenarios and write their output bundles.
    Run {
        /// Bundled scenario names or scenario file paths. With more than
        /// one, each writes into OUT_DIR/<name> and runs in parallel
        /// (capped by KURAMOTO_SDRE_THREADS).
        #[arg(required = true)]
        scenarios: Vec<String>,
        /// Output directory.
        #[arg(long = "out", value_name = "DIR")]
        out_dir: PathBuf,
        /// Replace the scenario's recorded seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override a resolved scenario field, e.g. --set dt=0.005.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        /// Compute and report the Kalman controllability rank along the run.
        #[arg(long)]
        check_controllability: bool,
    },
    /// Print the steady-state control vector implied by the bias
    /// compensation at zero error.
    SteadyState {
        scenario: String,
    },
    /// Solve one Riccati problem from a JSON file with "a", "b", "q", "r".
    CareSolve {
        file: PathBuf,
    },
    /// List the bundled scenario names.
    List,
}

fn thread_cap() -> usize {
    std::env::var("KURAMOTO_SDRE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run_many(
    refs: &[String],
    out_dir: &std::path::Path,
    seed: Option<u64>,
    sets: &[String],
    check_controllability: bool,
) -> Result<(), CliError> {
    let make_opts = || RunOptions {
        seed,
        sets: sets.to_vec(),
        check_controllability,
    };
    if refs.len() == 1 {
        cmd_run(&refs[0], out_dir, &make_opts())?;
        return Ok(());
    }

    // Fan independent scenarios out over a small worker pool; each run owns
    // a distinct subdirectory so there is no shared output state.
    let queue: Mutex<VecDeque<String>> = Mutex::new(refs.iter().cloned().collect());
    let failures: Mutex<Vec<CliError>> = Mutex::new(Vec::new());
    let workers = thread_cap().min(refs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let next = queue.lock().unwrap().pop_front();
                let Some(scenario_ref) = next else { break };
                let sub = sub_dir_name(&scenario_ref);
                let dir = out_dir.join(sub);
                if let Err(e) = cmd_run(&scenario_ref, &dir, &make_opts()) {
                    failures.lock().unwrap().push(e);
                }
            });
        }
    });
    let mut failures = failures.into_inner().unwrap();
    match failures.pop() {
        None => Ok(()),
        Some(first) => {
            for f in failures {
                eprintln!("error: {f}");
            }
            Err(first)
        }
    }
}

fn sub_dir_name(scenario_ref: &str) -> String {
    std::path::Path::new(scenario_ref)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| scenario_ref.to_string())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenarios, out_dir, seed, sets, check_controllability } => {
            run_many(scenarios, out_dir, *seed, sets, *check_controllability)
        }
        Command::SteadyState { scenario } => cmd_steady_state(scenario).map(|_| ()),
        Command::CareSolve { file } => cmd_care_solve(file).map(|_| ()),
        Command::List => {
            cmd_list();
            Ok(())
        }
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code);
    }
}
