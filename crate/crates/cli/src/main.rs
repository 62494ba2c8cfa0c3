//! `busmesh`: verification campaigns, scaling sweeps and demos for the
//! segmented-bus simulator.
//!
//! Exit status: 0 on success, 1 when the kernel disagrees with the oracle or
//! its round count varies between scenarios, 2 on a configuration error.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use busmesh::harness::{
    bound_table, demo_on, generate_scenario, load_scenario, run_campaign, run_scale, save_scenario, write_csv,
    AxisMode, ExperimentSpec, HarnessError, LevelPolicy, ResultRow,
};
use busmesh::kernel::Fault;
use busmesh::mmpb::BusModel;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "busmesh", version, about = "Segmented-bus mesh simulator harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the kernel with the oracle port by port on random broadcasts.
    Verify(Common),
    /// Record round counts over a sweep of sides.
    Scale(Common),
    /// Measured rounds against the bound for every L up to log2 n.
    BoundTable(Common),
    /// Show one broadcast on a small array.
    Demo {
        #[command(flatten)]
        common: Common,
        /// Run on this scenario file instead of a random one.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Write the scenario shown to this file.
        #[arg(long)]
        save_scenario: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Word,
    Bit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Row,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum InjectedFault {
    SkipDistribute,
}

#[derive(Args)]
struct Common {
    /// Array sides, comma separated.
    #[arg(long = "n", value_delimiter = ',', default_value = "16")]
    ns: Vec<usize>,
    /// Number of bus levels.
    #[arg(long = "L", conflicts_with = "policy")]
    levels: Option<usize>,
    /// Choose L from n.
    #[arg(long = "L-policy", value_enum)]
    policy: Option<Policy>,
    /// Segment lengths, longest first, separated by ':' or ','.
    #[arg(long, value_parser = parse_lengths)]
    lengths: Option<Lengths>,
    #[arg(long, value_enum, default_value = "word")]
    model: Model,
    /// Defaults to full for verify and demo, row otherwise.
    #[arg(long, value_enum)]
    axis: Option<Axis>,
    /// Scenarios per side; defaults to 100 for verify and 1 otherwise.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability that a switch is closed; cycles through a fixed mix when absent.
    #[arg(long)]
    p_closed: Option<f64>,
    /// Probability that a port writes.
    #[arg(long)]
    p_write: Option<f64>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<InjectedFault>,
}

#[derive(Clone)]
struct Lengths(Vec<usize>);

fn parse_lengths(s: &str) -> Result<Lengths, String> {
    s.split([':', ','])
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad length {t:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Lengths)
}

impl Common {
    fn spec(&self, default_axis: AxisMode, default_trials: usize) -> Result<ExperimentSpec, HarnessError> {
        let lengths = self.lengths.as_ref().map(|l| l.0.clone());
        let levels = match (self.policy, self.levels, &lengths) {
            (Some(Policy::Log), _, _) => LevelPolicy::Log,
            (None, Some(l), Some(lengths)) if l != lengths.len() => {
                return Err(HarnessError::Config(format!(
                    "--L {l} disagrees with {} lengths given",
                    lengths.len()
                )))
            }
            (None, Some(l), _) => LevelPolicy::Fixed(l),
            (None, None, Some(lengths)) => LevelPolicy::Fixed(lengths.len()),
            (None, None, None) => LevelPolicy::Fixed(1),
        };
        let spec = ExperimentSpec {
            ns: self.ns.clone(),
            levels,
            lengths,
            model: match self.model {
                Model::Word => BusModel::Word,
                Model::Bit => BusModel::Bit,
            },
            axis: match self.axis {
                Some(Axis::Row) => AxisMode::Row,
                Some(Axis::Full) => AxisMode::Full,
                None => default_axis,
            },
            trials: self.trials.unwrap_or(default_trials),
            seed: self.seed,
            p_closed: self.p_closed,
            p_write: self.p_write,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn fault(&self) -> Option<Fault> {
        self.inject_fault
            .map(|InjectedFault::SkipDistribute| Fault::SkipDistribute)
    }

    fn emit(&self, rows: &[ResultRow]) -> Result<(), HarnessError> {
        match &self.out {
            Some(path) => write_csv(rows, File::create(path)?),
            None => write_csv(rows, io::stdout().lock()),
        }
    }
}

/// Whether every port matched the oracle.
#[derive(PartialEq)]
enum Outcome {
    Pass,
    Mismatch,
}

fn outcome(rows: &[ResultRow]) -> Outcome {
    if rows.iter().all(|r| r.mismatches == 0) {
        Outcome::Pass
    } else {
        Outcome::Mismatch
    }
}

fn run(cli: Cli) -> Result<Outcome, HarnessError> {
    match cli.command {
        Command::Verify(c) => {
            let spec = c.spec(AxisMode::Full, 100)?;
            let rows = run_campaign(&spec, c.fault())?;
            c.emit(&rows)?;
            let bad: usize = rows.iter().map(|r| r.mismatches).sum();
            eprintln!(
                "verify: {} side(s), {} trial(s) each, {bad} port mismatch(es)",
                rows.len(),
                spec.trials
            );
            Ok(outcome(&rows))
        }
        Command::Scale(c) => {
            let spec = c.spec(AxisMode::Row, 1)?;
            let rows = match c.fault() {
                Some(f) => run_campaign(&spec, Some(f))?,
                None => run_scale(&spec)?,
            };
            c.emit(&rows)?;
            Ok(outcome(&rows))
        }
        Command::BoundTable(c) => {
            let spec = c.spec(AxisMode::Row, 1)?;
            let rows = bound_table(&spec.ns, spec.model)?;
            c.emit(&rows)?;
            Ok(outcome(&rows))
        }
        Command::Demo {
            common: c,
            scenario,
            save_scenario: save,
        } => {
            let spec = c.spec(AxisMode::Full, 1)?;
            let s = match &scenario {
                Some(path) => load_scenario(path)?,
                None => generate_scenario(
                    spec.ns[0],
                    spec.seed,
                    spec.p_closed.unwrap_or(0.8),
                    spec.p_write.unwrap_or(0.2),
                )?,
            };
            if let Some(out) = &save {
                save_scenario(out, &s)?;
            }
            let text = demo_on(&spec, &s)?;
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Mismatch) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
