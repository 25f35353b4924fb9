//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 verification failure, 3 I/O.

mod angles;
mod output;
mod verify;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use angles::{parse_angle, parse_angle_list};
pub use output::{fmt_sig9, Cell, Format, Table, CHSH_COLUMNS, CORRELATION_COLUMNS};
pub use verify::{run_checks, CheckResult, VerifyOptions};

use crate::analysis::{
    chsh, estimate_correlation, sweep_chsh, ChshMode, ChshResult, CorrelationRecord, MonteCarlo,
    DEFAULT_BLOCK_SIZE,
};
use crate::detectors::{measure_sequence, DetectorModel};
use crate::distributions::{Ensemble, PairSource};
use crate::geometry::{Axis, Sign};
use crate::oracles::sequence_tree_step_means;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bellsphere", version, about = "Bell-type correlations of classical angular-momentum pairs")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Base seed of every random stream.
    #[arg(long, global = true, env = "BELLSPHERE_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Worker threads (0 = all cores). Does not affect results.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    /// Trials per random stream block.
    #[arg(long, global = true, default_value_t = DEFAULT_BLOCK_SIZE as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub block_size: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file; standard output when omitted.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

impl CommonArgs {
    pub fn monte_carlo(&self) -> MonteCarlo {
        MonteCarlo::new(self.seed)
            .with_workers(self.workers)
            .with_block_size(self.block_size as usize)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// direct, sign, stochastic or ensemble.
    #[arg(long)]
    pub model: DetectorModel,

    /// Weight of the sign-agreeing outcome for the stochastic model.
    #[arg(long)]
    pub p_hi: Option<f64>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<DetectorModel, String> {
        match (self.model, self.p_hi) {
            (DetectorModel::StochasticSign { .. }, Some(p)) => {
                DetectorModel::stochastic_sign(p).map_err(|e| e.to_string())
            }
            (_, Some(_)) => Err("--p-hi only applies to the stochastic model".into()),
            (m, None) => Ok(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Closed,
    #[value(alias = "mc")]
    Montecarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Static,
    Rotating,
}

impl From<SourceArg> for PairSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Static => PairSource::StaticSphere,
            SourceArg::Rotating => PairSource::RotatingHemispheres,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate E(a, b) for one pair of axes.
    Correlate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        theta_a: f64,
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        theta_b: f64,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, value_enum, default_value_t = SourceArg::Static)]
        source: SourceArg,
    },
    /// Evaluate the CHSH combination at one quadruple a,b,a',b'.
    Chsh {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_quadruple, allow_hyphen_values = true)]
        angles: Quadruple,
        #[arg(long, value_enum, default_value_t = ModeArg::Closed)]
        mode: ModeArg,
        /// Trials per correlation in Monte Carlo mode.
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
    },
    /// Scan every quadruple on a grid of [0, 2π).
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Grid step; must divide π.
        #[arg(long, value_parser = parse_angle)]
        step: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Closed)]
        mode: ModeArg,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
    },
    /// Sequential ensemble-dependent measurements on one particle.
    Sequential {
        /// `sphere` or `hemisphere:<angle>:<+|->`.
        #[arg(long, value_parser = parse_ensemble, default_value = "hemisphere:0:+")]
        initial: Ensemble,
        #[arg(long, value_parser = parse_angle_list, allow_hyphen_values = true)]
        angles: AngleList,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
    },
    /// Run the built-in verification checks.
    Verify {
        /// Print the full stochastic-sign comparison grid.
        #[arg(long)]
        report_discrepancies: bool,
        /// Trials per Monte Carlo check.
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1000..))]
        trials: u64,
        /// Perturb the expected value of the named check (harness self-test).
        #[arg(long, hide = true)]
        corrupt: Option<String>,
    },
}

pub type AngleList = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadruple(pub [f64; 4]);

fn parse_quadruple(s: &str) -> Result<Quadruple, String> {
    let v = parse_angle_list(s)?;
    let arr: [f64; 4] = v
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 4 angles a,b,a',b', got {}", v.len()))?;
    Ok(Quadruple(arr))
}

fn parse_ensemble(s: &str) -> Result<Ensemble, String> {
    let s = s.trim().to_ascii_lowercase();
    if s == "sphere" || s == "full" {
        return Ok(Ensemble::FullSphere);
    }
    let mut parts = s.splitn(3, ':');
    match (parts.next(), parts.next(), parts.next()) {
        (Some("hemisphere"), Some(angle), sign) => {
            let sign = match sign.unwrap_or("+") {
                "+" | "plus" => Sign::Plus,
                "-" | "minus" => Sign::Minus,
                other => return Err(format!("bad hemisphere sign '{other}'")),
            };
            Ok(Ensemble::hemisphere(Axis::new(parse_angle(angle)?), sign))
        }
        _ => Err(format!("cannot parse ensemble '{s}' (sphere | hemisphere:<angle>:<+|->)")),
    }
}

/// Parses `args` and runs the command, writing to the given streams.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_IO
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(io::Error),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn emit(common: &CommonArgs, table: &Table, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &common.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(common.format, &mut w)?;
            w.flush()?;
        }
        None => table.write(common.format, stdout)?,
    }
    Ok(())
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::Correlate {
            model,
            theta_a,
            theta_b,
            trials,
            source,
        } => {
            let model = model.resolve().map_err(CliError::Usage)?;
            let rec = estimate_correlation(
                &model,
                &PairSource::from(*source),
                Axis::new(*theta_a),
                Axis::new(*theta_b),
                *trials as usize,
                &common.monte_carlo(),
            )?;
            let mut t = Table::new(CORRELATION_COLUMNS);
            t.push(correlation_row(&rec));
            emit(common, &t, stdout)?;
            writeln!(
                stderr,
                "E_hat = {} ± {} (closed form {}, z = {})",
                fmt_sig9(rec.e_hat),
                fmt_sig9(rec.std_err),
                fmt_sig9(rec.e_closed),
                fmt_sig9(rec.z_score())
            )?;
            Ok(EXIT_OK)
        }
        Command::Chsh {
            model,
            angles,
            mode,
            trials,
        } => {
            let model = model.resolve().map_err(CliError::Usage)?;
            let mode = chsh_mode(*mode, *trials, common);
            let r = chsh(&model, angles.0, &mode)?;
            let mut t = Table::new(CHSH_COLUMNS);
            t.push(chsh_row(&r));
            emit(common, &t, stdout)?;
            writeln!(stderr, "C = {} violated = {}", fmt_sig9(r.c), r.violated)?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            model,
            step,
            mode,
            trials,
        } => {
            let model = model.resolve().map_err(CliError::Usage)?;
            let mode = chsh_mode(*mode, *trials, common);
            let (best, all) = sweep_chsh(&model, *step, &mode)?;
            let mut t = Table::new(CHSH_COLUMNS);
            for r in &all {
                t.push(chsh_row(r));
            }
            emit(common, &t, stdout)?;
            let [a, b, a2, b2] = best.angles.map(fmt_sig9);
            writeln!(
                stderr,
                "max C = {} at ({a}, {b}, {a2}, {b2}) violated = {}",
                fmt_sig9(best.c),
                best.violated
            )?;
            Ok(EXIT_OK)
        }
        Command::Sequential {
            initial,
            angles,
            trials,
        } => sequential(common, initial, angles, *trials as usize, stdout, stderr),
        Command::Verify {
            report_discrepancies,
            trials,
            corrupt,
        } => {
            let opts = VerifyOptions {
                seed: common.seed,
                workers: common.workers,
                block_size: common.block_size as usize,
                trials: *trials as usize,
                corrupt: corrupt.clone(),
                report_discrepancies: *report_discrepancies,
            };
            let (results, report) = run_checks(&opts);
            write!(stdout, "{report}")?;
            let mut t = Table::new(&["check", "passed", "detail"]);
            for r in &results {
                t.push(vec![
                    Cell::Text(r.name.to_string()),
                    Cell::Bool(r.passed),
                    Cell::Text(r.detail.replace(',', ";")),
                ]);
            }
            for r in &results {
                writeln!(stdout, "{} {:<28} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
            }
            if common.output.is_some() {
                emit(common, &t, stdout)?;
            }
            let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
            if failed.is_empty() {
                writeln!(stdout, "all {} checks passed", results.len())?;
                Ok(EXIT_OK)
            } else {
                writeln!(stderr, "failed checks: {}", failed.join(", "))?;
                Ok(EXIT_VERIFY)
            }
        }
    }
}

fn chsh_mode(mode: ModeArg, trials: u64, common: &CommonArgs) -> ChshMode {
    match mode {
        ModeArg::Closed => ChshMode::Closed,
        ModeArg::Montecarlo => ChshMode::MonteCarlo {
            n: trials as usize,
            mc: common.monte_carlo(),
        },
    }
}

pub fn correlation_row(r: &CorrelationRecord) -> Vec<Cell> {
    vec![
        Cell::Text(r.model.name().into()),
        Cell::Float(r.theta_a),
        Cell::Float(r.theta_b),
        Cell::Int(r.n_trials as u64),
        Cell::Float(r.e_hat),
        Cell::Float(r.std_err),
        Cell::Float(r.e_closed),
        Cell::Float(r.z_score()),
    ]
}

pub fn chsh_row(r: &ChshResult) -> Vec<Cell> {
    let [a, b, a2, b2] = r.angles;
    vec![
        Cell::Text(r.model.name().into()),
        Cell::Float(a),
        Cell::Float(b),
        Cell::Float(a2),
        Cell::Float(b2),
        Cell::Float(r.c),
        Cell::Float(r.v_max),
        Cell::Bool(r.violated),
    ]
}

pub const SEQUENTIAL_COLUMNS: &[&str] = &[
    "step",
    "theta",
    "n_trials",
    "p_plus",
    "mean_outcome",
    "std_err",
    "tree_mean",
    "mean_delta",
    "mean_delta_weighted",
];

fn sequential(
    common: &CommonArgs,
    initial: &Ensemble,
    angles: &[f64],
    trials: usize,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    if angles.is_empty() {
        return Err(CliError::Usage("at least one axis is required".into()));
    }
    let axes: Vec<Axis> = angles.iter().map(|&t| Axis::new(t)).collect();
    let tree = sequence_tree_step_means(initial, &axes)?;
    let steps = axes.len();
    // per step: indicator of +½, outcome, delta, weighted delta
    let stats = common.monte_carlo().run_vec(trials, 4 * steps, |rng, out| {
        let recs = measure_sequence(initial, &axes, rng).expect("validated ensemble");
        for (i, r) in recs.iter().enumerate() {
            out[4 * i] = (r.outcome.value() > 0.0) as u8 as f64;
            out[4 * i + 1] = r.outcome.value();
            out[4 * i + 2] = r.delta_mean_projection;
            out[4 * i + 3] = r.delta_weighted;
        }
    });
    let mut t = Table::new(SEQUENTIAL_COLUMNS);
    for i in 0..steps {
        t.push(vec![
            Cell::Int(i as u64 + 1),
            Cell::Float(axes[i].theta()),
            Cell::Int(trials as u64),
            Cell::Float(stats[4 * i].mean),
            Cell::Float(stats[4 * i + 1].mean),
            Cell::Float(stats[4 * i + 1].std_err()),
            Cell::Float(tree[i]),
            Cell::Float(stats[4 * i + 2].mean),
            Cell::Float(stats[4 * i + 3].mean),
        ]);
    }
    emit(common, &t, stdout)?;
    let last = &stats[4 * (steps - 1) + 1];
    writeln!(
        stderr,
        "final mean outcome = {} ± {} (tree oracle {})",
        fmt_sig9(last.mean),
        fmt_sig9(last.std_err()),
        fmt_sig9(tree[steps - 1])
    )?;
    Ok(EXIT_OK)
}
