use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use stretchlab::bounds::{evaluate_all, BoundInputs, PExpression};
use stretchlab::constructs::{resolve_c, three_phase_generate};
use stretchlab::harness::{
    compare_to_bounds, emit, read_summary_json, run_experiment, write_json, ExperimentSpec, Format,
    OutputFiles, SummaryStats,
};
use stretchlab::stretch::stretch_factor;
use stretchlab::{EmbeddedGraph, Error, ModelParams};

/// Stretch factor experiments on randomly embedded random graphs.
#[derive(Parser)]
#[command(name = "stretchlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it as JSON.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the stretch factor of a graph JSON file.
    Stretch {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Evaluate every closed-form bound at one point.
    Bounds(BoundsArgs),
    /// Run an experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Compare with the bounds; exit with status 3 on a violation.
        #[arg(long)]
        compare: bool,
        /// Compare this saved summary instead of running the trials.
        #[arg(long, requires = "compare")]
        summary: Option<PathBuf>,
    },
    /// Lower-bound constructions.
    #[command(subcommand)]
    Constructs(Construct),
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, conflicts_with = "p_expr", required_unless_present = "p_expr")]
    p: Option<f64>,
    /// Edge probability as a function of n, e.g. `one_minus_pow(2,1)`.
    #[arg(long)]
    p_expr: Option<PExpression>,
    #[arg(long)]
    lambda: f64,
    /// Defaults to ln n.
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Subcommand)]
enum Construct {
    /// Run the three-phase generator and print its trace.
    ThreePhase {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        seed: u64,
        /// Defaults to the smallest valid c for n.
        #[arg(long)]
        c: Option<f64>,
        /// Also write the generated graph to this file.
        #[arg(long)]
        graph_out: Option<PathBuf>,
    },
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_text(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Generate { n, p, seed, out } => {
            let g = EmbeddedGraph::generate(ModelParams::new(n, p, seed)?)?;
            let json = g.to_json()?;
            match out {
                Some(path) => write_text(&path, &(json + "\n"))?,
                None => println!("{json}"),
            }
        }
        Command::Stretch { input } => {
            let g = EmbeddedGraph::from_json(&read_text(&input)?)?;
            print_json(&stretch_factor(&g)?)?;
        }
        Command::Bounds(args) => {
            let p = match (&args.p_expr, args.p) {
                (Some(expr), _) => expr.eval(args.n)?,
                (None, Some(p)) => p,
                (None, None) => unreachable!("clap requires --p or --p-expr"),
            };
            let inputs = BoundInputs {
                n: args.n,
                p,
                lambda: args.lambda,
                w: args.w.unwrap_or_else(|| (args.n as f64).ln()),
                c: args.c,
            };
            print_json(&evaluate_all(inputs, args.p_expr.as_ref())?)?;
        }
        Command::Experiment {
            config,
            summary: Some(saved),
            ..
        } => {
            let spec = ExperimentSpec::from_file(&config)?;
            let summary = read_summary_json(&saved)?;
            return finish_compare(&spec, &summary);
        }
        Command::Experiment {
            config,
            compare,
            summary: None,
        } => {
            let spec = ExperimentSpec::from_file(&config)?;
            let result = run_experiment(&spec)?;
            for row in &result.summary.rows {
                eprintln!(
                    "n={} lambda={} trials={} connected={} P(F>lambda)={} median(F|CON)={}",
                    row.n,
                    row.lambda,
                    row.trials,
                    row.connected_count,
                    fmt_opt(row.p_gt_lambda),
                    fmt_opt(row.q50_con),
                );
            }
            if !compare {
                print_json(&result.summary)?;
                return Ok(ExitCode::SUCCESS);
            }
            return finish_compare(&spec, &result.summary);
        }
        Command::Constructs(Construct::ThreePhase {
            n,
            p,
            lambda,
            seed,
            c,
            graph_out,
        }) => {
            let choice = resolve_c(n, c)?;
            if choice.outside_window {
                eprintln!("note: c = {} is outside (1/51, 1/(16 pi))", choice.c);
            }
            let run = three_phase_generate(ModelParams::new(n, p, seed)?, choice.c, lambda)?;
            if let (Some(path), Some(g)) = (graph_out, &run.graph) {
                write_text(&path, &(g.to_json()? + "\n"))?;
            }
            print_json(&run.trace)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn finish_compare(spec: &ExperimentSpec, summary: &SummaryStats) -> Result<ExitCode, Error> {
    let report = compare_to_bounds(summary, spec);
    if let Some(dir) = &spec.output_path {
        let files = OutputFiles::new(dir, &spec.name);
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        write_json(&report, &files.report_json)?;
        emit(&report.rows, Format::Csv, &files.report_csv)?;
    }
    print_json(&report)?;
    if report.has_violation() {
        eprintln!("{} bound violation(s)", report.violations);
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Csv(_) => 4,
        Error::Internal(_) => 1,
        Error::InvalidInput(_) | Error::NoValidC { .. } | Error::Serde(_) => 2,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
