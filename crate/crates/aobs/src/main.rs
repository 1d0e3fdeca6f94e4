use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aobs::analysis::{fit_rows, fit_rows_bdd, summarize_compression};
use aobs::bench::{run_seeds, BenchError};
use aobs::dot::to_dot;
use aobs::format::{read_action, read_condition, read_state, write_state, FormatError};
use aobs::report::write_csv;
use aobs::verify::verify_suite;
use aobs_core::acting::apply_action;
use aobs_core::query::probability;
use aobs_core::script::ExperimentConfig;
use aobs_core::Store;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aobs", version, about = "And-Or belief states: inference, acting and benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run random policy explorations and write per-step metrics as CSV.
    Bench(BenchArgs),
    /// Check graph acting against the tabular oracle on random cases.
    Verify {
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        cases: u64,
        /// First case seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Print the probability that a condition holds.
    Eval { state: PathBuf, condition: PathBuf },
    /// Apply an action to the states selected by a condition.
    Act {
        state: PathBuf,
        condition: PathBuf,
        action: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the graph in Graphviz DOT format.
    ExportDot {
        state: PathBuf,
        /// Standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    vars: u32,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    values: u32,
    #[arg(long, default_value_t = 35)]
    actions: u32,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    effects: u32,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    assigns: u32,
    #[arg(long, default_value_t = 3)]
    cond_arity: u32,
    /// Runs seeds 0..SEEDS.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    seeds: u64,
    /// Largest state count compared against the tabular oracle.
    #[arg(long, default_value_t = 10_000)]
    oracle_cap: usize,
    /// Track the one-hot decision diagram alongside.
    #[arg(long)]
    with_bdd: bool,
    /// Skip the greedy optimizer after each action.
    #[arg(long)]
    no_optimize: bool,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Input(String),
    Verify(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<aobs_core::Error> for Failure {
    fn from(e: aobs_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Twelve significant digits, trailing zeros dropped.
fn format_probability(p: f64) -> String {
    let rounded: f64 = format!("{p:.11e}").parse().expect("formatted float parses");
    format!("{rounded:?}")
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let cfg = ExperimentConfig {
        num_vars: args.vars,
        num_values: args.values,
        num_actions: args.actions,
        effects_per_action: args.effects,
        assigns_per_effect: args.assigns,
        condition_arity: args.cond_arity,
        oracle_cap: args.oracle_cap,
        with_bdd: args.with_bdd,
        optimize: !args.no_optimize,
    };
    cfg.validate()?;
    let rows = run_seeds(&cfg, args.seeds).map_err(|e| match e {
        BenchError::OracleMismatch { .. } => Failure::Verify(e.to_string()),
        BenchError::Core(e) => Failure::Input(e.to_string()),
    })?;
    let file = fs::File::create(&args.out).map_err(|e| Failure::Input(format!("{}: {e}", args.out.display())))?;
    write_csv(&rows, std::io::BufWriter::new(file)).map_err(|e| Failure::Input(e.to_string()))?;

    println!("wrote {} rows to {}", rows.len(), args.out.display());
    match fit_rows(&rows) {
        Ok(k) => println!("fitted exponent n_aobs ~ n_naive^{k:.3}"),
        Err(e) => println!("fitted exponent unavailable: {e}"),
    }
    if args.with_bdd {
        match fit_rows_bdd(&rows) {
            Ok(k) => println!("fitted exponent n_bdd ~ n_naive^{k:.3}"),
            Err(e) => println!("bdd exponent unavailable: {e}"),
        }
    }
    if let Some(last) = summarize_compression(&rows).pop() {
        print!(
            "step {}: mean n_aobs {:.1}, mean compression {:.2}",
            last.step, last.mean_n_aobs, last.compression_aobs
        );
        if let (Some(b), Some(cb)) = (last.mean_n_bdd, last.compression_bdd) {
            print!(", mean n_bdd {b:.1}, bdd compression {cb:.2}");
        }
        println!(" ({} seeds)", last.seeds);
    }
    Ok(())
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Bench(args) => bench(args),
        Cmd::Verify {
            cases,
            seed,
            inject_fault,
        } => {
            let report = verify_suite(seed, cases, inject_fault);
            println!("{}/{} ok ({} actions checked)", report.passed, report.cases, report.steps);
            match report.failures.first() {
                None => Ok(()),
                Some(f) => Err(Failure::Verify(format!(
                    "{} failing cases; first: seed {} step {}: {}",
                    report.failures.len(),
                    f.seed,
                    f.step,
                    f.detail
                ))),
            }
        }
        Cmd::Eval { state, condition } => {
            let mut store = Store::new();
            let (universe, s) = read_state(&mut store, &read(&state)?)?;
            let c = read_condition(&universe, &read(&condition)?)?;
            println!("{}", format_probability(probability(&store, &s, &c)?));
            Ok(())
        }
        Cmd::Act {
            state,
            condition,
            action,
            out,
        } => {
            let mut store = Store::new();
            let (universe, s) = read_state(&mut store, &read(&state)?)?;
            let c = read_condition(&universe, &read(&condition)?)?;
            let a = read_action(&universe, &read(&action)?)?;
            let before = store.size_metric(s.root);
            let acted = apply_action(&mut store, &s, &c, &a)?;
            write(&out, &write_state(&store, &universe, &acted.state))?;
            println!("size_metric before: {before}");
            println!("size_metric after: {}", store.size_metric(acted.state.root));
            println!("selected mass: {}", format_probability(acted.selected_mass));
            Ok(())
        }
        Cmd::ExportDot { state, out } => {
            let mut store = Store::new();
            let (universe, s) = read_state(&mut store, &read(&state)?)?;
            let dot = to_dot(&store, &universe, &s);
            match out {
                Some(path) => write(&path, &dot),
                None => std::io::stdout()
                    .write_all(dot.as_bytes())
                    .map_err(|e| Failure::Input(e.to_string())),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::format_probability;

    #[test]
    fn probability_digits() {
        assert_eq!(format_probability(0.42000000000000004), "0.42");
        assert_eq!(format_probability(1.0), "1.0");
        assert_eq!(format_probability(0.0), "0.0");
        assert_eq!(format_probability(1.0 / 3.0), "0.333333333333");
    }
}
