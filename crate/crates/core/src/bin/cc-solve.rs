use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use condcoh::cli::{run, OutputFormat, RunConfig, EXIT_USAGE};
use condcoh::entailment::DEFAULT_SEED;

/// Solve coherence, bounds and entailment queries in a problem file.
#[derive(Parser)]
#[command(name = "cc-solve", version)]
struct Args {
    /// Problem file.
    file: Option<PathBuf>,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Seed for sampled verification assessments.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Exit 1 when a coherence or p-consistency query answers no.
    #[arg(long)]
    assert: bool,
    /// Check a built-in inference rule instead of reading a file.
    #[arg(long, conflicts_with = "file")]
    rule: Option<String>,
    #[arg(short, long)]
    verbose: bool,
}

fn main() {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            std::process::exit(code);
        }
    };
    let config = RunConfig {
        input: args.file,
        rule: args.rule,
        format: if args.json {
            OutputFormat::Json
        } else {
            OutputFormat::Text
        },
        seed: args.seed,
        verbose: args.verbose,
        assert: args.assert,
    };
    let outcome = run(&config);
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    std::process::exit(outcome.code);
}
