use std::path::PathBuf;
use std::process::ExitCode;

use capwave_cli::config::Kind;
use capwave_cli::{catalog, load_config, run_config, RunOptions, Status};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "capwave", version, about = "Run capillary-wave experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run {
        config: PathBuf,
        /// Output directory (default: $CAPWAVE_OUT/<name> or capwave-out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for band-parallel experiments.
        #[arg(long)]
        threads: Option<usize>,
        /// Also write SVG plots.
        #[arg(long)]
        plots: bool,
    },
    /// List the experiment kinds.
    List,
    /// Show the config keys and observables of one kind.
    Describe { kind: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::List => {
            print!("{}", catalog::list());
            0
        }
        Command::Describe { kind } => match Kind::parse(&kind) {
            Some(k) => {
                print!("{}", catalog::describe(k));
                0
            }
            None => {
                let names: Vec<&str> = Kind::ALL.iter().map(|k| k.name()).collect();
                eprintln!("error: unknown experiment kind `{kind}` (expected one of {})", names.join(", "));
                2
            }
        },
        Command::Run { config, out, threads, plots } => run(config, RunOptions { out, plots, threads }),
    };
    ExitCode::from(code as u8)
}

fn run(path: PathBuf, opts: RunOptions) -> i32 {
    if let Some(n) = opts.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start the thread pool: {e}");
            return 3;
        }
    }
    let cfg = match load_config(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match run_config(cfg, &path, &opts) {
        Ok(r) => {
            let m = &r.manifest;
            for (k, v) in &m.observables {
                println!("{k} = {v:e}");
            }
            for a in &m.assertions {
                let verdict = if a.pass { "PASS" } else { "FAIL" };
                println!("{verdict} {} = {:?} (min {:?}, max {:?})", a.assertion.observable, a.value, a.assertion.min, a.assertion.max);
            }
            if let Some(f) = &m.failure {
                eprintln!("error: {f}");
            }
            println!("{:?} -> {}", m.status, r.dir.display());
            if m.status != Status::Passed && m.failure.is_none() {
                eprintln!("error: assertions failed");
            }
            m.status.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
