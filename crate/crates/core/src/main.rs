use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sepvar::cli::{cmd_eval, cmd_verify, Mutation, PotentialSource, RunConfig, Suite};
use sepvar::star::Builtin;

#[derive(Parser)]
#[command(name = "sepvar", version, about = "Exact star products with separation of variables on jets")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a jet expression using star, wick, berezin, inv-berezin, trace.
    Eval {
        expr: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run verification suites and write a JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite name, `lemmas` or `all`; may be repeated.
        #[arg(long = "suite", default_value = "all")]
        suites: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// orientation-flip, perturb-potential or perturb-phase.
        #[arg(long)]
        mutate: Option<String>,
        /// Include per-check runtimes (the report is then not reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Built-in potentials.
    Potentials {
        #[command(subcommand)]
        cmd: PotentialsCmd,
    },
}

#[derive(Subcommand)]
enum PotentialsCmd {
    List,
}

#[derive(Args)]
struct Common {
    /// Built-in name or path to a potential file.
    #[arg(long, default_value = "flat")]
    potential: String,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long = "nu-max", default_value_t = 4)]
    nu_max: i32,
    #[arg(long = "deg-max", default_value_t = 8)]
    deg_max: u32,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            potential: PotentialSource::parse(&self.potential),
            m: self.m,
            l: self.l,
            nu_max: self.nu_max,
            deg_max: self.deg_max,
            ..RunConfig::default()
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.cmd {
        Cmd::Potentials { cmd: PotentialsCmd::List } => {
            for b in Builtin::ALL {
                println!("{:<14}{}", b.name(), b.description());
            }
            ExitCode::SUCCESS
        }
        Cmd::Eval { expr, common } => {
            let ctx = match common.config().resolve() {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            match cmd_eval(&expr, &ctx) {
                Ok(s) => {
                    println!("{s}");
                    if !ctx.potential.is_exact() {
                        eprintln!("exact through filtration weight {}", ctx.deg_max as i64 - 2);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => usage(e),
            }
        }
        Cmd::Verify {
            common,
            suites,
            seed,
            out,
            mutate,
            timings,
        } => {
            let mut cfg = common.config();
            cfg.seed = seed;
            cfg.timings = timings;
            cfg.out = out.clone();
            let mut picked = Vec::new();
            for s in &suites {
                match Suite::expand(s) {
                    Ok(v) => picked.extend(v),
                    Err(e) => return usage(e),
                }
            }
            cfg.suites = picked;
            if let Some(m) = &mutate {
                match Mutation::parse(m) {
                    Ok(x) => cfg.mutate = Some(x),
                    Err(e) => return usage(e),
                }
            }
            let ctx = match cfg.resolve() {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            let report = cmd_verify(&ctx);
            let json = report.to_json();
            match &out {
                Some(p) => {
                    if let Err(e) = std::fs::write(p, json + "\n") {
                        return usage(format!("cannot write {}: {e}", p.display()));
                    }
                }
                None => {
                    // a closed pipe is not an error worth a panic
                    let _ = writeln!(std::io::stdout().lock(), "{json}");
                }
            }
            for c in report.failures() {
                eprintln!("FAIL {}: {}", c.name, c.detail);
            }
            eprintln!("{} checks, {} failed", report.total, report.failed);
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
