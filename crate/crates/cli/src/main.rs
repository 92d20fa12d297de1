use std::path::PathBuf;
use std::process::ExitCode;

use bclab::pipeline::{self, RunConfig};
use bclab::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bclab", version, about = "Boundary-control reconstruction pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every basis control and write traces, snapshots and a manifest.
    Forward(Common),
    /// Build the eikonals and the spectrum cloud from the stored traces.
    Reconstruct(Common),
    /// Run the oracle-side checks and write report.json.
    Verify(Common),
    /// Write boundary distance fields and the ground-truth embedding.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output (and input) directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<(RunConfig, PathBuf), Error> {
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        }
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        let out = cfg.out_dir(self.out.as_deref())?;
        Ok((cfg, out))
    }
}

fn print<S: serde::Serialize>(v: &S) {
    println!("{}", serde_json::to_string(v).expect("serializable summary"));
}

fn run(cmd: &Command) -> Result<bool, Error> {
    match cmd {
        Command::Forward(c) => {
            let (cfg, out) = c.load()?;
            let m = pipeline::forward(&cfg, &out)?;
            print(&serde_json::json!({
                "config_hash": m.config_hash,
                "basis_size": m.basis_size,
                "steps_per_t": m.steps_per_t,
                "files": m.files,
            }));
            Ok(true)
        }
        Command::Reconstruct(c) => {
            let (cfg, out) = c.load()?;
            let r = pipeline::reconstruct(&cfg, &out)?;
            print(&r.diagnostics);
            Ok(true)
        }
        Command::Verify(c) => {
            let (cfg, out) = c.load()?;
            let r = pipeline::verify(&cfg, &out)?;
            for c in &r.criteria {
                eprintln!("{} {}: {:.4e} (threshold {:.4e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.measured, c.threshold);
            }
            print(&serde_json::json!({ "passed": r.passed, "report": out.join(pipeline::REPORT) }));
            Ok(r.passed)
        }
        Command::Oracle(c) => {
            let (cfg, out) = c.load()?;
            print(&pipeline::oracle(&cfg, &out)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
