use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use vortexbc::harness::{self, Solver};
use vortexbc::Error;

#[derive(Parser)]
#[command(name = "vortexbc", version, about = "No-slip spectral solvers for exterior 2D vorticity")]
struct Cli {
    #[arg(value_enum)]
    solver: Solver,
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emission cadence in steps; overrides `output.emit_every`.
    #[arg(long)]
    emit_every: Option<usize>,
}

fn report(e: &Error) -> ExitCode {
    let mut obj = serde_json::json!({ "kind": e.kind(), "message": e.to_string() });
    if let Error::Validation { key, .. } = e {
        obj["key"] = key.clone().into();
    }
    eprintln!("{}", serde_json::json!({ "error": obj }));
    ExitCode::from(e.exit_code() as u8)
}

fn threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("VORTEXBC_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| Error::Validation {
        key: "VORTEXBC_THREADS".into(),
        message: format!("expected a positive integer, got {v:?}"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Misconfigured(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = threads().and_then(|_| {
        let mut sc = harness::load_scenario(&cli.scenario)?;
        if let Some(e) = cli.emit_every {
            sc.output.emit_every = e;
        }
        if let Some(s) = sc.run.solver.filter(|s| *s != cli.solver) {
            log::warn!("scenario names solver {s:?}; running {:?}", cli.solver);
        }
        let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(&sc.output.directory));
        let out = harness::execute(&sc, cli.solver)?;
        let files = harness::write_outputs(&out, &dir)?;
        if let Some(v) = out.verify.as_ref().filter(|v| !v.passed) {
            let failed: Vec<_> = v.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            return Err(Error::Validation {
                key: "verify".into(),
                message: format!("failed checks: {}", failed.join(", ")),
            });
        }
        Ok(files)
    });
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => report(&e),
    }
}
