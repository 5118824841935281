use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use glancing::eikonal::ModelSpec;
use glancing::sweep::{
    emit_report, fit_scaling, read_csv, run_sweep, run_verify, summary_text, verify_model, write_csv, ExperimentConfig,
    SweepRow,
};
use glancing::symring::Rat;
use glancing::Error;

const PASS: u8 = 0;
const CHECK_FAILED: u8 = 1;
const USAGE: u8 = 2;
const SOLVER_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "sweepcli", about = "Symbolic verification, DN error sweeps and scaling fits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact residual, membership, grading, perturbation and Im-phase checks.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Overwrite one amplitude after solving; the suite must then fail.
        #[arg(long)]
        corrupt: bool,
        /// Only the m = 0 model.
        #[arg(long)]
        smoke: bool,
    },
    /// DN error measurements over the (h, mu) grid, written as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Fit scaling exponents from a sweep CSV.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Sweep CSV to read (default: output.csv from the config).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sweep (or read --csv), fit, and write the report files.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

enum Fail {
    Usage(String),
    Solver(String),
    Check(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Io(_) => Fail::Usage(e.to_string()),
            Error::InsufficientData(_) => Fail::Check(e.to_string()),
            _ => Fail::Solver(e.to_string()),
        }
    }
}

fn load(common: &Common) -> Result<Option<ExperimentConfig>, Fail> {
    let Some(p) = &common.config else { return Ok(None) };
    let mut cfg = ExperimentConfig::load(p)?;
    if let Some(s) = common.seed {
        cfg.sweep.seed = s;
        cfg.verify.seed = s;
    }
    Ok(Some(cfg))
}

fn require(common: &Common) -> Result<ExperimentConfig, Fail> {
    load(common)?.ok_or_else(|| Fail::Usage("--config is required".into()))
}

fn set_jobs(jobs: Option<usize>) -> Result<(), Fail> {
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Fail::Usage(e.to_string()))?;
    }
    Ok(())
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>, Fail> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn verify(common: &Common, corrupt: bool, smoke: bool) -> Result<(), Fail> {
    let mut vc = load(common)?.map(|c| c.verify).unwrap_or_default();
    if let Some(s) = common.seed {
        vc.seed = s;
    }
    vc.corrupt |= corrupt;
    let report = if smoke {
        let zero = ModelSpec::zero(2, Rat::new(1, 2), vc.order)?;
        let checks = verify_model("zero model", &zero, vc.corrupt)?;
        glancing::sweep::VerifyReport { checks, seconds: 0.0 }
    } else {
        run_verify(&vc)?
    };
    let text = report.summary();
    print!("{text}");
    if let Some(p) = &common.out {
        let json = serde_json::to_string_pretty(&report).map_err(|e| Fail::Usage(e.to_string()))?;
        std::fs::write(p, json).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))?;
    }
    match report.first_failure() {
        None => Ok(()),
        Some(c) => Err(Fail::Check(format!("{} failed on {}: {}", c.check, c.model, c.detail))),
    }
}

fn solver_failures(rows: &[SweepRow]) -> usize {
    rows.iter().filter(|r| !r.is_ok()).count()
}

fn sweep(common: &Common) -> Result<(), Fail> {
    let cfg = require(common)?;
    let rows = run_sweep(&cfg)?;
    let out = common.out.clone().or(cfg.output.csv.clone());
    let mut w = writer(out.as_deref())?;
    write_csv(&rows, &mut w)?;
    w.flush().map_err(|e| Fail::Usage(e.to_string()))?;
    match solver_failures(&rows) {
        0 => Ok(()),
        n => Err(Fail::Solver(format!("{n} of {} rows failed", rows.len()))),
    }
}

fn read_rows(common: &Common, csv: &Option<PathBuf>) -> Result<Option<Vec<SweepRow>>, Fail> {
    let path = match csv {
        Some(p) => Some(p.clone()),
        None => load(common)?.and_then(|c| c.output.csv),
    };
    let Some(p) = path else { return Ok(None) };
    let f = File::open(&p).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))?;
    Ok(Some(read_csv(f)?))
}

fn fit(common: &Common, csv: &Option<PathBuf>) -> Result<(), Fail> {
    let rows = read_rows(common, csv)?.ok_or_else(|| Fail::Usage("give --csv or a config with output.csv".into()))?;
    let fit = fit_scaling(&rows)?;
    print!("{}", summary_text(&fit));
    if let Some(p) = &common.out {
        emit_report(&fit, p)?;
    }
    if fit.pass() {
        Ok(())
    } else {
        Err(Fail::Check("scaling fit outside tolerance".into()))
    }
}

fn report(common: &Common, csv: &Option<PathBuf>) -> Result<(), Fail> {
    let cfg = load(common)?;
    let rows = match csv {
        Some(_) => read_rows(common, csv)?.unwrap_or_default(),
        None => {
            let cfg = cfg.clone().ok_or_else(|| Fail::Usage("give --config or --csv".into()))?;
            run_sweep(&cfg)?
        }
    };
    let fit = fit_scaling(&rows)?;
    let out = common
        .out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.report))
        .unwrap_or_else(|| PathBuf::from("report.csv"));
    let txt = emit_report(&fit, &out)?;
    print!("{}", summary_text(&fit));
    eprintln!("wrote {} and {}", out.display(), txt.display());
    if solver_failures(&rows) > 0 {
        return Err(Fail::Solver(format!("{} sweep rows failed", solver_failures(&rows))));
    }
    if fit.pass() {
        Ok(())
    } else {
        Err(Fail::Check("scaling fit outside tolerance".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { PASS });
        }
    };
    let common = match &cli.cmd {
        Cmd::Verify { common, .. } | Cmd::Sweep { common } | Cmd::Fit { common, .. } | Cmd::Report { common, .. } => {
            common.clone()
        }
    };
    let res = set_jobs(common.jobs).and_then(|_| match &cli.cmd {
        Cmd::Verify { corrupt, smoke, .. } => verify(&common, *corrupt, *smoke),
        Cmd::Sweep { .. } => sweep(&common),
        Cmd::Fit { csv, .. } => fit(&common, csv),
        Cmd::Report { csv, .. } => report(&common, csv),
    });
    match res {
        Ok(()) => ExitCode::from(PASS),
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(USAGE)
        }
        Err(Fail::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(CHECK_FAILED)
        }
        Err(Fail::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(SOLVER_FAILED)
        }
    }
}
