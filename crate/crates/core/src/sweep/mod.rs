//! Experiment driver: symbolic verification suite, (h, μ) sweeps against the
//! oracles, and scaling fits.

mod config;
mod fit;
mod run;
mod verify;


pub use config::{
    ExperimentConfig, GridConfig, ModelSource, MuRule, OracleChoice, OutputConfig, SweepConfig, VerifyConfig,
    MU_DENOMINATOR,
};
pub use fit::{
    emit_report, fit_scaling, slope_tolerance, summary_text, FitEntry, FitReport, FIT_CSV_HEADER, MIN_FIT_POINTS,
    RATIO_SPREAD,
};
pub use run::{read_csv, run_sweep, write_csv, SweepRow, CSV_HEADER};
pub use verify::{
    run_verify, verify_exact, verify_grading, verify_model, verify_perturbations, verify_suite, CheckResult, SolvedJets,
    VerifyReport,
};
