use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, OracleChoice};
use crate::eikonal::solve_eikonal;
use crate::error::{Error, Result};
use crate::oracle::{airy_coefficient, bound_value, measure_diagonal, oracle_dn_values, ModeOracle};
use crate::quantize::TorusGrid;
use crate::symring::{Rat, C64};
use crate::transport::{solve_transport, AmplitudeJet};

pub const CSV_HEADER: &str = "h,mu,s,k,error_norm,bound_value,ratio,grid,status";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub h: f64,
    pub mu: f64,
    pub s: usize,
    pub k: usize,
    pub error_norm: f64,
    pub bound_value: f64,
    pub ratio: f64,
    pub grid: usize,
    pub status: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(h: f64, mu: f64, s: usize, k: usize, grid: usize, status: String) -> Self {
        Self {
            h,
            mu,
            s,
            k,
            error_norm: f64::NAN,
            bound_value: bound_value(h, mu, s, k),
            ratio: f64::NAN,
            grid,
            status,
        }
    }
}

fn pick_oracle(choice: OracleChoice, model: &crate::eikonal::ModelSpec) -> Result<ModeOracle> {
    let c = airy_coefficient(model);
    match choice {
        OracleChoice::Ode => Ok(ModeOracle::Ode),
        OracleChoice::Airy => c
            .map(ModeOracle::Airy)
            .ok_or_else(|| Error::Config("oracle = \"airy\" needs a model m = c t".into())),
        OracleChoice::Auto if model.is_zero() => Ok(ModeOracle::Free),
        OracleChoice::Auto => Ok(c.map(ModeOracle::Airy).unwrap_or(ModeOracle::Ode)),
    }
}

fn run_point(cfg: &ExperimentConfig, h: f64, mu: &Rat) -> Vec<SweepRow> {
    let sw = &cfg.sweep;
    let muf = mu.to_f64();
    let grid = if cfg.grids.covering {
        TorusGrid::covering(cfg.model.d - 1, cfg.grids.modes, h)
    } else {
        TorusGrid::new(cfg.model.d - 1, cfg.grids.modes, h)
    };
    let n_modes = grid.as_ref().map(|g| g.n_modes()).unwrap_or(cfg.grids.modes);
    let grid = grid.map_err(|e| e.to_string());
    let fail_all = |msg: String| -> Vec<SweepRow> {
        let mut v = Vec::new();
        for &s in &sw.s {
            for &k in &sw.k {
                v.push(SweepRow::failed(h, muf, s, k, n_modes, msg.clone()));
            }
        }
        v
    };
    let setup = || -> Result<(TorusGrid, AmplitudeJet, Vec<Option<C64>>)> {
        let grid = grid.clone().map_err(Error::Quantize)?;
        let model = cfg.model.instantiate(mu)?;
        if !model.is_y_independent() {
            return Err(Error::Oracle("unsupported: the sweep measures y-independent models only".into()));
        }
        let amps = solve_transport(&solve_eikonal(&model)?)?;
        let vals = oracle_dn_values(&model, &grid, pick_oracle(sw.oracle, &model)?)?;
        Ok((grid, amps, vals))
    };
    let (grid, amps, vals) = match setup() {
        Ok(x) => x,
        Err(e) => return fail_all(format!("error: {e}")),
    };
    let mut rows = Vec::new();
    for &s in &sw.s {
        for &k in &sw.k {
            rows.push(match measure_diagonal(&amps, s, k, &grid, &vals) {
                Ok(m) => SweepRow {
                    h,
                    mu: muf,
                    s,
                    k,
                    error_norm: m.error_norm,
                    bound_value: m.bound_value,
                    ratio: m.ratio(),
                    grid: grid.n_modes(),
                    status: if m.converged { "ok".into() } else { "unconverged".into() },
                },
                Err(e) => SweepRow::failed(h, muf, s, k, grid.n_modes(), format!("error: {e}")),
            });
        }
    }
    rows
}

/// One row per (h, μ, s, k). Failures become rows with a non-"ok" status.
/// Rows are ordered by (s, k, h descending, μ) regardless of completion order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let points = cfg.sweep.points();
    let mut rows: Vec<SweepRow> = points.par_iter().flat_map_iter(|(h, mu)| run_point(cfg, *h, mu)).collect();
    rows.sort_by(|a, b| {
        (a.s, a.k)
            .cmp(&(b.s, b.k))
            .then(b.h.total_cmp(&a.h))
            .then(a.mu.total_cmp(&b.mu))
    });
    Ok(rows)
}

fn clean(s: &str) -> String {
    s.replace([',', '\n', '\r', '"'], ";")
}

pub fn write_csv(rows: &[SweepRow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{:.12e},{:.12e},{},{},{:.12e},{:.12e},{:.12e},{},{}",
            r.h,
            r.mu,
            r.s,
            r.k,
            r.error_norm,
            r.bound_value,
            r.ratio,
            r.grid,
            clean(&r.status)
        )?;
    }
    Ok(())
}

pub fn read_csv(r: impl Read) -> Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(|e| Error::Config(format!("csv: {e}")))?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Config(format!("csv header must be `{CSV_HEADER}`")));
    }
    rd.deserialize().map(|r| r.map_err(|e| Error::Config(format!("csv: {e}")))).collect()
}
