use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::SweepRow;
use crate::error::{Error, Result};
use crate::transport::loglog_slope;

pub const MIN_FIT_POINTS: usize = 5;
/// Largest allowed max/min spread of error/bound along a sweep.
pub const RATIO_SPREAD: f64 = 3.0;

/// Slope tolerance in h: 0.3 at s = 0, 0.4 above.
pub fn slope_tolerance(s: usize) -> f64 {
    if s == 0 {
        0.3
    } else {
        0.4
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitEntry {
    pub s: usize,
    pub k: usize,
    pub points: usize,
    /// Slope of log error against log h at the fixed μ with the most h values.
    pub slope_h: Option<f64>,
    pub slope_h_mu: Option<f64>,
    pub expected_h: f64,
    /// Slope of log error against log μ at the fixed h with the most μ values.
    pub slope_mu: Option<f64>,
    pub expected_mu: f64,
    pub max_ratio: f64,
    pub ratio_spread: f64,
    pub tol_h: f64,
}

impl FitEntry {
    /// |slope_h − (s+1)| ≤ tol.
    pub fn slope_h_matches(&self) -> Option<bool> {
        self.slope_h.map(|v| (v - self.expected_h).abs() <= self.tol_h)
    }

    /// Decay in h at least as fast as the bound (one-sided).
    pub fn slope_h_ok(&self) -> Option<bool> {
        self.slope_h.map(|v| v >= self.expected_h - self.tol_h)
    }

    /// Growth as μ → 0 no faster than the bound (one-sided).
    pub fn slope_mu_ok(&self) -> Option<bool> {
        self.slope_mu.map(|v| v >= self.expected_mu - self.tol_h)
    }

    pub fn ratio_ok(&self) -> bool {
        self.ratio_spread <= RATIO_SPREAD
    }

    pub fn pass(&self) -> bool {
        self.slope_h_ok().unwrap_or(true) && self.slope_mu_ok().unwrap_or(true) && self.ratio_ok()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FitReport {
    pub entries: Vec<FitEntry>,
}

impl FitReport {
    pub fn pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass())
    }

    pub fn get(&self, s: usize, k: usize) -> Option<&FitEntry> {
        self.entries.iter().find(|e| e.s == s && e.k == k)
    }
}

/// Best fit of log error against log x within groups sharing the other variable.
fn best_group(rows: &[&SweepRow], key: impl Fn(&SweepRow) -> f64, x: impl Fn(&SweepRow) -> f64) -> Option<(f64, f64)> {
    let mut groups: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        groups.entry(key(r).to_bits()).or_default().push((x(r), r.error_norm));
    }
    let (bits, pts) = groups.into_iter().filter(|(_, p)| p.len() >= MIN_FIT_POINTS).max_by_key(|(_, p)| p.len())?;
    Some((loglog_slope(&pts), f64::from_bits(bits)))
}

/// Per-(s, k) least-squares slopes and error/bound ratio spread. Each fit uses
/// at least five positive error values.
pub fn fit_scaling(rows: &[SweepRow]) -> Result<FitReport> {
    let mut by_sk: BTreeMap<(usize, usize), Vec<&SweepRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.is_ok() && r.error_norm > 0.0 && r.error_norm.is_finite()) {
        by_sk.entry((r.s, r.k)).or_default().push(r);
    }
    let mut entries = Vec::new();
    for ((s, k), rs) in by_sk {
        if rs.len() < MIN_FIT_POINTS {
            continue;
        }
        let h_fit = best_group(&rs, |r| r.mu, |r| r.h);
        let mu_fit = best_group(&rs, |r| r.h, |r| r.mu.abs());
        let ratios: Vec<f64> = rs.iter().map(|r| r.ratio).collect();
        let max_ratio = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min_ratio = ratios.iter().cloned().fold(f64::MAX, f64::min);
        entries.push(FitEntry {
            s,
            k,
            points: rs.len(),
            slope_h: h_fit.map(|f| f.0),
            slope_h_mu: h_fit.map(|f| f.1),
            expected_h: s as f64 + 1.0,
            slope_mu: mu_fit.map(|f| f.0),
            expected_mu: -(3.0 * s as f64 + 2.0 - k as f64) / 2.0,
            max_ratio,
            ratio_spread: max_ratio / min_ratio,
            tol_h: slope_tolerance(s),
        });
    }
    if entries.is_empty() {
        return Err(Error::InsufficientData(format!("no (s, k) group has {MIN_FIT_POINTS} usable rows")));
    }
    Ok(FitReport { entries })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "NA".into())
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "NA",
    }
}

pub const FIT_CSV_HEADER: &str = "s,k,points,slope_h,expected_h,slope_mu,expected_mu,max_ratio,ratio_spread,pass";

pub fn summary_text(fit: &FitReport) -> String {
    let mut out = String::new();
    for e in &fit.entries {
        out.push_str(&format!(
            "s={} k={} points={} slope_h={} (expect {:.1} +/- {:.1}, {}) slope_mu={} (envelope {:.1}, {}) ratio max={:.3e} spread={:.2} ({}) => {}\n",
            e.s,
            e.k,
            e.points,
            opt(e.slope_h),
            e.expected_h,
            e.tol_h,
            flag(e.slope_h_matches()),
            opt(e.slope_mu),
            e.expected_mu,
            flag(e.slope_mu_ok()),
            e.max_ratio,
            e.ratio_spread,
            flag(Some(e.ratio_ok())),
            if e.pass() { "PASS" } else { "FAIL" }
        ));
    }
    out
}

/// Writes the machine CSV to `path` and the text summary next to it (`.txt`).
/// Returns the summary path.
pub fn emit_report(fit: &FitReport, path: &Path) -> Result<PathBuf> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{FIT_CSV_HEADER}")?;
    for e in &fit.entries {
        writeln!(
            f,
            "{},{},{},{},{:.1},{},{:.1},{:.12e},{:.6},{}",
            e.s,
            e.k,
            e.points,
            opt(e.slope_h),
            e.expected_h,
            opt(e.slope_mu),
            e.expected_mu,
            e.max_ratio,
            e.ratio_spread,
            e.pass()
        )?;
    }
    let txt = path.with_extension("txt");
    std::fs::write(&txt, summary_text(fit))?;
    Ok(txt)
}
