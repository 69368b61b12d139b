//! Power and reach sweeps, their CSV records and summary statistics.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DetectorKind, RunConfig};
use super::run::run_point;
use crate::error::{self, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Power,
    Reach,
}

impl SweepMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepMode::Power => "power",
            SweepMode::Reach => "reach",
        }
    }
}

/// One CSV row: one detector at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mode: SweepMode,
    pub symbol_rate_gbaud: f64,
    pub dispersion_managed: bool,
    pub reach_km: f64,
    pub power_dbm: f64,
    pub detector: DetectorKind,
    pub ser: f64,
    pub ber: f64,
    pub q_db: f64,
    pub n_test: usize,
    pub seed: u64,
    pub radius_r: Option<f64>,
    pub n_bit_errors: u64,
}

pub const CSV_HEADER: &str = "mode,symbol_rate_gbaud,dm,reach_km,power_dbm,detector,ser,ber,q_db,n_test,seed,radius_r";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        let radius = self.radius_r.map_or_else(|| "n/a".to_string(), |r| format!("{r:.6}"));
        format!(
            "{},{:.3},{},{:.1},{:.2},{},{:.6e},{:.6e},{:.4},{},{},{}",
            self.mode.as_str(),
            self.symbol_rate_gbaud,
            self.dispersion_managed as u8,
            self.reach_km,
            self.power_dbm,
            self.detector.as_str(),
            self.ser,
            self.ber,
            self.q_db,
            self.n_test,
            self.seed,
            radius
        )
    }
}

/// Rows of a sweep in grid order, detectors in configured order per point.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepRecord {
    pub rows: Vec<SweepRow>,
}

impl SweepRecord {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for row in &self.rows {
            writeln!(out, "{}", row.csv_line())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// `(x, Q)` pairs of one detector, where `x` is power or reach by mode.
    pub fn curve(&self, detector: DetectorKind) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.detector == detector)
            .map(|r| match r.mode {
                SweepMode::Power => (r.power_dbm, r.q_db),
                SweepMode::Reach => (r.reach_km, r.q_db),
            })
            .collect()
    }

    pub fn q_at(&self, detector: DetectorKind, x: f64) -> Option<f64> {
        self.curve(detector)
            .into_iter()
            .find(|&(p, _)| (p - x).abs() < 1e-9)
            .map(|(_, q)| q)
    }

    /// Grid point with the highest Q for a detector (lowest x on ties).
    pub fn optimum(&self, detector: DetectorKind) -> Option<(f64, f64)> {
        let mut curve = self.curve(detector);
        curve.sort_by(|a, b| a.0.total_cmp(&b.0));
        curve
            .into_iter()
            .fold(None, |best: Option<(f64, f64)>, p| match best {
                Some(b) if b.1 >= p.1 => Some(b),
                _ => Some(p),
            })
    }

    /// Reach at which a detector's Q crosses `threshold_db`.
    pub fn threshold_reach(&self, detector: DetectorKind, threshold_db: f64) -> Option<f64> {
        threshold_crossing(&self.curve(detector), threshold_db)
    }
}

/// First downward crossing of `threshold` by a curve sorted on x, located by
/// linear interpolation of Q in dB between the bracketing points.
pub fn threshold_crossing(points: &[(f64, f64)], threshold: f64) -> Option<f64> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.windows(2).find_map(|w| {
        let ((x0, q0), (x1, q1)) = (w[0], w[1]);
        if q0 >= threshold && q1 < threshold {
            Some(x0 + (q0 - threshold) / (q0 - q1) * (x1 - x0))
        } else {
            None
        }
    })
}

/// Seed of a sweep point, derived from the master seed and the point's own
/// coordinates so reordering the grid never changes a point's result.
pub fn point_seed(master: u64, mode: SweepMode, power_dbm: f64, reach_km: f64) -> u64 {
    seed::derive(
        master,
        &[seed::stream::POINT, mode as u64, power_dbm.to_bits(), reach_km.to_bits()],
    )
}

struct Point {
    power_dbm: f64,
    reach_km: f64,
    n_spans: usize,
}

fn run_grid(cfg: &RunConfig, mode: SweepMode, points: Vec<Point>) -> Result<SweepRecord> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<Vec<SweepRow>>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let s = point_seed(cfg.seed, mode, p.power_dbm, p.reach_km);
                log::info!("{} point: {:.2} dBm, {:.0} km", mode.as_str(), p.power_dbm, p.reach_km);
                let outcomes = run_point(cfg, p.power_dbm, p.n_spans, s)?;
                Ok(outcomes
                    .into_iter()
                    .map(|o| SweepRow {
                        mode,
                        symbol_rate_gbaud: cfg.symbol_rate_gbaud,
                        dispersion_managed: cfg.dispersion_managed,
                        reach_km: p.reach_km,
                        power_dbm: p.power_dbm,
                        detector: o.detector,
                        ser: o.report.ser,
                        ber: o.report.ber,
                        q_db: o.report.q_factor_db,
                        n_test: cfg.n_test,
                        seed: s,
                        radius_r: o.relative_radius,
                        n_bit_errors: o.report.n_bit_errors,
                    })
                    .collect())
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(SweepRecord { rows })
}

/// Q versus launch power over `cfg.launch_powers_dbm` at `cfg.n_spans` spans.
pub fn sweep_power(cfg: &RunConfig) -> Result<SweepRecord> {
    if cfg.launch_powers_dbm.is_empty() {
        return error::config("power sweep needs at least one launch power");
    }
    let reach = cfg.n_spans as f64 * cfg.span_length_km;
    let points = cfg
        .launch_powers_dbm
        .iter()
        .map(|&p| Point {
            power_dbm: p,
            reach_km: reach,
            n_spans: cfg.n_spans,
        })
        .collect();
    run_grid(cfg, SweepMode::Power, points)
}

/// Q versus reach over `cfg.reaches_km` at `cfg.reach_power_dbm`.
pub fn sweep_reach(cfg: &RunConfig) -> Result<SweepRecord> {
    if cfg.reaches_km.is_empty() {
        return error::config("reach sweep needs at least one reach");
    }
    let points = cfg
        .reaches_km
        .iter()
        .map(|&r| {
            Ok(Point {
                power_dbm: cfg.reach_power_dbm,
                reach_km: r,
                n_spans: cfg.spans_for_reach(r)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    run_grid(cfg, SweepMode::Reach, points)
}

/// Per-detector summary written next to a sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorSummary {
    pub detector: DetectorKind,
    pub optimum_x: Option<f64>,
    pub optimum_q_db: Option<f64>,
    pub threshold_reach_km: Option<f64>,
    pub min_bit_errors: u64,
}

pub fn summarize(record: &SweepRecord, cfg: &RunConfig) -> Vec<DetectorSummary> {
    cfg.detectors
        .iter()
        .map(|&d| {
            let opt = record.optimum(d);
            let reach_mode = record.rows.first().is_some_and(|r| r.mode == SweepMode::Reach);
            DetectorSummary {
                detector: d,
                optimum_x: opt.map(|o| o.0),
                optimum_q_db: opt.map(|o| o.1),
                threshold_reach_km: if reach_mode {
                    record.threshold_reach(d, cfg.q_threshold_db)
                } else {
                    None
                },
                min_bit_errors: record
                    .rows
                    .iter()
                    .filter(|r| r.detector == d)
                    .map(|r| r.n_bit_errors)
                    .min()
                    .unwrap_or(0),
            }
        })
        .collect()
}
