//! Experiment driver: run configuration, single points, sweeps, channel
//! self-checks and file output.
//!
//! Every sweep writes `<name>.csv` with a fixed column order and a
//! `<name>.json` sidecar holding the resolved configuration and a
//! per-detector summary.

mod config;
mod run;
mod sweep;
mod validate;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{DetectorKind, RunConfig, MIN_TEST_SYMBOLS};
pub use run::{detect, padded_block_len, run_back_to_back, run_point, simulate_point, DetectorOutcome, PointSignals};
pub use sweep::{
    point_seed, summarize, sweep_power, sweep_reach, threshold_crossing, DetectorSummary, SweepMode, SweepRecord,
    SweepRow, CSV_HEADER,
};
pub use validate::{
    check_ase_variance, check_dispersion_inverse, check_energy_conservation, check_spm_phase, check_step_halving,
    validate_channel, CheckResult, ValidationReport,
};

use crate::detectors::{self, rasterize_regions, GridSpec, RegionMap};
use crate::dsp::write_iq_csv;
use crate::error::{self, Result};

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a RunConfig,
    summary: Vec<DetectorSummary>,
}

/// Writes `<out_dir>/<name>.csv` and its JSON sidecar; returns the CSV path.
pub fn write_sweep(cfg: &RunConfig, name: &str, record: &SweepRecord) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out_dir)?;
    let csv = cfg.out_dir.join(format!("{name}.csv"));
    record.write_csv(BufWriter::new(File::create(&csv)?))?;
    let sidecar = Sidecar {
        config: cfg,
        summary: summarize(record, cfg),
    };
    let json = cfg.out_dir.join(format!("{name}.json"));
    serde_json::to_writer_pretty(BufWriter::new(File::create(json)?), &sidecar)?;
    Ok(csv)
}

/// Simulates one point and writes the received test-symbol cloud of both
/// polarizations (`index,re_x,im_x,re_y,im_y`, one row per test symbol).
pub fn dump_constellation(cfg: &RunConfig, power_dbm: f64, n_spans: usize, path: &Path) -> Result<PointSignals> {
    if cfg.n_test == 0 {
        return error::input("empty test set");
    }
    let s = point_seed(cfg.seed, SweepMode::Power, power_dbm, n_spans as f64 * cfg.span_length_km);
    let signals = simulate_point(cfg, power_dbm, n_spans, s)?;
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    write_iq_csv(BufWriter::new(File::create(path)?), &signals.rx_test[0], &signals.rx_test[1])?;
    Ok(signals)
}

/// Trains Parzen-window detectors at one point and rasterizes their
/// decision regions over each polarization's training cloud.
pub fn region_maps(cfg: &RunConfig, signals: &PointSignals, resolution: usize) -> Result<[RegionMap; 2]> {
    let alphabet = cfg.alphabet()?;
    let labels = [&signals.sent_train.pol_x.labels, &signals.sent_train.pol_y.labels];
    let map = |pol: usize| -> Result<RegionMap> {
        let (det, _) = detectors::train(&signals.rx_train[pol], labels[pol], &alphabet)?;
        let grid = GridSpec::covering(&signals.rx_train[pol], 0.05, resolution, resolution)?;
        rasterize_regions(&det, &grid)
    };
    Ok([map(0)?, map(1)?])
}

/// Writes `regions_x.csv` and `regions_y.csv` into `dir`.
pub fn dump_regions(cfg: &RunConfig, power_dbm: f64, n_spans: usize, resolution: usize, dir: &Path) -> Result<[PathBuf; 2]> {
    let s = point_seed(cfg.seed, SweepMode::Power, power_dbm, n_spans as f64 * cfg.span_length_km);
    let signals = simulate_point(cfg, power_dbm, n_spans, s)?;
    let maps = region_maps(cfg, &signals, resolution)?;
    fs::create_dir_all(dir)?;
    let paths = [dir.join("regions_x.csv"), dir.join("regions_y.csv")];
    for (map, path) in maps.iter().zip(&paths) {
        map.write_csv(BufWriter::new(File::create(path)?))?;
    }
    Ok(paths)
}
